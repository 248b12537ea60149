use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::flat::{CellIndex, FlatGrid};
use crate::geometry::Vec2;
use crate::scalar::Real;

/// Points drawn around the most query-relevant cells.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SemanticSampleSet<T> {
    pub points: Vec<Vec2<T>>,
    /// The top cells the categorical was built over, best first.
    pub top_cells: Vec<CellIndex>,
}

impl<T> SemanticSampleSet<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Draws `n_samples` points from a categorical over the `m` cells with the
/// largest positive semantic sums (weights proportional to the sums), each
/// jittered uniformly inside its cell. Ties in the ranking go to the lower
/// linear index. Returns an empty set when no cell has positive semantics.
pub fn get_semantic_samples<T: Real>(
    flat: &FlatGrid<T>,
    m: usize,
    n_samples: usize,
    seed: u64,
) -> SemanticSampleSet<T> {
    let mut ranked: Vec<usize> = (0..flat.len()).filter(|&i| flat.semantic[i] > T::zero()).collect();
    if ranked.is_empty() || m == 0 {
        return SemanticSampleSet::default();
    }
    ranked.sort_by(|&a, &b| flat.semantic[b].partial_cmp(&flat.semantic[a]).unwrap().then(a.cmp(&b)));
    ranked.truncate(m);
    let weights: Vec<f64> = ranked.iter().map(|&i| flat.semantic[i].to_f64_lossy()).collect();
    let top_cells: Vec<CellIndex> = ranked.iter().map(|&i| flat.unlinear(i)).collect();
    let Ok(dist) = WeightedIndex::new(&weights) else {
        return SemanticSampleSet::default();
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = T::lit(0.5);
    let points = (0..n_samples)
        .map(|_| {
            let cell = top_cells[dist.sample(&mut rng)];
            let jx = T::lit(rng.gen::<f64>()) - half;
            let jy = T::lit(rng.gen::<f64>()) - half;
            let c = flat.cell_center(cell);
            Vec2::new(c.x + jx * flat.resolution, c.y + jy * flat.resolution)
        })
        .collect();
    SemanticSampleSet { points, top_cells }
}
