//! Episode metrics and the ground-truth shortest-path oracle.

use vista_core::map::VoxelState;
use vista_core::plan::{dijkstra_paths, FlatGrid, PlannerState};
use vista_core::{Vec2, VistaError};

use crate::scene::GroundTruthScene;

/// Length of the shortest 8-connected path over ground-truth free cells in
/// the band `[z_lo, z_hi]` from `start` to any cell whose center lies within
/// `d_succ` (planar) of the query object. `None` without a query or when no
/// such cell is reachable.
pub fn shortest_path_length(
    scene: &GroundTruthScene,
    start: Vec2<f64>,
    d_succ: f64,
    z_lo: f64,
    z_hi: f64,
) -> Option<f64> {
    let object = scene.query_object()?;
    let g = &scene.geometry;
    let dims = [g.dims[0], g.dims[1]];
    let mut flat = FlatGrid::filled(g.origin.xy(), g.resolution, dims, VoxelState::Free).ok()?;
    for (state, &occ) in flat.states.iter_mut().zip(&scene.band_occupancy(z_lo, z_hi)) {
        if occ {
            *state = VoxelState::Occupied;
        }
    }
    let tree = dijkstra_paths(&flat, &PlannerState::new(start.x, start.y, 0.0), 0).ok()?;
    let goal = object.center.xy();
    tree.reachable()
        .into_iter()
        .filter(|&c| flat.cell_center(c).dist(goal) <= d_succ)
        .filter_map(|c| tree.cost_to(c))
        .min()
        .map(|c| c.value::<f64>() * g.resolution)
}

/// Success weighted by inverse path length:
/// `(1/N) sum_i S_i * l_i / max(p_i, l_i)`.
///
/// Every entry is `(success, shortest, executed)`; a missing or
/// non-positive shortest length is rejected.
pub fn spl_from_terms(entries: &[(bool, Option<f64>, f64)]) -> Result<f64, VistaError> {
    if entries.is_empty() {
        return Err(VistaError::InvalidInput("spl of an empty episode list".into()));
    }
    let mut total = 0.0;
    for (i, &(success, shortest, executed)) in entries.iter().enumerate() {
        let l = shortest.ok_or_else(|| VistaError::InvalidInput(format!("episode {i} has no shortest-path length")))?;
        if !(l > 0.0) {
            return Err(VistaError::InvalidInput(format!("episode {i} has shortest-path length {l}, must be > 0")));
        }
        if success {
            total += l / executed.max(l);
        }
    }
    Ok(total / entries.len() as f64)
}

/// Median of a non-empty sample; the mean of the middle pair for even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 })
}
