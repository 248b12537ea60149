use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::frontier::FrontierSet;
use super::semantic::SemanticSampleSet;
use crate::error::{invalid, Result, VistaError};
use crate::geometry::Vec2;
use crate::scalar::Real;

/// Symmetric 2x2 matrix `[[xx, xy], [xy, yy]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cov2<T> {
    pub xx: T,
    pub xy: T,
    pub yy: T,
}

impl<T: Real> Cov2<T> {
    pub fn diagonal(v: T) -> Self {
        Self { xx: v, xy: T::zero(), yy: v }
    }

    /// Eigenvalues, smallest first.
    pub fn eigenvalues(&self) -> (T, T) {
        let half = T::lit(0.5);
        let mean = (self.xx + self.yy) * half;
        let r = ((self.xx - self.yy) * half).hypot(self.xy);
        (mean - r, mean + r)
    }

    /// Lower Cholesky factor `(l11, l21, l22)`, if positive definite.
    pub fn cholesky(&self) -> Option<(T, T, T)> {
        if !(self.xx > T::zero()) {
            return None;
        }
        let l11 = self.xx.sqrt();
        let l21 = self.xy / l11;
        let rem = self.yy - l21 * l21;
        if !(rem > T::zero()) {
            return None;
        }
        Some((l11, l21, rem.sqrt()))
    }

    pub fn determinant(&self) -> T {
        self.xx * self.yy - self.xy * self.xy
    }
}

/// Raises every eigenvalue of `c` below `floor` up to `floor`, keeping the
/// eigenvectors. A matrix already above the floor is returned unchanged.
pub fn floor_covariance<T: Real>(c: Cov2<T>, floor: T) -> Cov2<T> {
    if c.xy == T::zero() {
        return Cov2 { xx: c.xx.max(floor), xy: c.xy, yy: c.yy.max(floor) };
    }
    let (lo, hi) = c.eigenvalues();
    if lo >= floor {
        return c;
    }
    if hi <= floor {
        return Cov2::diagonal(floor);
    }
    // Unit eigenvector of the small eigenvalue.
    let (vx, vy) = (c.xy, lo - c.xx);
    let n = vx.hypot(vy);
    let (vx, vy) = (vx / n, vy / n);
    let lift = floor - lo;
    Cov2 { xx: c.xx + lift * vx * vx, xy: c.xy + lift * vx * vy, yy: c.yy + lift * vy * vy }
}

/// Weighted mixture of 2D Gaussians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaussianMixture<T> {
    pub weights: Vec<T>,
    pub means: Vec<Vec2<T>>,
    pub covariances: Vec<Cov2<T>>,
    /// Set when fewer distinct points than requested components were given.
    pub reduced_components: bool,
    pub iterations: usize,
    pub log_likelihood: T,
}

impl<T: Real> GaussianMixture<T> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Draws one point: a component by weight, then a Gaussian sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec2<T> {
        let w: Vec<f64> = self.weights.iter().map(|w| w.to_f64_lossy()).collect();
        let j = WeightedIndex::new(&w).map(|d| d.sample(rng)).unwrap_or(0);
        self.sample_component(j, rng)
    }

    fn sample_component<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Vec2<T> {
        let z0: f64 = rng.sample(StandardNormal);
        let z1: f64 = rng.sample(StandardNormal);
        let (z0, z1) = (T::lit(z0), T::lit(z1));
        let m = self.means[j];
        match self.covariances[j].cholesky() {
            Some((l11, l21, l22)) => Vec2::new(m.x + l11 * z0, m.y + l21 * z0 + l22 * z1),
            None => m,
        }
    }

    /// Draws `n` points using a sampler seeded with `seed`.
    pub fn sample_n(&self, n: usize, seed: u64) -> Vec<Vec2<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w: Vec<f64> = self.weights.iter().map(|w| w.to_f64_lossy()).collect();
        let dist = WeightedIndex::new(&w).ok();
        (0..n)
            .map(|_| {
                let j = dist.as_ref().map(|d| d.sample(&mut rng)).unwrap_or(0);
                self.sample_component(j, &mut rng)
            })
            .collect()
    }
}

fn log_density<T: Real>(p: Vec2<T>, mean: Vec2<T>, cov: &Cov2<T>) -> T {
    let det = cov.determinant();
    let dx = p.x - mean.x;
    let dy = p.y - mean.y;
    let maha = (cov.yy * dx * dx - (cov.xy + cov.xy) * dx * dy + cov.xx * dy * dy) / det;
    let two = T::lit(2.0);
    -(two * T::PI()).ln() - det.ln() / two - maha / two
}

/// Maximum-likelihood covariance of `points` around `mean` with per-point
/// weights `resp` summing to `total`.
fn weighted_cov<T: Real>(points: &[Vec2<T>], resp: impl Iterator<Item = T>, mean: Vec2<T>, total: T) -> Cov2<T> {
    let mut c = Cov2 { xx: T::zero(), xy: T::zero(), yy: T::zero() };
    for (p, r) in points.iter().zip(resp) {
        let dx = p.x - mean.x;
        let dy = p.y - mean.y;
        c.xx += r * dx * dx;
        c.xy += r * dx * dy;
        c.yy += r * dy * dy;
    }
    c.xx /= total;
    c.xy /= total;
    c.yy /= total;
    c
}

fn distinct_count<T: Real>(points: &[Vec2<T>]) -> usize {
    let mut keys: Vec<(u64, u64)> =
        points.iter().map(|p| (p.x.to_f64_lossy().to_bits(), p.y.to_f64_lossy().to_bits())).collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

/// k-means++ seeding: first center uniform, then proportional to squared
/// distance from the nearest chosen center.
fn kmeans_pp<T: Real>(points: &[Vec2<T>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec2<T>> {
    let mut centers = vec![points[rng.gen_range(0..points.len())]];
    let mut d2: Vec<f64> = points.iter().map(|p| p.dist_sq(centers[0]).to_f64_lossy()).collect();
    while centers.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => points[dist.sample(rng)],
            Err(_) => break,
        };
        for (d, p) in d2.iter_mut().zip(points) {
            *d = d.min(p.dist_sq(next).to_f64_lossy());
        }
        centers.push(next);
    }
    centers
}

/// Fits a `k`-component mixture to `points` with EM.
///
/// Covariance eigenvalues are floored at `floor`; `k` is reduced to the
/// number of distinct points when larger.
pub fn fit_gmm_points<T: Real>(
    points: &[Vec2<T>],
    k: usize,
    floor: T,
    max_iter: usize,
    tol: T,
    seed: u64,
) -> Result<GaussianMixture<T>> {
    if k == 0 {
        return Err(invalid("gmm needs at least one component"));
    }
    if points.is_empty() {
        return Err(VistaError::Planning("no frontier or semantic points to fit".into()));
    }
    if !(floor > T::zero()) {
        return Err(invalid("covariance floor must be > 0"));
    }
    let distinct = distinct_count(points);
    let k_eff = k.min(distinct);
    let reduced = k_eff < k;
    let n = points.len();
    let nt = T::from_usize(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let sum = points.iter().fold(Vec2::new(T::zero(), T::zero()), |a, &p| a + p);
    let global_mean = Vec2::new(sum.x / nt, sum.y / nt);
    let global = floor_covariance(weighted_cov(points, std::iter::repeat(T::one()), global_mean, nt), floor);

    if k_eff == 1 {
        // Closed form: a single Gaussian is the sample mean and covariance.
        let (mean, cov) = (global_mean, global);
        let ll = points.iter().map(|&p| log_density(p, mean, &cov)).sum::<T>() / nt;
        return Ok(GaussianMixture {
            weights: vec![T::one()],
            means: vec![mean],
            covariances: vec![cov],
            reduced_components: reduced,
            iterations: 0,
            log_likelihood: ll,
        });
    }

    let mut means = kmeans_pp(points, k_eff, &mut rng);
    let k_eff = means.len();
    let mut covs = vec![global; k_eff];
    let mut weights = vec![T::one() / T::from_usize(k_eff).unwrap(); k_eff];
    let mut resp = vec![T::zero(); n * k_eff];
    let mut prev_ll = T::neg_infinity();
    let mut ll = prev_ll;
    let mut iterations = 0;
    for _ in 0..max_iter {
        iterations += 1;
        // E-step with log-sum-exp.
        ll = T::zero();
        let log_w: Vec<T> = weights.iter().map(|w| w.ln()).collect();
        for (i, &p) in points.iter().enumerate() {
            let row = &mut resp[i * k_eff..(i + 1) * k_eff];
            let mut best = T::neg_infinity();
            for j in 0..k_eff {
                row[j] = log_w[j] + log_density(p, means[j], &covs[j]);
                best = best.max(row[j]);
            }
            let mut total = T::zero();
            for r in row.iter_mut() {
                *r = (*r - best).exp();
                total += *r;
            }
            for r in row.iter_mut() {
                *r /= total;
            }
            ll += best + total.ln();
        }
        ll /= nt;
        // M-step.
        for j in 0..k_eff {
            let nk: T = (0..n).map(|i| resp[i * k_eff + j]).sum();
            if !(nk > T::epsilon() * nt) {
                weights[j] = T::zero();
                continue;
            }
            let mut m = Vec2::new(T::zero(), T::zero());
            for (i, &p) in points.iter().enumerate() {
                m = m + p * resp[i * k_eff + j];
            }
            means[j] = Vec2::new(m.x / nk, m.y / nk);
            let r = (0..n).map(|i| resp[i * k_eff + j]);
            covs[j] = floor_covariance(weighted_cov(points, r, means[j], nk), floor);
            weights[j] = nk / nt;
        }
        let wsum: T = weights.iter().copied().sum();
        for w in weights.iter_mut() {
            *w /= wsum;
        }
        if (ll - prev_ll).abs() < tol {
            break;
        }
        prev_ll = ll;
    }
    // Drop components that lost all support.
    let keep: Vec<usize> = (0..k_eff).filter(|&j| weights[j] > T::zero()).collect();
    let mut out = GaussianMixture {
        weights: keep.iter().map(|&j| weights[j]).collect(),
        means: keep.iter().map(|&j| means[j]).collect(),
        covariances: keep.iter().map(|&j| covs[j]).collect(),
        reduced_components: reduced,
        iterations,
        log_likelihood: ll,
    };
    let wsum: T = out.weights.iter().copied().sum();
    for w in out.weights.iter_mut() {
        *w /= wsum;
    }
    Ok(out)
}

/// Fits the planning mixture over frontier cell centers and semantic samples
/// with the covariance floor `(resolution / 2)^2`.
pub fn fit_gmm<T: Real>(
    frontier: &FrontierSet<T>,
    semantic: &SemanticSampleSet<T>,
    k: usize,
    resolution: T,
    max_iter: usize,
    tol: T,
    seed: u64,
) -> Result<GaussianMixture<T>> {
    let points: Vec<Vec2<T>> = frontier.points.iter().chain(&semantic.points).copied().collect();
    let half = resolution * T::lit(0.5);
    fit_gmm_points(&points, k, half * half, max_iter, tol, seed)
}
