//! View-diversity and semantic information gain, and the discounted
//! trajectory score used to rank candidate plans.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{CameraPose, Vec3};
use crate::map::{check_unit, Image};
use crate::scalar::Real;

/// Maps `min_v(-<v, d>)` to a gain in `[0, 1]`.
#[inline]
pub fn gain_from_min<T: Real>(min_neg_dot: T) -> T {
    ((min_neg_dot + T::one()) * T::lit(0.5)).max(T::zero()).min(T::one())
}

/// Per-pixel view-diversity gain `(min_v(-<v, d>) + 1) / 2` of candidate
/// direction `d` against the stored directions of the voxel it hits.
///
/// 0 when `d` repeats a stored view, 1 when it is antipodal to every stored
/// view. The stored set must be non-empty and `d` unit-norm.
pub fn pixel_gain<T: Real>(stored: impl IntoIterator<Item = Vec3<T>>, candidate: Vec3<T>) -> Result<T> {
    check_unit(&candidate.to_array(), "candidate direction")?;
    let mut best: Option<T> = None;
    for v in stored {
        let a = -v.dot(candidate);
        best = Some(best.map_or(a, |b| b.min(a)));
    }
    best.map(gain_from_min).ok_or_else(|| invalid("stored direction set is empty"))
}

fn image_mean<T: Real>(img: &Image<T>) -> Result<T> {
    if img.data.is_empty() {
        return Err(invalid("image has no pixels"));
    }
    let sum: T = img.data.iter().copied().sum();
    Ok(sum / T::from_usize(img.data.len()).unwrap())
}

/// Image-level geometric gain: mean over all pixels of the gain image.
pub fn image_geometric_gain<T: Real>(gain: &Image<T>) -> Result<T> {
    image_mean(gain)
}

/// Image-level semantic gain: mean over all pixels of the semantic image.
pub fn image_semantic_gain<T: Real>(semantic: &Image<T>) -> Result<T> {
    image_mean(semantic)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WaypointScore<T> {
    pub geometric: T,
    pub semantic: T,
    pub pose: CameraPose<T>,
}

/// Geometric weight `c`, discount `gamma`, decay `beta` and replanning index.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreWeights<T> {
    pub c: T,
    pub gamma: T,
    pub beta: T,
    pub replan_index: u32,
}

impl<T: Real> ScoreWeights<T> {
    pub fn new(c: T, gamma: T, beta: T) -> Result<Self> {
        let w = Self { c, gamma, beta, replan_index: 0 };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= T::zero()) || !self.c.is_finite() {
            return Err(invalid("c must be >= 0"));
        }
        let unit = |x: T| x > T::zero() && x <= T::one();
        if !unit(self.gamma) {
            return Err(invalid("gamma must lie in (0, 1]"));
        }
        if !unit(self.beta) {
            return Err(invalid("beta must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// Discounted trajectory score `sum_k gamma^(K-k) (c * G_I + G_S)` with
/// `k = 1..K`: the last waypoint carries weight 1.
pub fn trajectory_score<T: Real>(waypoints: &[WaypointScore<T>], weights: &ScoreWeights<T>) -> Result<T> {
    if waypoints.is_empty() {
        return Err(invalid("trajectory has no waypoints"));
    }
    let k_total = waypoints.len();
    let mut total = T::zero();
    for (i, w) in waypoints.iter().enumerate() {
        let exponent = (k_total - (i + 1)) as i32;
        total += weights.gamma.powi(exponent) * (weights.c * w.geometric + w.semantic);
    }
    Ok(total)
}

/// One replanning step of the geometric weight decay: `c <- beta^i * c`,
/// then `i <- i + 1`.
pub fn decay_weight<T: Real>(weights: &ScoreWeights<T>) -> ScoreWeights<T> {
    let mut out = *weights;
    out.c = weights.beta.powi(weights.replan_index as i32) * weights.c;
    out.replan_index = weights.replan_index + 1;
    out
}
