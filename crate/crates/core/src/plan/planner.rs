use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dijkstra::dijkstra_paths;
use super::flat::{flatten_voxel_grid, CellIndex, FlatGrid};
use super::frontier::{get_frontiers, FrontierSet};
use super::gmm::{fit_gmm, GaussianMixture};
use super::headings::{construct_full_pose, feasible_headings};
use super::sample::{sample_trajectories, CandidatePath};
use super::semantic::{get_semantic_samples, SemanticSampleSet};
use super::{derive_seed, ControlLimits, PlanConfig, PlannerState, Trajectory};
use crate::error::Result;
use crate::geometry::{CameraIntrinsics, Vec2};
use crate::map::VoxelGrid;
use crate::scalar::{wrap_angle, Real};
use crate::score::{
    decay_weight, image_geometric_gain, image_semantic_gain, trajectory_score, ScoreWeights, WaypointScore,
};

/// Candidate summary kept in the debug record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate<T> {
    pub target: Vec2<T>,
    pub waypoints: Vec<PlannerState<T>>,
    pub score: T,
}

/// Everything the planner looked at in one cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanDebug<T> {
    pub flat: Option<FlatGrid<T>>,
    pub frontiers: Vec<CellIndex>,
    pub semantic_samples: Vec<Vec2<T>>,
    pub gmm: Option<GaussianMixture<T>>,
    pub candidates: Vec<Candidate<T>>,
    pub best_index: Option<usize>,
    pub c: T,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanOutcome<T> {
    pub trajectory: Trajectory<T>,
    /// All scored candidates, in sampling order. Empty on recovery.
    pub candidates: Vec<Trajectory<T>>,
    pub best_index: Option<usize>,
    /// Weights the candidates were scored with.
    pub weights_used: ScoreWeights<T>,
    /// Weights for the next cycle.
    pub next_weights: ScoreWeights<T>,
    /// Why planning fell back to the in-place rotation, if it did.
    pub error: Option<String>,
    pub debug: Option<PlanDebug<T>>,
}

impl<T> PlanOutcome<T> {
    pub fn is_recovery(&self) -> bool {
        self.error.is_some()
    }
}

/// One full in-place revolution at the current position, in yaw steps no
/// larger than the rate limit allows.
pub fn recovery_trajectory<T: Real>(current: &PlannerState<T>, limits: &ControlLimits<T>, z: T) -> Trajectory<T> {
    let max_step = limits.max_yaw_step();
    let turn = T::TAU();
    let n = (turn / max_step).ceil().to_usize().unwrap_or(1).max(1);
    let step = turn / T::from_usize(n).unwrap();
    let waypoints: Vec<PlannerState<T>> = (1..=n)
        .map(|i| PlannerState::new(current.x, current.y, wrap_angle(current.yaw + step * T::from_usize(i).unwrap())))
        .collect();
    let poses = construct_full_pose(&waypoints, z);
    Trajectory { waypoints, poses, waypoint_scores: Vec::new(), score: T::zero(), target: current.position() }
}

/// Renders each waypoint view and scores the trajectory.
pub(crate) fn score_waypoints<T: Real>(
    grid: &VoxelGrid<T>,
    waypoints: Vec<PlannerState<T>>,
    target: Vec2<T>,
    z: T,
    intrinsics: &CameraIntrinsics<T>,
    weights: &ScoreWeights<T>,
    use_semantics: bool,
) -> Result<Trajectory<T>> {
    let poses = construct_full_pose(&waypoints, z);
    let mut scores = Vec::with_capacity(poses.len());
    for pose in &poses {
        let (gain, semantic) = grid.render_gain_semantic(pose, intrinsics);
        let geometric = image_geometric_gain(&gain)?;
        let semantic = if use_semantics { image_semantic_gain(&semantic)? } else { T::zero() };
        scores.push(WaypointScore { geometric, semantic, pose: *pose });
    }
    let score = trajectory_score(&scores, weights)?;
    Ok(Trajectory { waypoints, poses, waypoint_scores: scores, score, target })
}

/// Index of the highest score, the first one on ties.
pub(crate) fn argmax_first<T: Real>(scores: impl IntoIterator<Item = T>) -> Option<usize> {
    let mut best: Option<(usize, T)> = None;
    for (i, s) in scores.into_iter().enumerate() {
        if best.is_none_or(|(_, b)| s > b) {
            best = Some((i, s));
        }
    }
    best.map(|(i, _)| i)
}

struct Stages<T> {
    flat: FlatGrid<T>,
    frontiers: FrontierSet<T>,
    semantic: SemanticSampleSet<T>,
    gmm: Option<GaussianMixture<T>>,
    paths: Vec<CandidatePath<T>>,
}

fn build_candidates<T: Real>(
    current: &PlannerState<T>,
    grid: &VoxelGrid<T>,
    config: &PlanConfig<T>,
    seed: u64,
    partial: &mut Option<Stages<T>>,
) -> Result<()> {
    let flat = flatten_voxel_grid(grid, config.z_lo, config.z_hi)?;
    let frontiers = get_frontiers(&flat);
    let semantic = if config.use_semantics {
        get_semantic_samples(&flat, config.top_m, config.semantic_samples, derive_seed(seed, 1))
    } else {
        SemanticSampleSet::default()
    };
    let stages = partial.insert(Stages { flat, frontiers, semantic, gmm: None, paths: Vec::new() });
    let tree = dijkstra_paths(&stages.flat, current, config.inflation_radius)?;
    let gmm = fit_gmm(
        &stages.frontiers,
        &stages.semantic,
        config.gmm_components,
        stages.flat.resolution,
        config.gmm_max_iter,
        config.gmm_tol,
        derive_seed(seed, 2),
    )?;
    let gmm = stages.gmm.insert(gmm);
    stages.paths = sample_trajectories(
        &tree,
        &stages.flat,
        gmm,
        current,
        &config.limits,
        config.n_traj,
        config.max_waypoints,
        derive_seed(seed, 3),
    )?;
    Ok(())
}

/// One receding-horizon planning cycle.
///
/// Candidates are scored with `weights`; the returned `next_weights` carry
/// the decayed geometric weight. Any planning failure yields the in-place
/// rotation with the failure recorded in `error`.
pub fn plan<T: Real>(
    current: &PlannerState<T>,
    grid: &VoxelGrid<T>,
    weights: &ScoreWeights<T>,
    config: &PlanConfig<T>,
    seed: u64,
) -> PlanOutcome<T> {
    let next_weights = if config.decay_c { decay_weight(weights) } else { *weights };
    let mut stages = None;
    let built = build_candidates(current, grid, config, seed, &mut stages);
    let scored: Result<Vec<Trajectory<T>>> = built.and_then(|_| {
        let st = stages.as_ref().expect("stages built");
        let means = &st.gmm.as_ref().expect("mixture fitted").means;
        st.paths
            .par_iter()
            .map(|p| {
                let yaws = feasible_headings(&p.waypoints, &st.frontiers.points, means, current, &config.limits);
                let states = p.waypoints.iter().zip(&yaws).map(|(w, &y)| PlannerState::new(w.x, w.y, y)).collect();
                score_waypoints(
                    grid,
                    states,
                    p.target,
                    config.flight_z,
                    &config.render_intrinsics,
                    weights,
                    config.use_semantics,
                )
            })
            .collect()
    });
    let (trajectory, candidates, best_index, error) = match scored {
        Ok(cands) if !cands.is_empty() => {
            let best = argmax_first(cands.iter().map(|t| t.score)).expect("non-empty");
            (cands[best].clone(), cands, Some(best), None)
        }
        Ok(_) => (
            recovery_trajectory(current, &config.limits, config.flight_z),
            Vec::new(),
            None,
            Some("no candidates".to_string()),
        ),
        Err(e) => {
            (recovery_trajectory(current, &config.limits, config.flight_z), Vec::new(), None, Some(e.to_string()))
        }
    };
    let debug = config.debug.then(|| {
        let st = stages;
        PlanDebug {
            frontiers: st.as_ref().map(|s| s.frontiers.cells.clone()).unwrap_or_default(),
            semantic_samples: st.as_ref().map(|s| s.semantic.points.clone()).unwrap_or_default(),
            gmm: st.as_ref().and_then(|s| s.gmm.clone()),
            flat: st.map(|s| s.flat),
            candidates: candidates
                .iter()
                .map(|t| Candidate { target: t.target, waypoints: t.waypoints.clone(), score: t.score })
                .collect(),
            best_index,
            c: weights.c,
            error: error.clone(),
        }
    });
    PlanOutcome { trajectory, candidates, best_index, weights_used: *weights, next_weights, error, debug }
}
