use super::dijkstra::dijkstra_paths;
use super::flat::flatten_voxel_grid;
use super::headings::velocity_headings;
use super::planner::{recovery_trajectory, score_waypoints, PlanOutcome};
use super::sample::{downsample_path, nearest_reachable, route_polyline};
use super::{PlanConfig, PlannerState, Trajectory};
use crate::error::{Result, VistaError};
use crate::geometry::Vec2;
use crate::map::{VoxelGrid, VoxelState};
use crate::scalar::Real;
use crate::score::{decay_weight, ScoreWeights};

/// Planar position of the Occupied voxel with the highest semantic value,
/// ties to the lower linear index.
fn best_semantic_point<T: Real>(grid: &VoxelGrid<T>) -> Option<Vec2<T>> {
    let mut best: Option<(T, usize)> = None;
    for (i, v) in grid.voxels().iter().enumerate() {
        if v.state == VoxelState::Occupied && best.is_none_or(|(b, _)| v.semantic > b) {
            best = Some((v.semantic, i));
        }
    }
    best.map(|(_, i)| grid.geometry().voxel_center(grid.geometry().unlinear(i)).xy())
}

fn greedy_trajectory<T: Real>(
    current: &PlannerState<T>,
    grid: &VoxelGrid<T>,
    weights: &ScoreWeights<T>,
    config: &PlanConfig<T>,
) -> Result<Trajectory<T>> {
    let goal = best_semantic_point(grid).ok_or_else(|| VistaError::Planning("no occupied voxel observed".into()))?;
    let flat = flatten_voxel_grid(grid, config.z_lo, config.z_hi)?;
    let tree = dijkstra_paths(&flat, current, config.inflation_radius)?;
    let target_cell = nearest_reachable(&flat, &tree.reachable(), goal)
        .ok_or_else(|| VistaError::Planning("shortest-path tree is empty".into()))?;
    let cells = tree.path_to(target_cell).expect("reachable target");
    let polyline = route_polyline(&flat, &tree, &cells, current.position());
    let spacing = config.limits.max_speed * config.limits.dt;
    let points = downsample_path(&polyline, config.max_waypoints, spacing);
    let yaws = velocity_headings(&points, current, &config.limits);
    let states = points.iter().zip(&yaws).map(|(p, &y)| PlannerState::new(p.x, p.y, y)).collect();
    score_waypoints(
        grid,
        states,
        flat.cell_center(target_cell),
        config.flight_z,
        &config.render_intrinsics,
        weights,
        config.use_semantics,
    )
}

/// Baseline that drives straight for the most query-similar observed voxel,
/// facing along the direction of travel.
pub fn plan_semantic_greedy<T: Real>(
    current: &PlannerState<T>,
    grid: &VoxelGrid<T>,
    weights: &ScoreWeights<T>,
    config: &PlanConfig<T>,
) -> PlanOutcome<T> {
    let next_weights = if config.decay_c { decay_weight(weights) } else { *weights };
    let (trajectory, error) = match greedy_trajectory(current, grid, weights, config) {
        Ok(t) => (t, None),
        Err(e) => (recovery_trajectory(current, &config.limits, config.flight_z), Some(e.to_string())),
    };
    let best_index = error.is_none().then_some(0);
    let candidates = if error.is_none() { vec![trajectory.clone()] } else { Vec::new() };
    PlanOutcome { trajectory, candidates, best_index, weights_used: *weights, next_weights, error, debug: None }
}
