use serde::{Deserialize, Serialize};

use super::dijkstra::ShortestPathTree;
use super::flat::{CellIndex, FlatGrid};
use super::gmm::GaussianMixture;
use super::{ControlLimits, PlannerState};
use crate::error::{Result, VistaError};
use crate::geometry::Vec2;
use crate::scalar::Real;

/// A candidate route before headings are assigned.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidatePath<T> {
    /// Raw mixture draw.
    pub draw: Vec2<T>,
    /// Reachable cell the draw snapped to, and its center.
    pub target_cell: CellIndex,
    pub target: Vec2<T>,
    /// Full shortest path from the start cell to the target cell.
    pub cells: Vec<CellIndex>,
    /// Downsampled waypoint positions.
    pub waypoints: Vec<Vec2<T>>,
}

/// Reachable cell whose center is nearest to `p`, ties to the lower linear
/// index. `reachable` must be in linear index order.
pub fn nearest_reachable<T: Real>(flat: &FlatGrid<T>, reachable: &[CellIndex], p: Vec2<T>) -> Option<CellIndex> {
    let mut best: Option<(T, CellIndex)> = None;
    for &c in reachable {
        let d = flat.cell_center(c).dist_sq(p);
        if best.is_none_or(|(bd, _)| d < bd) {
            best = Some((d, c));
        }
    }
    best.map(|(_, c)| c)
}

/// The robot position followed by the path cell centers. The start cell's
/// center is skipped when the robot stands in it and the path leaves it, so
/// the route does not double back to the middle of the robot's own cell.
pub fn route_polyline<T: Real>(
    flat: &FlatGrid<T>,
    tree: &ShortestPathTree,
    cells: &[CellIndex],
    robot: Vec2<T>,
) -> Vec<Vec2<T>> {
    let skip = usize::from(!tree.snapped && cells.len() > 1);
    let mut polyline = Vec::with_capacity(cells.len() + 1);
    polyline.push(robot);
    polyline.extend(cells[skip..].iter().map(|&c| flat.cell_center(c)));
    polyline
}

/// Places at most `max_waypoints` points evenly by arc length along
/// `polyline` (excluding its first point), no more than `spacing` apart.
///
/// The route is cut at `max_waypoints * spacing`; when it is shorter than
/// that, the last waypoint is exactly the final polyline point.
pub fn downsample_path<T: Real>(polyline: &[Vec2<T>], max_waypoints: usize, spacing: T) -> Vec<Vec2<T>> {
    let Some(&last) = polyline.last() else {
        return Vec::new();
    };
    let mut cum = Vec::with_capacity(polyline.len());
    cum.push(T::zero());
    for w in polyline.windows(2) {
        let prev = *cum.last().unwrap();
        cum.push(prev + w[0].dist(w[1]));
    }
    let total = *cum.last().unwrap();
    if !(total > T::zero()) || max_waypoints == 0 {
        return vec![last];
    }
    let horizon = T::from_usize(max_waypoints).unwrap() * spacing;
    let length = total.min(horizon);
    let needed = (length / spacing).ceil().to_usize().unwrap_or(1).max(1);
    let count = needed.min(max_waypoints);
    let step = length / T::from_usize(count).unwrap();
    let mut out = Vec::with_capacity(count);
    let mut seg = 0;
    for i in 1..=count {
        if i == count && length >= total {
            out.push(last);
            break;
        }
        let s = if i == count { length } else { step * T::from_usize(i).unwrap() };
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let a = polyline[seg];
        let b = polyline[seg + 1];
        let len = cum[seg + 1] - cum[seg];
        let t = if len > T::zero() { ((s - cum[seg]) / len).min(T::one()) } else { T::one() };
        out.push(a + (b - a) * t);
    }
    out
}

/// Draws `n_traj` goals from the mixture, snaps each to the nearest
/// reachable cell and turns the shortest path into waypoints spaced at most
/// one control period of travel apart.
#[allow(clippy::too_many_arguments)]
pub fn sample_trajectories<T: Real>(
    tree: &ShortestPathTree,
    flat: &FlatGrid<T>,
    gmm: &GaussianMixture<T>,
    current: &PlannerState<T>,
    limits: &ControlLimits<T>,
    n_traj: usize,
    max_waypoints: usize,
    seed: u64,
) -> Result<Vec<CandidatePath<T>>> {
    let reachable = tree.reachable();
    if reachable.is_empty() {
        return Err(VistaError::Planning("shortest-path tree is empty".into()));
    }
    if gmm.is_empty() {
        return Err(VistaError::Planning("mixture has no components".into()));
    }
    let spacing = limits.max_speed * limits.dt;
    let draws = gmm.sample_n(n_traj, seed);
    let out = draws
        .into_iter()
        .map(|draw| {
            let target_cell = nearest_reachable(flat, &reachable, draw).expect("non-empty reachable set");
            let cells = tree.path_to(target_cell).expect("reachable target");
            let polyline = route_polyline(flat, tree, &cells, current.position());
            let waypoints = downsample_path(&polyline, max_waypoints, spacing);
            CandidatePath { draw, target_cell, target: flat.cell_center(target_cell), cells, waypoints }
        })
        .collect();
    Ok(out)
}
