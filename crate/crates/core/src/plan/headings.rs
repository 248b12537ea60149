use super::{ControlLimits, PlannerState};
use crate::geometry::{CameraPose, Vec2, Vec3};
use crate::scalar::{wrap_angle, Real};

/// Moves `from` toward `desired` by at most `max_step`, the short way round.
fn step_toward<T: Real>(from: T, desired: T, max_step: T) -> T {
    let delta = wrap_angle(desired - from);
    wrap_angle(from + delta.max(-max_step).min(max_step))
}

/// Rate-limited yaws tracking one desired heading per waypoint, starting from
/// `current_yaw`. `None` holds the previous yaw.
fn track<T: Real>(desired: impl Iterator<Item = Option<T>>, current_yaw: T, limits: &ControlLimits<T>) -> Vec<T> {
    let max_step = limits.max_yaw_step();
    let mut prev = current_yaw;
    desired
        .map(|d| {
            let next = match d {
                Some(d) => step_toward(prev, d, max_step),
                None => prev,
            };
            prev = next;
            next
        })
        .collect()
}

/// One yaw per waypoint: each waypoint looks at its nearest attention target
/// (frontier cell center or mixture mean), subject to the yaw rate limit.
/// Targets closer than `1e-9` m to a waypoint carry no direction and are
/// skipped; with no usable target the yaw is held.
pub fn feasible_headings<T: Real>(
    path: &[Vec2<T>],
    frontier: &[Vec2<T>],
    means: &[Vec2<T>],
    current: &PlannerState<T>,
    limits: &ControlLimits<T>,
) -> Vec<T> {
    let min_d2 = T::lit(1e-18);
    let desired = path.iter().map(|&p| {
        let mut best: Option<(T, Vec2<T>)> = None;
        for &t in frontier.iter().chain(means) {
            let d2 = t.dist_sq(p);
            if d2 > min_d2 && best.is_none_or(|(bd, _)| d2 < bd) {
                best = Some((d2, t));
            }
        }
        best.map(|(_, t)| (t - p).angle())
    });
    track(desired, current.yaw, limits)
}

/// Yaws facing along the direction of travel, rate limited.
pub fn velocity_headings<T: Real>(path: &[Vec2<T>], current: &PlannerState<T>, limits: &ControlLimits<T>) -> Vec<T> {
    let mut prev = current.position();
    let min_d2 = T::lit(1e-18);
    let desired: Vec<Option<T>> = path
        .iter()
        .map(|&p| {
            let d = p - prev;
            prev = p;
            (d.dot(d) > min_d2).then(|| d.angle())
        })
        .collect();
    track(desired.into_iter(), current.yaw, limits)
}

/// Lifts planar states to level camera poses at height `z`.
pub fn construct_full_pose<T: Real>(states: &[PlannerState<T>], z: T) -> Vec<CameraPose<T>> {
    states.iter().map(|s| CameraPose::level(Vec3::new(s.x, s.y, z), s.yaw)).collect()
}

/// Drops height, roll and pitch from a pose.
pub fn project_pose<T: Real>(pose: &CameraPose<T>) -> PlannerState<T> {
    PlannerState::new(pose.position.x, pose.position.y, pose.yaw)
}
