//! Planar single-integrator robot with a heading angle.

use serde::{Deserialize, Serialize};
use vista_core::plan::{ControlLimits, PlannerState};
use vista_core::scalar::wrap_angle;
use vista_core::{Ray, Vec2, Vec3};

use crate::scene::GroundTruthScene;

/// Distance kept between the robot and a surface it ran into.
const CONTACT_BACKOFF: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepOutcome {
    pub state: PlannerState<f64>,
    pub collided: bool,
}

/// Moves `from` toward `to` by at most `max_dist`, landing on `to` exactly
/// when it is within reach.
fn limited_position(from: Vec2<f64>, to: Vec2<f64>, max_dist: f64) -> Vec2<f64> {
    let d = to - from;
    let dist = d.norm();
    if dist <= max_dist && to.dist(from) <= max_dist {
        return to;
    }
    let mut scale = max_dist / dist;
    loop {
        let p = from + d * scale;
        if p.dist(from) <= max_dist {
            return p;
        }
        scale *= 1.0 - 1e-12;
    }
}

/// Turns from `from` toward `to` the short way by at most `max_step`.
pub fn limited_yaw(from: f64, to: f64, max_step: f64) -> f64 {
    let target = wrap_angle(to);
    if wrap_angle(target - from).abs() <= max_step {
        return target;
    }
    let mut step = wrap_angle(target - from).clamp(-max_step, max_step);
    loop {
        let y = wrap_angle(from + step);
        if wrap_angle(y - from).abs() <= max_step {
            return y;
        }
        step *= 1.0 - 1e-12;
    }
}

/// Advances one control period toward `target` at height `z`. Motion that
/// would enter an occupied ground-truth cell stops just short of it.
pub fn step_robot(
    scene: &GroundTruthScene,
    state: &PlannerState<f64>,
    target: &PlannerState<f64>,
    limits: &ControlLimits<f64>,
    z: f64,
) -> StepOutcome {
    let from = state.position();
    let mut to = limited_position(from, target.position(), limits.max_speed * limits.dt);
    let yaw = limited_yaw(state.yaw, target.yaw, limits.max_yaw_step());

    let mut collided = false;
    let seg = to - from;
    let len = seg.norm();
    if len > 0.0 {
        let ray = Ray::new(Vec3::new(from.x, from.y, z), Vec3::new(seg.x, seg.y, 0.0), len).expect("finite segment");
        if let Some((t, _)) = scene.cast(&ray) {
            collided = true;
            let keep = (t - CONTACT_BACKOFF).max(0.0);
            to = if keep == 0.0 { from } else { limited_position(from, from + seg * (keep / len), keep) };
        }
    }
    StepOutcome { state: PlannerState { x: to.x, y: to.y, yaw }, collided }
}
