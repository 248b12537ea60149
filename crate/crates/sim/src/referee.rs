//! Ground-truth success adjudication.

use serde::{Deserialize, Serialize};
use vista_core::{CameraIntrinsics, CameraPose};

use crate::scene::GroundTruthScene;

pub const DEFAULT_SUCCESS_DISTANCE: f64 = 1.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Success,
    Continue,
}

/// Success when the camera is within `d_succ` of the query object's center,
/// the center projects inside the image within sensor range, and the
/// segment from the camera to the center crosses no occupied cell except
/// the object's own. A scene without a query never succeeds.
pub fn check_success(
    scene: &GroundTruthScene,
    pose: &CameraPose<f64>,
    intrinsics: &CameraIntrinsics<f64>,
    d_succ: f64,
) -> Verdict {
    let Some(target) = scene.query_index() else { return Verdict::Continue };
    let center = scene.objects[target].center;
    let offset = center - pose.position;
    if offset.norm() > d_succ {
        return Verdict::Continue;
    }
    let p_cam = pose.unrotate(offset);
    let Some((u, v)) = intrinsics.project(p_cam) else { return Verdict::Continue };
    let in_image = u >= 0.0 && u < intrinsics.width as f64 && v >= 0.0 && v < intrinsics.height as f64;
    if !in_image || offset.norm() > intrinsics.max_range {
        return Verdict::Continue;
    }
    if scene.line_of_sight(pose.position, center, Some(target)) {
        Verdict::Success
    } else {
        Verdict::Continue
    }
}
