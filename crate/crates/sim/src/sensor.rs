//! Simulated depth camera emitting semantic point clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use vista_core::map::{SemanticPointCloud, DEPTH_NO_HIT};
use vista_core::{CameraIntrinsics, CameraPose, Image, Ray, VistaError};

use crate::scene::GroundTruthScene;

/// Points are pushed this far past the measured surface so they land inside
/// the cell that was hit rather than on its face.
const SURFACE_NUDGE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorModel {
    pub intrinsics: CameraIntrinsics<f64>,
    /// Standard deviation of additive range noise, meters.
    pub depth_noise: f64,
    /// Probability that a valid return emits no point.
    pub drop_rate: f64,
    pub seed: u64,
}

impl SensorModel {
    pub fn new(intrinsics: CameraIntrinsics<f64>) -> Self {
        Self { intrinsics, depth_noise: 0.0, drop_rate: 0.0, seed: 0 }
    }

    pub fn validate(&self) -> Result<(), VistaError> {
        self.intrinsics.validate()?;
        if !(self.depth_noise >= 0.0) || !self.depth_noise.is_finite() {
            return Err(VistaError::InvalidInput("sensor depth_noise must be >= 0".into()));
        }
        if !(0.0..1.0).contains(&self.drop_rate) {
            return Err(VistaError::InvalidInput("sensor drop_rate must lie in [0, 1)".into()));
        }
        Ok(())
    }
}

/// One camera frame: per-pixel range along the pixel ray (`DEPTH_NO_HIT`
/// when nothing is hit within range) and the back-projected points.
#[derive(Clone, Debug, PartialEq)]
pub struct SensorFrame {
    pub depth: Image<f64>,
    pub cloud: SemanticPointCloud<f64>,
}

/// Ray casts every pixel against the ground truth. Depth is the range at
/// which the ray enters its first occupied cell, plus noise; each surviving
/// return is back-projected and labelled with the hit cell's embedding.
pub fn sense(scene: &GroundTruthScene, pose: &CameraPose<f64>, model: &SensorModel) -> Result<SensorFrame, VistaError> {
    model.validate()?;
    if !scene.in_bounds(pose.position) {
        return Err(VistaError::InvalidInput("sensor pose lies outside the scene bounds".into()));
    }
    let k = &model.intrinsics;
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    let noise = (model.depth_noise > 0.0).then(|| Normal::new(0.0, model.depth_noise).expect("valid sigma"));
    let zero_query: Option<Vec<f64>> = if scene.zero_semantics {
        Some(
            scene
                .integration_query()
                .map_err(|e| VistaError::InvalidInput(e.to_string()))?
                .iter()
                .map(|x| -x)
                .collect(),
        )
    } else {
        None
    };

    let mut depth = Vec::with_capacity(k.pixel_count());
    let mut points = Vec::new();
    let mut colors = Vec::new();
    let mut embeddings = Vec::new();
    for dir in k.world_rays(pose) {
        let ray = Ray::new(pose.position, dir, k.max_range)?;
        let Some((t, cell)) = scene.cast(&ray) else {
            depth.push(DEPTH_NO_HIT);
            continue;
        };
        let measured = match &noise {
            Some(n) => (t + n.sample(&mut rng)).max(0.0),
            None => t,
        };
        depth.push(measured);
        if model.drop_rate > 0.0 && rng.gen::<f64>() < model.drop_rate {
            continue;
        }
        points.push(ray.at(measured + SURFACE_NUDGE));
        colors.push(scene.color(cell));
        embeddings.push(match &zero_query {
            Some(q) => q.clone(),
            None => scene.embedding_of(cell).to_vec(),
        });
    }
    let cloud = SemanticPointCloud::new(points, colors, embeddings)?;
    Ok(SensorFrame { depth: Image { width: k.width, height: k.height, data: depth }, cloud })
}
