//! Scenario configuration: which scenes, strategies and seeds to run, and
//! every tunable of the mapper, planner, sensor and referee.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use vista_core::plan::{ControlLimits, PlanConfig};
use vista_core::{CameraIntrinsics, DirectionMode, ScoreWeights, Vec3, VoxelGrid};

use crate::builtins::{builtin_scene, is_builtin};
use crate::episode::StrategyKind;
use crate::error::{setup, Result};
use crate::scene::{GroundTruthScene, SceneSpec};
use crate::sensor::SensorModel;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub dims: [usize; 3],
    pub resolution: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dims: [80, 80, 16], resolution: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BandSection {
    pub z_lo: f64,
    pub z_hi: f64,
}

impl Default for BandSection {
    fn default() -> Self {
        Self { z_lo: 0.75, z_hi: 1.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WeightsSection {
    pub c: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl Default for WeightsSection {
    fn default() -> Self {
        Self { c: 2.0, gamma: 0.9, beta: 0.998 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlannerSection {
    pub top_m: usize,
    pub semantic_samples: usize,
    pub gmm_components: usize,
    pub gmm_max_iter: usize,
    pub gmm_tol: f64,
    pub n_traj: usize,
    pub max_waypoints: usize,
    pub inflation_radius: usize,
}

impl Default for PlannerSection {
    fn default() -> Self {
        Self {
            top_m: 10,
            semantic_samples: 50,
            gmm_components: 4,
            gmm_max_iter: 50,
            gmm_tol: 1e-4,
            n_traj: 24,
            max_waypoints: 6,
            inflation_radius: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LimitsSection {
    pub max_speed: f64,
    pub max_yaw_rate: f64,
    pub dt: f64,
}

impl Default for LimitsSection {
    fn default() -> Self {
        Self { max_speed: 1.0, max_yaw_rate: 1.0, dt: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SensorSection {
    pub width: usize,
    pub height: usize,
    pub hfov_deg: f64,
    pub max_range: f64,
    pub depth_noise: f64,
    pub drop_rate: f64,
}

impl Default for SensorSection {
    fn default() -> Self {
        Self { width: 64, height: 48, hfov_deg: 90.0, max_range: 8.0, depth_noise: 0.0, drop_rate: 0.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderSection {
    pub width: usize,
    pub height: usize,
    pub hfov_deg: f64,
    pub max_range: f64,
}

impl Default for RenderSection {
    fn default() -> Self {
        Self { width: 32, height: 8, hfov_deg: 90.0, max_range: 8.0 }
    }
}

/// Complete scenario. Every field has a default, unknown keys are rejected.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Builtin scene name or path to a scene JSON file.
    pub scene: String,
    /// Scenes for a batch; empty means `[scene]`.
    pub scenes: Vec<String>,
    /// Overrides the scene's own query object name.
    pub query: Option<String>,
    pub strategy: StrategyKind,
    pub strategies: Vec<StrategyKind>,
    pub seed: u64,
    pub seeds: Vec<u64>,
    pub grid: GridSection,
    pub band: BandSection,
    pub flight_z: f64,
    pub weights: WeightsSection,
    pub planner: PlannerSection,
    pub limits: LimitsSection,
    pub sensor: SensorSection,
    pub render: RenderSection,
    pub d_succ: f64,
    /// Episode time budget, seconds.
    pub time_budget: f64,
    /// Optional cap on replanning cycles.
    pub max_cycles: Option<usize>,
    /// Sensing instants per control period.
    pub sense_substeps: usize,
    /// Planar distance from the map center that triggers a recenter.
    pub recenter_distance: f64,
    pub direction_mode: DirectionMode,
    /// Replace every sensed embedding with one of zero query similarity.
    pub zero_semantics: bool,
    /// Attach planner debug records to the cycle logs.
    pub debug_log: bool,
    /// Directory relative scene paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            scene: "open_room".into(),
            scenes: Vec::new(),
            query: None,
            strategy: StrategyKind::Vista,
            strategies: Vec::new(),
            seed: 0,
            seeds: Vec::new(),
            grid: GridSection::default(),
            band: BandSection::default(),
            flight_z: 1.0,
            weights: WeightsSection::default(),
            planner: PlannerSection::default(),
            limits: LimitsSection::default(),
            sensor: SensorSection::default(),
            render: RenderSection::default(),
            d_succ: crate::referee::DEFAULT_SUCCESS_DISTANCE,
            time_budget: 120.0,
            max_cycles: None,
            sense_substeps: 2,
            recenter_distance: 2.0,
            direction_mode: DirectionMode::Bitmask,
            zero_semantics: false,
            debug_log: false,
            base_dir: None,
        }
    }
}

fn positive(x: f64) -> bool {
    x > 0.0 && x.is_finite()
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| setup(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| setup(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf);
        Ok(cfg)
    }

    /// Checks every field; the error names the offending key.
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, rule: &str| Err(setup(format!("{key} {rule}")));
        if self.scene.is_empty() && self.scenes.is_empty() {
            return fail("scene", "must name a builtin scene or a scene file");
        }
        if self.grid.dims.contains(&0) {
            return fail("grid.dims", "must all be >= 1");
        }
        if !positive(self.grid.resolution) {
            return fail("grid.resolution", "must be > 0");
        }
        if !(self.band.z_lo < self.band.z_hi) || !self.band.z_lo.is_finite() || !self.band.z_hi.is_finite() {
            return fail("band.z_lo", "must be < band.z_hi");
        }
        if !(self.flight_z >= self.band.z_lo && self.flight_z <= self.band.z_hi) {
            return fail("flight_z", "must lie inside the band [band.z_lo, band.z_hi]");
        }
        // The map window is centered on the flight height; the band must
        // contain at least one layer of voxel centers.
        let res = self.grid.resolution;
        let bottom = self.flight_z - self.grid.dims[2] as f64 * res / 2.0;
        let layers = (0..self.grid.dims[2])
            .map(|k| bottom + (k as f64 + 0.5) * res)
            .filter(|&c| c >= self.band.z_lo && c <= self.band.z_hi)
            .count();
        if layers == 0 {
            return fail("band", "contains no voxel layer of the map grid (grid.dims[2] or grid.resolution too small)");
        }
        if !(self.weights.c >= 0.0) || !self.weights.c.is_finite() {
            return fail("weights.c", "must be >= 0");
        }
        if !(self.weights.gamma > 0.0 && self.weights.gamma <= 1.0) {
            return fail("weights.gamma", "must lie in (0, 1]");
        }
        if !(self.weights.beta > 0.0 && self.weights.beta <= 1.0) {
            return fail("weights.beta", "must lie in (0, 1]");
        }
        let p = &self.planner;
        for (key, v) in [
            ("planner.top_m", p.top_m),
            ("planner.gmm_components", p.gmm_components),
            ("planner.gmm_max_iter", p.gmm_max_iter),
            ("planner.n_traj", p.n_traj),
            ("planner.max_waypoints", p.max_waypoints),
        ] {
            if v == 0 {
                return fail(key, "must be >= 1");
            }
        }
        if !positive(p.gmm_tol) {
            return fail("planner.gmm_tol", "must be > 0");
        }
        if !positive(self.limits.max_speed) {
            return fail("limits.max_speed", "must be > 0");
        }
        if !positive(self.limits.max_yaw_rate) {
            return fail("limits.max_yaw_rate", "must be > 0");
        }
        if !positive(self.limits.dt) {
            return fail("limits.dt", "must be > 0");
        }
        let s = &self.sensor;
        if s.width == 0 || s.height == 0 {
            return fail("sensor.width", "and sensor.height must be >= 1");
        }
        if !(s.hfov_deg > 0.0 && s.hfov_deg < 180.0) {
            return fail("sensor.hfov_deg", "must lie in (0, 180)");
        }
        if !positive(s.max_range) {
            return fail("sensor.max_range", "must be > 0");
        }
        if !(s.depth_noise >= 0.0) || !s.depth_noise.is_finite() {
            return fail("sensor.depth_noise", "must be >= 0");
        }
        if !(0.0..1.0).contains(&s.drop_rate) {
            return fail("sensor.drop_rate", "must lie in [0, 1)");
        }
        let r = &self.render;
        if r.width == 0 || r.height == 0 {
            return fail("render.width", "and render.height must be >= 1");
        }
        if !(r.hfov_deg > 0.0 && r.hfov_deg < 180.0) {
            return fail("render.hfov_deg", "must lie in (0, 180)");
        }
        if !positive(r.max_range) {
            return fail("render.max_range", "must be > 0");
        }
        if !positive(self.d_succ) {
            return fail("d_succ", "must be > 0");
        }
        if !(self.time_budget >= 0.0) || !self.time_budget.is_finite() {
            return fail("time_budget", "must be >= 0");
        }
        if self.sense_substeps == 0 {
            return fail("sense_substeps", "must be >= 1");
        }
        if !positive(self.recenter_distance) {
            return fail("recenter_distance", "must be > 0");
        }
        Ok(())
    }

    pub fn batch_scenes(&self) -> Vec<String> {
        if self.scenes.is_empty() {
            vec![self.scene.clone()]
        } else {
            self.scenes.clone()
        }
    }

    pub fn batch_strategies(&self) -> Vec<StrategyKind> {
        if self.strategies.is_empty() {
            vec![self.strategy]
        } else {
            self.strategies.clone()
        }
    }

    pub fn batch_seeds(&self) -> Vec<u64> {
        if self.seeds.is_empty() {
            vec![self.seed]
        } else {
            self.seeds.clone()
        }
    }

    /// Resolves a scene reference: builtin name first, then a JSON file.
    pub fn load_scene_spec(&self, reference: &str, seed: u64) -> Result<SceneSpec> {
        if is_builtin(reference) {
            return builtin_scene(reference, seed);
        }
        let mut path = PathBuf::from(reference);
        if path.is_relative() {
            if let Some(base) = &self.base_dir {
                path = base.join(path);
            }
        }
        if !path.is_file() {
            return builtin_scene(reference, seed);
        }
        let text = std::fs::read_to_string(&path)?;
        serde_json::from_str(&text).map_err(|e| setup(format!("scene file {}: {e}", path.display())))
    }

    /// Builds the ground truth for `reference` with the query and semantic
    /// overrides applied, and checks it against the map configuration.
    pub fn build_scene(&self, reference: &str, seed: u64) -> Result<GroundTruthScene> {
        let spec = self.load_scene_spec(reference, seed)?;
        let mut scene = GroundTruthScene::from_spec(&spec)?;
        if let Some(q) = &self.query {
            scene = scene.with_query(Some(q))?;
        }
        scene = scene.with_zero_semantics(self.zero_semantics);
        scene.check_start(self.flight_z)?;
        if !(self.flight_z > scene.geometry.origin.z
            && self.flight_z < scene.geometry.origin.z + scene.geometry.extent().z)
        {
            return Err(setup("flight_z lies outside the scene's vertical extent"));
        }
        scene.integration_query()?;
        Ok(scene)
    }

    pub fn score_weights(&self) -> Result<ScoreWeights<f64>> {
        Ok(ScoreWeights::new(self.weights.c, self.weights.gamma, self.weights.beta)?)
    }

    pub fn control_limits(&self) -> Result<ControlLimits<f64>> {
        Ok(ControlLimits::new(self.limits.max_speed, self.limits.max_yaw_rate, self.limits.dt)?)
    }

    pub fn sensor_intrinsics(&self) -> Result<CameraIntrinsics<f64>> {
        let s = &self.sensor;
        Ok(CameraIntrinsics::with_fov(s.width, s.height, s.hfov_deg.to_radians(), s.max_range)?)
    }

    pub fn sensor_model(&self, seed: u64) -> Result<SensorModel> {
        Ok(SensorModel {
            intrinsics: self.sensor_intrinsics()?,
            depth_noise: self.sensor.depth_noise,
            drop_rate: self.sensor.drop_rate,
            seed,
        })
    }

    pub fn plan_config(&self, strategy: StrategyKind) -> Result<PlanConfig<f64>> {
        let r = &self.render;
        let p = &self.planner;
        let cfg = PlanConfig {
            z_lo: self.band.z_lo,
            z_hi: self.band.z_hi,
            flight_z: self.flight_z,
            top_m: p.top_m,
            semantic_samples: p.semantic_samples,
            gmm_components: p.gmm_components,
            gmm_max_iter: p.gmm_max_iter,
            gmm_tol: p.gmm_tol,
            n_traj: p.n_traj,
            max_waypoints: p.max_waypoints,
            inflation_radius: p.inflation_radius,
            limits: self.control_limits()?,
            render_intrinsics: CameraIntrinsics::with_fov(r.width, r.height, r.hfov_deg.to_radians(), r.max_range)?,
            use_semantics: strategy.uses_semantics(),
            decay_c: strategy.decays_weight(),
            debug: self.debug_log,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Empty map window centered on `(x, y, flight_z)`.
    pub fn new_map(&self, x: f64, y: f64) -> Result<VoxelGrid<f64>> {
        Ok(VoxelGrid::new(Vec3::new(x, y, self.flight_z), self.grid.resolution, self.grid.dims, self.direction_mode)?)
    }
}
