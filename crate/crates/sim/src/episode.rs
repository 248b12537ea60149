//! The closed sense, map, plan, step loop for one episode.

use std::fmt;
use std::str::FromStr;

use log::{debug, info};
use serde::{Deserialize, Serialize};
use vista_core::map::export::MapSnapshot;
use vista_core::map::{Channel, VoxelState};
use vista_core::plan::{
    derive_seed, plan, plan_semantic_greedy, recovery_trajectory, ControlLimits, PlanConfig, PlanDebug, PlanOutcome,
    PlannerState,
};
use vista_core::scalar::wrap_angle;
use vista_core::{CameraPose, ScoreWeights, Vec3, VistaError, VoxelGrid};

use crate::config::ScenarioConfig;
use crate::error::Result;
use crate::kinematics::step_robot;
use crate::metrics::{shortest_path_length, spl_from_terms};
use crate::referee::{check_success, Verdict};
use crate::scene::GroundTruthScene;
use crate::sensor::{sense, SensorModel};

pub const RESULT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    /// The full planner: semantic sampling and decaying geometric weight.
    #[default]
    Vista,
    /// Drive to the most query-similar observed voxel.
    #[serde(alias = "semantic")]
    SemanticGreedy,
    /// The planner with the semantic term zeroed and a fixed weight.
    #[serde(alias = "geometric")]
    GeometricOnly,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 3] = [Self::Vista, Self::SemanticGreedy, Self::GeometricOnly];

    pub fn uses_semantics(self) -> bool {
        !matches!(self, Self::GeometricOnly)
    }

    pub fn decays_weight(self) -> bool {
        matches!(self, Self::Vista)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Vista => "vista",
            Self::SemanticGreedy => "semantic_greedy",
            Self::GeometricOnly => "geometric_only",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "vista" => Ok(Self::Vista),
            "semantic" | "semantic_greedy" => Ok(Self::SemanticGreedy),
            "geometric" | "geometric_only" => Ok(Self::GeometricOnly),
            other => Err(format!("unknown strategy `{other}` (expected vista, semantic or geometric)")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndReason {
    Success,
    Collision,
    TimeBudget,
    MaxCycles,
}

/// What happened in one replanning cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleLog {
    pub cycle: usize,
    /// Sim time at which the plan was made.
    pub time: f64,
    pub state: PlannerState<f64>,
    /// Geometric weight the candidates were scored with.
    pub c: f64,
    pub best_index: Option<usize>,
    pub best_score: Option<f64>,
    pub candidate_count: usize,
    pub recovery: bool,
    pub plan_error: Option<String>,
    /// Waypoints of the selected trajectory.
    pub selected: Vec<PlannerState<f64>>,
    /// Voxels of the map window that are not Unobserved.
    pub known_voxels: usize,
    pub known_fraction: f64,
    pub band_unobserved_fraction: Option<f64>,
    /// Largest semantic value in the map rendered from the current pose.
    pub max_rendered_semantic: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub debug: Option<PlanDebug<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    pub schema_version: u32,
    pub scene: String,
    pub strategy: StrategyKind,
    pub seed: u64,
    pub query: Option<String>,
    pub success: bool,
    /// Sim time of the successful sensing instant.
    pub time_to_reach: Option<f64>,
    pub time_budget: f64,
    pub elapsed: f64,
    pub path_length: f64,
    pub shortest_path_length: Option<f64>,
    pub collision_count: usize,
    pub cycles: usize,
    pub recoveries: usize,
    pub end_reason: EndReason,
    pub start_state: PlannerState<f64>,
    pub final_state: PlannerState<f64>,
    pub final_band_unobserved_fraction: Option<f64>,
    pub cycle_logs: Vec<CycleLog>,
}

impl EpisodeResult {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("episode result serializes");
        s.push('\n');
        s
    }
}

/// Success weighted by inverse path length over a set of episodes.
pub fn spl(results: &[EpisodeResult]) -> Result<f64, VistaError> {
    let terms: Vec<_> = results.iter().map(|r| (r.success, r.shortest_path_length, r.path_length)).collect();
    spl_from_terms(&terms)
}

/// Fraction of band voxels in the map window that are Unobserved, counting
/// only voxels whose centers are inside the scene and free in ground truth.
pub fn band_unobserved_fraction(scene: &GroundTruthScene, grid: &VoxelGrid<f64>, z_lo: f64, z_hi: f64) -> Option<f64> {
    let g = grid.geometry();
    let (mut total, mut unobserved) = (0usize, 0usize);
    for k in 0..g.dims[2] {
        let cz = g.voxel_center([0, 0, k]).z;
        if cz < z_lo || cz > z_hi {
            continue;
        }
        for j in 0..g.dims[1] {
            for i in 0..g.dims[0] {
                let idx = [i, j, k];
                let c = g.voxel_center(idx);
                match scene.geometry.voxel_of(c) {
                    Some(gt) if !scene.cell_occupied(gt) => {
                        total += 1;
                        if grid.state(idx) == VoxelState::Unobserved {
                            unobserved += 1;
                        }
                    }
                    _ => {}
                }
            }
        }
    }
    (total > 0).then(|| unobserved as f64 / total as f64)
}

enum StepEnd {
    Continue,
    Stop(EndReason),
}

struct Episode<'a> {
    scene: &'a GroundTruthScene,
    cfg: &'a ScenarioConfig,
    plan_cfg: PlanConfig<f64>,
    limits: ControlLimits<f64>,
    sensor: SensorModel,
    query: Vec<f64>,
    grid: VoxelGrid<f64>,
    state: PlannerState<f64>,
    time: f64,
    seed: u64,
    sense_count: u64,
    path_length: f64,
    collisions: usize,
    success_time: Option<f64>,
}

impl Episode<'_> {
    fn pose(&self, s: &PlannerState<f64>) -> CameraPose<f64> {
        CameraPose::level(Vec3::new(s.x, s.y, self.cfg.flight_z), s.yaw)
    }

    /// Senses at `s`, updates the map (integrate, carve, record) and asks
    /// the referee. Returns true on success.
    fn sense_at(&mut self, s: &PlannerState<f64>, time: f64) -> Result<bool> {
        let pose = self.pose(s);
        self.sensor.seed = derive_seed(self.seed, 10_000 + self.sense_count);
        self.sense_count += 1;
        let frame = sense(self.scene, &pose, &self.sensor)?;
        self.grid.integrate_point_cloud(&frame.cloud, &self.query)?;
        self.grid.carve_free_space(&pose, &self.sensor.intrinsics, &frame.depth)?;
        self.grid.record_view_directions(&pose, &self.sensor.intrinsics);
        if check_success(self.scene, &pose, &self.sensor.intrinsics, self.cfg.d_succ) == Verdict::Success {
            self.success_time = Some(time);
            return Ok(true);
        }
        Ok(false)
    }

    /// Executes one control period toward `target`, sensing at every
    /// substep along the executed motion.
    fn step(&mut self, target: &PlannerState<f64>) -> Result<StepEnd> {
        let dt = self.limits.dt;
        if self.time + dt > self.cfg.time_budget {
            return Ok(StepEnd::Stop(EndReason::TimeBudget));
        }
        let from = self.state;
        let out = step_robot(self.scene, &from, target, &self.limits, self.cfg.flight_z);
        let to = out.state;
        self.path_length += to.position().dist(from.position());
        let dyaw = wrap_angle(to.yaw - from.yaw);
        let n = self.cfg.sense_substeps;
        let mut found = false;
        for k in 1..=n {
            let f = k as f64 / n as f64;
            let s = if k == n {
                to
            } else {
                let p = from.position() + (to.position() - from.position()) * f;
                PlannerState::new(p.x, p.y, from.yaw + dyaw * f)
            };
            if self.sense_at(&s, self.time + dt * f)? {
                found = true;
                break;
            }
        }
        self.state = to;
        self.time += dt;
        if found {
            return Ok(StepEnd::Stop(EndReason::Success));
        }
        if out.collided {
            self.collisions += 1;
            return Ok(StepEnd::Stop(EndReason::Collision));
        }
        let center = self.grid.center();
        if to.position().dist(center.xy()) > self.cfg.recenter_distance {
            self.grid.recenter(Vec3::new(to.x, to.y, self.cfg.flight_z));
        }
        Ok(StepEnd::Continue)
    }

    fn run_steps(&mut self, targets: &[PlannerState<f64>]) -> Result<StepEnd> {
        for t in targets {
            if let StepEnd::Stop(r) = self.step(t)? {
                return Ok(StepEnd::Stop(r));
            }
        }
        Ok(StepEnd::Continue)
    }
}

/// Runs one episode on a built scene.
///
/// The robot first turns a full circle in place, then replans every control
/// period and executes the first waypoint of the selected trajectory (the
/// whole rotation when the planner falls back to recovery). The episode ends
/// on success, collision, the time budget or the cycle cap.
pub fn run_episode(
    scene: &GroundTruthScene,
    scene_ref: &str,
    strategy: StrategyKind,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<EpisodeResult> {
    run_episode_with_map(scene, scene_ref, strategy, cfg, seed).map(|(r, _)| r)
}

/// Like [`run_episode`], also returning the final map seen from the final pose.
pub fn run_episode_with_map(
    scene: &GroundTruthScene,
    scene_ref: &str,
    strategy: StrategyKind,
    cfg: &ScenarioConfig,
    seed: u64,
) -> Result<(EpisodeResult, MapSnapshot<f64>)> {
    cfg.validate()?;
    let plan_cfg = cfg.plan_config(strategy)?;
    let limits = cfg.control_limits()?;
    let mut weights: ScoreWeights<f64> = cfg.score_weights()?;
    let sensor = cfg.sensor_model(seed)?;
    let query = scene.integration_query()?;
    scene.check_start(cfg.flight_z)?;
    let start = scene.start;
    let grid = cfg.new_map(start.x, start.y)?;
    let shortest = shortest_path_length(scene, start.position(), cfg.d_succ, cfg.band.z_lo, cfg.band.z_hi);

    let mut ep = Episode {
        scene,
        cfg,
        plan_cfg,
        limits,
        sensor,
        query,
        grid,
        state: start,
        time: 0.0,
        seed,
        sense_count: 0,
        path_length: 0.0,
        collisions: 0,
        success_time: None,
    };
    let mut logs = Vec::new();
    let mut cycles = 0;
    let mut recoveries = 0;

    let end = 'episode: {
        if cfg.time_budget <= 0.0 {
            break 'episode EndReason::TimeBudget;
        }
        if ep.sense_at(&start, 0.0)? {
            break 'episode EndReason::Success;
        }
        let spin = recovery_trajectory(&start, &limits, cfg.flight_z);
        if let StepEnd::Stop(r) = ep.run_steps(&spin.waypoints)? {
            break 'episode r;
        }
        loop {
            if cfg.max_cycles.is_some_and(|m| cycles >= m) {
                break 'episode EndReason::MaxCycles;
            }
            if ep.time + limits.dt > cfg.time_budget {
                break 'episode EndReason::TimeBudget;
            }
            let snapshot = ep.grid.snapshot();
            let plan_seed = derive_seed(seed, 1_000_000 + cycles as u64);
            let outcome: PlanOutcome<f64> = match strategy {
                StrategyKind::SemanticGreedy => plan_semantic_greedy(&ep.state, &snapshot, &weights, &ep.plan_cfg),
                _ => plan(&ep.state, &snapshot, &weights, &ep.plan_cfg, plan_seed),
            };
            let recovery = outcome.is_recovery();
            if let Some(e) = &outcome.error {
                debug!("cycle {cycles}: planner fell back to recovery: {e}");
            }
            logs.push(cycle_log(&ep, &snapshot, cycles, &outcome));
            weights = outcome.next_weights;
            cycles += 1;
            let targets = if recovery {
                recoveries += 1;
                outcome.trajectory.waypoints.clone()
            } else {
                vec![outcome.trajectory.waypoints[0]]
            };
            if let StepEnd::Stop(r) = ep.run_steps(&targets)? {
                break 'episode r;
            }
        }
    };

    let success = end == EndReason::Success;
    info!(
        "{scene_ref}/{strategy}/seed {seed}: {end:?} after {cycles} cycles, t = {:.2} s, path {:.2} m",
        ep.time, ep.path_length
    );
    let result = EpisodeResult {
        schema_version: RESULT_SCHEMA_VERSION,
        scene: scene_ref.to_string(),
        strategy,
        seed,
        query: scene.query.as_ref().map(|q| q.name.clone()),
        success,
        time_to_reach: if success { ep.success_time } else { None },
        time_budget: cfg.time_budget,
        elapsed: ep.time,
        path_length: ep.path_length,
        shortest_path_length: shortest,
        collision_count: ep.collisions,
        cycles,
        recoveries,
        end_reason: end,
        start_state: start,
        final_state: ep.state,
        final_band_unobserved_fraction: band_unobserved_fraction(scene, &ep.grid, cfg.band.z_lo, cfg.band.z_hi),
        cycle_logs: logs,
    };
    let snapshot = MapSnapshot { pose: ep.pose(&ep.state), intrinsics: ep.sensor.intrinsics, grid: ep.grid };
    Ok((result, snapshot))
}

fn cycle_log(ep: &Episode<'_>, grid: &VoxelGrid<f64>, cycle: usize, outcome: &PlanOutcome<f64>) -> CycleLog {
    let total = grid.voxels().len();
    let known = total - grid.count(VoxelState::Unobserved);
    let pose = ep.pose(&ep.state);
    let max_sem = grid
        .render(&pose, &ep.plan_cfg.render_intrinsics, Channel::Semantic)
        .ok()
        .and_then(|r| r.into_scalar())
        .map_or(0.0, |img| img.data.iter().copied().fold(0.0, f64::max));
    CycleLog {
        cycle,
        time: ep.time,
        state: ep.state,
        c: outcome.weights_used.c,
        best_index: outcome.best_index,
        best_score: outcome.best_index.map(|_| outcome.trajectory.score),
        candidate_count: outcome.candidates.len(),
        recovery: outcome.is_recovery(),
        plan_error: outcome.error.clone(),
        selected: outcome.trajectory.waypoints.clone(),
        known_voxels: known,
        known_fraction: known as f64 / total as f64,
        band_unobserved_fraction: band_unobserved_fraction(ep.scene, grid, ep.cfg.band.z_lo, ep.cfg.band.z_hi),
        max_rendered_semantic: max_sem,
        debug: outcome.debug.clone(),
    }
}

/// Builds the scene named by `scene_ref` for `seed` and runs one episode.
pub fn run_scenario(cfg: &ScenarioConfig, scene_ref: &str, strategy: StrategyKind, seed: u64) -> Result<EpisodeResult> {
    cfg.validate()?;
    let scene = cfg.build_scene(scene_ref, seed)?;
    run_episode(&scene, scene_ref, strategy, cfg, seed)
}
