//! Deterministic synthetic world for closed-loop exploration experiments:
//! ground-truth scenes, a simulated depth camera with semantic labels,
//! planar robot kinematics, a ground-truth referee, and the episode and
//! batch runners that compute success rate, time to reach and SPL.

// `!(x > 0.0)` is used on purpose so NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod batch;
pub mod builtins;
pub mod config;
pub mod episode;
pub mod error;
pub mod kinematics;
pub mod metrics;
pub mod referee;
pub mod scene;
pub mod sensor;

pub use batch::{aggregate_from_logs, run_batch, write_report, BatchReport, CellSummary};
pub use builtins::{builtin_scene, BUILTIN_NAMES};
pub use config::ScenarioConfig;
pub use episode::{
    run_episode, run_episode_with_map, run_scenario, spl, CycleLog, EndReason, EpisodeResult, StrategyKind,
};
pub use error::{Result, SimError};
pub use kinematics::{step_robot, StepOutcome};
pub use metrics::{median, shortest_path_length, spl_from_terms};
pub use referee::{check_success, Verdict};
pub use scene::{GroundTruthScene, SceneSpec};
pub use sensor::{sense, SensorFrame, SensorModel};
