//! Sampling-based receding-horizon planner: flatten the voxel map into a
//! top-down grid, collect frontier cells and high-relevance semantic samples,
//! fit a Gaussian mixture over them, draw candidate goals from the mixture,
//! route to each goal over the shortest-path tree, assign rate-limited
//! headings and pick the candidate with the highest discounted score.

mod dijkstra;
mod flat;
mod frontier;
mod gmm;
mod greedy;
mod headings;
mod planner;
mod sample;
mod semantic;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{CameraIntrinsics, CameraPose, Vec2};
use crate::scalar::{wrap_angle, Real};
use crate::score::WaypointScore;

pub use dijkstra::{dijkstra_paths, traversable_mask, GridCost, ShortestPathTree};
pub use flat::{flatten_voxel_grid, CellIndex, FlatGrid};
pub use frontier::{get_frontiers, FrontierSet};
pub use gmm::{fit_gmm, fit_gmm_points, floor_covariance, Cov2, GaussianMixture};
pub use greedy::plan_semantic_greedy;
pub use headings::{construct_full_pose, feasible_headings, project_pose, velocity_headings};
pub use planner::{plan, recovery_trajectory, Candidate, PlanDebug, PlanOutcome};
pub use sample::{downsample_path, nearest_reachable, route_polyline, sample_trajectories, CandidatePath};
pub use semantic::{get_semantic_samples, SemanticSampleSet};

/// Planar planning state `(x, y, yaw)`, yaw in `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlannerState<T> {
    pub x: T,
    pub y: T,
    pub yaw: T,
}

impl<T: Real> PlannerState<T> {
    pub fn new(x: T, y: T, yaw: T) -> Self {
        Self { x, y, yaw: wrap_angle(yaw) }
    }

    pub fn position(&self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }
}

/// Box limits on the planar velocity and yaw rate, plus the replan period.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ControlLimits<T> {
    pub max_speed: T,
    pub max_yaw_rate: T,
    pub dt: T,
}

impl<T: Real> ControlLimits<T> {
    pub fn new(max_speed: T, max_yaw_rate: T, dt: T) -> Result<Self> {
        let l = Self { max_speed, max_yaw_rate, dt };
        l.validate()?;
        Ok(l)
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |x: T| x > T::zero() && x.is_finite();
        if !pos(self.max_speed) {
            return Err(invalid("max_speed must be > 0"));
        }
        if !pos(self.max_yaw_rate) {
            return Err(invalid("max_yaw_rate must be > 0"));
        }
        if !pos(self.dt) {
            return Err(invalid("dt must be > 0"));
        }
        Ok(())
    }

    /// Largest heading change allowed between consecutive waypoints.
    pub fn max_yaw_step(&self) -> T {
        self.max_yaw_rate * self.dt
    }
}

/// A scored candidate plan.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub waypoints: Vec<PlannerState<T>>,
    pub poses: Vec<CameraPose<T>>,
    pub waypoint_scores: Vec<WaypointScore<T>>,
    pub score: T,
    pub target: Vec2<T>,
}

/// Tunables for one planning cycle.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanConfig<T> {
    pub z_lo: T,
    pub z_hi: T,
    /// Camera height for every planned pose.
    pub flight_z: T,
    /// Number of top semantic cells forming the categorical distribution.
    pub top_m: usize,
    pub semantic_samples: usize,
    pub gmm_components: usize,
    pub gmm_max_iter: usize,
    pub gmm_tol: T,
    pub n_traj: usize,
    pub max_waypoints: usize,
    /// Obstacle inflation radius, in cells.
    pub inflation_radius: usize,
    pub limits: ControlLimits<T>,
    /// Camera model used to render candidate views.
    pub render_intrinsics: CameraIntrinsics<T>,
    /// When false, no semantic samples are drawn and `G_S` is scored as 0.
    pub use_semantics: bool,
    /// When false, `c` is held fixed instead of decayed each cycle.
    pub decay_c: bool,
    /// Attach a [`PlanDebug`] record to the outcome.
    pub debug: bool,
}

impl<T: Real> PlanConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.z_lo < self.z_hi) {
            return Err(invalid("z band: z_lo must be < z_hi"));
        }
        if self.top_m == 0 {
            return Err(invalid("top_m must be >= 1"));
        }
        if self.gmm_components == 0 {
            return Err(invalid("gmm_components must be >= 1"));
        }
        if self.n_traj == 0 {
            return Err(invalid("n_traj must be >= 1"));
        }
        if self.max_waypoints == 0 {
            return Err(invalid("max_waypoints must be >= 1"));
        }
        if !(self.gmm_tol > T::zero()) {
            return Err(invalid("gmm_tol must be > 0"));
        }
        self.limits.validate()?;
        self.render_intrinsics.validate()
    }
}

/// Mixes a base seed with a stage tag (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, stage: u64) -> u64 {
    let mut z = seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
