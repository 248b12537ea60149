//! Active exploration engine: a robot-centered voxel map that records the
//! directions each surface has been seen from, information-gain scoring of
//! candidate camera poses, and a sampling-based receding-horizon planner.
//!
//! All geometry and scoring is generic over the scalar type through
//! [`Real`]; concrete `f64` / `f32` aliases are exported at the crate root.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod geometry;
pub mod map;
pub mod plan;
pub mod scalar;
pub mod score;

pub use error::{Result, VistaError};
pub use geometry::{CameraIntrinsics, CameraPose, Ray, Vec2, Vec3};
pub use map::{
    Channel, Codebook, DirectionMode, GridGeometry, Image, Termination, TraversalMode, ViewDirectionSet, VoxelGrid,
    VoxelState,
};
pub use plan::{
    ControlLimits, FlatGrid, FrontierSet, GaussianMixture, PlanConfig, PlannerState, SemanticSampleSet,
    ShortestPathTree, Trajectory,
};
pub use scalar::Real;
pub use score::{ScoreWeights, WaypointScore};

pub type Vec3F64 = Vec3<f64>;
pub type Vec2F64 = Vec2<f64>;
pub type CameraPoseF64 = CameraPose<f64>;
pub type CameraIntrinsicsF64 = CameraIntrinsics<f64>;
pub type RayF64 = Ray<f64>;
pub type VoxelGridF64 = VoxelGrid<f64>;
pub type ImageF64 = Image<f64>;
pub type PlannerStateF64 = PlannerState<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type ScoreWeightsF64 = ScoreWeights<f64>;
pub type GaussianMixtureF64 = GaussianMixture<f64>;
pub type FlatGridF64 = FlatGrid<f64>;

pub type Vec3F32 = Vec3<f32>;
pub type CameraPoseF32 = CameraPose<f32>;
pub type VoxelGridF32 = VoxelGrid<f32>;
pub type ImageF32 = Image<f32>;
pub type PlannerStateF32 = PlannerState<f32>;
