//! Robot-centered 3D voxel map with Unobserved / Free / Occupied states,
//! per-voxel semantic relevance, color and view-direction sets.
//!
//! Mutation happens through a single owner (`integrate_point_cloud`,
//! `carve_free_space`, `record_view_directions`, `recenter`). Rendering and
//! traversal only borrow the grid, so a planner can score candidates against a
//! [`VoxelGrid::snapshot`] while the owner keeps updating.

mod directions;
pub mod export;
mod render;
mod traverse;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{CameraIntrinsics, CameraPose, Ray, Vec3};
use crate::scalar::Real;

pub use directions::{
    octahedral_decode, octahedral_encode, Codebook, DirectionMode, ViewDirectionSet, DEFAULT_BIN_HALF_ANGLE,
    DEFAULT_CODEBOOK_COLS, DEFAULT_CODEBOOK_ROWS,
};
pub use render::{Channel, Image, PixelHit, Rendered, DEPTH_NO_HIT};
pub use traverse::{walk, GridGeometry, Termination, Traversal, TraversalMode, VoxelIndex, WalkEnd};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VoxelState {
    #[default]
    Unobserved,
    Free,
    Occupied,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Voxel<T> {
    pub state: VoxelState,
    /// Normalized query similarity in `[0, 1]`; zero unless Occupied.
    pub semantic: T,
    pub color: [T; 3],
    pub directions: ViewDirectionSet<T>,
}

impl<T: Real> Voxel<T> {
    fn unobserved(mode: DirectionMode) -> Self {
        Self {
            state: VoxelState::Unobserved,
            semantic: T::zero(),
            color: [T::zero(); 3],
            directions: ViewDirectionSet::empty(mode),
        }
    }
}

/// Points with RGB colors and unit-norm semantic embeddings (parallel arrays).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SemanticPointCloud<T> {
    points: Vec<Vec3<T>>,
    colors: Vec<[T; 3]>,
    embeddings: Vec<Vec<T>>,
}

fn unit_tolerance<T: Real>() -> T {
    T::lit(1e-6).max(T::epsilon() * T::lit(64.0))
}

pub(crate) fn check_unit<T: Real>(v: &[T], what: &str) -> Result<()> {
    let n: T = v.iter().map(|&x| x * x).sum::<T>().sqrt();
    if (n - T::one()).abs() > unit_tolerance() {
        return Err(invalid(format!("{what} must be unit-norm (norm {n})")));
    }
    Ok(())
}

impl<T: Real> SemanticPointCloud<T> {
    pub fn new(points: Vec<Vec3<T>>, colors: Vec<[T; 3]>, embeddings: Vec<Vec<T>>) -> Result<Self> {
        if points.len() != colors.len() || points.len() != embeddings.len() {
            return Err(invalid("point cloud arrays must have equal length"));
        }
        if let Some(first) = embeddings.first() {
            let dim = first.len();
            for e in &embeddings {
                if e.len() != dim {
                    return Err(invalid("point cloud embeddings must share one dimension"));
                }
                check_unit(e, "embedding")?;
            }
        }
        Ok(Self { points, colors, embeddings })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec3<T>] {
        &self.points
    }

    pub fn colors(&self) -> &[[T; 3]] {
        &self.colors
    }

    pub fn embeddings(&self) -> &[Vec<T>] {
        &self.embeddings
    }

    pub fn embedding_dim(&self) -> Option<usize> {
        self.embeddings.first().map(Vec::len)
    }
}

/// Maps cosine similarity to `[0, 1]` via `(cos + 1) / 2`.
#[inline]
pub fn normalized_similarity<T: Real>(embedding: &[T], query: &[T]) -> T {
    let dot: T = embedding.iter().zip(query).map(|(&a, &b)| a * b).sum();
    ((dot + T::one()) * T::lit(0.5)).max(T::zero()).min(T::one())
}

#[derive(Clone, Debug, PartialEq)]
pub struct VoxelGrid<T> {
    geometry: GridGeometry<T>,
    mode: DirectionMode,
    codebook: Arc<Codebook<T>>,
    voxels: Vec<Voxel<T>>,
}

impl<T: Real> VoxelGrid<T> {
    /// All-Unobserved grid of `dims` voxels centered on `center`.
    pub fn new(center: Vec3<T>, resolution: T, dims: [usize; 3], mode: DirectionMode) -> Result<Self> {
        let geometry = GridGeometry::centered(center, resolution, dims)?;
        Ok(Self {
            geometry,
            mode,
            codebook: Arc::new(Codebook::default()),
            voxels: vec![Voxel::unobserved(mode); geometry.len()],
        })
    }

    #[inline]
    pub fn geometry(&self) -> &GridGeometry<T> {
        &self.geometry
    }

    pub fn center(&self) -> Vec3<T> {
        self.geometry.center()
    }

    pub fn resolution(&self) -> T {
        self.geometry.resolution
    }

    pub fn dims(&self) -> [usize; 3] {
        self.geometry.dims
    }

    pub fn direction_mode(&self) -> DirectionMode {
        self.mode
    }

    pub fn codebook(&self) -> &Codebook<T> {
        &self.codebook
    }

    #[inline]
    pub fn voxel(&self, idx: VoxelIndex) -> &Voxel<T> {
        &self.voxels[self.geometry.linear(idx)]
    }

    #[inline]
    pub fn state(&self, idx: VoxelIndex) -> VoxelState {
        self.voxel(idx).state
    }

    /// Voxels in linear order (x fastest).
    pub fn voxels(&self) -> &[Voxel<T>] {
        &self.voxels
    }

    pub fn count(&self, state: VoxelState) -> usize {
        self.voxels.iter().filter(|v| v.state == state).count()
    }

    /// Immutable copy for concurrent readers.
    pub fn snapshot(&self) -> Arc<Self> {
        Arc::new(self.clone())
    }

    /// Marks a voxel Occupied with the given attributes (semantic is max-merged).
    pub fn mark_occupied(&mut self, idx: VoxelIndex, semantic: T, color: [T; 3]) {
        let v = &mut self.voxels[self.geometry.linear(idx)];
        if v.state == VoxelState::Occupied {
            v.semantic = v.semantic.max(semantic);
        } else {
            v.state = VoxelState::Occupied;
            v.semantic = semantic;
        }
        v.color = color;
    }

    /// Marks an Unobserved voxel Free. Other states are left alone; returns
    /// whether the voxel changed.
    pub fn mark_free(&mut self, idx: VoxelIndex) -> bool {
        let v = &mut self.voxels[self.geometry.linear(idx)];
        let changed = v.state == VoxelState::Unobserved;
        if changed {
            v.state = VoxelState::Free;
        }
        changed
    }

    /// Walks `ray` through the grid; see [`walk`] for ordering rules.
    pub fn traverse(&self, ray: &Ray<T>, mode: TraversalMode) -> Traversal<T> {
        let mut voxels = Vec::new();
        let mut entry_t = Vec::new();
        let mut hit = None;
        let end = walk(&self.geometry, ray, |idx, t| {
            voxels.push(idx);
            entry_t.push(t);
            let s = self.state(idx);
            let stop = match mode {
                TraversalMode::Render => s != VoxelState::Free,
                TraversalMode::Carve => s == VoxelState::Occupied,
            };
            if stop {
                hit = Some(s);
            }
            stop
        });
        let (cause, end_t) = match end {
            WalkEnd::Stopped { t } => match hit {
                Some(VoxelState::Occupied) => (Termination::HitOccupied, t),
                _ => (Termination::HitUnobserved, t),
            },
            WalkEnd::ExitedGrid { t } => (Termination::ExitedGrid, t),
            WalkEnd::MaxRange { t } => (Termination::MaxRange, t),
        };
        Traversal { voxels, entry_t, cause, end_t }
    }

    /// Registers a semantic point cloud: every in-bounds point marks its voxel
    /// Occupied; semantic value is the max normalized similarity of its
    /// points, color is last-writer. Returns the number of in-bounds points.
    pub fn integrate_point_cloud(&mut self, cloud: &SemanticPointCloud<T>, query: &[T]) -> Result<usize> {
        check_unit(query, "query embedding")?;
        if let Some(dim) = cloud.embedding_dim() {
            if dim != query.len() {
                return Err(invalid(format!(
                    "embedding dimension {dim} does not match query dimension {}",
                    query.len()
                )));
            }
        }
        let mut n = 0;
        for ((p, c), e) in cloud.points.iter().zip(&cloud.colors).zip(&cloud.embeddings) {
            if let Some(idx) = self.geometry.voxel_of(*p) {
                self.mark_occupied(idx, normalized_similarity(e, query), *c);
                n += 1;
            }
        }
        Ok(n)
    }

    /// Free-space carving. Each pixel ray is walked up to its measured depth
    /// (or the sensor range for no-hit pixels, `depth < 0`); Unobserved voxels
    /// strictly before the terminal voxel become Free. Returns voxels freed.
    pub fn carve_free_space(
        &mut self,
        pose: &CameraPose<T>,
        intrinsics: &CameraIntrinsics<T>,
        depth: &Image<T>,
    ) -> Result<usize> {
        if depth.width != intrinsics.width || depth.height != intrinsics.height {
            return Err(invalid("depth image does not match intrinsics"));
        }
        // Slack so a hit on a voxel face enters the voxel it was measured in.
        let slack = T::lit(1e-9);
        let mut freed = 0;
        let mut path: Vec<usize> = Vec::with_capacity(256);
        for (dir, &d) in intrinsics.world_rays(pose).into_iter().zip(&depth.data) {
            if d.is_nan() {
                continue;
            }
            let range = if d < T::zero() { intrinsics.max_range } else { d * (T::one() + slack) + slack };
            let ray = Ray::new(pose.position, dir, range)?;
            path.clear();
            let end = walk(&self.geometry, &ray, |idx, _| {
                let lin = self.geometry.linear(idx);
                path.push(lin);
                self.voxels[lin].state == VoxelState::Occupied
            });
            let carve_to = match end {
                WalkEnd::ExitedGrid { .. } => path.len(),
                _ => path.len().saturating_sub(1),
            };
            for &lin in &path[..carve_to] {
                let v = &mut self.voxels[lin];
                if v.state == VoxelState::Unobserved {
                    v.state = VoxelState::Free;
                    freed += 1;
                }
            }
        }
        Ok(freed)
    }

    /// Inserts each pixel ray's direction into the view set of the Occupied
    /// voxel it renders (render-mode termination). Returns sets changed.
    pub fn record_view_directions(&mut self, pose: &CameraPose<T>, intrinsics: &CameraIntrinsics<T>) -> usize {
        let mut changed = 0;
        for dir in intrinsics.world_rays(pose) {
            let Ok(ray) = Ray::new(pose.position, dir, intrinsics.max_range) else { continue };
            let mut terminal = None;
            walk(&self.geometry, &ray, |idx, _| {
                let s = self.state(idx);
                if s == VoxelState::Free {
                    false
                } else {
                    if s == VoxelState::Occupied {
                        terminal = Some(idx);
                    }
                    true
                }
            });
            if let Some(idx) = terminal {
                let lin = self.geometry.linear(idx);
                if self.voxels[lin].directions.insert(ray.direction(), &self.codebook) {
                    changed += 1;
                }
            }
        }
        changed
    }

    /// Scrolls the window by the whole number of voxels nearest to
    /// `new_center - center`. Overlapping voxels keep their attributes,
    /// voxels entering the window are Unobserved.
    pub fn recenter(&mut self, new_center: Vec3<T>) -> [i64; 3] {
        let delta = new_center - self.center();
        let res = self.geometry.resolution;
        let mut shift = [0i64; 3];
        for (a, s) in shift.iter_mut().enumerate() {
            *s = (delta.get(a) / res).round().to_i64().unwrap_or(i64::MAX / 4);
        }
        if shift == [0, 0, 0] {
            return shift;
        }
        let dims = self.geometry.dims;
        let mut fresh = vec![Voxel::unobserved(self.mode); self.voxels.len()];
        for (lin, slot) in fresh.iter_mut().enumerate() {
            let n = self.geometry.unlinear(lin);
            let old = [n[0] as i64 + shift[0], n[1] as i64 + shift[1], n[2] as i64 + shift[2]];
            if (0..3).all(|a| old[a] >= 0 && (old[a] as usize) < dims[a]) {
                let o = [old[0] as usize, old[1] as usize, old[2] as usize];
                *slot = std::mem::replace(&mut self.voxels[self.geometry.linear(o)], Voxel::unobserved(self.mode));
            }
        }
        self.voxels = fresh;
        let step = |s: i64| T::from_i64(s).unwrap() * res;
        self.geometry.origin += Vec3::new(step(shift[0]), step(shift[1]), step(shift[2]));
        shift
    }
}
