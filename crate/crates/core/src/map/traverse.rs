//! Amanatides–Woo voxel traversal.
//!
//! Boundary crossing parameters are recomputed from the integer voxel index at
//! every step instead of being accumulated, so the crossing order does not
//! drift on long rays.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::{Ray, Vec3};
use crate::scalar::Real;

pub type VoxelIndex = [usize; 3];

/// Axis-aligned regular grid: min corner, cubic cell size, cell counts.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry<T> {
    pub origin: Vec3<T>,
    pub resolution: T,
    pub dims: [usize; 3],
}

impl<T: Real> GridGeometry<T> {
    /// Grid of `dims` cells centered on `center`.
    pub fn centered(center: Vec3<T>, resolution: T, dims: [usize; 3]) -> Result<Self> {
        if !(resolution > T::zero()) || !resolution.is_finite() {
            return Err(invalid("resolution must be > 0"));
        }
        if dims.contains(&0) {
            return Err(invalid("grid dims must all be >= 1"));
        }
        if !center.is_finite() {
            return Err(invalid("grid center must be finite"));
        }
        let half = |n: usize| T::from_usize(n).unwrap() * resolution * T::lit(0.5);
        let origin = center - Vec3::new(half(dims[0]), half(dims[1]), half(dims[2]));
        Ok(Self { origin, resolution, dims })
    }

    pub fn from_origin(origin: Vec3<T>, resolution: T, dims: [usize; 3]) -> Result<Self> {
        let mut g = Self::centered(Vec3::zero(), resolution, dims)?;
        g.origin = origin;
        Ok(g)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn extent(&self) -> Vec3<T> {
        let f = |n: usize| T::from_usize(n).unwrap() * self.resolution;
        Vec3::new(f(self.dims[0]), f(self.dims[1]), f(self.dims[2]))
    }

    pub fn center(&self) -> Vec3<T> {
        self.origin + self.extent() * T::lit(0.5)
    }

    /// Row-major linear index with x varying fastest.
    #[inline]
    pub fn linear(&self, idx: VoxelIndex) -> usize {
        idx[0] + self.dims[0] * (idx[1] + self.dims[1] * idx[2])
    }

    #[inline]
    pub fn unlinear(&self, lin: usize) -> VoxelIndex {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [lin % nx, (lin / nx) % ny, lin / (nx * ny)]
    }

    pub fn in_bounds(&self, idx: [i64; 3]) -> bool {
        (0..3).all(|a| idx[a] >= 0 && (idx[a] as usize) < self.dims[a])
    }

    /// Voxel containing `p` (cells are half-open `[lo, lo + res)`).
    pub fn voxel_of(&self, p: Vec3<T>) -> Option<VoxelIndex> {
        let mut out = [0usize; 3];
        for (a, o) in out.iter_mut().enumerate() {
            let f = ((p.get(a) - self.origin.get(a)) / self.resolution).floor();
            if !(f >= T::zero()) {
                return None;
            }
            let i = f.to_usize()?;
            if i >= self.dims[a] {
                return None;
            }
            *o = i;
        }
        Some(out)
    }

    pub fn voxel_center(&self, idx: VoxelIndex) -> Vec3<T> {
        let half = T::lit(0.5);
        let c = |a: usize| self.origin.get(a) + (T::from_usize(idx[a]).unwrap() + half) * self.resolution;
        Vec3::new(c(0), c(1), c(2))
    }
}

/// Why a traversal stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    HitOccupied,
    HitUnobserved,
    ExitedGrid,
    MaxRange,
}

/// Which voxel states end a traversal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraversalMode {
    /// Stop at Occupied or Unobserved voxels.
    Render,
    /// Stop only at Occupied voxels.
    Carve,
}

/// How [`walk`] ended.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum WalkEnd<T> {
    /// The visitor asked to stop at the last visited voxel, entered at `t`.
    Stopped { t: T },
    /// The ray left the grid at `t` (or never entered it).
    ExitedGrid { t: T },
    /// The next boundary lies beyond the ray's range.
    MaxRange { t: T },
}

/// Visits every voxel the ray segment `[0, max_range]` passes through, in
/// order of increasing `t`. `visit(index, t_enter)` returns `true` to stop.
///
/// A ray starting outside the grid begins at its entry point. Exact ties
/// between axes (the ray crossing a cell edge) step the lowest axis first.
pub fn walk<T: Real>(geom: &GridGeometry<T>, ray: &Ray<T>, mut visit: impl FnMut(VoxelIndex, T) -> bool) -> WalkEnd<T> {
    let o = ray.origin().to_array();
    let d = ray.direction().to_array();
    let lo = geom.origin.to_array();
    let res = geom.resolution;
    let max_range = ray.max_range();

    let mut t_enter = T::zero();
    let mut t_exit = T::infinity();
    for a in 0..3 {
        let hi = lo[a] + T::from_usize(geom.dims[a]).unwrap() * res;
        if d[a] == T::zero() {
            if o[a] < lo[a] || o[a] >= hi {
                return WalkEnd::ExitedGrid { t: T::zero() };
            }
        } else {
            let t1 = (lo[a] - o[a]) / d[a];
            let t2 = (hi - o[a]) / d[a];
            t_enter = t_enter.max(t1.min(t2));
            t_exit = t_exit.min(t1.max(t2));
        }
    }
    if t_enter >= t_exit {
        return WalkEnd::ExitedGrid { t: t_enter };
    }
    if t_enter > max_range {
        return WalkEnd::MaxRange { t: max_range };
    }

    let mut idx = [0i64; 3];
    let mut step = [0i64; 3];
    for a in 0..3 {
        let p = o[a] + d[a] * t_enter;
        let f = ((p - lo[a]) / res).floor().to_i64().unwrap_or(0);
        idx[a] = f.clamp(0, geom.dims[a] as i64 - 1);
        step[a] = if d[a] > T::zero() {
            1
        } else if d[a] < T::zero() {
            -1
        } else {
            0
        };
    }

    let mut t = t_enter;
    loop {
        let cur = [idx[0] as usize, idx[1] as usize, idx[2] as usize];
        if visit(cur, t) {
            return WalkEnd::Stopped { t };
        }
        let mut axis = 3;
        let mut t_next = T::infinity();
        for a in 0..3 {
            if step[a] == 0 {
                continue;
            }
            let k = idx[a] + i64::from(step[a] > 0);
            let boundary = lo[a] + T::from_i64(k).unwrap() * res;
            let tb = (boundary - o[a]) / d[a];
            if tb < t_next {
                t_next = tb;
                axis = a;
            }
        }
        if axis == 3 {
            return WalkEnd::ExitedGrid { t: T::infinity() };
        }
        if t_next > max_range {
            return WalkEnd::MaxRange { t: max_range };
        }
        idx[axis] += step[axis];
        if idx[axis] < 0 || idx[axis] >= geom.dims[axis] as i64 {
            return WalkEnd::ExitedGrid { t: t_next };
        }
        t = t_next.max(t);
    }
}

/// Result of [`traverse`](crate::map::VoxelGrid::traverse): visited voxels in order, the
/// `t` at which each was entered, and the termination cause. The terminal
/// voxel is included for `HitOccupied` / `HitUnobserved` / `MaxRange`.
#[derive(Clone, Debug, PartialEq)]
pub struct Traversal<T> {
    pub voxels: Vec<VoxelIndex>,
    pub entry_t: Vec<T>,
    pub cause: Termination,
    pub end_t: T,
}

impl<T: Real> Traversal<T> {
    pub fn terminal(&self) -> Option<VoxelIndex> {
        match self.cause {
            Termination::ExitedGrid => None,
            _ => self.voxels.last().copied(),
        }
    }
}
