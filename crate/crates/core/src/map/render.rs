use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{walk, VoxelGrid, VoxelIndex, VoxelState, WalkEnd};
use crate::error::{invalid, Result, VistaError};
use crate::geometry::{CameraIntrinsics, CameraPose, Ray};
use crate::scalar::Real;

/// Depth value written for pixels whose ray leaves the grid or range.
pub const DEPTH_NO_HIT: f64 = -1.0;

/// Row-major `height x width` image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Image<P> {
    pub width: usize,
    pub height: usize,
    pub data: Vec<P>,
}

impl<P: Clone> Image<P> {
    pub fn filled(width: usize, height: usize, value: P) -> Self {
        Self { width, height, data: vec![value; width * height] }
    }

    pub fn get(&self, u: usize, v: usize) -> &P {
        &self.data[v * self.width + u]
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    Depth,
    Semantic,
    Gain,
    Color,
}

impl FromStr for Channel {
    type Err = VistaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "depth" => Ok(Self::Depth),
            "semantic" => Ok(Self::Semantic),
            "gain" => Ok(Self::Gain),
            "color" | "rgb" => Ok(Self::Color),
            other => Err(invalid(format!("unknown render channel `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Rendered<T> {
    Scalar(Image<T>),
    Color(Image<[T; 3]>),
}

impl<T> Rendered<T> {
    pub fn into_scalar(self) -> Option<Image<T>> {
        match self {
            Self::Scalar(img) => Some(img),
            Self::Color(_) => None,
        }
    }
}

/// Where one pixel ray ended in render mode.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PixelHit<T> {
    Occupied { voxel: VoxelIndex, t: T },
    Unobserved { voxel: VoxelIndex, t: T },
    Miss,
}

impl<T: Real> VoxelGrid<T> {
    /// Casts one render-mode ray: stops at the first Occupied or Unobserved
    /// voxel, or reports a miss on grid exit / max range.
    #[inline]
    pub fn cast(&self, ray: &Ray<T>) -> PixelHit<T> {
        let mut hit = None;
        let end = walk(self.geometry(), ray, |idx, _| {
            let s = self.state(idx);
            if s == VoxelState::Free {
                false
            } else {
                hit = Some((idx, s));
                true
            }
        });
        match (end, hit) {
            (WalkEnd::Stopped { t }, Some((voxel, VoxelState::Occupied))) => PixelHit::Occupied { voxel, t },
            (WalkEnd::Stopped { t }, Some((voxel, _))) => PixelHit::Unobserved { voxel, t },
            _ => PixelHit::Miss,
        }
    }

    /// Render-mode hit for every pixel, row-major.
    pub fn cast_pixels(&self, pose: &CameraPose<T>, intrinsics: &CameraIntrinsics<T>) -> Vec<(PixelHit<T>, Ray<T>)> {
        intrinsics
            .world_rays(pose)
            .into_iter()
            .map(|d| {
                let ray = Ray::new(pose.position, d, intrinsics.max_range).expect("pixel rays are unit");
                (self.cast(&ray), ray)
            })
            .collect()
    }

    /// Geometric gain of a hit: view-diversity gain on Occupied voxels (1 if
    /// the voxel has no recorded directions), 1 on Unobserved, 0 on a miss.
    #[inline]
    pub fn hit_gain(&self, hit: &PixelHit<T>, direction: crate::geometry::Vec3<T>) -> T {
        match hit {
            PixelHit::Occupied { voxel, .. } => self
                .voxel(*voxel)
                .directions
                .min_neg_alignment(self.codebook(), direction)
                .map(crate::score::gain_from_min)
                .unwrap_or_else(T::one),
            PixelHit::Unobserved { .. } => T::one(),
            PixelHit::Miss => T::zero(),
        }
    }

    #[inline]
    pub fn hit_semantic(&self, hit: &PixelHit<T>) -> T {
        match hit {
            PixelHit::Occupied { voxel, .. } => self.voxel(*voxel).semantic,
            _ => T::zero(),
        }
    }

    pub fn render(
        &self,
        pose: &CameraPose<T>,
        intrinsics: &CameraIntrinsics<T>,
        channel: Channel,
    ) -> Result<Rendered<T>> {
        intrinsics.validate()?;
        let hits = self.cast_pixels(pose, intrinsics);
        let (w, h) = (intrinsics.width, intrinsics.height);
        let scalar = |data: Vec<T>| Rendered::Scalar(Image { width: w, height: h, data });
        Ok(match channel {
            Channel::Depth => scalar(
                hits.iter()
                    .map(|(hit, _)| match hit {
                        PixelHit::Occupied { t, .. } | PixelHit::Unobserved { t, .. } => *t,
                        PixelHit::Miss => T::lit(DEPTH_NO_HIT),
                    })
                    .collect(),
            ),
            Channel::Semantic => scalar(hits.iter().map(|(hit, _)| self.hit_semantic(hit)).collect()),
            Channel::Gain => scalar(hits.iter().map(|(hit, ray)| self.hit_gain(hit, ray.direction())).collect()),
            Channel::Color => Rendered::Color(Image {
                width: w,
                height: h,
                data: hits
                    .iter()
                    .map(|(hit, _)| match hit {
                        PixelHit::Occupied { voxel, .. } => self.voxel(*voxel).color,
                        _ => [T::zero(); 3],
                    })
                    .collect(),
            }),
        })
    }

    /// Gain and semantic images from one pass of ray casting.
    pub fn render_gain_semantic(&self, pose: &CameraPose<T>, intrinsics: &CameraIntrinsics<T>) -> (Image<T>, Image<T>) {
        let n = intrinsics.pixel_count();
        let mut gain = Vec::with_capacity(n);
        let mut sem = Vec::with_capacity(n);
        for (hit, ray) in self.cast_pixels(pose, intrinsics) {
            gain.push(self.hit_gain(&hit, ray.direction()));
            sem.push(self.hit_semantic(&hit));
        }
        let (w, h) = (intrinsics.width, intrinsics.height);
        (Image { width: w, height: h, data: gain }, Image { width: w, height: h, data: sem })
    }
}
