//! Small fixed-size vectors, camera poses and pinhole intrinsics.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::scalar::{wrap_angle, Real};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn splat(v: T) -> Self {
        Self::new(v, v, v)
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    /// Unit vector in the same direction, or `None` for zero / non-finite input.
    pub fn normalized(self) -> Option<Self> {
        let n = self.norm();
        if n > T::zero() && n.is_finite() {
            Some(self * (T::one() / n))
        } else {
            None
        }
    }

    #[inline]
    pub fn get(self, axis: usize) -> T {
        match axis {
            0 => self.x,
            1 => self.y,
            _ => self.z,
        }
    }

    #[inline]
    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    #[inline]
    pub fn xy(self) -> Vec2<T> {
        Vec2::new(self.x, self.y)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn cast<U: Real>(self) -> Vec3<U> {
        Vec3::new(U::lit(self.x.to_f64_lossy()), U::lit(self.y.to_f64_lossy()), U::lit(self.z.to_f64_lossy()))
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> AddAssign for Vec3<T> {
    #[inline]
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Real> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    #[inline]
    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn dist(self, o: Self) -> T {
        (self - o).norm()
    }

    #[inline]
    pub fn dist_sq(self, o: Self) -> T {
        let d = self - o;
        d.dot(d)
    }

    /// Heading of the vector, `atan2(y, x)`.
    #[inline]
    pub fn angle(self) -> T {
        self.y.atan2(self.x)
    }
}

impl<T: Real> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y)
    }
}

impl<T: Real> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y)
    }
}

impl<T: Real> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }
}

/// 6-DoF camera pose: position plus intrinsic Z-Y-X Euler angles.
///
/// Angles are stored wrapped to `(-pi, pi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraPose<T> {
    pub position: Vec3<T>,
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

impl<T: Real> CameraPose<T> {
    pub fn new(position: Vec3<T>, roll: T, pitch: T, yaw: T) -> Self {
        Self { position, roll: wrap_angle(roll), pitch: wrap_angle(pitch), yaw: wrap_angle(yaw) }
    }

    /// Level pose: only yaw set.
    pub fn level(position: Vec3<T>, yaw: T) -> Self {
        Self::new(position, T::zero(), T::zero(), yaw)
    }

    /// Rotates a camera-frame vector into the world frame (`Rz(yaw) Ry(pitch) Rx(roll)`).
    pub fn rotate(&self, v: Vec3<T>) -> Vec3<T> {
        let (sr, cr) = self.roll.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        // Rx
        let v1 = Vec3::new(v.x, cr * v.y - sr * v.z, sr * v.y + cr * v.z);
        // Ry
        let v2 = Vec3::new(cp * v1.x + sp * v1.z, v1.y, -sp * v1.x + cp * v1.z);
        // Rz
        Vec3::new(cy * v2.x - sy * v2.y, sy * v2.x + cy * v2.y, v2.z)
    }

    /// Inverse of [`rotate`](Self::rotate).
    pub fn unrotate(&self, v: Vec3<T>) -> Vec3<T> {
        let (sr, cr) = self.roll.sin_cos();
        let (sp, cp) = self.pitch.sin_cos();
        let (sy, cy) = self.yaw.sin_cos();
        let v2 = Vec3::new(cy * v.x + sy * v.y, -sy * v.x + cy * v.y, v.z);
        let v1 = Vec3::new(cp * v2.x - sp * v2.z, v2.y, sp * v2.x + cp * v2.z);
        Vec3::new(v1.x, cr * v1.y + sr * v1.z, -sr * v1.y + cr * v1.z)
    }

    /// Optical axis in the world frame.
    pub fn forward(&self) -> Vec3<T> {
        self.rotate(Vec3::new(T::one(), T::zero(), T::zero()))
    }
}

/// Pinhole camera model. The camera frame is x forward, y left, z up; pixel
/// `(u, v)` counts columns from the left and rows from the top, with the
/// pixel center at `(u + 0.5, v + 0.5)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics<T> {
    pub width: usize,
    pub height: usize,
    pub focal_x: T,
    pub focal_y: T,
    pub principal_x: T,
    pub principal_y: T,
    pub max_range: T,
}

impl<T: Real> CameraIntrinsics<T> {
    pub fn new(width: usize, height: usize, focal_x: T, focal_y: T, max_range: T) -> Result<Self> {
        let w = T::from_usize(width).unwrap_or_else(T::zero);
        let h = T::from_usize(height).unwrap_or_else(T::zero);
        let k = Self {
            width,
            height,
            focal_x,
            focal_y,
            principal_x: w * T::lit(0.5),
            principal_y: h * T::lit(0.5),
            max_range,
        };
        k.validate()?;
        Ok(k)
    }

    /// Intrinsics with the given horizontal field of view (radians) and square pixels.
    pub fn with_fov(width: usize, height: usize, hfov: T, max_range: T) -> Result<Self> {
        let w = T::from_usize(width).unwrap_or_else(T::zero);
        let f = w * T::lit(0.5) / (hfov * T::lit(0.5)).tan();
        Self::new(width, height, f, f, max_range)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(invalid("intrinsics width and height must be >= 1"));
        }
        if !(self.focal_x > T::zero() && self.focal_y > T::zero()) {
            return Err(invalid("intrinsics focal lengths must be > 0"));
        }
        if !(self.max_range > T::zero()) {
            return Err(invalid("intrinsics max_range must be > 0"));
        }
        Ok(())
    }

    pub fn pixel_count(&self) -> usize {
        self.width * self.height
    }

    /// Unit ray direction for pixel `(u, v)` in the camera frame.
    pub fn camera_ray(&self, u: usize, v: usize) -> Vec3<T> {
        let half = T::lit(0.5);
        let pu = T::from_usize(u).unwrap() + half;
        let pv = T::from_usize(v).unwrap() + half;
        Vec3::new(T::one(), -(pu - self.principal_x) / self.focal_x, -(pv - self.principal_y) / self.focal_y)
            .normalized()
            .expect("pixel ray has unit forward component")
    }

    /// Projects a camera-frame point to continuous pixel coordinates, if in front of the camera.
    pub fn project(&self, p_cam: Vec3<T>) -> Option<(T, T)> {
        if p_cam.x <= T::zero() {
            return None;
        }
        let u = self.principal_x - self.focal_x * p_cam.y / p_cam.x;
        let v = self.principal_y - self.focal_y * p_cam.z / p_cam.x;
        Some((u, v))
    }

    /// World-frame unit ray directions for every pixel, row-major.
    pub fn world_rays(&self, pose: &CameraPose<T>) -> Vec<Vec3<T>> {
        let mut out = Vec::with_capacity(self.pixel_count());
        for v in 0..self.height {
            for u in 0..self.width {
                out.push(pose.rotate(self.camera_ray(u, v)));
            }
        }
        out
    }
}

/// Ray `r(t) = origin + t * direction`, `0 <= t <= max_range`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray<T> {
    origin: Vec3<T>,
    direction: Vec3<T>,
    max_range: T,
}

impl<T: Real> Ray<T> {
    /// Builds a ray, normalizing `direction`. Zero-length or non-finite
    /// directions are rejected.
    pub fn new(origin: Vec3<T>, direction: Vec3<T>, max_range: T) -> Result<Self> {
        let direction = direction.normalized().ok_or_else(|| invalid("ray direction must be non-zero and finite"))?;
        if !origin.is_finite() {
            return Err(invalid("ray origin must be finite"));
        }
        if max_range.is_nan() || max_range < T::zero() {
            return Err(invalid("ray max_range must be >= 0"));
        }
        Ok(Self { origin, direction, max_range })
    }

    #[inline]
    pub fn origin(&self) -> Vec3<T> {
        self.origin
    }

    #[inline]
    pub fn direction(&self) -> Vec3<T> {
        self.direction
    }

    #[inline]
    pub fn max_range(&self) -> T {
        self.max_range
    }

    #[inline]
    pub fn at(&self, t: T) -> Vec3<T> {
        self.origin + self.direction * t
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn yaw_rotates_forward_axis() {
        let p = CameraPose::level(Vec3::zero(), FRAC_PI_2);
        let f = p.forward();
        assert!(f.x.abs() < 1e-15 && (f.y - 1.0).abs() < 1e-15 && f.z.abs() < 1e-15);
    }

    #[test]
    fn rotate_unrotate_roundtrip() {
        let p = CameraPose::new(Vec3::zero(), 0.3, -0.7, 2.1);
        let v = Vec3::new(0.2, -1.5, 0.9);
        let back = p.unrotate(p.rotate(v));
        assert!((back - v).norm() < 1e-12);
    }

    #[test]
    fn odd_image_center_pixel_is_optical_axis() {
        let k = CameraIntrinsics::new(5, 5, 4.0, 4.0, 10.0).unwrap();
        assert_eq!(k.camera_ray(2, 2), Vec3::new(1.0, 0.0, 0.0));
        // Left half of the image looks toward +y.
        assert!(k.camera_ray(0, 2).y > 0.0);
        assert!(k.camera_ray(2, 0).z > 0.0);
    }

    #[test]
    fn projection_inverts_pixel_rays() {
        let k = CameraIntrinsics::<f64>::with_fov(8, 6, 1.2, 5.0).unwrap();
        let d = k.camera_ray(6, 1);
        let (u, v) = k.project(d * 3.0).unwrap();
        assert!((u - 6.5).abs() < 1e-12 && (v - 1.5).abs() < 1e-12);
    }

    #[test]
    fn zero_direction_rejected() {
        assert!(Ray::new(Vec3::<f64>::zero(), Vec3::zero(), 1.0).is_err());
        let r = Ray::new(Vec3::<f32>::zero(), Vec3::new(0.0, 3.0, 4.0), 1.0).unwrap();
        assert!((r.direction().norm() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn invalid_intrinsics() {
        assert!(CameraIntrinsics::new(0, 4, 1.0, 1.0, 1.0).is_err());
        assert!(CameraIntrinsics::new(4, 4, -1.0, 1.0, 1.0).is_err());
        assert!(CameraIntrinsics::new(4, 4, 1.0, 1.0, 0.0).is_err());
    }
}
