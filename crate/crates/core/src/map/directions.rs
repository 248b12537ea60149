//! Per-voxel sets of viewing directions.
//!
//! The default representation is a bitmask over a fixed spherical codebook:
//! directions are quantized through the octahedral map onto a `cols x rows`
//! grid of bins, each bin represented by the unit direction at its center.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Vec3;
use crate::scalar::Real;

pub const DEFAULT_CODEBOOK_COLS: usize = 12;
pub const DEFAULT_CODEBOOK_ROWS: usize = 8;

/// Maximum angle (radians) between any unit direction and the representative
/// of the bin it quantizes to, for the default 12 x 8 (D = 96) codebook.
/// Checked against dense boundary sampling in the tests below.
pub const DEFAULT_BIN_HALF_ANGLE: f64 = 0.4359;

#[inline]
fn sign_nonneg<T: Real>(x: T) -> T {
    if x >= T::zero() {
        T::one()
    } else {
        -T::one()
    }
}

/// Octahedral map from the unit sphere onto `[-1, 1]^2`.
pub fn octahedral_encode<T: Real>(d: Vec3<T>) -> (T, T) {
    let s = d.x.abs() + d.y.abs() + d.z.abs();
    let (px, py) = (d.x / s, d.y / s);
    if d.z < T::zero() {
        ((T::one() - py.abs()) * sign_nonneg(px), (T::one() - px.abs()) * sign_nonneg(py))
    } else {
        (px, py)
    }
}

/// Inverse of [`octahedral_encode`]; returns a unit vector.
pub fn octahedral_decode<T: Real>(px: T, py: T) -> Vec3<T> {
    let z = T::one() - px.abs() - py.abs();
    let (x, y) = if z < T::zero() {
        ((T::one() - py.abs()) * sign_nonneg(px), (T::one() - px.abs()) * sign_nonneg(py))
    } else {
        (px, py)
    };
    Vec3::new(x, y, z).normalized().expect("octahedral point is never the origin")
}

/// Fixed set of `D = cols * rows` unit directions (at most 128).
#[derive(Clone, Debug, PartialEq)]
pub struct Codebook<T> {
    cols: usize,
    rows: usize,
    dirs: Vec<Vec3<T>>,
}

impl<T: Real> Default for Codebook<T> {
    fn default() -> Self {
        Self::octahedral(DEFAULT_CODEBOOK_COLS, DEFAULT_CODEBOOK_ROWS).expect("default codebook")
    }
}

impl<T: Real> Codebook<T> {
    pub fn octahedral(cols: usize, rows: usize) -> Result<Self> {
        if cols == 0 || rows == 0 || cols * rows > 128 {
            return Err(invalid("codebook must have between 1 and 128 bins"));
        }
        let mut dirs = Vec::with_capacity(cols * rows);
        for r in 0..rows {
            for c in 0..cols {
                let (px, py) = Self::cell_point(cols, rows, c, r, T::lit(0.5), T::lit(0.5));
                dirs.push(octahedral_decode(px, py));
            }
        }
        Ok(Self { cols, rows, dirs })
    }

    fn cell_point(cols: usize, rows: usize, c: usize, r: usize, fu: T, fv: T) -> (T, T) {
        let two = T::lit(2.0);
        let u = (T::from_usize(c).unwrap() + fu) / T::from_usize(cols).unwrap();
        let v = (T::from_usize(r).unwrap() + fv) / T::from_usize(rows).unwrap();
        (u * two - T::one(), v * two - T::one())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    #[inline]
    pub fn direction(&self, bin: usize) -> Vec3<T> {
        self.dirs[bin]
    }

    /// Bin index of a unit direction.
    pub fn bin_of(&self, d: Vec3<T>) -> usize {
        let (px, py) = octahedral_encode(d);
        let half = T::lit(0.5);
        let cell = |p: T, n: usize| {
            let f = ((p + T::one()) * half * T::from_usize(n).unwrap()).floor();
            f.to_usize().unwrap_or(0).min(n - 1)
        };
        cell(py, self.rows) * self.cols + cell(px, self.cols)
    }

    /// Largest angle between a direction and its bin representative,
    /// estimated by sampling every bin's boundary and interior on a
    /// `samples x samples` lattice.
    pub fn max_bin_half_angle(&self, samples: usize) -> T {
        let mut worst = T::zero();
        let n = samples.max(2);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let rep = self.dirs[r * self.cols + c];
                for i in 0..=n {
                    for j in 0..=n {
                        let fu = T::from_usize(i).unwrap() / T::from_usize(n).unwrap();
                        let fv = T::from_usize(j).unwrap() / T::from_usize(n).unwrap();
                        let (px, py) = Self::cell_point(self.cols, self.rows, c, r, fu, fv);
                        let d = octahedral_decode(px, py);
                        let ang = d.dot(rep).min(T::one()).max(-T::one()).acos();
                        if ang > worst {
                            worst = ang;
                        }
                    }
                }
            }
        }
        worst
    }
}

/// How a voxel grid stores view directions.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionMode {
    /// Quantized bitmask over the default codebook.
    #[default]
    Bitmask,
    /// Raw unit vectors (unbounded; used as a reference).
    Exact,
}

/// Directions from which a voxel has been observed. Only grows.
#[derive(Clone, Debug, PartialEq)]
pub enum ViewDirectionSet<T> {
    Mask(u128),
    Exact(Vec<Vec3<T>>),
}

impl<T: Real> ViewDirectionSet<T> {
    pub fn empty(mode: DirectionMode) -> Self {
        match mode {
            DirectionMode::Bitmask => Self::Mask(0),
            DirectionMode::Exact => Self::Exact(Vec::new()),
        }
    }

    /// Inserts a unit direction; returns `true` if the set changed.
    pub fn insert(&mut self, d: Vec3<T>, codebook: &Codebook<T>) -> bool {
        match self {
            Self::Mask(bits) => {
                let bit = 1u128 << codebook.bin_of(d);
                let changed = *bits & bit == 0;
                *bits |= bit;
                changed
            }
            Self::Exact(list) => {
                if list.contains(&d) {
                    false
                } else {
                    list.push(d);
                    true
                }
            }
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Self::Mask(bits) => bits.count_ones() as usize,
            Self::Exact(list) => list.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn contains_bin(&self, bin: usize) -> bool {
        match self {
            Self::Mask(bits) => bits & (1u128 << bin) != 0,
            Self::Exact(_) => false,
        }
    }

    /// Stored directions as unit vectors (codebook representatives in mask mode).
    pub fn directions<'a>(&'a self, codebook: &'a Codebook<T>) -> Box<dyn Iterator<Item = Vec3<T>> + 'a> {
        match self {
            Self::Mask(bits) => {
                let bits = *bits;
                Box::new((0..codebook.len()).filter(move |b| bits & (1u128 << b) != 0).map(|b| codebook.direction(b)))
            }
            Self::Exact(list) => Box::new(list.iter().copied()),
        }
    }

    /// `min` over stored directions `v` of `-<v, d>`, or `None` when empty.
    #[inline]
    pub fn min_neg_alignment(&self, codebook: &Codebook<T>, d: Vec3<T>) -> Option<T> {
        let mut best: Option<T> = None;
        let mut take = |v: Vec3<T>| {
            let a = -v.dot(d);
            best = Some(match best {
                Some(b) if b <= a => b,
                _ => a,
            });
        };
        match self {
            Self::Mask(bits) => {
                let mut b = *bits;
                while b != 0 {
                    let i = b.trailing_zeros() as usize;
                    take(codebook.direction(i));
                    b &= b - 1;
                }
            }
            Self::Exact(list) => list.iter().copied().for_each(take),
        }
        best
    }
}
