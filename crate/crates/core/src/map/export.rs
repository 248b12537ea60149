//! File formats: PLY point clouds of Occupied voxels, binary PGM images and
//! JSON map snapshots. Byte layouts are described in `docs/formats.md`.

use std::io::{BufRead, Read, Write};

use serde::{Deserialize, Serialize};

use super::{DirectionMode, Image, ViewDirectionSet, Voxel, VoxelGrid, VoxelIndex, VoxelState};
use crate::error::{invalid, Result, VistaError};
use crate::geometry::{CameraIntrinsics, CameraPose, Vec3};
use crate::scalar::Real;

fn to_u8<T: Real>(v: T) -> u8 {
    (v.max(T::zero()).min(T::one()) * T::lit(255.0)).round().to_u8().unwrap_or(0)
}

/// One vertex per Occupied voxel center, ASCII PLY.
pub fn write_ply<T: Real, W: Write>(grid: &VoxelGrid<T>, mut out: W) -> Result<usize> {
    let occupied: Vec<usize> =
        (0..grid.voxels().len()).filter(|&lin| grid.voxels()[lin].state == VoxelState::Occupied).collect();
    writeln!(out, "ply")?;
    writeln!(out, "format ascii 1.0")?;
    writeln!(out, "comment occupied voxel centers; resolution {}", grid.resolution())?;
    writeln!(out, "element vertex {}", occupied.len())?;
    for p in ["x", "y", "z"] {
        writeln!(out, "property double {p}")?;
    }
    for p in ["red", "green", "blue"] {
        writeln!(out, "property uchar {p}")?;
    }
    writeln!(out, "property double semantic")?;
    writeln!(out, "end_header")?;
    for &lin in &occupied {
        let idx = grid.geometry().unlinear(lin);
        let c = grid.geometry().voxel_center(idx);
        let v = &grid.voxels()[lin];
        writeln!(
            out,
            "{} {} {} {} {} {} {}",
            c.x.to_f64_lossy(),
            c.y.to_f64_lossy(),
            c.z.to_f64_lossy(),
            to_u8(v.color[0]),
            to_u8(v.color[1]),
            to_u8(v.color[2]),
            v.semantic.to_f64_lossy()
        )?;
    }
    Ok(occupied.len())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlyVertex {
    pub position: Vec3<f64>,
    pub color: [u8; 3],
    pub semantic: f64,
}

/// Reads back the vertices written by [`write_ply`].
pub fn read_ply<R: BufRead>(input: R) -> Result<Vec<PlyVertex>> {
    let fmt = |m: &str| VistaError::Format(format!("ply: {m}"));
    let mut lines = input.lines();
    let mut count = None;
    let mut header_ok = false;
    for line in lines.by_ref() {
        let line = line?;
        let line = line.trim();
        if let Some(n) = line.strip_prefix("element vertex ") {
            count = Some(n.trim().parse::<usize>().map_err(|_| fmt("bad vertex count"))?);
        }
        if line == "end_header" {
            header_ok = true;
            break;
        }
    }
    if !header_ok {
        return Err(fmt("missing end_header"));
    }
    let count = count.ok_or_else(|| fmt("missing vertex element"))?;
    let mut out = Vec::with_capacity(count);
    for line in lines.take(count) {
        let line = line?;
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 7 {
            return Err(fmt("vertex line needs 7 fields"));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|_| fmt("bad number"));
        let byte = |s: &str| s.parse::<u8>().map_err(|_| fmt("bad color"));
        out.push(PlyVertex {
            position: Vec3::new(num(f[0])?, num(f[1])?, num(f[2])?),
            color: [byte(f[3])?, byte(f[4])?, byte(f[5])?],
            semantic: num(f[6])?,
        });
    }
    if out.len() != count {
        return Err(fmt("truncated vertex list"));
    }
    Ok(out)
}

/// How a scalar image is quantized into PGM samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PgmEncoding {
    /// 16-bit millimeters; 0 marks no-hit (negative depth).
    DepthMillimeters,
    /// 8-bit `round(255 * v)` of a `[0, 1]` value.
    Unit8,
}

pub fn write_pgm<T: Real, W: Write>(img: &Image<T>, encoding: PgmEncoding, mut out: W) -> Result<()> {
    match encoding {
        PgmEncoding::DepthMillimeters => {
            write!(out, "P5\n{} {}\n65535\n", img.width, img.height)?;
            for &d in &img.data {
                let mm: u16 = if d < T::zero() || d.is_nan() {
                    0
                } else {
                    (d * T::lit(1000.0)).round().max(T::one()).min(T::lit(65535.0)).to_u16().unwrap_or(u16::MAX)
                };
                out.write_all(&mm.to_be_bytes())?;
            }
        }
        PgmEncoding::Unit8 => {
            write!(out, "P5\n{} {}\n255\n", img.width, img.height)?;
            let bytes: Vec<u8> = img.data.iter().map(|&v| to_u8(v)).collect();
            out.write_all(&bytes)?;
        }
    }
    Ok(())
}

/// Decoded PGM: raw samples and their maximum value.
#[derive(Clone, Debug, PartialEq)]
pub struct Pgm {
    pub width: usize,
    pub height: usize,
    pub maxval: u16,
    pub samples: Vec<u16>,
}

pub fn read_pgm<R: Read>(mut input: R) -> Result<Pgm> {
    let fmt = |m: &str| VistaError::Format(format!("pgm: {m}"));
    let mut bytes = Vec::new();
    input.read_to_end(&mut bytes)?;
    let mut pos = 0;
    let mut token = || -> Result<String> {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(fmt("truncated header"));
        }
        Ok(String::from_utf8_lossy(&bytes[start..pos]).into_owned())
    };
    if token()? != "P5" {
        return Err(fmt("not a binary PGM"));
    }
    let width: usize = token()?.parse().map_err(|_| fmt("bad width"))?;
    let height: usize = token()?.parse().map_err(|_| fmt("bad height"))?;
    let maxval: u16 = token()?.parse().map_err(|_| fmt("bad maxval"))?;
    let body = &bytes[pos + 1..];
    let n = width * height;
    let samples = if maxval > 255 {
        if body.len() < 2 * n {
            return Err(fmt("truncated data"));
        }
        body.chunks_exact(2).take(n).map(|c| u16::from_be_bytes([c[0], c[1]])).collect()
    } else {
        if body.len() < n {
            return Err(fmt("truncated data"));
        }
        body[..n].iter().map(|&b| u16::from(b)).collect()
    };
    Ok(Pgm { width, height, maxval, samples })
}

/// Compact serialized form of a [`VoxelGrid`]: one state character per voxel
/// (`u`, `f`, `o`) plus attributes of Occupied voxels.
#[derive(Serialize, Deserialize)]
struct GridRepr {
    center: [f64; 3],
    resolution: f64,
    dims: [usize; 3],
    direction_mode: DirectionMode,
    states: String,
    occupied: Vec<OccupiedRepr>,
}

#[derive(Serialize, Deserialize)]
struct OccupiedRepr {
    index: usize,
    semantic: f64,
    color: [f64; 3],
    /// Hex bitmask in bitmask mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mask: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    directions: Vec<[f64; 3]>,
}

impl<T: Real> Serialize for VoxelGrid<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut states = String::with_capacity(self.voxels().len());
        let mut occupied = Vec::new();
        for (lin, v) in self.voxels().iter().enumerate() {
            states.push(match v.state {
                VoxelState::Unobserved => 'u',
                VoxelState::Free => 'f',
                VoxelState::Occupied => 'o',
            });
            if v.state == VoxelState::Occupied {
                let (mask, directions) = match &v.directions {
                    ViewDirectionSet::Mask(bits) => (Some(format!("{bits:x}")), Vec::new()),
                    ViewDirectionSet::Exact(list) => (None, list.iter().map(|d| d.cast::<f64>().to_array()).collect()),
                };
                occupied.push(OccupiedRepr {
                    index: lin,
                    semantic: v.semantic.to_f64_lossy(),
                    color: v.color.map(|c| c.to_f64_lossy()),
                    mask,
                    directions,
                });
            }
        }
        GridRepr {
            center: self.center().cast::<f64>().to_array(),
            resolution: self.resolution().to_f64_lossy(),
            dims: self.dims(),
            direction_mode: self.direction_mode(),
            states,
            occupied,
        }
        .serialize(s)
    }
}

impl<'de, T: Real> Deserialize<'de> for VoxelGrid<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error;
        let repr = GridRepr::deserialize(d)?;
        grid_from_repr(repr).map_err(D::Error::custom)
    }
}

fn grid_from_repr<T: Real>(repr: GridRepr) -> Result<VoxelGrid<T>> {
    let mut grid = VoxelGrid::new(
        Vec3::from_array(repr.center.map(T::lit)),
        T::lit(repr.resolution),
        repr.dims,
        repr.direction_mode,
    )?;
    if repr.states.len() != grid.voxels.len() {
        return Err(invalid("state string length does not match dims"));
    }
    for (v, ch) in grid.voxels.iter_mut().zip(repr.states.chars()) {
        v.state = match ch {
            'u' => VoxelState::Unobserved,
            'f' => VoxelState::Free,
            'o' => VoxelState::Occupied,
            other => return Err(invalid(format!("unknown voxel state `{other}`"))),
        };
    }
    for o in repr.occupied {
        let mode = grid.mode;
        let v: &mut Voxel<T> = grid.voxels.get_mut(o.index).ok_or_else(|| invalid("voxel index out of range"))?;
        v.semantic = T::lit(o.semantic);
        v.color = o.color.map(T::lit);
        v.directions = match mode {
            DirectionMode::Bitmask => ViewDirectionSet::Mask(
                u128::from_str_radix(o.mask.as_deref().unwrap_or("0"), 16).map_err(|_| invalid("bad mask"))?,
            ),
            DirectionMode::Exact => {
                ViewDirectionSet::Exact(o.directions.into_iter().map(|a| Vec3::from_array(a.map(T::lit))).collect())
            }
        };
    }
    Ok(grid)
}

/// Map plus a viewpoint, as written by the episode runner for later export.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Real + Serialize", deserialize = "T: Real + serde::de::DeserializeOwned"))]
pub struct MapSnapshot<T: Real> {
    pub grid: VoxelGrid<T>,
    pub pose: CameraPose<T>,
    pub intrinsics: CameraIntrinsics<T>,
}

/// Voxels named by a PLY file, mapped back onto `grid`'s index space.
pub fn ply_voxels<T: Real>(grid: &VoxelGrid<T>, vertices: &[PlyVertex]) -> Vec<Option<VoxelIndex>> {
    vertices.iter().map(|v| grid.geometry().voxel_of(v.position.cast())).collect()
}
