use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::Vec2;
use crate::map::{VoxelGrid, VoxelState};
use crate::scalar::Real;

/// 2D cell index `[ix, iy]`.
pub type CellIndex = [usize; 2];

/// Top-down projection of a horizontal band of the voxel map.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlatGrid<T> {
    /// Min corner of cell `[0, 0]`.
    pub origin: Vec2<T>,
    pub resolution: T,
    pub dims: [usize; 2],
    pub z_lo: T,
    pub z_hi: T,
    pub states: Vec<VoxelState>,
    pub semantic: Vec<T>,
}

impl<T: Real> FlatGrid<T> {
    /// Grid with every cell in `state` and zero semantics.
    pub fn filled(origin: Vec2<T>, resolution: T, dims: [usize; 2], state: VoxelState) -> Result<Self> {
        if !(resolution > T::zero()) {
            return Err(invalid("resolution must be > 0"));
        }
        if dims[0] == 0 || dims[1] == 0 {
            return Err(invalid("flat grid dims must be >= 1"));
        }
        let n = dims[0] * dims[1];
        Ok(Self {
            origin,
            resolution,
            dims,
            z_lo: T::zero(),
            z_hi: T::zero(),
            states: vec![state; n],
            semantic: vec![T::zero(); n],
        })
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn linear(&self, c: CellIndex) -> usize {
        c[0] + self.dims[0] * c[1]
    }

    #[inline]
    pub fn unlinear(&self, lin: usize) -> CellIndex {
        [lin % self.dims[0], lin / self.dims[0]]
    }

    #[inline]
    pub fn state(&self, c: CellIndex) -> VoxelState {
        self.states[self.linear(c)]
    }

    pub fn set_state(&mut self, c: CellIndex, s: VoxelState) {
        let i = self.linear(c);
        self.states[i] = s;
    }

    pub fn cell_center(&self, c: CellIndex) -> Vec2<T> {
        let half = T::lit(0.5);
        Vec2::new(
            self.origin.x + (T::from_usize(c[0]).unwrap() + half) * self.resolution,
            self.origin.y + (T::from_usize(c[1]).unwrap() + half) * self.resolution,
        )
    }

    /// Cell containing `p` (half-open cells), if inside the grid.
    pub fn cell_of(&self, p: Vec2<T>) -> Option<CellIndex> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        let ix = fx.to_i64()?;
        let iy = fy.to_i64()?;
        if ix < 0 || iy < 0 || ix as usize >= self.dims[0] || iy as usize >= self.dims[1] {
            return None;
        }
        Some([ix as usize, iy as usize])
    }

    /// In-bounds neighbors under 8-connectivity, in a fixed order.
    pub fn neighbors8(&self, c: CellIndex) -> impl Iterator<Item = CellIndex> + '_ {
        const OFFSETS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
        OFFSETS.iter().filter_map(move |&(dx, dy)| self.offset(c, dx, dy))
    }

    pub fn offset(&self, c: CellIndex, dx: i64, dy: i64) -> Option<CellIndex> {
        let x = c[0] as i64 + dx;
        let y = c[1] as i64 + dy;
        if x < 0 || y < 0 || x as usize >= self.dims[0] || y as usize >= self.dims[1] {
            None
        } else {
            Some([x as usize, y as usize])
        }
    }
}

/// Projects the voxels whose centers lie in `[z_lo, z_hi]` onto the x-y plane.
///
/// Each column takes the highest priority state among its band voxels
/// (Occupied, then Unobserved, then Free). The semantic layer sums the
/// semantic values of the band's Occupied voxels.
pub fn flatten_voxel_grid<T: Real>(grid: &VoxelGrid<T>, z_lo: T, z_hi: T) -> Result<FlatGrid<T>> {
    if !(z_lo < z_hi) {
        return Err(invalid("z band: z_lo must be < z_hi"));
    }
    let geom = grid.geometry();
    let [nx, ny, nz] = geom.dims;
    let layers: Vec<usize> = (0..nz)
        .filter(|&k| {
            let z = geom.voxel_center([0, 0, k]).z;
            z >= z_lo && z <= z_hi
        })
        .collect();
    if layers.is_empty() {
        return Err(invalid("z band contains no voxel layer"));
    }
    let mut states = vec![VoxelState::Free; nx * ny];
    let mut semantic = vec![T::zero(); nx * ny];
    for iy in 0..ny {
        for ix in 0..nx {
            let cell = ix + nx * iy;
            let mut st = VoxelState::Free;
            let mut sum = T::zero();
            for &k in &layers {
                let v = grid.voxel([ix, iy, k]);
                match v.state {
                    VoxelState::Occupied => {
                        st = VoxelState::Occupied;
                        sum += v.semantic;
                    }
                    VoxelState::Unobserved if st == VoxelState::Free => st = VoxelState::Unobserved,
                    _ => {}
                }
            }
            states[cell] = st;
            semantic[cell] = sum;
        }
    }
    Ok(FlatGrid { origin: geom.origin.xy(), resolution: geom.resolution, dims: [nx, ny], z_lo, z_hi, states, semantic })
}
