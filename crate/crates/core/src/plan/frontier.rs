use serde::{Deserialize, Serialize};

use super::flat::{CellIndex, FlatGrid};
use crate::geometry::Vec2;
use crate::map::VoxelState;
use crate::scalar::Real;

/// Free cells bordering unobserved space, with their centers.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontierSet<T> {
    pub cells: Vec<CellIndex>,
    pub points: Vec<Vec2<T>>,
}

impl<T> FrontierSet<T> {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Free cells with at least one Unobserved 8-neighbor, in linear index order.
pub fn get_frontiers<T: Real>(flat: &FlatGrid<T>) -> FrontierSet<T> {
    let mut out = FrontierSet { cells: Vec::new(), points: Vec::new() };
    for lin in 0..flat.len() {
        if flat.states[lin] != VoxelState::Free {
            continue;
        }
        let c = flat.unlinear(lin);
        if flat.neighbors8(c).any(|n| flat.state(n) == VoxelState::Unobserved) {
            out.cells.push(c);
            out.points.push(flat.cell_center(c));
        }
    }
    out
}
