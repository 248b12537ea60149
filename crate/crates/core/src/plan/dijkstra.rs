use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::flat::{CellIndex, FlatGrid};
use super::PlannerState;
use crate::error::{Result, VistaError};
use crate::geometry::Vec2;
use crate::map::VoxelState;
use crate::scalar::Real;

/// Path cost `orthogonal + diagonal * sqrt(2)`, compared exactly.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridCost {
    pub orthogonal: u32,
    pub diagonal: u32,
}

impl GridCost {
    pub const ZERO: Self = Self { orthogonal: 0, diagonal: 0 };

    pub fn step(self, diagonal: bool) -> Self {
        if diagonal {
            Self { diagonal: self.diagonal + 1, ..self }
        } else {
            Self { orthogonal: self.orthogonal + 1, ..self }
        }
    }

    /// Cost in cells.
    pub fn value<T: Real>(self) -> T {
        T::from_u32(self.orthogonal).unwrap() + T::from_u32(self.diagonal).unwrap() * T::SQRT_2()
    }
}

impl Ord for GridCost {
    fn cmp(&self, other: &Self) -> Ordering {
        // Compare a1 + b1*r against a2 + b2*r with r = sqrt(2), exactly:
        // sign of (a1 - a2) + (b1 - b2) * r.
        let da = self.orthogonal as i64 - other.orthogonal as i64;
        let db = self.diagonal as i64 - other.diagonal as i64;
        match (da.cmp(&0), db.cmp(&0)) {
            (Ordering::Equal, o) | (o, Ordering::Equal) => o,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            // Opposite signs: compare da^2 with 2 db^2.
            (Ordering::Greater, Ordering::Less) => (da * da).cmp(&(2 * db * db)),
            (Ordering::Less, Ordering::Greater) => (2 * db * db).cmp(&(da * da)),
        }
    }
}

impl PartialOrd for GridCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cells the planner may occupy: Free and farther than `radius` cells
/// (Euclidean, center to center) from every Occupied cell.
pub fn traversable_mask<T: Real>(flat: &FlatGrid<T>, radius: usize) -> Vec<bool> {
    let r = radius as i64;
    let offsets: Vec<(i64, i64)> = (-r..=r)
        .flat_map(|dy| (-r..=r).map(move |dx| (dx, dy)))
        .filter(|&(dx, dy)| dx * dx + dy * dy <= r * r)
        .collect();
    (0..flat.len())
        .map(|lin| {
            if flat.states[lin] != VoxelState::Free {
                return false;
            }
            let c = flat.unlinear(lin);
            !offsets
                .iter()
                .filter_map(|&(dx, dy)| flat.offset(c, dx, dy))
                .any(|n| flat.state(n) == VoxelState::Occupied)
        })
        .collect()
}

/// Moves allowed from `c` under 8-connectivity. Diagonal moves also need
/// both orthogonal cells they pass between to be traversable.
pub(crate) fn moves<'a, T: Real>(
    flat: &'a FlatGrid<T>,
    ok: &'a [bool],
    c: CellIndex,
) -> impl Iterator<Item = (CellIndex, bool)> + 'a {
    const OFFSETS: [(i64, i64); 8] = [(-1, -1), (0, -1), (1, -1), (-1, 0), (1, 0), (-1, 1), (0, 1), (1, 1)];
    OFFSETS.iter().filter_map(move |&(dx, dy)| {
        let n = flat.offset(c, dx, dy)?;
        if !ok[flat.linear(n)] {
            return None;
        }
        let diagonal = dx != 0 && dy != 0;
        if diagonal {
            let a = flat.offset(c, dx, 0)?;
            let b = flat.offset(c, 0, dy)?;
            if !ok[flat.linear(a)] || !ok[flat.linear(b)] {
                return None;
            }
        }
        Some((n, diagonal))
    })
}

/// Single-source shortest paths over traversable cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortestPathTree {
    pub dims: [usize; 2],
    pub start: CellIndex,
    /// True when the robot's own cell was not traversable and the start was
    /// moved to a nearby cell.
    pub snapped: bool,
    pub cost: Vec<Option<GridCost>>,
    pub parent: Vec<Option<usize>>,
}

impl ShortestPathTree {
    #[inline]
    fn linear(&self, c: CellIndex) -> usize {
        c[0] + self.dims[0] * c[1]
    }

    pub fn is_reachable(&self, c: CellIndex) -> bool {
        self.cost[self.linear(c)].is_some()
    }

    pub fn cost_to(&self, c: CellIndex) -> Option<GridCost> {
        self.cost[self.linear(c)]
    }

    /// Reachable cells in linear index order (the start included).
    pub fn reachable(&self) -> Vec<CellIndex> {
        (0..self.cost.len()).filter(|&i| self.cost[i].is_some()).map(|i| [i % self.dims[0], i / self.dims[0]]).collect()
    }

    /// Cells from the start to `goal`, both inclusive.
    pub fn path_to(&self, goal: CellIndex) -> Option<Vec<CellIndex>> {
        let mut lin = self.linear(goal);
        self.cost[lin]?;
        let mut path = vec![goal];
        while let Some(p) = self.parent[lin] {
            lin = p;
            path.push([p % self.dims[0], p / self.dims[0]]);
        }
        path.reverse();
        Some(path)
    }
}

/// Nearest traversable cell to `p` within `max_cells` cell widths, ties to
/// the lower linear index.
fn snap_start<T: Real>(flat: &FlatGrid<T>, ok: &[bool], p: Vec2<T>, max_cells: i64) -> Option<CellIndex> {
    let res = flat.resolution;
    let lo_x = ((p.x - flat.origin.x) / res).floor().to_i64()?;
    let lo_y = ((p.y - flat.origin.y) / res).floor().to_i64()?;
    let limit = T::from_i64(max_cells).unwrap() * res;
    let mut best: Option<(T, usize)> = None;
    for y in (lo_y - max_cells - 1)..=(lo_y + max_cells + 1) {
        for x in (lo_x - max_cells - 1)..=(lo_x + max_cells + 1) {
            if x < 0 || y < 0 || x as usize >= flat.dims[0] || y as usize >= flat.dims[1] {
                continue;
            }
            let c = [x as usize, y as usize];
            let lin = flat.linear(c);
            if !ok[lin] {
                continue;
            }
            let d = flat.cell_center(c).dist(p);
            if d > limit {
                continue;
            }
            let better = match best {
                None => true,
                Some((bd, bl)) => d < bd || (d == bd && lin < bl),
            };
            if better {
                best = Some((d, lin));
            }
        }
    }
    best.map(|(_, lin)| flat.unlinear(lin))
}

/// Dijkstra from the robot position over the traversable cells.
///
/// When the robot's cell is not traversable the start snaps to the nearest
/// traversable cell center within two cells; failing that, a planning error
/// is returned.
pub fn dijkstra_paths<T: Real>(
    flat: &FlatGrid<T>,
    start: &PlannerState<T>,
    inflation_radius: usize,
) -> Result<ShortestPathTree> {
    let ok = traversable_mask(flat, inflation_radius);
    dijkstra_with_mask(flat, &ok, start.position())
}

pub(crate) fn dijkstra_with_mask<T: Real>(flat: &FlatGrid<T>, ok: &[bool], start: Vec2<T>) -> Result<ShortestPathTree> {
    let own = flat.cell_of(start).filter(|&c| ok[flat.linear(c)]);
    let snapped = own.is_none();
    let s = match own {
        Some(c) => c,
        None => snap_start(flat, ok, start, 2)
            .ok_or_else(|| VistaError::Planning("no traversable cell within 2 cells of the robot".into()))?,
    };
    let n = flat.len();
    let mut cost: Vec<Option<GridCost>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    let s_lin = flat.linear(s);
    cost[s_lin] = Some(GridCost::ZERO);
    heap.push(Reverse((GridCost::ZERO, s_lin)));
    while let Some(Reverse((c, lin))) = heap.pop() {
        if done[lin] {
            continue;
        }
        done[lin] = true;
        for (nb, diagonal) in moves(flat, ok, flat.unlinear(lin)) {
            let nl = flat.linear(nb);
            if done[nl] {
                continue;
            }
            let nc = c.step(diagonal);
            if cost[nl].is_none_or(|old| nc < old) {
                cost[nl] = Some(nc);
                parent[nl] = Some(lin);
                heap.push(Reverse((nc, nl)));
            }
        }
    }
    Ok(ShortestPathTree { dims: flat.dims, start: s, snapped, cost, parent })
}
