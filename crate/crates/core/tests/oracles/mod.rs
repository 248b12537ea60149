//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the code under test except for
//! plain data accessors.

#![allow(dead_code, clippy::neg_cmp_op_on_partial_ord)]

use vista_core::geometry::Ray;
use vista_core::map::{GridGeometry, VoxelIndex, VoxelState};
use vista_core::plan::FlatGrid;

/// Voxel containing `p`, computed from first principles.
fn cell_at(geom: &GridGeometry<f64>, p: [f64; 3]) -> Option<[i64; 3]> {
    let mut out = [0i64; 3];
    for a in 0..3 {
        let o = [geom.origin.x, geom.origin.y, geom.origin.z][a];
        let f = ((p[a] - o) / geom.resolution).floor();
        if !(f >= 0.0) || f >= geom.dims[a] as f64 {
            return None;
        }
        out[a] = f as i64;
    }
    Some(out)
}

fn point(ray: &Ray<f64>, t: f64) -> [f64; 3] {
    let o = ray.origin();
    let d = ray.direction();
    [o.x + t * d.x, o.y + t * d.y, o.z + t * d.z]
}

/// Appends the voxels crossed between `ta` (in `a`) and `tb` (in `b`) by
/// bisecting until consecutive voxels differ by one step on one axis.
fn refine(
    ray: &Ray<f64>,
    geom: &GridGeometry<f64>,
    ta: f64,
    a: Option<[i64; 3]>,
    tb: f64,
    b: Option<[i64; 3]>,
    out: &mut Vec<Option<[i64; 3]>>,
) {
    if a == b {
        return;
    }
    let adjacent = match (a, b) {
        (Some(x), Some(y)) => (0..3).map(|k| (x[k] - y[k]).abs()).sum::<i64>() == 1,
        _ => false,
    };
    if adjacent {
        out.push(b);
        return;
    }
    if tb - ta < 1e-13 {
        // Numerically simultaneous crossing: step the lowest axis first.
        if let (Some(x), Some(y)) = (a, b) {
            let mut cur = x;
            for k in 0..3 {
                while cur[k] != y[k] {
                    cur[k] += (y[k] - cur[k]).signum();
                    out.push(Some(cur));
                }
            }
        } else {
            out.push(b);
        }
        return;
    }
    let tm = 0.5 * (ta + tb);
    let m = cell_at(geom, point(ray, tm));
    refine(ray, geom, ta, a, tm, m, out);
    refine(ray, geom, tm, m, tb, b, out);
}

/// Parameter interval where the ray is inside the grid box (slab clipping).
fn box_interval(geom: &GridGeometry<f64>, ray: &Ray<f64>) -> Option<(f64, f64)> {
    let o = ray.origin().to_array();
    let d = ray.direction().to_array();
    let lo = geom.origin.to_array();
    let (mut t0, mut t1) = (0.0f64, ray.max_range());
    for a in 0..3 {
        let hi = lo[a] + geom.dims[a] as f64 * geom.resolution;
        if d[a] == 0.0 {
            if o[a] < lo[a] || o[a] >= hi {
                return None;
            }
            continue;
        }
        let (ta, tb) = ((lo[a] - o[a]) / d[a], (hi - o[a]) / d[a]);
        t0 = t0.max(ta.min(tb));
        t1 = t1.min(ta.max(tb));
    }
    (t0 < t1).then_some((t0, t1))
}

/// Voxels met by the ray segment `[0, max_range]`, found by sampling at
/// `resolution / 100` and bisecting every transition. Stops after the first
/// voxel for which `stop` returns true, and at the first exit from the grid.
/// A sample in the middle of the clipped segment makes sure that short
/// passes through a grid corner are not skipped.
pub fn sampled_traversal(
    geom: &GridGeometry<f64>,
    ray: &Ray<f64>,
    stop: impl Fn(VoxelIndex) -> bool,
) -> Vec<VoxelIndex> {
    let h = geom.resolution / 100.0;
    let mut ts: Vec<f64> = Vec::new();
    let mut t = 0.0;
    while t < ray.max_range() {
        ts.push(t);
        t += h;
    }
    ts.push(ray.max_range());
    if let Some((t0, t1)) = box_interval(geom, ray) {
        ts.push(0.5 * (t0 + t1));
        ts.sort_by(f64::total_cmp);
    }
    let mut states: Vec<Option<[i64; 3]>> = Vec::new();
    let mut prev_t = ts[0];
    let mut prev = cell_at(geom, point(ray, prev_t));
    states.push(prev);
    for &t in &ts[1..] {
        let cur = cell_at(geom, point(ray, t));
        refine(ray, geom, prev_t, prev, t, cur, &mut states);
        prev_t = t;
        prev = cur;
    }
    let mut out = Vec::new();
    let mut entered = false;
    for s in states {
        match s {
            Some(c) => {
                entered = true;
                let idx = [c[0] as usize, c[1] as usize, c[2] as usize];
                if out.last() != Some(&idx) {
                    out.push(idx);
                    if stop(idx) {
                        break;
                    }
                }
            }
            None if entered => break,
            None => {}
        }
    }
    out
}

/// Free cells with an Unobserved cell among their 8 neighbors, by double loop.
pub fn brute_frontiers(flat: &FlatGrid<f64>) -> Vec<[usize; 2]> {
    let [nx, ny] = flat.dims;
    let state = |x: usize, y: usize| flat.states[x + nx * y];
    let mut out = Vec::new();
    for y in 0..ny {
        for x in 0..nx {
            if state(x, y) != VoxelState::Free {
                continue;
            }
            let mut border = false;
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (xx, yy) = (x as i64 + dx, y as i64 + dy);
                    if xx >= 0
                        && yy >= 0
                        && (xx as usize) < nx
                        && (yy as usize) < ny
                        && state(xx as usize, yy as usize) == VoxelState::Unobserved
                    {
                        border = true;
                    }
                }
            }
            if border {
                out.push([x, y]);
            }
        }
    }
    out
}

/// Free and at Euclidean cell distance greater than `radius` from every
/// Occupied cell, by scanning the whole grid for each cell.
pub fn brute_traversable(flat: &FlatGrid<f64>, radius: usize) -> Vec<bool> {
    let [nx, ny] = flat.dims;
    let r2 = (radius * radius) as i64;
    let mut out = vec![false; nx * ny];
    for y in 0..ny {
        for x in 0..nx {
            if flat.states[x + nx * y] != VoxelState::Free {
                continue;
            }
            let mut clear = true;
            for oy in 0..ny {
                for ox in 0..nx {
                    if flat.states[ox + nx * oy] == VoxelState::Occupied {
                        let dx = ox as i64 - x as i64;
                        let dy = oy as i64 - y as i64;
                        if dx * dx + dy * dy <= r2 {
                            clear = false;
                        }
                    }
                }
            }
            out[x + nx * y] = clear;
        }
    }
    out
}

/// Bellman-Ford over the 8-connected traversable cells; diagonal moves need
/// both side cells traversable. Costs are `(orthogonal, diagonal)` counts.
pub fn bellman_ford(flat: &FlatGrid<f64>, ok: &[bool], start: [usize; 2]) -> Vec<Option<(u32, u32)>> {
    let [nx, ny] = flat.dims;
    let n = nx * ny;
    let value = |c: (u32, u32)| c.0 as f64 + c.1 as f64 * std::f64::consts::SQRT_2;
    let mut edges: Vec<(usize, usize, bool)> = Vec::new();
    for y in 0..ny as i64 {
        for x in 0..nx as i64 {
            let u = (x + nx as i64 * y) as usize;
            if !ok[u] {
                continue;
            }
            for dy in -1i64..=1 {
                for dx in -1i64..=1 {
                    if dx == 0 && dy == 0 {
                        continue;
                    }
                    let (xx, yy) = (x + dx, y + dy);
                    let inb = |a: i64, b: i64| a >= 0 && b >= 0 && a < nx as i64 && b < ny as i64;
                    if !inb(xx, yy) {
                        continue;
                    }
                    let w = (xx + nx as i64 * yy) as usize;
                    if !ok[w] {
                        continue;
                    }
                    let diag = dx != 0 && dy != 0;
                    if diag {
                        let a = (x + dx + nx as i64 * y) as usize;
                        let b = (x + nx as i64 * (y + dy)) as usize;
                        if !ok[a] || !ok[b] {
                            continue;
                        }
                    }
                    edges.push((u, w, diag));
                }
            }
        }
    }
    let mut dist: Vec<Option<(u32, u32)>> = vec![None; n];
    dist[start[0] + nx * start[1]] = Some((0, 0));
    for _ in 0..n {
        let mut changed = false;
        for &(u, w, diag) in &edges {
            if let Some(du) = dist[u] {
                let cand = if diag { (du.0, du.1 + 1) } else { (du.0 + 1, du.1) };
                let better = match dist[w] {
                    None => true,
                    Some(dw) => value(cand) < value(dw) - 1e-9,
                };
                if better {
                    dist[w] = Some(cand);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    dist
}

/// Closed-form gain of a candidate direction against stored directions.
pub fn closed_form_gain(stored: &[[f64; 3]], d: [f64; 3]) -> f64 {
    if stored.is_empty() {
        return 1.0;
    }
    let m = stored.iter().map(|s| -(s[0] * d[0] + s[1] * d[1] + s[2] * d[2])).fold(f64::INFINITY, f64::min);
    ((m + 1.0) / 2.0).clamp(0.0, 1.0)
}
