//! Parametric scenes. Every generator is deterministic in its seed: the seed
//! jitters the start pose and the object placements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vista_core::plan::derive_seed;

use crate::error::{setup, Result};
use crate::scene::{BoxSpec, ObjectSpec, SceneSpec, StartSpec, DEFAULT_EMBEDDING_DIM, DEFAULT_GT_RESOLUTION};

pub const WALL_HEIGHT: f64 = 2.5;
pub const WALL_THICKNESS: f64 = 0.25;
pub const OBJECT_Z: f64 = 1.0;

pub const BUILTIN_NAMES: [&str; 4] = ["open_room", "occluded_room", "maze", "closed_room"];

const WALL_COLOR: [f64; 3] = [0.75, 0.75, 0.72];
const TARGET_COLOR: [f64; 3] = [0.85, 0.2, 0.1];
const DISTRACTOR_COLOR: [f64; 3] = [0.1, 0.6, 0.2];

/// Builds the named builtin scene for `seed`.
pub fn builtin_scene(name: &str, seed: u64) -> Result<SceneSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, 100));
    match name {
        "open_room" => Ok(open_room(&mut rng)),
        "occluded_room" => Ok(occluded_room(&mut rng)),
        "maze" => Ok(maze(&mut rng)),
        "closed_room" => Ok(closed_room(&mut rng)),
        other => Err(setup(format!(
            "scene `{other}` is neither a builtin ({}) nor a readable file",
            BUILTIN_NAMES.join(", ")
        ))),
    }
}

pub fn is_builtin(name: &str) -> bool {
    BUILTIN_NAMES.contains(&name)
}

fn wall(x0: f64, y0: f64, x1: f64, y1: f64) -> BoxSpec {
    BoxSpec { min: [x0, y0, 0.0], max: [x1, y1, WALL_HEIGHT], color: WALL_COLOR }
}

/// Four walls enclosing `[t, t + w] x [t, t + h]`, `t` the wall thickness.
fn enclosure(w: f64, h: f64) -> Vec<BoxSpec> {
    let t = WALL_THICKNESS;
    vec![
        wall(0.0, 0.0, w + 2.0 * t, t),
        wall(0.0, h + t, w + 2.0 * t, h + 2.0 * t),
        wall(0.0, t, t, h + t),
        wall(w + t, t, w + 2.0 * t, h + t),
    ]
}

fn jitter(rng: &mut ChaCha8Rng, amount: f64) -> f64 {
    rng.gen_range(-amount..=amount)
}

fn start(rng: &mut ChaCha8Rng, x: f64, y: f64) -> StartSpec {
    StartSpec {
        x: x + jitter(rng, 0.3),
        y: y + jitter(rng, 0.3),
        yaw: rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI),
    }
}

fn object(name: &str, x: f64, y: f64, radius: f64, color: [f64; 3]) -> ObjectSpec {
    ObjectSpec { name: name.to_string(), center: [x, y, OBJECT_Z], radius, color }
}

fn room_spec(
    name: &str,
    w: f64,
    h: f64,
    boxes: Vec<BoxSpec>,
    objects: Vec<ObjectSpec>,
    start: StartSpec,
    query: Option<&str>,
) -> SceneSpec {
    let t = WALL_THICKNESS;
    SceneSpec {
        name: name.to_string(),
        bounds_min: [0.0, 0.0, 0.0],
        bounds_max: [w + 2.0 * t, h + 2.0 * t, WALL_HEIGHT],
        resolution: DEFAULT_GT_RESOLUTION,
        boxes,
        objects,
        start,
        query: query.map(str::to_string),
        embedding_dim: DEFAULT_EMBEDDING_DIM,
    }
}

/// 8 m x 6 m room, nothing between the start and the target.
fn open_room(rng: &mut ChaCha8Rng) -> SceneSpec {
    let (w, h) = (8.0, 6.0);
    let s = start(rng, 1.75, 3.25);
    let target = object("chair", 6.25 + jitter(rng, 0.3), 3.25 + jitter(rng, 0.5), 0.35, TARGET_COLOR);
    let plant = object("plant", 4.25 + jitter(rng, 0.5), 5.5, 0.3, DISTRACTOR_COLOR);
    room_spec("open_room", w, h, enclosure(w, h), vec![target, plant], s, Some("chair"))
}

/// 12 m x 8 m room split by an interior wall with a 2 m gap at its north
/// end. The robot starts in the west half, the target sits in the east half
/// hidden behind the wall.
fn occluded_room(rng: &mut ChaCha8Rng) -> SceneSpec {
    let (w, h) = (12.0, 8.0);
    let t = WALL_THICKNESS;
    let mut boxes = enclosure(w, h);
    boxes.push(wall(6.0, t, 6.0 + t, 6.25));
    let s = start(rng, 2.25, 2.25);
    let target = object("chair", 9.5 + jitter(rng, 0.4), 1.75 + jitter(rng, 0.4), 0.35, TARGET_COLOR);
    let plant = object("plant", 1.0, 7.25 + jitter(rng, 0.2), 0.3, DISTRACTOR_COLOR);
    room_spec("occluded_room", w, h, boxes, vec![target, plant], s, Some("chair"))
}

/// 12 m x 12 m floor with a corridor along y = 6 and four rooms off it.
/// The target is in the north-east room.
fn maze(rng: &mut ChaCha8Rng) -> SceneSpec {
    let (w, h) = (12.0, 12.0);
    let t = WALL_THICKNESS;
    let mut boxes = enclosure(w, h);
    // Corridor walls at y = 4.75 and y = 7.5, each with two doors.
    for &y in &[4.75, 7.5] {
        boxes.push(wall(t, y, 2.0, y + t));
        boxes.push(wall(3.5, y, 8.5, y + t));
        boxes.push(wall(10.0, y, w + t, y + t));
    }
    // Room dividers at x = 6.
    boxes.push(wall(6.0, t, 6.0 + t, 4.75));
    boxes.push(wall(6.0, 7.75, 6.0 + t, h + t));
    let s = start(rng, 1.5, 2.25);
    let target = object("chair", 9.5 + jitter(rng, 0.5), 10.5 + jitter(rng, 0.4), 0.35, TARGET_COLOR);
    let plant = object("plant", 3.0 + jitter(rng, 0.5), 10.5, 0.3, DISTRACTOR_COLOR);
    room_spec("maze", w, h, boxes, vec![target, plant], s, Some("chair"))
}

/// 8 m x 6 m room with a pillar and no query object.
fn closed_room(rng: &mut ChaCha8Rng) -> SceneSpec {
    let (w, h) = (8.0, 6.0);
    let mut boxes = enclosure(w, h);
    let px = 5.0 + jitter(rng, 0.5);
    let py = 3.0 + jitter(rng, 0.5);
    boxes.push(wall(px, py, px + 0.5, py + 0.5));
    let s = start(rng, 2.0, 3.25);
    room_spec("closed_room", w, h, boxes, Vec::new(), s, None)
}
