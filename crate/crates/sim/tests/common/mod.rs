#![allow(dead_code)]

use vista_sim::scene::{BoxSpec, ObjectSpec, SceneSpec, StartSpec};
use vista_sim::GroundTruthScene;

pub fn spec(boxes: Vec<BoxSpec>, objects: Vec<ObjectSpec>, query: Option<&str>) -> SceneSpec {
    SceneSpec {
        name: "test".into(),
        bounds_min: [0.0, 0.0, 0.0],
        bounds_max: [8.0, 8.0, 2.0],
        resolution: 0.125,
        boxes,
        objects,
        start: StartSpec { x: 1.0, y: 1.0, yaw: 0.0 },
        query: query.map(str::to_string),
        embedding_dim: 8,
    }
}

pub fn wall_x(x0: f64, x1: f64) -> BoxSpec {
    BoxSpec { min: [x0, 0.0, 0.0], max: [x1, 8.0, 2.0], color: [0.5, 0.5, 0.5] }
}

pub fn ball(name: &str, x: f64, y: f64, r: f64) -> ObjectSpec {
    ObjectSpec { name: name.into(), center: [x, y, 1.0], radius: r, color: [1.0, 0.0, 0.0] }
}

pub fn scene(boxes: Vec<BoxSpec>, objects: Vec<ObjectSpec>, query: Option<&str>) -> GroundTruthScene {
    GroundTruthScene::from_spec(&spec(boxes, objects, query)).unwrap()
}
