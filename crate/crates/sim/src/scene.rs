//! Ground-truth world: a dense occupancy grid built from boxes and spherical
//! objects, plus per-object embeddings.

use serde::{Deserialize, Serialize};
use vista_core::map::{walk, GridGeometry, WalkEnd};
use vista_core::plan::PlannerState;
use vista_core::{Ray, Vec3};

use crate::error::{setup, Result};

pub const DEFAULT_EMBEDDING_DIM: usize = 8;
pub const DEFAULT_GT_RESOLUTION: f64 = 0.125;

/// Axis-aligned solid box.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub min: [f64; 3],
    pub max: [f64; 3],
    #[serde(default = "default_wall_color")]
    pub color: [f64; 3],
}

fn default_wall_color() -> [f64; 3] {
    [0.7, 0.7, 0.7]
}

/// Spherical object of interest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectSpec {
    pub name: String,
    pub center: [f64; 3],
    pub radius: f64,
    #[serde(default = "default_object_color")]
    pub color: [f64; 3],
}

fn default_object_color() -> [f64; 3] {
    [0.9, 0.2, 0.1]
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartSpec {
    pub x: f64,
    pub y: f64,
    #[serde(default)]
    pub yaw: f64,
}

/// On-disk scene description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    pub name: String,
    pub bounds_min: [f64; 3],
    pub bounds_max: [f64; 3],
    #[serde(default = "default_resolution")]
    pub resolution: f64,
    #[serde(default)]
    pub boxes: Vec<BoxSpec>,
    #[serde(default)]
    pub objects: Vec<ObjectSpec>,
    pub start: StartSpec,
    #[serde(default)]
    pub query: Option<String>,
    #[serde(default = "default_embedding_dim")]
    pub embedding_dim: usize,
}

fn default_resolution() -> f64 {
    DEFAULT_GT_RESOLUTION
}

fn default_embedding_dim() -> usize {
    DEFAULT_EMBEDDING_DIM
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneObject {
    pub name: String,
    pub embedding: Vec<f64>,
    pub center: Vec3<f64>,
    pub radius: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Query {
    pub name: String,
    pub embedding: Vec<f64>,
}

/// Immutable ground truth used by the sensor, the kinematics and the referee.
#[derive(Clone, Debug)]
pub struct GroundTruthScene {
    pub name: String,
    pub geometry: GridGeometry<f64>,
    occupied: Vec<bool>,
    /// Object painted into each cell, if any.
    owner: Vec<Option<u32>>,
    colors: Vec<[f64; 3]>,
    pub objects: Vec<SceneObject>,
    pub background_embedding: Vec<f64>,
    pub start: PlannerState<f64>,
    pub query: Option<Query>,
    /// When set, every sensed point carries an embedding with zero
    /// normalized similarity to the query.
    pub zero_semantics: bool,
    spec: SceneSpec,
}

fn basis(dim: usize, i: usize) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    v[i] = 1.0;
    v
}

fn finite3(a: &[f64; 3]) -> bool {
    a.iter().all(|x| x.is_finite())
}

impl GroundTruthScene {
    /// Builds the occupancy grid. Objects sharing a name share an embedding;
    /// the background and every distinct object name get mutually orthogonal
    /// basis vectors.
    pub fn from_spec(spec: &SceneSpec) -> Result<Self> {
        if !(spec.resolution > 0.0) || !spec.resolution.is_finite() {
            return Err(setup("scene.resolution must be > 0"));
        }
        if !finite3(&spec.bounds_min)
            || !finite3(&spec.bounds_max)
            || (0..3).any(|a| spec.bounds_max[a] <= spec.bounds_min[a])
        {
            return Err(setup("scene.bounds_max must exceed scene.bounds_min on every axis"));
        }
        let mut names: Vec<&str> = Vec::new();
        for o in &spec.objects {
            if !names.contains(&o.name.as_str()) {
                names.push(&o.name);
            }
        }
        if names.len() + 1 > spec.embedding_dim {
            return Err(setup(format!(
                "scene.embedding_dim {} is too small for {} object names plus background",
                spec.embedding_dim,
                names.len()
            )));
        }
        let dims: [usize; 3] = std::array::from_fn(|a| {
            ((spec.bounds_max[a] - spec.bounds_min[a]) / spec.resolution).round().max(1.0) as usize
        });
        let origin = Vec3::from_array(spec.bounds_min);
        let geometry = GridGeometry::from_origin(origin, spec.resolution, dims)?;
        let n = geometry.len();
        if n > 50_000_000 {
            return Err(setup("scene grid exceeds 50M cells; raise scene.resolution"));
        }
        let mut occupied = vec![false; n];
        let mut owner = vec![None; n];
        let mut colors = vec![[0.0; 3]; n];
        let inside = |c: Vec3<f64>, b: &BoxSpec| (0..3).all(|a| c.get(a) >= b.min[a] && c.get(a) < b.max[a]);
        for b in &spec.boxes {
            for lin in 0..n {
                let c = geometry.voxel_center(geometry.unlinear(lin));
                if inside(c, b) {
                    occupied[lin] = true;
                    colors[lin] = b.color;
                }
            }
        }
        let mut objects = Vec::new();
        for (oi, o) in spec.objects.iter().enumerate() {
            if !(o.radius > 0.0) || !finite3(&o.center) {
                return Err(setup(format!("scene.objects[{}]: radius must be > 0 and center finite", o.name)));
            }
            let center = Vec3::from_array(o.center);
            if (0..3).any(|a| o.center[a] < spec.bounds_min[a] || o.center[a] >= spec.bounds_max[a]) {
                return Err(setup(format!("scene.objects[{}] lies outside the scene bounds", o.name)));
            }
            for lin in 0..n {
                let c = geometry.voxel_center(geometry.unlinear(lin));
                if (c - center).norm() <= o.radius {
                    occupied[lin] = true;
                    owner[lin] = Some(oi as u32);
                    colors[lin] = o.color;
                }
            }
            let family = names.iter().position(|&x| x == o.name).unwrap();
            objects.push(SceneObject {
                name: o.name.clone(),
                embedding: basis(spec.embedding_dim, family + 1),
                center,
                radius: o.radius,
            });
        }
        let start = PlannerState::new(spec.start.x, spec.start.y, spec.start.yaw);
        let query = match &spec.query {
            None => None,
            Some(q) => {
                let obj = objects
                    .iter()
                    .find(|o| &o.name == q)
                    .ok_or_else(|| setup(format!("query `{q}` names no object in scene `{}`", spec.name)))?;
                Some(Query { name: q.clone(), embedding: obj.embedding.clone() })
            }
        };
        let scene = Self {
            name: spec.name.clone(),
            geometry,
            occupied,
            owner,
            colors,
            objects,
            background_embedding: basis(spec.embedding_dim, 0),
            start,
            query,
            zero_semantics: false,
            spec: spec.clone(),
        };
        Ok(scene)
    }

    /// Checks that the start lies in free space at height `z`.
    pub fn check_start(&self, z: f64) -> Result<()> {
        let p = Vec3::new(self.start.x, self.start.y, z);
        match self.geometry.voxel_of(p) {
            None => Err(setup(format!("scene `{}`: start lies outside the scene bounds", self.name))),
            Some(idx) if self.occupied[self.geometry.linear(idx)] => {
                Err(setup(format!("scene `{}`: start lies in an occupied cell", self.name)))
            }
            Some(_) => Ok(()),
        }
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    /// Replaces the query by looking up an object name.
    pub fn with_query(mut self, name: Option<&str>) -> Result<Self> {
        self.query = match name {
            None => None,
            Some(q) => {
                let obj = self
                    .objects
                    .iter()
                    .find(|o| o.name == q)
                    .ok_or_else(|| setup(format!("query `{q}` names no object in scene `{}`", self.name)))?;
                Some(Query { name: q.to_string(), embedding: obj.embedding.clone() })
            }
        };
        self.spec.query = name.map(str::to_string);
        Ok(self)
    }

    pub fn with_zero_semantics(mut self, on: bool) -> Self {
        self.zero_semantics = on;
        self
    }

    /// Vector the map scores semantics against: the query embedding, or for
    /// a scene without a query the last basis vector, which no object uses.
    pub fn integration_query(&self) -> Result<Vec<f64>> {
        if let Some(q) = &self.query {
            return Ok(q.embedding.clone());
        }
        let dim = self.background_embedding.len();
        if self.objects.iter().any(|o| o.embedding[dim - 1] != 0.0) || dim < 2 {
            return Err(setup(format!(
                "scene `{}` has no query and scene.embedding_dim leaves no unused axis",
                self.name
            )));
        }
        Ok(basis(dim, dim - 1))
    }

    pub fn query_object(&self) -> Option<&SceneObject> {
        self.query_index().map(|i| &self.objects[i])
    }

    pub fn cell_occupied(&self, idx: [usize; 3]) -> bool {
        self.occupied[self.geometry.linear(idx)]
    }

    pub fn occupied_at(&self, p: Vec3<f64>) -> bool {
        self.geometry.voxel_of(p).is_some_and(|i| self.cell_occupied(i))
    }

    pub fn color(&self, idx: [usize; 3]) -> [f64; 3] {
        self.colors[self.geometry.linear(idx)]
    }

    pub fn in_bounds(&self, p: Vec3<f64>) -> bool {
        self.geometry.voxel_of(p).is_some()
    }

    /// Range to the first occupied cell along `ray`, and that cell.
    pub fn cast(&self, ray: &Ray<f64>) -> Option<(f64, [usize; 3])> {
        self.cast_filtered(ray, |_| true)
    }

    fn cast_filtered(&self, ray: &Ray<f64>, counts: impl Fn([usize; 3]) -> bool) -> Option<(f64, [usize; 3])> {
        let mut hit = None;
        let end = walk(&self.geometry, ray, |idx, _| {
            let stop = self.cell_occupied(idx) && counts(idx);
            if stop {
                hit = Some(idx);
            }
            stop
        });
        match (end, hit) {
            (WalkEnd::Stopped { t }, Some(idx)) => Some((t, idx)),
            _ => None,
        }
    }

    /// True when the segment `a -> b` crosses no occupied cell other than
    /// the cells of object `ignore`.
    pub fn line_of_sight(&self, a: Vec3<f64>, b: Vec3<f64>, ignore: Option<usize>) -> bool {
        let d = b - a;
        let len = d.norm();
        if len == 0.0 {
            return true;
        }
        let Ok(ray) = Ray::new(a, d, len) else { return true };
        let own = |idx: [usize; 3]| ignore.is_some() && self.owner(idx) == ignore;
        self.cast_filtered(&ray, |idx| !own(idx)).is_none()
    }

    /// Index of the object occupying a cell.
    pub fn owner(&self, idx: [usize; 3]) -> Option<usize> {
        self.owner[self.geometry.linear(idx)].map(|o| o as usize)
    }

    /// Embedding of an occupied cell: its object's, else the background.
    pub fn embedding_of(&self, idx: [usize; 3]) -> &[f64] {
        match self.owner(idx) {
            Some(o) => &self.objects[o].embedding,
            None => &self.background_embedding,
        }
    }

    pub fn query_index(&self) -> Option<usize> {
        let q = self.query.as_ref()?;
        self.objects.iter().position(|o| o.name == q.name)
    }

    /// 2D occupancy of the cells overlapping `[z_lo, z_hi]`, row-major over
    /// `(x, y)`.
    pub fn band_occupancy(&self, z_lo: f64, z_hi: f64) -> Vec<bool> {
        let [nx, ny, nz] = self.geometry.dims;
        let res = self.geometry.resolution;
        let layers: Vec<usize> = (0..nz)
            .filter(|&k| {
                let lo = self.geometry.origin.z + k as f64 * res;
                lo < z_hi && lo + res > z_lo
            })
            .collect();
        let mut out = vec![false; nx * ny];
        for y in 0..ny {
            for x in 0..nx {
                out[x + nx * y] = layers.iter().any(|&k| self.cell_occupied([x, y, k]));
            }
        }
        out
    }
}
