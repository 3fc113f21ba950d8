//! Scene geometry: a tree of compounds and material-bearing shapes.
//!
//! Scenes are read from a small JSON format. Compounds group other nodes,
//! leaves carry one shape each. The mesher only ever looks at shape vertices,
//! so overlapping shapes are accepted as-is and no boolean fusing happens here.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Point3 = [f64; 3];

#[derive(Debug, Error, PartialEq)]
pub enum SceneError {
    #[error("malformed scene document: {0}")]
    Malformed(String),
    #[error("duplicate shape id `{0}`")]
    DuplicateId(String),
    #[error("shape `{id}`: unknown shape kind `{kind}`")]
    UnknownKind { id: String, kind: String },
    #[error("shape `{id}`: {field} must be positive and finite, got {value}")]
    InvalidMaterial {
        id: String,
        field: &'static str,
        value: f64,
    },
    #[error("shape `{0}`: box has zero extent on all three axes")]
    DegenerateBox(String),
    #[error("shape `{0}`: vertex set is empty")]
    EmptyVertexSet(String),
    #[error("shape `{0}`: coordinates must be finite")]
    NonFiniteCoordinate(String),
    #[error("scene contains no shapes")]
    EmptyScene,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Axis::X => "X",
            Axis::Y => "Y",
            Axis::Z => "Z",
        }
    }
}

/// Electromagnetic material of a shape. When `pec` is set the relative
/// constants are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Material {
    #[serde(default = "unit")]
    pub eps_r: f64,
    #[serde(default = "unit")]
    pub mu_r: f64,
    #[serde(default)]
    pub pec: bool,
}

fn unit() -> f64 {
    1.0
}

impl Material {
    pub fn vacuum() -> Self {
        Self {
            eps_r: 1.0,
            mu_r: 1.0,
            pec: false,
        }
    }

    pub fn pec() -> Self {
        Self {
            eps_r: 1.0,
            mu_r: 1.0,
            pec: true,
        }
    }

    pub fn dielectric(eps_r: f64) -> Self {
        Self {
            eps_r,
            mu_r: 1.0,
            pec: false,
        }
    }

    fn validate(&self, id: &str) -> Result<(), SceneError> {
        if self.pec {
            return Ok(());
        }
        for (field, value) in [("eps_r", self.eps_r), ("mu_r", self.mu_r)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(SceneError::InvalidMaterial {
                    id: id.to_owned(),
                    field,
                    value,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    /// Axis-aligned box; corners are normalized so `min <= max` componentwise.
    Box { min: Point3, max: Point3 },
    VertexSet(Vec<Point3>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub id: String,
    pub geometry: Geometry,
    pub material: Material,
}

impl Shape {
    /// Builds a box from two opposite corners in any order.
    pub fn cuboid(id: impl Into<String>, a: Point3, b: Point3, material: Material) -> Self {
        let mut min = a;
        let mut max = b;
        for i in 0..3 {
            if min[i] > max[i] {
                std::mem::swap(&mut min[i], &mut max[i]);
            }
        }
        Self {
            id: id.into(),
            geometry: Geometry::Box { min, max },
            material,
        }
    }

    pub fn vertex_set(id: impl Into<String>, vertices: Vec<Point3>, material: Material) -> Self {
        Self {
            id: id.into(),
            geometry: Geometry::VertexSet(vertices),
            material,
        }
    }

    fn validate(&self) -> Result<(), SceneError> {
        self.material.validate(&self.id)?;
        let finite = |p: &Point3| p.iter().all(|v| v.is_finite());
        match &self.geometry {
            Geometry::Box { min, max } => {
                if !finite(min) || !finite(max) {
                    return Err(SceneError::NonFiniteCoordinate(self.id.clone()));
                }
                if (0..3).all(|i| min[i] == max[i]) {
                    return Err(SceneError::DegenerateBox(self.id.clone()));
                }
            }
            Geometry::VertexSet(vertices) => {
                if vertices.is_empty() {
                    return Err(SceneError::EmptyVertexSet(self.id.clone()));
                }
                if !vertices.iter().all(finite) {
                    return Err(SceneError::NonFiniteCoordinate(self.id.clone()));
                }
            }
        }
        Ok(())
    }

    /// Coordinates of every vertex projected onto `axis`, unsorted.
    fn axis_projection(&self, axis: Axis) -> impl Iterator<Item = f64> + '_ {
        let i = axis.index();
        let (pair, set): (Option<[f64; 2]>, &[Point3]) = match &self.geometry {
            Geometry::Box { min, max } => (Some([min[i], max[i]]), &[]),
            Geometry::VertexSet(v) => (None, v.as_slice()),
        };
        pair.into_iter()
            .flatten()
            .chain(set.iter().map(move |p| p[i]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SceneNode {
    Compound {
        name: String,
        children: Vec<SceneNode>,
    },
    Leaf(Shape),
}

impl SceneNode {
    pub fn compound(name: impl Into<String>, children: Vec<SceneNode>) -> Self {
        SceneNode::Compound {
            name: name.into(),
            children,
        }
    }

    /// Total node count, compounds included.
    pub fn node_count(&self) -> usize {
        match self {
            SceneNode::Leaf(_) => 1,
            SceneNode::Compound { children, .. } => {
                1 + children.iter().map(SceneNode::node_count).sum::<usize>()
            }
        }
    }

    /// Checks shape ids for uniqueness and every shape for validity.
    pub fn validate(&self) -> Result<(), SceneError> {
        let mut seen = HashSet::new();
        for shape in dfs_shapes(self) {
            shape.validate()?;
            if !seen.insert(shape.id.as_str()) {
                return Err(SceneError::DuplicateId(shape.id.clone()));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&RawNode::from(self)).expect("scene serialization")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub min: Point3,
    pub max: Point3,
}

impl BoundingBox {
    fn of_points<'a>(mut points: impl Iterator<Item = &'a Point3>) -> Option<Self> {
        let first = *points.next()?;
        let mut bbox = BoundingBox {
            min: first,
            max: first,
        };
        for p in points {
            bbox.include_point(p);
        }
        Some(bbox)
    }

    fn include_point(&mut self, p: &Point3) {
        for ((lo, hi), v) in self.min.iter_mut().zip(&mut self.max).zip(p) {
            *lo = lo.min(*v);
            *hi = hi.max(*v);
        }
    }

    pub fn union(&self, other: &BoundingBox) -> BoundingBox {
        let mut out = *self;
        out.include_point(&other.min);
        out.include_point(&other.max);
        out
    }

    pub fn contains(&self, other: &BoundingBox) -> bool {
        (0..3).all(|i| self.min[i] <= other.min[i] && other.max[i] <= self.max[i])
    }

    pub fn interval(&self, axis: Axis) -> (f64, f64) {
        (self.min[axis.index()], self.max[axis.index()])
    }
}

/// Parses a scene document and validates it.
pub fn parse_scene(text: &str) -> Result<SceneNode, SceneError> {
    let raw: RawNode =
        serde_json::from_str(text).map_err(|e| SceneError::Malformed(e.to_string()))?;
    let root = SceneNode::try_from(raw)?;
    root.validate()?;
    Ok(root)
}

/// Leaf shapes in depth-first pre-order, children visited in document order.
pub fn dfs_shapes(root: &SceneNode) -> Vec<&Shape> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        match node {
            SceneNode::Leaf(shape) => out.push(shape),
            SceneNode::Compound { children, .. } => stack.extend(children.iter().rev()),
        }
    }
    out
}

pub fn shape_bbox(shape: &Shape) -> BoundingBox {
    match &shape.geometry {
        Geometry::Box { min, max } => BoundingBox {
            min: *min,
            max: *max,
        },
        Geometry::VertexSet(v) => {
            BoundingBox::of_points(v.iter()).expect("validated vertex sets are non-empty")
        }
    }
}

pub fn scene_bbox<'a>(
    shapes: impl IntoIterator<Item = &'a Shape>,
) -> Result<BoundingBox, SceneError> {
    shapes
        .into_iter()
        .map(shape_bbox)
        .reduce(|acc, b| acc.union(&b))
        .ok_or(SceneError::EmptyScene)
}

/// Sorted, exactly deduplicated projection of all shape vertices onto `axis`.
pub fn axis_vertex_coords<'a>(shapes: impl IntoIterator<Item = &'a Shape>, axis: Axis) -> Vec<f64> {
    let mut coords: Vec<f64> = shapes
        .into_iter()
        .flat_map(|s| s.axis_projection(axis))
        .collect();
    coords.sort_by(f64::total_cmp);
    coords.dedup_by(|a, b| a == b);
    coords
}

// Wire format.

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawNode {
    Leaf { shape: RawShape },
    Compound { name: String, children: Vec<RawNode> },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawShape {
    id: String,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min: Option<Point3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max: Option<Point3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertices: Option<Vec<Point3>>,
    material: Material,
}

impl TryFrom<RawNode> for SceneNode {
    type Error = SceneError;

    fn try_from(raw: RawNode) -> Result<Self, Self::Error> {
        match raw {
            RawNode::Compound { name, children } => Ok(SceneNode::Compound {
                name,
                children: children
                    .into_iter()
                    .map(SceneNode::try_from)
                    .collect::<Result<_, _>>()?,
            }),
            RawNode::Leaf { shape } => Shape::try_from(shape).map(SceneNode::Leaf),
        }
    }
}

impl TryFrom<RawShape> for Shape {
    type Error = SceneError;

    fn try_from(raw: RawShape) -> Result<Self, Self::Error> {
        let missing = |field: &str| {
            SceneError::Malformed(format!("shape `{}`: missing field `{field}`", raw.id))
        };
        match raw.kind.as_str() {
            "box" => {
                let min = raw.min.ok_or_else(|| missing("min"))?;
                let max = raw.max.ok_or_else(|| missing("max"))?;
                Ok(Shape::cuboid(raw.id, min, max, raw.material))
            }
            "vertex-set" => {
                let vertices = raw.vertices.ok_or_else(|| missing("vertices"))?;
                Ok(Shape::vertex_set(raw.id, vertices, raw.material))
            }
            _ => Err(SceneError::UnknownKind {
                id: raw.id,
                kind: raw.kind,
            }),
        }
    }
}

impl From<&SceneNode> for RawNode {
    fn from(node: &SceneNode) -> Self {
        match node {
            SceneNode::Compound { name, children } => RawNode::Compound {
                name: name.clone(),
                children: children.iter().map(RawNode::from).collect(),
            },
            SceneNode::Leaf(shape) => {
                let (kind, min, max, vertices) = match &shape.geometry {
                    Geometry::Box { min, max } => ("box", Some(*min), Some(*max), None),
                    Geometry::VertexSet(v) => ("vertex-set", None, None, Some(v.clone())),
                };
                RawNode::Leaf {
                    shape: RawShape {
                        id: shape.id.clone(),
                        kind: kind.to_owned(),
                        min,
                        max,
                        vertices,
                        material: shape.material,
                    },
                }
            }
        }
    }
}
