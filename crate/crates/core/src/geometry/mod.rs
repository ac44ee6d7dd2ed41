//! Triangle meshes, rays and AABB-tree queries.

mod mesh;
mod primitives;
pub mod shapes;
mod tree;

use nalgebra::{Point3, Vector3};

pub use mesh::TriangleMesh;
pub use primitives::{
    closest_point_on_triangle, ray_triangle, segment_segment, triangle_triangle, Aabb, RAY_DET_EPS,
};
pub use tree::{AabbTree, ClosestPoint, MeshPair, QueryStats, RayHit, LEAF_SIZE};

use crate::error::{Error, Result};

/// Tolerance on the direction norm accepted by [`Ray::new`].
pub const UNIT_TOL: f64 = 1e-9;

/// Half-line with a unit direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    origin: Point3<f64>,
    direction: Vector3<f64>,
}

impl Ray {
    pub fn new(origin: Point3<f64>, direction: Vector3<f64>) -> Result<Self> {
        if !origin.coords.iter().chain(direction.iter()).all(|c| c.is_finite()) {
            return Err(Error::InvalidRay("non-finite component".into()));
        }
        let n = direction.norm();
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidRay(format!("direction norm {n} is not 1")));
        }
        Ok(Self { origin, direction })
    }

    /// Ray from `from` passing through `through`.
    pub fn through(from: Point3<f64>, through: Point3<f64>) -> Result<Self> {
        let d = through - from;
        let n = d.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidRay("coincident points".into()));
        }
        Ok(Self {
            origin: from,
            direction: d / n,
        })
    }

    pub fn origin(&self) -> &Point3<f64> {
        &self.origin
    }

    pub fn direction(&self) -> &Vector3<f64> {
        &self.direction
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.direction * t
    }
}
