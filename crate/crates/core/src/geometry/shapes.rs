//! Tessellated primitives used for link meshes and scripted obstacles.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Point3, Vector3};

use super::TriangleMesh;

fn ring(radius: f64, z: f64, segments: usize) -> impl Iterator<Item = Point3<f64>> {
    (0..segments).map(move |k| {
        let a = 2.0 * PI * k as f64 / segments as f64;
        Point3::new(radius * a.cos(), radius * a.sin(), z)
    })
}

/// Box centered at the origin with the given half extents.
pub fn cuboid(half: Vector3<f64>) -> TriangleMesh {
    let (x, y, z) = (half.x, half.y, half.z);
    let v = vec![
        Point3::new(-x, -y, -z),
        Point3::new(x, -y, -z),
        Point3::new(x, y, -z),
        Point3::new(-x, y, -z),
        Point3::new(-x, -y, z),
        Point3::new(x, -y, z),
        Point3::new(x, y, z),
        Point3::new(-x, y, z),
    ];
    let f = vec![
        [0, 2, 1],
        [0, 3, 2],
        [4, 5, 6],
        [4, 6, 7],
        [0, 1, 5],
        [0, 5, 4],
        [1, 2, 6],
        [1, 6, 5],
        [2, 3, 7],
        [2, 7, 6],
        [3, 0, 4],
        [3, 4, 7],
    ];
    TriangleMesh::new(v, f).expect("cuboid is valid")
}

/// Rectangle in the local z = 0 plane, normal +z.
pub fn rectangle(half_x: f64, half_y: f64) -> TriangleMesh {
    let v = vec![
        Point3::new(-half_x, -half_y, 0.0),
        Point3::new(half_x, -half_y, 0.0),
        Point3::new(half_x, half_y, 0.0),
        Point3::new(-half_x, half_y, 0.0),
    ];
    TriangleMesh::new(v, vec![[0, 1, 2], [0, 2, 3]]).expect("rectangle is valid")
}

/// Closed cylinder along +z from `z0` to `z1`. Ring vertex `k` sits at angle
/// `2πk/segments` from +x.
pub fn cylinder(radius: f64, z0: f64, z1: f64, segments: usize) -> TriangleMesh {
    let n = segments as u32;
    let mut v: Vec<Point3<f64>> = ring(radius, z0, segments).chain(ring(radius, z1, segments)).collect();
    v.push(Point3::new(0.0, 0.0, z0));
    v.push(Point3::new(0.0, 0.0, z1));
    let (c0, c1) = (2 * n, 2 * n + 1);
    let mut f = Vec::with_capacity(4 * segments);
    for k in 0..n {
        let k1 = (k + 1) % n;
        f.push([k, k1, n + k1]);
        f.push([k, n + k1, n + k]);
        f.push([c0, k1, k]);
        f.push([c1, n + k, n + k1]);
    }
    TriangleMesh::new(v, f).expect("cylinder is valid")
}

/// UV sphere (or capsule when `length > 0`: hemispheres joined by a
/// cylinder from z = 0 to z = `length`).
pub fn capsule(radius: f64, length: f64, segments: usize, rings: usize) -> TriangleMesh {
    let n = segments as u32;
    let mut v = vec![Point3::new(0.0, 0.0, -radius)];
    // latitude rows from south to north; equator duplicated when length > 0
    let mut rows = Vec::new();
    for r in 1..rings {
        let lat = -FRAC_PI_2 + PI * r as f64 / rings as f64;
        rows.push((lat, if lat <= 0.0 { 0.0 } else { length }));
        if length > 0.0 && r * 2 == rings {
            rows.push((lat, length));
        }
    }
    for &(lat, z) in &rows {
        v.extend(ring(radius * lat.cos(), z + radius * lat.sin(), segments));
    }
    v.push(Point3::new(0.0, 0.0, length + radius));
    let top = v.len() as u32 - 1;
    let row = |r: usize, k: u32| 1 + r as u32 * n + (k % n);
    let mut f = Vec::new();
    for k in 0..n {
        f.push([0, row(0, k + 1), row(0, k)]);
    }
    for r in 0..rows.len() - 1 {
        for k in 0..n {
            f.push([row(r, k), row(r, k + 1), row(r + 1, k + 1)]);
            f.push([row(r, k), row(r + 1, k + 1), row(r + 1, k)]);
        }
    }
    let last = rows.len() - 1;
    for k in 0..n {
        f.push([top, row(last, k), row(last, k + 1)]);
    }
    TriangleMesh::new(v, f).expect("capsule is valid")
}

pub fn sphere(radius: f64, segments: usize, rings: usize) -> TriangleMesh {
    capsule(radius, 0.0, segments, rings)
}
