//! Independent reference implementations used as test oracles.
//!
//! Nothing here calls the library's own primitives: rays are intersected with
//! the triangle plane and then classified with edge half-space tests, closest
//! points come from a plane projection plus clamped edge projections.

#![allow(dead_code)]

use nalgebra::{DVector, Isometry3, Matrix6xX, Point3, Translation3, UnitQuaternion, Vector3};
use rand::Rng;

use proxavoid::geometry::{shapes, TriangleMesh};
use proxavoid::robot::RobotModel;

pub type Tri = [Point3<f64>; 3];

/// Plane intersection followed by an inside test on the three edges.
pub fn ray_hit(o: &Point3<f64>, d: &Vector3<f64>, tri: &Tri, t_min: f64) -> Option<f64> {
    let [a, b, c] = tri;
    let n = (b - a).cross(&(c - a));
    let denom = n.dot(d);
    if denom.abs() < 1e-14 * n.norm() {
        return None;
    }
    let t = n.dot(&(a - o)) / denom;
    if !(t >= t_min) {
        return None;
    }
    let p = o + d * t;
    let inside = [(a, b), (b, c), (c, a)]
        .iter()
        .all(|(u, v)| (*v - *u).cross(&(p - *u)).dot(&n) >= 0.0);
    inside.then_some(t)
}

pub fn closest_on_segment(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> Point3<f64> {
    let ab = b - a;
    let len2 = ab.norm_squared();
    if len2 == 0.0 {
        return *a;
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    a + ab * s
}

/// Projection onto the plane when it falls inside, otherwise the best of the
/// three clamped edge projections.
pub fn closest_on_triangle(p: &Point3<f64>, tri: &Tri) -> Point3<f64> {
    let [a, b, c] = tri;
    let (e0, e1) = (b - a, c - a);
    let (d00, d01, d11) = (e0.dot(&e0), e0.dot(&e1), e1.dot(&e1));
    let w = p - a;
    let (r0, r1) = (w.dot(&e0), w.dot(&e1));
    let det = d00 * d11 - d01 * d01;
    if det > 1e-300 {
        let u = (d11 * r0 - d01 * r1) / det;
        let v = (d00 * r1 - d01 * r0) / det;
        if u >= 0.0 && v >= 0.0 && u + v <= 1.0 {
            return a + e0 * u + e1 * v;
        }
    }
    [(a, b), (b, c), (c, a)]
        .iter()
        .map(|(u, v)| closest_on_segment(p, u, v))
        .min_by(|x, y| (p - x).norm_squared().total_cmp(&(p - y).norm_squared()))
        .unwrap()
}

/// First hit over a triangle list, `(t, triangle)`.
pub fn brute_ray(tris: &[Tri], o: &Point3<f64>, d: &Vector3<f64>, t_min: f64) -> Option<(f64, usize)> {
    let mut best: Option<(f64, usize)> = None;
    for (i, tri) in tris.iter().enumerate() {
        if let Some(t) = ray_hit(o, d, tri, t_min) {
            if best.is_none_or(|b| t < b.0) {
                best = Some((t, i));
            }
        }
    }
    best
}

/// Squared distance and closest point over a triangle list.
pub fn brute_closest(tris: &[Tri], p: &Point3<f64>) -> (f64, Point3<f64>) {
    let mut best = (f64::INFINITY, *p);
    for tri in tris {
        let c = closest_on_triangle(p, tri);
        let d = (p - c).norm_squared();
        if d < best.0 {
            best = (d, c);
        }
    }
    best
}

pub fn world_triangles(mesh: &TriangleMesh, pose: &Isometry3<f64>) -> Vec<Tri> {
    mesh.triangles().map(|t| t.map(|v| pose * v)).collect()
}

pub fn unit_vector(rng: &mut impl Rng) -> Vector3<f64> {
    loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 0.1 && n <= 1.0 {
            return v / n;
        }
    }
}

pub fn random_pose(rng: &mut impl Rng, reach: f64) -> Isometry3<f64> {
    let t = Translation3::new(
        rng.random_range(-reach..reach),
        rng.random_range(-reach..reach),
        rng.random_range(-reach..reach),
    );
    let axis = unit_vector(rng);
    let angle = rng.random_range(0.0..std::f64::consts::PI);
    Isometry3::from_parts(t, UnitQuaternion::from_scaled_axis(axis * angle))
}

pub fn random_point(rng: &mut impl Rng, half: f64) -> Point3<f64> {
    Point3::new(
        rng.random_range(-half..half),
        rng.random_range(-half..half),
        rng.random_range(-half..half),
    )
}

/// Random triangle soup or a randomly posed primitive shape.
pub fn random_mesh(rng: &mut impl Rng) -> TriangleMesh {
    match rng.random_range(0..5) {
        0 => shapes::cuboid(Vector3::new(
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
            rng.random_range(0.05..1.0),
        ))
        .transformed(&random_pose(rng, 0.5)),
        1 => shapes::cylinder(
            rng.random_range(0.05..0.5),
            0.0,
            rng.random_range(0.1..1.5),
            rng.random_range(3..40),
        )
        .transformed(&random_pose(rng, 0.5)),
        2 => shapes::capsule(
            rng.random_range(0.05..0.4),
            rng.random_range(0.0..1.0),
            rng.random_range(3..24),
            rng.random_range(2..12),
        )
        .transformed(&random_pose(rng, 0.5)),
        _ => {
            let n = rng.random_range(1..300);
            let scale = rng.random_range(0.05..0.6);
            let mut verts = Vec::with_capacity(3 * n);
            let mut faces = Vec::with_capacity(n);
            for i in 0..n {
                let c = random_point(rng, 1.0);
                for _ in 0..3 {
                    verts.push(c + unit_vector(rng) * rng.random_range(0.01..scale));
                }
                let k = 3 * i as u32;
                faces.push([k, k + 1, k + 2]);
            }
            TriangleMesh::new(verts, faces).expect("valid soup")
        }
    }
}

pub fn random_q(rng: &mut impl Rng, model: &RobotModel) -> DVector<f64> {
    DVector::from_fn(model.dof(), |_, _| rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

/// Relative Frobenius error `‖a − b‖ / max(‖a‖, ‖b‖)`; zero when both vanish.
pub fn rel_err(a: &Matrix6xX<f64>, b: &Matrix6xX<f64>) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

/// Minimises a convex function on `[0, 1]` by golden-section search.
fn golden_min(f: impl Fn(f64) -> f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..80 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) <= f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    [0.0, 0.5 * (a + b), 1.0].into_iter().map(f).fold(f64::INFINITY, f64::min)
}

/// Squared segment distance as a nested one-dimensional minimisation; the
/// inner problem is a clamped projection, the outer one is convex.
pub fn segment_sq_distance(p1: &Point3<f64>, q1: &Point3<f64>, p2: &Point3<f64>, q2: &Point3<f64>) -> f64 {
    golden_min(|s| {
        let x = p1 + (q1 - p1) * s;
        (x - closest_on_segment(&x, p2, q2)).norm_squared()
    })
}

/// Squared distance of two triangles known not to intersect.
pub fn separated_triangles_sq_distance(a: &Tri, b: &Tri) -> f64 {
    let mut best = f64::INFINITY;
    for v in a {
        best = best.min((v - closest_on_triangle(v, b)).norm_squared());
    }
    for v in b {
        best = best.min((v - closest_on_triangle(v, a)).norm_squared());
    }
    for i in 0..3 {
        for j in 0..3 {
            best = best.min(segment_sq_distance(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]));
        }
    }
    best
}
