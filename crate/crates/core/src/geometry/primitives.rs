//! Low-level triangle, segment and box primitives shared by the tree queries.

use nalgebra::{Isometry3, Point3, Vector3};

/// Determinant threshold below which a ray is treated as parallel to a triangle.
pub const RAY_DET_EPS: f64 = 1e-12;

/// Barycentric slack so rays through shared edges never fall between triangles.
const EDGE_EPS: f64 = 1e-12;

/// Axis-aligned box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    /// Inverted box that any `grow` call will overwrite.
    pub fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn new(min: Point3<f64>, max: Point3<f64>) -> Self {
        Self { min, max }
    }

    pub fn from_points<'a>(pts: impl IntoIterator<Item = &'a Point3<f64>>) -> Self {
        let mut b = Self::empty();
        for p in pts {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|i| self.min[i] > self.max[i])
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn longest_axis(&self) -> usize {
        let e = self.extent();
        if e.x >= e.y && e.x >= e.z {
            0
        } else if e.y >= e.z {
            1
        } else {
            2
        }
    }

    pub fn contains_point(&self, p: &Point3<f64>, tol: f64) -> bool {
        (0..3).all(|i| p[i] >= self.min[i] - tol && p[i] <= self.max[i] + tol)
    }

    /// Squared distance from `p` to the box (zero inside).
    pub fn sq_distance_to_point(&self, p: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let v = p[i];
            if v < self.min[i] {
                let d = self.min[i] - v;
                d2 += d * d;
            } else if v > self.max[i] {
                let d = v - self.max[i];
                d2 += d * d;
            }
        }
        d2
    }

    /// Squared gap between two boxes (zero when overlapping).
    pub fn sq_distance_to_aabb(&self, other: &Aabb) -> f64 {
        let mut d2 = 0.0;
        for i in 0..3 {
            let gap = (other.min[i] - self.max[i]).max(self.min[i] - other.max[i]);
            if gap > 0.0 {
                d2 += gap * gap;
            }
        }
        d2
    }

    /// Conservative box around this box after a rigid transform.
    pub fn transformed(&self, iso: &Isometry3<f64>) -> Aabb {
        let c = iso * self.center();
        let half = self.extent() * 0.5;
        let r = iso.rotation.to_rotation_matrix();
        let m = r.matrix();
        let mut h = Vector3::zeros();
        for i in 0..3 {
            h[i] = m[(i, 0)].abs() * half.x + m[(i, 1)].abs() * half.y + m[(i, 2)].abs() * half.z;
        }
        Aabb {
            min: c - h,
            max: c + h,
        }
    }

    /// Slab test. Returns the entry parameter clamped to `t_min`, or `None`
    /// when the ray misses the box inside `[t_min, t_max]`.
    #[inline]
    pub fn ray_entry(
        &self,
        origin: &Point3<f64>,
        inv_dir: &Vector3<f64>,
        t_min: f64,
        t_max: f64,
    ) -> Option<f64> {
        let mut lo = t_min;
        let mut hi = t_max;
        for i in 0..3 {
            let t1 = (self.min[i] - origin[i]) * inv_dir[i];
            let t2 = (self.max[i] - origin[i]) * inv_dir[i];
            // NaN (origin on a slab plane with zero direction) leaves bounds untouched.
            let (near, far) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            if near > lo {
                lo = near;
            }
            if far < hi {
                hi = far;
            }
            if lo > hi {
                return None;
            }
        }
        Some(lo)
    }
}

/// Möller–Trumbore ray/triangle test with a determinant threshold.
/// Returns the ray parameter when the hit lies at or beyond `t_min`.
#[inline]
pub fn ray_triangle(
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    tri: &[Point3<f64>; 3],
    t_min: f64,
) -> Option<f64> {
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < RAY_DET_EPS {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = origin - tri[0];
    let u = tvec.dot(&pvec) * inv;
    if !(-EDGE_EPS..=1.0 + EDGE_EPS).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv;
    if v < -EDGE_EPS || u + v > 1.0 + EDGE_EPS {
        return None;
    }
    let t = e2.dot(&qvec) * inv;
    if t >= t_min && t.is_finite() {
        Some(t)
    } else {
        None
    }
}

/// Closest point on a triangle to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> Point3<f64> {
    let [a, b, c] = tri;
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Closest points between segments `p1q1` and `p2q2`; returns (squared distance, c1, c2).
pub fn segment_segment(
    p1: &Point3<f64>,
    q1: &Point3<f64>,
    p2: &Point3<f64>,
    q2: &Point3<f64>,
) -> (f64, Point3<f64>, Point3<f64>) {
    const EPS: f64 = 1e-18;
    let d1 = q1 - p1;
    let d2 = q2 - p2;
    let r = p1 - p2;
    let a = d1.norm_squared();
    let e = d2.norm_squared();
    let f = d2.dot(&r);
    let (s, t);
    if a <= EPS && e <= EPS {
        return ((p1 - p2).norm_squared(), *p1, *p2);
    }
    if a <= EPS {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = d1.dot(&r);
        if e <= EPS {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = d1.dot(&d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > EPS {
                ((b * f - c * e) / denom).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = p1 + d1 * s;
    let c2 = p2 + d2 * t;
    ((c1 - c2).norm_squared(), c1, c2)
}

/// Whether segment `pq` crosses triangle `tri`.
fn segment_hits_triangle(p: &Point3<f64>, q: &Point3<f64>, tri: &[Point3<f64>; 3]) -> Option<Point3<f64>> {
    let d = q - p;
    let len = d.norm();
    if len == 0.0 {
        return None;
    }
    let dir = d / len;
    ray_triangle(p, &dir, tri, 0.0)
        .filter(|t| *t <= len)
        .map(|t| p + dir * t)
}

/// Squared distance between two triangles with the realizing point pair.
/// Intersecting triangles report zero.
pub fn triangle_triangle(
    a: &[Point3<f64>; 3],
    b: &[Point3<f64>; 3],
) -> (f64, Point3<f64>, Point3<f64>) {
    for i in 0..3 {
        let (p, q) = (&a[i], &a[(i + 1) % 3]);
        if let Some(x) = segment_hits_triangle(p, q, b) {
            return (0.0, x, x);
        }
        let (p, q) = (&b[i], &b[(i + 1) % 3]);
        if let Some(x) = segment_hits_triangle(p, q, a) {
            return (0.0, x, x);
        }
    }
    let mut best = (f64::INFINITY, a[0], b[0]);
    for i in 0..3 {
        for j in 0..3 {
            let r = segment_segment(&a[i], &a[(i + 1) % 3], &b[j], &b[(j + 1) % 3]);
            if r.0 < best.0 {
                best = r;
            }
        }
    }
    for v in a {
        let c = closest_point_on_triangle(v, b);
        let d = (v - c).norm_squared();
        if d < best.0 {
            best = (d, *v, c);
        }
    }
    for v in b {
        let c = closest_point_on_triangle(v, a);
        let d = (v - c).norm_squared();
        if d < best.0 {
            best = (d, c, *v);
        }
    }
    best
}

/// Twice the triangle area.
pub fn double_area(tri: &[Point3<f64>; 3]) -> f64 {
    (tri[1] - tri[0]).cross(&(tri[2] - tri[0])).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> [Point3<f64>; 3] {
        [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ]
    }

    #[test]
    fn ray_hits_centroid() {
        let t = tri();
        let c = Point3::from((t[0].coords + t[1].coords + t[2].coords) / 3.0);
        let o = c + Vector3::new(0.0, 0.0, 2.0);
        let hit = ray_triangle(&o, &-Vector3::z(), &t, 0.0).unwrap();
        assert!((hit - 2.0).abs() < 1e-15);
    }

    #[test]
    fn parallel_ray_misses() {
        let o = Point3::new(0.2, 0.2, 0.5);
        assert!(ray_triangle(&o, &Vector3::x(), &tri(), 0.0).is_none());
    }

    #[test]
    fn behind_origin_is_rejected() {
        let o = Point3::new(0.2, 0.2, -1.0);
        assert!(ray_triangle(&o, &-Vector3::z(), &tri(), 0.0).is_none());
    }

    #[test]
    fn closest_point_regions() {
        let t = tri();
        let p = Point3::new(0.25, 0.25, 3.0);
        assert_eq!(closest_point_on_triangle(&p, &t), Point3::new(0.25, 0.25, 0.0));
        let p = Point3::new(-1.0, -1.0, 0.0);
        assert_eq!(closest_point_on_triangle(&p, &t), t[0]);
        let p = Point3::new(1.0, 1.0, 0.0);
        let c = closest_point_on_triangle(&p, &t);
        assert!((c - Point3::new(0.5, 0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn segment_distance_skew() {
        let (d2, _, _) = segment_segment(
            &Point3::new(-1.0, 0.0, 0.0),
            &Point3::new(1.0, 0.0, 0.0),
            &Point3::new(0.0, -1.0, 2.0),
            &Point3::new(0.0, 1.0, 2.0),
        );
        assert!((d2 - 4.0).abs() < 1e-15);
    }

    #[test]
    fn crossing_triangles_have_zero_distance() {
        let a = tri();
        let b = [
            Point3::new(0.2, 0.2, -1.0),
            Point3::new(0.2, 0.2, 1.0),
            Point3::new(2.0, 2.0, 0.5),
        ];
        assert_eq!(triangle_triangle(&a, &b).0, 0.0);
    }

    #[test]
    fn stacked_triangles_distance() {
        let a = tri();
        let b = a.map(|p| p + Vector3::new(0.0, 0.0, 0.3));
        let (d2, pa, pb) = triangle_triangle(&a, &b);
        assert!((d2 - 0.09).abs() < 1e-15);
        assert!(((pb - pa).norm() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn box_transform_is_conservative() {
        let b = Aabb::new(Point3::new(-1.0, -0.5, -0.2), Point3::new(1.0, 0.5, 0.2));
        let iso = Isometry3::new(Vector3::new(0.3, -2.0, 1.0), Vector3::new(0.4, -0.7, 1.1));
        let tb = b.transformed(&iso);
        for &x in &[b.min.x, b.max.x] {
            for &y in &[b.min.y, b.max.y] {
                for &z in &[b.min.z, b.max.z] {
                    assert!(tb.contains_point(&(iso * Point3::new(x, y, z)), 1e-12));
                }
            }
        }
    }
}
