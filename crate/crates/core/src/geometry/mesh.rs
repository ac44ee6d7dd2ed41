//! Triangle meshes and the minimal `v`/`f` text format.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Isometry3, Point3};

use super::primitives::{double_area, Aabb};
use crate::error::{Error, Result};

/// Faces whose doubled area falls below this are dropped at load.
const DEGENERATE_AREA: f64 = 1e-14;

/// Indexed triangle mesh in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[u32; 3]>,
}

impl TriangleMesh {
    /// Validates indices and coordinates and drops zero-area faces.
    pub fn new(vertices: Vec<Point3<f64>>, faces: Vec<[u32; 3]>) -> Result<Self> {
        if let Some(i) = vertices.iter().position(|v| !v.coords.iter().all(|c| c.is_finite())) {
            return Err(Error::InvalidMesh(format!("vertex {i} is not finite")));
        }
        let n = vertices.len();
        let mut kept = Vec::with_capacity(faces.len());
        for (fi, f) in faces.into_iter().enumerate() {
            if let Some(&bad) = f.iter().find(|&&i| i as usize >= n) {
                return Err(Error::InvalidMesh(format!(
                    "face {fi} references vertex {bad}, mesh has {n}"
                )));
            }
            let tri = f.map(|i| vertices[i as usize]);
            if double_area(&tri) <= DEGENERATE_AREA {
                log::warn!("dropping degenerate face {fi} {f:?}");
                continue;
            }
            kept.push(f);
        }
        Ok(Self {
            vertices,
            faces: kept,
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn num_triangles(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn triangle(&self, i: usize) -> [Point3<f64>; 3] {
        self.faces[i].map(|v| self.vertices[v as usize])
    }

    pub fn triangles(&self) -> impl Iterator<Item = [Point3<f64>; 3]> + '_ {
        (0..self.faces.len()).map(|i| self.triangle(i))
    }

    pub fn bounds(&self) -> Aabb {
        Aabb::from_points(self.vertices.iter())
    }

    pub fn transformed(&self, iso: &Isometry3<f64>) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|v| iso * v).collect(),
            faces: self.faces.clone(),
        }
    }

    /// Concatenates meshes, re-indexing faces.
    pub fn merged<'a>(meshes: impl IntoIterator<Item = &'a TriangleMesh>) -> TriangleMesh {
        let mut out = TriangleMesh {
            vertices: Vec::new(),
            faces: Vec::new(),
        };
        for m in meshes {
            let base = out.vertices.len() as u32;
            out.vertices.extend_from_slice(&m.vertices);
            out.faces
                .extend(m.faces.iter().map(|f| f.map(|i| i + base)));
        }
        out
    }

    /// Parses `v x y z` / `f i j k` lines (1-based indices). Blank lines are
    /// skipped; any other content is an error.
    pub fn parse_obj(text: &str, origin: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: origin.to_path_buf(),
            line,
            msg,
        };
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        let mut face_lines = Vec::new();
        for (ln, raw) in text.lines().enumerate() {
            let line = ln + 1;
            let mut tok = raw.split_whitespace();
            let Some(kind) = tok.next() else { continue };
            let rest: Vec<&str> = tok.collect();
            if rest.len() != 3 {
                return Err(err(line, format!("expected 3 values after '{kind}', got {}", rest.len())));
            }
            match kind {
                "v" => {
                    let mut c = [0.0; 3];
                    for (k, s) in rest.iter().enumerate() {
                        c[k] = s
                            .parse::<f64>()
                            .map_err(|e| err(line, format!("bad coordinate '{s}': {e}")))?;
                        if !c[k].is_finite() {
                            return Err(err(line, format!("non-finite coordinate '{s}'")));
                        }
                    }
                    vertices.push(Point3::new(c[0], c[1], c[2]));
                }
                "f" => {
                    let mut f = [0u32; 3];
                    for (k, s) in rest.iter().enumerate() {
                        let i = s
                            .parse::<u32>()
                            .map_err(|e| err(line, format!("bad index '{s}': {e}")))?;
                        if i == 0 {
                            return Err(err(line, "face indices are 1-based".into()));
                        }
                        f[k] = i - 1;
                    }
                    faces.push(f);
                    face_lines.push(line);
                }
                other => return Err(err(line, format!("unsupported record '{other}'"))),
            }
        }
        for (f, &line) in faces.iter().zip(&face_lines) {
            if let Some(&bad) = f.iter().find(|&&i| i as usize >= vertices.len()) {
                return Err(err(line, format!("index {} out of range ({} vertices)", bad + 1, vertices.len())));
            }
        }
        TriangleMesh::new(vertices, faces)
    }

    pub fn load_obj(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_obj(&text, path)
    }

    /// Writes the mesh in the same format `parse_obj` reads. Coordinates use
    /// shortest round-trip formatting.
    pub fn to_obj_string(&self) -> String {
        let mut s = String::new();
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
        }
        for f in &self.faces {
            let _ = writeln!(s, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const QUAD: &str = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\n\nf 1 2 3\nf 1 3 4\n";

    #[test]
    fn parses_minimal_obj() {
        let m = TriangleMesh::parse_obj(QUAD, Path::new("quad.obj")).unwrap();
        assert_eq!(m.vertices().len(), 4);
        assert_eq!(m.faces(), &[[0, 1, 2], [0, 2, 3]]);
    }

    #[test]
    fn rejects_unknown_records_with_line() {
        let text = "v 0 0 0\nvn 0 0 1\n";
        match TriangleMesh::parse_obj(text, Path::new("x.obj")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_out_of_range_face() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 4\n";
        assert!(matches!(
            TriangleMesh::parse_obj(text, Path::new("x.obj")),
            Err(Error::Parse { line: 4, .. })
        ));
    }

    #[test]
    fn rejects_trailing_tokens() {
        let text = "v 0 0 0 1\n";
        assert!(TriangleMesh::parse_obj(text, Path::new("x.obj")).is_err());
    }

    #[test]
    fn drops_degenerate_faces() {
        let v = vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(2.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ];
        let m = TriangleMesh::new(v, vec![[0, 1, 2], [0, 1, 3]]).unwrap();
        assert_eq!(m.num_triangles(), 1);
    }

    #[test]
    fn obj_text_round_trips() {
        let m = TriangleMesh::parse_obj(QUAD, Path::new("quad.obj")).unwrap();
        let back = TriangleMesh::parse_obj(&m.to_obj_string(), Path::new("q2.obj")).unwrap();
        assert_eq!(m, back);
    }
}
