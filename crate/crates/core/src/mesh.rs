//! Triangle mesh with per-face-corner uv and textured/non-textured flags.
//!
//! The mesh file format is Wavefront-style text: `v x y z` positions,
//! `vt u v` texture coordinates, `f` triangles referencing them as
//! `v`, `v/vt`, `v//vn` or `v/vt/vn` (normal indices are ignored; normals
//! are derived from geometry). Faces whose corners all carry a `vt` are
//! textured; the rest fall back to the current material albedo. One
//! extension record is accepted: `m r g b ks shininess` sets the material
//! for subsequent faces. Unknown keywords are skipped.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{Point3, Unit, Vector3};

use crate::error::{Error, Result};

/// Minimum 3D triangle area; anything smaller is rejected as degenerate.
pub const MIN_FACE_AREA: f64 = 1e-12;

/// Per-face shading parameters. `albedo` is the diffuse fallback used by
/// non-textured faces; textured faces sample the texture map instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Material {
    pub albedo: [f64; 3],
    pub specular: f64,
    pub shininess: f64,
}

impl Default for Material {
    fn default() -> Self {
        Material {
            albedo: [0.6, 0.6, 0.6],
            specular: 0.3,
            shininess: 32.0,
        }
    }
}

/// Immutable triangle mesh. All operations that change uv return a new mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    uv: Vec<Option<[[f64; 2]; 3]>>,
    textured: Vec<bool>,
    materials: Vec<Material>,
}

impl Mesh {
    pub fn from_parts(
        vertices: Vec<Point3<f64>>,
        faces: Vec<[usize; 3]>,
        uv: Vec<Option<[[f64; 2]; 3]>>,
        materials: Vec<Material>,
    ) -> Result<Self> {
        if uv.len() != faces.len() || materials.len() != faces.len() {
            return Err(Error::InvalidMesh(format!(
                "per-face arrays disagree: {} faces, {} uv entries, {} materials",
                faces.len(),
                uv.len(),
                materials.len()
            )));
        }
        let textured = uv.iter().map(|u| u.is_some()).collect();
        let mesh = Mesh {
            vertices,
            faces,
            uv,
            textured,
            materials,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn validate(&self) -> Result<()> {
        for (fi, face) in self.faces.iter().enumerate() {
            for &vi in face {
                if vi >= self.vertices.len() {
                    return Err(Error::InvalidMesh(format!(
                        "face {} references vertex {} but only {} vertices exist",
                        fi,
                        vi,
                        self.vertices.len()
                    )));
                }
            }
            let area = self.face_area_3d(fi);
            if !(area > MIN_FACE_AREA) {
                return Err(Error::DegenerateFace { face: fi, area });
            }
            if let Some(uvs) = &self.uv[fi] {
                for c in uvs {
                    if !(0.0..=1.0).contains(&c[0]) || !(0.0..=1.0).contains(&c[1]) {
                        return Err(Error::InvalidMesh(format!(
                            "face {} uv ({}, {}) outside [0,1]",
                            fi, c[0], c[1]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[usize; 3]] {
        &self.faces
    }

    pub fn face_vertices(&self, face: usize) -> [Point3<f64>; 3] {
        let [a, b, c] = self.faces[face];
        [self.vertices[a], self.vertices[b], self.vertices[c]]
    }

    pub fn uv(&self, face: usize) -> Option<&[[f64; 2]; 3]> {
        self.uv[face].as_ref()
    }

    pub fn is_textured(&self, face: usize) -> bool {
        self.textured[face]
    }

    pub fn textured_face_count(&self) -> usize {
        self.textured.iter().filter(|&&t| t).count()
    }

    pub fn material(&self, face: usize) -> &Material {
        &self.materials[face]
    }

    pub fn face_area_3d(&self, face: usize) -> f64 {
        let [a, b, c] = self.face_vertices(face);
        0.5 * (b - a).cross(&(c - a)).norm()
    }

    /// Unit face normal. Faces are wound counter-clockwise seen from outside.
    pub fn face_normal(&self, face: usize) -> Unit<Vector3<f64>> {
        let [a, b, c] = self.face_vertices(face);
        Unit::new_normalize((b - a).cross(&(c - a)))
    }

    /// Axis-aligned bounds of all vertices.
    pub fn bounds(&self) -> (Point3<f64>, Point3<f64>) {
        let mut lo = Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let mut hi = Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for v in &self.vertices {
            for i in 0..3 {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// New mesh with some faces' uv replaced. Keys outside the face range
    /// are rejected; values must stay in [0,1].
    pub fn with_face_uv(&self, updates: &BTreeMap<usize, [[f64; 2]; 3]>) -> Result<Mesh> {
        let mut uv = self.uv.clone();
        for (&fi, new_uv) in updates {
            if fi >= self.faces.len() {
                return Err(Error::InvalidMesh(format!("uv update for face {fi} out of range")));
            }
            uv[fi] = Some(*new_uv);
        }
        Mesh::from_parts(self.vertices.clone(), self.faces.clone(), uv, self.materials.clone())
    }

    /// Uniform scale, rotation about y, then translation. Used to place
    /// fixture meshes (e.g. distractors) in a scene.
    pub fn transformed(&self, scale: f64, rot_y_deg: f64, translation: Vector3<f64>) -> Mesh {
        let (s, c) = (rot_y_deg.to_radians().sin(), rot_y_deg.to_radians().cos());
        let vertices = self
            .vertices
            .iter()
            .map(|p| {
                let v = p.coords * scale;
                let rotated = Vector3::new(c * v.x + s * v.z, v.y, -s * v.x + c * v.z);
                Point3::from(rotated + translation)
            })
            .collect();
        Mesh {
            vertices,
            faces: self.faces.clone(),
            uv: self.uv.clone(),
            textured: self.textured.clone(),
            materials: self.materials.clone(),
        }
    }

    /// Edge map keyed by sorted vertex pair, values are incident face indices
    /// in ascending order.
    pub fn edge_faces(&self) -> BTreeMap<(usize, usize), Vec<usize>> {
        let mut edges: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for (fi, face) in self.faces.iter().enumerate() {
            for k in 0..3 {
                let a = face[k];
                let b = face[(k + 1) % 3];
                let key = (a.min(b), a.max(b));
                edges.entry(key).or_default().push(fi);
            }
        }
        edges
    }

    /// Connected components of textured faces under shared-edge adjacency,
    /// each sorted ascending; components ordered by smallest face index.
    pub fn textured_patches(&self) -> Vec<Vec<usize>> {
        let edges = self.edge_faces();
        let mut neighbors: Vec<Vec<usize>> = vec![Vec::new(); self.faces.len()];
        for faces in edges.values() {
            for i in 0..faces.len() {
                for j in (i + 1)..faces.len() {
                    let (a, b) = (faces[i], faces[j]);
                    if self.textured[a] && self.textured[b] {
                        neighbors[a].push(b);
                        neighbors[b].push(a);
                    }
                }
            }
        }
        let mut visited = vec![false; self.faces.len()];
        let mut patches = Vec::new();
        for start in 0..self.faces.len() {
            if !self.textured[start] || visited[start] {
                continue;
            }
            let mut stack = vec![start];
            let mut patch = Vec::new();
            visited[start] = true;
            while let Some(f) = stack.pop() {
                patch.push(f);
                for &n in &neighbors[f] {
                    if !visited[n] {
                        visited[n] = true;
                        stack.push(n);
                    }
                }
            }
            patch.sort_unstable();
            patches.push(patch);
        }
        patches
    }

    /// Concatenates meshes into one, preserving face order. The first
    /// mesh's faces keep their indices; later meshes' faces follow, so a
    /// face id below `meshes[0].face_count()` belongs to the first mesh.
    pub fn merged(meshes: &[&Mesh]) -> Result<Mesh> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        let mut uv = Vec::new();
        let mut materials = Vec::new();
        for mesh in meshes {
            let base = vertices.len();
            vertices.extend_from_slice(&mesh.vertices);
            faces.extend(mesh.faces.iter().map(|f| [f[0] + base, f[1] + base, f[2] + base]));
            uv.extend_from_slice(&mesh.uv);
            materials.extend_from_slice(&mesh.materials);
        }
        Mesh::from_parts(vertices, faces, uv, materials)
    }

    pub fn load_obj(path: impl AsRef<Path>) -> Result<Mesh> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        Mesh::parse_obj(&text)
    }

    pub fn parse_obj(text: &str) -> Result<Mesh> {
        let mut vertices: Vec<Point3<f64>> = Vec::new();
        let mut vts: Vec<[f64; 2]> = Vec::new();
        let mut faces: Vec<[usize; 3]> = Vec::new();
        let mut uv: Vec<Option<[[f64; 2]; 3]>> = Vec::new();
        let mut materials: Vec<Material> = Vec::new();
        let mut current_material = Material::default();

        for (ln, raw) in text.lines().enumerate() {
            let line_no = ln + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let keyword = parts.next().unwrap();
            let parse_f64 = |s: &str, what: &str| -> Result<f64> {
                s.parse::<f64>().map_err(|_| Error::MeshParse {
                    line: line_no,
                    msg: format!("bad {what} value `{s}`"),
                })
            };
            match keyword {
                "v" => {
                    let mut c = [0.0; 3];
                    for slot in &mut c {
                        let tok = parts.next().ok_or(Error::MeshParse {
                            line: line_no,
                            msg: "vertex needs 3 coordinates".into(),
                        })?;
                        *slot = parse_f64(tok, "vertex coordinate")?;
                    }
                    vertices.push(Point3::new(c[0], c[1], c[2]));
                }
                "vt" => {
                    let mut c = [0.0; 2];
                    for slot in &mut c {
                        let tok = parts.next().ok_or(Error::MeshParse {
                            line: line_no,
                            msg: "vt needs 2 coordinates".into(),
                        })?;
                        *slot = parse_f64(tok, "uv coordinate")?;
                    }
                    vts.push(c);
                }
                "f" => {
                    let corners: Vec<&str> = parts.collect();
                    if corners.len() != 3 {
                        return Err(Error::MeshParse {
                            line: line_no,
                            msg: format!("only triangles are supported, face has {} corners", corners.len()),
                        });
                    }
                    let mut vi = [0usize; 3];
                    let mut ti = [None::<usize>; 3];
                    for (k, corner) in corners.iter().enumerate() {
                        let mut fields = corner.split('/');
                        let v_tok = fields.next().unwrap_or("");
                        let v: usize = v_tok.parse().map_err(|_| Error::MeshParse {
                            line: line_no,
                            msg: format!("bad vertex index `{v_tok}`"),
                        })?;
                        if v == 0 || v > vertices.len() {
                            return Err(Error::MeshParse {
                                line: line_no,
                                msg: format!("vertex index {v} out of range (have {})", vertices.len()),
                            });
                        }
                        vi[k] = v - 1;
                        if let Some(t_tok) = fields.next() {
                            if !t_tok.is_empty() {
                                let t: usize = t_tok.parse().map_err(|_| Error::MeshParse {
                                    line: line_no,
                                    msg: format!("bad uv index `{t_tok}`"),
                                })?;
                                if t == 0 || t > vts.len() {
                                    return Err(Error::MeshParse {
                                        line: line_no,
                                        msg: format!("uv index {t} out of range (have {})", vts.len()),
                                    });
                                }
                                ti[k] = Some(t - 1);
                            }
                        }
                    }
                    let face_uv = if ti.iter().all(|t| t.is_some()) {
                        Some([vts[ti[0].unwrap()], vts[ti[1].unwrap()], vts[ti[2].unwrap()]])
                    } else {
                        None
                    };
                    faces.push(vi);
                    uv.push(face_uv);
                    materials.push(current_material);
                }
                "m" => {
                    let mut c = [0.0; 5];
                    for slot in &mut c {
                        let tok = parts.next().ok_or(Error::MeshParse {
                            line: line_no,
                            msg: "material record needs `r g b ks shininess`".into(),
                        })?;
                        *slot = parse_f64(tok, "material parameter")?;
                    }
                    current_material = Material {
                        albedo: [c[0], c[1], c[2]],
                        specular: c[3],
                        shininess: c[4],
                    };
                }
                // vn / o / g / s / usemtl / mtllib carry no information we use
                _ => {}
            }
        }
        Mesh::from_parts(vertices, faces, uv, materials)
    }

    /// Serializes to the same text format `parse_obj` reads. Floats are
    /// written with shortest round-trip formatting so save/load is exact.
    pub fn to_obj_string(&self) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        for v in &self.vertices {
            writeln!(out, "v {} {} {}", v.x, v.y, v.z).unwrap();
        }
        // Emit per-corner vt records in face order; simple and exact.
        let mut vt_index = Vec::with_capacity(self.faces.len());
        let mut next_vt = 1usize;
        for fu in &self.uv {
            if let Some(uvs) = fu {
                for c in uvs {
                    writeln!(out, "vt {} {}", c[0], c[1]).unwrap();
                }
                vt_index.push(Some(next_vt));
                next_vt += 3;
            } else {
                vt_index.push(None);
            }
        }
        let mut last_material: Option<Material> = None;
        for (fi, face) in self.faces.iter().enumerate() {
            let mat = self.materials[fi];
            if last_material != Some(mat) {
                writeln!(
                    out,
                    "m {} {} {} {} {}",
                    mat.albedo[0], mat.albedo[1], mat.albedo[2], mat.specular, mat.shininess
                )
                .unwrap();
                last_material = Some(mat);
            }
            match vt_index[fi] {
                Some(base) => writeln!(
                    out,
                    "f {}/{} {}/{} {}/{}",
                    face[0] + 1,
                    base,
                    face[1] + 1,
                    base + 1,
                    face[2] + 1,
                    base + 2
                )
                .unwrap(),
                None => writeln!(out, "f {} {} {}", face[0] + 1, face[1] + 1, face[2] + 1).unwrap(),
            }
        }
        out
    }

    pub fn save_obj(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_obj_string()).map_err(|e| Error::io(path.display().to_string(), e))
    }
}

/// Loads a mesh from a Wavefront-style file; the operation form of
/// [`Mesh::load_obj`].
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh> {
    Mesh::load_obj(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRI: &str = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 1 0\nvt 0 1\nf 1/1 2/2 3/3\n";

    #[test]
    fn parses_single_textured_triangle() {
        let mesh = Mesh::parse_obj(TRI).unwrap();
        assert_eq!(mesh.face_count(), 1);
        assert!(mesh.is_textured(0));
        assert_eq!(mesh.uv(0).unwrap()[1], [1.0, 0.0]);
    }

    #[test]
    fn face_without_vt_is_untextured() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n";
        let mesh = Mesh::parse_obj(text).unwrap();
        assert!(!mesh.is_textured(0));
        assert!(mesh.uv(0).is_none());
    }

    #[test]
    fn parse_error_carries_line_number() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 oops\n";
        match Mesh::parse_obj(text) {
            Err(Error::MeshParse { line, .. }) => assert_eq!(line, 4),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn zero_area_face_is_rejected_naming_the_face() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 2 0 0\nf 1 2 3\nf 1 2 4\n";
        match Mesh::parse_obj(text) {
            Err(Error::DegenerateFace { face, .. }) => assert_eq!(face, 1),
            other => panic!("expected degenerate-face error, got {other:?}"),
        }
    }

    #[test]
    fn out_of_range_uv_is_rejected() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nvt 0 0\nvt 2 0\nvt 0 1\nf 1/1 2/2 3/3\n";
        assert!(Mesh::parse_obj(text).is_err());
    }

    #[test]
    fn obj_round_trip_is_exact() {
        let text = format!("{TRI}m 0.25 0.5 0.75 0.1 16\nv 0 0 1\nf 1 2 4\n");
        let mesh = Mesh::parse_obj(&text).unwrap();
        let back = Mesh::parse_obj(&mesh.to_obj_string()).unwrap();
        assert_eq!(mesh, back);
    }

    #[test]
    fn material_record_applies_to_following_faces() {
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nm 1 0 0 0.5 8\nf 1 2 3\n";
        let mesh = Mesh::parse_obj(text).unwrap();
        assert_eq!(mesh.material(0).albedo, [1.0, 0.0, 0.0]);
        assert_eq!(mesh.material(0).shininess, 8.0);
    }

    #[test]
    fn textured_patches_split_by_connectivity() {
        // Two textured triangles sharing an edge plus one isolated textured one.
        let text = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nv 3 0 0\nv 4 0 0\nv 3 1 0\n\
                    vt 0 0\nvt 1 0\nvt 0 1\nvt 1 1\nvt 0.5 0.5\n\
                    f 1/1 2/2 3/3\nf 2/2 4/4 3/3\nf 5/1 6/2 7/5\n";
        let mesh = Mesh::parse_obj(text).unwrap();
        let patches = mesh.textured_patches();
        assert_eq!(patches, vec![vec![0, 1], vec![2]]);
    }
}
