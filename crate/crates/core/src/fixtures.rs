//! Procedural fixture meshes used by tests, benchmarks and the demo
//! pipeline: a hemisphere with a deliberately distorted planar-projection
//! uv, a toy sedan with textured body panels, a curved door patch, and a
//! plain distractor box. Generators write the same Wavefront-style text
//! the loader reads, so fixtures double as loader test assets.

use nalgebra::{Point3, Vector3};

use crate::mesh::{Material, Mesh};

/// Matte wrap material used for textured (camouflage) faces.
pub fn wrap_material() -> Material {
    Material {
        albedo: [0.5, 0.5, 0.5],
        specular: 0.05,
        shininess: 8.0,
    }
}

fn paint_material() -> Material {
    Material {
        albedo: [0.16, 0.25, 0.6],
        specular: 0.8,
        shininess: 64.0,
    }
}

fn glass_material() -> Material {
    Material {
        albedo: [0.05, 0.05, 0.08],
        specular: 0.9,
        shininess: 128.0,
    }
}

fn rubber_material() -> Material {
    Material {
        albedo: [0.04, 0.04, 0.04],
        specular: 0.08,
        shininess: 8.0,
    }
}

/// Unit right triangle in the xy-plane with identity uv.
pub fn unit_right_triangle() -> Mesh {
    Mesh::from_parts(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
        ],
        vec![[0, 1, 2]],
        vec![Some([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])],
        vec![wrap_material()],
    )
    .expect("fixture is valid")
}

/// Flat unit quad in the xz-plane with an isometric uv assignment.
pub fn flat_quad() -> Mesh {
    Mesh::from_parts(
        vec![
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(1.0, 0.0, 1.0),
            Point3::new(0.0, 0.0, 1.0),
        ],
        vec![[0, 1, 2], [0, 2, 3]],
        vec![
            Some([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]),
            Some([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0]]),
        ],
        vec![wrap_material(); 2],
    )
    .expect("fixture is valid")
}

const HEMI_SEGMENTS: usize = 32;
const HEMI_RINGS: usize = 8;

/// Hemisphere with 512 textured faces and a top-down planar-projection uv,
/// the classic distorted initialization. Pole at +y, rim on y = 0.
///
/// Topology: a 32-triangle cap fan, six 32-segment quad bands, and a
/// transition band that doubles to 64 segments at the rim
/// (32 + 6*64 + 96 = 512), keeping the patch a manifold disk.
pub fn hemisphere(radius: f64) -> Mesh {
    let seg = HEMI_SEGMENTS;
    let mut vertices = vec![Point3::new(0.0, radius, 0.0)];
    // Rings 1..=7 at 32 segments, rim at 64.
    let ring_start = |ring: usize| -> usize {
        // ring in 1..=7
        1 + (ring - 1) * seg
    };
    for ring in 1..HEMI_RINGS {
        let theta = ring as f64 * std::f64::consts::FRAC_PI_2 / HEMI_RINGS as f64;
        for j in 0..seg {
            let phi = j as f64 * std::f64::consts::TAU / seg as f64;
            vertices.push(Point3::new(
                radius * theta.sin() * phi.cos(),
                radius * theta.cos(),
                radius * theta.sin() * phi.sin(),
            ));
        }
    }
    let rim_start = vertices.len();
    for j in 0..2 * seg {
        let phi = j as f64 * std::f64::consts::TAU / (2 * seg) as f64;
        vertices.push(Point3::new(radius * phi.cos(), 0.0, radius * phi.sin()));
    }

    let mut faces: Vec<[usize; 3]> = Vec::with_capacity(512);
    for j in 0..seg {
        faces.push([0, ring_start(1) + (j + 1) % seg, ring_start(1) + j]);
    }
    for ring in 1..(HEMI_RINGS - 1) {
        let top = ring_start(ring);
        let bot = ring_start(ring + 1);
        for j in 0..seg {
            let j1 = (j + 1) % seg;
            faces.push([top + j, bot + j1, bot + j]);
            faces.push([top + j, top + j1, bot + j1]);
        }
    }
    // Transition band: ring 7 (32 segments) down to the rim (64 segments).
    let top = ring_start(HEMI_RINGS - 1);
    for j in 0..seg {
        let j1 = (j + 1) % seg;
        let b0 = rim_start + 2 * j;
        let b1 = rim_start + (2 * j + 1) % (2 * seg);
        let b2 = rim_start + (2 * j + 2) % (2 * seg);
        faces.push([top + j, b1, b0]);
        faces.push([top + j, top + j1, b1]);
        faces.push([top + j1, b2, b1]);
    }
    orient_outward(&vertices, &mut faces, |_| Point3::new(0.0, 0.0, 0.0));

    let uv = faces
        .iter()
        .map(|f| {
            let mut q = [[0.0; 2]; 3];
            for (k, &vi) in f.iter().enumerate() {
                let p = vertices[vi];
                q[k] = [
                    (p.x / radius) * 0.5 + 0.5,
                    (p.z / radius) * 0.5 + 0.5,
                ];
            }
            Some(q)
        })
        .collect();
    let n = faces.len();
    Mesh::from_parts(vertices, faces, uv, vec![wrap_material(); n]).expect("fixture is valid")
}

/// Car-door-like curved patch: a cylinder section extruded along x with a
/// flat y-projection uv, so the uv map stretches toward the curved edges.
pub fn curved_door(radius: f64, half_angle_deg: f64, nx: usize, nt: usize) -> Mesh {
    let half = half_angle_deg.to_radians();
    let mut vertices = Vec::new();
    let width = 1.2 * radius;
    for i in 0..=nx {
        let x = width * (i as f64 / nx as f64 - 0.5);
        for j in 0..=nt {
            let t = -half + 2.0 * half * j as f64 / nt as f64;
            vertices.push(Point3::new(x, radius * t.sin(), radius * (t.cos() - 1.0)));
        }
    }
    let idx = |i: usize, j: usize| i * (nt + 1) + j;
    let mut faces = Vec::new();
    for i in 0..nx {
        for j in 0..nt {
            faces.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
            faces.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
        }
    }
    orient_outward(&vertices, &mut faces, |c| Point3::new(c.x, 0.0, -radius));
    let y_max = radius * half.sin();
    let uv = faces
        .iter()
        .map(|f| {
            let mut q = [[0.0; 2]; 3];
            for (k, &vi) in f.iter().enumerate() {
                let p = vertices[vi];
                q[k] = [
                    (p.x / width + 0.5).clamp(0.0, 1.0),
                    (p.y / y_max * 0.5 + 0.5).clamp(0.0, 1.0),
                ];
            }
            Some(q)
        })
        .collect();
    let n = faces.len();
    Mesh::from_parts(vertices, faces, uv, vec![wrap_material(); n]).expect("fixture is valid")
}

/// Uv rectangle assignments for the toy car's textured panels.
#[derive(Debug, Clone, Copy)]
struct PanelRect {
    u0: f64,
    v0: f64,
    u1: f64,
    v1: f64,
}

struct MeshBuilder {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[usize; 3]>,
    uv: Vec<Option<[[f64; 2]; 3]>>,
    materials: Vec<Material>,
}

impl MeshBuilder {
    fn new() -> Self {
        MeshBuilder {
            vertices: Vec::new(),
            faces: Vec::new(),
            uv: Vec::new(),
            materials: Vec::new(),
        }
    }

    /// Adds a rectangle as a shared-vertex grid of `subdiv` x `subdiv`
    /// quads, each split into two triangles wound so the normal points
    /// along `outward`. `corners` are in fan order (a, b, c, d). A
    /// textured rectangle maps bilinearly onto its uv rect, so the whole
    /// panel is one connected patch.
    fn rect(
        &mut self,
        corners: [Point3<f64>; 4],
        outward: Vector3<f64>,
        material: Material,
        rect_uv: Option<PanelRect>,
        subdiv: usize,
    ) {
        let n = subdiv.max(1);
        let [a, b, c, d] = corners;
        let at = |s: f64, t: f64| -> Point3<f64> {
            let ab = a + (b - a) * s;
            let dc = d + (c - d) * s;
            ab + (dc - ab) * t
        };
        let base = self.vertices.len();
        for i in 0..=n {
            for j in 0..=n {
                self.vertices.push(at(i as f64 / n as f64, j as f64 / n as f64));
            }
        }
        let vid = |i: usize, j: usize| base + i * (n + 1) + j;
        let uv_of = |i: usize, j: usize, r: &PanelRect| -> [f64; 2] {
            let s = i as f64 / n as f64;
            let t = j as f64 / n as f64;
            [r.u0 + (r.u1 - r.u0) * s, r.v0 + (r.v1 - r.v0) * t]
        };
        for i in 0..n {
            for j in 0..n {
                let quad = [vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)];
                let p: Vec<Point3<f64>> = quad.iter().map(|&v| self.vertices[v]).collect();
                let flipped = (p[1] - p[0]).cross(&(p[2] - p[0])).dot(&outward) < 0.0;
                let order0: [usize; 3] = if flipped { [0, 2, 1] } else { [0, 1, 2] };
                let order1: [usize; 3] = if flipped { [0, 3, 2] } else { [0, 2, 3] };
                self.faces.push([quad[order0[0]], quad[order0[1]], quad[order0[2]]]);
                self.faces.push([quad[order1[0]], quad[order1[1]], quad[order1[2]]]);
                match rect_uv {
                    Some(r) => {
                        let q = [
                            uv_of(i, j, &r),
                            uv_of(i + 1, j, &r),
                            uv_of(i + 1, j + 1, &r),
                            uv_of(i, j + 1, &r),
                        ];
                        self.uv.push(Some([q[order0[0]], q[order0[1]], q[order0[2]]]));
                        self.uv.push(Some([q[order1[0]], q[order1[1]], q[order1[2]]]));
                    }
                    None => {
                        self.uv.push(None);
                        self.uv.push(None);
                    }
                }
                self.materials.push(material);
                self.materials.push(material);
            }
        }
    }

    /// Adds all six sides of an axis-aligned box, untextured.
    fn box_untextured(&mut self, lo: Point3<f64>, hi: Point3<f64>, material: Material) {
        let p = |x: f64, y: f64, z: f64| Point3::new(x, y, z);
        let sides: [([Point3<f64>; 4], Vector3<f64>); 6] = [
            // -x / +x
            (
                [p(lo.x, lo.y, lo.z), p(lo.x, lo.y, hi.z), p(lo.x, hi.y, hi.z), p(lo.x, hi.y, lo.z)],
                Vector3::new(-1.0, 0.0, 0.0),
            ),
            (
                [p(hi.x, lo.y, lo.z), p(hi.x, lo.y, hi.z), p(hi.x, hi.y, hi.z), p(hi.x, hi.y, lo.z)],
                Vector3::new(1.0, 0.0, 0.0),
            ),
            // -y / +y
            (
                [p(lo.x, lo.y, lo.z), p(hi.x, lo.y, lo.z), p(hi.x, lo.y, hi.z), p(lo.x, lo.y, hi.z)],
                Vector3::new(0.0, -1.0, 0.0),
            ),
            (
                [p(lo.x, hi.y, lo.z), p(hi.x, hi.y, lo.z), p(hi.x, hi.y, hi.z), p(lo.x, hi.y, hi.z)],
                Vector3::new(0.0, 1.0, 0.0),
            ),
            // -z / +z
            (
                [p(lo.x, lo.y, lo.z), p(hi.x, lo.y, lo.z), p(hi.x, hi.y, lo.z), p(lo.x, hi.y, lo.z)],
                Vector3::new(0.0, 0.0, -1.0),
            ),
            (
                [p(lo.x, lo.y, hi.z), p(hi.x, lo.y, hi.z), p(hi.x, hi.y, hi.z), p(lo.x, hi.y, hi.z)],
                Vector3::new(0.0, 0.0, 1.0),
            ),
        ];
        for (corners, outward) in sides {
            self.rect(corners, outward, material, None, 1);
        }
    }

    fn build(self) -> Mesh {
        Mesh::from_parts(self.vertices, self.faces, self.uv, self.materials).expect("fixture is valid")
    }
}

/// Toy sedan, about 4.2 x 1.7 x 1.4 scene units, resting on y = 0.
///
/// Textured (camouflage) panels with disjoint uv rectangles: body top deck,
/// both body sides, and the cabin roof. Windows, bumpers, underside and
/// wheels are untextured with glossy or rubber materials, so dark-light
/// mask renders see both populations.
pub fn toy_car() -> Mesh {
    let mut b = MeshBuilder::new();
    let p = Point3::new;
    let wrap = wrap_material();

    // Body shell.
    let (x0, x1) = (-2.1, 2.1);
    let (y0, y1) = (0.25, 0.85);
    let (z0, z1) = (-0.85, 0.85);
    // Top deck.
    b.rect(
        [p(x0, y1, z0), p(x1, y1, z0), p(x1, y1, z1), p(x0, y1, z1)],
        Vector3::new(0.0, 1.0, 0.0),
        wrap,
        Some(PanelRect { u0: 0.02, v0: 0.60, u1: 0.98, v1: 0.98 }),
        3,
    );
    // Left / right sides.
    b.rect(
        [p(x0, y0, z0), p(x1, y0, z0), p(x1, y1, z0), p(x0, y1, z0)],
        Vector3::new(0.0, 0.0, -1.0),
        wrap,
        Some(PanelRect { u0: 0.02, v0: 0.18, u1: 0.98, v1: 0.30 }),
        3,
    );
    b.rect(
        [p(x0, y0, z1), p(x1, y0, z1), p(x1, y1, z1), p(x0, y1, z1)],
        Vector3::new(0.0, 0.0, 1.0),
        wrap,
        Some(PanelRect { u0: 0.02, v0: 0.02, u1: 0.98, v1: 0.14 }),
        3,
    );
    // Bumpers (front +x, rear -x) and underside: painted, untextured.
    b.rect(
        [p(x1, y0, z0), p(x1, y0, z1), p(x1, y1, z1), p(x1, y1, z0)],
        Vector3::new(1.0, 0.0, 0.0),
        paint_material(),
        None,
        1,
    );
    b.rect(
        [p(x0, y0, z0), p(x0, y0, z1), p(x0, y1, z1), p(x0, y1, z0)],
        Vector3::new(-1.0, 0.0, 0.0),
        paint_material(),
        None,
        1,
    );
    b.rect(
        [p(x0, y0, z0), p(x1, y0, z0), p(x1, y0, z1), p(x0, y0, z1)],
        Vector3::new(0.0, -1.0, 0.0),
        paint_material(),
        None,
        1,
    );

    // Cabin with glass sides and a textured roof.
    let (cx0, cx1) = (-1.2, 0.7);
    let (cy0, cy1) = (y1, 1.4);
    let (cz0, cz1) = (-0.68, 0.68);
    b.rect(
        [p(cx0, cy1, cz0), p(cx1, cy1, cz0), p(cx1, cy1, cz1), p(cx0, cy1, cz1)],
        Vector3::new(0.0, 1.0, 0.0),
        wrap,
        Some(PanelRect { u0: 0.30, v0: 0.36, u1: 0.70, v1: 0.56 }),
        2,
    );
    for (corners, outward) in [
        (
            [p(cx0, cy0, cz0), p(cx1, cy0, cz0), p(cx1, cy1, cz0), p(cx0, cy1, cz0)],
            Vector3::new(0.0, 0.0, -1.0),
        ),
        (
            [p(cx0, cy0, cz1), p(cx1, cy0, cz1), p(cx1, cy1, cz1), p(cx0, cy1, cz1)],
            Vector3::new(0.0, 0.0, 1.0),
        ),
        (
            [p(cx1, cy0, cz0), p(cx1, cy0, cz1), p(cx1, cy1, cz1), p(cx1, cy1, cz0)],
            Vector3::new(1.0, 0.0, 0.0),
        ),
        (
            [p(cx0, cy0, cz0), p(cx0, cy0, cz1), p(cx0, cy1, cz1), p(cx0, cy1, cz0)],
            Vector3::new(-1.0, 0.0, 0.0),
        ),
    ] {
        b.rect(corners, outward, glass_material(), None, 1);
    }

    // Wheels.
    for (wx, wz) in [(-1.4, -0.8), (-1.4, 0.8), (1.4, -0.8), (1.4, 0.8)] {
        b.box_untextured(
            p(wx - 0.3, 0.0, wz - 0.12),
            p(wx + 0.3, 0.5, wz + 0.12),
            rubber_material(),
        );
    }
    b.build()
}

/// Unit-footprint box resting on y = 0, untextured; scenes scale and
/// place copies of it as detection distractors.
pub fn distractor_box(albedo: [f64; 3]) -> Mesh {
    let mut b = MeshBuilder::new();
    b.box_untextured(
        Point3::new(-0.5, 0.0, -0.5),
        Point3::new(0.5, 1.0, 0.5),
        Material {
            albedo,
            specular: 0.2,
            shininess: 16.0,
        },
    );
    b.build()
}

/// Flips face windings so normals point away from a per-face reference.
fn orient_outward<F>(vertices: &[Point3<f64>], faces: &mut [[usize; 3]], reference: F)
where
    F: Fn(Point3<f64>) -> Point3<f64>,
{
    for face in faces.iter_mut() {
        let a = vertices[face[0]];
        let b = vertices[face[1]];
        let c = vertices[face[2]];
        let centroid = Point3::from((a.coords + b.coords + c.coords) / 3.0);
        let normal = (b - a).cross(&(c - a));
        let outward = centroid - reference(centroid);
        if normal.dot(&outward) < 0.0 {
            face.swap(1, 2);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uv::{distortion_energy, validate_patch_overlap};

    #[test]
    fn hemisphere_has_512_textured_faces() {
        let mesh = hemisphere(0.3);
        assert_eq!(mesh.face_count(), 512);
        assert_eq!(mesh.textured_face_count(), 512);
        mesh.validate().unwrap();
    }

    #[test]
    fn hemisphere_is_a_single_disk_patch() {
        let mesh = hemisphere(0.3);
        let patches = mesh.textured_patches();
        assert_eq!(patches.len(), 1);
        assert_eq!(patches[0].len(), 512);
    }

    #[test]
    fn hemisphere_normals_point_outward() {
        let mesh = hemisphere(1.0);
        for f in 0..mesh.face_count() {
            let [a, b, c] = mesh.face_vertices(f);
            let centroid = (a.coords + b.coords + c.coords) / 3.0;
            assert!(
                mesh.face_normal(f).dot(&centroid) > 0.0,
                "face {f} normal points inward"
            );
        }
    }

    #[test]
    fn hemisphere_planar_projection_is_distorted() {
        let report = distortion_energy(&hemisphere(0.3)).unwrap();
        assert!(report.energy > 0.0);
        assert!(report.stretched_count > 0);
    }

    #[test]
    fn toy_car_patches_do_not_overlap_in_uv() {
        let car = toy_car();
        car.validate().unwrap();
        assert!(car.textured_face_count() > 0);
        assert!(car.textured_face_count() < car.face_count());
        validate_patch_overlap(&car, 64, 64).unwrap();
    }

    #[test]
    fn curved_door_stretches_in_uv() {
        let door = curved_door(1.0, 60.0, 8, 8);
        let report = distortion_energy(&door).unwrap();
        assert!(report.stretched_count > 0);
    }

    #[test]
    fn fixtures_roundtrip_through_obj_text() {
        for mesh in [unit_right_triangle(), flat_quad(), toy_car()] {
            let back = Mesh::parse_obj(&mesh.to_obj_string()).unwrap();
            assert_eq!(mesh, back);
        }
    }
}
