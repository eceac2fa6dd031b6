//! U-V mapping quality: singular-value distortion measurement, distortion
//! energy, automated relaxation of a textured patch, and texel-mask baking.
//!
//! The distortion of a face is measured by the singular values (sigma1,
//! sigma2) of the linear map taking its uv triangle to its 3D triangle.
//! An isometric (distortion-free) mapping has sigma1 = sigma2 = 1.
//! The scalar energy is `sum over textured faces of
//! area3d * ((sigma1-1)^2 + (sigma2-1)^2)`, zero exactly on isometries.
//!
//! `relax_uv` replaces manual uv adjustment: it unfolds the patch face by
//! face from a seed (hinge flattening over a breadth-first traversal),
//! then runs local vertex moves with step halving so the energy never
//! increases, and finally rescales the patch into its atlas rectangle.

use std::collections::BTreeMap;

use nalgebra::{Point3, Vector2};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::mesh::Mesh;
use crate::texture::TexelMask;

/// Tolerance used for the stretched/compressed face counts.
pub const DISTORTION_COUNT_TOL: f64 = 0.05;

const MIN_UV_AREA: f64 = 1e-12;

/// Singular values of the uv -> 3D map for a raw triangle pair.
/// `q` are 2D uv corners, `p` the matching 3D corners.
pub fn singular_values_of_tri(q: &[[f64; 2]; 3], p: &[Point3<f64>; 3]) -> Result<(f64, f64)> {
    let e1 = Vector2::new(q[1][0] - q[0][0], q[1][1] - q[0][1]);
    let e2 = Vector2::new(q[2][0] - q[0][0], q[2][1] - q[0][1]);
    let det = e1.x * e2.y - e1.y * e2.x;
    if det.abs() * 0.5 < MIN_UV_AREA {
        return Err(Error::DegenerateUv {
            face: usize::MAX,
            area: det.abs() * 0.5,
        });
    }
    let big_e1 = p[1] - p[0];
    let big_e2 = p[2] - p[0];
    // Metric of L = E * B^-1 where B = [e1 e2], E = [E1 E2]:
    // M = B^-T (E^T E) B^-1, a symmetric 2x2 whose eigenvalues are sigma^2.
    let g11 = big_e1.dot(&big_e1);
    let g12 = big_e1.dot(&big_e2);
    let g22 = big_e2.dot(&big_e2);
    let inv = 1.0 / det;
    // B^-1 rows: [ e2.y, -e2.x ; -e1.y, e1.x ] * inv
    let b11 = e2.y * inv;
    let b12 = -e2.x * inv;
    let b21 = -e1.y * inv;
    let b22 = e1.x * inv;
    // M = B^-T G B^-1 with G = [[g11,g12],[g12,g22]]
    let m11 = b11 * (g11 * b11 + g12 * b21) + b21 * (g12 * b11 + g22 * b21);
    let m12 = b11 * (g11 * b12 + g12 * b22) + b21 * (g12 * b12 + g22 * b22);
    let m22 = b12 * (g11 * b12 + g12 * b22) + b22 * (g12 * b12 + g22 * b22);
    let tr = m11 + m22;
    let half_gap = 0.5 * (m11 - m22);
    let disc = (half_gap * half_gap + m12 * m12).sqrt();
    let l1 = (0.5 * tr + disc).max(0.0);
    let l2 = (0.5 * tr - disc).max(0.0);
    Ok((l1.sqrt(), l2.sqrt()))
}

/// Singular values (sigma1 >= sigma2) of one mesh face's uv -> 3D map.
pub fn face_singular_values(mesh: &Mesh, face: usize) -> Result<(f64, f64)> {
    let uv = mesh
        .uv(face)
        .ok_or_else(|| Error::InvalidMesh(format!("face {face} has no uv")))?;
    let p = mesh.face_vertices(face);
    singular_values_of_tri(uv, &p).map_err(|e| match e {
        Error::DegenerateUv { area, .. } => Error::DegenerateUv { face, area },
        other => other,
    })
}

/// Per-face distortion measurements plus the scalar energy.
#[derive(Debug, Clone)]
pub struct DistortionReport {
    /// `(sigma1, sigma2)` for each textured face, `None` for untextured.
    pub per_face_sigmas: Vec<Option<(f64, f64)>>,
    /// `sum area3d * ((sigma1-1)^2 + (sigma2-1)^2)` over textured faces.
    pub energy: f64,
    /// Faces with sigma1 > 1 + tol.
    pub stretched_count: usize,
    /// Faces with sigma2 < 1 - tol.
    pub compressed_count: usize,
}

pub fn distortion_energy(mesh: &Mesh) -> Result<DistortionReport> {
    distortion_energy_with_tol(mesh, DISTORTION_COUNT_TOL)
}

pub fn distortion_energy_with_tol(mesh: &Mesh, tol: f64) -> Result<DistortionReport> {
    let mut per_face_sigmas = vec![None; mesh.face_count()];
    let mut energy = 0.0;
    let mut stretched = 0;
    let mut compressed = 0;
    for face in 0..mesh.face_count() {
        if !mesh.is_textured(face) {
            continue;
        }
        let (s1, s2) = face_singular_values(mesh, face)?;
        per_face_sigmas[face] = Some((s1, s2));
        energy += mesh.face_area_3d(face) * ((s1 - 1.0).powi(2) + (s2 - 1.0).powi(2));
        if s1 > 1.0 + tol {
            stretched += 1;
        }
        if s2 < 1.0 - tol {
            compressed += 1;
        }
    }
    Ok(DistortionReport {
        per_face_sigmas,
        energy,
        stretched_count: stretched,
        compressed_count: compressed,
    })
}

/// Axis-aligned uv rectangle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UvRect {
    pub u0: f64,
    pub v0: f64,
    pub u1: f64,
    pub v1: f64,
}

impl UvRect {
    pub fn width(&self) -> f64 {
        self.u1 - self.u0
    }

    pub fn height(&self) -> f64 {
        self.v1 - self.v0
    }
}

#[derive(Debug, Clone)]
pub struct RelaxOptions {
    pub iterations: usize,
    /// Target atlas rectangle; defaults to the patch's current uv bounds.
    pub atlas_rect: Option<UvRect>,
    /// Keep the patch's original uv area instead of scaling to fit. With
    /// this set, an unfolded patch that outgrows its rectangle is an error.
    pub preserve_uv_area: bool,
}

impl RelaxOptions {
    pub fn new(iterations: usize) -> Self {
        RelaxOptions {
            iterations,
            atlas_rect: None,
            preserve_uv_area: false,
        }
    }
}

/// Patch-local energies recorded during relaxation.
#[derive(Debug, Clone)]
pub struct RelaxReport {
    /// Patch energy of the input uv assignment.
    pub initial_energy: f64,
    /// Patch energy after unfolding, before any relaxation sweep.
    pub unfolded_energy: f64,
    /// Patch energy after each relaxation sweep (monotonically non-increasing).
    pub per_iteration_energy: Vec<f64>,
    /// Patch energy of the returned mesh, after atlas rescaling.
    pub final_energy: f64,
    pub patch_faces: Vec<usize>,
}

/// Unfolds and relaxes the textured patch containing `seed_face`.
/// See [`relax_uv_with_options`] for the full contract.
pub fn relax_uv(mesh: &Mesh, seed_face: usize, iterations: usize) -> Result<Mesh> {
    relax_uv_with_options(mesh, seed_face, &RelaxOptions::new(iterations)).map(|(m, _)| m)
}

/// Returns a mesh differing from the input only in the uv of the relaxed
/// patch, with `distortion_energy(result) <= distortion_energy(input)`
/// guaranteed, plus the per-iteration energy log. The patch must be a
/// connected manifold disk.
pub fn relax_uv_with_options(
    mesh: &Mesh,
    seed_face: usize,
    options: &RelaxOptions,
) -> Result<(Mesh, RelaxReport)> {
    if seed_face >= mesh.face_count() || !mesh.is_textured(seed_face) {
        return Err(Error::InvalidMesh(format!(
            "seed face {seed_face} is not a textured face"
        )));
    }
    let patch = mesh
        .textured_patches()
        .into_iter()
        .find(|p| p.binary_search(&seed_face).is_ok())
        .expect("seed face must belong to a textured patch");

    check_disk_topology(mesh, &patch)?;

    let initial_energy = patch_energy_from_mesh(mesh, &patch)?;

    // --- Hinge unfolding over a BFS from the seed face.
    let mut layout: BTreeMap<usize, Vector2<f64>> = BTreeMap::new();
    let [a, b, c] = {
        let f = mesh.faces()[seed_face];
        [f[0], f[1], f[2]]
    };
    let [pa, pb, pc] = mesh.face_vertices(seed_face);
    let lab = (pb - pa).norm();
    let x = (pc - pa).dot(&(pb - pa)) / lab;
    let h = (2.0 * mesh.face_area_3d(seed_face)) / lab;
    layout.insert(a, Vector2::new(0.0, 0.0));
    layout.insert(b, Vector2::new(lab, 0.0));
    layout.insert(c, Vector2::new(x, h));

    let in_patch = {
        let mut flags = vec![false; mesh.face_count()];
        for &f in &patch {
            flags[f] = true;
        }
        flags
    };
    let edges = mesh.edge_faces();
    let mut face_neighbors: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for faces in edges.values() {
        for i in 0..faces.len() {
            for j in (i + 1)..faces.len() {
                let (fa, fb) = (faces[i], faces[j]);
                if in_patch[fa] && in_patch[fb] {
                    face_neighbors.entry(fa).or_default().push(fb);
                    face_neighbors.entry(fb).or_default().push(fa);
                }
            }
        }
    }
    let mut placed = vec![false; mesh.face_count()];
    placed[seed_face] = true;
    let mut queue = std::collections::VecDeque::from([seed_face]);
    while let Some(f) = queue.pop_front() {
        if let Some(neigh) = face_neighbors.get(&f) {
            for &n in neigh {
                if placed[n] {
                    continue;
                }
                place_face(mesh, n, f, &mut layout);
                placed[n] = true;
                queue.push_back(n);
            }
        }
    }

    // Collect patch vertex ids (deterministic order).
    let patch_vertices: Vec<usize> = layout.keys().copied().collect();
    let vertex_faces: BTreeMap<usize, Vec<usize>> = {
        let mut m: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for &f in &patch {
            for &v in &mesh.faces()[f] {
                m.entry(v).or_default().push(f);
            }
        }
        m
    };

    let unfolded_energy = patch_energy_from_layout(mesh, &patch, &layout)?;

    // --- Local relaxation sweeps with per-vertex step halving.
    let mean_edge = mean_layout_edge(mesh, &patch, &layout);
    let mut per_iteration_energy = Vec::with_capacity(options.iterations);
    let mut energy_now = unfolded_energy;
    for _ in 0..options.iterations {
        for &v in &patch_vertices {
            let faces = &vertex_faces[&v];
            let local_before = local_energy(mesh, faces, &layout)?;
            let grad = local_gradient(mesh, faces, &mut layout, v, mean_edge * 1e-5)?;
            let gnorm = grad.norm();
            if gnorm < 1e-14 {
                continue;
            }
            let dir = grad / gnorm;
            let mut step = mean_edge * 0.25;
            let original = layout[&v];
            for _ in 0..8 {
                layout.insert(v, original - dir * step);
                let local_after = local_energy(mesh, faces, &layout)?;
                if local_after < local_before {
                    break;
                }
                layout.insert(v, original);
                step *= 0.5;
            }
        }
        let e = patch_energy_from_layout(mesh, &patch, &layout)?;
        // Per-vertex moves only ever reduce local sums, so this holds; the
        // assert keeps the monotonicity contract loud in debug builds.
        debug_assert!(e <= energy_now + 1e-9);
        energy_now = e;
        per_iteration_energy.push(e);
    }

    // --- Rescale into the atlas rectangle.
    let rect = options.atlas_rect.unwrap_or_else(|| patch_uv_bounds(mesh, &patch));
    if !(rect.width() > 0.0 && rect.height() > 0.0) {
        return Err(Error::InvalidMesh("atlas rectangle has no extent".into()));
    }
    let (lo, hi) = layout_bounds(&layout);
    let bw = (hi.x - lo.x).max(1e-30);
    let bh = (hi.y - lo.y).max(1e-30);
    let fit_scale = (rect.width() / bw).min(rect.height() / bh);
    let scale = if options.preserve_uv_area {
        let orig_area = patch_uv_area(mesh, &patch);
        let layout_area = layout_patch_area(mesh, &patch, &layout);
        let s = (orig_area / layout_area.max(1e-30)).sqrt();
        if s * bw > rect.width() * (1.0 + 1e-9) || s * bh > rect.height() * (1.0 + 1e-9) {
            return Err(Error::PatchTooLarge {
                w: s * bw,
                h: s * bh,
                rw: rect.width(),
                rh: rect.height(),
            });
        }
        s
    } else {
        // Prefer the energy-optimal global scale when it still fits:
        // minimizing sum area*((s*s1-1)^2 + (s*s2-1)^2) over s is a scalar
        // quadratic with minimum at sum(area*(s1+s2)) / sum(area*(s1^2+s2^2)).
        let mut num = 0.0;
        let mut den = 0.0;
        for &f in &patch {
            let (q, p) = layout_tri(mesh, f, &layout);
            let (s1, s2) = singular_values_of_tri(&q, &p)?;
            let area = mesh.face_area_3d(f);
            num += area * (s1 + s2);
            den += area * (s1 * s1 + s2 * s2);
        }
        // Scaling uv by k scales sigma by 1/k.
        let optimal_uv_scale = if num > 0.0 { den / num } else { fit_scale };
        optimal_uv_scale.min(fit_scale)
    };
    let cx = rect.u0 + rect.width() * 0.5;
    let cy = rect.v0 + rect.height() * 0.5;
    let mx = (lo.x + hi.x) * 0.5;
    let my = (lo.y + hi.y) * 0.5;
    let mut updates = BTreeMap::new();
    for &f in &patch {
        let verts = mesh.faces()[f];
        let mut uv = [[0.0; 2]; 3];
        for k in 0..3 {
            let p = layout[&verts[k]];
            uv[k] = [
                (cx + (p.x - mx) * scale).clamp(0.0, 1.0),
                (cy + (p.y - my) * scale).clamp(0.0, 1.0),
            ];
        }
        updates.insert(f, uv);
    }
    let relaxed = mesh.with_face_uv(&updates)?;
    let final_energy = patch_energy_from_mesh(&relaxed, &patch)?;

    let report = RelaxReport {
        initial_energy,
        unfolded_energy,
        per_iteration_energy,
        final_energy,
        patch_faces: patch.clone(),
    };
    // Never hand back something worse than the input.
    if final_energy > initial_energy {
        return Ok((mesh.clone(), report));
    }
    Ok((relaxed, report))
}

fn check_disk_topology(mesh: &Mesh, patch: &[usize]) -> Result<()> {
    let mut patch_edges: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut verts: std::collections::BTreeSet<usize> = std::collections::BTreeSet::new();
    for &f in patch {
        let face = mesh.faces()[f];
        for k in 0..3 {
            verts.insert(face[k]);
            let a = face[k];
            let b = face[(k + 1) % 3];
            *patch_edges.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    for (&(a, b), &count) in &patch_edges {
        if count > 2 {
            return Err(Error::InvalidMesh(format!(
                "edge ({a}, {b}) is shared by {count} textured faces; patch is not manifold"
            )));
        }
    }
    let chi = verts.len() as i64 - patch_edges.len() as i64 + patch.len() as i64;
    if chi != 1 {
        return Err(Error::NonDiskPatch { chi });
    }
    Ok(())
}

/// Places one face during hinge unfolding. `face` shares an edge with the
/// already-placed `parent`; its third vertex lands on the side of that
/// edge opposite the parent's third vertex, which keeps the local layout
/// fold-free.
fn place_face(mesh: &Mesh, face: usize, parent: usize, layout: &mut BTreeMap<usize, Vector2<f64>>) {
    let verts = mesh.faces()[face];
    let parent_verts = mesh.faces()[parent];
    let shared: Vec<usize> = verts
        .iter()
        .copied()
        .filter(|v| parent_verts.contains(v))
        .collect();
    debug_assert_eq!(shared.len(), 2, "BFS must reach faces over a shared edge");
    let (va, vb) = (shared[0], shared[1]);
    let vc = verts.iter().copied().find(|v| !shared.contains(v)).unwrap();
    if layout.contains_key(&vc) {
        return;
    }
    let pos = |v: usize| mesh.vertices()[v];
    let (pa, pb, pc) = (pos(va), pos(vb), pos(vc));
    let a2 = layout[&va];
    let b2 = layout[&vb];
    let lab2 = (b2 - a2).norm().max(1e-30);
    let d = (b2 - a2) / lab2;
    let n = Vector2::new(-d.y, d.x);
    let lab = (pb - pa).norm().max(1e-30);
    let lac = (pc - pa).norm();
    let x = (pc - pa).dot(&(pb - pa)) / lab;
    let y = (lac * lac - x * x).max(0.0).sqrt();
    let parent_third = parent_verts
        .iter()
        .copied()
        .find(|v| !shared.contains(v))
        .unwrap();
    let y_parent = n.dot(&(layout[&parent_third] - a2));
    let side = if y_parent > 0.0 { -1.0 } else { 1.0 };
    layout.insert(vc, a2 + d * x + n * (side * y));
}

fn layout_tri(
    mesh: &Mesh,
    face: usize,
    layout: &BTreeMap<usize, Vector2<f64>>,
) -> ([[f64; 2]; 3], [Point3<f64>; 3]) {
    let verts = mesh.faces()[face];
    let q = [
        [layout[&verts[0]].x, layout[&verts[0]].y],
        [layout[&verts[1]].x, layout[&verts[1]].y],
        [layout[&verts[2]].x, layout[&verts[2]].y],
    ];
    (q, mesh.face_vertices(face))
}

fn patch_energy_from_layout(
    mesh: &Mesh,
    patch: &[usize],
    layout: &BTreeMap<usize, Vector2<f64>>,
) -> Result<f64> {
    let mut e = 0.0;
    for &f in patch {
        let (q, p) = layout_tri(mesh, f, layout);
        let (s1, s2) = singular_values_of_tri(&q, &p)?;
        e += mesh.face_area_3d(f) * ((s1 - 1.0).powi(2) + (s2 - 1.0).powi(2));
    }
    Ok(e)
}

fn patch_energy_from_mesh(mesh: &Mesh, patch: &[usize]) -> Result<f64> {
    let mut e = 0.0;
    for &f in patch {
        let (s1, s2) = face_singular_values(mesh, f)?;
        e += mesh.face_area_3d(f) * ((s1 - 1.0).powi(2) + (s2 - 1.0).powi(2));
    }
    Ok(e)
}

fn local_energy(
    mesh: &Mesh,
    faces: &[usize],
    layout: &BTreeMap<usize, Vector2<f64>>,
) -> Result<f64> {
    let mut e = 0.0;
    for &f in faces {
        let (q, p) = layout_tri(mesh, f, layout);
        match singular_values_of_tri(&q, &p) {
            Ok((s1, s2)) => e += mesh.face_area_3d(f) * ((s1 - 1.0).powi(2) + (s2 - 1.0).powi(2)),
            // A move that collapses a uv triangle is treated as infinitely bad.
            Err(Error::DegenerateUv { .. }) => e += f64::INFINITY,
            Err(other) => return Err(other),
        }
    }
    Ok(e)
}

fn local_gradient(
    mesh: &Mesh,
    faces: &[usize],
    layout: &mut BTreeMap<usize, Vector2<f64>>,
    vertex: usize,
    h: f64,
) -> Result<Vector2<f64>> {
    let original = layout[&vertex];
    let mut grad = Vector2::zeros();
    for axis in 0..2 {
        let mut delta = Vector2::zeros();
        delta[axis] = h;
        layout.insert(vertex, original + delta);
        let plus = local_energy(mesh, faces, layout)?;
        layout.insert(vertex, original - delta);
        let minus = local_energy(mesh, faces, layout)?;
        layout.insert(vertex, original);
        grad[axis] = if plus.is_finite() && minus.is_finite() {
            (plus - minus) / (2.0 * h)
        } else {
            0.0
        };
    }
    Ok(grad)
}

fn mean_layout_edge(mesh: &Mesh, patch: &[usize], layout: &BTreeMap<usize, Vector2<f64>>) -> f64 {
    let mut total = 0.0;
    let mut count = 0.0;
    for &f in patch {
        let verts = mesh.faces()[f];
        for k in 0..3 {
            let a = layout[&verts[k]];
            let b = layout[&verts[(k + 1) % 3]];
            total += (b - a).norm();
            count += 1.0;
        }
    }
    if count > 0.0 {
        total / count
    } else {
        1.0
    }
}

fn layout_bounds(layout: &BTreeMap<usize, Vector2<f64>>) -> (Vector2<f64>, Vector2<f64>) {
    let mut lo = Vector2::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Vector2::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in layout.values() {
        lo.x = lo.x.min(p.x);
        lo.y = lo.y.min(p.y);
        hi.x = hi.x.max(p.x);
        hi.y = hi.y.max(p.y);
    }
    (lo, hi)
}

fn patch_uv_bounds(mesh: &Mesh, patch: &[usize]) -> UvRect {
    let mut rect = UvRect {
        u0: f64::INFINITY,
        v0: f64::INFINITY,
        u1: f64::NEG_INFINITY,
        v1: f64::NEG_INFINITY,
    };
    for &f in patch {
        if let Some(uv) = mesh.uv(f) {
            for c in uv {
                rect.u0 = rect.u0.min(c[0]);
                rect.v0 = rect.v0.min(c[1]);
                rect.u1 = rect.u1.max(c[0]);
                rect.v1 = rect.v1.max(c[1]);
            }
        }
    }
    rect
}

fn patch_uv_area(mesh: &Mesh, patch: &[usize]) -> f64 {
    let mut area = 0.0;
    for &f in patch {
        if let Some(q) = mesh.uv(f) {
            let e1 = [q[1][0] - q[0][0], q[1][1] - q[0][1]];
            let e2 = [q[2][0] - q[0][0], q[2][1] - q[0][1]];
            area += 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]).abs();
        }
    }
    area
}

fn layout_patch_area(mesh: &Mesh, patch: &[usize], layout: &BTreeMap<usize, Vector2<f64>>) -> f64 {
    let mut area = 0.0;
    for &f in patch {
        let (q, _) = layout_tri(mesh, f, layout);
        let e1 = [q[1][0] - q[0][0], q[1][1] - q[0][1]];
        let e2 = [q[2][0] - q[0][0], q[2][1] - q[0][1]];
        area += 0.5 * (e1[0] * e2[1] - e1[1] * e2[0]).abs();
    }
    area
}

/// Inclusive point-in-triangle test on uv coordinates.
fn point_in_uv_tri(u: f64, v: f64, q: &[[f64; 2]; 3]) -> bool {
    let sign = |a: &[f64; 2], b: &[f64; 2]| (b[0] - a[0]) * (v - a[1]) - (b[1] - a[1]) * (u - a[0]);
    let d0 = sign(&q[0], &q[1]);
    let d1 = sign(&q[1], &q[2]);
    let d2 = sign(&q[2], &q[0]);
    let eps = 1e-12;
    let all_non_neg = d0 >= -eps && d1 >= -eps && d2 >= -eps;
    let all_non_pos = d0 <= eps && d1 <= eps && d2 <= eps;
    all_non_neg || all_non_pos
}

/// Boolean grid: a texel is true iff its center lies inside some textured
/// face's uv triangle. Independent of face ordering by construction.
pub fn bake_texel_mask(mesh: &Mesh, width: usize, height: usize) -> Result<TexelMask> {
    if width < 8 || height < 8 {
        return Err(Error::config(
            "texture_size",
            format!("texel mask needs dimensions >= 8, got {width}x{height}"),
        ));
    }
    let mut mask = TexelMask::new(width, height);
    for face in 0..mesh.face_count() {
        if !mesh.is_textured(face) {
            continue;
        }
        let q = mesh.uv(face).unwrap();
        let (min_u, max_u) = q.iter().fold((1.0f64, 0.0f64), |(lo, hi), c| (lo.min(c[0]), hi.max(c[0])));
        let (min_v, max_v) = q.iter().fold((1.0f64, 0.0f64), |(lo, hi), c| (lo.min(c[1]), hi.max(c[1])));
        let col_lo = ((min_u * width as f64 - 0.5).floor().max(0.0)) as usize;
        let col_hi = ((max_u * width as f64 + 0.5).ceil() as usize).min(width - 1);
        let row_lo = (((1.0 - max_v) * height as f64 - 0.5).floor().max(0.0)) as usize;
        let row_hi = ((((1.0 - min_v) * height as f64) + 0.5).ceil() as usize).min(height - 1);
        for row in row_lo..=row_hi {
            let v = 1.0 - (row as f64 + 0.5) / height as f64;
            for col in col_lo..=col_hi {
                let u = (col as f64 + 0.5) / width as f64;
                if point_in_uv_tri(u, v, q) {
                    mask.set(row, col, true);
                }
            }
        }
    }
    Ok(mask)
}

/// Rasterizes textured patch ids into a texel grid and rejects any texel
/// claimed by two distinct patches.
pub fn validate_patch_overlap(mesh: &Mesh, width: usize, height: usize) -> Result<()> {
    let patches = mesh.textured_patches();
    let mut owner: Vec<Option<usize>> = vec![None; width * height];
    for (pid, patch) in patches.iter().enumerate() {
        for &face in patch {
            let q = mesh.uv(face).unwrap();
            for row in 0..height {
                let v = 1.0 - (row as f64 + 0.5) / height as f64;
                for col in 0..width {
                    let u = (col as f64 + 0.5) / width as f64;
                    if point_in_uv_tri(u, v, q) {
                        let slot = &mut owner[row * width + col];
                        match slot {
                            None => *slot = Some(pid),
                            Some(prev) if *prev != pid => {
                                return Err(Error::InvalidMesh(format!(
                                    "uv patches {prev} and {pid} overlap at texel ({row}, {col})"
                                )))
                            }
                            _ => {}
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

/// Rasterizes the per-face distortion classification into uv space:
/// purple for stretched faces, red for compressed, gray otherwise.
pub fn distortion_heatmap(mesh: &Mesh, width: usize, height: usize) -> Result<Image> {
    let report = distortion_energy(mesh)?;
    let mut img = Image::filled(width, height, [0.12, 0.12, 0.12]);
    for face in 0..mesh.face_count() {
        let Some((s1, s2)) = report.per_face_sigmas[face] else {
            continue;
        };
        let q = mesh.uv(face).unwrap();
        let stretch = (s1 - 1.0).max(0.0);
        let compress = (1.0 - s2).max(0.0);
        let color = if stretch > DISTORTION_COUNT_TOL && stretch >= compress {
            let t = stretch.min(1.0);
            [0.5 + 0.3 * t, 0.5 - 0.3 * t, 0.5 + 0.5 * t]
        } else if compress > DISTORTION_COUNT_TOL {
            let t = compress.min(1.0);
            [0.5 + 0.5 * t, 0.5 - 0.4 * t, 0.5 - 0.4 * t]
        } else {
            [0.5, 0.5, 0.5]
        };
        for row in 0..height {
            let v = 1.0 - (row as f64 + 0.5) / height as f64;
            for col in 0..width {
                let u = (col as f64 + 0.5) / width as f64;
                if point_in_uv_tri(u, v, q) {
                    img.set(row, col, color);
                }
            }
        }
    }
    Ok(img)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Material;

    fn tri_mesh(uv: [[f64; 2]; 3], p: [[f64; 3]; 3]) -> Mesh {
        Mesh::from_parts(
            p.iter().map(|c| Point3::new(c[0], c[1], c[2])).collect(),
            vec![[0, 1, 2]],
            vec![Some(uv)],
            vec![Material::default()],
        )
        .unwrap()
    }

    #[test]
    fn identity_mapping_has_unit_sigmas() {
        let m = tri_mesh(
            [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        );
        let (s1, s2) = face_singular_values(&m, 0).unwrap();
        assert!((s1 - 1.0).abs() < 1e-12);
        assert!((s2 - 1.0).abs() < 1e-12);
        let report = distortion_energy(&m).unwrap();
        assert_eq!(report.energy, 0.0);
        assert_eq!(report.stretched_count, 0);
        assert_eq!(report.compressed_count, 0);
    }

    #[test]
    fn axis_stretch_by_two() {
        let m = tri_mesh(
            [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            [[0.0, 0.0, 0.0], [2.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        );
        let (s1, s2) = face_singular_values(&m, 0).unwrap();
        assert!((s1 - 2.0).abs() < 1e-12);
        assert!((s2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_uv_is_an_error() {
        let m = Mesh::from_parts(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            vec![Some([[0.0, 0.0], [0.5, 0.5], [1.0, 1.0]])],
            vec![Material::default()],
        )
        .unwrap();
        match face_singular_values(&m, 0) {
            Err(Error::DegenerateUv { face, .. }) => assert_eq!(face, 0),
            other => panic!("expected degenerate uv error, got {other:?}"),
        }
    }

    #[test]
    fn flat_quad_identity_uv_has_zero_energy() {
        let mesh = Mesh::from_parts(
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
            vec![Material::default(); 2],
        )
        .unwrap();
        let report = distortion_energy(&mesh).unwrap();
        assert_eq!(report.energy, 0.0);
    }

    #[test]
    fn mask_covers_lower_half_triangle_on_4x4_grid() {
        // Triangle (0,0)-(1,0)-(1,1): points with v <= u.
        let m = tri_mesh(
            [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [1.0, 1.0, 0.0]],
        );
        let mask = bake_texel_mask(&m, 8, 8).unwrap();
        // Oracle: inclusive point-in-triangle over every center.
        for row in 0..8 {
            let v = 1.0 - (row as f64 + 0.5) / 8.0;
            for col in 0..8 {
                let u = (col as f64 + 0.5) / 8.0;
                let expected = v <= u + 1e-12;
                assert_eq!(mask.get(row, col), expected, "texel ({row},{col})");
            }
        }
    }

    #[test]
    fn mask_empty_for_untextured_mesh() {
        let mesh = Mesh::from_parts(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            vec![None],
            vec![Material::default()],
        )
        .unwrap();
        let mask = bake_texel_mask(&mesh, 8, 8).unwrap();
        assert_eq!(mask.count_ones(), 0);
    }

    #[test]
    fn mask_rejects_tiny_dimensions() {
        let m = tri_mesh(
            [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
        );
        assert!(bake_texel_mask(&m, 4, 8).is_err());
    }

    #[test]
    fn relax_identity_patch_is_a_fixed_point() {
        let mesh = Mesh::from_parts(
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
            vec![Material::default(); 2],
        )
        .unwrap();
        let (relaxed, report) = relax_uv_with_options(&mesh, 0, &RelaxOptions::new(10)).unwrap();
        assert!(report.initial_energy < 1e-12);
        assert!(report.final_energy < 1e-9);
        // uv may differ by a rigid motion; energy is the invariant.
        let after = distortion_energy(&relaxed).unwrap();
        assert!(after.energy < 1e-9);
    }

    #[test]
    fn relax_rejects_non_disk_patch() {
        // Two triangles sharing only a vertex are two patches; make a
        // non-manifold edge instead: three faces on one edge.
        let mesh = Mesh::from_parts(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
                Point3::new(0.0, 0.0, 1.0),
                Point3::new(0.0, -1.0, 0.5),
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
            vec![
                Some([[0.0, 0.0], [0.2, 0.0], [0.0, 0.2]]),
                Some([[0.4, 0.0], [0.6, 0.0], [0.4, 0.2]]),
                Some([[0.8, 0.0], [1.0, 0.0], [0.8, 0.2]]),
            ],
            vec![Material::default(); 3],
        )
        .unwrap();
        assert!(relax_uv(&mesh, 0, 5).is_err());
    }
}
