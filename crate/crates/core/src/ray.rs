//! Deterministic reference renderer: the photorealistic path that stands
//! in for a physically based engine.
//!
//! Primary visibility comes from the same rasterizer as the
//! differentiable path, so mesh silhouettes agree pixel for pixel with
//! `render_face_ids`. On top of that this renderer adds everything the
//! differentiable path deliberately lacks: Blinn-Phong specular
//! highlights, hard shadows traced against the scene geometry, and a
//! ground plane. No stochastic sampling anywhere; repeated renders are
//! byte-identical.

use std::path::Path;

use nalgebra::{Point3, Vector3};
use rayon::prelude::*;

use crate::bbox::Box2D;
use crate::camera::{camera_from_spherical, CameraPose};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::mesh::Mesh;
use crate::raster::{visibility_for, BACKGROUND};
use crate::scenario::{write_manifest, FrameRecord, SceneSpec};
use crate::scene::SceneConfig;
use crate::texture::TextureMap;

const SHADOW_EPS: f64 = 1e-5;

/// One pre-rendered reference frame with its ground-truth vehicle box.
#[derive(Debug, Clone)]
pub struct ReferenceFrame {
    pub image: Image,
    pub pose: CameraPose,
    pub scene_id: String,
    /// Tight bound of pixels whose primary ray hits the vehicle mesh;
    /// `None` when the vehicle is entirely out of view.
    pub gt_box: Option<Box2D>,
}

fn ray_hits_triangle(
    origin: &Point3<f64>,
    dir: &Vector3<f64>,
    v0: &Point3<f64>,
    v1: &Point3<f64>,
    v2: &Point3<f64>,
    t_max: f64,
) -> bool {
    // Moller-Trumbore, any-hit variant.
    let e1 = v1 - v0;
    let e2 = v2 - v0;
    let pvec = dir.cross(&e2);
    let det = e1.dot(&pvec);
    if det.abs() < 1e-14 {
        return false;
    }
    let inv_det = 1.0 / det;
    let tvec = origin - v0;
    let u = tvec.dot(&pvec) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return false;
    }
    let qvec = tvec.cross(&e1);
    let v = dir.dot(&qvec) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return false;
    }
    let t = e2.dot(&qvec) * inv_det;
    t > SHADOW_EPS && t < t_max
}

fn occluded(scene_mesh: &Mesh, origin: &Point3<f64>, dir: &Vector3<f64>, t_max: f64, skip_face: Option<usize>) -> bool {
    for (fi, _) in scene_mesh.faces().iter().enumerate() {
        if Some(fi) == skip_face {
            continue;
        }
        let [v0, v1, v2] = scene_mesh.face_vertices(fi);
        if ray_hits_triangle(origin, dir, &v0, &v1, &v2, t_max) {
            return true;
        }
    }
    false
}

/// Blinn-Phong shading of a surface point with shadow tests against the
/// merged scene mesh. `albedo` multiplies ambient and diffuse terms;
/// specular uses the material's strength and shininess.
#[allow(clippy::too_many_arguments)]
fn shade_point(
    scene: &SceneConfig,
    scene_mesh: &Mesh,
    point: &Point3<f64>,
    normal: &Vector3<f64>,
    view_dir: &Vector3<f64>,
    albedo: [f64; 3],
    specular: f64,
    shininess: f64,
    skip_face: Option<usize>,
) -> [f64; 3] {
    // Shade both sides: flip the normal toward the viewer.
    let n = if normal.dot(view_dir) < 0.0 { -*normal } else { *normal };
    let mut color = [
        scene.ambient[0] * albedo[0],
        scene.ambient[1] * albedo[1],
        scene.ambient[2] * albedo[2],
    ];
    let origin = point + n * SHADOW_EPS;
    let mut add_light = |to_light: Vector3<f64>, t_max: f64, intensity: [f64; 3]| {
        let l = to_light.normalize();
        let lambert = n.dot(&l).max(0.0);
        if lambert <= 0.0 {
            return;
        }
        if occluded(scene_mesh, &origin, &l, t_max, skip_face) {
            return;
        }
        let h = (l + view_dir).normalize();
        let spec = specular * n.dot(&h).max(0.0).powf(shininess);
        for ch in 0..3 {
            color[ch] += (albedo[ch] * lambert + spec) * intensity[ch];
        }
    };
    for light in &scene.directional_lights {
        add_light(-Vector3::from(light.direction), f64::INFINITY, light.intensity);
    }
    for light in &scene.point_lights {
        let to_light = Point3::from(Vector3::from(light.position)) - point;
        let dist = to_light.norm();
        add_light(to_light, dist - SHADOW_EPS, light.intensity);
    }
    for ch in &mut color {
        *ch = ch.clamp(0.0, 1.0);
    }
    color
}

/// Renders the vehicle alone. See [`render_ref_with_extras`] for scenes
/// with distractor meshes.
pub fn render_ref(
    mesh: &Mesh,
    texture: &TextureMap,
    pose: &CameraPose,
    scene: &SceneConfig,
) -> Result<ReferenceFrame> {
    render_ref_with_extras(mesh, texture, pose, scene, &[])
}

/// Renders vehicle + extra meshes with full reference shading. The
/// ground-truth box bounds pixels whose nearest surface is the vehicle.
pub fn render_ref_with_extras(
    vehicle: &Mesh,
    texture: &TextureMap,
    pose: &CameraPose,
    scene: &SceneConfig,
    extras: &[Mesh],
) -> Result<ReferenceFrame> {
    let cam = camera_from_spherical(pose)?;
    let mut all: Vec<&Mesh> = vec![vehicle];
    all.extend(extras.iter());
    let merged = Mesh::merged(&all)?;
    let vehicle_faces = vehicle.face_count();

    let vis = visibility_for(&merged, &cam);
    let (w, h) = (vis.width, vis.height);
    let mut img = Image::new(w, h);

    let rows: Vec<Vec<[f64; 3]>> = (0..h)
        .into_par_iter()
        .map(|row| {
            let mut out = vec![[0.0f64; 3]; w];
            for (col, px) in out.iter_mut().enumerate() {
                let idx = row * w + col;
                let fi = vis.face[idx];
                let (origin, dir) = cam.pixel_ray(row, col);
                // Ground candidate along the pixel ray.
                let ground_hit = scene.ground.and_then(|g| {
                    if dir.y.abs() < 1e-12 {
                        return None;
                    }
                    let t = (g.height - origin.y) / dir.y;
                    if t > cam.near {
                        Some((t, g))
                    } else {
                        None
                    }
                });
                *px = if fi != BACKGROUND {
                    let bary = vis.bary[idx];
                    let [v0, v1, v2] = merged.face_vertices(fi);
                    let point = Point3::from(
                        v0.coords * bary[0] + v1.coords * bary[1] + v2.coords * bary[2],
                    );
                    // Let the ground win only when strictly nearer than the mesh.
                    let mesh_depth = vis.depth[idx];
                    let ground_in_front = ground_hit
                        .map(|(t, _)| {
                            let gp = origin + dir * t;
                            let gd = -(cam.view
                                * nalgebra::Vector4::new(gp.x, gp.y, gp.z, 1.0))
                            .z;
                            gd < mesh_depth - 1e-9
                        })
                        .unwrap_or(false);
                    if ground_in_front {
                        let (t, g) = ground_hit.unwrap();
                        let gp = origin + dir * t;
                        shade_point(
                            scene,
                            &merged,
                            &gp,
                            &Vector3::y(),
                            &(-dir),
                            g.albedo,
                            0.0,
                            1.0,
                            None,
                        )
                    } else {
                        let albedo = match merged.uv(fi) {
                            Some(uv) if merged.is_textured(fi) => {
                                let u = bary[0] * uv[0][0] + bary[1] * uv[1][0] + bary[2] * uv[2][0];
                                let v = bary[0] * uv[0][1] + bary[1] * uv[1][1] + bary[2] * uv[2][1];
                                texture.sample(u, v)
                            }
                            _ => merged.material(fi).albedo,
                        };
                        let mat = merged.material(fi);
                        let normal = merged.face_normal(fi).into_inner();
                        let view_dir = (origin - point).normalize();
                        shade_point(
                            scene,
                            &merged,
                            &point,
                            &normal,
                            &view_dir,
                            albedo,
                            mat.specular,
                            mat.shininess,
                            Some(fi),
                        )
                    }
                } else if let Some((t, g)) = ground_hit {
                    let gp = origin + dir * t;
                    shade_point(scene, &merged, &gp, &Vector3::y(), &(-dir), g.albedo, 0.0, 1.0, None)
                } else {
                    scene.background
                };
            }
            out
        })
        .collect();
    for (row, colors) in rows.into_iter().enumerate() {
        for (col, c) in colors.into_iter().enumerate() {
            img.set(row, col, c);
        }
    }

    // Ground-truth box over vehicle-owned pixels.
    let mut bb: Option<[usize; 4]> = None;
    for row in 0..h {
        for col in 0..w {
            let fi = vis.face[row * w + col];
            if fi != BACKGROUND && fi < vehicle_faces {
                let b = bb.get_or_insert([col, row, col, row]);
                b[0] = b[0].min(col);
                b[1] = b[1].min(row);
                b[2] = b[2].max(col);
                b[3] = b[3].max(row);
            }
        }
    }
    Ok(ReferenceFrame {
        image: img,
        pose: *pose,
        scene_id: String::new(),
        gt_box: bb.map(|[x0, y0, x1, y1]| {
            Box2D::new(x0 as f64, y0 as f64, (x1 + 1) as f64, (y1 + 1) as f64)
        }),
    })
}

/// Pre-renders every (scene, pose) pair once, writing one PNG per frame
/// plus `manifest.jsonl` into `out_dir`. Frame files are named by scene
/// id and pose index, so re-running with identical inputs reproduces
/// byte-identical files. Returns the manifest records in render order
/// (scene-major, then pose).
pub fn prerender_dataset(
    vehicle: &Mesh,
    texture: &TextureMap,
    scenes: &[SceneSpec],
    poses: &[CameraPose],
    out_dir: impl AsRef<Path>,
) -> Result<Vec<FrameRecord>> {
    let out_dir = out_dir.as_ref();
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir.display().to_string(), e))?;

    // Render frames in parallel, keyed by (scene, pose) index for a
    // deterministic manifest.
    let jobs: Vec<(usize, usize)> = (0..scenes.len())
        .flat_map(|s| (0..poses.len()).map(move |p| (s, p)))
        .collect();
    let frames: Vec<Result<FrameRecord>> = jobs
        .par_iter()
        .map(|&(si, pi)| {
            let scene = &scenes[si];
            let extras = scene.distractor_meshes();
            let frame =
                render_ref_with_extras(vehicle, texture, &poses[pi], &scene.config, &extras)?;
            let gt_box = frame.gt_box.ok_or_else(|| {
                Error::config(
                    "scenario",
                    format!("vehicle not visible from pose {pi} in {}", scene.id),
                )
            })?;
            let file = format!("{}-p{pi:04}.png", scene.id);
            frame.image.save_png(out_dir.join(&file))?;
            Ok(FrameRecord {
                pose: poses[pi],
                scene_id: scene.id.clone(),
                gt_box,
                file,
                pose_index: pi,
            })
        })
        .collect();
    let frames: Result<Vec<FrameRecord>> = frames.into_iter().collect();
    let frames = frames?;
    write_manifest(&frames, out_dir.join("manifest.jsonl"))?;
    Ok(frames)
}
