//! Differentiable rasterizer: the renderer whose output admits exact
//! gradients with respect to the texture map.
//!
//! Visibility is a hard z-buffer; differentiability lives entirely in
//! bilinear texture sampling and shading, which keeps the texture
//! gradient exact rather than a soft-rasterization approximation. Shading
//! is flat per-face: `ambient + sum max(0, n.l) * intensity` over
//! directional lights (point lights belong to the reference renderer).
//! Colors clamp to [0,1]; the clamp backpropagates as identity only where
//! the pre-clamp value is strictly inside (0,1), so saturated pixels
//! carry zero gradient.

use nalgebra::Vector3;

use crate::camera::{camera_from_spherical, CameraPose, CameraTransform};
use crate::error::{Error, Result};
use crate::image::Image;
use crate::mesh::Mesh;
use crate::scene::SceneConfig;
use crate::texture::{Footprint, TextureMap};

/// Face-id sentinel for pixels no face covers.
pub const BACKGROUND: usize = usize::MAX;

/// Per-pixel nearest face ids, consistent with `render_diff`'s z-buffer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaceIdBuffer {
    pub width: usize,
    pub height: usize,
    /// Row-major face index per pixel, `BACKGROUND` where none.
    pub ids: Vec<usize>,
}

impl FaceIdBuffer {
    #[inline]
    pub fn get(&self, row: usize, col: usize) -> usize {
        self.ids[row * self.width + col]
    }

    pub fn is_background(&self, row: usize, col: usize) -> bool {
        self.get(row, col) == BACKGROUND
    }

    /// Tight pixel bounds of non-background pixels: (col0, row0, col1, row1)
    /// inclusive, or None if nothing is covered.
    pub fn coverage_box(&self) -> Option<[usize; 4]> {
        let mut bb: Option<[usize; 4]> = None;
        for row in 0..self.height {
            for col in 0..self.width {
                if self.get(row, col) != BACKGROUND {
                    let b = bb.get_or_insert([col, row, col, row]);
                    b[0] = b[0].min(col);
                    b[1] = b[1].min(row);
                    b[2] = b[2].max(col);
                    b[3] = b[3].max(row);
                }
            }
        }
        bb
    }
}

/// Saved interpolation state per covered pixel: everything the texture
/// VJP needs to push an image cotangent back onto texels.
#[derive(Debug, Clone)]
pub struct PixelTape {
    pub face: usize,
    pub bary: [f64; 3],
    /// Bilinear texel footprint; only present for textured faces.
    pub footprint: Option<Footprint>,
    /// Per-channel multiplier so that pre-clamp color = shade * albedo.
    pub shade: [f64; 3],
    /// Pre-clamp value not strictly inside (0,1): gradient is cut there.
    pub saturated: [bool; 3],
}

/// Forward-pass record for [`render_diff_vjp`].
#[derive(Debug, Clone)]
pub struct RenderTape {
    pub width: usize,
    pub height: usize,
    pub texture_width: usize,
    pub texture_height: usize,
    /// Row-major, one entry per covered pixel.
    pub pixels: Vec<Option<PixelTape>>,
    /// Copy of the textured-texel mask; unmasked texels get zero gradient.
    texel_mask: Vec<bool>,
}

/// Interpolated visibility raster shared by the differentiable and
/// reference paths (identical camera math, identical coverage).
pub(crate) struct VisibilityBuffer {
    pub width: usize,
    pub height: usize,
    pub face: Vec<usize>,
    pub bary: Vec<[f64; 3]>,
    pub depth: Vec<f64>,
}

pub(crate) fn rasterize_visibility(mesh: &Mesh, cam: &CameraTransform) -> VisibilityBuffer {
    let (w, h) = (cam.width, cam.height);
    let mut buf = VisibilityBuffer {
        width: w,
        height: h,
        face: vec![BACKGROUND; w * h],
        bary: vec![[0.0; 3]; w * h],
        depth: vec![f64::INFINITY; w * h],
    };
    let projected: Vec<Option<(f64, f64, f64)>> =
        mesh.vertices().iter().map(|p| cam.project(p)).collect();

    for (fi, face) in mesh.faces().iter().enumerate() {
        let (Some(p0), Some(p1), Some(p2)) = (
            projected[face[0]],
            projected[face[1]],
            projected[face[2]],
        ) else {
            continue;
        };
        let area2 = (p1.0 - p0.0) * (p2.1 - p0.1) - (p1.1 - p0.1) * (p2.0 - p0.0);
        if area2.abs() < 1e-12 {
            continue;
        }
        let min_x = p0.0.min(p1.0).min(p2.0).floor().max(0.0) as usize;
        let max_x = (p0.0.max(p1.0).max(p2.0).ceil() as isize).min(w as isize - 1);
        let min_y = p0.1.min(p1.1).min(p2.1).floor().max(0.0) as usize;
        let max_y = (p0.1.max(p1.1).max(p2.1).ceil() as isize).min(h as isize - 1);
        if max_x < 0 || max_y < 0 {
            continue;
        }
        let (max_x, max_y) = (max_x as usize, max_y as usize);
        let inv_area = 1.0 / area2;
        for row in min_y..=max_y {
            let py = row as f64 + 0.5;
            for col in min_x..=max_x {
                let px = col as f64 + 0.5;
                let w0 = ((p1.0 - px) * (p2.1 - py) - (p1.1 - py) * (p2.0 - px)) * inv_area;
                let w1 = ((p2.0 - px) * (p0.1 - py) - (p2.1 - py) * (p0.0 - px)) * inv_area;
                let w2 = 1.0 - w0 - w1;
                if w0 < 0.0 || w1 < 0.0 || w2 < 0.0 {
                    continue;
                }
                // Perspective-correct interpolation: barycentrics in screen
                // space are divided by view depth and renormalized.
                let inv_z = w0 / p0.2 + w1 / p1.2 + w2 / p2.2;
                let depth = 1.0 / inv_z;
                let idx = row * w + col;
                let better = depth < buf.depth[idx]
                    || (depth == buf.depth[idx] && fi < buf.face[idx]);
                if better {
                    buf.depth[idx] = depth;
                    buf.face[idx] = fi;
                    buf.bary[idx] = [
                        w0 / p0.2 * depth,
                        w1 / p1.2 * depth,
                        w2 / p2.2 * depth,
                    ];
                }
            }
        }
    }
    buf
}

/// Flat shading multiplier for a face under ambient + directional lights.
pub(crate) fn diff_shade(mesh: &Mesh, face: usize, scene: &SceneConfig) -> [f64; 3] {
    let n = mesh.face_normal(face);
    let mut shade = scene.ambient;
    for light in &scene.directional_lights {
        let l = -Vector3::from(light.direction).normalize();
        let lambert = n.dot(&l).max(0.0);
        for ch in 0..3 {
            shade[ch] += lambert * light.intensity[ch];
        }
    }
    shade
}

/// Renders the mesh with the given texture; returns the image and the
/// tape for the texture VJP. Deterministic: identical inputs produce
/// bit-identical images.
pub fn render_diff(
    mesh: &Mesh,
    texture: &TextureMap,
    pose: &CameraPose,
    scene: &SceneConfig,
) -> Result<(Image, RenderTape)> {
    let cam = camera_from_spherical(pose)?;
    let vis = rasterize_visibility(mesh, &cam);
    let (w, h) = (vis.width, vis.height);
    let mut img = Image::filled(w, h, scene.background);
    let mut pixels: Vec<Option<PixelTape>> = vec![None; w * h];

    // Flat shading is per-face; precompute it once.
    let shades: Vec<[f64; 3]> = (0..mesh.face_count())
        .map(|f| diff_shade(mesh, f, scene))
        .collect();

    for row in 0..h {
        for col in 0..w {
            let idx = row * w + col;
            let fi = vis.face[idx];
            if fi == BACKGROUND {
                continue;
            }
            let bary = vis.bary[idx];
            let shade = shades[fi];
            let (albedo, footprint) = match mesh.uv(fi) {
                Some(uv) if mesh.is_textured(fi) => {
                    let u = bary[0] * uv[0][0] + bary[1] * uv[1][0] + bary[2] * uv[2][0];
                    let v = bary[0] * uv[0][1] + bary[1] * uv[1][1] + bary[2] * uv[2][1];
                    let fp = texture.footprint(u, v);
                    let mut rgb = [0.0; 3];
                    for k in 0..4 {
                        for ch in 0..3 {
                            rgb[ch] += fp.weights[k] * texture.texel_flat(fp.texels[k], ch);
                        }
                    }
                    (rgb, Some(fp))
                }
                _ => (mesh.material(fi).albedo, None),
            };
            let mut color = [0.0; 3];
            let mut saturated = [false; 3];
            for ch in 0..3 {
                let pre = shade[ch] * albedo[ch];
                saturated[ch] = !(pre > 0.0 && pre < 1.0);
                color[ch] = pre.clamp(0.0, 1.0);
            }
            img.set(row, col, color);
            pixels[idx] = Some(PixelTape {
                face: fi,
                bary,
                footprint,
                shade,
                saturated,
            });
        }
    }

    Ok((
        img,
        RenderTape {
            width: w,
            height: h,
            texture_width: texture.width(),
            texture_height: texture.height(),
            pixels,
            texel_mask: texture.mask().bits().to_vec(),
        },
    ))
}

/// Gradient of the rendered image with respect to the texture: pushes an
/// image cotangent through the tape. Accumulation runs in row-major pixel
/// order, so results are order-deterministic. Texels outside the textured
/// mask stay zero.
pub fn render_diff_vjp(tape: &RenderTape, cotangent: &Image) -> Result<Vec<f64>> {
    if cotangent.width() != tape.width || cotangent.height() != tape.height {
        return Err(Error::ShapeMismatch(format!(
            "cotangent {}x{} does not match render {}x{}",
            cotangent.width(),
            cotangent.height(),
            tape.width,
            tape.height
        )));
    }
    let mut grad = vec![0.0; tape.texture_width * tape.texture_height * 3];
    for (idx, entry) in tape.pixels.iter().enumerate() {
        let Some(pt) = entry else { continue };
        let Some(fp) = &pt.footprint else { continue };
        let row = idx / tape.width;
        let col = idx % tape.width;
        let cot = cotangent.get(row, col);
        for ch in 0..3 {
            if pt.saturated[ch] {
                continue;
            }
            let g = cot[ch] * pt.shade[ch];
            if g == 0.0 {
                continue;
            }
            for k in 0..4 {
                let texel = fp.texels[k];
                if tape.texel_mask[texel] {
                    grad[texel * 3 + ch] += g * fp.weights[k];
                }
            }
        }
    }
    Ok(grad)
}

/// Per-pixel nearest-face ids under the same camera and z-buffer as
/// [`render_diff`].
pub fn render_face_ids(mesh: &Mesh, pose: &CameraPose) -> Result<FaceIdBuffer> {
    let cam = camera_from_spherical(pose)?;
    let vis = rasterize_visibility(mesh, &cam);
    Ok(FaceIdBuffer {
        width: vis.width,
        height: vis.height,
        ids: vis.face,
    })
}

/// Visibility raster with interpolation data, for the reference renderer.
pub(crate) fn visibility_for(mesh: &Mesh, cam: &CameraTransform) -> VisibilityBuffer {
    rasterize_visibility(mesh, cam)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::texture::TexelMask;

    fn tex_uniform(value: f64, size: usize) -> TextureMap {
        TextureMap::new(size, size, [value; 3], TexelMask::filled(size, size, true)).unwrap()
    }

    fn overhead_pose(r: f64) -> CameraPose {
        CameraPose::new(r, 0.0, 0.0, 50.0, 64, 64, [0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn uniform_gray_texture_under_unit_ambient_renders_gray() {
        let mesh = fixtures::flat_quad().transformed(1.0, 0.0, nalgebra::Vector3::new(-0.5, 0.0, -0.5));
        let tex = tex_uniform(0.5, 16);
        let scene = SceneConfig::dark(1.0, [0.0; 3]);
        let (img, tape) = render_diff(&mesh, &tex, &overhead_pose(2.0), &scene).unwrap();
        let mut covered = 0;
        for (idx, t) in tape.pixels.iter().enumerate() {
            if t.is_some() {
                covered += 1;
                let px = img.get(idx / 64, idx % 64);
                for ch in 0..3 {
                    assert!((px[ch] - 0.5).abs() <= 1.0 / 255.0);
                }
            }
        }
        assert!(covered > 100, "quad should cover a solid block of pixels");
    }

    #[test]
    fn ambient_scaling_is_linear_before_clamp() {
        let mesh = fixtures::flat_quad().transformed(1.0, 0.0, nalgebra::Vector3::new(-0.5, 0.0, -0.5));
        let tex = tex_uniform(0.5, 16);
        let (a, tape_a) =
            render_diff(&mesh, &tex, &overhead_pose(2.0), &SceneConfig::dark(0.3, [0.0; 3])).unwrap();
        let (b, _) =
            render_diff(&mesh, &tex, &overhead_pose(2.0), &SceneConfig::dark(0.6, [0.0; 3])).unwrap();
        for (idx, t) in tape_a.pixels.iter().enumerate() {
            if t.is_some() {
                let (row, col) = (idx / 64, idx % 64);
                for ch in 0..3 {
                    assert!((b.get(row, col)[ch] - 2.0 * a.get(row, col)[ch]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn empty_mesh_renders_all_background() {
        let mesh = fixtures::unit_right_triangle()
            .transformed(1.0, 0.0, nalgebra::Vector3::new(1000.0, 0.0, 0.0));
        let ids = render_face_ids(&mesh, &overhead_pose(2.0)).unwrap();
        assert!(ids.ids.iter().all(|&id| id == BACKGROUND));
    }

    #[test]
    fn single_large_triangle_reports_face_zero() {
        let mesh = fixtures::unit_right_triangle().transformed(40.0, 0.0, nalgebra::Vector3::new(-10.0, 0.0, -10.0));
        // Triangle lies in the xy-plane; look at it from +z.
        let pose = CameraPose::new(5.0, 90.0, 90.0, 60.0, 64, 64, [0.0, 5.0, 0.0]).unwrap();
        let ids = render_face_ids(&mesh, &pose).unwrap();
        let covered: Vec<usize> = ids.ids.iter().copied().filter(|&id| id != BACKGROUND).collect();
        assert!(!covered.is_empty());
        assert!(covered.iter().all(|&id| id == 0));
    }

    #[test]
    fn zero_cotangent_gives_zero_gradient() {
        let mesh = fixtures::flat_quad();
        let tex = tex_uniform(0.4, 8);
        let pose = CameraPose::new(3.0, 10.0, 40.0, 50.0, 32, 32, [0.5, 0.0, 0.5]).unwrap();
        let (_, tape) = render_diff(&mesh, &tex, &pose, &SceneConfig::dark(0.8, [0.0; 3])).unwrap();
        let grad = render_diff_vjp(&tape, &Image::new(32, 32)).unwrap();
        assert!(grad.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn vjp_is_linear_in_the_cotangent() {
        let mesh = fixtures::flat_quad();
        let tex = tex_uniform(0.4, 8);
        let pose = CameraPose::new(3.0, 25.0, 70.0, 50.0, 32, 32, [0.5, 0.0, 0.5]).unwrap();
        let (_, tape) = render_diff(&mesh, &tex, &pose, &SceneConfig::dark(0.8, [0.0; 3])).unwrap();
        let mut c1 = Image::new(32, 32);
        let mut c2 = Image::new(32, 32);
        c1.set(16, 16, [1.0, 0.0, 2.0]);
        c2.set(15, 17, [0.0, 3.0, 1.0]);
        let mut c12 = c1.clone();
        for (a, b) in c12.data_mut().iter_mut().zip(c2.data()) {
            *a += b;
        }
        let g1 = render_diff_vjp(&tape, &c1).unwrap();
        let g2 = render_diff_vjp(&tape, &c2).unwrap();
        let g12 = render_diff_vjp(&tape, &c12).unwrap();
        for i in 0..g12.len() {
            assert!((g12[i] - g1[i] - g2[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn rendering_is_deterministic() {
        let mesh = fixtures::toy_car();
        let tex = tex_uniform(0.5, 32);
        let pose = CameraPose::new(9.0, 35.0, 123.0, 50.0, 64, 64, [0.0, 0.6, 0.0]).unwrap();
        let scene = SceneConfig::default();
        let (a, _) = render_diff(&mesh, &tex, &pose, &scene).unwrap();
        let (b, _) = render_diff(&mesh, &tex, &pose, &scene).unwrap();
        assert_eq!(a, b);
    }
}
