//! Spherical camera poses and the shared view-projection transform.
//!
//! Both renderers take their camera geometry from [`CameraTransform`], so
//! rasterized coverage and ray directions agree pixel for pixel.
//!
//! Conventions: y-up world, right-handed view space looking down -z,
//! image origin top-left. The polar angle theta is measured from the
//! overhead (+y) axis, so theta = 0 places the camera directly above the
//! target; at that pole the image-space up axis aligns with world -x.

use nalgebra::{Matrix4, Point3, Vector3, Vector4};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Camera position in spherical sensor coordinates plus intrinsics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraPose {
    /// Radial distance from the target, scene units.
    pub r: f64,
    /// Polar angle in degrees, 0 = directly overhead.
    pub theta: f64,
    /// Azimuth in degrees, kept in [0, 360).
    pub phi: f64,
    /// Vertical field of view in degrees.
    pub fov_y: f64,
    /// Output size in pixels.
    pub width: usize,
    pub height: usize,
    /// Look-at point.
    pub target: [f64; 3],
}

impl CameraPose {
    pub fn new(
        r: f64,
        theta: f64,
        phi: f64,
        fov_y: f64,
        width: usize,
        height: usize,
        target: [f64; 3],
    ) -> Result<Self> {
        let pose = CameraPose {
            r,
            theta,
            phi: phi.rem_euclid(360.0),
            fov_y,
            width,
            height,
            target,
        };
        pose.validate()?;
        Ok(pose)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r > 0.0) {
            return Err(Error::InvalidPose(format!("r must be > 0, got {}", self.r)));
        }
        if !(0.0..=90.0).contains(&self.theta) {
            return Err(Error::InvalidPose(format!(
                "theta must be in [0, 90], got {}",
                self.theta
            )));
        }
        if !(0.0 < self.fov_y && self.fov_y < 180.0) {
            return Err(Error::InvalidPose(format!(
                "fov_y must be in (0, 180), got {}",
                self.fov_y
            )));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::InvalidPose(format!(
                "output size must be at least 16x16, got {}x{}",
                self.width, self.height
            )));
        }
        Ok(())
    }

    /// World-space camera position implied by the spherical coordinates.
    pub fn eye(&self) -> Point3<f64> {
        let theta = self.theta.to_radians();
        let phi = self.phi.rem_euclid(360.0).to_radians();
        let t = Vector3::from(self.target);
        Point3::from(
            t + self.r * Vector3::new(theta.sin() * phi.cos(), theta.cos(), theta.sin() * phi.sin()),
        )
    }
}

/// Near plane distance as a fraction of the pose radius.
const NEAR_FRACTION: f64 = 0.01;

/// View-projection transform shared by both renderers.
#[derive(Debug, Clone)]
pub struct CameraTransform {
    pub view: Matrix4<f64>,
    pub proj: Matrix4<f64>,
    pub view_proj: Matrix4<f64>,
    pub eye: Point3<f64>,
    pub near: f64,
    pub width: usize,
    pub height: usize,
    inv_view_proj: Matrix4<f64>,
}

/// Builds the look-at view and perspective projection for a pose.
pub fn camera_from_spherical(pose: &CameraPose) -> Result<CameraTransform> {
    pose.validate()?;
    let eye = pose.eye();
    let target = Point3::from(Vector3::from(pose.target));
    let forward = (target - eye).normalize();
    // At the pole the usual world-up is parallel to the view axis; the
    // fixed fallback puts image-up along world -x.
    let up_hint = if pose.theta.to_radians().sin().abs() < 1e-9 {
        Vector3::new(-1.0, 0.0, 0.0)
    } else {
        Vector3::new(0.0, 1.0, 0.0)
    };
    let right = forward.cross(&up_hint).normalize();
    let up = right.cross(&forward);

    let mut view = Matrix4::identity();
    for i in 0..3 {
        view[(0, i)] = right[i];
        view[(1, i)] = up[i];
        view[(2, i)] = -forward[i];
    }
    let e = eye.coords;
    view[(0, 3)] = -right.dot(&e);
    view[(1, 3)] = -up.dot(&e);
    view[(2, 3)] = -(-forward).dot(&e);

    let aspect = pose.width as f64 / pose.height as f64;
    let f = 1.0 / (pose.fov_y.to_radians() / 2.0).tan();
    let near = pose.r * NEAR_FRACTION;
    let far = pose.r * 100.0;
    let mut proj = Matrix4::zeros();
    proj[(0, 0)] = f / aspect;
    proj[(1, 1)] = f;
    proj[(2, 2)] = (far + near) / (near - far);
    proj[(2, 3)] = 2.0 * far * near / (near - far);
    proj[(3, 2)] = -1.0;

    let view_proj = proj * view;
    let inv_view_proj = view_proj
        .try_inverse()
        .ok_or_else(|| Error::InvalidPose("singular view-projection".into()))?;
    Ok(CameraTransform {
        view,
        proj,
        view_proj,
        eye,
        near,
        width: pose.width,
        height: pose.height,
        inv_view_proj,
    })
}

impl CameraTransform {
    /// Projects a world point to (pixel x, pixel y, view-space depth).
    /// Returns `None` for points at or in front of the near plane.
    pub fn project(&self, world: &Point3<f64>) -> Option<(f64, f64, f64)> {
        let clip = self.view_proj * Vector4::new(world.x, world.y, world.z, 1.0);
        let depth = -(self.view * Vector4::new(world.x, world.y, world.z, 1.0)).z;
        if depth <= self.near {
            return None;
        }
        let ndc_x = clip.x / clip.w;
        let ndc_y = clip.y / clip.w;
        let px = (ndc_x + 1.0) * 0.5 * self.width as f64;
        let py = (1.0 - (ndc_y + 1.0) * 0.5) * self.height as f64;
        Some((px, py, depth))
    }

    /// World-space ray through the center of pixel (row, col).
    pub fn pixel_ray(&self, row: usize, col: usize) -> (Point3<f64>, Vector3<f64>) {
        let ndc_x = (col as f64 + 0.5) / self.width as f64 * 2.0 - 1.0;
        let ndc_y = 1.0 - (row as f64 + 0.5) / self.height as f64 * 2.0;
        let p = self.inv_view_proj * Vector4::new(ndc_x, ndc_y, -1.0, 1.0);
        let p = Point3::new(p.x / p.w, p.y / p.w, p.z / p.w);
        (self.eye, (p - self.eye).normalize())
    }

    /// Camera position recovered from the inverse view transform.
    pub fn eye_from_inverse(&self) -> Option<Point3<f64>> {
        let inv = self.view.try_inverse()?;
        Some(Point3::new(inv[(0, 3)], inv[(1, 3)], inv[(2, 3)]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pose(r: f64, theta: f64, phi: f64) -> CameraPose {
        CameraPose::new(r, theta, phi, 50.0, 64, 64, [0.0, 0.0, 0.0]).unwrap()
    }

    #[test]
    fn pole_camera_sits_above_target_with_minus_x_up() {
        let cam = camera_from_spherical(&pose(2.0, 0.0, 0.0)).unwrap();
        let eye = cam.eye;
        assert!((eye.x).abs() < 1e-12 && (eye.z).abs() < 1e-12);
        assert!((eye.y - 2.0).abs() < 1e-12);
        // Image up = row 1 of the view rotation; it must be world -x.
        assert!((cam.view[(1, 0)] + 1.0).abs() < 1e-12);
        assert!(cam.view[(1, 1)].abs() < 1e-12);
        assert!(cam.view[(1, 2)].abs() < 1e-12);
    }

    #[test]
    fn phi_is_periodic_mod_360() {
        let a = camera_from_spherical(&pose(3.0, 40.0, 25.0)).unwrap();
        let mut p = pose(3.0, 40.0, 25.0);
        p.phi = 25.0 + 360.0;
        let b = camera_from_spherical(&p).unwrap();
        assert_eq!(a.view_proj, b.view_proj);
    }

    #[test]
    fn rejects_bad_poses() {
        assert!(CameraPose::new(0.0, 10.0, 0.0, 50.0, 64, 64, [0.0; 3]).is_err());
        assert!(CameraPose::new(1.0, 95.0, 0.0, 50.0, 64, 64, [0.0; 3]).is_err());
        assert!(CameraPose::new(1.0, 10.0, 0.0, 50.0, 8, 64, [0.0; 3]).is_err());
    }

    #[test]
    fn projected_target_lands_at_image_center() {
        let cam = camera_from_spherical(&pose(5.0, 30.0, 120.0)).unwrap();
        let (px, py, depth) = cam.project(&Point3::new(0.0, 0.0, 0.0)).unwrap();
        assert!((px - 32.0).abs() < 1e-9);
        assert!((py - 32.0).abs() < 1e-9);
        assert!((depth - 5.0).abs() < 1e-9);
    }

    #[test]
    fn pixel_ray_points_from_eye_toward_scene() {
        let cam = camera_from_spherical(&pose(5.0, 45.0, 10.0)).unwrap();
        let (origin, dir) = cam.pixel_ray(32, 32);
        assert_eq!(origin, cam.eye);
        // Center pixel ray passes very near the target.
        let t = -(origin.coords.dot(&dir)) / dir.dot(&dir);
        let closest = origin + dir * t;
        assert!(closest.coords.norm() < 0.1);
    }
}
