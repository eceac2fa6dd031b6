//! Scene description shared by both renderers: ambient level, lights,
//! ground plane and background. "Dark-light mode" means no directional
//! and no point lights; it is the regime mask rendering relies on.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectionalLight {
    /// Direction the light travels (from the light toward the scene).
    pub direction: [f64; 3],
    pub intensity: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointLight {
    pub position: [f64; 3],
    /// Unattenuated RGB intensity.
    pub intensity: [f64; 3],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundPlane {
    /// Plane y = height.
    pub height: f64,
    pub albedo: [f64; 3],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneConfig {
    pub ambient: [f64; 3],
    pub directional_lights: Vec<DirectionalLight>,
    pub point_lights: Vec<PointLight>,
    pub ground: Option<GroundPlane>,
    pub background: [f64; 3],
}

impl SceneConfig {
    /// Ambient-only scene with no ground plane.
    pub fn dark(ambient: f64, background: [f64; 3]) -> Self {
        SceneConfig {
            ambient: [ambient; 3],
            directional_lights: Vec::new(),
            point_lights: Vec::new(),
            ground: None,
            background,
        }
    }

    pub fn is_dark_light(&self) -> bool {
        self.directional_lights.is_empty() && self.point_lights.is_empty()
    }

    /// Same scene with every directional and point light removed.
    pub fn dark_variant(&self) -> SceneConfig {
        SceneConfig {
            ambient: self.ambient,
            directional_lights: Vec::new(),
            point_lights: Vec::new(),
            ground: self.ground,
            background: self.background,
        }
    }
}

impl Default for SceneConfig {
    fn default() -> Self {
        SceneConfig {
            ambient: [0.45; 3],
            directional_lights: vec![DirectionalLight {
                direction: [-0.4, -1.0, -0.3],
                intensity: [0.55; 3],
            }],
            point_lights: Vec::new(),
            ground: Some(GroundPlane {
                height: 0.0,
                albedo: [0.38, 0.36, 0.33],
            }),
            background: [0.65, 0.72, 0.82],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dark_light_mode_iff_no_lights() {
        let scene = SceneConfig::default();
        assert!(!scene.is_dark_light());
        assert!(scene.dark_variant().is_dark_light());
        assert!(SceneConfig::dark(1.0, [0.0; 3]).is_dark_light());
    }
}
