//! Camera-pose sampling, the desk-scale scene catalog, and dataset
//! manifest persistence.
//!
//! Pose sampling follows the dataset strategy of the source experiments:
//! below a 30 degree polar angle the vehicle's appearance is sensitive to
//! azimuth, so azimuths are sampled densely (18 degree steps by default);
//! between 30 and 45 degrees a coarse 45 degree step avoids near-duplicate
//! views; polar angles above 45 degrees are rejected outright because
//! detector accuracy collapses on top-down views.

use std::io::{BufRead, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bbox::Box2D;
use crate::camera::CameraPose;
use crate::error::{Error, Result};
use crate::fixtures;
use crate::mesh::Mesh;
use crate::scene::{DirectionalLight, GroundPlane, SceneConfig};

/// Maximum usable polar angle in degrees.
pub const MAX_POLAR_DEG: f64 = 45.0;

/// Documented scene catalog parameter bounds (inclusive).
pub const SCENE_AMBIENT_RANGE: (f64, f64) = (0.30, 0.55);
pub const SCENE_LIGHT_INTENSITY_RANGE: (f64, f64) = (0.40, 0.70);
pub const SCENE_LIGHT_ELEVATION_RANGE: (f64, f64) = (35.0, 75.0);
pub const SCENE_GROUND_ALBEDO_RANGE: (f64, f64) = (0.22, 0.48);
pub const SCENE_BACKGROUND_RANGE: (f64, f64) = (0.50, 0.90);
pub const SCENE_DISTRACTOR_RADIUS_RANGE: (f64, f64) = (5.5, 8.5);
pub const SCENE_DISTRACTOR_SCALE_RANGE: (f64, f64) = (0.8, 2.0);
pub const SCENE_DISTRACTOR_COUNT_RANGE: (usize, usize) = (2, 3);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoseSamplingConfig {
    /// Camera radii, scene units.
    pub distances: Vec<f64>,
    /// Polar angles sampled with the fine azimuth step; each <= 30 degrees.
    pub low_polar_angles: Vec<f64>,
    /// Polar angles in (30, 45] sampled with the coarse azimuth step.
    pub high_polar_angles: Vec<f64>,
    /// Azimuth step for the low band, degrees; must divide 360.
    pub low_azimuth_step: f64,
    /// Azimuth step for the high band, degrees; must divide 360.
    pub high_azimuth_step: f64,
    pub fov_y: f64,
    pub width: usize,
    pub height: usize,
    pub target: [f64; 3],
}

impl Default for PoseSamplingConfig {
    /// Full cross-product defaults mirroring the source experiments:
    /// distances (8, 10, 14, 20), polar angles (5, 10, 20, 30 | 45),
    /// azimuth steps 18 and 45 degrees.
    fn default() -> Self {
        PoseSamplingConfig {
            distances: vec![8.0, 10.0, 14.0, 20.0],
            low_polar_angles: vec![5.0, 10.0, 20.0, 30.0],
            high_polar_angles: vec![45.0],
            low_azimuth_step: 18.0,
            high_azimuth_step: 45.0,
            fov_y: 50.0,
            width: 96,
            height: 96,
            target: [0.0, 0.7, 0.0],
        }
    }
}

impl PoseSamplingConfig {
    /// One distance with the full angle sets: 4*20 + 8 = 88 poses per
    /// scene, the per-location count of the reference dataset.
    pub fn desk() -> Self {
        PoseSamplingConfig {
            distances: vec![10.0],
            ..Default::default()
        }
    }

    /// Reduced sweep for fast end-to-end runs: 2*10 + 4 = 24 poses per
    /// scene.
    pub fn desk_small() -> Self {
        PoseSamplingConfig {
            distances: vec![10.0],
            low_polar_angles: vec![5.0, 20.0],
            high_polar_angles: vec![45.0],
            low_azimuth_step: 36.0,
            high_azimuth_step: 90.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.distances.is_empty() {
            return Err(Error::config("distances", "need at least one distance"));
        }
        if self.distances.iter().any(|&d| !(d > 0.0)) {
            return Err(Error::config("distances", "distances must be positive"));
        }
        for &a in &self.low_polar_angles {
            if !(0.0..=30.0).contains(&a) {
                return Err(Error::config(
                    "low_polar_angles",
                    format!("angle {a} outside [0, 30]"),
                ));
            }
        }
        for &a in &self.high_polar_angles {
            if !(a > 30.0 && a <= MAX_POLAR_DEG) {
                return Err(Error::config(
                    "high_polar_angles",
                    format!(
                        "angle {a} outside (30, {MAX_POLAR_DEG}]; detection accuracy drops rapidly past {MAX_POLAR_DEG} degrees, so steeper views are excluded"
                    ),
                ));
            }
        }
        for (name, step) in [
            ("low_azimuth_step", self.low_azimuth_step),
            ("high_azimuth_step", self.high_azimuth_step),
        ] {
            if !(step > 0.0) || (360.0 / step - (360.0 / step).round()).abs() > 1e-9 {
                return Err(Error::config(name, format!("step {step} must divide 360")));
            }
        }
        Ok(())
    }

    /// Poses per scene implied by the configuration.
    pub fn pose_count(&self) -> usize {
        let low = (360.0 / self.low_azimuth_step).round() as usize;
        let high = (360.0 / self.high_azimuth_step).round() as usize;
        self.distances.len() * (self.low_polar_angles.len() * low + self.high_polar_angles.len() * high)
    }
}

/// Full cross-product of distances and angle bands, ordered
/// distance-major, then polar angle (low band first), then azimuth.
pub fn sample_poses(cfg: &PoseSamplingConfig) -> Result<Vec<CameraPose>> {
    cfg.validate()?;
    let mut poses = Vec::with_capacity(cfg.pose_count());
    for &r in &cfg.distances {
        for (angles, step) in [
            (&cfg.low_polar_angles, cfg.low_azimuth_step),
            (&cfg.high_polar_angles, cfg.high_azimuth_step),
        ] {
            let n_az = (360.0 / step).round() as usize;
            for &theta in angles.iter() {
                for k in 0..n_az {
                    let phi = k as f64 * step;
                    poses.push(CameraPose::new(
                        r, theta, phi, cfg.fov_y, cfg.width, cfg.height, cfg.target,
                    )?);
                }
            }
        }
    }
    Ok(poses)
}

/// A box-shaped detection distractor placed in a scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistractorPlacement {
    pub albedo: [f64; 3],
    pub scale: f64,
    pub rot_y_deg: f64,
    pub position: [f64; 3],
}

/// One catalog scene: lighting configuration plus distractor placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneSpec {
    pub id: String,
    pub config: SceneConfig,
    pub distractors: Vec<DistractorPlacement>,
}

impl SceneSpec {
    /// Instantiates the distractor meshes in world coordinates.
    pub fn distractor_meshes(&self) -> Vec<Mesh> {
        self.distractors
            .iter()
            .map(|d| {
                fixtures::distractor_box(d.albedo).transformed(
                    d.scale,
                    d.rot_y_deg,
                    nalgebra::Vector3::new(d.position[0], d.position[1], d.position[2]),
                )
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SceneCatalog {
    pub train: Vec<SceneSpec>,
    pub test: Vec<SceneSpec>,
}

impl SceneCatalog {
    pub fn save_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).expect("catalog serializes");
        std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
    }

    pub fn load_json(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
        serde_json::from_str(&text).map_err(|e| Error::ManifestParse {
            line: e.line(),
            msg: e.to_string(),
        })
    }

    pub fn scene(&self, id: &str) -> Option<&SceneSpec> {
        self.train
            .iter()
            .chain(self.test.iter())
            .find(|s| s.id == id)
    }
}

/// Deterministic catalog of desk scenes standing in for the reference
/// pipeline's city locations. Each scene varies the ambient level, one
/// directional light, ground albedo, background color and distractor
/// placement within the documented `SCENE_*_RANGE` bounds.
pub fn build_scene_catalog(n_train: usize, n_test: usize, seed: u64) -> Result<SceneCatalog> {
    if n_train < 1 || n_test < 1 {
        return Err(Error::config("scene_counts", "need at least one train and one test scene"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scenes = Vec::with_capacity(n_train + n_test);
    for i in 0..n_train + n_test {
        let ambient = rng.gen_range(SCENE_AMBIENT_RANGE.0..=SCENE_AMBIENT_RANGE.1);
        let elevation = rng
            .gen_range(SCENE_LIGHT_ELEVATION_RANGE.0..=SCENE_LIGHT_ELEVATION_RANGE.1)
            .to_radians();
        let azimuth = rng.gen_range(0.0..360.0f64).to_radians();
        let intensity = rng.gen_range(SCENE_LIGHT_INTENSITY_RANGE.0..=SCENE_LIGHT_INTENSITY_RANGE.1);
        let ground_base = rng.gen_range(SCENE_GROUND_ALBEDO_RANGE.0 + 0.03..=SCENE_GROUND_ALBEDO_RANGE.1 - 0.03);
        let mut ground = [0.0; 3];
        for g in &mut ground {
            *g = ground_base + rng.gen_range(-0.03..=0.03);
        }
        let mut background = [0.0; 3];
        for (ch, b) in background.iter_mut().enumerate() {
            let lo = SCENE_BACKGROUND_RANGE.0 + 0.05 * ch as f64;
            *b = rng.gen_range(lo..=lo + 0.25);
        }
        let n_distractors =
            rng.gen_range(SCENE_DISTRACTOR_COUNT_RANGE.0..=SCENE_DISTRACTOR_COUNT_RANGE.1);
        let mut distractors = Vec::with_capacity(n_distractors);
        for _ in 0..n_distractors {
            let radius = rng.gen_range(SCENE_DISTRACTOR_RADIUS_RANGE.0..=SCENE_DISTRACTOR_RADIUS_RANGE.1);
            let az = rng.gen_range(0.0..360.0f64);
            distractors.push(DistractorPlacement {
                albedo: [
                    rng.gen_range(0.15..=0.8),
                    rng.gen_range(0.15..=0.8),
                    rng.gen_range(0.15..=0.8),
                ],
                scale: rng.gen_range(SCENE_DISTRACTOR_SCALE_RANGE.0..=SCENE_DISTRACTOR_SCALE_RANGE.1),
                rot_y_deg: rng.gen_range(0.0..360.0),
                position: [radius * az.to_radians().cos(), 0.0, radius * az.to_radians().sin()],
            });
        }
        // Light direction points from the sky toward the origin.
        let dir = [
            -(elevation.cos() * azimuth.cos()),
            -elevation.sin(),
            -(elevation.cos() * azimuth.sin()),
        ];
        scenes.push(SceneSpec {
            id: format!("scene-{i:03}"),
            config: SceneConfig {
                ambient: [ambient; 3],
                directional_lights: vec![DirectionalLight {
                    direction: dir,
                    intensity: [intensity; 3],
                }],
                point_lights: Vec::new(),
                ground: Some(GroundPlane {
                    height: 0.0,
                    albedo: ground,
                }),
                background,
            },
            distractors,
        });
    }
    let test = scenes.split_off(n_train);
    Ok(SceneCatalog { train: scenes, test })
}

/// One pre-rendered dataset frame: the pose it was rendered from, the
/// scene, the vehicle's ground-truth box and the image file path
/// (relative to the manifest's directory).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub pose: CameraPose,
    pub scene_id: String,
    pub gt_box: Box2D,
    pub file: String,
    /// Index into the scenario pose list; masks are cached per pose.
    pub pose_index: usize,
}

/// Writes one JSON record per line.
pub fn write_manifest(frames: &[FrameRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut w = std::io::BufWriter::new(file);
    for frame in frames {
        let line = serde_json::to_string(frame).expect("frame record serializes");
        writeln!(w, "{line}").map_err(|e| Error::io(path.display().to_string(), e))?;
    }
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<FrameRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let reader = std::io::BufReader::new(file);
    let mut frames = Vec::new();
    for (ln, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path.display().to_string(), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let frame: FrameRecord = serde_json::from_str(&line).map_err(|e| Error::ManifestParse {
            line: ln + 1,
            msg: e.to_string(),
        })?;
        frames.push(frame);
    }
    Ok(frames)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pose_count_matches_formula() {
        let cfg = PoseSamplingConfig::default();
        let poses = sample_poses(&cfg).unwrap();
        assert_eq!(poses.len(), cfg.pose_count());
        assert_eq!(poses.len(), 4 * (4 * 20 + 8));
    }

    #[test]
    fn single_low_angle_with_18_degree_step_gives_20_poses() {
        let cfg = PoseSamplingConfig {
            distances: vec![10.0],
            low_polar_angles: vec![5.0],
            high_polar_angles: vec![],
            ..Default::default()
        };
        assert_eq!(sample_poses(&cfg).unwrap().len(), 20);
    }

    #[test]
    fn single_high_angle_with_45_degree_step_gives_8_poses() {
        let cfg = PoseSamplingConfig {
            distances: vec![10.0],
            low_polar_angles: vec![],
            high_polar_angles: vec![45.0],
            ..Default::default()
        };
        assert_eq!(sample_poses(&cfg).unwrap().len(), 8);
    }

    #[test]
    fn desk_config_gives_88_poses_per_location() {
        assert_eq!(sample_poses(&PoseSamplingConfig::desk()).unwrap().len(), 88);
    }

    #[test]
    fn polar_angle_above_45_is_rejected() {
        let cfg = PoseSamplingConfig {
            high_polar_angles: vec![60.0],
            ..Default::default()
        };
        let err = sample_poses(&cfg).unwrap_err();
        assert!(err.to_string().contains("45"));
    }

    #[test]
    fn no_sampled_pose_exceeds_max_polar() {
        for cfg in [PoseSamplingConfig::default(), PoseSamplingConfig::desk_small()] {
            for pose in sample_poses(&cfg).unwrap() {
                assert!(pose.theta <= MAX_POLAR_DEG);
            }
        }
    }

    #[test]
    fn step_must_divide_360() {
        let cfg = PoseSamplingConfig {
            low_azimuth_step: 17.0,
            ..Default::default()
        };
        assert!(sample_poses(&cfg).is_err());
    }

    #[test]
    fn catalog_is_deterministic_and_disjoint() {
        let a = build_scene_catalog(9, 1, 42).unwrap();
        let b = build_scene_catalog(9, 1, 42).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.train.len(), 9);
        assert_eq!(a.test.len(), 1);
        for tr in &a.train {
            assert!(a.test.iter().all(|te| te.id != tr.id));
        }
    }

    #[test]
    fn minimal_catalog_has_two_disjoint_scenes() {
        let c = build_scene_catalog(1, 1, 7).unwrap();
        assert_eq!(c.train.len() + c.test.len(), 2);
        assert_ne!(c.train[0].id, c.test[0].id);
    }

    #[test]
    fn catalog_parameters_stay_in_documented_bounds() {
        let c = build_scene_catalog(9, 1, 3).unwrap();
        for scene in c.train.iter().chain(&c.test) {
            let cfg = &scene.config;
            assert!(cfg.ambient[0] >= SCENE_AMBIENT_RANGE.0 && cfg.ambient[0] <= SCENE_AMBIENT_RANGE.1);
            assert_eq!(cfg.directional_lights.len(), 1);
            let light = &cfg.directional_lights[0];
            assert!(
                light.intensity[0] >= SCENE_LIGHT_INTENSITY_RANGE.0
                    && light.intensity[0] <= SCENE_LIGHT_INTENSITY_RANGE.1
            );
            assert!(light.direction[1] < 0.0, "light must point downward");
            let ground = cfg.ground.expect("catalog scenes have ground");
            for ch in ground.albedo {
                assert!((SCENE_GROUND_ALBEDO_RANGE.0..=SCENE_GROUND_ALBEDO_RANGE.1).contains(&ch));
            }
            for ch in cfg.background {
                assert!((SCENE_BACKGROUND_RANGE.0..=SCENE_BACKGROUND_RANGE.1).contains(&ch));
            }
            let nd = scene.distractors.len();
            assert!((SCENE_DISTRACTOR_COUNT_RANGE.0..=SCENE_DISTRACTOR_COUNT_RANGE.1).contains(&nd));
            for d in &scene.distractors {
                let r = (d.position[0].powi(2) + d.position[2].powi(2)).sqrt();
                assert!(r >= SCENE_DISTRACTOR_RADIUS_RANGE.0 - 1e-9 && r <= SCENE_DISTRACTOR_RADIUS_RANGE.1 + 1e-9);
                assert!((SCENE_DISTRACTOR_SCALE_RANGE.0..=SCENE_DISTRACTOR_SCALE_RANGE.1).contains(&d.scale));
            }
        }
    }

    #[test]
    fn manifest_roundtrip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let frames: Vec<FrameRecord> = (0..6)
            .map(|i| FrameRecord {
                pose: CameraPose::new(10.0, 20.0, i as f64 * 36.0, 50.0, 96, 96, [0.0, 0.7, 0.0]).unwrap(),
                scene_id: format!("scene-{i:03}"),
                gt_box: Box2D::new(10.0, 12.0, 40.0 + i as f64, 44.0),
                file: format!("frames/f{i}.png"),
                pose_index: i,
            })
            .collect();
        write_manifest(&frames, &path).unwrap();
        let back = read_manifest(&path).unwrap();
        assert_eq!(frames, back);

        write_manifest(&[], &path).unwrap();
        assert!(read_manifest(&path).unwrap().is_empty());
    }

    #[test]
    fn corrupt_manifest_line_is_reported_with_its_number() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.jsonl");
        let frame = FrameRecord {
            pose: CameraPose::new(10.0, 20.0, 0.0, 50.0, 96, 96, [0.0, 0.7, 0.0]).unwrap(),
            scene_id: "scene-000".into(),
            gt_box: Box2D::new(0.0, 0.0, 1.0, 1.0),
            file: "f.png".into(),
            pose_index: 0,
        };
        let good = serde_json::to_string(&frame).unwrap();
        std::fs::write(&path, format!("{good}\n{{broken}}\n")).unwrap();
        match read_manifest(&path) {
            Err(Error::ManifestParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected manifest parse error, got {other:?}"),
        }
    }
}
