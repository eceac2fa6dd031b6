//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by the pipeline stages.
#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("degenerate face {face}: 3d area {area:.3e} below threshold")]
    DegenerateFace { face: usize, area: f64 },

    #[error("face {face} has a degenerate uv triangle (area {area:.3e})")]
    DegenerateUv { face: usize, area: f64 },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("textured patch is not a disk (chi = {chi}); cut a seam manually before relaxing")]
    NonDiskPatch { chi: i64 },

    #[error("unfolded patch ({w:.4} x {h:.4}) does not fit its atlas rectangle ({rw:.4} x {rh:.4})")]
    PatchTooLarge { w: f64, h: f64, rw: f64, rh: f64 },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid camera pose: {0}")]
    InvalidPose(String),

    #[error("dark-light separation violated: textured range [{t_min:.4}, {t_max:.4}] intersects non-textured range [{n_min:.4}, {n_max:.4}]")]
    SeparationViolated {
        t_min: f64,
        t_max: f64,
        n_min: f64,
        n_max: f64,
    },

    #[error("scene has directional or point lights; dark-light mode required")]
    LitScene,

    #[error("non-finite value in {0}")]
    NonFinite(String),

    #[error("invalid config field `{field}`: {msg}")]
    InvalidConfig { field: String, msg: String },

    #[error("detector weight file corrupt: {0}")]
    WeightFormat(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    TrainingDiverged { epoch: usize },

    #[error("mask separation failed for pose {pose_index}: {source}")]
    PoseSeparation {
        pose_index: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("non-finite gradient at optimization step {step}")]
    NonFiniteGradient { step: usize },

    #[error("manifest parse error at line {line}: {msg}")]
    ManifestParse { line: usize, msg: String },

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("png error on {path}: {msg}")]
    Png { path: String, msg: String },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn config(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field: field.into(),
            msg: msg.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
