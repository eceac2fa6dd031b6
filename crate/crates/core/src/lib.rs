//! Adversarial camouflage texture synthesis for 3D meshes.
//!
//! The pipeline optimizes a printable 2D texture map so that a vehicle
//! mesh wearing it evades a trainable object detector:
//!
//! 1. [`uv`] measures and relaxes U-V mapping distortion so the optimized
//!    map survives physical flattening.
//! 2. [`raster`] is the differentiable renderer (gradients w.r.t. the
//!    texture); [`ray`] is the deterministic reference renderer with
//!    specular shading and shadows.
//! 3. [`compose`] combines the two per pose through a dark-light mask and
//!    applies expectation-over-transformation augmentation.
//! 4. [`victim`] is a small trainable single-scale grid detector.
//! 5. [`attack`] runs the loss stack and the texture optimization loop.
//! 6. [`scenario`] samples camera poses and scenes; [`eval`] scores the
//!    result (P@0.5, attack success rate, turntable accuracy).

pub mod attack;
pub mod bbox;
pub mod camera;
pub mod compose;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod image;
pub mod mesh;
pub mod raster;
pub mod ray;
pub mod scenario;
pub mod scene;
pub mod texture;
pub mod uv;
pub mod victim;

pub use camera::{camera_from_spherical, CameraPose, CameraTransform};
pub use error::{Error, Result};
pub use image::{BinaryMask, Image};
pub use mesh::{load_mesh, Material, Mesh};
pub use scene::SceneConfig;
pub use texture::{TexelMask, TextureMap};
