//! Geometric and evaluation core for category-level 6D object pose and size
//! estimation: NOCS-space shape handling, prior-deformation composition, loss
//! evaluators, symmetry-canonical rotation mapping, Umeyama/RANSAC similarity
//! fitting, the symmetry-aware mAP benchmark protocol, and a seeded synthetic
//! scene oracle for closed-loop verification.

pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod geometry;
pub mod io;
pub mod losses;
pub mod registration;
pub mod symmetry;

pub use error::{Error, Result};
