//! Depth backprojection, shape-prior handling, and the seeded synthetic
//! scene oracle used for closed-loop verification of the benchmark.

mod backproject;
mod embeddings;
mod perturb;
mod priors;
mod synth;

pub use backproject::{backproject, render_depth};
pub use embeddings::{mean_embedding, LatentEmbeddingSet};
pub use perturb::{perturb_predictions, PerturbSpec};
pub use priors::{builtin_priors, load_prior, LoadedPrior, PRIOR_POINT_COUNT};
pub use synth::{
    render_scene_files, synth_intrinsics, synth_scenes, write_rendered_scenes, write_scenes,
    RenderedScene, SceneData, SceneGtInstanceRecord, SceneGtRecord, SceneInstance, SynthOutput,
    SynthSceneConfig, SYNTH_HEIGHT, SYNTH_WIDTH,
};

use crate::error::{Error, Result};

/// Dense uint16 depth map, millimeters; 0 marks invalid pixels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthImage {
    width: usize,
    height: usize,
    values: Vec<u16>,
}

impl DepthImage {
    pub fn new(width: usize, height: usize, values: Vec<u16>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig { reason: "image dimensions must be positive".into() });
        }
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                detail: format!("{}x{} image needs {} values, got {}", width, height, width * height, values.len()),
            });
        }
        Ok(DepthImage { width, height, values })
    }

    pub fn zeros(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![0; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Row-major pixel values.
    pub fn values(&self) -> &[u16] {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize) -> u16 {
        self.values[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: u16) {
        self.values[v * self.width + u] = value;
    }
}

/// Per-pixel boolean foreground mask for one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceMask {
    width: usize,
    height: usize,
    values: Vec<bool>,
}

impl InstanceMask {
    pub fn new(width: usize, height: usize, values: Vec<bool>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig { reason: "mask dimensions must be positive".into() });
        }
        if values.len() != width * height {
            return Err(Error::DimensionMismatch {
                detail: format!("{}x{} mask needs {} values, got {}", width, height, width * height, values.len()),
            });
        }
        Ok(InstanceMask { width, height, values })
    }

    pub fn filled(width: usize, height: usize, value: bool) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.values[v * self.width + u]
    }

    pub fn set(&mut self, u: usize, v: usize, value: bool) {
        self.values[v * self.width + u] = value;
    }

    pub fn matches_dimensions(&self, depth: &DepthImage) -> bool {
        self.width == depth.width && self.height == depth.height
    }
}
