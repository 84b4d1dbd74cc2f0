use crate::error::{Error, Result};

/// Pinhole camera intrinsics, pixels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CameraIntrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
}

impl CameraIntrinsics {
    pub fn new(fx: f64, fy: f64, cx: f64, cy: f64) -> Result<Self> {
        if !(fx.is_finite() && fy.is_finite() && cx.is_finite() && cy.is_finite())
            || fx <= 0.0
            || fy <= 0.0
        {
            return Err(Error::InvalidIntrinsics);
        }
        Ok(CameraIntrinsics { fx, fy, cx, cy })
    }
}
