use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use super::{Point3, RotationMatrix, SimilarityTransform};
use crate::error::{Error, Result};

/// Coordinate frame a point cloud lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Metric camera frame, meters.
    Camera,
    /// Normalized object coordinate space, canonical units.
    Nocs,
}

/// Ordered, non-empty set of finite 3D points. Ordering is meaningful:
/// row i of a correspondence matrix refers to point i.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    points: Vec<Point3>,
    frame: Frame,
}

impl PointCloud {
    pub fn new(points: Vec<Point3>, frame: Frame) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyPointCloud);
        }
        if let Some(index) = points.iter().position(|p| !p.coords.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinitePoint { index });
        }
        Ok(PointCloud { points, frame })
    }

    /// Internal constructor for outputs derived from an already-valid cloud.
    pub(crate) fn new_unchecked(points: Vec<Point3>, frame: Frame) -> Self {
        PointCloud { points, frame }
    }

    pub fn points(&self) -> &[Point3] {
        &self.points
    }

    pub fn frame(&self) -> Frame {
        self.frame
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Axis-aligned bounding box as (min, max) corners.
    pub fn bbox(&self) -> (Point3, Point3) {
        let mut lo = self.points[0];
        let mut hi = self.points[0];
        for p in &self.points[1..] {
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        (lo, hi)
    }
}

/// Length of the axis-aligned bounding-box diagonal.
pub fn bbox_diameter(cloud: &PointCloud) -> f64 {
    let (lo, hi) = cloud.bbox();
    (hi - lo).norm()
}

/// Center of the axis-aligned bounding box.
pub fn bbox_center(cloud: &PointCloud) -> Point3 {
    let (lo, hi) = cloud.bbox();
    nalgebra::center(&lo, &hi)
}

/// Centers a model at its bounding-box center and scales it so the
/// bounding-box diagonal equals 1. Returns the normalized cloud (tagged NOCS)
/// and the transform that maps the input onto the output.
pub fn nocs_normalize(model: &PointCloud) -> Result<(PointCloud, SimilarityTransform)> {
    let diag = bbox_diameter(model);
    if diag <= 0.0 {
        return Err(Error::DegenerateModel);
    }
    let center = bbox_center(model);
    let scale = 1.0 / diag;
    let transform =
        SimilarityTransform::try_new(scale, RotationMatrix::identity(), -scale * center.coords)?;
    let normalized = transform.apply_cloud(model).with_frame(Frame::Nocs);
    Ok((normalized, transform))
}

/// Samples exactly `n` points: without replacement when the cloud has at
/// least `n` points, with replacement (repetition) otherwise. Deterministic
/// for a given seed.
pub fn resample(cloud: &PointCloud, n: usize, seed: u64) -> Result<PointCloud> {
    if n == 0 {
        return Err(Error::ZeroSampleCount);
    }
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let len = cloud.len();
    let points = if len >= n {
        rand::seq::index::sample(&mut rng, len, n)
            .iter()
            .map(|i| cloud.points()[i])
            .collect()
    } else {
        use rand::Rng;
        (0..n).map(|_| cloud.points()[rng.random_range(0..len)]).collect()
    };
    Ok(PointCloud::new_unchecked(points, cloud.frame()))
}
