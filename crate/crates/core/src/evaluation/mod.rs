//! Benchmark protocol: oriented 3D IoU, symmetry-aware rotation/translation
//! errors, detection-to-ground-truth matching, and mAP tables and curves.

mod ap;
mod iou;
mod report;

pub use ap::{compute_ap, ApResult, PrCurve};
pub use iou::oriented_iou;
pub use report::{
    ap_curves, evaluate_report, reconstruction_metric, render_table, CurvePoint, CurveTable,
    EvaluationReport, MetricReport, ReconstructionReport, SweepSpec, REPORT_SPEC_NAMES,
};

use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::{OrientedBox3D, Point3, RotationMatrix, SimilarityTransform, Vec3};
use crate::symmetry::{symmetry_class_for_category, SymmetryClass};

/// The fixed six-category benchmark vocabulary.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Bottle,
    Bowl,
    Camera,
    Can,
    Laptop,
    Mug,
}

impl Category {
    pub const ALL: [Category; 6] = [
        Category::Bottle,
        Category::Bowl,
        Category::Camera,
        Category::Can,
        Category::Laptop,
        Category::Mug,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Category::Bottle => "bottle",
            Category::Bowl => "bowl",
            Category::Camera => "camera",
            Category::Can => "can",
            Category::Laptop => "laptop",
            Category::Mug => "mug",
        }
    }
}

impl FromStr for Category {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bottle" => Ok(Category::Bottle),
            "bowl" => Ok(Category::Bowl),
            "camera" => Ok(Category::Camera),
            "can" => Ok(Category::Can),
            "laptop" => Ok(Category::Laptop),
            "mug" => Ok(Category::Mug),
            other => Err(Error::UnknownCategory { name: other.to_string() }),
        }
    }
}

impl std::fmt::Display for Category {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A scored pose-and-size prediction for one object instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub image_id: String,
    pub category: Category,
    pub score: f64,
    pub pose: SimilarityTransform,
    /// Object size in NOCS units; metric extents are scale × nocs_extents.
    pub nocs_extents: Vec3,
}

impl Detection {
    pub fn try_new(
        image_id: String,
        category: Category,
        score: f64,
        pose: SimilarityTransform,
        nocs_extents: Vec3,
    ) -> Result<Self> {
        if !(score.is_finite() && (0.0..=1.0).contains(&score)) {
            return Err(Error::InvalidRecord {
                location: format!("detection in image '{image_id}'"),
                reason: format!("score {score} outside [0, 1]"),
            });
        }
        validate_extents(&image_id, &nocs_extents)?;
        Ok(Detection { image_id, category, score, pose, nocs_extents })
    }

    /// Amodal metric box: centered at the translation, oriented by the pose
    /// rotation, extents scaled from NOCS units.
    pub fn box3d(&self) -> OrientedBox3D {
        detection_box(&self.pose, &self.nocs_extents)
    }
}

/// Ground-truth instance; `handle_visible` present iff the category is mug.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthInstance {
    pub image_id: String,
    pub category: Category,
    pub pose: SimilarityTransform,
    pub nocs_extents: Vec3,
    pub handle_visible: Option<bool>,
}

impl GroundTruthInstance {
    pub fn try_new(
        image_id: String,
        category: Category,
        pose: SimilarityTransform,
        nocs_extents: Vec3,
        handle_visible: Option<bool>,
    ) -> Result<Self> {
        validate_extents(&image_id, &nocs_extents)?;
        // Validates the handle flag against the category table.
        symmetry_class_for_category(category, handle_visible)?;
        Ok(GroundTruthInstance { image_id, category, pose, nocs_extents, handle_visible })
    }

    pub fn box3d(&self) -> OrientedBox3D {
        detection_box(&self.pose, &self.nocs_extents)
    }

    pub fn symmetry(&self) -> SymmetryClass {
        symmetry_class_for_category(self.category, self.handle_visible)
            .expect("validated at construction")
    }
}

fn validate_extents(image_id: &str, extents: &Vec3) -> Result<()> {
    if !extents.iter().all(|e| e.is_finite() && *e > 0.0) {
        return Err(Error::InvalidRecord {
            location: format!("instance in image '{image_id}'"),
            reason: "extents must be positive".into(),
        });
    }
    Ok(())
}

/// The metric amodal box induced by a pose and NOCS-unit extents.
pub fn detection_box(pose: &SimilarityTransform, nocs_extents: &Vec3) -> OrientedBox3D {
    OrientedBox3D {
        center: Point3::from(*pose.translation()),
        rotation: *pose.rotation(),
        extents: pose.scale() * nocs_extents,
    }
}

/// Correctness criterion for a matched detection.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ThresholdSpec {
    Iou { min_iou: f64 },
    Pose { max_deg: f64, max_cm: f64 },
}

impl ThresholdSpec {
    pub fn iou(min_iou: f64) -> Result<Self> {
        if !(min_iou.is_finite() && min_iou > 0.0 && min_iou <= 1.0) {
            return Err(Error::InvalidThreshold {
                reason: format!("IoU threshold must be in (0, 1], got {min_iou}"),
            });
        }
        Ok(ThresholdSpec::Iou { min_iou })
    }

    /// Sweep-only constructor: additionally admits 0 (per-curve origin).
    pub(crate) fn iou_for_sweep(min_iou: f64) -> Self {
        ThresholdSpec::Iou { min_iou }
    }

    pub fn pose(max_deg: f64, max_cm: f64) -> Result<Self> {
        if !(max_deg.is_finite() && max_deg > 0.0) || !(max_cm.is_finite() && max_cm > 0.0) {
            return Err(Error::InvalidThreshold {
                reason: format!("pose thresholds must be positive, got {max_deg}°, {max_cm}cm"),
            });
        }
        Ok(ThresholdSpec::Pose { max_deg, max_cm })
    }

    /// Minimum IoU for a detection to claim a ground-truth instance: the IoU
    /// threshold itself for IoU specs, 0.1 for pose specs.
    pub fn match_gate(&self) -> f64 {
        match self {
            ThresholdSpec::Iou { min_iou } => *min_iou,
            ThresholdSpec::Pose { .. } => 0.1,
        }
    }
}

/// Rotation error in degrees. Asymmetric: geodesic angle of RpᵀRg.
/// Y-axis-symmetric: angle between the rotated symmetry axes, which
/// discards rotation about y.
pub fn rotation_error(
    predicted: &RotationMatrix,
    truth: &RotationMatrix,
    sym: SymmetryClass,
) -> f64 {
    match sym {
        SymmetryClass::Asymmetric => predicted.angle_to(truth).to_degrees(),
        SymmetryClass::YAxisContinuous => {
            let yp = predicted.matrix() * Vec3::y();
            let yg = truth.matrix() * Vec3::y();
            yp.dot(&yg).clamp(-1.0, 1.0).acos().to_degrees()
        }
    }
}

/// Translation error in centimeters (inputs in meters).
pub fn translation_error(predicted: &Vec3, truth: &Vec3) -> f64 {
    100.0 * (predicted - truth).norm()
}
