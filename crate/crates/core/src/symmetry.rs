//! Rotation canonicalization for objects with a continuous symmetry about
//! the NOCS y-axis, and the matching NOCS-label transform used for
//! supervision.

use crate::error::{Error, Result};
use crate::evaluation::Category;
use crate::geometry::{Mat3, PointCloud, RotationMatrix};

/// Rotational symmetry of an object category.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryClass {
    Asymmetric,
    /// Appearance preserved under any rotation about the NOCS y-axis.
    YAxisContinuous,
}

/// Result of canonicalizing a rotation against the y-axis symmetry group.
#[derive(Debug, Clone, Copy)]
pub struct MapResult {
    /// R·Ŝ, the canonical representative of R's equivalence class.
    pub mapped_rotation: RotationMatrix,
    /// The optimal symmetry-group element Ŝ (a rotation about y).
    pub s_hat: RotationMatrix,
    /// Angle of Ŝ, in (−π, π].
    pub theta_hat: f64,
    /// True when θ̂ was undefined (both atan2 arguments zero, e.g. a 180°
    /// flip about a horizontal axis); θ̂ = 0 is returned in that case.
    pub ambiguous: bool,
}

/// Rotation about the y-axis:
/// [[cosθ, 0, −sinθ], [0, 1, 0], [sinθ, 0, cosθ]].
pub fn y_rotation(theta: f64) -> RotationMatrix {
    let (s, c) = theta.sin_cos();
    RotationMatrix::from_matrix_unchecked(Mat3::new(
        c, 0.0, -s, //
        0.0, 1.0, 0.0, //
        s, 0.0, c,
    ))
}

/// Maps a rotation to the canonical representative of its y-symmetry
/// equivalence class: θ̂ = atan2(R₁₃ − R₃₁, R₁₁ + R₃₃), Ŝ = y_rotation(θ̂),
/// and the result is R·Ŝ. θ̂ maximizes Trace(R·S) over all y-rotations S,
/// equivalently minimizes ‖R·S − I‖_F.
pub fn map_rotation(rotation: &RotationMatrix) -> MapResult {
    let m = rotation.matrix();
    let sin_coeff = m[(0, 2)] - m[(2, 0)];
    let cos_coeff = m[(0, 0)] + m[(2, 2)];
    let ambiguous = sin_coeff.abs() < 1e-12 && cos_coeff.abs() < 1e-12;
    let mut theta_hat = if ambiguous { 0.0 } else { sin_coeff.atan2(cos_coeff) };
    if theta_hat <= -std::f64::consts::PI {
        theta_hat = std::f64::consts::PI;
    }
    let s_hat = y_rotation(theta_hat);
    MapResult { mapped_rotation: *rotation * s_hat, s_hat, theta_hat, ambiguous }
}

/// Rewrites ground-truth NOCS coordinates to match the canonicalized
/// rotation label: p ↦ Ŝᵀ·p for y-symmetric objects, identity otherwise.
pub fn canonicalize_nocs_labels(
    p_gt: &PointCloud,
    r_gt: &RotationMatrix,
    sym: SymmetryClass,
) -> PointCloud {
    match sym {
        SymmetryClass::Asymmetric => p_gt.clone(),
        SymmetryClass::YAxisContinuous => {
            let s_t = map_rotation(r_gt).s_hat.transpose();
            let points = p_gt.points().iter().map(|p| s_t.apply(p)).collect();
            PointCloud::new_unchecked(points, p_gt.frame())
        }
    }
}

/// Fixed category symmetry table. The mug is symmetric only while its
/// handle is not visible, so it needs the flag; all other categories must
/// not carry one.
pub fn symmetry_class_for(category: &str, handle_visible: Option<bool>) -> Result<SymmetryClass> {
    let cat: Category = category.parse()?;
    symmetry_class_for_category(cat, handle_visible)
}

pub fn symmetry_class_for_category(
    category: Category,
    handle_visible: Option<bool>,
) -> Result<SymmetryClass> {
    match (category, handle_visible) {
        (Category::Mug, Some(true)) => Ok(SymmetryClass::Asymmetric),
        (Category::Mug, Some(false)) => Ok(SymmetryClass::YAxisContinuous),
        (Category::Mug, None) => Err(Error::MissingHandleFlag),
        (_, Some(_)) => {
            Err(Error::UnexpectedHandleFlag { category: category.as_str().to_string() })
        }
        (Category::Bottle | Category::Bowl | Category::Can, None) => {
            Ok(SymmetryClass::YAxisContinuous)
        }
        (Category::Camera | Category::Laptop, None) => Ok(SymmetryClass::Asymmetric),
    }
}

/// One row of the compiled-in symmetry table, for inspection dumps.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SymmetryTableEntry {
    pub category: String,
    pub rule: String,
}

pub fn symmetry_table() -> Vec<SymmetryTableEntry> {
    Category::ALL
        .iter()
        .map(|c| SymmetryTableEntry {
            category: c.as_str().to_string(),
            rule: match c {
                Category::Bottle | Category::Bowl | Category::Can => "y_axis_continuous".into(),
                Category::Camera | Category::Laptop => "asymmetric".into(),
                Category::Mug => "y_axis_continuous unless handle visible".into(),
            },
        })
        .collect()
}
