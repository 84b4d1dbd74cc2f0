//! Pure evaluators for the training losses and for the composition
//! P = A·(Mc + D) of prior, deformation field and soft correspondences.
//! No autodifferentiation; these are oracles for external training code.

use crate::error::{Error, Result};
use crate::geometry::{chamfer_distance, ChamferMode, Point3, PointCloud, Vec3};

/// Per-point displacements added to a shape prior, NOCS units.
#[derive(Debug, Clone, PartialEq)]
pub struct DeformationField(Vec<Vec3>);

impl DeformationField {
    pub fn new(displacements: Vec<Vec3>) -> Result<Self> {
        if let Some(index) =
            displacements.iter().position(|d| !d.iter().all(|v| v.is_finite()))
        {
            return Err(Error::NonFinitePoint { index });
        }
        Ok(DeformationField(displacements))
    }

    pub fn zeros(n: usize) -> Self {
        DeformationField(vec![Vec3::zeros(); n])
    }

    pub fn displacements(&self) -> &[Vec3] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Dense Nv×Nc row-stochastic soft assignment between observed points and
/// reconstructed-model points.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceMatrix {
    nv: usize,
    nc: usize,
    /// Row-major, length nv·nc.
    data: Vec<f64>,
}

/// Allowed deviation of each row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-6;

impl CorrespondenceMatrix {
    pub fn new(nv: usize, nc: usize, data: Vec<f64>) -> Result<Self> {
        if nv == 0 || nc == 0 || data.len() != nv * nc {
            return Err(Error::InvalidCorrespondenceMatrix {
                reason: format!("expected {}x{} = {} entries, got {}", nv, nc, nv * nc, data.len()),
            });
        }
        for (row, chunk) in data.chunks(nc).enumerate() {
            let mut sum = 0.0;
            for (col, &v) in chunk.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidCorrespondenceMatrix {
                        reason: format!("entry ({row}, {col}) = {v} is negative or non-finite"),
                    });
                }
                sum += v;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
                return Err(Error::InvalidCorrespondenceMatrix {
                    reason: format!("row {row} sums to {sum}, expected 1"),
                });
            }
        }
        Ok(CorrespondenceMatrix { nv, nc, data })
    }

    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn nc(&self) -> usize {
        self.nc
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.nc..(i + 1) * self.nc]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Loss weights (λ₁..λ₄); defaults are the reference configuration.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct LossWeights {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub lambda4: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { lambda1: 5.0, lambda2: 1.0, lambda3: 1e-4, lambda4: 0.01 }
    }
}

impl LossWeights {
    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda1, self.lambda2, self.lambda3, self.lambda4];
        if all.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidLossWeights);
        }
        Ok(())
    }
}

/// M = Mc + D, point-wise.
pub fn reconstruct_model(prior: &PointCloud, deformation: &DeformationField) -> Result<PointCloud> {
    if prior.len() != deformation.len() {
        return Err(Error::LengthMismatch { left: prior.len(), right: deformation.len() });
    }
    let points = prior
        .points()
        .iter()
        .zip(deformation.displacements())
        .map(|(p, d)| p + d)
        .collect();
    Ok(PointCloud::new_unchecked(points, prior.frame()))
}

/// P = A·M: soft-assigns each observed point a NOCS coordinate as a convex
/// combination of model points.
pub fn nocs_coordinates(a: &CorrespondenceMatrix, model: &PointCloud) -> Result<PointCloud> {
    if a.nc() != model.len() {
        return Err(Error::DimensionMismatch {
            detail: format!("matrix has {} columns but model has {} points", a.nc(), model.len()),
        });
    }
    let points = (0..a.nv())
        .map(|i| {
            let mut acc = Vec3::zeros();
            for (w, p) in a.row(i).iter().zip(model.points()) {
                acc += *w * p.coords;
            }
            Point3::from(acc)
        })
        .collect();
    Ok(PointCloud::new_unchecked(points, model.frame()))
}

/// Reconstruction loss: bidirectional sum-of-squared-nearest-neighbor
/// Chamfer distance.
pub fn loss_cd(model: &PointCloud, model_gt: &PointCloud) -> Result<f64> {
    chamfer_distance(model, model_gt, ChamferMode::Sum)
}

/// Correspondence loss: smooth-L1 per coordinate, summed over the three
/// coordinates and averaged over points. φ(e) = 5e² for |e| ≤ 0.1,
/// |e| − 0.05 otherwise; the two branches agree (value 0.05, slope 1) at
/// the knee.
pub fn loss_corr(p: &PointCloud, p_gt: &PointCloud) -> Result<f64> {
    if p.len() != p_gt.len() {
        return Err(Error::LengthMismatch { left: p.len(), right: p_gt.len() });
    }
    let total: f64 = p
        .points()
        .iter()
        .zip(p_gt.points())
        .map(|(x, y)| (0..3).map(|k| smooth_l1(x[k] - y[k])).sum::<f64>())
        .sum();
    Ok(total / p.len() as f64)
}

fn smooth_l1(e: f64) -> f64 {
    if e.abs() <= 0.1 {
        5.0 * e * e
    } else {
        e.abs() - 0.05
    }
}

/// Average row entropy of the correspondence matrix, natural log,
/// 0·log 0 := 0.
pub fn loss_entropy(a: &CorrespondenceMatrix) -> f64 {
    let total: f64 = a
        .data()
        .iter()
        .map(|&v| if v > 0.0 { -v * v.ln() } else { 0.0 })
        .sum();
    total / a.nv() as f64
}

/// Mean Euclidean norm of the deformation displacements.
pub fn loss_def(deformation: &DeformationField) -> f64 {
    if deformation.is_empty() {
        return 0.0;
    }
    let total: f64 = deformation.displacements().iter().map(|d| d.norm()).sum();
    total / deformation.len() as f64
}

/// λ₁·L_cd + λ₂·L_corr + λ₃·L_entropy + λ₄·L_def.
#[allow(clippy::too_many_arguments)]
pub fn total_loss(
    model: &PointCloud,
    model_gt: &PointCloud,
    p: &PointCloud,
    p_gt: &PointCloud,
    a: &CorrespondenceMatrix,
    deformation: &DeformationField,
    weights: &LossWeights,
) -> Result<f64> {
    weights.validate()?;
    Ok(weights.lambda1 * loss_cd(model, model_gt)?
        + weights.lambda2 * loss_corr(p, p_gt)?
        + weights.lambda3 * loss_entropy(a)
        + weights.lambda4 * loss_def(deformation))
}
