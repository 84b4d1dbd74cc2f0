//! Similarity-transform recovery from NOCS-coordinate / observed-point
//! correspondences: closed-form Umeyama solve plus seeded RANSAC around it.

use nalgebra::Vector3;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Error, Result};
use crate::geometry::{bbox_diameter, Mat3, PointCloud, RotationMatrix, SimilarityTransform, Vec3};

/// Paired points: `src` in NOCS coordinates, `dst` observed in the camera
/// frame, index-aligned.
#[derive(Debug, Clone)]
pub struct CorrespondenceSet {
    src: PointCloud,
    dst: PointCloud,
}

impl CorrespondenceSet {
    pub fn new(src: PointCloud, dst: PointCloud) -> Result<Self> {
        if src.len() != dst.len() {
            return Err(Error::LengthMismatch { left: src.len(), right: dst.len() });
        }
        if src.len() < 3 {
            return Err(Error::DegenerateConfiguration {
                reason: format!("need at least 3 correspondences, got {}", src.len()),
            });
        }
        Ok(CorrespondenceSet { src, dst })
    }

    pub fn src(&self) -> &PointCloud {
        &self.src
    }

    pub fn dst(&self) -> &PointCloud {
        &self.dst
    }

    pub fn len(&self) -> usize {
        self.src.len()
    }

    pub fn is_empty(&self) -> bool {
        self.src.is_empty()
    }

    /// Subset by indices; indices must be in range.
    fn subset(&self, indices: &[usize]) -> (Vec<nalgebra::Point3<f64>>, Vec<nalgebra::Point3<f64>>) {
        let src = indices.iter().map(|&i| self.src.points()[i]).collect();
        let dst = indices.iter().map(|&i| self.dst.points()[i]).collect();
        (src, dst)
    }
}

/// RANSAC configuration. Defaults: 5-point hypotheses, 128 iterations,
/// inlier threshold 10% of the observed cloud's bounding-box diameter.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct RansacParams {
    pub sample_size: usize,
    pub max_iterations: usize,
    pub inlier_fraction_of_diameter: f64,
    pub seed: u64,
}

impl Default for RansacParams {
    fn default() -> Self {
        RansacParams {
            sample_size: 5,
            max_iterations: 128,
            inlier_fraction_of_diameter: 0.10,
            seed: 0,
        }
    }
}

impl RansacParams {
    pub fn validate(&self) -> Result<()> {
        if self.sample_size < 3 {
            return Err(Error::InvalidRansacParams {
                reason: format!("sample_size must be >= 3, got {}", self.sample_size),
            });
        }
        if self.max_iterations < 1 {
            return Err(Error::InvalidRansacParams { reason: "max_iterations must be >= 1".into() });
        }
        if !(self.inlier_fraction_of_diameter > 0.0 && self.inlier_fraction_of_diameter < 1.0) {
            return Err(Error::InvalidRansacParams {
                reason: format!(
                    "inlier_fraction_of_diameter must be in (0, 1), got {}",
                    self.inlier_fraction_of_diameter
                ),
            });
        }
        Ok(())
    }
}

/// Consensus inlier ratio at which hypothesis generation stops early.
const EARLY_EXIT_INLIER_RATIO: f64 = 0.95;

/// Result of a robust fit.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseFitResult {
    pub transform: SimilarityTransform,
    /// Aligned with the correspondence set; true where the residual under
    /// `transform` is within the inlier threshold.
    pub inlier_mask: Vec<bool>,
    pub iterations_run: usize,
    /// Root-mean-square residual over the inliers, meters.
    pub inlier_rms: f64,
}

impl PoseFitResult {
    pub fn inlier_count(&self) -> usize {
        self.inlier_mask.iter().filter(|&&b| b).count()
    }
}

/// Closed-form least-squares similarity transform (s, R, t) minimizing
/// Σᵢ ‖dstᵢ − (s·R·srcᵢ + t)‖², with the reflection-correcting sign matrix
/// applied so det(R) = +1.
pub fn umeyama(corr: &CorrespondenceSet) -> Result<SimilarityTransform> {
    umeyama_points(corr.src.points(), corr.dst.points())
}

fn umeyama_points(
    src: &[nalgebra::Point3<f64>],
    dst: &[nalgebra::Point3<f64>],
) -> Result<SimilarityTransform> {
    if src.len() != dst.len() {
        return Err(Error::LengthMismatch { left: src.len(), right: dst.len() });
    }
    let n = src.len();
    if n < 3 {
        return Err(Error::DegenerateConfiguration {
            reason: format!("need at least 3 correspondences, got {n}"),
        });
    }
    let inv_n = 1.0 / n as f64;
    let src_mean: Vec3 = src.iter().map(|p| p.coords).sum::<Vec3>() * inv_n;
    let dst_mean: Vec3 = dst.iter().map(|p| p.coords).sum::<Vec3>() * inv_n;

    let mut src_var = 0.0;
    let mut cov = Mat3::zeros();
    for (p, q) in src.iter().zip(dst) {
        let sp = p.coords - src_mean;
        let dp = q.coords - dst_mean;
        src_var += sp.norm_squared();
        cov += dp * sp.transpose();
    }
    src_var *= inv_n;
    cov *= inv_n;

    if src_var <= f64::EPSILON {
        return Err(Error::DegenerateConfiguration { reason: "source points coincide".into() });
    }

    let svd = cov.svd(true, true);
    let (u, v_t, sigma) = sort_svd(
        svd.u.expect("svd requested u"),
        svd.v_t.expect("svd requested v_t"),
        svd.singular_values,
    );

    // Rank of the cross-covariance must be at least 2 for the rotation to be
    // determined (collinear source points leave it underconstrained).
    if sigma[1] <= sigma[0].max(f64::EPSILON) * 1e-9 {
        return Err(Error::DegenerateConfiguration {
            reason: "source points collinear or coincident (covariance rank < 2)".into(),
        });
    }

    // Reflection correction: flip the direction paired with the smallest
    // singular value when det(U)·det(V) = −1.
    let sign = if u.determinant() * v_t.determinant() < 0.0 { -1.0 } else { 1.0 };
    let d = Mat3::from_diagonal(&Vector3::new(1.0, 1.0, sign));
    let rotation = RotationMatrix::from_matrix_unchecked(u * d * v_t);
    let scale = (sigma[0] + sigma[1] + sign * sigma[2]) / src_var;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Error::DegenerateConfiguration {
            reason: format!("recovered nonpositive scale {scale}"),
        });
    }
    let translation = dst_mean - scale * rotation.apply_vec(&src_mean);
    SimilarityTransform::try_new(scale, rotation, translation)
}

/// Sorts singular values descending, permuting the factor columns/rows in
/// step so U·Σ·Vᵀ is preserved.
fn sort_svd(u: Mat3, v_t: Mat3, sigma: Vector3<f64>) -> (Mat3, Mat3, [f64; 3]) {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| sigma[b].partial_cmp(&sigma[a]).unwrap());
    if order == [0, 1, 2] {
        return (u, v_t, [sigma[0], sigma[1], sigma[2]]);
    }
    let mut u2 = Mat3::zeros();
    let mut v_t2 = Mat3::zeros();
    let mut s2 = [0.0; 3];
    for (k, &i) in order.iter().enumerate() {
        u2.set_column(k, &u.column(i));
        v_t2.set_row(k, &v_t.row(i));
        s2[k] = sigma[i];
    }
    (u2, v_t2, s2)
}

/// Seeded RANSAC around the Umeyama solver.
///
/// Draws up to `max_iterations` hypotheses of `sample_size` distinct pairs,
/// stopping early once a hypothesis reaches a 0.95 inlier ratio. Inlier test:
/// ‖dstᵢ − T(srcᵢ)‖ ≤ fraction × bbox_diameter(dst). The best hypothesis
/// (most inliers, ties broken by lower inlier RMS then lower hypothesis
/// index) is refit on its inliers; the returned mask and RMS are recomputed
/// under the refit transform so every reported inlier satisfies the
/// threshold under the reported transform.
pub fn ransac_fit(corr: &CorrespondenceSet, params: &RansacParams) -> Result<PoseFitResult> {
    params.validate()?;
    let n = corr.len();
    if n < params.sample_size {
        return Err(Error::DegenerateConfiguration {
            reason: format!(
                "need at least sample_size = {} correspondences, got {n}",
                params.sample_size
            ),
        });
    }
    let threshold = params.inlier_fraction_of_diameter * bbox_diameter(corr.dst());
    let mut rng = ChaCha12Rng::seed_from_u64(params.seed);

    struct Best {
        transform: SimilarityTransform,
        mask: Vec<bool>,
        count: usize,
        rms: f64,
    }
    let mut best: Option<Best> = None;
    let mut iterations_run = 0usize;

    for _ in 0..params.max_iterations {
        iterations_run += 1;
        let indices: Vec<usize> =
            rand::seq::index::sample(&mut rng, n, params.sample_size).into_vec();
        let (src_sub, dst_sub) = corr.subset(&indices);
        // Degenerate samples are skipped, not treated as failures.
        let Ok(hypothesis) = umeyama_points(&src_sub, &dst_sub) else { continue };
        let (mask, count, rms) = score(corr, &hypothesis, threshold);
        let is_better = match &best {
            None => true,
            Some(b) => count > b.count || (count == b.count && rms < b.rms),
        };
        if is_better {
            best = Some(Best { transform: hypothesis, mask, count, rms });
        }
        if count as f64 / n as f64 >= EARLY_EXIT_INLIER_RATIO {
            break;
        }
    }

    let best = match best {
        Some(b) if b.count >= params.sample_size => b,
        other => {
            return Err(Error::FitFailure {
                best_inlier_count: other.as_ref().map_or(0, |b| b.count),
                required: params.sample_size,
                iterations_run,
                best_transform: other.map(|b| Box::new(b.transform)),
            })
        }
    };

    // Final refit on the winning hypothesis's inliers.
    let inlier_indices: Vec<usize> =
        best.mask.iter().enumerate().filter(|(_, &m)| m).map(|(i, _)| i).collect();
    let (src_in, dst_in) = corr.subset(&inlier_indices);
    let refit = umeyama_points(&src_in, &dst_in).unwrap_or(best.transform);
    let (refit_mask, refit_count, refit_rms) = score(corr, &refit, threshold);

    // Keep the hypothesis fit if the refit somehow shed consensus below the
    // minimum; both alternatives satisfy residual <= threshold on their mask.
    let result = if refit_count >= params.sample_size {
        PoseFitResult {
            transform: refit,
            inlier_mask: refit_mask,
            iterations_run,
            inlier_rms: refit_rms,
        }
    } else {
        PoseFitResult {
            transform: best.transform,
            inlier_mask: best.mask,
            iterations_run,
            inlier_rms: best.rms,
        }
    };
    Ok(result)
}

fn score(
    corr: &CorrespondenceSet,
    transform: &SimilarityTransform,
    threshold: f64,
) -> (Vec<bool>, usize, f64) {
    let mut mask = Vec::with_capacity(corr.len());
    let mut count = 0usize;
    let mut sq_sum = 0.0;
    for (s, d) in corr.src().points().iter().zip(corr.dst().points()) {
        let r2 = (d - transform.apply(s)).norm_squared();
        let inlier = r2.sqrt() <= threshold;
        if inlier {
            count += 1;
            sq_sum += r2;
        }
        mask.push(inlier);
    }
    let rms = if count > 0 { (sq_sum / count as f64).sqrt() } else { f64::INFINITY };
    (mask, count, rms)
}
