use super::PointCloud;
use crate::error::{Error, Result};

/// Normalization of the two directed sums of squared nearest-neighbor
/// distances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChamferMode {
    /// Plain sum of both directed terms.
    Sum,
    /// Each directed term divided by its own cloud's cardinality before
    /// adding; matches per-point reporting of reconstruction quality.
    Mean,
}

/// Bidirectional Chamfer distance between two point clouds.
///
/// Brute-force nearest neighbors; clouds at the 1024-point working size stay
/// well inside the quadratic budget.
pub fn chamfer_distance(x: &PointCloud, y: &PointCloud, mode: ChamferMode) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptyPointCloud);
    }
    let xy = directed_sum(x, y);
    let yx = directed_sum(y, x);
    Ok(match mode {
        ChamferMode::Sum => xy + yx,
        ChamferMode::Mean => xy / x.len() as f64 + yx / y.len() as f64,
    })
}

/// Sum over points of `from` of the squared distance to the nearest point
/// in `to`.
fn directed_sum(from: &PointCloud, to: &PointCloud) -> f64 {
    from.points()
        .iter()
        .map(|p| {
            to.points()
                .iter()
                .map(|q| (p - q).norm_squared())
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}
