//! Category shape priors: PLY loading with sanity warnings and built-in
//! procedural stand-ins for self-contained synthetic runs.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::path::Path;

use crate::error::Result;
use crate::evaluation::Category;
use crate::geometry::{bbox_diameter, nocs_normalize, resample, Frame, Point3, PointCloud};
use crate::io::ply;

/// Working point count for priors.
pub const PRIOR_POINT_COUNT: usize = 1024;

/// A prior plus any sanity warnings raised while loading it.
#[derive(Debug, Clone)]
pub struct LoadedPrior {
    pub cloud: PointCloud,
    pub warnings: Vec<String>,
}

/// Reads a NOCS-frame prior from an ASCII PLY, warning when the point count
/// is not 1024 or the bounding-box diagonal strays more than 5% from 1.
pub fn load_prior(path: &Path) -> Result<LoadedPrior> {
    let cloud = ply::read_ply(path, Frame::Nocs)?;
    let mut warnings = Vec::new();
    if cloud.len() != PRIOR_POINT_COUNT {
        warnings.push(format!(
            "prior '{}' has {} points, expected {PRIOR_POINT_COUNT}",
            path.display(),
            cloud.len()
        ));
    }
    let diag = bbox_diameter(&cloud);
    if (diag - 1.0).abs() > 0.05 {
        warnings.push(format!(
            "prior '{}' has bounding-box diagonal {diag:.4}, expected 1 within 5%",
            path.display()
        ));
    }
    Ok(LoadedPrior { cloud, warnings })
}

/// Deterministic procedural priors for all six categories: parametric
/// surfaces, NOCS-normalized and resampled to 1024 points.
pub fn builtin_priors() -> BTreeMap<Category, PointCloud> {
    Category::ALL
        .iter()
        .map(|&category| {
            let raw = raw_shape(category);
            let cloud = PointCloud::new(raw, Frame::Nocs).expect("builtin shapes are non-empty");
            let (normalized, _) = nocs_normalize(&cloud).expect("builtin shapes are non-degenerate");
            let seed = category as u64 + 101;
            let sampled =
                resample(&normalized, PRIOR_POINT_COUNT, seed).expect("positive count");
            (category, sampled)
        })
        .collect()
}

fn raw_shape(category: Category) -> Vec<Point3> {
    match category {
        Category::Bottle => bottle(),
        Category::Bowl => bowl(),
        Category::Camera => camera(),
        Category::Can => cylinder(0.35, 1.0, true),
        Category::Laptop => laptop(),
        Category::Mug => mug(),
    }
}

/// Lateral surface of a y-axis cylinder, optionally with end caps.
fn cylinder(radius: f64, height: f64, caps: bool) -> Vec<Point3> {
    let mut points = Vec::new();
    let rings = 24;
    let around = 48;
    for i in 0..rings {
        let y = height * (i as f64 / (rings - 1) as f64 - 0.5);
        for j in 0..around {
            let a = TAU * j as f64 / around as f64;
            points.push(Point3::new(radius * a.cos(), y, radius * a.sin()));
        }
    }
    if caps {
        for &y in &[-height / 2.0, height / 2.0] {
            for i in 1..6 {
                let r = radius * i as f64 / 6.0;
                for j in 0..16 {
                    let a = TAU * j as f64 / 16.0;
                    points.push(Point3::new(r * a.cos(), y, r * a.sin()));
                }
            }
        }
    }
    points
}

/// Tapered body with a narrow neck.
fn bottle() -> Vec<Point3> {
    let mut points = Vec::new();
    let rings = 32;
    let around = 40;
    for i in 0..rings {
        let t = i as f64 / (rings - 1) as f64;
        let y = t - 0.5;
        // wide body up to 60% height, then a tapered neck
        let radius = if t < 0.6 { 0.28 } else { 0.28 - 0.18 * ((t - 0.6) / 0.4) };
        for j in 0..around {
            let a = TAU * j as f64 / around as f64;
            points.push(Point3::new(radius * a.cos(), y, radius * a.sin()));
        }
    }
    points
}

/// Open hemisphere shell, opening up.
fn bowl() -> Vec<Point3> {
    let mut points = Vec::new();
    let rings = 20;
    let around = 48;
    for i in 0..rings {
        let phi = (std::f64::consts::PI / 2.0) * i as f64 / (rings - 1) as f64;
        let y = -0.5 * phi.cos();
        let r = 0.5 * phi.sin();
        for j in 0..around {
            let a = TAU * j as f64 / around as f64;
            points.push(Point3::new(r * a.cos(), y, r * a.sin()));
        }
    }
    points
}

/// Cuboid body with a lens barrel sticking out along +z; asymmetric.
fn camera() -> Vec<Point3> {
    let mut points = grid_box(0.9, 0.55, 0.35, 10);
    // lens barrel
    let lens_r = 0.16;
    let around = 24;
    for i in 0..8 {
        let z = 0.175 + 0.2 * i as f64 / 7.0;
        for j in 0..around {
            let a = TAU * j as f64 / around as f64;
            points.push(Point3::new(0.18 + lens_r * a.cos(), lens_r * a.sin(), z));
        }
    }
    points
}

/// Base slab plus tilted screen slab; asymmetric.
fn laptop() -> Vec<Point3> {
    let mut points = Vec::new();
    let n = 18;
    for i in 0..n {
        for j in 0..n {
            let x = i as f64 / (n - 1) as f64 - 0.5;
            let z = j as f64 / (n - 1) as f64 - 0.5;
            // keyboard base
            points.push(Point3::new(x, -0.25, z * 0.7));
            points.push(Point3::new(x, -0.21, z * 0.7));
            // screen tilted back from the base's rear edge
            let t = j as f64 / (n - 1) as f64;
            points.push(Point3::new(x, -0.25 + 0.62 * t, 0.35 + 0.18 * t));
        }
    }
    points
}

/// Cylindrical cup with a handle loop on +x; asymmetric geometry.
fn mug() -> Vec<Point3> {
    let mut points = cylinder(0.32, 0.8, false);
    // bottom cap
    for i in 1..6 {
        let r = 0.32 * i as f64 / 6.0;
        for j in 0..16 {
            let a = TAU * j as f64 / 16.0;
            points.push(Point3::new(r * a.cos(), -0.4, r * a.sin()));
        }
    }
    // handle: half-torus in the xz=0 plane
    let loop_r = 0.18;
    let tube_r = 0.045;
    for i in 0..14 {
        let phi = -std::f64::consts::FRAC_PI_2
            + std::f64::consts::PI * i as f64 / 13.0;
        let cx = 0.32 + loop_r * phi.cos() * 0.6;
        let cy = loop_r * phi.sin();
        for j in 0..8 {
            let a = TAU * j as f64 / 8.0;
            points.push(Point3::new(cx + tube_r * a.cos(), cy, tube_r * a.sin()));
        }
    }
    points
}

fn grid_box(w: f64, h: f64, d: f64, n: usize) -> Vec<Point3> {
    let mut points = Vec::new();
    let step = |k: usize| k as f64 / (n - 1) as f64 - 0.5;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = (step(i), step(j));
            points.push(Point3::new(a * w, b * h, -0.5 * d));
            points.push(Point3::new(a * w, b * h, 0.5 * d));
            points.push(Point3::new(a * w, -0.5 * h, b * d));
            points.push(Point3::new(a * w, 0.5 * h, b * d));
            points.push(Point3::new(-0.5 * w, a * h, b * d));
            points.push(Point3::new(0.5 * w, a * h, b * d));
        }
    }
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bbox_center;
    use approx::assert_abs_diff_eq;

    #[test]
    fn builtin_priors_cover_all_categories_and_are_normalized() {
        let priors = builtin_priors();
        assert_eq!(priors.len(), 6);
        for (category, cloud) in &priors {
            assert_eq!(cloud.len(), PRIOR_POINT_COUNT, "{category}");
            let diag = bbox_diameter(cloud);
            assert!((diag - 1.0).abs() < 0.05, "{category} diagonal {diag}");
            assert!(bbox_center(cloud).coords.norm() < 0.05, "{category} off-center");
        }
    }

    #[test]
    fn builtin_priors_are_deterministic() {
        let a = builtin_priors();
        let b = builtin_priors();
        for category in Category::ALL {
            assert_eq!(a[&category].points(), b[&category].points());
        }
    }

    #[test]
    fn load_prior_round_trip_no_warnings() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bowl.ply");
        let priors = builtin_priors();
        ply::write_ply(&path, &priors[&Category::Bowl]).unwrap();
        let loaded = load_prior(&path).unwrap();
        assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
        assert_eq!(loaded.cloud.points(), priors[&Category::Bowl].points());
    }

    #[test]
    fn load_prior_warns_on_count_and_diagonal() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("odd.ply");
        let cloud = PointCloud::new(
            (0..512)
                .map(|i| {
                    let a = TAU * i as f64 / 512.0;
                    Point3::new(a.cos(), a.sin(), 0.0)
                })
                .collect(),
            Frame::Nocs,
        )
        .unwrap();
        ply::write_ply(&path, &cloud).unwrap();
        let loaded = load_prior(&path).unwrap();
        assert_eq!(loaded.warnings.len(), 2, "{:?}", loaded.warnings);
        assert!(loaded.warnings[0].contains("512"));
        assert!(loaded.warnings[1].contains("diagonal"));
    }

    #[test]
    fn renormalized_prior_has_no_diagonal_warning() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("larger.ply");
        let big = PointCloud::new(
            (0..PRIOR_POINT_COUNT)
                .map(|i| {
                    let a = TAU * i as f64 / PRIOR_POINT_COUNT as f64;
                    Point3::new(3.0 * a.cos(), 2.0 * a.sin(), (3.0 * a).sin())
                })
                .collect(),
            Frame::Nocs,
        )
        .unwrap();
        let (normalized, _) = nocs_normalize(&big).unwrap();
        ply::write_ply(&path, &normalized).unwrap();
        let loaded = load_prior(&path).unwrap();
        assert!(loaded.warnings.is_empty(), "{:?}", loaded.warnings);
        assert_abs_diff_eq!(bbox_diameter(&loaded.cloud), 1.0, epsilon = 1e-9);
    }
}
