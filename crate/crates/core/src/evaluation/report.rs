//! Table-shaped benchmark reports, threshold-sweep curves, and the
//! reconstruction quality metric.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::ap::{compute_ap, ApResult, PrCurve};
use super::{Category, Detection, GroundTruthInstance, ThresholdSpec};
use crate::error::{Error, Result};
use crate::geometry::{chamfer_distance, ChamferMode, PointCloud};

/// Canonical report columns.
pub const REPORT_SPEC_NAMES: [&str; 7] =
    ["3D25", "3D50", "3D75", "5d2cm", "5d5cm", "10d2cm", "10d5cm"];

fn report_specs() -> [(String, ThresholdSpec); 7] {
    [
        ("3D25".into(), ThresholdSpec::Iou { min_iou: 0.25 }),
        ("3D50".into(), ThresholdSpec::Iou { min_iou: 0.50 }),
        ("3D75".into(), ThresholdSpec::Iou { min_iou: 0.75 }),
        ("5d2cm".into(), ThresholdSpec::Pose { max_deg: 5.0, max_cm: 2.0 }),
        ("5d5cm".into(), ThresholdSpec::Pose { max_deg: 5.0, max_cm: 5.0 }),
        ("10d2cm".into(), ThresholdSpec::Pose { max_deg: 10.0, max_cm: 2.0 }),
        ("10d5cm".into(), ThresholdSpec::Pose { max_deg: 10.0, max_cm: 5.0 }),
    ]
}

/// One report column: a named threshold with its AP breakdown.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct MetricReport {
    pub name: String,
    pub threshold: ThresholdSpec,
    /// Percent AP per category; null where the category has no ground truth.
    pub per_category_ap: BTreeMap<String, Option<f64>>,
    pub mean_ap: f64,
    pub undefined_categories: Vec<String>,
    pub pr: BTreeMap<String, PrCurve>,
}

impl MetricReport {
    fn from_ap(name: &str, result: ApResult) -> Self {
        MetricReport {
            name: name.to_string(),
            threshold: result.spec,
            per_category_ap: result
                .per_category
                .iter()
                .map(|(c, ap)| (c.as_str().to_string(), *ap))
                .collect(),
            mean_ap: result.mean,
            undefined_categories: result
                .undefined_categories()
                .iter()
                .map(|c| c.as_str().to_string())
                .collect(),
            pr: result
                .curves
                .into_iter()
                .map(|(c, curve)| (c.as_str().to_string(), curve))
                .collect(),
        }
    }
}

/// Per-category and mean AP at the seven canonical thresholds.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct EvaluationReport {
    pub categories: Vec<String>,
    pub metrics: Vec<MetricReport>,
}

impl EvaluationReport {
    pub fn metric(&self, name: &str) -> Option<&MetricReport> {
        self.metrics.iter().find(|m| m.name == name)
    }
}

/// Runs the seven canonical threshold specs.
pub fn evaluate_report(dets: &[Detection], gts: &[GroundTruthInstance]) -> EvaluationReport {
    let specs = report_specs();
    let metrics: Vec<MetricReport> = specs
        .par_iter()
        .map(|(name, spec)| MetricReport::from_ap(name, compute_ap(dets, gts, spec)))
        .collect();
    EvaluationReport {
        categories: Category::ALL.iter().map(|c| c.as_str().to_string()).collect(),
        metrics,
    }
}

/// Fixed-width text table, categories as rows and thresholds as columns,
/// with a trailing mean row. Undefined cells print as n/a.
pub fn render_table(report: &EvaluationReport) -> String {
    let mut out = String::new();
    let _ = write!(out, "{:<10}", "category");
    for m in &report.metrics {
        let _ = write!(out, "{:>9}", m.name);
    }
    out.push('\n');
    for category in &report.categories {
        let _ = write!(out, "{category:<10}");
        for m in &report.metrics {
            match m.per_category_ap.get(category).copied().flatten() {
                Some(ap) => {
                    let _ = write!(out, "{ap:>9.1}");
                }
                None => {
                    let _ = write!(out, "{:>9}", "n/a");
                }
            }
        }
        out.push('\n');
    }
    let _ = write!(out, "{:<10}", "mean");
    for m in &report.metrics {
        let _ = write!(out, "{:>9.1}", m.mean_ap);
    }
    out.push('\n');
    out
}

/// Step sizes for the AP-vs-threshold sweeps; ranges are fixed at
/// IoU 0..1, rotation 0..60 degrees, translation 0..10 cm.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SweepSpec {
    pub iou_step: f64,
    pub deg_step: f64,
    pub cm_step: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec { iou_step: 0.05, deg_step: 5.0, cm_step: 0.5 }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, step, max) in [
            ("iou_step", self.iou_step, 1.0),
            ("deg_step", self.deg_step, 60.0),
            ("cm_step", self.cm_step, 10.0),
        ] {
            if !(step.is_finite() && step > 0.0 && step <= max) {
                return Err(Error::InvalidThreshold {
                    reason: format!("{name} must be in (0, {max}], got {step}"),
                });
            }
        }
        Ok(())
    }
}

/// One row of a curve table.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CurvePoint {
    pub category: String,
    pub threshold: f64,
    /// Percent AP.
    pub ap: f64,
}

/// AP as a function of each swept threshold, the other pose threshold held
/// unconstrained.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct CurveTable {
    pub iou: Vec<CurvePoint>,
    pub rotation: Vec<CurvePoint>,
    pub translation: Vec<CurvePoint>,
}

impl CurveTable {
    pub fn to_csv(points: &[CurvePoint]) -> String {
        let mut out = String::from("category,threshold,ap\n");
        for p in points {
            let _ = writeln!(out, "{},{},{}", p.category, p.threshold, p.ap);
        }
        out
    }
}

pub fn ap_curves(
    dets: &[Detection],
    gts: &[GroundTruthInstance],
    sweep: &SweepSpec,
) -> Result<CurveTable> {
    sweep.validate()?;
    let iou_thresholds = steps(0.0, 1.0, sweep.iou_step);
    let deg_thresholds = steps(0.0, 60.0, sweep.deg_step);
    let cm_thresholds = steps(0.0, 10.0, sweep.cm_step);

    let iou_results: Vec<(f64, ApResult)> = iou_thresholds
        .par_iter()
        .map(|&t| (t, compute_ap(dets, gts, &ThresholdSpec::iou_for_sweep(t))))
        .collect();
    let rot_results: Vec<(f64, ApResult)> = deg_thresholds
        .par_iter()
        .map(|&t| {
            (t, compute_ap(dets, gts, &ThresholdSpec::Pose { max_deg: t, max_cm: f64::INFINITY }))
        })
        .collect();
    let trans_results: Vec<(f64, ApResult)> = cm_thresholds
        .par_iter()
        .map(|&t| {
            (t, compute_ap(dets, gts, &ThresholdSpec::Pose { max_deg: f64::INFINITY, max_cm: t }))
        })
        .collect();

    Ok(CurveTable {
        iou: tabulate(&iou_results),
        rotation: tabulate(&rot_results),
        translation: tabulate(&trans_results),
    })
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    let mut out: Vec<f64> = (0..=n).map(|k| lo + k as f64 * step).collect();
    if let Some(last) = out.last_mut() {
        *last = last.min(hi);
    }
    out
}

/// Category-major rows, then a "mean" pseudo-category.
fn tabulate(results: &[(f64, ApResult)]) -> Vec<CurvePoint> {
    let mut rows = Vec::new();
    for category in Category::ALL {
        for (threshold, result) in results {
            if let Some(ap) = result.per_category[&category] {
                rows.push(CurvePoint {
                    category: category.as_str().to_string(),
                    threshold: *threshold,
                    ap,
                });
            }
        }
    }
    for (threshold, result) in results {
        rows.push(CurvePoint { category: "mean".into(), threshold: *threshold, ap: result.mean });
    }
    rows
}

/// Per-category mean reconstruction quality: mean over instance pairs of the
/// per-point-normalized Chamfer distance, reported ×10³.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ReconstructionReport {
    pub per_category: BTreeMap<String, f64>,
    pub average: f64,
}

pub fn reconstruction_metric(
    recons: &BTreeMap<Category, Vec<(PointCloud, PointCloud)>>,
) -> Result<ReconstructionReport> {
    if recons.is_empty() {
        return Err(Error::EmptyInput { what: "no categories to evaluate".into() });
    }
    let mut per_category = BTreeMap::new();
    for (category, pairs) in recons {
        if pairs.is_empty() {
            return Err(Error::EmptyInput {
                what: format!("no reconstruction pairs for category '{category}'"),
            });
        }
        let mut total = 0.0;
        for (model, model_gt) in pairs {
            total += chamfer_distance(model, model_gt, ChamferMode::Mean)?;
        }
        per_category.insert(
            category.as_str().to_string(),
            1e3 * total / pairs.len() as f64,
        );
    }
    let average = per_category.values().sum::<f64>() / per_category.len() as f64;
    Ok(ReconstructionReport { per_category, average })
}
