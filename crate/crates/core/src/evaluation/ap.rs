//! Detection-to-ground-truth matching and average precision with all-point
//! interpolation (precision envelope).

use std::collections::BTreeMap;

use super::iou::oriented_iou;
use super::{rotation_error, translation_error, Category, Detection, GroundTruthInstance,
            ThresholdSpec};

/// Raw precision/recall arrays, one entry per detection in score order.
#[derive(Debug, Clone, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PrCurve {
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
}

/// Per-category and mean average precision for one threshold spec.
#[derive(Debug, Clone, PartialEq)]
pub struct ApResult {
    pub spec: ThresholdSpec,
    /// Percent AP; None where the category has no ground truth (undefined,
    /// excluded from the mean).
    pub per_category: BTreeMap<Category, Option<f64>>,
    /// Mean percent AP over the defined categories.
    pub mean: f64,
    pub curves: BTreeMap<Category, PrCurve>,
}

impl ApResult {
    pub fn undefined_categories(&self) -> Vec<Category> {
        self.per_category
            .iter()
            .filter(|(_, ap)| ap.is_none())
            .map(|(c, _)| *c)
            .collect()
    }
}

/// Scores detections against ground truth for one threshold spec.
///
/// Per category: detections sorted by descending score greedily claim the
/// unmatched same-image ground truth of maximal IoU; the match requires
/// IoU >= the spec's gate (the IoU threshold itself, or 0.1 for pose specs).
/// A matched detection is a true positive iff it additionally satisfies the
/// spec; everything else is a false positive.
pub fn compute_ap(
    dets: &[Detection],
    gts: &[GroundTruthInstance],
    spec: &ThresholdSpec,
) -> ApResult {
    let gate = spec.match_gate();
    let mut per_category = BTreeMap::new();
    let mut curves = BTreeMap::new();

    for category in Category::ALL {
        let mut gt_by_image: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        let mut n_gt = 0usize;
        for (i, gt) in gts.iter().enumerate() {
            if gt.category == category {
                gt_by_image.entry(gt.image_id.as_str()).or_default().push(i);
                n_gt += 1;
            }
        }
        if n_gt == 0 {
            per_category.insert(category, None);
            continue;
        }

        let mut cat_dets: Vec<&Detection> =
            dets.iter().filter(|d| d.category == category).collect();
        cat_dets.sort_by(|a, b| b.score.partial_cmp(&a.score).expect("finite scores"));

        let mut matched = vec![false; gts.len()];
        let mut tp_flags = Vec::with_capacity(cat_dets.len());
        for det in &cat_dets {
            let det_box = det.box3d();
            let mut best: Option<(usize, f64)> = None;
            if let Some(candidates) = gt_by_image.get(det.image_id.as_str()) {
                for &gi in candidates {
                    if matched[gi] {
                        continue;
                    }
                    let iou = oriented_iou(&det_box, &gts[gi].box3d());
                    if best.is_none_or(|(_, b)| iou > b) {
                        best = Some((gi, iou));
                    }
                }
            }
            let tp = match best {
                Some((gi, iou)) if iou >= gate => {
                    matched[gi] = true;
                    satisfies(spec, det, &gts[gi], iou)
                }
                _ => false,
            };
            tp_flags.push(tp);
        }

        let (ap, curve) = average_precision(&tp_flags, n_gt);
        per_category.insert(category, Some(ap));
        curves.insert(category, curve);
    }

    let defined: Vec<f64> = per_category.values().filter_map(|v| *v).collect();
    let mean = if defined.is_empty() {
        0.0
    } else {
        defined.iter().sum::<f64>() / defined.len() as f64
    };
    ApResult { spec: *spec, per_category, mean, curves }
}

fn satisfies(spec: &ThresholdSpec, det: &Detection, gt: &GroundTruthInstance, iou: f64) -> bool {
    match spec {
        ThresholdSpec::Iou { min_iou } => iou >= *min_iou,
        ThresholdSpec::Pose { max_deg, max_cm } => {
            let sym = gt.symmetry();
            rotation_error(det.pose.rotation(), gt.pose.rotation(), sym) <= *max_deg
                && translation_error(det.pose.translation(), gt.pose.translation()) <= *max_cm
        }
    }
}

/// Area under the precision-recall curve with all-point interpolation:
/// precision is replaced by its running maximum from the right and
/// integrated over recall increments. Returns percent.
fn average_precision(tp_flags: &[bool], n_gt: usize) -> (f64, PrCurve) {
    debug_assert!(n_gt > 0);
    let mut precision = Vec::with_capacity(tp_flags.len());
    let mut recall = Vec::with_capacity(tp_flags.len());
    let mut tp = 0usize;
    for (i, &flag) in tp_flags.iter().enumerate() {
        if flag {
            tp += 1;
        }
        precision.push(tp as f64 / (i + 1) as f64);
        recall.push(tp as f64 / n_gt as f64);
    }
    let mut envelope = precision.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (r, p) in recall.iter().zip(&envelope) {
        ap += (r - prev_recall) * p;
        prev_recall = *r;
    }
    (100.0 * ap, PrCurve { precision, recall })
}
