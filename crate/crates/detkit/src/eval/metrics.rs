//! Scalar metrics, precision-recall curves, and their aggregates.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::annotations::GroundTruthObject;
use crate::eval::{match_detections, Detection, DetectionVerdict, EvalError, IouComparison};

/// `TP / (TP + FP)`; 0 when no detections were made.
pub fn precision(tp: u64, fp: u64) -> f64 {
    if tp + fp == 0 {
        0.0
    } else {
        tp as f64 / (tp + fp) as f64
    }
}

/// `TP / (TP + FN)`; vacuously 1 when there were no objects to find.
pub fn recall(tp: u64, fn_: u64) -> f64 {
    if tp + fn_ == 0 {
        1.0
    } else {
        tp as f64 / (tp + fn_) as f64
    }
}

/// Harmonic mean of precision and recall; 0 when both are 0.
pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// How the area under the precision-recall curve is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ApMode {
    /// Monotone precision envelope integrated stepwise over recall.
    #[default]
    Continuous,
    /// Mean of the enveloped precision at recall 0.0, 0.1, ..., 1.0.
    ElevenPoint,
}

/// One point of a precision-recall curve, taken after one more counted
/// detection at score `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub recall: f64,
    pub precision: f64,
    pub cum_tp: usize,
    pub cum_fp: usize,
}

/// Precision-recall curve of one class over a whole dataset. Points follow
/// descending-score order, so recall never decreases along the curve.
/// Detections matched to difficult ground truths contribute no point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrCurve {
    pub points: Vec<PrPoint>,
    /// Recall denominator: non-difficult ground truths of the class.
    pub num_ground_truths: usize,
}

/// Builds the PR curve for one class.
///
/// `dets` are all detections of the class across the dataset; `gts` pairs
/// each ground truth of the class with its image id. Matching runs per image
/// at `iou_threshold`, then detections are traversed in descending global
/// score order (ties by ascending input index) accumulating TP/FP counts.
pub fn pr_curve(
    dets: &[Detection],
    gts: &[(String, GroundTruthObject)],
    iou_threshold: f64,
    comparison: IouComparison,
) -> Result<PrCurve, EvalError> {
    let class_name = dets
        .first()
        .map(|d| d.class_name.clone())
        .or_else(|| gts.first().map(|(_, g)| g.class_name.clone()))
        .unwrap_or_default();
    for d in dets {
        if d.class_name != class_name {
            return Err(EvalError::ClassMismatch {
                expected: class_name,
                found: d.class_name.clone(),
            });
        }
    }
    for (_, g) in gts {
        if g.class_name != class_name {
            return Err(EvalError::ClassMismatch {
                expected: class_name,
                found: g.class_name.clone(),
            });
        }
    }

    let num_ground_truths = gts.iter().filter(|(_, g)| !g.difficult).count();
    if num_ground_truths == 0 {
        return Err(EvalError::NoGroundTruth(class_name));
    }

    let verdicts = global_verdicts(dets, gts, iou_threshold, comparison)?;

    let mut order: Vec<usize> = (0..dets.len()).collect();
    order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .expect("scores validated finite")
            .then(a.cmp(&b))
    });

    let mut points = Vec::with_capacity(dets.len());
    let (mut cum_tp, mut cum_fp) = (0usize, 0usize);
    for &di in &order {
        match verdicts[di] {
            DetectionVerdict::TruePositive { .. } => cum_tp += 1,
            DetectionVerdict::FalsePositive => cum_fp += 1,
            DetectionVerdict::Ignored { .. } => continue,
        }
        points.push(PrPoint {
            threshold: dets[di].score,
            recall: cum_tp as f64 / num_ground_truths as f64,
            precision: cum_tp as f64 / (cum_tp + cum_fp) as f64,
            cum_tp,
            cum_fp,
        });
    }

    Ok(PrCurve {
        points,
        num_ground_truths,
    })
}

/// Per-detection verdicts for one class across the dataset, produced by
/// per-image matching and mapped back to the input detection order.
fn global_verdicts(
    dets: &[Detection],
    gts: &[(String, GroundTruthObject)],
    iou_threshold: f64,
    comparison: IouComparison,
) -> Result<Vec<DetectionVerdict>, EvalError> {
    let mut det_by_image: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, d) in dets.iter().enumerate() {
        det_by_image.entry(d.image_id.as_str()).or_default().push(i);
    }
    let mut gt_by_image: BTreeMap<&str, Vec<&GroundTruthObject>> = BTreeMap::new();
    for (image_id, g) in gts {
        gt_by_image.entry(image_id.as_str()).or_default().push(g);
    }

    let mut verdicts = vec![DetectionVerdict::FalsePositive; dets.len()];
    for (image_id, det_indices) in &det_by_image {
        let image_dets: Vec<Detection> =
            det_indices.iter().map(|&i| dets[i].clone()).collect();
        let image_gts: Vec<GroundTruthObject> = gt_by_image
            .get(image_id)
            .map(|v| v.iter().map(|&g| g.clone()).collect())
            .unwrap_or_default();
        let result =
            match_detections(&image_dets, &image_gts, image_id, iou_threshold, comparison)?;
        for (local, &global) in det_indices.iter().enumerate() {
            verdicts[global] = result.detections[local];
        }
    }
    Ok(verdicts)
}

/// Area under the PR curve.
///
/// Continuous mode applies the monotone precision envelope
/// `p~(r) = max over r' >= r of p(r')` and integrates it stepwise over
/// recall; the integral is accumulated from the integer TP increments so a
/// perfect detector yields exactly 1.0. Eleven-point mode averages the
/// enveloped precision at recall 0.0, 0.1, ..., 1.0. An empty curve (no
/// counted detections) has zero area.
pub fn average_precision(curve: &PrCurve, mode: ApMode) -> f64 {
    if curve.points.is_empty() || curve.num_ground_truths == 0 {
        return 0.0;
    }

    // Right-to-left running max = monotone precision envelope.
    let n = curve.points.len();
    let mut envelope = vec![0.0f64; n];
    let mut running = 0.0f64;
    for i in (0..n).rev() {
        running = running.max(curve.points[i].precision);
        envelope[i] = running;
    }

    match mode {
        ApMode::Continuous => {
            let mut weighted = 0.0f64;
            let mut prev_tp = 0usize;
            for (point, &env) in curve.points.iter().zip(&envelope) {
                let delta_tp = point.cum_tp - prev_tp;
                if delta_tp > 0 {
                    weighted += delta_tp as f64 * env;
                }
                prev_tp = point.cum_tp;
            }
            weighted / curve.num_ground_truths as f64
        }
        ApMode::ElevenPoint => {
            let n_gt = curve.num_ground_truths;
            let mut total = 0.0f64;
            for k in 0..=10usize {
                // recall_i >= k/10 compared exactly: 10 * tp_i >= k * n_gt.
                let best = curve
                    .points
                    .iter()
                    .zip(&envelope)
                    .find(|(p, _)| 10 * p.cum_tp >= k * n_gt)
                    .map(|(_, &env)| env)
                    .unwrap_or(0.0);
                total += best;
            }
            total / 11.0
        }
    }
}

/// Unweighted mean of per-class APs. Callers exclude classes without ground
/// truth before this point; an empty map is an input error.
pub fn mean_average_precision(per_class_ap: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
    if per_class_ap.is_empty() {
        return Err(EvalError::NoClassesWithGroundTruth);
    }
    Ok(per_class_ap.values().sum::<f64>() / per_class_ap.len() as f64)
}

/// COCO-convention object size strata by pixel area.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizeStratum {
    All,
    /// area < 32^2
    Small,
    /// 32^2 <= area <= 96^2
    Medium,
    /// area > 96^2
    Large,
}

impl SizeStratum {
    pub fn contains(self, gt: &GroundTruthObject) -> bool {
        self == SizeStratum::All || stratify_by_size(gt) == self
    }
}

/// Assigns a ground truth to its size stratum by pixel area.
pub fn stratify_by_size(gt: &GroundTruthObject) -> SizeStratum {
    let area = gt.box_.area();
    if area < 32.0 * 32.0 {
        SizeStratum::Small
    } else if area <= 96.0 * 96.0 {
        SizeStratum::Medium
    } else {
        SizeStratum::Large
    }
}

/// Average recall with at most `k` detections kept per image.
///
/// Per image only the `k` highest-scoring detections survive (ties by
/// ascending input index). For each IoU threshold, recall is the fraction of
/// the stratum's non-difficult ground truths that were matched; the result is
/// the mean over the thresholds. Returns the sentinel `-1.0` when the stratum
/// contains no non-difficult ground truths at all.
pub fn average_recall_at_k(
    dets: &[Detection],
    gts: &[(String, GroundTruthObject)],
    k: usize,
    iou_thresholds: &[f64],
    stratum: SizeStratum,
    comparison: IouComparison,
) -> Result<f64, EvalError> {
    if iou_thresholds.is_empty() {
        return Err(EvalError::BadConfig {
            reason: "AR needs at least one IoU threshold".into(),
        });
    }

    let stratum_total = gts
        .iter()
        .filter(|(_, g)| !g.difficult && stratum.contains(g))
        .count();
    if stratum_total == 0 {
        return Ok(-1.0);
    }

    // Keep the top-k detections of each image.
    let mut det_by_image: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, d) in dets.iter().enumerate() {
        det_by_image.entry(d.image_id.as_str()).or_default().push(i);
    }
    let mut kept: Vec<&Detection> = Vec::new();
    for indices in det_by_image.values() {
        let mut sorted = indices.clone();
        sorted.sort_by(|&a, &b| {
            dets[b]
                .score
                .partial_cmp(&dets[a].score)
                .expect("scores validated by matching")
                .then(a.cmp(&b))
        });
        kept.extend(sorted.into_iter().take(k).map(|i| &dets[i]));
    }

    let mut gt_by_image_class: BTreeMap<(&str, &str), Vec<&GroundTruthObject>> = BTreeMap::new();
    for (image_id, g) in gts {
        gt_by_image_class
            .entry((image_id.as_str(), g.class_name.as_str()))
            .or_default()
            .push(g);
    }
    let mut kept_by_image_class: BTreeMap<(&str, &str), Vec<&Detection>> = BTreeMap::new();
    for d in &kept {
        kept_by_image_class
            .entry((d.image_id.as_str(), d.class_name.as_str()))
            .or_default()
            .push(d);
    }

    let mut recall_sum = 0.0f64;
    for &threshold in iou_thresholds {
        let mut matched_in_stratum = 0usize;
        for ((image_id, class_name), group_gts) in &gt_by_image_class {
            let group_dets: Vec<Detection> = kept_by_image_class
                .get(&(*image_id, *class_name))
                .map(|v| v.iter().map(|&d| d.clone()).collect())
                .unwrap_or_default();
            let owned_gts: Vec<GroundTruthObject> =
                group_gts.iter().map(|&g| g.clone()).collect();
            let result =
                match_detections(&group_dets, &owned_gts, image_id, threshold, comparison)?;
            for (verdict, gt) in result.ground_truths.iter().zip(&owned_gts) {
                if matches!(verdict, crate::eval::GroundTruthVerdict::Matched { .. })
                    && stratum.contains(gt)
                {
                    matched_in_stratum += 1;
                }
            }
        }
        recall_sum += matched_in_stratum as f64 / stratum_total as f64;
    }
    Ok(recall_sum / iou_thresholds.len() as f64)
}

/// The COCO-style IoU threshold sweep 0.50, 0.55, ..., 0.95.
pub fn coco_iou_sweep() -> Vec<f64> {
    (0..10).map(|i| 0.5 + 0.05 * i as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BoundingBox;

    fn px(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> BoundingBox {
        BoundingBox::pixel(xmin, ymin, xmax, ymax).unwrap()
    }

    fn gt_at(image: &str, xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> (String, GroundTruthObject) {
        (
            image.to_string(),
            GroundTruthObject {
                class_name: "obj".into(),
                box_: px(xmin, ymin, xmax, ymax),
                difficult: false,
            },
        )
    }

    fn det_at(image: &str, xmin: f64, ymin: f64, xmax: f64, ymax: f64, score: f64) -> Detection {
        Detection::new(image, "obj", px(xmin, ymin, xmax, ymax), score).unwrap()
    }

    #[test]
    fn scalar_metric_identities() {
        assert_eq!(precision(8, 2), 0.8);
        assert_eq!(recall(3, 1), 0.75);
        assert_eq!(f1(0.5, 0.5), 0.5);
        assert_eq!(f1(1.0, 0.0), 0.0);
        assert_eq!(precision(0, 0), 0.0);
        assert_eq!(recall(0, 0), 1.0);
        assert_eq!(f1(0.0, 0.0), 0.0);
    }

    #[test]
    fn f1_equals_its_arguments_on_the_diagonal() {
        for v in [0.1, 0.25, 0.5, 0.9, 1.0] {
            assert!((f1(v, v) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn single_tp_curve() {
        let gts = vec![gt_at("a", 0.0, 0.0, 10.0, 10.0)];
        let dets = vec![det_at("a", 0.0, 0.0, 10.0, 10.0, 0.9)];
        let curve = pr_curve(&dets, &gts, 0.5, IouComparison::GreaterOrEqual).unwrap();
        assert_eq!(curve.points.len(), 1);
        assert_eq!(curve.points[0].recall, 1.0);
        assert_eq!(curve.points[0].precision, 1.0);
        assert_eq!(curve.points[0].threshold, 0.9);
    }

    #[test]
    fn tp_then_fp_curve_and_its_ap() {
        let gts = vec![gt_at("a", 0.0, 0.0, 10.0, 10.0)];
        let dets = vec![
            det_at("a", 0.0, 0.0, 10.0, 10.0, 0.9),
            det_at("a", 50.0, 50.0, 60.0, 60.0, 0.8),
        ];
        let curve = pr_curve(&dets, &gts, 0.5, IouComparison::GreaterOrEqual).unwrap();
        let rp: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.recall, p.precision)).collect();
        assert_eq!(rp, vec![(1.0, 1.0), (1.0, 0.5)]);
        // Envelope at recall 1 is 1.0, so the full area survives the trailing FP.
        assert_eq!(average_precision(&curve, ApMode::Continuous), 1.0);
    }

    #[test]
    fn fp_then_tp_curve() {
        let gts = vec![gt_at("a", 0.0, 0.0, 10.0, 10.0)];
        let dets = vec![
            det_at("a", 50.0, 50.0, 60.0, 60.0, 0.9),
            det_at("a", 0.0, 0.0, 10.0, 10.0, 0.8),
        ];
        let curve = pr_curve(&dets, &gts, 0.5, IouComparison::GreaterOrEqual).unwrap();
        let rp: Vec<(f64, f64)> = curve.points.iter().map(|p| (p.recall, p.precision)).collect();
        assert_eq!(rp, vec![(0.0, 0.0), (1.0, 0.5)]);
        assert_eq!(average_precision(&curve, ApMode::Continuous), 0.5);
    }

    #[test]
    fn recall_is_nondecreasing_along_curves() {
        let gts = vec![
            gt_at("a", 0.0, 0.0, 10.0, 10.0),
            gt_at("a", 20.0, 0.0, 30.0, 10.0),
            gt_at("b", 0.0, 0.0, 10.0, 10.0),
        ];
        let dets = vec![
            det_at("a", 0.0, 0.0, 10.0, 10.0, 0.6),
            det_at("b", 0.0, 0.0, 10.0, 10.0, 0.9),
            det_at("a", 40.0, 40.0, 50.0, 50.0, 0.7),
            det_at("a", 20.0, 0.0, 30.0, 10.0, 0.3),
        ];
        let curve = pr_curve(&dets, &gts, 0.5, IouComparison::GreaterOrEqual).unwrap();
        for pair in curve.points.windows(2) {
            assert!(pair[0].recall <= pair[1].recall);
        }
    }

    #[test]
    fn zero_ground_truths_is_an_error() {
        let dets = vec![det_at("a", 0.0, 0.0, 10.0, 10.0, 0.9)];
        assert!(matches!(
            pr_curve(&dets, &[], 0.5, IouComparison::GreaterOrEqual),
            Err(EvalError::NoGroundTruth(_))
        ));
    }

    #[test]
    fn all_false_positives_have_zero_ap() {
        let gts = vec![gt_at("a", 0.0, 0.0, 10.0, 10.0)];
        let dets = vec![det_at("a", 80.0, 80.0, 90.0, 90.0, 0.9)];
        let curve = pr_curve(&dets, &gts, 0.5, IouComparison::GreaterOrEqual).unwrap();
        assert_eq!(average_precision(&curve, ApMode::Continuous), 0.0);
        assert_eq!(average_precision(&curve, ApMode::ElevenPoint), 0.0);
    }

    #[test]
    fn eleven_point_ap_of_perfect_detector_is_one() {
        let gts = vec![
            gt_at("a", 0.0, 0.0, 10.0, 10.0),
            gt_at("b", 0.0, 0.0, 10.0, 10.0),
        ];
        let dets = vec![
            det_at("a", 0.0, 0.0, 10.0, 10.0, 1.0),
            det_at("b", 0.0, 0.0, 10.0, 10.0, 1.0),
        ];
        let curve = pr_curve(&dets, &gts, 0.5, IouComparison::GreaterOrEqual).unwrap();
        assert_eq!(average_precision(&curve, ApMode::ElevenPoint), 1.0);
        assert_eq!(average_precision(&curve, ApMode::Continuous), 1.0);
    }

    #[test]
    fn map_is_unweighted_mean() {
        let mut aps = BTreeMap::new();
        aps.insert("a".to_string(), 0.4);
        aps.insert("b".to_string(), 0.8);
        assert!((mean_average_precision(&aps).unwrap() - 0.6).abs() < 1e-12);

        aps.clear();
        aps.insert("only".to_string(), 0.7);
        assert_eq!(mean_average_precision(&aps).unwrap(), 0.7);

        aps.clear();
        assert!(mean_average_precision(&aps).is_err());
    }

    #[test]
    fn strata_boundaries_follow_the_area_rule() {
        let make = |area_side: f64| GroundTruthObject {
            class_name: "x".into(),
            box_: px(0.0, 0.0, area_side, area_side),
            difficult: false,
        };
        assert_eq!(stratify_by_size(&make(10.0)), SizeStratum::Small);
        assert_eq!(stratify_by_size(&make(32.0)), SizeStratum::Medium);
        assert_eq!(stratify_by_size(&make(96.0)), SizeStratum::Medium);
        assert_eq!(stratify_by_size(&make(100.0)), SizeStratum::Large);
    }

    fn ar(dets: &[Detection], gts: &[(String, GroundTruthObject)], k: usize, stratum: SizeStratum) -> f64 {
        average_recall_at_k(dets, gts, k, &[0.5], stratum, IouComparison::GreaterOrEqual).unwrap()
    }

    #[test]
    fn ar_with_all_matched_is_one_and_empty_stratum_is_sentinel() {
        let gts = vec![gt_at("a", 0.0, 0.0, 100.0, 100.0)];
        let dets = vec![det_at("a", 0.0, 0.0, 100.0, 100.0, 1.0)];
        assert_eq!(ar(&dets, &gts, 100, SizeStratum::All), 1.0);
        // The only object is large, so the small stratum holds no data.
        assert_eq!(ar(&dets, &gts, 100, SizeStratum::Small), -1.0);
    }

    #[test]
    fn top_k_truncation_halves_recall() {
        // Two objects per image, two accurate detections, but k = 1.
        let gts = vec![
            gt_at("a", 0.0, 0.0, 10.0, 10.0),
            gt_at("a", 20.0, 0.0, 30.0, 10.0),
        ];
        let dets = vec![
            det_at("a", 0.0, 0.0, 10.0, 10.0, 0.9),
            det_at("a", 20.0, 0.0, 30.0, 10.0, 0.8),
        ];
        assert_eq!(ar(&dets, &gts, 1, SizeStratum::All), 0.5);
        assert_eq!(ar(&dets, &gts, 2, SizeStratum::All), 1.0);
    }

    #[test]
    fn coco_sweep_has_ten_thresholds() {
        let sweep = coco_iou_sweep();
        assert_eq!(sweep.len(), 10);
        assert_eq!(sweep[0], 0.5);
        assert!((sweep[9] - 0.95).abs() < 1e-12);
    }
}
