//! Whole-dataset evaluation: composes matching, curves, and aggregates into
//! one report.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::annotations::{GroundTruthObject, ImageAnnotation};
use crate::eval::{
    average_precision, average_recall_at_k, f1, match_detections, mean_average_precision,
    pr_curve, precision, recall, ApMode, Detection, EvalError, IouComparison, PrCurve,
    SizeStratum,
};

/// Evaluation knobs, echoed verbatim into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Matching threshold for TP/FP decisions and the PR curves.
    pub iou_threshold: f64,
    /// Whether matching uses `>=` (default) or strict `>`.
    #[serde(default)]
    pub iou_comparison: IouComparison,
    #[serde(default)]
    pub ap_mode: ApMode,
    /// Detections kept per image for average recall.
    pub ar_k: usize,
    /// IoU thresholds averaged by AR; defaults to the matching threshold only.
    pub ar_iou_thresholds: Vec<f64>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            iou_threshold: 0.5,
            iou_comparison: IouComparison::GreaterOrEqual,
            ap_mode: ApMode::Continuous,
            ar_k: 100,
            ar_iou_thresholds: vec![0.5],
        }
    }
}

impl EvalConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let bad = |reason: String| Err(EvalError::BadConfig { reason });
        if !(self.iou_threshold > 0.0 && self.iou_threshold < 1.0) {
            return bad(format!(
                "iou threshold {} must lie in (0, 1)",
                self.iou_threshold
            ));
        }
        if self.ar_k < 1 {
            return bad("ar_k must be >= 1".into());
        }
        if self.ar_iou_thresholds.is_empty() {
            return bad("ar_iou_thresholds must be nonempty".into());
        }
        for &t in &self.ar_iou_thresholds {
            if !(t > 0.0 && t < 1.0) {
                return bad(format!("AR IoU threshold {t} must lie in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// Per-class confusion counts and curve metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    /// Non-difficult ground truths of the class.
    pub ground_truths: usize,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    /// Detections matched to difficult ground truths.
    pub ignored_detections: usize,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Absent for classes with no ground truth (excluded from mAP).
    pub average_precision: Option<f64>,
    pub pr_curve: PrCurve,
}

/// Average recall per size stratum; `-1.0` marks a stratum with no data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArReport {
    pub all: f64,
    pub small: f64,
    pub medium: f64,
    pub large: f64,
}

/// The complete evaluation output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub config: EvalConfig,
    pub per_class: BTreeMap<String, ClassMetrics>,
    /// Mean AP over classes with at least one ground truth.
    pub mean_average_precision: f64,
    pub average_recall_at_k: ArReport,
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes cleanly")
    }
}

/// Evaluates a detection set against annotated ground truth.
///
/// Every detection's `image_id` must match an annotation filename; annotations
/// must be unique per filename; at least one class needs ground truth (there
/// is nothing to evaluate otherwise). The result is deterministic for
/// identical inputs.
pub fn evaluate_dataset(
    dets: &[Detection],
    anns: &[ImageAnnotation],
    config: &EvalConfig,
) -> Result<EvaluationReport, EvalError> {
    config.validate()?;

    let mut by_file: HashMap<&str, &ImageAnnotation> = HashMap::new();
    for ann in anns {
        if by_file.insert(ann.filename.as_str(), ann).is_some() {
            return Err(EvalError::DuplicateAnnotation(ann.filename.clone()));
        }
    }

    let mut unknown: BTreeSet<String> = BTreeSet::new();
    for det in dets {
        if !by_file.contains_key(det.image_id.as_str()) {
            unknown.insert(det.image_id.clone());
        }
    }
    if !unknown.is_empty() {
        return Err(EvalError::UnknownImageIds(unknown.into_iter().collect()));
    }

    let mut classes: BTreeSet<&str> = BTreeSet::new();
    for ann in anns {
        classes.extend(ann.objects.iter().map(|o| o.class_name.as_str()));
    }
    classes.extend(dets.iter().map(|d| d.class_name.as_str()));

    let all_gts: Vec<(String, GroundTruthObject)> = anns
        .iter()
        .flat_map(|ann| {
            ann.objects
                .iter()
                .map(move |o| (ann.filename.clone(), o.clone()))
        })
        .collect();

    let mut per_class = BTreeMap::new();
    let mut aps: BTreeMap<String, f64> = BTreeMap::new();

    for class in classes {
        let class_dets: Vec<Detection> = dets
            .iter()
            .filter(|d| d.class_name == class)
            .cloned()
            .collect();
        let class_gts: Vec<(String, GroundTruthObject)> = all_gts
            .iter()
            .filter(|(_, g)| g.class_name == class)
            .cloned()
            .collect();
        let n_gt = class_gts.iter().filter(|(_, g)| !g.difficult).count();

        let counts = class_confusion_counts(&class_dets, &class_gts, config)?;

        let (curve, ap) = if n_gt > 0 {
            let curve = pr_curve(
                &class_dets,
                &class_gts,
                config.iou_threshold,
                config.iou_comparison,
            )?;
            let ap = average_precision(&curve, config.ap_mode);
            (curve, Some(ap))
        } else {
            (
                PrCurve {
                    points: Vec::new(),
                    num_ground_truths: 0,
                },
                None,
            )
        };
        if let Some(ap) = ap {
            aps.insert(class.to_string(), ap);
        }

        let p = precision(counts.tp as u64, counts.fp as u64);
        let r = recall(counts.tp as u64, counts.fn_ as u64);
        per_class.insert(
            class.to_string(),
            ClassMetrics {
                ground_truths: n_gt,
                true_positives: counts.tp,
                false_positives: counts.fp,
                false_negatives: counts.fn_,
                ignored_detections: counts.ignored,
                precision: p,
                recall: r,
                f1: f1(p, r),
                average_precision: ap,
                pr_curve: curve,
            },
        );
    }

    let map = mean_average_precision(&aps)?;

    let ar = |stratum: SizeStratum| -> Result<f64, EvalError> {
        average_recall_at_k(
            dets,
            &all_gts,
            config.ar_k,
            &config.ar_iou_thresholds,
            stratum,
            config.iou_comparison,
        )
    };
    let average_recall = ArReport {
        all: ar(SizeStratum::All)?,
        small: ar(SizeStratum::Small)?,
        medium: ar(SizeStratum::Medium)?,
        large: ar(SizeStratum::Large)?,
    };

    Ok(EvaluationReport {
        config: config.clone(),
        per_class,
        mean_average_precision: map,
        average_recall_at_k: average_recall,
    })
}

struct ConfusionCounts {
    tp: usize,
    fp: usize,
    fn_: usize,
    ignored: usize,
}

fn class_confusion_counts(
    dets: &[Detection],
    gts: &[(String, GroundTruthObject)],
    config: &EvalConfig,
) -> Result<ConfusionCounts, EvalError> {
    let mut det_by_image: BTreeMap<&str, Vec<Detection>> = BTreeMap::new();
    for d in dets {
        det_by_image
            .entry(d.image_id.as_str())
            .or_default()
            .push(d.clone());
    }
    let mut gt_by_image: BTreeMap<&str, Vec<GroundTruthObject>> = BTreeMap::new();
    for (image_id, g) in gts {
        gt_by_image
            .entry(image_id.as_str())
            .or_default()
            .push(g.clone());
    }

    let mut counts = ConfusionCounts {
        tp: 0,
        fp: 0,
        fn_: 0,
        ignored: 0,
    };
    let images: BTreeSet<&str> = det_by_image
        .keys()
        .chain(gt_by_image.keys())
        .copied()
        .collect();
    static NO_DETS: Vec<Detection> = Vec::new();
    for image in images {
        let image_dets = det_by_image.get(image).unwrap_or(&NO_DETS);
        let image_gts = gt_by_image.get(image).map(Vec::as_slice).unwrap_or(&[]);
        let result = match_detections(
            image_dets,
            image_gts,
            image,
            config.iou_threshold,
            config.iou_comparison,
        )?;
        counts.tp += result.true_positives();
        counts.fp += result.false_positives();
        counts.fn_ += result.false_negatives();
        counts.ignored += result.ignored_detections();
    }
    Ok(counts)
}
