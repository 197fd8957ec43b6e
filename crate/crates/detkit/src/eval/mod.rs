//! Detection-quality evaluation: matching, confusion counts, PR curves,
//! AP/mAP, AR@k, size strata, and training-log summaries.

mod loss;
mod metrics;
mod report;

pub use loss::{
    summarize_loss_log, ColumnSummary, LossError, LossLog, LossRow, LossSummary,
    DEFAULT_CONVERGENCE_THRESHOLD,
};
pub use metrics::{
    average_precision, average_recall_at_k, coco_iou_sweep, f1, mean_average_precision, pr_curve,
    precision, recall, stratify_by_size, ApMode, PrCurve, PrPoint, SizeStratum,
};
pub use report::{evaluate_dataset, ArReport, ClassMetrics, EvalConfig, EvaluationReport};

use serde::{Deserialize, Serialize};

use crate::annotations::GroundTruthObject;
use crate::geometry::BoundingBox;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("detection belongs to image {found:?}, expected {expected:?}")]
    ImageIdMismatch { expected: String, found: String },
    #[error("detection score {0} must be a real in [0, 1]")]
    BadScore(f64),
    #[error("unknown image ids in detections: {}", .0.join(", "))]
    UnknownImageIds(Vec<String>),
    #[error("annotation for {0:?} appears more than once")]
    DuplicateAnnotation(String),
    #[error("expected class {expected:?}, found {found:?}")]
    ClassMismatch { expected: String, found: String },
    #[error("class {0:?} has no non-difficult ground truths; its curve is empty and it is excluded from mAP")]
    NoGroundTruth(String),
    #[error("mAP needs at least one class with ground truth")]
    NoClassesWithGroundTruth,
    #[error("invalid evaluation configuration: {reason}")]
    BadConfig { reason: String },
}

/// A predicted box: image, class, geometry, and confidence score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub image_id: String,
    pub class_name: String,
    pub box_: BoundingBox,
    pub score: f64,
}

impl Detection {
    pub fn new(
        image_id: impl Into<String>,
        class_name: impl Into<String>,
        box_: BoundingBox,
        score: f64,
    ) -> Result<Self, EvalError> {
        if !score.is_finite() || !(0.0..=1.0).contains(&score) {
            return Err(EvalError::BadScore(score));
        }
        Ok(Self {
            image_id: image_id.into(),
            class_name: class_name.into(),
            box_,
            score,
        })
    }
}

/// Whether a detection must strictly exceed the IoU threshold or meet it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IouComparison {
    /// `iou >= threshold` (the default reading of "greater than 50%").
    #[default]
    GreaterOrEqual,
    /// `iou > threshold`.
    Greater,
}

impl IouComparison {
    pub fn passes(self, iou: f64, threshold: f64) -> bool {
        match self {
            IouComparison::GreaterOrEqual => iou >= threshold,
            IouComparison::Greater => iou > threshold,
        }
    }
}

/// Verdict for one detection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DetectionVerdict {
    /// Matched a non-difficult ground truth.
    TruePositive { ground_truth_index: usize },
    /// Matched nothing (or only already-claimed ground truths).
    FalsePositive,
    /// Matched a difficult ground truth: neither credited nor penalized.
    Ignored { ground_truth_index: usize },
}

/// Verdict for one ground truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GroundTruthVerdict {
    Matched { detection_index: usize },
    /// Not detected at all: a false negative.
    Missed,
    /// Difficult: never counted as a false negative.
    Ignored,
}

/// Outcome of matching one image's detections against its ground truths.
#[derive(Debug, Clone, PartialEq)]
pub struct MatchResult {
    /// One verdict per detection, in input order.
    pub detections: Vec<DetectionVerdict>,
    /// One verdict per ground truth, in input order.
    pub ground_truths: Vec<GroundTruthVerdict>,
}

impl MatchResult {
    pub fn true_positives(&self) -> usize {
        self.detections
            .iter()
            .filter(|v| matches!(v, DetectionVerdict::TruePositive { .. }))
            .count()
    }

    pub fn false_positives(&self) -> usize {
        self.detections
            .iter()
            .filter(|v| matches!(v, DetectionVerdict::FalsePositive))
            .count()
    }

    pub fn false_negatives(&self) -> usize {
        self.ground_truths
            .iter()
            .filter(|v| matches!(v, GroundTruthVerdict::Missed))
            .count()
    }

    pub fn ignored_detections(&self) -> usize {
        self.detections
            .iter()
            .filter(|v| matches!(v, DetectionVerdict::Ignored { .. }))
            .count()
    }
}

/// IoU that treats the undefined zero-area/zero-area case as "no overlap",
/// so degenerate annotations cannot abort a whole evaluation run.
pub(crate) fn iou_or_zero(a: &BoundingBox, b: &BoundingBox) -> f64 {
    a.iou(b).unwrap_or(0.0)
}

/// Greedy per-class matching of detections against ground truths.
///
/// Detections are visited in descending score order (ties broken by ascending
/// input index). Each detection claims the not-yet-claimed ground truth of its
/// class with the highest IoU; if that IoU passes the threshold the detection
/// is a true positive, unless the ground truth is flagged difficult, in which
/// case the detection is ignored. Everything else is a false positive.
/// Unclaimed non-difficult ground truths are false negatives; difficult ones
/// are never false negatives.
pub fn match_detections(
    dets: &[Detection],
    gts: &[GroundTruthObject],
    image_id: &str,
    iou_threshold: f64,
    comparison: IouComparison,
) -> Result<MatchResult, EvalError> {
    for det in dets {
        if det.image_id != image_id {
            return Err(EvalError::ImageIdMismatch {
                expected: image_id.to_string(),
                found: det.image_id.clone(),
            });
        }
        if !det.score.is_finite() || !(0.0..=1.0).contains(&det.score) {
            return Err(EvalError::BadScore(det.score));
        }
    }
    if !(iou_threshold > 0.0 && iou_threshold < 1.0) {
        return Err(EvalError::BadConfig {
            reason: format!("iou threshold {iou_threshold} must lie in (0, 1)"),
        });
    }

    let mut det_order: Vec<usize> = (0..dets.len()).collect();
    det_order.sort_by(|&a, &b| {
        dets[b]
            .score
            .partial_cmp(&dets[a].score)
            .expect("scores validated finite")
            .then(a.cmp(&b))
    });

    let mut claimed = vec![false; gts.len()];
    let mut det_verdicts = vec![DetectionVerdict::FalsePositive; dets.len()];
    let mut gt_matched_by: Vec<Option<usize>> = vec![None; gts.len()];

    for &di in &det_order {
        let det = &dets[di];
        let mut best: Option<(usize, f64)> = None;
        for (gi, gt) in gts.iter().enumerate() {
            if claimed[gi] || gt.class_name != det.class_name {
                continue;
            }
            let iou = iou_or_zero(&det.box_, &gt.box_);
            let better = match best {
                Some((_, best_iou)) => iou > best_iou,
                None => true,
            };
            if better {
                best = Some((gi, iou));
            }
        }
        if let Some((gi, iou)) = best {
            if comparison.passes(iou, iou_threshold) {
                claimed[gi] = true;
                if gts[gi].difficult {
                    det_verdicts[di] = DetectionVerdict::Ignored {
                        ground_truth_index: gi,
                    };
                } else {
                    det_verdicts[di] = DetectionVerdict::TruePositive {
                        ground_truth_index: gi,
                    };
                    gt_matched_by[gi] = Some(di);
                }
            }
        }
    }

    let gt_verdicts = gts
        .iter()
        .enumerate()
        .map(|(gi, gt)| {
            if gt.difficult {
                GroundTruthVerdict::Ignored
            } else {
                match gt_matched_by[gi] {
                    Some(di) => GroundTruthVerdict::Matched {
                        detection_index: di,
                    },
                    None => GroundTruthVerdict::Missed,
                }
            }
        })
        .collect();

    Ok(MatchResult {
        detections: det_verdicts,
        ground_truths: gt_verdicts,
    })
}
