//! Evaluating detections: matching, PR curves, AP/mAP, AR@k, size strata.
//!
//! ```bash
//! cargo run -p detkit --example detection_evaluation
//! ```

use detkit::annotations::{GroundTruthObject, ImageAnnotation};
use detkit::eval::{evaluate_dataset, Detection, EvalConfig};
use detkit::geometry::{BoundingBox, ImageSize};

fn px(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> BoundingBox {
    BoundingBox::pixel(xmin, ymin, xmax, ymax).unwrap()
}

fn main() {
    let anns = vec![
        ImageAnnotation {
            filename: "shaft_01.jpg".into(),
            size: ImageSize::new(640, 480).unwrap(),
            objects: vec![
                GroundTruthObject {
                    class_name: "lying".into(),
                    box_: px(50.0, 200.0, 350.0, 320.0),
                    difficult: false,
                },
                GroundTruthObject {
                    class_name: "standing".into(),
                    box_: px(400.0, 40.0, 520.0, 380.0),
                    difficult: false,
                },
            ],
        },
        ImageAnnotation {
            filename: "shaft_02.jpg".into(),
            size: ImageSize::new(640, 480).unwrap(),
            objects: vec![GroundTruthObject {
                class_name: "lying".into(),
                box_: px(100.0, 300.0, 420.0, 420.0),
                difficult: false,
            }],
        },
    ];

    let dets = vec![
        // Good hit on the lying miner in image 1.
        Detection::new("shaft_01.jpg", "lying", px(60.0, 205.0, 340.0, 330.0), 0.92).unwrap(),
        // Duplicate, lower-confidence box for the same object: a false positive.
        Detection::new("shaft_01.jpg", "lying", px(55.0, 210.0, 345.0, 315.0), 0.58).unwrap(),
        // Decent hit on the standing miner.
        Detection::new("shaft_01.jpg", "standing", px(395.0, 60.0, 515.0, 370.0), 0.81).unwrap(),
        // Missed entirely in image 2, plus a stray detection in the corner.
        Detection::new("shaft_02.jpg", "lying", px(0.0, 0.0, 60.0, 40.0), 0.40).unwrap(),
    ];

    let report = evaluate_dataset(&dets, &anns, &EvalConfig::default()).unwrap();
    for (class, metrics) in &report.per_class {
        println!(
            "{class}: TP={} FP={} FN={} precision={:.3} recall={:.3} F1={:.3} AP={:?}",
            metrics.true_positives,
            metrics.false_positives,
            metrics.false_negatives,
            metrics.precision,
            metrics.recall,
            metrics.f1,
            metrics.average_precision
        );
        for point in &metrics.pr_curve.points {
            println!(
                "    score>={:.2}  recall={:.3} precision={:.3}",
                point.threshold, point.recall, point.precision
            );
        }
    }
    println!("\nmAP = {:.4}", report.mean_average_precision);
    println!(
        "AR@{} all={:.3} small={} medium={:.3} large={:.3}",
        report.config.ar_k,
        report.average_recall_at_k.all,
        report.average_recall_at_k.small,
        report.average_recall_at_k.medium,
        report.average_recall_at_k.large
    );
    println!("\nfull report JSON:\n{}", report.to_json());
}
