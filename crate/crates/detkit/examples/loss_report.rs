//! Loss-log summarization and SVG curve rendering.
//!
//! ```bash
//! cargo run -p detkit --example loss_report
//! ```

use detkit::eval::{summarize_loss_log, LossLog, LossRow, DEFAULT_CONVERGENCE_THRESHOLD};
use detkit::svg::{line_chart, Trace};

fn main() {
    // A noisy exponentially decaying training run.
    let rows: Vec<LossRow> = (0..150u32)
        .map(|i| {
            let base = 2.0 * (-f64::from(i) / 30.0).exp();
            let wobble = 0.05 * f64::from(i % 7) / 7.0;
            let total = base + wobble + 0.004;
            LossRow {
                step: u64::from(i) * 100 + 100,
                classification_loss: total * 0.65,
                localization_loss: total * 0.35,
                total_loss: total,
            }
        })
        .collect();
    let log = LossLog::new(rows).unwrap();

    let summary = summarize_loss_log(&log, 0.6, DEFAULT_CONVERGENCE_THRESHOLD).unwrap();
    println!(
        "final step {}: raw total {:.5}, smoothed {:.5}",
        summary.final_step, summary.total.final_raw, summary.total.final_smoothed
    );
    println!(
        "minimum raw total {:.5} at step {}",
        summary.total.min_raw, summary.total.min_raw_step
    );
    println!(
        "converged at threshold {}: {}",
        summary.convergence_threshold, summary.converged
    );

    // Render raw vs smoothed total loss as an SVG file.
    let steps: Vec<f64> = summary.steps.iter().map(|&s| s as f64).collect();
    let raw: Vec<(f64, f64)> = steps
        .iter()
        .copied()
        .zip(log.rows().iter().map(|r| r.total_loss))
        .collect();
    let smoothed: Vec<(f64, f64)> = steps
        .iter()
        .copied()
        .zip(summary.total.smoothed.iter().copied())
        .collect();
    let svg = line_chart(
        "total loss",
        "step",
        "loss",
        &[
            Trace {
                label: "raw",
                points: &raw,
            },
            Trace {
                label: "smoothed",
                points: &smoothed,
            },
        ],
    );
    let out = std::env::temp_dir().join("detkit_loss_total.svg");
    std::fs::write(&out, svg).unwrap();
    println!("chart written to {}", out.display());
}
