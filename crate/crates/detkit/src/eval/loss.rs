//! Training-loss log ingestion and convergence summaries.

use serde::Serialize;

/// Smoothed total loss at or below this value counts as converged ("a loss of
/// about 1%").
pub const DEFAULT_CONVERGENCE_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LossError {
    #[error("loss CSV header must be `step,classification_loss,localization_loss,total_loss`, got `{found}`")]
    Header { found: String },
    #[error("row {row}: column `{column}` has bad value {value:?}")]
    BadField {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: step {step} does not increase (previous step {previous})")]
    NonIncreasingStep { row: usize, step: u64, previous: u64 },
    #[error("loss log is empty")]
    Empty,
    #[error("smoothing {0} must lie in [0, 1)")]
    BadSmoothing(f64),
    #[error("CSV read failed: {0}")]
    Csv(String),
}

/// One scalar-summary row.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossRow {
    pub step: u64,
    pub classification_loss: f64,
    pub localization_loss: f64,
    pub total_loss: f64,
}

/// A training log with strictly increasing steps and nonnegative losses.
#[derive(Debug, Clone, PartialEq)]
pub struct LossLog {
    rows: Vec<LossRow>,
}

const HEADER: [&str; 4] = [
    "step",
    "classification_loss",
    "localization_loss",
    "total_loss",
];

impl LossLog {
    pub fn new(rows: Vec<LossRow>) -> Result<Self, LossError> {
        for (i, pair) in rows.windows(2).enumerate() {
            if pair[1].step <= pair[0].step {
                return Err(LossError::NonIncreasingStep {
                    row: i + 2,
                    step: pair[1].step,
                    previous: pair[0].step,
                });
            }
        }
        for (i, row) in rows.iter().enumerate() {
            for (column, value) in [
                ("classification_loss", row.classification_loss),
                ("localization_loss", row.localization_loss),
                ("total_loss", row.total_loss),
            ] {
                if !value.is_finite() || value < 0.0 {
                    return Err(LossError::BadField {
                        row: i + 1,
                        column: column.to_string(),
                        value: value.to_string(),
                    });
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[LossRow] {
        &self.rows
    }

    /// Parses `step,classification_loss,localization_loss,total_loss` CSV.
    pub fn parse_csv(text: &str) -> Result<Self, LossError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_reader(text.as_bytes());
        let headers = reader
            .headers()
            .map_err(|e| LossError::Csv(e.to_string()))?
            .clone();
        let fields: Vec<&str> = headers.iter().collect();
        if fields != HEADER {
            return Err(LossError::Header {
                found: fields.join(","),
            });
        }

        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(|e| LossError::Csv(e.to_string()))?;
            let row = i + 1;
            let get = |idx: usize| record.get(idx).unwrap_or("");
            let step: u64 = get(0).parse().map_err(|_| LossError::BadField {
                row,
                column: "step".into(),
                value: get(0).to_string(),
            })?;
            let parse_loss = |idx: usize, column: &str| -> Result<f64, LossError> {
                get(idx)
                    .parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite() && *v >= 0.0)
                    .ok_or_else(|| LossError::BadField {
                        row,
                        column: column.to_string(),
                        value: get(idx).to_string(),
                    })
            };
            rows.push(LossRow {
                step,
                classification_loss: parse_loss(1, "classification_loss")?,
                localization_loss: parse_loss(2, "localization_loss")?,
                total_loss: parse_loss(3, "total_loss")?,
            });
        }
        Self::new(rows)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("step,classification_loss,localization_loss,total_loss\n");
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.step, row.classification_loss, row.localization_loss, row.total_loss
            ));
        }
        out
    }
}

/// Summary of one loss column.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnSummary {
    pub final_raw: f64,
    pub final_smoothed: f64,
    pub min_raw: f64,
    pub min_raw_step: u64,
    /// The full exponential-moving-average curve, one value per log row.
    pub smoothed: Vec<f64>,
}

/// Loss-log summary: EMA curves, endpoints, minima, and the convergence flag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossSummary {
    pub smoothing: f64,
    pub convergence_threshold: f64,
    pub steps: Vec<u64>,
    pub final_step: u64,
    pub classification: ColumnSummary,
    pub localization: ColumnSummary,
    pub total: ColumnSummary,
    /// True when the smoothed total loss at the last step is at or below the
    /// threshold.
    pub converged: bool,
}

/// Summarizes a loss log with EMA smoothing factor `smoothing` in `[0, 1)`
/// (`0` leaves the curves raw) and the given convergence threshold.
pub fn summarize_loss_log(
    log: &LossLog,
    smoothing: f64,
    convergence_threshold: f64,
) -> Result<LossSummary, LossError> {
    if log.rows.is_empty() {
        return Err(LossError::Empty);
    }
    if !smoothing.is_finite() || !(0.0..1.0).contains(&smoothing) {
        return Err(LossError::BadSmoothing(smoothing));
    }

    let summarize_column = |extract: fn(&LossRow) -> f64| -> ColumnSummary {
        let raw: Vec<f64> = log.rows.iter().map(extract).collect();
        let mut smoothed = Vec::with_capacity(raw.len());
        let mut ema = raw[0];
        smoothed.push(ema);
        for &v in &raw[1..] {
            ema = smoothing * ema + (1.0 - smoothing) * v;
            smoothed.push(ema);
        }
        let (min_idx, &min_raw) = raw
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| a.partial_cmp(b).expect("losses validated finite"))
            .expect("nonempty log");
        ColumnSummary {
            final_raw: *raw.last().expect("nonempty log"),
            final_smoothed: *smoothed.last().expect("nonempty log"),
            min_raw,
            min_raw_step: log.rows[min_idx].step,
            smoothed,
        }
    };

    let classification = summarize_column(|r| r.classification_loss);
    let localization = summarize_column(|r| r.localization_loss);
    let total = summarize_column(|r| r.total_loss);
    let converged = total.final_smoothed <= convergence_threshold;

    Ok(LossSummary {
        smoothing,
        convergence_threshold,
        steps: log.rows.iter().map(|r| r.step).collect(),
        final_step: log.rows.last().expect("nonempty log").step,
        classification,
        localization,
        total,
        converged,
    })
}
