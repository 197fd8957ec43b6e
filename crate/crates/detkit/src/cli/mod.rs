//! The `detkit` command-line interface.
//!
//! Every error goes to stderr as a single line with a machine-parsable
//! prefix: `error_code=<code>: <message>`. Exit code is 0 iff no errors.

mod commands;
mod util;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::annotations::{LabelMapError, ManifestError, SplitError, VocError};
use crate::augment::AugmentError;
use crate::eval::{EvalError, LossError};
use crate::fusion::FusionError;
use crate::geometry::GeometryError;
use crate::records::RecordError;

/// A CLI failure: a stable machine-readable code plus a human message.
#[derive(Debug)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    fn io(path: &std::path::Path, e: std::io::Error) -> Self {
        Self {
            code: "io_error",
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "error_code={}: {}", self.code, self.message)
    }
}

impl From<VocError> for CliError {
    fn from(e: VocError) -> Self {
        let code = match &e {
            VocError::Parse { .. } => "parse_error",
            VocError::MissingElement { .. } => "schema_error",
            VocError::BadNumber { .. } | VocError::BadValue { .. } => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<ManifestError> for CliError {
    fn from(e: ManifestError) -> Self {
        let code = match &e {
            ManifestError::Header { .. } => "schema_error",
            ManifestError::Csv(_) => "parse_error",
            _ => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<LabelMapError> for CliError {
    fn from(e: LabelMapError) -> Self {
        let code = match &e {
            LabelMapError::Json(_) => "parse_error",
            LabelMapError::UnknownName(_) | LabelMapError::UnknownId(_) => "lookup_error",
            _ => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<SplitError> for CliError {
    fn from(e: SplitError) -> Self {
        let code = match &e {
            SplitError::BadFractions { .. } => "config_error",
            _ => "input_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<GeometryError> for CliError {
    fn from(e: GeometryError) -> Self {
        let code = match &e {
            GeometryError::OutOfBounds { .. } => "bounds_error",
            GeometryError::SpaceMismatch { .. } | GeometryError::WrongSpace { .. } => {
                "input_error"
            }
            _ => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        let code = match &e {
            RecordError::Corrupt { .. } => "corruption_error",
            RecordError::TruncatedFrame { .. } | RecordError::TruncatedPayload { .. } => {
                "truncation_error"
            }
            RecordError::BadMagic | RecordError::UnsupportedVersion(_) => "format_error",
            RecordError::Io { .. } => "io_error",
            RecordError::UnknownClass(_) => "lookup_error",
            RecordError::BadBox(_) => "bounds_error",
            RecordError::BadField { .. } | RecordError::EmptyImage => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<AugmentError> for CliError {
    fn from(e: AugmentError) -> Self {
        let code = match &e {
            AugmentError::BadConfig { .. } => "config_error",
            AugmentError::OpFailed { .. } => "config_error",
            _ => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        let code = match &e {
            EvalError::BadConfig { .. } => "config_error",
            EvalError::UnknownImageIds(_)
            | EvalError::ImageIdMismatch { .. }
            | EvalError::DuplicateAnnotation(_)
            | EvalError::NoClassesWithGroundTruth => "input_error",
            _ => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<LossError> for CliError {
    fn from(e: LossError) -> Self {
        let code = match &e {
            LossError::Header { .. } => "schema_error",
            LossError::NonIncreasingStep { .. } => "format_error",
            LossError::BadSmoothing(_) => "config_error",
            LossError::Csv(_) => "parse_error",
            _ => "value_error",
        };
        Self::new(code, e.to_string())
    }
}

impl From<FusionError> for CliError {
    fn from(e: FusionError) -> Self {
        let code = match &e {
            FusionError::UnmappedLabel { .. } => "lookup_error",
            FusionError::UnorderedStream { .. } => "input_error",
            FusionError::BadConfidence(_) => "value_error",
            _ => "config_error",
        };
        Self::new(code, e.to_string())
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "detkit",
    version,
    about = "Dataset preparation and detection-quality evaluation toolkit"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a directory of Pascal VOC XML files into a CSV manifest.
    ImportVoc {
        /// Directory holding the .xml annotation files.
        #[arg(long)]
        annotations: PathBuf,
        /// Image directory; when given, missing image files are reported.
        #[arg(long)]
        images: Option<PathBuf>,
        /// Output manifest path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Split a manifest into train/test/eval manifests.
    Split {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.8)]
        train_frac: f64,
        #[arg(long, default_value_t = 0.0)]
        eval_frac: f64,
        #[arg(long, env = "DETKIT_SEED", default_value_t = 0)]
        seed: u64,
        /// Output directory for {train,test,eval}_labels.csv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a record file from a manifest, or inspect an existing one.
    Records {
        #[arg(long, required_unless_present = "inspect")]
        manifest: Option<PathBuf>,
        #[arg(long, required_unless_present = "inspect")]
        images: Option<PathBuf>,
        #[arg(long, required_unless_present = "inspect")]
        label_map: Option<PathBuf>,
        #[arg(long, required_unless_present = "inspect")]
        out: Option<PathBuf>,
        /// Dump the frames and payload fields of an existing record file.
        #[arg(long, conflicts_with_all = ["manifest", "images", "label_map", "out"])]
        inspect: Option<PathBuf>,
    },
    /// Run the augmentation pipeline over a manifest's images.
    Augment {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        images: PathBuf,
        /// JSON array of augmentation ops.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, env = "DETKIT_SEED", default_value_t = 0)]
        seed: u64,
        /// Output directory for augmented images and the updated manifest.
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate detections (JSON Lines) against a ground-truth manifest.
    Eval {
        /// Ground-truth manifest.
        #[arg(long)]
        manifest: PathBuf,
        /// Detections as JSON Lines:
        /// {"image_id","class","score","bbox":[xmin,ymin,xmax,ymax]}.
        #[arg(long)]
        detections: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        iou: f64,
        /// Use strict `>` instead of `>=` for the IoU threshold.
        #[arg(long, default_value_t = false)]
        strict_iou: bool,
        #[arg(long, value_enum, default_value_t = ApModeArg::Continuous)]
        ap_mode: ApModeArg,
        /// Detections kept per image for average recall.
        #[arg(long, default_value_t = 100)]
        k: usize,
        /// Average AR over the COCO threshold sweep 0.50:0.05:0.95.
        #[arg(long, default_value_t = false)]
        ar_sweep: bool,
        /// Report JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Directory for per-class PR curve CSV and SVG files.
        #[arg(long)]
        curves: Option<PathBuf>,
    },
    /// Summarize a training-loss CSV and plot the curves.
    Report {
        /// CSV with header step,classification_loss,localization_loss,total_loss.
        #[arg(long)]
        loss_csv: PathBuf,
        #[arg(long, default_value_t = 0.6)]
        smoothing: f64,
        #[arg(long, default_value_t = crate::eval::DEFAULT_CONVERGENCE_THRESHOLD)]
        threshold: f64,
        /// Output directory for summary.json and the SVG curves.
        #[arg(long)]
        out: PathBuf,
    },
    /// Fuse a visual label stream with accelerometer data into an activity
    /// timeline.
    Fuse {
        /// Visual stream JSONL: {"sensor_id","t_ms","label"[,"confidence"]}.
        #[arg(long)]
        visual: PathBuf,
        /// Accelerometer JSONL: {"sensor_id","t_ms","value"} in g.
        #[arg(long)]
        accel: PathBuf,
        /// Synonym table JSON mapping sensor labels to the canonical
        /// vocabulary.
        #[arg(long)]
        synonyms: Option<PathBuf>,
        /// Lookback window in milliseconds.
        #[arg(long, default_value_t = 2000)]
        window: u64,
        /// Acceleration spike threshold in g.
        #[arg(long, default_value_t = 2.5)]
        spike: f64,
        /// Timeline JSON path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parses `args` and runs the requested command. The first element must be
/// the binary name, as in `std::env::args`.
pub fn run_from<I, T>(args: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)
        .map_err(|e| CliError::new("usage_error", e.to_string()))?;
    dispatch(cli)
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::ImportVoc {
            annotations,
            images,
            out,
        } => commands::import_voc(&annotations, images.as_deref(), &out),
        Command::Split {
            manifest,
            train_frac,
            eval_frac,
            seed,
            out,
        } => commands::split(&manifest, train_frac, eval_frac, seed, &out),
        Command::Records {
            manifest,
            images,
            label_map,
            out,
            inspect,
        } => match inspect {
            Some(path) => commands::records_inspect(&path),
            None => commands::records_build(
                manifest.as_deref().expect("required by clap"),
                images.as_deref().expect("required by clap"),
                label_map.as_deref().expect("required by clap"),
                out.as_deref().expect("required by clap"),
            ),
        },
        Command::Augment {
            manifest,
            images,
            config,
            seed,
            out,
        } => commands::augment(&manifest, &images, &config, seed, &out),
        Command::Eval {
            manifest,
            detections,
            iou,
            strict_iou,
            ap_mode,
            k,
            ar_sweep,
            out,
            curves,
        } => commands::eval(
            &manifest,
            &detections,
            commands::EvalFlags {
                iou,
                strict_iou,
                ap_mode: ap_mode.into(),
                k,
                ar_sweep,
            },
            out.as_deref(),
            curves.as_deref(),
        ),
        Command::Report {
            loss_csv,
            smoothing,
            threshold,
            out,
        } => commands::report(&loss_csv, smoothing, threshold, &out),
        Command::Fuse {
            visual,
            accel,
            synonyms,
            window,
            spike,
            out,
        } => commands::fuse(
            &visual,
            &accel,
            synonyms.as_deref(),
            window,
            spike,
            out.as_deref(),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
enum ApModeArg {
    Continuous,
    ElevenPoint,
}

impl From<ApModeArg> for crate::eval::ApMode {
    fn from(mode: ApModeArg) -> Self {
        match mode {
            ApModeArg::Continuous => crate::eval::ApMode::Continuous,
            ApModeArg::ElevenPoint => crate::eval::ApMode::ElevenPoint,
        }
    }
}

/// Entry point for the binary: parses `std::env::args`, prints errors with
/// their `error_code` prefix, and returns the process exit code.
pub fn run() -> i32 {
    let cli = match Cli::try_parse_from(std::env::args_os()) {
        Ok(cli) => cli,
        Err(e) => {
            // clap renders its own help/version/usage text; help and version
            // requests exit cleanly.
            let is_usage_error = e.use_stderr();
            let _ = e.print();
            return i32::from(is_usage_error) * 2;
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("{e}");
            1
        }
    }
}
