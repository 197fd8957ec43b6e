//! detkit: dataset preparation and detection-quality evaluation for object
//! detection corpora.
//!
//! The crate covers the pipeline around (not including) model training:
//!
//! - [`geometry`] — bounding-box arithmetic and IoU.
//! - [`annotations`] — Pascal VOC XML, the CSV manifest, the label map, and
//!   deterministic dataset splits.
//! - [`records`] — a framed, checksummed binary container for serialized
//!   examples.
//! - [`augment`] — a seedable image + bounding-box augmentation pipeline.
//! - [`eval`] — detection matching, precision/recall/F1, PR curves, AP/mAP,
//!   AR@k, size strata, and training-loss summaries.
//! - [`fusion`] — semantic alignment, domain discretization, and a rule-based
//!   fall-vs-lying activity resolver.
//!
//! Each capability has a runnable demo under `examples/`; the `detkit` binary
//! wires the same functions into a subcommand CLI.

pub mod annotations;
pub mod augment;
pub mod cli;
pub mod eval;
pub mod fusion;
pub mod geometry;
pub mod records;
pub mod svg;

pub use annotations::{
    parse_manifest, parse_voc, split_dataset, to_manifest, write_manifest, write_voc,
    GroundTruthObject, ImageAnnotation, LabelEntry, LabelMap, ManifestRow, SplitResult, SplitSpec,
};
pub use geometry::{BoundingBox, CoordinateSpace, ImageSize};
