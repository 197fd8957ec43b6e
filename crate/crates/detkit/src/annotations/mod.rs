//! Ground-truth annotation types plus the formats they travel in:
//! Pascal VOC XML, the CSV manifest, the label map, and dataset splits.

mod label_map;
mod manifest;
mod split;
mod voc;

pub use label_map::{LabelEntry, LabelMap, LabelMapError};
pub use manifest::{parse_manifest, to_manifest, write_manifest, ManifestError, ManifestRow};
pub use split::{split_dataset, SplitError, SplitResult, SplitSpec};
pub use voc::{parse_voc, write_voc, VocError};

use crate::geometry::{BoundingBox, ImageSize};

/// One labelled object inside an image: class, pixel-space box, and the VOC
/// `difficult` flag (obstructed objects, excluded from both credit and
/// penalty during evaluation).
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthObject {
    pub class_name: String,
    pub box_: BoundingBox,
    pub difficult: bool,
}

/// One image's metadata plus its labelled ground-truth boxes.
///
/// `objects` may be empty: negative images carry no boxes but are still part
/// of the corpus.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageAnnotation {
    pub filename: String,
    pub size: ImageSize,
    pub objects: Vec<GroundTruthObject>,
}

/// A box that falls outside its image frame. Parsing keeps such boxes
/// verbatim; validation reports them instead of silently clipping.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundsViolation {
    pub filename: String,
    pub object_index: usize,
    pub class_name: String,
    pub box_: BoundingBox,
    pub size: ImageSize,
}

impl std::fmt::Display for BoundsViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: object {} ({}) box ({}, {}, {}, {}) exceeds image {}",
            self.filename,
            self.object_index,
            self.class_name,
            self.box_.xmin(),
            self.box_.ymin(),
            self.box_.xmax(),
            self.box_.ymax(),
            self.size,
        )
    }
}

impl ImageAnnotation {
    /// Reports objects whose boxes are not contained in the image frame.
    pub fn bounds_violations(&self) -> Vec<BoundsViolation> {
        let w = f64::from(self.size.width());
        let h = f64::from(self.size.height());
        self.objects
            .iter()
            .enumerate()
            .filter(|(_, obj)| {
                obj.box_.xmin() < 0.0
                    || obj.box_.ymin() < 0.0
                    || obj.box_.xmax() > w
                    || obj.box_.ymax() > h
            })
            .map(|(i, obj)| BoundsViolation {
                filename: self.filename.clone(),
                object_index: i,
                class_name: obj.class_name.clone(),
                box_: obj.box_,
                size: self.size,
            })
            .collect()
    }
}
