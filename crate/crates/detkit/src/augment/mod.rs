//! Deterministic, seedable image + bounding-box augmentation.
//!
//! A pipeline is an ordered list of operators applied to an image and its
//! boxes. Every random draw comes from a stream keyed by
//! `(seed, op_index, image_id)`, so the result for one image never depends on
//! how many other images were processed before it or in what order.

mod buffer;
mod ops;

pub use buffer::ImageBuffer;
pub use ops::{
    black_patches, crop, crop_indexed, flip_horizontal, flip_vertical, pad, photometric,
    resize, rotate90, Photometric,
};

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::geometry::{BoundingBox, CoordinateSpace, GeometryError, ImageSize};

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("invalid image: {reason}")]
    BadImage { reason: String },
    #[error("invalid configuration: {reason}")]
    BadConfig { reason: String },
    #[error("boxes must be in pixel space for geometric operators")]
    BoxesNotPixelSpace,
    #[error("box ({xmin}, {ymin}, {xmax}, {ymax}) lies outside the {width}x{height} image")]
    BoxOutsideImage {
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
        width: u32,
        height: u32,
    },
    #[error("geometry error: {0}")]
    Geometry(#[from] GeometryError),
    #[error("op {op_index} ({op_name}) failed: {source}")]
    OpFailed {
        op_index: usize,
        op_name: String,
        #[source]
        source: Box<AugmentError>,
    },
}

fn default_probability() -> f64 {
    0.5
}

fn default_retain_threshold() -> f64 {
    0.25
}

/// One configured pipeline operator.
///
/// The JSON form tags each entry with `"op"`:
/// `{"op": "random_horizontal_flip", "probability": 0.5}`. Parameter defaults
/// follow common detection-pipeline conventions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
pub enum AugmentOp {
    /// Affine remap of pixel values; deterministic.
    NormalizeImage {
        original_min: f32,
        original_max: f32,
        target_min: f32,
        target_max: f32,
    },
    RandomHorizontalFlip {
        #[serde(default = "default_probability")]
        probability: f64,
    },
    RandomVerticalFlip {
        #[serde(default = "default_probability")]
        probability: f64,
    },
    RandomRotation90 {
        #[serde(default = "default_probability")]
        probability: f64,
    },
    /// Multiplies all pixel values by a scale drawn from `[min_scale, max_scale]`.
    RandomPixelValueScale {
        #[serde(default = "defaults::pixel_scale_min")]
        min_scale: f32,
        #[serde(default = "defaults::pixel_scale_max")]
        max_scale: f32,
    },
    /// Resizes the whole image by a ratio drawn from `[min_ratio, max_ratio]`.
    RandomImageScale {
        #[serde(default = "defaults::image_scale_min")]
        min_ratio: f64,
        #[serde(default = "defaults::image_scale_max")]
        max_ratio: f64,
    },
    /// Deterministic luma conversion.
    RgbToGray,
    RandomRgbToGray {
        #[serde(default = "default_probability")]
        probability: f64,
    },
    /// Adds a delta drawn from `[-max_delta, max_delta]`.
    RandomAdjustBrightness {
        #[serde(default = "defaults::brightness_max_delta")]
        max_delta: f32,
    },
    /// Scales contrast by a factor drawn from `[min_factor, max_factor]`.
    RandomAdjustContrast {
        #[serde(default = "defaults::contrast_min")]
        min_factor: f32,
        #[serde(default = "defaults::contrast_max")]
        max_factor: f32,
    },
    /// Crops to a window whose width/height fractions are drawn from
    /// `[min_fraction, max_fraction]`; boxes retaining less than
    /// `retain_threshold` of their area are dropped.
    RandomCropImage {
        #[serde(default = "defaults::crop_fraction_min")]
        min_fraction: f64,
        #[serde(default = "defaults::crop_fraction_max")]
        max_fraction: f64,
        #[serde(default = "default_retain_threshold")]
        retain_threshold: f64,
    },
    /// Pads each edge by an amount drawn from `[0, max_pad_fraction * dim]`.
    RandomPadImage {
        #[serde(default = "defaults::pad_fraction_max")]
        max_pad_fraction: f64,
        #[serde(default)]
        fill_value: f32,
    },
    RandomBlackPatches {
        #[serde(default = "defaults::max_patches")]
        max_patches: u32,
        #[serde(default = "default_probability")]
        probability: f64,
        #[serde(default = "defaults::patch_size_fraction")]
        size_fraction: f64,
    },
    /// Deterministic resize to a fixed target.
    ResizeImage { width: u32, height: u32 },
    SubtractChannelMean { means: Vec<f32> },
    /// Converts normalized boxes to pixel coordinates using the current
    /// image size. Errors if the boxes are already in pixel space.
    ScaleBoxesToPixelCoordinates,
}

mod defaults {
    pub fn pixel_scale_min() -> f32 {
        0.9
    }
    pub fn pixel_scale_max() -> f32 {
        1.1
    }
    pub fn image_scale_min() -> f64 {
        0.5
    }
    pub fn image_scale_max() -> f64 {
        2.0
    }
    pub fn brightness_max_delta() -> f32 {
        0.2
    }
    pub fn contrast_min() -> f32 {
        0.8
    }
    pub fn contrast_max() -> f32 {
        1.25
    }
    pub fn crop_fraction_min() -> f64 {
        0.5
    }
    pub fn crop_fraction_max() -> f64 {
        1.0
    }
    pub fn pad_fraction_max() -> f64 {
        0.25
    }
    pub fn max_patches() -> u32 {
        10
    }
    pub fn patch_size_fraction() -> f64 {
        0.1
    }
}

impl AugmentOp {
    /// The JSON tag for this operator.
    pub fn name(&self) -> &'static str {
        match self {
            AugmentOp::NormalizeImage { .. } => "normalize_image",
            AugmentOp::RandomHorizontalFlip { .. } => "random_horizontal_flip",
            AugmentOp::RandomVerticalFlip { .. } => "random_vertical_flip",
            AugmentOp::RandomRotation90 { .. } => "random_rotation90",
            AugmentOp::RandomPixelValueScale { .. } => "random_pixel_value_scale",
            AugmentOp::RandomImageScale { .. } => "random_image_scale",
            AugmentOp::RgbToGray => "rgb_to_gray",
            AugmentOp::RandomRgbToGray { .. } => "random_rgb_to_gray",
            AugmentOp::RandomAdjustBrightness { .. } => "random_adjust_brightness",
            AugmentOp::RandomAdjustContrast { .. } => "random_adjust_contrast",
            AugmentOp::RandomCropImage { .. } => "random_crop_image",
            AugmentOp::RandomPadImage { .. } => "random_pad_image",
            AugmentOp::RandomBlackPatches { .. } => "random_black_patches",
            AugmentOp::ResizeImage { .. } => "resize_image",
            AugmentOp::SubtractChannelMean { .. } => "subtract_channel_mean",
            AugmentOp::ScaleBoxesToPixelCoordinates => "scale_boxes_to_pixel_coordinates",
        }
    }

    /// Checks parameter ranges without running anything.
    pub fn validate(&self) -> Result<(), AugmentError> {
        let bad = |reason: String| Err(AugmentError::BadConfig { reason });
        let check_probability = |p: f64| {
            if !(0.0..=1.0).contains(&p) {
                bad(format!("probability {p} must lie in [0, 1]"))
            } else {
                Ok(())
            }
        };
        match self {
            AugmentOp::NormalizeImage {
                original_min,
                original_max,
                ..
            } => {
                if original_max <= original_min {
                    return bad("normalize_image requires original_max > original_min".into());
                }
                Ok(())
            }
            AugmentOp::RandomHorizontalFlip { probability }
            | AugmentOp::RandomVerticalFlip { probability }
            | AugmentOp::RandomRotation90 { probability }
            | AugmentOp::RandomRgbToGray { probability } => check_probability(*probability),
            AugmentOp::RandomPixelValueScale {
                min_scale,
                max_scale,
            } => {
                if !(min_scale.is_finite() && max_scale.is_finite())
                    || *min_scale < 0.0
                    || min_scale > max_scale
                {
                    return bad(format!(
                        "pixel value scale range [{min_scale}, {max_scale}] is invalid"
                    ));
                }
                Ok(())
            }
            AugmentOp::RandomImageScale {
                min_ratio,
                max_ratio,
            } => {
                if !(min_ratio.is_finite() && max_ratio.is_finite())
                    || *min_ratio <= 0.0
                    || min_ratio > max_ratio
                {
                    return bad(format!(
                        "image scale range [{min_ratio}, {max_ratio}] is invalid"
                    ));
                }
                Ok(())
            }
            AugmentOp::RgbToGray => Ok(()),
            AugmentOp::RandomAdjustBrightness { max_delta } => {
                if !max_delta.is_finite() || *max_delta < 0.0 {
                    return bad(format!("brightness max_delta {max_delta} must be >= 0"));
                }
                Ok(())
            }
            AugmentOp::RandomAdjustContrast {
                min_factor,
                max_factor,
            } => {
                if !(min_factor.is_finite() && max_factor.is_finite())
                    || *min_factor < 0.0
                    || min_factor > max_factor
                {
                    return bad(format!(
                        "contrast range [{min_factor}, {max_factor}] is invalid"
                    ));
                }
                Ok(())
            }
            AugmentOp::RandomCropImage {
                min_fraction,
                max_fraction,
                retain_threshold,
            } => {
                if !(*min_fraction > 0.0 && min_fraction <= max_fraction && *max_fraction <= 1.0) {
                    return bad(format!(
                        "crop fraction range [{min_fraction}, {max_fraction}] is invalid"
                    ));
                }
                if !(0.0..=1.0).contains(retain_threshold) {
                    return bad(format!(
                        "retain_threshold {retain_threshold} must lie in [0, 1]"
                    ));
                }
                Ok(())
            }
            AugmentOp::RandomPadImage {
                max_pad_fraction, ..
            } => {
                if !max_pad_fraction.is_finite() || *max_pad_fraction < 0.0 {
                    return bad(format!("max_pad_fraction {max_pad_fraction} must be >= 0"));
                }
                Ok(())
            }
            AugmentOp::RandomBlackPatches {
                probability,
                size_fraction,
                ..
            } => {
                check_probability(*probability)?;
                if !(*size_fraction > 0.0 && *size_fraction <= 1.0) {
                    return bad(format!("size_fraction {size_fraction} must lie in (0, 1]"));
                }
                Ok(())
            }
            AugmentOp::ResizeImage { width, height } => {
                if *width < 1 || *height < 1 {
                    return bad(format!("resize target {width}x{height} must be >= 1x1"));
                }
                Ok(())
            }
            AugmentOp::SubtractChannelMean { means } => {
                if means.is_empty() {
                    return bad("subtract_channel_mean needs at least one mean".into());
                }
                Ok(())
            }
            AugmentOp::ScaleBoxesToPixelCoordinates => Ok(()),
        }
    }
}

/// A full pipeline: ordered operators plus the seed for the random stream.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentConfig {
    pub ops: Vec<AugmentOp>,
    pub seed: u64,
}

impl AugmentConfig {
    pub fn new(ops: Vec<AugmentOp>, seed: u64) -> Result<Self, AugmentError> {
        if ops.is_empty() {
            return Err(AugmentError::BadConfig {
                reason: "pipeline needs at least one op".into(),
            });
        }
        for (op_index, op) in ops.iter().enumerate() {
            op.validate().map_err(|e| wrap(op_index, op, e))?;
        }
        Ok(Self { ops, seed })
    }

    /// Parses the JSON array-of-ops config format.
    pub fn from_json(ops_json: &str, seed: u64) -> Result<Self, AugmentError> {
        let ops: Vec<AugmentOp> =
            serde_json::from_str(ops_json).map_err(|e| AugmentError::BadConfig {
                reason: format!("config JSON is invalid: {e}"),
            })?;
        Self::new(ops, seed)
    }

    pub fn ops_to_json(&self) -> String {
        serde_json::to_string_pretty(&self.ops).expect("ops serialize cleanly")
    }
}

/// What one pipeline step did: whether it fired and any sampled parameters.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AppliedOp {
    pub op_index: usize,
    pub op: String,
    pub fired: bool,
    /// Sampled parameter values for the fired op (empty for deterministic ops).
    pub sampled: serde_json::Value,
}

/// Result of running a pipeline over one image.
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOutput {
    pub image: ImageBuffer,
    pub boxes: Vec<BoundingBox>,
    /// For each surviving box, the index of the input box it came from.
    pub kept_box_indices: Vec<usize>,
    pub log: Vec<AppliedOp>,
}

fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The random stream for one `(seed, op_index, image_id)` cell.
fn op_rng(seed: u64, op_index: u64, image_id: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix64(seed ^ mix64(op_index ^ mix64(image_id))))
}

/// Runs the configured ops in order over one image and its boxes.
///
/// `image_id` identifies the image within the dataset (any stable 64-bit
/// value, e.g. a filename hash); together with the config seed and op index it
/// keys every random draw, making outputs reproducible and independent of
/// iteration order. The returned log records which ops fired and the
/// parameters they sampled.
pub fn apply_pipeline(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
    config: &AugmentConfig,
    image_id: u64,
) -> Result<PipelineOutput, AugmentError> {
    if config.ops.is_empty() {
        return Err(AugmentError::BadConfig {
            reason: "pipeline needs at least one op".into(),
        });
    }
    let mut image = img.clone();
    let mut cur_boxes: Vec<BoundingBox> = boxes.to_vec();
    let mut kept: Vec<usize> = (0..boxes.len()).collect();
    let mut log = Vec::with_capacity(config.ops.len());

    for (op_index, op) in config.ops.iter().enumerate() {
        op.validate().map_err(|e| wrap(op_index, op, e))?;
        let mut rng = op_rng(config.seed, op_index as u64, image_id);
        let step = run_op(&mut image, &mut cur_boxes, &mut kept, op, &mut rng)
            .map_err(|e| wrap(op_index, op, e))?;
        log.push(AppliedOp {
            op_index,
            op: op.name().to_string(),
            fired: step.fired,
            sampled: step.sampled,
        });
    }

    Ok(PipelineOutput {
        image,
        boxes: cur_boxes,
        kept_box_indices: kept,
        log,
    })
}

fn wrap(op_index: usize, op: &AugmentOp, source: AugmentError) -> AugmentError {
    AugmentError::OpFailed {
        op_index,
        op_name: op.name().to_string(),
        source: Box::new(source),
    }
}

struct StepOutcome {
    fired: bool,
    sampled: serde_json::Value,
}

impl StepOutcome {
    fn skipped() -> Self {
        Self {
            fired: false,
            sampled: serde_json::Value::Null,
        }
    }

    fn fired(sampled: serde_json::Value) -> Self {
        Self {
            fired: true,
            sampled,
        }
    }
}

fn run_op(
    image: &mut ImageBuffer,
    boxes: &mut Vec<BoundingBox>,
    kept: &mut Vec<usize>,
    op: &AugmentOp,
    rng: &mut ChaCha8Rng,
) -> Result<StepOutcome, AugmentError> {
    use serde_json::json;

    match op {
        AugmentOp::NormalizeImage {
            original_min,
            original_max,
            target_min,
            target_max,
        } => {
            *image = photometric(
                image,
                &Photometric::Normalize {
                    original_min: *original_min,
                    original_max: *original_max,
                    target_min: *target_min,
                    target_max: *target_max,
                },
            )?;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::RandomHorizontalFlip { probability } => {
            if !rng.random_bool(*probability) {
                return Ok(StepOutcome::skipped());
            }
            let (i, b) = flip_horizontal(image, boxes)?;
            *image = i;
            *boxes = b;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::RandomVerticalFlip { probability } => {
            if !rng.random_bool(*probability) {
                return Ok(StepOutcome::skipped());
            }
            let (i, b) = flip_vertical(image, boxes)?;
            *image = i;
            *boxes = b;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::RandomRotation90 { probability } => {
            if !rng.random_bool(*probability) {
                return Ok(StepOutcome::skipped());
            }
            let (i, b) = rotate90(image, boxes)?;
            *image = i;
            *boxes = b;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::RandomPixelValueScale {
            min_scale,
            max_scale,
        } => {
            let scale = sample_f32(rng, *min_scale, *max_scale);
            *image = photometric(image, &Photometric::PixelValueScale { scale })?;
            Ok(StepOutcome::fired(json!({ "scale": scale })))
        }
        AugmentOp::RandomImageScale {
            min_ratio,
            max_ratio,
        } => {
            let ratio = sample_f64(rng, *min_ratio, *max_ratio);
            let new_w = ((f64::from(image.width()) * ratio).round() as u32).max(1);
            let new_h = ((f64::from(image.height()) * ratio).round() as u32).max(1);
            let target = ImageSize::new(new_w, new_h).expect("targets clamped to >= 1");
            let (i, b) = resize(image, boxes, target)?;
            *image = i;
            *boxes = b;
            Ok(StepOutcome::fired(
                json!({ "ratio": ratio, "width": new_w, "height": new_h }),
            ))
        }
        AugmentOp::RgbToGray => {
            *image = photometric(image, &Photometric::RgbToGray)?;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::RandomRgbToGray { probability } => {
            if !rng.random_bool(*probability) {
                return Ok(StepOutcome::skipped());
            }
            *image = photometric(image, &Photometric::RgbToGray)?;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::RandomAdjustBrightness { max_delta } => {
            let delta = sample_f32(rng, -max_delta, *max_delta);
            *image = photometric(image, &Photometric::Brightness { delta })?;
            Ok(StepOutcome::fired(json!({ "delta": delta })))
        }
        AugmentOp::RandomAdjustContrast {
            min_factor,
            max_factor,
        } => {
            let factor = sample_f32(rng, *min_factor, *max_factor);
            *image = photometric(image, &Photometric::Contrast { factor })?;
            Ok(StepOutcome::fired(json!({ "factor": factor })))
        }
        AugmentOp::RandomCropImage {
            min_fraction,
            max_fraction,
            retain_threshold,
        } => {
            let w = f64::from(image.width());
            let h = f64::from(image.height());
            let crop_w = ((sample_f64(rng, *min_fraction, *max_fraction) * w).round() as u32)
                .clamp(1, image.width());
            let crop_h = ((sample_f64(rng, *min_fraction, *max_fraction) * h).round() as u32)
                .clamp(1, image.height());
            let x0 = rng.random_range(0..=image.width() - crop_w);
            let y0 = rng.random_range(0..=image.height() - crop_h);
            let region = BoundingBox::pixel(
                f64::from(x0),
                f64::from(y0),
                f64::from(x0 + crop_w),
                f64::from(y0 + crop_h),
            )?;
            let (i, b, survivors) = crop_indexed(image, boxes, &region, *retain_threshold)?;
            *image = i;
            *boxes = b;
            *kept = survivors.iter().map(|&s| kept[s]).collect();
            Ok(StepOutcome::fired(json!({
                "xmin": x0, "ymin": y0, "width": crop_w, "height": crop_h
            })))
        }
        AugmentOp::RandomPadImage {
            max_pad_fraction,
            fill_value,
        } => {
            let max_x = (max_pad_fraction * f64::from(image.width())).round() as u32;
            let max_y = (max_pad_fraction * f64::from(image.height())).round() as u32;
            let left = rng.random_range(0..=max_x);
            let right = rng.random_range(0..=max_x);
            let top = rng.random_range(0..=max_y);
            let bottom = rng.random_range(0..=max_y);
            let (i, b) = pad(image, boxes, left, top, right, bottom, *fill_value)?;
            *image = i;
            *boxes = b;
            Ok(StepOutcome::fired(json!({
                "left": left, "top": top, "right": right, "bottom": bottom
            })))
        }
        AugmentOp::RandomBlackPatches {
            max_patches,
            probability,
            size_fraction,
        } => {
            *image = black_patches(image, *max_patches, *probability, *size_fraction, rng)?;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::ResizeImage { width, height } => {
            let target =
                ImageSize::new(*width, *height).map_err(|e| AugmentError::BadConfig {
                    reason: e.to_string(),
                })?;
            let (i, b) = resize(image, boxes, target)?;
            *image = i;
            *boxes = b;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::SubtractChannelMean { means } => {
            *image = photometric(
                image,
                &Photometric::SubtractChannelMean {
                    means: means.clone(),
                },
            )?;
            Ok(StepOutcome::fired(json!({})))
        }
        AugmentOp::ScaleBoxesToPixelCoordinates => {
            let size = image.size();
            let mut converted = Vec::with_capacity(boxes.len());
            for b in boxes.iter() {
                if b.space() != CoordinateSpace::Normalized {
                    return Err(AugmentError::BadConfig {
                        reason: "scale_boxes_to_pixel_coordinates expects normalized boxes".into(),
                    });
                }
                converted.push(b.denormalize(size)?);
            }
            *boxes = converted;
            Ok(StepOutcome::fired(json!({})))
        }
    }
}

fn sample_f32(rng: &mut ChaCha8Rng, lo: f32, hi: f32) -> f32 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

fn sample_f64(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        lo
    } else {
        rng.random_range(lo..=hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image() -> ImageBuffer {
        let pixels = (0..16 * 12 * 3).map(|i| (i % 256) as f32 / 255.0).collect();
        ImageBuffer::from_pixels(16, 12, 3, pixels).unwrap()
    }

    fn px(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> BoundingBox {
        BoundingBox::pixel(xmin, ymin, xmax, ymax).unwrap()
    }

    #[test]
    fn zero_probability_pipeline_is_identity() {
        let config = AugmentConfig::new(
            vec![
                AugmentOp::RandomHorizontalFlip { probability: 0.0 },
                AugmentOp::RandomVerticalFlip { probability: 0.0 },
                AugmentOp::RandomRotation90 { probability: 0.0 },
            ],
            123,
        )
        .unwrap();
        let img = test_image();
        let boxes = vec![px(1.0, 1.0, 5.0, 5.0)];
        let out = apply_pipeline(&img, &boxes, &config, 7).unwrap();
        assert_eq!(out.image, img);
        assert_eq!(out.boxes, boxes);
        assert!(out.log.iter().all(|entry| !entry.fired));
    }

    #[test]
    fn fixed_seed_reproduces_output_bit_for_bit() {
        let config = AugmentConfig::new(
            vec![
                AugmentOp::RandomHorizontalFlip { probability: 0.5 },
                AugmentOp::RandomAdjustBrightness { max_delta: 0.2 },
                AugmentOp::RandomCropImage {
                    min_fraction: 0.5,
                    max_fraction: 1.0,
                    retain_threshold: 0.25,
                },
                AugmentOp::RandomBlackPatches {
                    max_patches: 3,
                    probability: 0.5,
                    size_fraction: 0.2,
                },
            ],
            99,
        )
        .unwrap();
        let img = test_image();
        let boxes = vec![px(2.0, 2.0, 10.0, 9.0), px(0.0, 0.0, 16.0, 12.0)];
        let a = apply_pipeline(&img, &boxes, &config, 42).unwrap();
        let b = apply_pipeline(&img, &boxes, &config, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn double_forced_flip_is_identity() {
        let config = AugmentConfig::new(
            vec![
                AugmentOp::RandomHorizontalFlip { probability: 1.0 },
                AugmentOp::RandomHorizontalFlip { probability: 1.0 },
            ],
            5,
        )
        .unwrap();
        let img = test_image();
        let boxes = vec![px(3.0, 0.0, 7.0, 4.0)];
        let out = apply_pipeline(&img, &boxes, &config, 0).unwrap();
        assert_eq!(out.image, img);
        assert_eq!(out.boxes, boxes);
        assert!(out.log.iter().all(|entry| entry.fired));
    }

    #[test]
    fn per_image_stream_ignores_processing_order() {
        let config = AugmentConfig::new(
            vec![AugmentOp::RandomAdjustBrightness { max_delta: 0.3 }],
            11,
        )
        .unwrap();
        let img = test_image();
        // Whatever happened "before" this image cannot matter: only the id does.
        let direct = apply_pipeline(&img, &[], &config, 1234).unwrap();
        for other_id in [0u64, 1, 99999] {
            let _ = apply_pipeline(&img, &[], &config, other_id).unwrap();
        }
        let again = apply_pipeline(&img, &[], &config, 1234).unwrap();
        assert_eq!(direct, again);
    }

    #[test]
    fn empty_pipeline_rejected() {
        assert!(AugmentConfig::new(vec![], 0).is_err());
    }

    #[test]
    fn op_errors_carry_the_op_index() {
        let config = AugmentConfig {
            ops: vec![
                AugmentOp::RgbToGray,
                AugmentOp::RandomAdjustContrast {
                    min_factor: 2.0,
                    max_factor: 1.0,
                },
            ],
            seed: 0,
        };
        let err = apply_pipeline(&test_image(), &[], &config, 0).unwrap_err();
        match err {
            AugmentError::OpFailed { op_index, .. } => assert_eq!(op_index, 1),
            other => panic!("unexpected error: {other}"),
        }
    }

    #[test]
    fn config_json_roundtrip_with_defaults() {
        let json = r#"[
            {"op": "random_horizontal_flip"},
            {"op": "random_crop_image", "retain_threshold": 0.5},
            {"op": "resize_image", "width": 32, "height": 24}
        ]"#;
        let config = AugmentConfig::from_json(json, 1).unwrap();
        assert_eq!(
            config.ops[0],
            AugmentOp::RandomHorizontalFlip { probability: 0.5 }
        );
        match &config.ops[1] {
            AugmentOp::RandomCropImage {
                retain_threshold, ..
            } => assert_eq!(*retain_threshold, 0.5),
            other => panic!("unexpected op: {other:?}"),
        }
        let reparsed = AugmentConfig::from_json(&config.ops_to_json(), 1).unwrap();
        assert_eq!(reparsed, config);
    }

    #[test]
    fn unknown_op_is_config_error() {
        assert!(AugmentConfig::from_json(r#"[{"op": "random_adjust_hue"}]"#, 0).is_err());
    }

    #[test]
    fn scale_boxes_converts_normalized_to_pixel() {
        let config = AugmentConfig::new(vec![AugmentOp::ScaleBoxesToPixelCoordinates], 0).unwrap();
        let img = test_image();
        let boxes = vec![BoundingBox::normalized(0.25, 0.5, 0.75, 1.0).unwrap()];
        let out = apply_pipeline(&img, &boxes, &config, 0).unwrap();
        assert_eq!(out.boxes[0], px(4.0, 6.0, 12.0, 12.0));

        // Already-pixel boxes are a configuration bug, not a silent no-op.
        assert!(apply_pipeline(&img, &[px(0.0, 0.0, 1.0, 1.0)], &config, 0).is_err());
    }

    #[test]
    fn crop_keeps_index_mapping() {
        let config = AugmentConfig::new(
            vec![AugmentOp::RandomCropImage {
                min_fraction: 0.5,
                max_fraction: 0.5,
                retain_threshold: 0.9,
            }],
            4,
        )
        .unwrap();
        let img = test_image();
        let boxes = vec![
            px(0.0, 0.0, 16.0, 12.0),
            px(6.0, 5.0, 8.0, 7.0),
            px(15.0, 11.0, 16.0, 12.0),
        ];
        let out = apply_pipeline(&img, &boxes, &config, 3).unwrap();
        assert_eq!(out.boxes.len(), out.kept_box_indices.len());
        for &idx in &out.kept_box_indices {
            assert!(idx < boxes.len());
        }
    }
}
