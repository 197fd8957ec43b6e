//! The individual augmentation operators.
//!
//! All operators are pure: randomness, where needed, comes in as an explicit
//! RNG handle. Geometric operators move boxes together with pixels and expect
//! pixel-space boxes lying within the image frame.

use rand::Rng;

use crate::geometry::{BoundingBox, CoordinateSpace, ImageSize};

use super::{AugmentError, ImageBuffer};

pub(super) fn check_boxes_in_frame(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
) -> Result<(), AugmentError> {
    let (w, h) = (f64::from(img.width()), f64::from(img.height()));
    for b in boxes {
        if b.space() != CoordinateSpace::Pixel {
            return Err(AugmentError::BoxesNotPixelSpace);
        }
        if b.xmin() < 0.0 || b.ymin() < 0.0 || b.xmax() > w || b.ymax() > h {
            return Err(AugmentError::BoxOutsideImage {
                xmin: b.xmin(),
                ymin: b.ymin(),
                xmax: b.xmax(),
                ymax: b.ymax(),
                width: img.width(),
                height: img.height(),
            });
        }
    }
    Ok(())
}

fn rebuild_box(
    xmin: f64,
    ymin: f64,
    xmax: f64,
    ymax: f64,
) -> Result<BoundingBox, AugmentError> {
    Ok(BoundingBox::pixel(xmin, ymin, xmax, ymax)?)
}

/// Mirrors pixels about the vertical axis; box x-coordinates reflect as
/// `(xmin, xmax) -> (W - xmax, W - xmin)`.
pub fn flip_horizontal(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
) -> Result<(ImageBuffer, Vec<BoundingBox>), AugmentError> {
    check_boxes_in_frame(img, boxes)?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                out.set(x, y, c, img.get(w - 1 - x, y, c));
            }
        }
    }
    let wf = f64::from(w);
    let flipped = boxes
        .iter()
        .map(|b| rebuild_box(wf - b.xmax(), b.ymin(), wf - b.xmin(), b.ymax()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, flipped))
}

/// Mirrors pixels about the horizontal axis; box y-coordinates reflect as
/// `(ymin, ymax) -> (H - ymax, H - ymin)`.
pub fn flip_vertical(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
) -> Result<(ImageBuffer, Vec<BoundingBox>), AugmentError> {
    check_boxes_in_frame(img, boxes)?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    let mut out = img.clone();
    for y in 0..h {
        for x in 0..w {
            for c in 0..ch {
                out.set(x, y, c, img.get(x, h - 1 - y, c));
            }
        }
    }
    let hf = f64::from(h);
    let flipped = boxes
        .iter()
        .map(|b| rebuild_box(b.xmin(), hf - b.ymax(), b.xmax(), hf - b.ymin()))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, flipped))
}

/// Rotates 90 degrees counter-clockwise: the output canvas is `H x W` and the
/// point `(x, y)` maps to `(y, W - x)`.
pub fn rotate90(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
) -> Result<(ImageBuffer, Vec<BoundingBox>), AugmentError> {
    check_boxes_in_frame(img, boxes)?;
    let (w, h, ch) = (img.width(), img.height(), img.channels());
    // Output is h wide and w tall; out(x', y') = in(W - 1 - y', x').
    let mut out = ImageBuffer::filled(h, w, ch, 0.0)?;
    for y_out in 0..w {
        for x_out in 0..h {
            for c in 0..ch {
                out.set(x_out, y_out, c, img.get(w - 1 - y_out, x_out, c));
            }
        }
    }
    let wf = f64::from(w);
    let rotated = boxes
        .iter()
        .map(|b| {
            // Corners map to (y, W - x); min/max re-normalizes the rectangle.
            rebuild_box(b.ymin(), wf - b.xmax(), b.ymax(), wf - b.xmin())
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, rotated))
}

/// Crops pixels to `region` (integer pixel coordinates, positive area) and
/// re-expresses boxes in crop coordinates. Boxes whose retained area fraction
/// falls below `retain_threshold` are dropped; the second return value maps
/// surviving boxes back to their input indices.
pub fn crop_indexed(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
    region: &BoundingBox,
    retain_threshold: f64,
) -> Result<(ImageBuffer, Vec<BoundingBox>, Vec<usize>), AugmentError> {
    check_boxes_in_frame(img, boxes)?;
    if region.space() != CoordinateSpace::Pixel {
        return Err(AugmentError::BoxesNotPixelSpace);
    }
    let coords = [region.xmin(), region.ymin(), region.xmax(), region.ymax()];
    if coords.iter().any(|v| v.fract() != 0.0) {
        return Err(AugmentError::BadConfig {
            reason: format!(
                "crop region ({}, {}, {}, {}) must have integer pixel coordinates",
                coords[0], coords[1], coords[2], coords[3]
            ),
        });
    }
    if region.area() == 0.0 {
        return Err(AugmentError::BadConfig {
            reason: "crop region must have positive area".into(),
        });
    }
    let (w, h) = (f64::from(img.width()), f64::from(img.height()));
    if region.xmin() < 0.0 || region.ymin() < 0.0 || region.xmax() > w || region.ymax() > h {
        return Err(AugmentError::BadConfig {
            reason: "crop region must lie within the image".into(),
        });
    }
    if !(0.0..=1.0).contains(&retain_threshold) {
        return Err(AugmentError::BadConfig {
            reason: format!("retain_threshold {retain_threshold} must lie in [0, 1]"),
        });
    }

    let (x0, y0) = (region.xmin() as u32, region.ymin() as u32);
    let (new_w, new_h) = (region.width() as u32, region.height() as u32);
    let mut out = ImageBuffer::filled(new_w, new_h, img.channels(), 0.0)?;
    for y in 0..new_h {
        for x in 0..new_w {
            for c in 0..img.channels() {
                out.set(x, y, c, img.get(x0 + x, y0 + y, c));
            }
        }
    }

    let mut kept_boxes = Vec::new();
    let mut kept_indices = Vec::new();
    for (i, b) in boxes.iter().enumerate() {
        // Closed-interval clip so degenerate boxes on the region edge survive.
        let cx0 = b.xmin().max(region.xmin());
        let cy0 = b.ymin().max(region.ymin());
        let cx1 = b.xmax().min(region.xmax());
        let cy1 = b.ymax().min(region.ymax());
        if cx0 > cx1 || cy0 > cy1 {
            continue;
        }
        let clipped = rebuild_box(cx0, cy0, cx1, cy1)?;
        let retained = if b.area() > 0.0 {
            clipped.area() / b.area()
        } else {
            1.0
        };
        if retained < retain_threshold {
            continue;
        }
        kept_boxes.push(clipped.translate(-region.xmin(), -region.ymin())?);
        kept_indices.push(i);
    }
    Ok((out, kept_boxes, kept_indices))
}

/// [`crop_indexed`] without the survivor index map.
pub fn crop(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
    region: &BoundingBox,
    retain_threshold: f64,
) -> Result<(ImageBuffer, Vec<BoundingBox>), AugmentError> {
    let (out, boxes, _) = crop_indexed(img, boxes, region, retain_threshold)?;
    Ok((out, boxes))
}

/// Grows the canvas by the given pixel amounts, filling new pixels with
/// `fill_value` and translating boxes by `(+left, +top)`.
pub fn pad(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
    left: u32,
    top: u32,
    right: u32,
    bottom: u32,
    fill_value: f32,
) -> Result<(ImageBuffer, Vec<BoundingBox>), AugmentError> {
    check_boxes_in_frame(img, boxes)?;
    let new_w = img.width() + left + right;
    let new_h = img.height() + top + bottom;
    let mut out = ImageBuffer::filled(new_w, new_h, img.channels(), fill_value)?;
    for y in 0..img.height() {
        for x in 0..img.width() {
            for c in 0..img.channels() {
                out.set(left + x, top + y, c, img.get(x, y, c));
            }
        }
    }
    let moved = boxes
        .iter()
        .map(|b| Ok(b.translate(f64::from(left), f64::from(top))?))
        .collect::<Result<Vec<_>, AugmentError>>()?;
    Ok((out, moved))
}

/// Pixel-value transforms. Box lists pass through photometric ops untouched.
#[derive(Debug, Clone, PartialEq)]
pub enum Photometric {
    /// `v + delta`.
    Brightness { delta: f32 },
    /// `(v - channel_mean) * factor + channel_mean`.
    Contrast { factor: f32 },
    /// `v * scale`.
    PixelValueScale { scale: f32 },
    /// Affine map from `[original_min, original_max]` to
    /// `[target_min, target_max]`.
    Normalize {
        original_min: f32,
        original_max: f32,
        target_min: f32,
        target_max: f32,
    },
    /// `v - means[channel]`.
    SubtractChannelMean { means: Vec<f32> },
    /// Luma `0.299 R + 0.587 G + 0.114 B`, replicated across channels.
    RgbToGray,
}

/// Applies one photometric transform; results are clamped to `[0, 1]`.
pub fn photometric(img: &ImageBuffer, op: &Photometric) -> Result<ImageBuffer, AugmentError> {
    match op {
        Photometric::Brightness { delta } => {
            if !delta.is_finite() {
                return Err(AugmentError::BadConfig {
                    reason: "brightness delta must be finite".into(),
                });
            }
            Ok(img.map_values(|v| v + delta))
        }
        Photometric::Contrast { factor } => {
            if !factor.is_finite() || *factor < 0.0 {
                return Err(AugmentError::BadConfig {
                    reason: format!("contrast factor {factor} must be a nonnegative real"),
                });
            }
            let means = img.channel_means();
            Ok(img.map_channel_values(|c, v| (v - means[c as usize]) * factor + means[c as usize]))
        }
        Photometric::PixelValueScale { scale } => {
            if !scale.is_finite() || *scale < 0.0 {
                return Err(AugmentError::BadConfig {
                    reason: format!("pixel value scale {scale} must be a nonnegative real"),
                });
            }
            Ok(img.map_values(|v| v * scale))
        }
        Photometric::Normalize {
            original_min,
            original_max,
            target_min,
            target_max,
        } => {
            if original_max <= original_min {
                return Err(AugmentError::BadConfig {
                    reason: "normalize requires original_max > original_min".into(),
                });
            }
            let scale = (target_max - target_min) / (original_max - original_min);
            let (o_min, t_min) = (*original_min, *target_min);
            Ok(img.map_values(move |v| (v - o_min) * scale + t_min))
        }
        Photometric::SubtractChannelMean { means } => {
            if means.len() != img.channels() as usize {
                return Err(AugmentError::BadConfig {
                    reason: format!(
                        "subtract_channel_mean got {} means for {} channels",
                        means.len(),
                        img.channels()
                    ),
                });
            }
            let means = means.clone();
            Ok(img.map_channel_values(move |c, v| v - means[c as usize]))
        }
        Photometric::RgbToGray => {
            if img.channels() == 1 {
                return Ok(img.clone());
            }
            let mut out = img.clone();
            for y in 0..img.height() {
                for x in 0..img.width() {
                    let luma = 0.299 * img.get(x, y, 0)
                        + 0.587 * img.get(x, y, 1)
                        + 0.114 * img.get(x, y, 2);
                    for c in 0..3 {
                        out.set(x, y, c, luma);
                    }
                }
            }
            Ok(out)
        }
    }
}

/// Blacks out up to `max_patches` square regions. Each candidate patch is
/// placed with probability `probability`; the side length is
/// `floor(size_fraction * min(W, H))` pixels.
pub fn black_patches<R: Rng>(
    img: &ImageBuffer,
    max_patches: u32,
    probability: f64,
    size_fraction: f64,
    rng: &mut R,
) -> Result<ImageBuffer, AugmentError> {
    if !(0.0..=1.0).contains(&probability) {
        return Err(AugmentError::BadConfig {
            reason: format!("patch probability {probability} must lie in [0, 1]"),
        });
    }
    if !(size_fraction > 0.0 && size_fraction <= 1.0) {
        return Err(AugmentError::BadConfig {
            reason: format!("size_fraction {size_fraction} must lie in (0, 1]"),
        });
    }
    let side = (size_fraction * f64::from(img.width().min(img.height()))).floor() as u32;
    let mut out = img.clone();
    for _ in 0..max_patches {
        if !rng.random_bool(probability) {
            continue;
        }
        if side == 0 {
            continue;
        }
        let x0 = rng.random_range(0..=img.width() - side);
        let y0 = rng.random_range(0..=img.height() - side);
        for y in y0..y0 + side {
            for x in x0..x0 + side {
                for c in 0..img.channels() {
                    out.set(x, y, c, 0.0);
                }
            }
        }
    }
    Ok(out)
}

/// Bilinear resample to `target`; boxes scale by `(target.w / W, target.h / H)`.
pub fn resize(
    img: &ImageBuffer,
    boxes: &[BoundingBox],
    target: ImageSize,
) -> Result<(ImageBuffer, Vec<BoundingBox>), AugmentError> {
    check_boxes_in_frame(img, boxes)?;
    let (w_in, h_in) = (img.width(), img.height());
    let (w_out, h_out) = (target.width(), target.height());
    if (w_in, h_in) == (w_out, h_out) {
        return Ok((img.clone(), boxes.to_vec()));
    }

    let x_scale = f64::from(w_in) / f64::from(w_out);
    let y_scale = f64::from(h_in) / f64::from(h_out);
    let mut out = ImageBuffer::filled(w_out, h_out, img.channels(), 0.0)?;
    for y in 0..h_out {
        // Pixel-center alignment: sample at (out + 0.5) * scale - 0.5.
        let src_y = (f64::from(y) + 0.5) * y_scale - 0.5;
        let y0 = src_y.floor().clamp(0.0, f64::from(h_in - 1)) as u32;
        let y1 = (y0 + 1).min(h_in - 1);
        let fy = (src_y - f64::from(y0)).clamp(0.0, 1.0) as f32;
        for x in 0..w_out {
            let src_x = (f64::from(x) + 0.5) * x_scale - 0.5;
            let x0 = src_x.floor().clamp(0.0, f64::from(w_in - 1)) as u32;
            let x1 = (x0 + 1).min(w_in - 1);
            let fx = (src_x - f64::from(x0)).clamp(0.0, 1.0) as f32;
            for c in 0..img.channels() {
                let top = img.get(x0, y0, c) * (1.0 - fx) + img.get(x1, y0, c) * fx;
                let bottom = img.get(x0, y1, c) * (1.0 - fx) + img.get(x1, y1, c) * fx;
                out.set(x, y, c, top * (1.0 - fy) + bottom * fy);
            }
        }
    }

    let sx = f64::from(w_out) / f64::from(w_in);
    let sy = f64::from(h_out) / f64::from(h_in);
    // Clamp away float dust: a box touching the source edge must still touch
    // (not overshoot) the target edge after a non-dyadic scale.
    let cx = |v: f64| (v * sx).clamp(0.0, f64::from(w_out));
    let cy = |v: f64| (v * sy).clamp(0.0, f64::from(h_out));
    let scaled = boxes
        .iter()
        .map(|b| rebuild_box(cx(b.xmin()), cy(b.ymin()), cx(b.xmax()), cy(b.ymax())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((out, scaled))
}
