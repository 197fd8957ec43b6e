//! Axis-aligned bounding boxes and the IoU metric.
//!
//! Coordinates are continuous reals: a box covers the geometric rectangle
//! `[xmin, xmax] x [ymin, ymax]` and its area is `(xmax - xmin) * (ymax - ymin)`,
//! with no inclusive-pixel "+1" convention. Every box carries an explicit
//! [`CoordinateSpace`] tag that is checked by all binary operations, since
//! silently mixing pixel and normalized coordinates is the likeliest bug in a
//! detection pipeline.

use serde::{Deserialize, Serialize};

/// Whether box coordinates are pixels or dimensionless fractions of the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordinateSpace {
    /// Coordinates in `[0, width] x [0, height]` pixels.
    Pixel,
    /// Coordinates in `[0, 1] x [0, 1]`.
    Normalized,
}

/// Errors from bounding-box construction and arithmetic.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("invalid box: ({xmin}, {ymin}, {xmax}, {ymax}): {reason}")]
    InvalidBox {
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
        reason: String,
    },
    #[error("invalid image size {width}x{height}: both dimensions must be >= 1")]
    InvalidSize { width: u32, height: u32 },
    #[error("coordinate space mismatch: {left:?} vs {right:?}")]
    SpaceMismatch {
        left: CoordinateSpace,
        right: CoordinateSpace,
    },
    #[error("IoU is undefined when both boxes have zero area")]
    UndefinedIou,
    #[error("box ({xmin}, {ymin}, {xmax}, {ymax}) exceeds bounds {bound_w}x{bound_h}")]
    OutOfBounds {
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
        bound_w: f64,
        bound_h: f64,
    },
    #[error("expected a box in {expected:?} space, got {actual:?}")]
    WrongSpace {
        expected: CoordinateSpace,
        actual: CoordinateSpace,
    },
}

/// An axis-aligned rectangle; the unit of all geometry in this crate.
///
/// Invariants (enforced at construction): `xmin <= xmax`, `ymin <= ymax`, all
/// coordinates finite, and in [`CoordinateSpace::Normalized`] space all four
/// coordinates lie in `[0, 1]`. Zero-area boxes are valid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    xmin: f64,
    ymin: f64,
    xmax: f64,
    ymax: f64,
    space: CoordinateSpace,
}

impl BoundingBox {
    /// Creates a box, validating the invariants for `space`.
    pub fn new(
        xmin: f64,
        ymin: f64,
        xmax: f64,
        ymax: f64,
        space: CoordinateSpace,
    ) -> Result<Self, GeometryError> {
        let invalid = |reason: &str| GeometryError::InvalidBox {
            xmin,
            ymin,
            xmax,
            ymax,
            reason: reason.to_string(),
        };
        if !(xmin.is_finite() && ymin.is_finite() && xmax.is_finite() && ymax.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        if xmin > xmax || ymin > ymax {
            return Err(invalid("negative extent (min > max)"));
        }
        if space == CoordinateSpace::Normalized {
            let in_unit = |v: f64| (0.0..=1.0).contains(&v);
            if !(in_unit(xmin) && in_unit(ymin) && in_unit(xmax) && in_unit(ymax)) {
                return Err(invalid("normalized coordinates must lie in [0, 1]"));
            }
        }
        Ok(Self {
            xmin,
            ymin,
            xmax,
            ymax,
            space,
        })
    }

    /// Shorthand for a pixel-space box.
    pub fn pixel(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, GeometryError> {
        Self::new(xmin, ymin, xmax, ymax, CoordinateSpace::Pixel)
    }

    /// Shorthand for a normalized-space box.
    pub fn normalized(xmin: f64, ymin: f64, xmax: f64, ymax: f64) -> Result<Self, GeometryError> {
        Self::new(xmin, ymin, xmax, ymax, CoordinateSpace::Normalized)
    }

    pub fn xmin(&self) -> f64 {
        self.xmin
    }

    pub fn ymin(&self) -> f64 {
        self.ymin
    }

    pub fn xmax(&self) -> f64 {
        self.xmax
    }

    pub fn ymax(&self) -> f64 {
        self.ymax
    }

    pub fn space(&self) -> CoordinateSpace {
        self.space
    }

    pub fn width(&self) -> f64 {
        self.xmax - self.xmin
    }

    pub fn height(&self) -> f64 {
        self.ymax - self.ymin
    }

    /// Geometric rectangle area, `(xmax - xmin) * (ymax - ymin)`.
    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    fn require_same_space(&self, other: &Self) -> Result<(), GeometryError> {
        if self.space != other.space {
            return Err(GeometryError::SpaceMismatch {
                left: self.space,
                right: other.space,
            });
        }
        Ok(())
    }

    /// Overlap rectangle of two boxes, or `None` when they are disjoint
    /// (touching edges count as disjoint: the overlap would have zero extent).
    pub fn intersect(&self, other: &Self) -> Result<Option<Self>, GeometryError> {
        self.require_same_space(other)?;
        let xmin = self.xmin.max(other.xmin);
        let ymin = self.ymin.max(other.ymin);
        let xmax = self.xmax.min(other.xmax);
        let ymax = self.ymax.min(other.ymax);
        if xmin >= xmax || ymin >= ymax {
            return Ok(None);
        }
        Ok(Some(Self {
            xmin,
            ymin,
            xmax,
            ymax,
            space: self.space,
        }))
    }

    /// Intersection-over-union of two boxes in the same space.
    ///
    /// Returns 0 when the boxes are disjoint. Both boxes having zero area is
    /// an error rather than 0/0: it almost always indicates an annotation bug.
    pub fn iou(&self, other: &Self) -> Result<f64, GeometryError> {
        self.require_same_space(other)?;
        let area_a = self.area();
        let area_b = other.area();
        if area_a == 0.0 && area_b == 0.0 {
            return Err(GeometryError::UndefinedIou);
        }
        let overlap = match self.intersect(other)? {
            Some(rect) => rect.area(),
            None => return Ok(0.0),
        };
        Ok(overlap / (area_a + area_b - overlap))
    }

    /// Converts a pixel-space box to normalized coordinates by dividing by the
    /// image dimensions. The box must lie within `[0, width] x [0, height]`.
    pub fn normalize(&self, size: ImageSize) -> Result<Self, GeometryError> {
        if self.space != CoordinateSpace::Pixel {
            return Err(GeometryError::WrongSpace {
                expected: CoordinateSpace::Pixel,
                actual: self.space,
            });
        }
        let (w, h) = (f64::from(size.width()), f64::from(size.height()));
        if self.xmin < 0.0 || self.ymin < 0.0 || self.xmax > w || self.ymax > h {
            return Err(GeometryError::OutOfBounds {
                xmin: self.xmin,
                ymin: self.ymin,
                xmax: self.xmax,
                ymax: self.ymax,
                bound_w: w,
                bound_h: h,
            });
        }
        Self::new(
            self.xmin / w,
            self.ymin / h,
            self.xmax / w,
            self.ymax / h,
            CoordinateSpace::Normalized,
        )
    }

    /// Converts a normalized-space box to pixel coordinates by multiplying by
    /// the image dimensions. Inverse of [`BoundingBox::normalize`].
    pub fn denormalize(&self, size: ImageSize) -> Result<Self, GeometryError> {
        if self.space != CoordinateSpace::Normalized {
            return Err(GeometryError::WrongSpace {
                expected: CoordinateSpace::Normalized,
                actual: self.space,
            });
        }
        let (w, h) = (f64::from(size.width()), f64::from(size.height()));
        Self::new(
            self.xmin * w,
            self.ymin * h,
            self.xmax * w,
            self.ymax * h,
            CoordinateSpace::Pixel,
        )
    }

    /// Clips this box to `bounds`; equals `intersect(self, bounds)`.
    pub fn clip(&self, bounds: &Self) -> Result<Option<Self>, GeometryError> {
        self.intersect(bounds)
    }

    /// Translates the box by `(dx, dy)` without revalidating bounds; used by
    /// crop/pad where the caller controls the target canvas.
    pub(crate) fn translate(&self, dx: f64, dy: f64) -> Result<Self, GeometryError> {
        Self::new(
            self.xmin + dx,
            self.ymin + dy,
            self.xmax + dx,
            self.ymax + dy,
            self.space,
        )
    }
}

/// Width and height of an image in whole pixels, both at least 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImageSize {
    width: u32,
    height: u32,
}

impl ImageSize {
    pub fn new(width: u32, height: u32) -> Result<Self, GeometryError> {
        if width < 1 || height < 1 {
            return Err(GeometryError::InvalidSize { width, height });
        }
        Ok(Self { width, height })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// The full image frame as a pixel-space box.
    pub fn frame(&self) -> BoundingBox {
        BoundingBox {
            xmin: 0.0,
            ymin: 0.0,
            xmax: f64::from(self.width),
            ymax: f64::from(self.height),
            space: CoordinateSpace::Pixel,
        }
    }
}

impl std::fmt::Display for ImageSize {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}", self.width, self.height)
    }
}
