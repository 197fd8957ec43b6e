//! In-pipeline image representation.

use crate::geometry::ImageSize;

use super::AugmentError;

/// A decoded image inside the augmentation pipeline.
///
/// Pixels are row-major and channel-interleaved, real-valued in `[0, 1]`
/// (8-bit per channel in storage). Either 1 or 3 channels.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageBuffer {
    width: u32,
    height: u32,
    channels: u8,
    pixels: Vec<f32>,
}

impl ImageBuffer {
    /// A constant-valued image. `fill` is clamped to `[0, 1]`.
    pub fn filled(width: u32, height: u32, channels: u8, fill: f32) -> Result<Self, AugmentError> {
        validate_dims(width, height, channels)?;
        let len = width as usize * height as usize * channels as usize;
        Ok(Self {
            width,
            height,
            channels,
            pixels: vec![fill.clamp(0.0, 1.0); len],
        })
    }

    /// Wraps raw `[0, 1]` pixel data; the length must match the dimensions.
    pub fn from_pixels(
        width: u32,
        height: u32,
        channels: u8,
        pixels: Vec<f32>,
    ) -> Result<Self, AugmentError> {
        validate_dims(width, height, channels)?;
        let expected = width as usize * height as usize * channels as usize;
        if pixels.len() != expected {
            return Err(AugmentError::BadImage {
                reason: format!(
                    "pixel buffer holds {} values, {}x{}x{} needs {}",
                    pixels.len(),
                    width,
                    height,
                    channels,
                    expected
                ),
            });
        }
        if pixels.iter().any(|v| !v.is_finite()) {
            return Err(AugmentError::BadImage {
                reason: "pixel values must be finite".into(),
            });
        }
        Ok(Self {
            width,
            height,
            channels,
            pixels: pixels.into_iter().map(|v| v.clamp(0.0, 1.0)).collect(),
        })
    }

    /// Converts 8-bit storage data (v / 255) into pipeline form.
    pub fn from_u8(
        width: u32,
        height: u32,
        channels: u8,
        data: &[u8],
    ) -> Result<Self, AugmentError> {
        let pixels = data.iter().map(|&v| f32::from(v) / 255.0).collect();
        Self::from_pixels(width, height, channels, pixels)
    }

    /// Converts back to 8-bit storage: round(v * 255).
    pub fn to_u8(&self) -> Vec<u8> {
        self.pixels
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn channels(&self) -> u8 {
        self.channels
    }

    pub fn size(&self) -> ImageSize {
        ImageSize::new(self.width, self.height).expect("buffer dimensions are validated")
    }

    pub fn pixels(&self) -> &[f32] {
        &self.pixels
    }

    #[inline]
    fn index(&self, x: u32, y: u32, c: u8) -> usize {
        (y as usize * self.width as usize + x as usize) * self.channels as usize + c as usize
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32, c: u8) -> f32 {
        self.pixels[self.index(x, y, c)]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, c: u8, value: f32) {
        let idx = self.index(x, y, c);
        self.pixels[idx] = value.clamp(0.0, 1.0);
    }

    /// Applies `f` to every pixel value, clamping results to `[0, 1]`.
    pub fn map_values(&self, f: impl Fn(f32) -> f32) -> Self {
        Self {
            width: self.width,
            height: self.height,
            channels: self.channels,
            pixels: self.pixels.iter().map(|&v| f(v).clamp(0.0, 1.0)).collect(),
        }
    }

    /// Applies `f(channel, value)` to every pixel value, clamping results.
    pub fn map_channel_values(&self, f: impl Fn(u8, f32) -> f32) -> Self {
        let channels = self.channels;
        let pixels = self
            .pixels
            .chunks_exact(channels as usize)
            .flat_map(|px| {
                px.iter()
                    .enumerate()
                    .map(|(c, &v)| f(c as u8, v).clamp(0.0, 1.0))
                    .collect::<Vec<f32>>()
            })
            .collect();
        Self {
            width: self.width,
            height: self.height,
            channels,
            pixels,
        }
    }

    /// Per-channel mean over the whole image.
    pub fn channel_means(&self) -> Vec<f32> {
        let n = (self.width as usize * self.height as usize) as f64;
        let mut sums = vec![0.0f64; self.channels as usize];
        for px in self.pixels.chunks_exact(self.channels as usize) {
            for (c, &v) in px.iter().enumerate() {
                sums[c] += f64::from(v);
            }
        }
        sums.into_iter().map(|s| (s / n) as f32).collect()
    }
}

fn validate_dims(width: u32, height: u32, channels: u8) -> Result<(), AugmentError> {
    if width < 1 || height < 1 {
        return Err(AugmentError::BadImage {
            reason: format!("image dimensions {width}x{height} must be >= 1"),
        });
    }
    if channels != 1 && channels != 3 {
        return Err(AugmentError::BadImage {
            reason: format!("channels must be 1 or 3, got {channels}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_u8_roundtrips_storage() {
        let data: Vec<u8> = (0..=255).collect();
        let img = ImageBuffer::from_u8(16, 16, 1, &data).unwrap();
        assert_eq!(img.to_u8(), data);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(ImageBuffer::from_pixels(4, 4, 3, vec![0.0; 10]).is_err());
        assert!(ImageBuffer::from_pixels(0, 4, 1, vec![]).is_err());
        assert!(ImageBuffer::from_pixels(2, 2, 2, vec![0.0; 8]).is_err());
    }

    #[test]
    fn values_clamp_to_unit_interval() {
        let img = ImageBuffer::from_pixels(1, 1, 3, vec![0.5, 2.0, -1.0]).unwrap();
        assert_eq!(img.pixels(), &[0.5, 1.0, 0.0]);
        let mapped = img.map_values(|v| v + 10.0);
        assert_eq!(mapped.pixels(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn channel_means_are_per_channel() {
        let img = ImageBuffer::from_pixels(2, 1, 3, vec![0.0, 0.5, 1.0, 1.0, 0.5, 0.0]).unwrap();
        assert_eq!(img.channel_means(), vec![0.5, 0.5, 0.5]);
    }
}
