//! Small I/O helpers shared by the subcommands.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::augment::ImageBuffer;
use crate::cli::CliError;

/// Writes a file atomically: temp file in the same directory, then rename.
/// Partial outputs never appear under the final name.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp_path = Path::new(&tmp);
    {
        let mut file = fs::File::create(tmp_path).map_err(|e| CliError::io(tmp_path, e))?;
        file.write_all(bytes).map_err(|e| CliError::io(tmp_path, e))?;
        file.sync_all().map_err(|e| CliError::io(tmp_path, e))?;
    }
    fs::rename(tmp_path, path).map_err(|e| CliError::io(path, e))
}

pub fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, CliError> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// FNV-1a of the filename: the stable per-image id for augmentation streams.
pub fn image_id_hash(name: &str) -> u64 {
    let mut hash: u64 = 0xCBF2_9CE4_8422_2325;
    for byte in name.as_bytes() {
        hash ^= u64::from(*byte);
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

/// Decodes a PNG/JPEG file into the pipeline buffer (3-channel unless the
/// image is stored single-channel).
pub fn load_image(path: &Path) -> Result<ImageBuffer, CliError> {
    let img = image::open(path).map_err(|e| CliError {
        code: "parse_error",
        message: format!("{}: image decode failed: {e}", path.display()),
    })?;
    let buffer = match img {
        image::DynamicImage::ImageLuma8(gray) => {
            ImageBuffer::from_u8(gray.width(), gray.height(), 1, gray.as_raw())
        }
        other => {
            let rgb = other.to_rgb8();
            ImageBuffer::from_u8(rgb.width(), rgb.height(), 3, rgb.as_raw())
        }
    };
    buffer.map_err(|e| CliError {
        code: "value_error",
        message: format!("{}: {e}", path.display()),
    })
}

/// Encodes the pipeline buffer as PNG bytes.
pub fn encode_png(buffer: &ImageBuffer) -> Result<Vec<u8>, CliError> {
    let data = buffer.to_u8();
    let mut bytes = Vec::new();
    let encoder = image::codecs::png::PngEncoder::new(&mut bytes);
    let color = if buffer.channels() == 1 {
        image::ExtendedColorType::L8
    } else {
        image::ExtendedColorType::Rgb8
    };
    image::ImageEncoder::write_image(encoder, &data, buffer.width(), buffer.height(), color)
        .map_err(|e| CliError {
            code: "io_error",
            message: format!("PNG encode failed: {e}"),
        })?;
    Ok(bytes)
}
