//! Framed, checksummed binary record files combining many serialized examples.
//!
//! Frame layout (all little-endian), compatible with the de-facto record-file
//! framing:
//!
//! ```text
//! u64  length
//! u32  masked crc32c of the 8 length bytes
//! u8   payload[length]
//! u32  masked crc32c of the payload
//! ```
//!
//! Payload layout, version 1 (all little-endian):
//!
//! ```text
//! magic "DREC" | version u16 | filename (u32 len + UTF-8) | width u32 |
//! height u32 | image bytes (u32 len + raw) | n_boxes u32 |
//! per box: class_id u32, xmin f32, ymin f32, xmax f32, ymax f32 (normalized)
//! ```
//!
//! Image bytes are stored as-is (the original encoded JPEG/PNG), never
//! re-encoded, so identical inputs always produce identical record bytes.

use std::io::{self, Read, Write};

use crate::annotations::ImageAnnotation;
use crate::geometry::{BoundingBox, GeometryError, ImageSize};
use crate::LabelMap;

pub const MAGIC: [u8; 4] = *b"DREC";
pub const VERSION: u16 = 1;

/// Bytes of frame overhead per payload: length + length CRC + payload CRC.
pub const FRAME_OVERHEAD: u64 = 16;

const CRC_TABLE: [u32; 256] = build_crc32c_table();

const fn build_crc32c_table() -> [u32; 256] {
    // Castagnoli polynomial 0x1EDC6F41, reflected form 0x82F63B78.
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut crc = i as u32;
        let mut bit = 0;
        while bit < 8 {
            crc = if crc & 1 != 0 {
                (crc >> 1) ^ 0x82F6_3B78
            } else {
                crc >> 1
            };
            bit += 1;
        }
        table[i] = crc;
        i += 1;
    }
    table
}

/// CRC-32C (Castagnoli, reflected, init and final xor `0xFFFFFFFF`).
pub fn crc32c(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &byte in bytes {
        crc = (crc >> 8) ^ CRC_TABLE[((crc ^ u32::from(byte)) & 0xFF) as usize];
    }
    crc ^ 0xFFFF_FFFF
}

/// Masked CRC-32C used by the frame format:
/// `((crc >> 15) | (crc << 17)) + 0xA282EAD8` with 32-bit wraparound.
pub fn masked_crc32c(bytes: &[u8]) -> u32 {
    mask_crc(crc32c(bytes))
}

pub fn mask_crc(crc: u32) -> u32 {
    crc.rotate_right(15).wrapping_add(0xA282_EAD8)
}

pub fn unmask_crc(masked: u32) -> u32 {
    masked.wrapping_sub(0xA282_EAD8).rotate_left(15)
}

/// Which of a frame's two checksums failed verification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChecksumKind {
    Length,
    Payload,
}

impl std::fmt::Display for ChecksumKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ChecksumKind::Length => write!(f, "length"),
            ChecksumKind::Payload => write!(f, "payload"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("frame {frame}: {kind} checksum mismatch (expected {expected:#010x}, got {actual:#010x})")]
    Corrupt {
        frame: usize,
        kind: ChecksumKind,
        expected: u32,
        actual: u32,
    },
    #[error("frame {frame}: truncated after {read} of {needed} bytes")]
    TruncatedFrame {
        frame: usize,
        read: usize,
        needed: usize,
    },
    #[error("I/O error after {written} complete frames: {source}")]
    Io {
        written: usize,
        #[source]
        source: io::Error,
    },
    #[error("payload does not start with magic \"DREC\"")]
    BadMagic,
    #[error("unsupported payload version {0} (supported: {VERSION})")]
    UnsupportedVersion(u16),
    #[error("payload truncated at offset {offset} while reading {field}")]
    TruncatedPayload { offset: usize, field: &'static str },
    #[error("payload field {field} is invalid: {reason}")]
    BadField { field: &'static str, reason: String },
    #[error("class {0:?} is not in the label map")]
    UnknownClass(String),
    #[error("object box is invalid: {0}")]
    BadBox(#[from] GeometryError),
    #[error("image bytes must be nonempty")]
    EmptyImage,
}

/// One normalized box with its class id, as stored in a record payload.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordBox {
    pub class_id: u32,
    /// Normalized-space box; coordinates are quantized to f32 on write.
    pub box_: BoundingBox,
}

/// The decoded content of one record payload.
#[derive(Debug, Clone, PartialEq)]
pub struct ExamplePayload {
    pub filename: String,
    pub size: ImageSize,
    pub image_bytes: Vec<u8>,
    pub boxes: Vec<RecordBox>,
}

impl ExamplePayload {
    /// Serializes to the version-1 payload layout. Deterministic: identical
    /// inputs yield identical bytes.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(
            4 + 2 + 4 + self.filename.len() + 8 + 4 + self.image_bytes.len() + 4
                + self.boxes.len() * 20,
        );
        out.extend_from_slice(&MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.filename.len() as u32).to_le_bytes());
        out.extend_from_slice(self.filename.as_bytes());
        out.extend_from_slice(&self.size.width().to_le_bytes());
        out.extend_from_slice(&self.size.height().to_le_bytes());
        out.extend_from_slice(&(self.image_bytes.len() as u32).to_le_bytes());
        out.extend_from_slice(&self.image_bytes);
        out.extend_from_slice(&(self.boxes.len() as u32).to_le_bytes());
        for b in &self.boxes {
            out.extend_from_slice(&b.class_id.to_le_bytes());
            out.extend_from_slice(&(b.box_.xmin() as f32).to_le_bytes());
            out.extend_from_slice(&(b.box_.ymin() as f32).to_le_bytes());
            out.extend_from_slice(&(b.box_.xmax() as f32).to_le_bytes());
            out.extend_from_slice(&(b.box_.ymax() as f32).to_le_bytes());
        }
        out
    }

    /// Exact inverse of [`ExamplePayload::to_bytes`].
    pub fn from_bytes(payload: &[u8]) -> Result<Self, RecordError> {
        let mut cursor = PayloadCursor::new(payload);
        let magic = cursor.take(4, "magic")?;
        if magic != MAGIC {
            return Err(RecordError::BadMagic);
        }
        let version = cursor.read_u16("version")?;
        if version != VERSION {
            return Err(RecordError::UnsupportedVersion(version));
        }
        let filename_len = cursor.read_u32("filename length")? as usize;
        let filename_bytes = cursor.take(filename_len, "filename")?;
        let filename = String::from_utf8(filename_bytes.to_vec()).map_err(|_| {
            RecordError::BadField {
                field: "filename",
                reason: "not valid UTF-8".into(),
            }
        })?;
        let width = cursor.read_u32("width")?;
        let height = cursor.read_u32("height")?;
        let size = ImageSize::new(width, height).map_err(|e| RecordError::BadField {
            field: "size",
            reason: e.to_string(),
        })?;
        let image_len = cursor.read_u32("image length")? as usize;
        let image_bytes = cursor.take(image_len, "image bytes")?.to_vec();
        let n_boxes = cursor.read_u32("box count")? as usize;
        let mut boxes = Vec::with_capacity(n_boxes);
        for _ in 0..n_boxes {
            let class_id = cursor.read_u32("class id")?;
            let xmin = cursor.read_f32("xmin")?;
            let ymin = cursor.read_f32("ymin")?;
            let xmax = cursor.read_f32("xmax")?;
            let ymax = cursor.read_f32("ymax")?;
            let box_ = BoundingBox::normalized(
                f64::from(xmin),
                f64::from(ymin),
                f64::from(xmax),
                f64::from(ymax),
            )?;
            boxes.push(RecordBox { class_id, box_ });
        }
        Ok(Self {
            filename,
            size,
            image_bytes,
            boxes,
        })
    }
}

struct PayloadCursor<'a> {
    data: &'a [u8],
    offset: usize,
}

impl<'a> PayloadCursor<'a> {
    fn new(data: &'a [u8]) -> Self {
        Self { data, offset: 0 }
    }

    fn take(&mut self, n: usize, field: &'static str) -> Result<&'a [u8], RecordError> {
        if self.offset + n > self.data.len() {
            return Err(RecordError::TruncatedPayload {
                offset: self.offset,
                field,
            });
        }
        let slice = &self.data[self.offset..self.offset + n];
        self.offset += n;
        Ok(slice)
    }

    fn read_u16(&mut self, field: &'static str) -> Result<u16, RecordError> {
        let bytes = self.take(2, field)?;
        Ok(u16::from_le_bytes([bytes[0], bytes[1]]))
    }

    fn read_u32(&mut self, field: &'static str) -> Result<u32, RecordError> {
        let bytes = self.take(4, field)?;
        Ok(u32::from_le_bytes([bytes[0], bytes[1], bytes[2], bytes[3]]))
    }

    fn read_f32(&mut self, field: &'static str) -> Result<f32, RecordError> {
        Ok(f32::from_bits(self.read_u32(field)?))
    }
}

/// Builds the payload for one annotated image: class names are resolved
/// through the label map and boxes are normalized by the image size.
pub fn encode_example(
    ann: &ImageAnnotation,
    image_bytes: &[u8],
    map: &LabelMap,
) -> Result<Vec<u8>, RecordError> {
    if image_bytes.is_empty() {
        return Err(RecordError::EmptyImage);
    }
    let mut boxes = Vec::with_capacity(ann.objects.len());
    for obj in &ann.objects {
        let class_id = map
            .resolve(&obj.class_name)
            .map_err(|_| RecordError::UnknownClass(obj.class_name.clone()))?;
        let box_ = obj.box_.normalize(ann.size)?;
        boxes.push(RecordBox { class_id, box_ });
    }
    let payload = ExamplePayload {
        filename: ann.filename.clone(),
        size: ann.size,
        image_bytes: image_bytes.to_vec(),
        boxes,
    };
    Ok(payload.to_bytes())
}

/// Decodes one payload back into its example content.
pub fn decode_example(payload: &[u8]) -> Result<ExamplePayload, RecordError> {
    ExamplePayload::from_bytes(payload)
}

/// Appends `payloads` to `sink` as frames, in order. The file is a plain
/// concatenation of frames with no header or footer. Returns the number of
/// frames written; on I/O failure the error carries how many frames were
/// completely written before it.
pub fn write_records<I, P, W>(payloads: I, sink: &mut W) -> Result<usize, RecordError>
where
    I: IntoIterator<Item = P>,
    P: AsRef<[u8]>,
    W: Write,
{
    let mut written = 0usize;
    for payload in payloads {
        write_frame(payload.as_ref(), sink).map_err(|source| RecordError::Io {
            written,
            source,
        })?;
        written += 1;
    }
    Ok(written)
}

fn write_frame<W: Write>(payload: &[u8], sink: &mut W) -> io::Result<()> {
    let len_bytes = (payload.len() as u64).to_le_bytes();
    sink.write_all(&len_bytes)?;
    sink.write_all(&masked_crc32c(&len_bytes).to_le_bytes())?;
    sink.write_all(payload)?;
    sink.write_all(&masked_crc32c(payload).to_le_bytes())?;
    Ok(())
}

/// Streaming frame reader: yields payloads in file order, verifying both
/// checksums of every frame.
pub struct RecordReader<R> {
    source: R,
    frame: usize,
    failed: bool,
}

impl<R: Read> RecordReader<R> {
    pub fn new(source: R) -> Self {
        Self {
            source,
            frame: 0,
            failed: false,
        }
    }

    fn read_frame(&mut self) -> Result<Option<Vec<u8>>, RecordError> {
        let frame = self.frame;
        let mut header = [0u8; 12];
        match read_exact_or_eof(&mut self.source, &mut header) {
            ReadOutcome::Eof => return Ok(None),
            ReadOutcome::Partial(read) => {
                return Err(RecordError::TruncatedFrame {
                    frame,
                    read,
                    needed: 12,
                })
            }
            ReadOutcome::Io(e) => {
                return Err(RecordError::Io {
                    written: frame,
                    source: e,
                })
            }
            ReadOutcome::Full => {}
        }

        let len_bytes: [u8; 8] = header[..8].try_into().expect("slice of fixed size");
        let stored_len_crc = u32::from_le_bytes(header[8..12].try_into().expect("4 bytes"));
        let actual_len_crc = masked_crc32c(&len_bytes);
        if stored_len_crc != actual_len_crc {
            return Err(RecordError::Corrupt {
                frame,
                kind: ChecksumKind::Length,
                expected: stored_len_crc,
                actual: actual_len_crc,
            });
        }

        let len = u64::from_le_bytes(len_bytes) as usize;
        let mut body = vec![0u8; len + 4];
        match read_exact_or_eof(&mut self.source, &mut body) {
            ReadOutcome::Full => {}
            ReadOutcome::Eof => {
                return Err(RecordError::TruncatedFrame {
                    frame,
                    read: 12,
                    needed: 12 + len + 4,
                })
            }
            ReadOutcome::Partial(read) => {
                return Err(RecordError::TruncatedFrame {
                    frame,
                    read: 12 + read,
                    needed: 12 + len + 4,
                })
            }
            ReadOutcome::Io(e) => {
                return Err(RecordError::Io {
                    written: frame,
                    source: e,
                })
            }
        }

        let payload = &body[..len];
        let stored_payload_crc =
            u32::from_le_bytes(body[len..].try_into().expect("4 bytes"));
        let actual_payload_crc = masked_crc32c(payload);
        if stored_payload_crc != actual_payload_crc {
            return Err(RecordError::Corrupt {
                frame,
                kind: ChecksumKind::Payload,
                expected: stored_payload_crc,
                actual: actual_payload_crc,
            });
        }

        self.frame += 1;
        body.truncate(len);
        Ok(Some(body))
    }
}

impl<R: Read> Iterator for RecordReader<R> {
    type Item = Result<Vec<u8>, RecordError>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.failed {
            return None;
        }
        match self.read_frame() {
            Ok(Some(payload)) => Some(Ok(payload)),
            Ok(None) => None,
            Err(e) => {
                self.failed = true;
                Some(Err(e))
            }
        }
    }
}

/// Convenience: reads and verifies every frame of `source`.
pub fn read_records<R: Read>(source: R) -> Result<Vec<Vec<u8>>, RecordError> {
    RecordReader::new(source).collect()
}

enum ReadOutcome {
    Full,
    Eof,
    Partial(usize),
    Io(io::Error),
}

fn read_exact_or_eof<R: Read>(reader: &mut R, buf: &mut [u8]) -> ReadOutcome {
    let mut filled = 0;
    while filled < buf.len() {
        match reader.read(&mut buf[filled..]) {
            Ok(0) => {
                return if filled == 0 {
                    ReadOutcome::Eof
                } else {
                    ReadOutcome::Partial(filled)
                }
            }
            Ok(n) => filled += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => continue,
            Err(e) => return ReadOutcome::Io(e),
        }
    }
    ReadOutcome::Full
}
