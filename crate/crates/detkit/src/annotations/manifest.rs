//! The CSV manifest: one row per labelled object.
//!
//! Header is exactly `file,w,h,class,x-min,y-min,x-max,y-max`, optionally
//! extended with a ninth `difficult` column (0/1, defaulting to 0 when the
//! column is absent) so that plain eight-column files remain readable
//! unchanged.

use crate::annotations::ImageAnnotation;
use crate::geometry::{BoundingBox, GeometryError, ImageSize};

const HEADER: [&str; 8] = ["file", "w", "h", "class", "x-min", "y-min", "x-max", "y-max"];
const DIFFICULT_COLUMN: &str = "difficult";

#[derive(Debug, thiserror::Error)]
pub enum ManifestError {
    #[error("header mismatch: expected `file,w,h,class,x-min,y-min,x-max,y-max[,difficult]`, got `{found}`")]
    Header { found: String },
    #[error("row {row}: column `{column}` has bad value {value:?}")]
    BadField {
        row: usize,
        column: String,
        value: String,
    },
    #[error("row {row}: expected {expected} fields, got {found}")]
    FieldCount {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}: invalid box: {source}")]
    BadBox {
        row: usize,
        source: GeometryError,
    },
    #[error("CSV read failed: {0}")]
    Csv(#[from] csv::Error),
}

/// One manifest row; mirrors the eight required columns plus the optional
/// `difficult` flag.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub file: String,
    pub width: u32,
    pub height: u32,
    pub class_name: String,
    pub box_: BoundingBox,
    pub difficult: bool,
}

impl ManifestRow {
    pub fn size(&self) -> ImageSize {
        // width/height were validated >= 1 on construction/parse
        ImageSize::new(self.width, self.height).expect("manifest row holds a valid size")
    }
}

/// Flattens annotations into manifest rows, one per object, in input order.
pub fn to_manifest(anns: &[ImageAnnotation]) -> Vec<ManifestRow> {
    anns.iter()
        .flat_map(|ann| {
            ann.objects.iter().map(move |obj| ManifestRow {
                file: ann.filename.clone(),
                width: ann.size.width(),
                height: ann.size.height(),
                class_name: obj.class_name.clone(),
                box_: obj.box_,
                difficult: obj.difficult,
            })
        })
        .collect()
}

/// Serializes rows as manifest CSV (UTF-8, LF line endings).
///
/// The `difficult` column is emitted only when some row needs it, keeping
/// plain corpora in the eight-column shape.
pub fn write_manifest(rows: &[ManifestRow]) -> String {
    let with_difficult = rows.iter().any(|r| r.difficult);
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());

    let mut header: Vec<&str> = HEADER.to_vec();
    if with_difficult {
        header.push(DIFFICULT_COLUMN);
    }
    writer.write_record(&header).expect("writing to Vec cannot fail");

    for row in rows {
        let mut fields = vec![
            row.file.clone(),
            row.width.to_string(),
            row.height.to_string(),
            row.class_name.clone(),
            row.box_.xmin().to_string(),
            row.box_.ymin().to_string(),
            row.box_.xmax().to_string(),
            row.box_.ymax().to_string(),
        ];
        if with_difficult {
            fields.push(u8::from(row.difficult).to_string());
        }
        writer.write_record(&fields).expect("writing to Vec cannot fail");
    }

    let bytes = writer.into_inner().expect("writing to Vec cannot fail");
    String::from_utf8(bytes).expect("CSV output is UTF-8")
}

/// Parses manifest CSV text into typed rows. The header must match the schema
/// exactly; an empty body is allowed.
pub fn parse_manifest(csv_text: &str) -> Result<Vec<ManifestRow>, ManifestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(csv_text.as_bytes());

    let headers = reader.headers()?.clone();
    let fields: Vec<&str> = headers.iter().collect();
    let with_difficult = match fields.len() {
        8 if fields == HEADER => false,
        9 if fields[..8] == HEADER && fields[8] == DIFFICULT_COLUMN => true,
        _ => {
            return Err(ManifestError::Header {
                found: fields.join(","),
            })
        }
    };
    let expected_fields = if with_difficult { 9 } else { 8 };

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record?;
        // Row numbers are 1-based over data rows, matching what an editor
        // shows once the header line is skipped.
        let row = i + 1;
        if record.len() != expected_fields {
            return Err(ManifestError::FieldCount {
                row,
                expected: expected_fields,
                found: record.len(),
            });
        }

        let field = |idx: usize| record.get(idx).unwrap_or("");
        let parse_u32 = |idx: usize, column: &str| -> Result<u32, ManifestError> {
            let value = field(idx);
            value
                .parse::<u32>()
                .ok()
                .filter(|v| *v >= 1)
                .ok_or_else(|| ManifestError::BadField {
                    row,
                    column: column.to_string(),
                    value: value.to_string(),
                })
        };
        let parse_f64 = |idx: usize, column: &str| -> Result<f64, ManifestError> {
            let value = field(idx);
            value.parse::<f64>().map_err(|_| ManifestError::BadField {
                row,
                column: column.to_string(),
                value: value.to_string(),
            })
        };

        let file = field(0).to_string();
        if file.is_empty() {
            return Err(ManifestError::BadField {
                row,
                column: "file".into(),
                value: String::new(),
            });
        }
        let width = parse_u32(1, "w")?;
        let height = parse_u32(2, "h")?;
        let class_name = field(3).to_string();
        if class_name.is_empty() {
            return Err(ManifestError::BadField {
                row,
                column: "class".into(),
                value: String::new(),
            });
        }
        let box_ = BoundingBox::pixel(
            parse_f64(4, "x-min")?,
            parse_f64(5, "y-min")?,
            parse_f64(6, "x-max")?,
            parse_f64(7, "y-max")?,
        )
        .map_err(|source| ManifestError::BadBox { row, source })?;

        let difficult = if with_difficult {
            let value = field(8);
            match value {
                "0" => false,
                "1" => true,
                _ => {
                    return Err(ManifestError::BadField {
                        row,
                        column: DIFFICULT_COLUMN.into(),
                        value: value.to_string(),
                    })
                }
            }
        } else {
            false
        };

        rows.push(ManifestRow {
            file,
            width,
            height,
            class_name,
            box_,
            difficult,
        });
    }
    Ok(rows)
}
