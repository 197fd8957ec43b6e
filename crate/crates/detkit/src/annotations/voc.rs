//! Pascal VOC XML parsing and emission.

use crate::annotations::{GroundTruthObject, ImageAnnotation};
use crate::geometry::{BoundingBox, ImageSize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VocError {
    #[error("malformed XML at line {line}: {message}")]
    Parse { line: u32, message: String },
    #[error("missing mandatory element <{element}>")]
    MissingElement { element: String },
    #[error("element <{element}> has non-numeric value {value:?}")]
    BadNumber { element: String, value: String },
    #[error("element <{element}> is invalid: {reason}")]
    BadValue { element: String, reason: String },
}

/// Parses one Pascal VOC annotation document.
///
/// Expected shape: an `<annotation>` root with `<filename>`,
/// `<size><width/><height/></size>`, and zero or more
/// `<object><name/><difficult/><bndbox>...</bndbox></object>` children.
/// A missing `<difficult>` means `false`. Coordinates outside the image frame
/// are kept verbatim; see [`ImageAnnotation::bounds_violations`].
pub fn parse_voc(xml_text: &str) -> Result<ImageAnnotation, VocError> {
    let doc = roxmltree::Document::parse(xml_text).map_err(|e| VocError::Parse {
        line: e.pos().row,
        message: e.to_string(),
    })?;

    let root = doc.root_element();
    if root.tag_name().name() != "annotation" {
        return Err(VocError::MissingElement {
            element: "annotation".into(),
        });
    }

    let filename = child_text(root, "filename")?.trim().to_string();
    if filename.is_empty() {
        return Err(VocError::BadValue {
            element: "filename".into(),
            reason: "must be nonempty".into(),
        });
    }

    let size_node = child(root, "size")?;
    let width = parse_number(size_node, "width")?;
    let height = parse_number(size_node, "height")?;
    let size = make_size(width, height)?;

    let mut objects = Vec::new();
    for node in root.children().filter(|n| n.has_tag_name("object")) {
        let class_name = child_text(node, "name")?.trim().to_string();
        if class_name.is_empty() {
            return Err(VocError::BadValue {
                element: "name".into(),
                reason: "must be nonempty".into(),
            });
        }
        let difficult = match node.children().find(|n| n.has_tag_name("difficult")) {
            Some(d) => {
                let text = d.text().unwrap_or("").trim().to_string();
                let flag: i64 = text.parse().map_err(|_| VocError::BadNumber {
                    element: "difficult".into(),
                    value: text.clone(),
                })?;
                flag != 0
            }
            None => false,
        };
        let bndbox = child(node, "bndbox")?;
        let xmin = parse_number(bndbox, "xmin")?;
        let ymin = parse_number(bndbox, "ymin")?;
        let xmax = parse_number(bndbox, "xmax")?;
        let ymax = parse_number(bndbox, "ymax")?;
        let box_ =
            BoundingBox::pixel(xmin, ymin, xmax, ymax).map_err(|e| VocError::BadValue {
                element: "bndbox".into(),
                reason: e.to_string(),
            })?;
        objects.push(GroundTruthObject {
            class_name,
            box_,
            difficult,
        });
    }

    Ok(ImageAnnotation {
        filename,
        size,
        objects,
    })
}

/// Emits a Pascal VOC document whose `parse_voc` result equals `ann`.
pub fn write_voc(ann: &ImageAnnotation) -> String {
    let mut out = String::new();
    out.push_str("<annotation>\n");
    out.push_str(&format!("  <filename>{}</filename>\n", escape(&ann.filename)));
    out.push_str("  <size>\n");
    out.push_str(&format!("    <width>{}</width>\n", ann.size.width()));
    out.push_str(&format!("    <height>{}</height>\n", ann.size.height()));
    out.push_str("  </size>\n");
    for obj in &ann.objects {
        out.push_str("  <object>\n");
        out.push_str(&format!("    <name>{}</name>\n", escape(&obj.class_name)));
        out.push_str(&format!(
            "    <difficult>{}</difficult>\n",
            u8::from(obj.difficult)
        ));
        out.push_str("    <bndbox>\n");
        out.push_str(&format!("      <xmin>{}</xmin>\n", obj.box_.xmin()));
        out.push_str(&format!("      <ymin>{}</ymin>\n", obj.box_.ymin()));
        out.push_str(&format!("      <xmax>{}</xmax>\n", obj.box_.xmax()));
        out.push_str(&format!("      <ymax>{}</ymax>\n", obj.box_.ymax()));
        out.push_str("    </bndbox>\n");
        out.push_str("  </object>\n");
    }
    out.push_str("</annotation>\n");
    out
}

fn child<'a, 'input>(
    node: roxmltree::Node<'a, 'input>,
    name: &str,
) -> Result<roxmltree::Node<'a, 'input>, VocError> {
    node.children()
        .find(|n| n.has_tag_name(name))
        .ok_or_else(|| VocError::MissingElement {
            element: name.to_string(),
        })
}

fn child_text(node: roxmltree::Node<'_, '_>, name: &str) -> Result<String, VocError> {
    Ok(child(node, name)?.text().unwrap_or("").to_string())
}

fn parse_number(node: roxmltree::Node<'_, '_>, name: &str) -> Result<f64, VocError> {
    let text = child_text(node, name)?.trim().to_string();
    text.parse::<f64>().map_err(|_| VocError::BadNumber {
        element: name.to_string(),
        value: text,
    })
}

fn make_size(width: f64, height: f64) -> Result<ImageSize, VocError> {
    let as_dim = |v: f64, element: &str| -> Result<u32, VocError> {
        if v.fract() != 0.0 || v < 1.0 || v > f64::from(u32::MAX) {
            return Err(VocError::BadValue {
                element: element.to_string(),
                reason: format!("{v} is not a positive integer pixel count"),
            });
        }
        Ok(v as u32)
    };
    ImageSize::new(as_dim(width, "width")?, as_dim(height, "height")?).map_err(|e| {
        VocError::BadValue {
            element: "size".into(),
            reason: e.to_string(),
        }
    })
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
