//! Pascal VOC XML in, CSV manifest and label map out.
//!
//! ```bash
//! cargo run -p detkit --example voc_to_manifest
//! ```

use detkit::annotations::{parse_voc, to_manifest, write_manifest, LabelMap};

const VOC_FILES: [&str; 2] = [
    r#"<annotation>
  <filename>abc.jpg</filename>
  <size><width>1067</width><height>1600</height></size>
  <object>
    <name>lying</name>
    <difficult>0</difficult>
    <bndbox><xmin>1</xmin><ymin>504</ymin><xmax>989</xmax><ymax>1240</ymax></bndbox>
  </object>
</annotation>"#,
    r#"<annotation>
  <filename>xyz.jpg</filename>
  <size><width>1080</width><height>1080</height></size>
  <object>
    <name>standing</name>
    <difficult>0</difficult>
    <bndbox><xmin>21</xmin><ymin>184</ymin><xmax>1062</xmax><ymax>1066</ymax></bndbox>
  </object>
</annotation>"#,
];

fn main() {
    let annotations: Vec<_> = VOC_FILES
        .iter()
        .map(|xml| parse_voc(xml).expect("valid VOC"))
        .collect();

    for ann in &annotations {
        println!(
            "{}: {} ({} objects)",
            ann.filename,
            ann.size,
            ann.objects.len()
        );
    }

    let rows = to_manifest(&annotations);
    println!("\nmanifest CSV:\n{}", write_manifest(&rows));

    // Ids are assigned in first-appearance order, starting at 1.
    let label_map =
        LabelMap::from_class_names(rows.iter().map(|r| r.class_name.as_str())).unwrap();
    println!("label map JSON:\n{}", label_map.to_json());
    println!(
        "\nresolve(\"standing\") = {}",
        label_map.resolve("standing").unwrap()
    );
}
