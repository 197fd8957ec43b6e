//! Writing, reading, and corruption-checking a binary record file.
//!
//! ```bash
//! cargo run -p detkit --example record_file_roundtrip
//! ```

use std::io::Cursor;

use detkit::annotations::{GroundTruthObject, ImageAnnotation};
use detkit::geometry::{BoundingBox, ImageSize};
use detkit::records::{
    decode_example, encode_example, masked_crc32c, read_records, write_records,
};
use detkit::LabelMap;

fn main() {
    let map = LabelMap::from_class_names(["lying", "standing"]).unwrap();

    // Three annotated "images" (the bytes stand in for encoded JPEGs).
    let payloads: Vec<Vec<u8>> = (0..3)
        .map(|i| {
            let ann = ImageAnnotation {
                filename: format!("img_{i}.jpg"),
                size: ImageSize::new(640, 480).unwrap(),
                objects: vec![GroundTruthObject {
                    class_name: if i % 2 == 0 { "lying" } else { "standing" }.into(),
                    box_: BoundingBox::pixel(10.0 * f64::from(i + 1), 20.0, 300.0, 400.0).unwrap(),
                    difficult: false,
                }],
            };
            let fake_jpeg = vec![0xFF, 0xD8, i as u8, 0x42];
            encode_example(&ann, &fake_jpeg, &map).unwrap()
        })
        .collect();

    let mut file = Vec::new();
    let count = write_records(&payloads, &mut file).unwrap();
    println!("wrote {count} frames, {} bytes total", file.len());
    println!("masked crc32c of empty input: {:#010x}", masked_crc32c(b""));

    for (i, payload) in read_records(Cursor::new(&file)).unwrap().iter().enumerate() {
        let example = decode_example(payload).unwrap();
        let b = &example.boxes[0];
        println!(
            "frame {i}: {} {} class_id={} box=({:.4}, {:.4}, {:.4}, {:.4})",
            example.filename,
            example.size,
            b.class_id,
            b.box_.xmin(),
            b.box_.ymin(),
            b.box_.xmax(),
            b.box_.ymax()
        );
    }

    // Any single flipped byte is caught, with the frame that owns it.
    let mut corrupted = file.clone();
    corrupted[40] ^= 0x01;
    match read_records(Cursor::new(&corrupted)) {
        Err(e) => println!("corruption detected: {e}"),
        Ok(_) => unreachable!("corruption must not pass the checksums"),
    }
}
