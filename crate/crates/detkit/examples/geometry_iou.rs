//! Bounding-box arithmetic: areas, intersections, IoU, and coordinate spaces.
//!
//! ```bash
//! cargo run -p detkit --example geometry_iou
//! ```

use detkit::geometry::{BoundingBox, ImageSize};

fn main() {
    let ground_truth = BoundingBox::pixel(1.0, 504.0, 989.0, 1240.0).unwrap();
    let prediction = BoundingBox::pixel(40.0, 530.0, 1000.0, 1200.0).unwrap();

    println!("ground truth area: {}", ground_truth.area());
    println!("prediction   area: {}", prediction.area());

    let overlap = ground_truth.intersect(&prediction).unwrap().unwrap();
    println!(
        "overlap rectangle: ({}, {}, {}, {}) area {}",
        overlap.xmin(),
        overlap.ymin(),
        overlap.xmax(),
        overlap.ymax(),
        overlap.area()
    );
    println!("IoU: {:.4}", ground_truth.iou(&prediction).unwrap());

    // Pixel <-> normalized conversions are explicit and checked.
    let size = ImageSize::new(1067, 1600).unwrap();
    let normalized = ground_truth.normalize(size).unwrap();
    println!(
        "normalized: ({:.6}, {:.6}, {:.6}, {:.6})",
        normalized.xmin(),
        normalized.ymin(),
        normalized.xmax(),
        normalized.ymax()
    );
    let back = normalized.denormalize(size).unwrap();
    println!("round-trips to: ({}, {}, {}, {})", back.xmin(), back.ymin(), back.xmax(), back.ymax());

    // Mixing spaces is an error, not a silent bug.
    let err = ground_truth.iou(&normalized).unwrap_err();
    println!("mixing spaces: {err}");
}
