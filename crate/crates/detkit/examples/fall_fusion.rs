//! Fall-vs-lying resolution: align sensor vocabularies, discretize readings,
//! and fuse a camera stream with an accelerometer.
//!
//! ```bash
//! cargo run -p detkit --example fall_fusion
//! ```

use detkit::fusion::{
    align, discretize, fuse_activity, AccelSample, DomainSpec, SensorObservation, SynonymTable,
    VisualDetection,
};

fn main() {
    // 1. Semantic alignment: two cameras with different native vocabularies.
    let mut table = SynonymTable::default();
    table.insert("camA", "person_lying", "lying");
    table.insert("camA", "person_standing", "standing");
    table.insert("camB", "down", "lying");
    table.insert("camB", "upright", "standing");

    let raw = SensorObservation::label("camB", 12_000, "down");
    let aligned = align(&raw, &table).unwrap();
    println!("camB \"down\" aligns to {:?}", aligned.payload);

    // 2. Domain conversion: bucket accelerometer magnitudes for classifiers.
    let spec = DomainSpec::new(
        "accel_magnitude_g",
        vec![1.2, 2.5],
        vec!["resting".into(), "moving".into(), "impact".into()],
    )
    .unwrap();
    for value in [0.98, 1.7, 3.4] {
        println!("{value} g -> {}", discretize(value, &spec));
    }

    // 3. The fall rule: a miner appears lying right after an impact spike.
    let visual = vec![
        VisualDetection {
            t_ms: 8_000,
            label: "standing".into(),
            confidence: Some(0.93),
        },
        VisualDetection {
            t_ms: 9_000,
            label: "standing".into(),
            confidence: Some(0.90),
        },
        VisualDetection {
            t_ms: 10_000,
            label: "lying".into(),
            confidence: Some(0.99),
        },
        VisualDetection {
            t_ms: 11_000,
            label: "lying".into(),
            confidence: Some(0.97),
        },
    ];
    let accel = vec![
        AccelSample {
            t_ms: 8_200,
            magnitude_g: 1.02,
        },
        AccelSample {
            t_ms: 9_500,
            magnitude_g: 3.2,
        },
        AccelSample {
            t_ms: 10_400,
            magnitude_g: 1.01,
        },
    ];

    println!("\nwith the accelerometer:");
    for state in fuse_activity(&visual, &accel, 2_000, 2.5).unwrap() {
        println!("  [{} .. {}] {:?}", state.t0_ms, state.t1_ms, state.state);
    }

    // Without the spike evidence the same footage reads as ordinary rest.
    println!("without the accelerometer:");
    for state in fuse_activity(&visual, &[], 2_000, 2.5).unwrap() {
        println!("  [{} .. {}] {:?}", state.t0_ms, state.t1_ms, state.state);
    }
}
