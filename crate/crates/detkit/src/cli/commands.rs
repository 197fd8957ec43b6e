//! Subcommand implementations. Thin wiring around the library modules: parse
//! inputs, call the pure functions, write outputs atomically.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::annotations::{
    parse_manifest, parse_voc, split_dataset, to_manifest, write_manifest, GroundTruthObject,
    ImageAnnotation, LabelMap, ManifestRow, SplitSpec,
};
use crate::augment::{apply_pipeline, AugmentConfig};
use crate::cli::util::{
    atomic_write, encode_png, image_id_hash, load_image, read_bytes, read_file,
};
use crate::cli::CliError;
use crate::eval::{
    coco_iou_sweep, evaluate_dataset, summarize_loss_log, ApMode, Detection, EvalConfig,
    IouComparison, LossLog,
};
use crate::fusion::{align, fuse_activity, AccelSample, SensorObservation, SynonymTable,
    VisualDetection,
};
use crate::geometry::{BoundingBox, ImageSize};
use crate::records::{decode_example, encode_example, write_records, RecordReader};
use crate::svg::{line_chart, Trace};

pub fn import_voc(
    annotations_dir: &Path,
    images_dir: Option<&Path>,
    out: &Path,
) -> Result<(), CliError> {
    let mut xml_files: Vec<PathBuf> = fs::read_dir(annotations_dir)
        .map_err(|e| CliError::io(annotations_dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext.eq_ignore_ascii_case("xml")))
        .collect();
    xml_files.sort();
    if xml_files.is_empty() {
        return Err(CliError::new(
            "input_error",
            format!("no annotations found in {}", annotations_dir.display()),
        ));
    }

    let mut annotations = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    for path in &xml_files {
        match parse_voc(&read_file(path)?) {
            Ok(ann) => annotations.push(ann),
            Err(e) => failures.push(format!("{}: {e}", path.display())),
        }
    }
    if !failures.is_empty() {
        return Err(CliError::new(
            "parse_error",
            format!(
                "{} annotation file(s) failed to parse:\n  {}",
                failures.len(),
                failures.join("\n  ")
            ),
        ));
    }

    let rows = to_manifest(&annotations);
    atomic_write(out, write_manifest(&rows).as_bytes())?;

    let mut class_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for row in &rows {
        *class_counts.entry(row.class_name.as_str()).or_default() += 1;
    }
    println!(
        "imported {} annotations ({} objects) into {}",
        annotations.len(),
        rows.len(),
        out.display()
    );
    for (class, count) in &class_counts {
        println!("  class {class}: {count}");
    }
    for ann in &annotations {
        for violation in ann.bounds_violations() {
            println!("  bounds violation: {violation}");
        }
    }
    if let Some(images_dir) = images_dir {
        for ann in &annotations {
            if !images_dir.join(&ann.filename).exists() {
                println!("  missing image file: {}", ann.filename);
            }
        }
    }
    Ok(())
}

pub fn split(
    manifest_path: &Path,
    train_frac: f64,
    eval_frac: f64,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let rows = parse_manifest(&read_file(manifest_path)?)?;
    let mut files: Vec<String> = Vec::new();
    for row in &rows {
        if !files.contains(&row.file) {
            files.push(row.file.clone());
        }
    }
    if files.is_empty() {
        return Err(CliError::new("input_error", "manifest holds no rows"));
    }

    let spec = SplitSpec::new(train_frac, eval_frac, seed)?;
    let result = split_dataset(&files, &spec)?;

    let subset = |names: &[String]| -> Vec<ManifestRow> {
        rows.iter()
            .filter(|r| names.contains(&r.file))
            .cloned()
            .collect()
    };
    let write_subset = |file_name: &str, names: &[String]| -> Result<(), CliError> {
        let subset_rows = subset(names);
        atomic_write(
            &out_dir.join(file_name),
            write_manifest(&subset_rows).as_bytes(),
        )?;
        println!(
            "  {file_name}: {} images, {} rows",
            names.len(),
            subset_rows.len()
        );
        Ok(())
    };

    println!("split {} images with seed {seed}", files.len());
    write_subset("train_labels.csv", &result.train)?;
    write_subset("test_labels.csv", &result.test)?;
    if eval_frac > 0.0 {
        write_subset("eval_labels.csv", &result.eval)?;
    }
    Ok(())
}

/// Manifest rows grouped per image, in first-appearance order, with the
/// dimensions cross-checked between rows of the same file.
fn group_rows(rows: &[ManifestRow]) -> Result<Vec<(String, Vec<&ManifestRow>)>, CliError> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<&ManifestRow>> = HashMap::new();
    for row in rows {
        let entry = groups.entry(row.file.clone()).or_insert_with(|| {
            order.push(row.file.clone());
            Vec::new()
        });
        if let Some(first) = entry.first() {
            if (first.width, first.height) != (row.width, row.height) {
                return Err(CliError::new(
                    "value_error",
                    format!(
                        "{}: conflicting sizes {}x{} and {}x{}",
                        row.file, first.width, first.height, row.width, row.height
                    ),
                ));
            }
        }
        entry.push(row);
    }
    Ok(order
        .into_iter()
        .map(|file| {
            let group = groups.remove(&file).expect("file recorded in order list");
            (file, group)
        })
        .collect())
}

fn annotation_from_rows(file: &str, group: &[&ManifestRow]) -> Result<ImageAnnotation, CliError> {
    let first = group.first().expect("groups are nonempty");
    Ok(ImageAnnotation {
        filename: file.to_string(),
        size: ImageSize::new(first.width, first.height)?,
        objects: group
            .iter()
            .map(|r| GroundTruthObject {
                class_name: r.class_name.clone(),
                box_: r.box_,
                difficult: r.difficult,
            })
            .collect(),
    })
}

pub fn records_build(
    manifest_path: &Path,
    images_dir: &Path,
    label_map_path: &Path,
    out: &Path,
) -> Result<(), CliError> {
    let rows = parse_manifest(&read_file(manifest_path)?)?;
    let map = LabelMap::parse(&read_file(label_map_path)?)?;
    let groups = group_rows(&rows)?;

    let missing: Vec<String> = groups
        .iter()
        .map(|(file, _)| file)
        .filter(|file| !images_dir.join(file).exists())
        .cloned()
        .collect();
    if !missing.is_empty() {
        return Err(CliError::new(
            "input_error",
            format!("missing image files: {}", missing.join(", ")),
        ));
    }

    let mut payloads = Vec::with_capacity(groups.len());
    for (file, group) in &groups {
        let ann = annotation_from_rows(file, group)?;
        let image_bytes = read_bytes(&images_dir.join(file))?;
        payloads.push(encode_example(&ann, &image_bytes, &map)?);
    }

    let mut buffer = Vec::new();
    let count = write_records(&payloads, &mut buffer)?;
    atomic_write(out, &buffer)?;
    println!("wrote {count} records to {}", out.display());
    Ok(())
}

pub fn records_inspect(path: &Path) -> Result<(), CliError> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let reader = RecordReader::new(BufReader::new(file));
    let mut frames = 0usize;
    for (index, frame) in reader.enumerate() {
        let payload = frame?;
        frames += 1;
        match decode_example(&payload) {
            Ok(example) => {
                println!(
                    "frame {index}: {} payload bytes, file={} size={} image_bytes={} boxes={}",
                    payload.len(),
                    example.filename,
                    example.size,
                    example.image_bytes.len(),
                    example.boxes.len()
                );
                for b in &example.boxes {
                    println!(
                        "  class {} box ({}, {}, {}, {})",
                        b.class_id,
                        b.box_.xmin(),
                        b.box_.ymin(),
                        b.box_.xmax(),
                        b.box_.ymax()
                    );
                }
            }
            Err(e) => println!(
                "frame {index}: {} payload bytes, not a detkit example ({e})",
                payload.len()
            ),
        }
    }
    println!("{frames} frames, all checksums valid");
    Ok(())
}

pub fn augment(
    manifest_path: &Path,
    images_dir: &Path,
    config_path: &Path,
    seed: u64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let rows = parse_manifest(&read_file(manifest_path)?)?;
    let config = AugmentConfig::from_json(&read_file(config_path)?, seed)?;
    let groups = group_rows(&rows)?;

    let mut new_rows: Vec<ManifestRow> = Vec::new();
    let mut logs: BTreeMap<String, serde_json::Value> = BTreeMap::new();
    let mut output_names: HashMap<String, String> = HashMap::new();

    for (file, group) in &groups {
        let image = load_image(&images_dir.join(file))?;
        let first = group.first().expect("groups are nonempty");
        if (image.width(), image.height()) != (first.width, first.height) {
            return Err(CliError::new(
                "value_error",
                format!(
                    "{file}: manifest says {}x{} but image decodes to {}x{}",
                    first.width,
                    first.height,
                    image.width(),
                    image.height()
                ),
            ));
        }

        let boxes: Vec<BoundingBox> = group.iter().map(|r| r.box_).collect();
        let output = apply_pipeline(&image, &boxes, &config, image_id_hash(file))?;

        let stem = Path::new(file)
            .file_stem()
            .map(|s| s.to_string_lossy().to_string())
            .unwrap_or_else(|| file.clone());
        let out_name = format!("{stem}.png");
        if let Some(previous) = output_names.insert(out_name.clone(), file.clone()) {
            return Err(CliError::new(
                "input_error",
                format!("{previous} and {file} both map to output {out_name}"),
            ));
        }
        atomic_write(&out_dir.join(&out_name), &encode_png(&output.image)?)?;

        for (box_, &orig_idx) in output.boxes.iter().zip(&output.kept_box_indices) {
            let orig = group[orig_idx];
            new_rows.push(ManifestRow {
                file: out_name.clone(),
                width: output.image.width(),
                height: output.image.height(),
                class_name: orig.class_name.clone(),
                box_: *box_,
                difficult: orig.difficult,
            });
        }
        logs.insert(
            file.clone(),
            serde_json::to_value(&output.log).expect("log serializes cleanly"),
        );
    }

    atomic_write(
        &out_dir.join("augmented_labels.csv"),
        write_manifest(&new_rows).as_bytes(),
    )?;
    atomic_write(
        &out_dir.join("augment_log.json"),
        serde_json::to_string_pretty(&logs)
            .expect("logs serialize cleanly")
            .as_bytes(),
    )?;
    println!(
        "augmented {} images ({} surviving boxes) into {}",
        groups.len(),
        new_rows.len(),
        out_dir.display()
    );
    Ok(())
}

pub struct EvalFlags {
    pub iou: f64,
    pub strict_iou: bool,
    pub ap_mode: ApMode,
    pub k: usize,
    pub ar_sweep: bool,
}

#[derive(Deserialize)]
struct DetectionLine {
    image_id: String,
    class: String,
    score: f64,
    bbox: [f64; 4],
}

fn parse_detections_jsonl(text: &str) -> Result<Vec<Detection>, CliError> {
    let mut dets = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: DetectionLine = serde_json::from_str(line).map_err(|e| {
            CliError::new("parse_error", format!("detections line {}: {e}", i + 1))
        })?;
        let box_ = BoundingBox::pixel(
            parsed.bbox[0],
            parsed.bbox[1],
            parsed.bbox[2],
            parsed.bbox[3],
        )
        .map_err(|e| CliError::new("value_error", format!("detections line {}: {e}", i + 1)))?;
        let det = Detection::new(parsed.image_id, parsed.class, box_, parsed.score)
            .map_err(|e| CliError::new("value_error", format!("detections line {}: {e}", i + 1)))?;
        dets.push(det);
    }
    Ok(dets)
}

fn sanitize_for_filename(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '_' })
        .collect()
}

pub fn eval(
    manifest_path: &Path,
    detections_path: &Path,
    flags: EvalFlags,
    out: Option<&Path>,
    curves_dir: Option<&Path>,
) -> Result<(), CliError> {
    let rows = parse_manifest(&read_file(manifest_path)?)?;
    let groups = group_rows(&rows)?;
    let anns: Vec<ImageAnnotation> = groups
        .iter()
        .map(|(file, group)| annotation_from_rows(file, group))
        .collect::<Result<_, _>>()?;
    let dets = parse_detections_jsonl(&read_file(detections_path)?)?;

    let config = EvalConfig {
        iou_threshold: flags.iou,
        iou_comparison: if flags.strict_iou {
            IouComparison::Greater
        } else {
            IouComparison::GreaterOrEqual
        },
        ap_mode: flags.ap_mode,
        ar_k: flags.k,
        ar_iou_thresholds: if flags.ar_sweep {
            coco_iou_sweep()
        } else {
            vec![flags.iou]
        },
    };
    let report = evaluate_dataset(&dets, &anns, &config)?;

    let json = report.to_json();
    match out {
        Some(path) => {
            atomic_write(path, json.as_bytes())?;
            println!("report written to {}", path.display());
        }
        None => println!("{json}"),
    }

    if let Some(dir) = curves_dir {
        for (class, metrics) in &report.per_class {
            let safe = sanitize_for_filename(class);
            let mut csv = String::from("threshold,recall,precision\n");
            for p in &metrics.pr_curve.points {
                csv.push_str(&format!("{},{},{}\n", p.threshold, p.recall, p.precision));
            }
            atomic_write(&dir.join(format!("pr_{safe}.csv")), csv.as_bytes())?;

            let points: Vec<(f64, f64)> = metrics
                .pr_curve
                .points
                .iter()
                .map(|p| (p.recall, p.precision))
                .collect();
            let svg = line_chart(
                &format!("PR curve: {class}"),
                "recall",
                "precision",
                &[Trace {
                    label: class,
                    points: &points,
                }],
            );
            atomic_write(&dir.join(format!("pr_{safe}.svg")), svg.as_bytes())?;
        }
        println!("curves written to {}", dir.display());
    }
    Ok(())
}

pub fn report(
    loss_csv: &Path,
    smoothing: f64,
    threshold: f64,
    out_dir: &Path,
) -> Result<(), CliError> {
    let log = LossLog::parse_csv(&read_file(loss_csv)?)?;
    let summary = summarize_loss_log(&log, smoothing, threshold)?;

    atomic_write(
        &out_dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)
            .expect("summary serializes cleanly")
            .as_bytes(),
    )?;

    let steps: Vec<f64> = summary.steps.iter().map(|&s| s as f64).collect();
    let charts = [
        ("loss_classification.svg", "classification loss", log
            .rows()
            .iter()
            .map(|r| r.classification_loss)
            .collect::<Vec<f64>>(), &summary.classification),
        ("loss_localization.svg", "localization loss", log
            .rows()
            .iter()
            .map(|r| r.localization_loss)
            .collect::<Vec<f64>>(), &summary.localization),
        ("loss_total.svg", "total loss", log
            .rows()
            .iter()
            .map(|r| r.total_loss)
            .collect::<Vec<f64>>(), &summary.total),
    ];
    for (file_name, title, raw, column) in charts {
        let raw_points: Vec<(f64, f64)> = steps.iter().copied().zip(raw).collect();
        let smooth_points: Vec<(f64, f64)> = steps
            .iter()
            .copied()
            .zip(column.smoothed.iter().copied())
            .collect();
        let svg = line_chart(
            title,
            "step",
            "loss",
            &[
                Trace {
                    label: "raw",
                    points: &raw_points,
                },
                Trace {
                    label: "smoothed",
                    points: &smooth_points,
                },
            ],
        );
        atomic_write(&out_dir.join(file_name), svg.as_bytes())?;
    }

    println!(
        "loss summary written to {} (converged: {})",
        out_dir.display(),
        summary.converged
    );
    Ok(())
}

#[derive(Deserialize)]
struct VisualLine {
    sensor_id: String,
    t_ms: u64,
    label: String,
    #[serde(default)]
    confidence: Option<f64>,
}

#[derive(Deserialize)]
struct AccelLine {
    #[allow(dead_code)]
    sensor_id: String,
    t_ms: u64,
    value: f64,
}

pub fn fuse(
    visual_path: &Path,
    accel_path: &Path,
    synonyms_path: Option<&Path>,
    window_ms: u64,
    spike_g: f64,
    out: Option<&Path>,
) -> Result<(), CliError> {
    let table = match synonyms_path {
        Some(path) => Some(SynonymTable::parse(&read_file(path)?)?),
        None => None,
    };

    let mut visual = Vec::new();
    for (i, line) in read_file(visual_path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: VisualLine = serde_json::from_str(line)
            .map_err(|e| CliError::new("parse_error", format!("visual line {}: {e}", i + 1)))?;
        let obs = SensorObservation {
            sensor_id: parsed.sensor_id,
            t_ms: parsed.t_ms,
            payload: crate::fusion::ObservationPayload::Label {
                label: parsed.label,
                confidence: parsed.confidence,
            },
        };
        let aligned = match &table {
            Some(table) => align(&obs, table)?,
            None => obs,
        };
        match aligned.payload {
            crate::fusion::ObservationPayload::Label { label, confidence } => {
                visual.push(VisualDetection {
                    t_ms: aligned.t_ms,
                    label,
                    confidence,
                });
            }
            crate::fusion::ObservationPayload::Value { .. } => unreachable!("built as label"),
        }
    }

    let mut accel = Vec::new();
    for (i, line) in read_file(accel_path)?.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: AccelLine = serde_json::from_str(line)
            .map_err(|e| CliError::new("parse_error", format!("accel line {}: {e}", i + 1)))?;
        accel.push(AccelSample {
            t_ms: parsed.t_ms,
            magnitude_g: parsed.value,
        });
    }

    let timeline = fuse_activity(&visual, &accel, window_ms, spike_g)?;
    let json =
        serde_json::to_string_pretty(&timeline).expect("timeline serializes cleanly");
    match out {
        Some(path) => {
            atomic_write(path, json.as_bytes())?;
            println!("timeline written to {}", path.display());
        }
        None => println!("{json}"),
    }
    Ok(())
}
