//! Minimal feature-level sensor fusion.
//!
//! Heterogeneous sensors rarely speak the same vocabulary or value domain, so
//! combination needs two pre-processing steps: semantic alignment (mapping
//! per-sensor labels onto one canonical vocabulary) and domain conversion
//! (discretizing continuous attributes into bins). On top of those, a small
//! rule-based resolver distinguishes a fall from ordinary lying down by
//! pairing visual "lying" runs with a preceding acceleration spike.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FusionError {
    #[error("sensor {sensor_id:?} label {label:?} has no canonical mapping")]
    UnmappedLabel { sensor_id: String, label: String },
    #[error("invalid domain spec for {attribute:?}: {reason}")]
    BadDomainSpec { attribute: String, reason: String },
    #[error("stream is not time-ordered at t={timestamp_ms} ms (previous t={previous_ms} ms)")]
    UnorderedStream { timestamp_ms: u64, previous_ms: u64 },
    #[error("invalid fusion parameters: {reason}")]
    BadParameters { reason: String },
    #[error("confidence {0} must lie in [0, 1]")]
    BadConfidence(f64),
}

/// Maps `(sensor_id, native_label)` pairs onto one canonical vocabulary.
///
/// JSON form: `{"camA": {"person_lying": "lying"}, ...}`. Labels that are
/// already canonical pass through unchanged, which makes [`align`]
/// idempotent.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SynonymTable {
    mapping: BTreeMap<String, BTreeMap<String, String>>,
}

impl SynonymTable {
    pub fn new(mapping: BTreeMap<String, BTreeMap<String, String>>) -> Self {
        Self { mapping }
    }

    pub fn parse(text: &str) -> Result<Self, FusionError> {
        serde_json::from_str(text).map_err(|e| FusionError::BadParameters {
            reason: format!("synonym table JSON is invalid: {e}"),
        })
    }

    pub fn insert(
        &mut self,
        sensor_id: impl Into<String>,
        native: impl Into<String>,
        canonical: impl Into<String>,
    ) {
        self.mapping
            .entry(sensor_id.into())
            .or_default()
            .insert(native.into(), canonical.into());
    }

    /// The shared output vocabulary: every canonical label some mapping
    /// produces.
    pub fn canonical_vocabulary(&self) -> BTreeSet<&str> {
        self.mapping
            .values()
            .flat_map(|m| m.values().map(String::as_str))
            .collect()
    }

    fn lookup(&self, sensor_id: &str, label: &str) -> Option<&str> {
        self.mapping
            .get(sensor_id)
            .and_then(|m| m.get(label))
            .map(String::as_str)
    }
}

/// Discretization of one continuous attribute into ordered labeled bins.
///
/// `edges` are strictly increasing; with `n` edges there are `n + 1` labels.
/// Bin `i + 1` covers the half-open interval `[edges[i], edges[i + 1])`;
/// values below the first edge take the first label, values at or above the
/// last edge take the last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    pub attribute: String,
    pub edges: Vec<f64>,
    pub labels: Vec<String>,
}

impl DomainSpec {
    pub fn new(
        attribute: impl Into<String>,
        edges: Vec<f64>,
        labels: Vec<String>,
    ) -> Result<Self, FusionError> {
        let attribute = attribute.into();
        let bad = |reason: String| FusionError::BadDomainSpec {
            attribute: attribute.clone(),
            reason,
        };
        if labels.len() != edges.len() + 1 {
            return Err(bad(format!(
                "{} edges need {} labels, got {}",
                edges.len(),
                edges.len() + 1,
                labels.len()
            )));
        }
        if edges.iter().any(|e| !e.is_finite()) {
            return Err(bad("edges must be finite".into()));
        }
        for pair in edges.windows(2) {
            if pair[0] >= pair[1] {
                return Err(bad(format!(
                    "edges must be strictly increasing ({} then {})",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(Self {
            attribute,
            edges,
            labels,
        })
    }

    pub fn parse(text: &str) -> Result<Self, FusionError> {
        let raw: DomainSpec = serde_json::from_str(text).map_err(|e| FusionError::BadParameters {
            reason: format!("domain spec JSON is invalid: {e}"),
        })?;
        Self::new(raw.attribute, raw.edges, raw.labels)
    }
}

/// Maps a value to its bin label under `spec`. Total: out-of-range values
/// fall into the first or last bin.
pub fn discretize(value: f64, spec: &DomainSpec) -> &str {
    let mut bin = 0usize;
    for &edge in &spec.edges {
        if value >= edge {
            bin += 1;
        } else {
            break;
        }
    }
    &spec.labels[bin]
}

/// What a sensor reported at one instant: a (possibly confident) label or a
/// raw numeric attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ObservationPayload {
    Label {
        label: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        confidence: Option<f64>,
    },
    Value { value: f64 },
}

/// A timestamped reading from one sensor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensorObservation {
    pub sensor_id: String,
    pub t_ms: u64,
    #[serde(flatten)]
    pub payload: ObservationPayload,
}

impl SensorObservation {
    pub fn label(sensor_id: impl Into<String>, t_ms: u64, label: impl Into<String>) -> Self {
        Self {
            sensor_id: sensor_id.into(),
            t_ms,
            payload: ObservationPayload::Label {
                label: label.into(),
                confidence: None,
            },
        }
    }

    pub fn value(sensor_id: impl Into<String>, t_ms: u64, value: f64) -> Self {
        Self {
            sensor_id: sensor_id.into(),
            t_ms,
            payload: ObservationPayload::Value { value },
        }
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        if let ObservationPayload::Label {
            confidence: Some(c),
            ..
        } = &self.payload
        {
            if !c.is_finite() || !(0.0..=1.0).contains(c) {
                return Err(FusionError::BadConfidence(*c));
            }
        }
        Ok(())
    }
}

/// Rewrites a label observation into the canonical vocabulary. Canonical
/// labels are fixed points (so aligning twice changes nothing); numeric
/// payloads pass through untouched; anything else unmapped is an error naming
/// the sensor and label.
pub fn align(
    obs: &SensorObservation,
    table: &SynonymTable,
) -> Result<SensorObservation, FusionError> {
    obs.validate()?;
    match &obs.payload {
        ObservationPayload::Value { .. } => Ok(obs.clone()),
        ObservationPayload::Label { label, confidence } => {
            if table.canonical_vocabulary().contains(label.as_str()) {
                return Ok(obs.clone());
            }
            match table.lookup(&obs.sensor_id, label) {
                Some(canonical) => Ok(SensorObservation {
                    sensor_id: obs.sensor_id.clone(),
                    t_ms: obs.t_ms,
                    payload: ObservationPayload::Label {
                        label: canonical.to_string(),
                        confidence: *confidence,
                    },
                }),
                None => Err(FusionError::UnmappedLabel {
                    sensor_id: obs.sensor_id.clone(),
                    label: label.clone(),
                }),
            }
        }
    }
}

/// Activity classification over a time window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Activity {
    #[serde(rename = "STANDING")]
    Standing,
    #[serde(rename = "LYING_DOWN")]
    LyingDown,
    #[serde(rename = "FALL_DETECTED")]
    FallDetected,
    #[serde(rename = "UNKNOWN")]
    Unknown,
}

/// One resolved activity interval with the observations that support it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActivityState {
    pub state: Activity,
    pub t0_ms: u64,
    pub t1_ms: u64,
    pub supporting: Vec<SensorObservation>,
}

/// A visual label observation: canonical label at a timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct VisualDetection {
    pub t_ms: u64,
    pub label: String,
    pub confidence: Option<f64>,
}

/// An accelerometer magnitude sample in g.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccelSample {
    pub t_ms: u64,
    pub magnitude_g: f64,
}

/// Resolves the fall-vs-lying ambiguity by fusing a visual label stream with
/// accelerometer magnitudes.
///
/// Consecutive detections sharing a label form a run (a gap longer than
/// `window_ms` starts a new run and surfaces as an UNKNOWN interval). A
/// "lying" run becomes FALL_DETECTED when some accelerometer sample of at
/// least `spike_g` landed within `window_ms` before the run started, and
/// LYING_DOWN otherwise; "standing" runs map to STANDING and any other label
/// to UNKNOWN. With no visual data at all, the whole span of the input is a
/// single UNKNOWN window.
///
/// Both streams must be time-ordered. The thresholds default to
/// `window_ms = 2000` and `spike_g = 2.5`; they are configuration, not claims.
pub fn fuse_activity(
    visual: &[VisualDetection],
    accel: &[AccelSample],
    window_ms: u64,
    spike_g: f64,
) -> Result<Vec<ActivityState>, FusionError> {
    if window_ms == 0 {
        return Err(FusionError::BadParameters {
            reason: "window_ms must be positive".into(),
        });
    }
    if !spike_g.is_finite() || spike_g <= 1.0 {
        return Err(FusionError::BadParameters {
            reason: format!("spike_g {spike_g} must exceed 1 g"),
        });
    }
    check_ordered(visual.iter().map(|v| v.t_ms))?;
    check_ordered(accel.iter().map(|a| a.t_ms))?;

    if visual.is_empty() {
        let t0 = accel.first().map(|a| a.t_ms).unwrap_or(0);
        let t1 = accel.last().map(|a| a.t_ms).unwrap_or(0);
        return Ok(vec![ActivityState {
            state: Activity::Unknown,
            t0_ms: t0,
            t1_ms: t1,
            supporting: Vec::new(),
        }]);
    }

    // Split the visual stream into maximal runs of one label with no internal
    // gap longer than window_ms.
    let mut runs: Vec<(usize, usize)> = Vec::new(); // [start, end] indices
    let mut start = 0usize;
    for i in 1..visual.len() {
        let same_label = visual[i].label == visual[i - 1].label;
        let contiguous = visual[i].t_ms - visual[i - 1].t_ms <= window_ms;
        if !(same_label && contiguous) {
            runs.push((start, i - 1));
            start = i;
        }
    }
    runs.push((start, visual.len() - 1));

    let mut states = Vec::new();
    let mut previous_end: Option<u64> = None;
    for &(lo, hi) in &runs {
        let t0 = visual[lo].t_ms;
        let t1 = visual[hi].t_ms;
        if let Some(prev) = previous_end {
            if t0 - prev > window_ms {
                states.push(ActivityState {
                    state: Activity::Unknown,
                    t0_ms: prev,
                    t1_ms: t0,
                    supporting: Vec::new(),
                });
            }
        }

        let run_support: Vec<SensorObservation> = visual[lo..=hi]
            .iter()
            .map(|v| SensorObservation {
                sensor_id: "visual".into(),
                t_ms: v.t_ms,
                payload: ObservationPayload::Label {
                    label: v.label.clone(),
                    confidence: v.confidence,
                },
            })
            .collect();

        let state = match visual[lo].label.as_str() {
            "standing" => ActivityState {
                state: Activity::Standing,
                t0_ms: t0,
                t1_ms: t1,
                supporting: run_support,
            },
            "lying" => {
                let lookback_start = t0.saturating_sub(window_ms);
                let spikes: Vec<SensorObservation> = accel
                    .iter()
                    .filter(|a| {
                        a.t_ms >= lookback_start && a.t_ms <= t0 && a.magnitude_g >= spike_g
                    })
                    .map(|a| SensorObservation::value("accel", a.t_ms, a.magnitude_g))
                    .collect();
                let mut supporting = run_support;
                let state = if spikes.is_empty() {
                    Activity::LyingDown
                } else {
                    supporting.extend(spikes);
                    Activity::FallDetected
                };
                ActivityState {
                    state,
                    t0_ms: t0,
                    t1_ms: t1,
                    supporting,
                }
            }
            _ => ActivityState {
                state: Activity::Unknown,
                t0_ms: t0,
                t1_ms: t1,
                supporting: run_support,
            },
        };
        states.push(state);
        previous_end = Some(t1);
    }

    Ok(states)
}

fn check_ordered(timestamps: impl Iterator<Item = u64>) -> Result<(), FusionError> {
    let mut previous: Option<u64> = None;
    for t in timestamps {
        if let Some(prev) = previous {
            if t < prev {
                return Err(FusionError::UnorderedStream {
                    timestamp_ms: t,
                    previous_ms: prev,
                });
            }
        }
        previous = Some(t);
    }
    Ok(())
}
