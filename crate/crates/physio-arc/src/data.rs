//! Core domain types, sensor-log ingestion, and manifest handling.
//!
//! A [`Recording`] is one continuous 6-axis capture (3-axis total
//! acceleration in g, 3-axis angular velocity in rad/s) of one exercise set
//! performed by one subject with one arm. Sensor logs arrive as CSV with the
//! fixed header `t,ax,ay,az,wx,wy,wz`; a dataset is described by a JSON
//! [`Manifest`]. Ingestion validates timestamps and applies no filtering.

use std::collections::HashSet;
use std::fmt;
use std::io::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sampling-gap tolerance at ingest, in units of the nominal step `1/f_s`.
pub const MAX_GAP_STEPS: f64 = 5.0;

/// One 6-axis sample: timestamp, total acceleration (g), angular velocity (rad/s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorSample {
    pub t: f64,
    pub accel: [f64; 3],
    pub gyro: [f64; 3],
}

/// The seven exercise classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ExerciseClass {
    /// Pendulum
    PEN,
    /// Abduction
    ABD,
    /// Forward elevation
    FEL,
    /// Internal rotation
    IR,
    /// External rotation
    ER,
    /// Trapezius extension
    TRAP,
    /// Upright row
    ROW,
}

impl ExerciseClass {
    pub const ALL: [ExerciseClass; 7] = [
        ExerciseClass::PEN,
        ExerciseClass::ABD,
        ExerciseClass::FEL,
        ExerciseClass::IR,
        ExerciseClass::ER,
        ExerciseClass::TRAP,
        ExerciseClass::ROW,
    ];

    pub const COUNT: usize = 7;

    /// Stable index in `ALL`, used for label vectors and confusion matrices.
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|&c| c == self).unwrap()
    }

    pub fn from_index(i: usize) -> Option<ExerciseClass> {
        Self::ALL.get(i).copied()
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ExerciseClass::PEN => "PEN",
            ExerciseClass::ABD => "ABD",
            ExerciseClass::FEL => "FEL",
            ExerciseClass::IR => "IR",
            ExerciseClass::ER => "ER",
            ExerciseClass::TRAP => "TRAP",
            ExerciseClass::ROW => "ROW",
        }
    }
}

impl fmt::Display for ExerciseClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for ExerciseClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .find(|c| c.as_str() == s)
            .copied()
            .ok_or_else(|| Error::validation(format!("unknown exercise class {s:?}")))
    }
}

/// Which arm wore the device.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Side {
    #[serde(rename = "L")]
    Left,
    #[serde(rename = "R")]
    Right,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Left => "L",
            Side::Right => "R",
        }
    }

    /// Encoding used as the final feature column: right = 1, left = 0.
    pub fn as_feature(self) -> f64 {
        match self {
            Side::Left => 0.0,
            Side::Right => 1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "L" => Ok(Side::Left),
            "R" => Ok(Side::Right),
            other => Err(Error::validation(format!("unknown side {other:?}"))),
        }
    }
}

/// Half-open sample-index interval `[start, end)` marking the active portion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub start: usize,
    pub end: usize,
}

impl Interval {
    pub fn new(start: usize, end: usize) -> Interval {
        Interval { start, end }
    }

    pub fn len(&self) -> usize {
        self.end.saturating_sub(self.start)
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// Number of sample indices shared with `other`.
    pub fn overlap(&self, other: &Interval) -> usize {
        let lo = self.start.max(other.start);
        let hi = self.end.min(other.end);
        hi.saturating_sub(lo)
    }
}

/// One continuous capture with its metadata and optional active-interval
/// annotation. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    pub id: String,
    pub subject_id: String,
    pub exercise: ExerciseClass,
    pub side: Side,
    pub samples: Vec<SensorSample>,
    pub annotation: Option<Interval>,
}

impl Recording {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }

    /// Channel value at `(sample, channel)` with channel order ax ay az wx wy wz.
    pub fn channel(&self, sample: usize, channel: usize) -> f64 {
        let s = &self.samples[sample];
        if channel < 3 {
            s.accel[channel]
        } else {
            s.gyro[channel - 3]
        }
    }

    /// Replace the annotation after validating the interval.
    pub fn with_annotation(&self, interval: Interval) -> Result<Recording> {
        if interval.start >= interval.end {
            return Err(Error::validation(format!(
                "annotation [{}, {}) is empty or inverted",
                interval.start, interval.end
            )));
        }
        if interval.end > self.samples.len() {
            return Err(Error::validation(format!(
                "annotation end {} exceeds sample count {}",
                interval.end,
                self.samples.len()
            )));
        }
        let mut out = self.clone();
        out.annotation = Some(interval);
        Ok(out)
    }
}

/// Dataset-level units declaration. Only g / rad/s data is accepted;
/// mismatches are rejected rather than silently converted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Units {
    pub accel: String,
    pub gyro: String,
}

impl Default for Units {
    fn default() -> Self {
        Units {
            accel: "g".to_string(),
            gyro: "rad_s".to_string(),
        }
    }
}

/// One manifest row: a sensor-log file plus its labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    pub subject: String,
    pub exercise: ExerciseClass,
    pub side: Side,
}

impl ManifestEntry {
    /// Recording id derived from the file path stem.
    pub fn recording_id(&self) -> String {
        std::path::Path::new(&self.path)
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| self.path.clone())
    }
}

/// Dataset manifest: sampling rate, units, and the file list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub fs_hz: f64,
    #[serde(default)]
    pub units: Units,
    pub files: Vec<ManifestEntry>,
}

/// Parse and validate a manifest JSON document.
pub fn load_manifest(json_text: &str) -> Result<Manifest> {
    let manifest: Manifest = serde_json::from_str(json_text).map_err(|e| {
        // Unknown enum strings surface as serde errors; report them as
        // validation failures since the document itself is well-formed JSON.
        if e.is_data() {
            Error::validation(format!("manifest: {e}"))
        } else {
            Error::Json(e)
        }
    })?;
    validate_manifest(&manifest)?;
    Ok(manifest)
}

pub fn validate_manifest(manifest: &Manifest) -> Result<()> {
    if !(manifest.fs_hz.is_finite() && manifest.fs_hz > 0.0) {
        return Err(Error::validation(format!(
            "manifest fs_hz must be positive, got {}",
            manifest.fs_hz
        )));
    }
    let default_units = Units::default();
    if manifest.units != default_units {
        return Err(Error::validation(format!(
            "unsupported units {{accel: {:?}, gyro: {:?}}}; expected {{\"g\", \"rad_s\"}}",
            manifest.units.accel, manifest.units.gyro
        )));
    }
    let mut seen = HashSet::new();
    for entry in &manifest.files {
        if !seen.insert(entry.path.as_str()) {
            return Err(Error::Duplication(format!(
                "manifest lists {:?} more than once",
                entry.path
            )));
        }
    }
    Ok(())
}

pub const CSV_HEADER: &str = "t,ax,ay,az,wx,wy,wz";

/// Parse one sensor CSV into a recording, validating the timestamp sequence.
///
/// No filtering or unit conversion is applied to the sample values.
pub fn ingest_recording(csv_text: &str, meta: &ManifestEntry, fs_hz: f64) -> Result<Recording> {
    let mut lines = csv_text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::validation("empty sensor file"))?;
    if header.trim_end_matches('\r').trim() != CSV_HEADER {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected header {CSV_HEADER:?}, got {:?}", header.trim()),
        });
    }

    let max_dt = MAX_GAP_STEPS / fs_hz;
    let mut samples: Vec<SensorSample> = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let row = raw.trim_end_matches('\r');
        if row.trim().is_empty() {
            continue;
        }
        let mut values = [0.0f64; 7];
        let mut fields = row.split(',');
        for (i, slot) in values.iter_mut().enumerate() {
            let field = fields.next().ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected 7 fields, found {i}"),
            })?;
            let v: f64 = field.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("field {} is not a number: {:?}", i + 1, field.trim()),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("field {} is not finite: {:?}", i + 1, field.trim()),
                });
            }
            *slot = v;
        }
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: "more than 7 fields".to_string(),
            });
        }
        let t = values[0];
        if t < 0.0 {
            return Err(Error::Parse {
                line: line_no,
                message: format!("negative timestamp {t}"),
            });
        }
        if let Some(prev) = samples.last() {
            let dt = t - prev.t;
            if dt <= 0.0 {
                return Err(Error::Sequencing { line: line_no, t });
            }
            if dt > max_dt {
                return Err(Error::Gap {
                    line: line_no,
                    dt,
                    max_dt,
                });
            }
        }
        samples.push(SensorSample {
            t,
            accel: [values[1], values[2], values[3]],
            gyro: [values[4], values[5], values[6]],
        });
    }

    if samples.len() < 2 {
        return Err(Error::validation(format!(
            "sensor file has {} data rows, need at least 2",
            samples.len()
        )));
    }

    Ok(Recording {
        id: meta.recording_id(),
        subject_id: meta.subject.clone(),
        exercise: meta.exercise,
        side: meta.side,
        samples,
        annotation: None,
    })
}

/// Serialize a recording to the sensor CSV format.
///
/// Values are printed with the shortest decimal representation that parses
/// back to the identical bits, so write-then-ingest round-trips exactly.
pub fn write_recording_csv(rec: &Recording) -> String {
    let mut out = String::with_capacity(rec.samples.len() * 64 + 32);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &rec.samples {
        let mut buf = Vec::with_capacity(64);
        write!(
            buf,
            "{},{},{},{},{},{},{}",
            s.t, s.accel[0], s.accel[1], s.accel[2], s.gyro[0], s.gyro[1], s.gyro[2]
        )
        .unwrap();
        out.push_str(std::str::from_utf8(&buf).unwrap());
        out.push('\n');
    }
    out
}

/// Sidecar document mapping recording ids to annotated intervals.
pub type AnnotationMap = std::collections::BTreeMap<String, Interval>;

/// Apply an annotation map to a set of recordings, by id.
pub fn apply_annotations(recordings: &mut [Recording], annotations: &AnnotationMap) -> Result<()> {
    for rec in recordings.iter_mut() {
        if let Some(interval) = annotations.get(&rec.id) {
            *rec = rec.with_annotation(*interval)?;
        }
    }
    Ok(())
}
