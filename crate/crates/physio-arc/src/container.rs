//! On-disk formats: binary containers for window tensors (`ARCT`) and
//! feature matrices (`ARCF`) — a JSON header followed by little-endian f64
//! payload, exact round-trip — plus JSON model artifacts and annotation
//! sidecars.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::data::Interval;
use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, Scaling};
use crate::knn::KnnModel;
use crate::nn::CrnnModel;
use crate::segment::{RecordingInfo, SegmentationSpec, WindowMeta, WindowTensor, CHANNELS};
use crate::select::FeatureMask;
use crate::svm::SvcModel;
use crate::trees::ForestModel;

const TENSOR_MAGIC: &[u8; 4] = b"ARCT";
const FEATURE_MAGIC: &[u8; 4] = b"ARCF";
const FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct TensorHeader {
    n: usize,
    len: usize,
    labels: Vec<crate::data::ExerciseClass>,
    meta: Vec<WindowMeta>,
    recordings: Vec<RecordingInfo>,
    spec: SegmentationSpec,
}

#[derive(Serialize, Deserialize)]
struct FeatureHeader {
    n: usize,
    d: usize,
    names: Vec<String>,
    labels: Vec<crate::data::ExerciseClass>,
    meta: Vec<WindowMeta>,
    recordings: Vec<RecordingInfo>,
    spec: Option<SegmentationSpec>,
    scaling: Option<Scaling>,
}

fn write_container(w: &mut impl Write, magic: &[u8; 4], header: &[u8], values: &[f64]) -> Result<()> {
    w.write_all(magic)?;
    w.write_all(&FORMAT_VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u64).to_le_bytes())?;
    w.write_all(header)?;
    w.write_all(&(values.len() as u64).to_le_bytes())?;
    let mut buf = Vec::with_capacity(values.len().min(1 << 16) * 8);
    for chunk in values.chunks(1 << 13) {
        buf.clear();
        for v in chunk {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        w.write_all(&buf)?;
    }
    Ok(())
}

fn read_container(r: &mut impl Read, magic: &[u8; 4], what: &str) -> Result<(Vec<u8>, Vec<f64>)> {
    let mut got = [0u8; 4];
    r.read_exact(&mut got)?;
    if &got != magic {
        return Err(Error::validation(format!(
            "not a {what} container: bad magic {got:?}"
        )));
    }
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let version = u32::from_le_bytes(u32buf);
    if version != FORMAT_VERSION {
        return Err(Error::validation(format!(
            "{what} container version {version} unsupported (expected {FORMAT_VERSION})"
        )));
    }
    let mut u64buf = [0u8; 8];
    r.read_exact(&mut u64buf)?;
    let header_len = u64::from_le_bytes(u64buf) as usize;
    let mut header = vec![0u8; header_len];
    r.read_exact(&mut header)?;
    r.read_exact(&mut u64buf)?;
    let n_values = u64::from_le_bytes(u64buf) as usize;
    let mut values = vec![0.0f64; n_values];
    let mut chunk = vec![0u8; (1usize << 13) * 8];
    let mut filled = 0usize;
    while filled < n_values {
        let take = (n_values - filled).min(1 << 13);
        let bytes = &mut chunk[..take * 8];
        r.read_exact(bytes)?;
        for (i, b) in bytes.chunks_exact(8).enumerate() {
            values[filled + i] = f64::from_le_bytes(b.try_into().unwrap());
        }
        filled += take;
    }
    Ok((header, values))
}

pub fn write_tensor(w: &mut impl Write, wt: &WindowTensor) -> Result<()> {
    let header = serde_json::to_vec(&TensorHeader {
        n: wt.n,
        len: wt.len,
        labels: wt.labels.clone(),
        meta: wt.meta.clone(),
        recordings: wt.recordings.clone(),
        spec: wt.spec,
    })?;
    write_container(w, TENSOR_MAGIC, &header, &wt.data)
}

pub fn read_tensor(r: &mut impl Read) -> Result<WindowTensor> {
    let (header, data) = read_container(r, TENSOR_MAGIC, "window tensor")?;
    let h: TensorHeader = serde_json::from_slice(&header)?;
    if data.len() != h.n * h.len * CHANNELS {
        return Err(Error::validation(format!(
            "window tensor payload holds {} values, header implies {}",
            data.len(),
            h.n * h.len * CHANNELS
        )));
    }
    if h.labels.len() != h.n || h.meta.len() != h.n {
        return Err(Error::validation("window tensor header is inconsistent"));
    }
    Ok(WindowTensor {
        data,
        n: h.n,
        len: h.len,
        labels: h.labels,
        meta: h.meta,
        recordings: h.recordings,
        spec: h.spec,
    })
}

pub fn write_features(w: &mut impl Write, fm: &FeatureMatrix) -> Result<()> {
    let header = serde_json::to_vec(&FeatureHeader {
        n: fm.n(),
        d: fm.d,
        names: fm.names.clone(),
        labels: fm.labels.clone(),
        meta: fm.meta.clone(),
        recordings: fm.recordings.clone(),
        spec: fm.spec,
        scaling: fm.scaling.clone(),
    })?;
    write_container(w, FEATURE_MAGIC, &header, &fm.values)
}

pub fn read_features(r: &mut impl Read) -> Result<FeatureMatrix> {
    let (header, values) = read_container(r, FEATURE_MAGIC, "feature matrix")?;
    let h: FeatureHeader = serde_json::from_slice(&header)?;
    if values.len() != h.n * h.d {
        return Err(Error::validation(format!(
            "feature payload holds {} values, header implies {}",
            values.len(),
            h.n * h.d
        )));
    }
    if h.labels.len() != h.n || h.meta.len() != h.n || h.names.len() != h.d {
        return Err(Error::validation("feature header is inconsistent"));
    }
    Ok(FeatureMatrix {
        values,
        d: h.d,
        names: h.names,
        labels: h.labels,
        meta: h.meta,
        recordings: h.recordings,
        spec: h.spec,
        scaling: h.scaling,
    })
}

/// A trained classifier plus everything inference needs: the scaling fitted
/// on its training rows, the feature mask it was trained through, and the
/// segmentation that produced its windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub classifier: ModelKind,
    pub scaling: Option<Scaling>,
    pub mask: Option<FeatureMask>,
    /// Names of the masked feature columns, in model input order.
    pub feature_names: Vec<String>,
    pub segmentation: Option<SegmentationSpec>,
    pub n_classes: usize,
    pub training_accuracy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Knn(KnnModel),
    RandomForest(ForestModel),
    Svc(SvcModel),
    Crnn(CrnnModel),
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::Knn(_) => "knn",
            ModelKind::RandomForest(_) => "random_forest",
            ModelKind::Svc(_) => "svc",
            ModelKind::Crnn(_) => "crnn",
        }
    }
}

pub fn model_to_json(artifact: &ModelArtifact) -> Result<String> {
    Ok(serde_json::to_string(artifact)?)
}

pub fn model_from_json(text: &str) -> Result<ModelArtifact> {
    Ok(serde_json::from_str(text)?)
}

/// Annotation sidecar: recording id → active interval, JSON, sorted by id.
pub fn annotations_to_json(intervals: &BTreeMap<String, Interval>) -> Result<String> {
    Ok(serde_json::to_string_pretty(intervals)?)
}

pub fn annotations_from_json(text: &str) -> Result<BTreeMap<String, Interval>> {
    Ok(serde_json::from_str(text)?)
}
