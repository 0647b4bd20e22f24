//! Self-describing JSON model files.
//!
//! Layout: `{"format_version":N,"checksum":"<sha256>","payload":{...}}`. The
//! checksum is the SHA-256 of the entire file with the checksum value
//! replaced by 64 ASCII zeros. Floats are written in shortest round-trip form
//! and parsed with correct rounding, so a save/load cycle reproduces every
//! weight bit for bit.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::digest::sha256_hex;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, TfidfModel, Vocabulary};
use crate::pipeline::{Pipeline, TrainingMetadata};
use crate::preprocess::PreprocessConfig;
use crate::solver::{BinaryModel, ClassTrainingSummary, MulticlassLinearModel, TrainConfig};

pub const FORMAT_VERSION: u64 = 1;

const CHECKSUM_KEY: &str = "\"checksum\":\"";
const CHECKSUM_PLACEHOLDER: &str =
    "0000000000000000000000000000000000000000000000000000000000000000";

#[derive(Serialize, Deserialize)]
struct Envelope<P> {
    format_version: u64,
    checksum: String,
    payload: P,
}

#[derive(Deserialize)]
struct VersionProbe {
    format_version: u64,
}

#[derive(Serialize, Deserialize)]
struct VocabularyRecord {
    n_documents: usize,
    terms: Vec<String>,
    document_frequency: Vec<u32>,
}

#[derive(Serialize, Deserialize)]
struct ClassWeights {
    class: String,
    /// Weight of the appended constant coordinate (absent without a bias).
    bias_weight: Option<f64>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Payload {
    preprocess: PreprocessConfig,
    features: FeatureConfig,
    train: TrainConfig,
    vocabulary: VocabularyRecord,
    idf: Vec<f64>,
    classes: Vec<String>,
    n_features: usize,
    weights: Vec<ClassWeights>,
    metadata: TrainingMetadata,
    training: Vec<ClassTrainingSummary>,
}

fn to_payload(pipeline: &Pipeline) -> Payload {
    let tfidf = pipeline.tfidf();
    let clf = pipeline.classifier();
    let vocab = tfidf.vocabulary();
    let weights = clf
        .classes()
        .iter()
        .zip(clf.models())
        .map(|(class, m)| {
            let (indices, values) = m
                .feature_weights()
                .iter()
                .enumerate()
                .filter(|(_, &w)| w != 0.0)
                .map(|(j, &w)| (j as u32, w))
                .unzip();
            ClassWeights {
                class: class.clone(),
                bias_weight: (m.bias_scale > 0.0).then(|| m.weights[m.weights.len() - 1]),
                indices,
                values,
            }
        })
        .collect();
    Payload {
        preprocess: tfidf.preprocess_config().clone(),
        features: tfidf.config().clone(),
        train: clf.config().clone(),
        vocabulary: VocabularyRecord {
            n_documents: vocab.n_documents(),
            terms: vocab.terms().to_vec(),
            document_frequency: vocab.document_frequency().to_vec(),
        },
        idf: tfidf.idf().to_vec(),
        classes: clf.classes().to_vec(),
        n_features: clf.n_features(),
        weights,
        metadata: pipeline.metadata().clone(),
        training: clf.summaries().to_vec(),
    }
}

fn from_payload(p: Payload) -> Result<Pipeline> {
    let vocabulary = Vocabulary::from_parts(
        p.vocabulary.terms,
        p.vocabulary.document_frequency,
        p.vocabulary.n_documents,
    )?;
    let tfidf = TfidfModel::from_parts(vocabulary, p.idf, p.features, p.preprocess)?;
    if p.weights.len() != p.classes.len() || p.training.len() != p.classes.len() {
        return Err(Error::CorruptModel(
            "class count disagrees across sections".into(),
        ));
    }
    let has_bias = p.train.bias_scale > 0.0;
    let mut models = Vec::with_capacity(p.weights.len());
    for ((record, class), summary) in p.weights.into_iter().zip(&p.classes).zip(&p.training) {
        if &record.class != class || &summary.class != class {
            return Err(Error::CorruptModel(format!(
                "class order mismatch at `{class}`"
            )));
        }
        if record.indices.len() != record.values.len() {
            return Err(Error::CorruptModel(format!("ragged weights for `{class}`")));
        }
        let mut weights = vec![0.0; p.n_features + usize::from(has_bias)];
        for (&j, &v) in record.indices.iter().zip(&record.values) {
            let slot = weights
                .get_mut(j as usize)
                .filter(|_| (j as usize) < p.n_features)
                .ok_or(Error::DimensionMismatch {
                    index: j as usize,
                    dim: p.n_features,
                })?;
            *slot = v;
        }
        match (has_bias, record.bias_weight) {
            (true, Some(b)) => weights[p.n_features] = b,
            (false, None) => {}
            _ => {
                return Err(Error::CorruptModel(format!(
                    "bias entry inconsistent for `{class}`"
                )))
            }
        }
        models.push(BinaryModel {
            weights,
            bias_scale: p.train.bias_scale,
            dual_variables: Vec::new(),
            converged: summary.converged,
            epochs_run: summary.epochs_run,
            final_violation: summary.final_violation,
            primal_objective: summary.primal_objective,
            dual_objective: summary.dual_objective,
        });
    }
    let classifier = MulticlassLinearModel::from_parts(p.classes, models, p.train, p.training)?;
    Pipeline::new(tfidf, classifier, p.metadata)
}

/// Serializes a pipeline to the model file format.
pub fn to_bytes(pipeline: &Pipeline) -> Result<Vec<u8>> {
    let envelope = Envelope {
        format_version: FORMAT_VERSION,
        checksum: CHECKSUM_PLACEHOLDER.to_owned(),
        payload: to_payload(pipeline),
    };
    let mut bytes =
        serde_json::to_vec(&envelope).map_err(|e| Error::Serialization(e.to_string()))?;
    bytes.push(b'\n');
    let at = checksum_offset(&bytes).expect("envelope starts with the checksum field");
    let digest = sha256_hex(&bytes);
    bytes[at..at + 64].copy_from_slice(digest.as_bytes());
    Ok(bytes)
}

/// Parses and verifies a model file.
///
/// The version is checked before the checksum so that files from other
/// releases report a version error rather than corruption.
pub fn from_bytes(bytes: &[u8]) -> Result<Pipeline> {
    let probe: VersionProbe = serde_json::from_slice(bytes)
        .map_err(|e| Error::CorruptModel(format!("not a model file: {e}")))?;
    if probe.format_version != FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: probe.format_version,
            expected: FORMAT_VERSION,
        });
    }
    let at = checksum_offset(bytes)
        .ok_or_else(|| Error::CorruptModel("missing checksum field".into()))?;
    let stored = std::str::from_utf8(&bytes[at..at + 64])
        .map_err(|_| Error::CorruptModel("checksum is not ASCII".into()))?
        .to_owned();
    let mut zeroed = bytes.to_vec();
    zeroed[at..at + 64].copy_from_slice(CHECKSUM_PLACEHOLDER.as_bytes());
    let actual = sha256_hex(&zeroed);
    if stored != actual {
        return Err(Error::CorruptModel(format!(
            "checksum mismatch (stored {stored}, computed {actual})"
        )));
    }
    let envelope: Envelope<Payload> =
        serde_json::from_slice(bytes).map_err(|e| Error::CorruptModel(e.to_string()))?;
    from_payload(envelope.payload)
}

fn checksum_offset(bytes: &[u8]) -> Option<usize> {
    let key = CHECKSUM_KEY.as_bytes();
    let start = bytes.windows(key.len()).position(|w| w == key)? + key.len();
    (bytes.len() >= start + 64).then_some(start)
}

pub fn save(pipeline: &Pipeline, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let bytes = to_bytes(pipeline)?;
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load(path: impl AsRef<Path>) -> Result<Pipeline> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    from_bytes(&bytes)
}
