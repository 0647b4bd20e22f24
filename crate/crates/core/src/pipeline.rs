//! The fitted preprocess → TFIDF → one-vs-rest SVM chain.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{LabeledCorpus, SplitSpec};
use crate::digest::json_digest;
use crate::error::{Error, Result};
use crate::features::{FeatureConfig, TfidfModel};
use crate::preprocess::{PreprocessConfig, TokenSequence};
use crate::solver::{train_one_vs_rest, MulticlassLinearModel, TrainConfig};
use crate::sparse::SparseVector;

/// Every setting that influences a fitted pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct PipelineConfig {
    pub preprocess: PreprocessConfig,
    pub features: FeatureConfig,
    pub train: TrainConfig,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.preprocess.validate()?;
        self.features.validate()?;
        self.train.validate()
    }
}

#[derive(Serialize)]
struct DigestInput<'a> {
    config: &'a PipelineConfig,
    split: Option<&'a SplitSpec>,
}

/// Hex SHA-256 over the canonical JSON of all configuration, including the
/// split when one was applied.
pub fn config_digest(config: &PipelineConfig, split: Option<&SplitSpec>) -> String {
    json_digest(&DigestInput { config, split })
}

/// Provenance stored alongside a fitted pipeline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TrainingMetadata {
    pub dataset_name: String,
    pub n_training_documents: usize,
    pub split: Option<SplitSpec>,
    pub config_digest: String,
    /// Caller-supplied creation time; left empty by default so that identical
    /// runs produce identical files.
    pub created_at: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Pipeline {
    tfidf: TfidfModel,
    classifier: MulticlassLinearModel,
    metadata: TrainingMetadata,
}

impl Pipeline {
    pub fn new(
        tfidf: TfidfModel,
        classifier: MulticlassLinearModel,
        metadata: TrainingMetadata,
    ) -> Result<Self> {
        if classifier.n_features() != tfidf.dimension() {
            return Err(Error::InvalidConfig(format!(
                "classifier has {} features but the vocabulary has {} terms",
                classifier.n_features(),
                tfidf.dimension()
            )));
        }
        Ok(Self {
            tfidf,
            classifier,
            metadata,
        })
    }

    /// Fits TFIDF and the classifier on a labeled training corpus.
    pub fn fit(
        train: &LabeledCorpus,
        config: &PipelineConfig,
        dataset_name: &str,
        split: Option<&SplitSpec>,
    ) -> Result<Self> {
        config.validate()?;
        if train.is_empty() {
            return Err(Error::NoTrainingDocuments);
        }
        let labels = train.labels()?;
        let tokens: Vec<TokenSequence> = train
            .documents()
            .par_iter()
            .map(|d| config.preprocess.analyze(&d.text))
            .collect();
        let tfidf = TfidfModel::fit(&tokens, &config.features, &config.preprocess)?;
        let xs: Vec<SparseVector> = tokens.par_iter().map(|t| tfidf.transform(t)).collect();
        drop(tokens);
        let classifier = train_one_vs_rest(&xs, &labels, tfidf.dimension(), &config.train)?;
        let metadata = TrainingMetadata {
            dataset_name: dataset_name.to_owned(),
            n_training_documents: train.len(),
            split: split.copied(),
            config_digest: config_digest(config, split),
            created_at: None,
        };
        Self::new(tfidf, classifier, metadata)
    }

    pub fn tfidf(&self) -> &TfidfModel {
        &self.tfidf
    }

    pub fn classifier(&self) -> &MulticlassLinearModel {
        &self.classifier
    }

    pub fn metadata(&self) -> &TrainingMetadata {
        &self.metadata
    }

    pub fn metadata_mut(&mut self) -> &mut TrainingMetadata {
        &mut self.metadata
    }

    pub fn config(&self) -> PipelineConfig {
        PipelineConfig {
            preprocess: self.tfidf.preprocess_config().clone(),
            features: self.tfidf.config().clone(),
            train: self.classifier.config().clone(),
        }
    }

    pub fn vectorize(&self, raw: &str) -> SparseVector {
        self.tfidf.transform_text(raw)
    }

    pub fn decision_scores(&self, raw: &str) -> Result<Vec<f64>> {
        self.classifier.decision_scores(&self.vectorize(raw))
    }

    pub fn predict(&self, raw: &str) -> Result<&str> {
        self.classifier.predict(&self.vectorize(raw))
    }
}
