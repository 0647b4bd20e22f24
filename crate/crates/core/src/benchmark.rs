//! End-to-end split → fit → evaluate runs over one or more datasets.

use std::path::PathBuf;

use crate::corpus::{self, LabeledCorpus, RecordFormat, SplitSpec};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport, Provenance};
use crate::pipeline::{Pipeline, PipelineConfig};

#[derive(Debug, Clone)]
pub enum DatasetLayout {
    DirPerClass(PathBuf),
    Records {
        path: PathBuf,
        format: RecordFormat,
        text_field: String,
        label_field: String,
    },
}

#[derive(Debug, Clone)]
pub struct DatasetSource {
    /// Base name without class count, e.g. `20NewsGroup`.
    pub name: String,
    pub layout: DatasetLayout,
}

impl DatasetSource {
    pub fn load(&self) -> Result<LabeledCorpus> {
        match &self.layout {
            DatasetLayout::DirPerClass(root) => corpus::load_dir_per_class(root),
            DatasetLayout::Records {
                path,
                format,
                text_field,
                label_field,
            } => corpus::load_records(path, *format, text_field, Some(label_field)),
        }
    }

    /// Human description of what the loader expects, for missing-data errors.
    pub fn expected_layout(&self) -> String {
        match &self.layout {
            DatasetLayout::DirPerClass(root) => format!(
                "{}: directory with one subdirectory per class, one text file per document (e.g. {}/<class>/<doc>; class directories may also sit one level deeper, as in the train/test halves of a distribution)",
                self.name,
                root.display()
            ),
            DatasetLayout::Records { path, .. } => {
                format!("{}: JSONL or CSV record file at {}", self.name, path.display())
            }
        }
    }
}

pub struct BenchmarkRun {
    pub pipeline: Pipeline,
    pub report: EvalReport,
}

/// Splits, fits on the train side, and evaluates on the test side.
pub fn run_dataset(
    source: &DatasetSource,
    config: &PipelineConfig,
    split: &SplitSpec,
) -> Result<BenchmarkRun> {
    let corpus = source.load().map_err(|e| match e {
        Error::MissingPath(path) => Error::MissingDataset {
            path,
            expected: source.expected_layout(),
        },
        other => other,
    })?;
    let (train, test) = corpus::stratified_split(&corpus, split)?;
    let pipeline = Pipeline::fit(&train, config, &source.name, Some(split))?;
    let provenance = Provenance {
        dataset_name: source.name.clone(),
        split_seed: Some(split.seed),
        train_fraction: Some(split.train_fraction),
        config_digest: pipeline.metadata().config_digest.clone(),
    };
    let report = evaluate(&pipeline, &test, &provenance)?;
    Ok(BenchmarkRun { pipeline, report })
}
