use std::path::PathBuf;

use clap::{Args, ValueEnum};
use textclf::benchmark::{DatasetLayout, DatasetSource};
use textclf::corpus::{LabeledCorpus, RecordFormat, SplitSpec};
use textclf::pipeline::PipelineConfig;
use textclf::{FeatureConfig, Loss, PreprocessConfig, TrainConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    /// One subdirectory per class, one file per document.
    Dir,
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset: a class-per-directory root or a JSONL/CSV record file.
    #[arg(long)]
    pub data: PathBuf,
    /// Layout of --data; inferred from the path when omitted.
    #[arg(long, value_enum)]
    pub format: Option<DataFormat>,
    #[arg(long, default_value = "text")]
    pub text_field: String,
    #[arg(long, default_value = "label")]
    pub label_field: String,
    /// Name used in reports; suffixed with the class count.
    #[arg(long)]
    pub dataset_name: Option<String>,
}

impl DataArgs {
    pub fn resolved_format(&self) -> DataFormat {
        self.format.unwrap_or_else(|| {
            if self.data.is_dir() {
                DataFormat::Dir
            } else {
                match RecordFormat::from_path(&self.data) {
                    Some(RecordFormat::Csv) => DataFormat::Csv,
                    _ => DataFormat::Jsonl,
                }
            }
        })
    }

    pub fn default_name(&self) -> String {
        self.dataset_name.clone().unwrap_or_else(|| {
            self.data
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "dataset".to_owned())
        })
    }

    pub fn source(&self) -> DatasetSource {
        let layout = match self.resolved_format() {
            DataFormat::Dir => DatasetLayout::DirPerClass(self.data.clone()),
            DataFormat::Jsonl | DataFormat::Csv => DatasetLayout::Records {
                path: self.data.clone(),
                format: self.record_format(),
                text_field: self.text_field.clone(),
                label_field: self.label_field.clone(),
            },
        };
        DatasetSource {
            name: self.default_name(),
            layout,
        }
    }

    fn record_format(&self) -> RecordFormat {
        if self.resolved_format() == DataFormat::Csv {
            RecordFormat::Csv
        } else {
            RecordFormat::Jsonl
        }
    }

    pub fn load(&self) -> textclf::Result<LabeledCorpus> {
        self.source().load()
    }
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    #[arg(long, default_value_t = 0.8)]
    pub train_fraction: f64,
    /// Split seed.
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    /// Shuffle the whole corpus instead of each class separately.
    #[arg(long)]
    pub no_stratify: bool,
}

impl SplitArgs {
    pub fn spec(&self) -> SplitSpec {
        SplitSpec {
            train_fraction: self.train_fraction,
            seed: self.seed,
            stratified: !self.no_stratify,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub no_lowercase: bool,
    #[arg(long)]
    pub no_strip_urls: bool,
    #[arg(long)]
    pub no_strip_emails: bool,
    #[arg(long)]
    pub no_strip_numeric_tokens: bool,
    #[arg(long)]
    pub remove_stopwords: bool,
    #[arg(long, default_value_t = 2)]
    pub min_token_chars: usize,
    /// Drop the leading mail/news header block of each document.
    #[arg(long)]
    pub strip_newsgroup_headers: bool,
}

impl PreprocessArgs {
    pub fn config(&self) -> PreprocessConfig {
        PreprocessConfig {
            lowercase: !self.no_lowercase,
            strip_urls: !self.no_strip_urls,
            strip_emails: !self.no_strip_emails,
            strip_numeric_tokens: !self.no_strip_numeric_tokens,
            remove_stopwords: self.remove_stopwords,
            min_token_chars: self.min_token_chars,
            strip_newsgroup_headers: self.strip_newsgroup_headers,
            ..PreprocessConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct FeatureArgs {
    #[arg(long, default_value_t = 1)]
    pub ngram_min: usize,
    #[arg(long, default_value_t = 3)]
    pub ngram_max: usize,
    #[arg(long, default_value_t = 2)]
    pub min_df: u32,
    #[arg(long, default_value_t = 1.0)]
    pub max_df_ratio: f64,
    #[arg(long)]
    pub sublinear_tf: bool,
}

impl FeatureArgs {
    pub fn config(&self) -> FeatureConfig {
        FeatureConfig {
            ngram_min: self.ngram_min,
            ngram_max: self.ngram_max,
            min_df: self.min_df,
            max_df_ratio: self.max_df_ratio,
            sublinear_tf: self.sublinear_tf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LossArg {
    Hinge,
    SquaredHinge,
}

#[derive(Debug, Clone, Args)]
pub struct TrainArgs {
    /// Penalty parameter C.
    #[arg(long = "c", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, value_enum, default_value = "squared-hinge")]
    pub loss: LossArg,
    #[arg(long, default_value_t = 1e-4)]
    pub tolerance: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
    /// Seed for the solver's visiting order.
    #[arg(long, default_value_t = 0)]
    pub solver_seed: u64,
    /// Constant appended to every example for the bias; 0 disables it.
    #[arg(long, default_value_t = 1.0)]
    pub bias_scale: f64,
}

impl TrainArgs {
    pub fn config(&self) -> TrainConfig {
        TrainConfig {
            c: self.c,
            loss: match self.loss {
                LossArg::Hinge => Loss::Hinge,
                LossArg::SquaredHinge => Loss::SquaredHinge,
            },
            tolerance: self.tolerance,
            max_epochs: self.max_epochs,
            seed: self.solver_seed,
            bias_scale: self.bias_scale,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    #[command(flatten)]
    pub preprocess: PreprocessArgs,
    #[command(flatten)]
    pub features: FeatureArgs,
    #[command(flatten)]
    pub train: TrainArgs,
}

impl ConfigArgs {
    pub fn pipeline_config(&self) -> PipelineConfig {
        PipelineConfig {
            preprocess: self.preprocess.config(),
            features: self.features.config(),
            train: self.train.config(),
        }
    }
}
