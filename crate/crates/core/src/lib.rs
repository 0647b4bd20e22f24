//! Deterministic, interpretable text classification.
//!
//! The pipeline is: load a labeled corpus, clean and tokenize each document,
//! vectorize with word n-gram TFIDF, and train a one-vs-rest linear SVM by
//! dual coordinate descent. Every stage is deterministic for a fixed input
//! and seed, independent of thread count, and the trained model is linear so
//! each prediction decomposes exactly into per-term contributions.

pub mod benchmark;
pub mod corpus;
pub mod digest;
pub mod error;
pub mod eval;
pub mod explain;
pub mod features;
pub mod literature;
pub mod model_io;
pub mod pipeline;
pub mod preprocess;
pub mod report;
pub mod solver;
pub mod sparse;

pub use corpus::{Document, LabeledCorpus, SplitSpec};
pub use error::{Error, Result};
pub use eval::EvalReport;
pub use features::{FeatureConfig, TfidfModel, Vocabulary};
pub use pipeline::Pipeline;
pub use preprocess::{PreprocessConfig, TokenSequence};
pub use solver::{BinaryModel, Loss, MulticlassLinearModel, TrainConfig};
pub use sparse::SparseVector;
