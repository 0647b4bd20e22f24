//! Corpus loading and deterministic train/test splitting.
//!
//! Two layouts are supported: one directory per class holding one text file
//! per document (20 Newsgroups, BBC News), and record files (JSONL or CSV)
//! with a text column and a label column.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walkdir::WalkDir;

use crate::digest::class_seed;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub text: String,
    pub label: Option<String>,
}

impl Document {
    pub fn new(id: impl Into<String>, text: impl Into<String>, label: Option<&str>) -> Self {
        Self {
            id: id.into(),
            text: text.into(),
            label: label.map(str::to_owned),
        }
    }
}

/// An ordered, immutable collection of documents and the sorted set of
/// labels they carry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCorpus {
    documents: Vec<Document>,
    classes: Vec<String>,
}

impl LabeledCorpus {
    /// Builds a corpus, keeping document order as given. Ids must be unique.
    pub fn from_documents(documents: Vec<Document>) -> Result<Self> {
        let mut seen = HashSet::with_capacity(documents.len());
        for doc in &documents {
            if !seen.insert(doc.id.as_str()) {
                return Err(Error::DuplicateId(doc.id.clone()));
            }
        }
        let classes: BTreeSet<&str> = documents
            .iter()
            .filter_map(|d| d.label.as_deref())
            .collect();
        let classes = classes.into_iter().map(str::to_owned).collect();
        Ok(Self { documents, classes })
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.id.as_str())
    }

    pub fn texts(&self) -> impl Iterator<Item = &str> {
        self.documents.iter().map(|d| d.text.as_str())
    }

    /// Labels of every document; errors on the first unlabeled one.
    pub fn labels(&self) -> Result<Vec<&str>> {
        self.documents
            .iter()
            .map(|d| {
                d.label.as_deref().ok_or_else(|| {
                    Error::InvalidConfig(format!("document `{}` has no label", d.id))
                })
            })
            .collect()
    }

    /// Per-class document counts in class order.
    pub fn class_counts(&self) -> BTreeMap<&str, usize> {
        let mut counts = BTreeMap::new();
        for label in self.documents.iter().filter_map(|d| d.label.as_deref()) {
            *counts.entry(label).or_insert(0) += 1;
        }
        counts
    }
}

/// Loads a directory-per-class corpus.
///
/// Every regular, non-hidden file found below `root` becomes a document whose
/// label is the name of its immediate parent directory and whose id is its
/// path relative to `root` (with `/` separators). Nested layouts such as the
/// two `20news-bydate-*` halves are therefore merged into one corpus. Files
/// directly inside `root` are ignored. File bytes are decoded as UTF-8 with
/// invalid sequences replaced by U+FFFD.
pub fn load_dir_per_class(root: impl AsRef<Path>) -> Result<LabeledCorpus> {
    let root = root.as_ref();
    if !root.exists() {
        return Err(Error::MissingPath(root.to_path_buf()));
    }

    let mut files: Vec<(String, String, PathBuf)> = Vec::new();
    let mut dirs: BTreeSet<PathBuf> = BTreeSet::new();
    let mut non_empty: HashSet<PathBuf> = HashSet::new();
    let walker = WalkDir::new(root)
        .follow_links(true)
        .min_depth(1)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| !is_hidden(e.file_name()));
    for entry in walker {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(root).to_path_buf();
            Error::io(path, e.into())
        })?;
        let path = entry.path();
        let rel = path
            .strip_prefix(root)
            .expect("walkdir yields paths under root");
        if let Some(parent) = rel.parent() {
            non_empty.insert(parent.to_path_buf());
        }
        if entry.file_type().is_dir() {
            dirs.insert(rel.to_path_buf());
            continue;
        }
        if !entry.file_type().is_file() || rel.components().count() < 2 {
            continue;
        }
        let label = rel
            .parent()
            .and_then(Path::file_name)
            .expect("depth >= 2")
            .to_string_lossy()
            .into_owned();
        let id = rel
            .components()
            .map(|c| c.as_os_str().to_string_lossy())
            .collect::<Vec<_>>()
            .join("/");
        files.push((id, label, path.to_path_buf()));
    }

    let mut documents = files
        .into_par_iter()
        .map(|(id, label, path)| {
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            let text = String::from_utf8_lossy(&bytes).into_owned();
            Ok(Document {
                id,
                text,
                label: Some(label),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    documents.sort_by(|a, b| a.id.cmp(&b.id));

    for dir in dirs.iter().filter(|d| !non_empty.contains(*d)) {
        log::warn!(
            "class directory `{}` contains no files; class dropped",
            dir.display()
        );
    }
    if documents.is_empty() {
        return Err(Error::NoClassDirectories(root.to_path_buf()));
    }
    LabeledCorpus::from_documents(documents)
}

fn is_hidden(name: &std::ffi::OsStr) -> bool {
    name.to_str().is_some_and(|s| s.starts_with('.'))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    Jsonl,
    Csv,
}

impl RecordFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "jsonl" | "ndjson" => Some(RecordFormat::Jsonl),
            "csv" => Some(RecordFormat::Csv),
            _ => None,
        }
    }
}

/// Loads JSONL or CSV records. Document ids are the zero-based record index.
///
/// With `label_field = None` the corpus is loaded unlabeled, for prediction.
/// Line numbers in errors are 1-based physical lines (the CSV header is line 1).
pub fn load_records(
    path: impl AsRef<Path>,
    format: RecordFormat,
    text_field: &str,
    label_field: Option<&str>,
) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(Error::MissingPath(path.to_path_buf()));
    }
    let documents = match format {
        RecordFormat::Jsonl => load_jsonl(path, text_field, label_field)?,
        RecordFormat::Csv => load_csv(path, text_field, label_field)?,
    };
    LabeledCorpus::from_documents(documents)
}

fn load_jsonl(path: &Path, text_field: &str, label_field: Option<&str>) -> Result<Vec<Document>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let content = String::from_utf8_lossy(&bytes);
    let mut documents = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        let line_no = lineno + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value =
            serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
                path: path.to_path_buf(),
                line: line_no,
                message: e.to_string(),
            })?;
        let object = value.as_object().ok_or_else(|| Error::MalformedRecord {
            path: path.to_path_buf(),
            line: line_no,
            message: "expected a JSON object".into(),
        })?;
        let field = |name: &str| -> Result<String> {
            match object.get(name) {
                None | Some(serde_json::Value::Null) => Err(Error::MissingField {
                    path: path.to_path_buf(),
                    line: line_no,
                    field: name.to_owned(),
                }),
                Some(serde_json::Value::String(s)) => Ok(s.clone()),
                Some(other) => Ok(other.to_string()),
            }
        };
        let text = field(text_field)?;
        let label = label_field.map(field).transpose()?;
        documents.push(Document {
            id: documents.len().to_string(),
            text,
            label,
        });
    }
    Ok(documents)
}

fn load_csv(path: &Path, text_field: &str, label_field: Option<&str>) -> Result<Vec<Document>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingField {
                path: path.to_path_buf(),
                line: 1,
                field: name.to_owned(),
            })
    };
    let text_col = column(text_field)?;
    let label_col = label_field.map(column).transpose()?;

    let mut documents = Vec::new();
    for record in reader.byte_records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let get = |col: usize, name: &str| -> Result<String> {
            record
                .get(col)
                .map(|b| String::from_utf8_lossy(b).into_owned())
                .ok_or_else(|| Error::MissingField {
                    path: path.to_path_buf(),
                    line,
                    field: name.to_owned(),
                })
        };
        let text = get(text_col, text_field)?;
        let label = match (label_col, label_field) {
            (Some(col), Some(name)) => Some(get(col, name)?),
            _ => None,
        };
        documents.push(Document {
            id: documents.len().to_string(),
            text,
            label,
        });
    }
    Ok(documents)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::MalformedRecord {
            path: path.to_path_buf(),
            line,
            message: format!("{kind:?}"),
        },
    }
}

/// How to partition a corpus into train and test sides.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub seed: u64,
    pub stratified: bool,
}

impl Default for SplitSpec {
    fn default() -> Self {
        Self {
            train_fraction: 0.8,
            seed: 42,
            stratified: true,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(Error::InvalidSplit(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// Splits a corpus into `(train, test)`.
///
/// Stratified: each class `c` with `n_c` documents sends `round(f * n_c)` of
/// them to train. The class's documents are sorted by id and shuffled with a
/// ChaCha8 generator (`rand_chacha`, seeded through `seed_from_u64`) whose seed
/// is `spec.seed ^ stable_digest64(c)`; the first documents of the permutation
/// go to train. Unstratified splits shuffle the whole corpus the same way with
/// `spec.seed` directly. Both sides keep the corpus's document order.
pub fn stratified_split(
    corpus: &LabeledCorpus,
    spec: &SplitSpec,
) -> Result<(LabeledCorpus, LabeledCorpus)> {
    spec.validate()?;
    let mut in_train = vec![false; corpus.len()];

    if spec.stratified {
        let mut by_class: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
        for (pos, doc) in corpus.documents.iter().enumerate() {
            let label = doc.label.as_deref().ok_or_else(|| {
                Error::InvalidSplit(format!("document `{}` has no label", doc.id))
            })?;
            by_class.entry(label).or_default().push(pos);
        }
        for (class, mut members) in by_class {
            if members.len() < 2 {
                return Err(Error::ClassTooSmall {
                    class: class.to_owned(),
                    count: members.len(),
                });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(class_seed(spec.seed, class));
            take_train(
                corpus,
                &mut members,
                spec.train_fraction,
                &mut rng,
                &mut in_train,
            );
        }
    } else {
        let mut members: Vec<usize> = (0..corpus.len()).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        take_train(
            corpus,
            &mut members,
            spec.train_fraction,
            &mut rng,
            &mut in_train,
        );
    }

    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (doc, &t) in corpus.documents.iter().zip(&in_train) {
        if t {
            train.push(doc.clone());
        } else {
            test.push(doc.clone());
        }
    }
    Ok((
        LabeledCorpus::from_documents(train)?,
        LabeledCorpus::from_documents(test)?,
    ))
}

fn take_train(
    corpus: &LabeledCorpus,
    members: &mut [usize],
    fraction: f64,
    rng: &mut ChaCha8Rng,
    in_train: &mut [bool],
) {
    members.sort_by(|&a, &b| corpus.documents[a].id.cmp(&corpus.documents[b].id));
    members.shuffle(rng);
    let n_train = (fraction * members.len() as f64).round() as usize;
    for &pos in &members[..n_train] {
        in_train[pos] = true;
    }
}
