use std::fmt;
use std::fs;
use std::io::{self, BufRead, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use serde::Serialize;
use textclf::benchmark::{self, DatasetLayout, DatasetSource};
use textclf::corpus::{self, RecordFormat};
use textclf::eval::{self, EvalReport, Provenance};
use textclf::explain::{self, PredictionExplanation};
use textclf::{model_io, report, Error, Pipeline};

use crate::args::{ConfigArgs, DataArgs, SplitArgs};

pub const DATA_DIR_ENV: &str = "TEXTCLF_DATA_DIR";
const NEWSGROUPS_SUBDIR: &str = "20news-bydate";
const BBC_SUBDIR: &str = "bbc";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data { stage: &'static str, source: Error },
    NotConverged(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "{msg}"),
            CliError::Data { stage, source } => write!(f, "{stage}: {source}"),
            CliError::NotConverged(msg) => write!(f, "{msg}"),
        }
    }
}

type CliResult<T = ExitCode> = Result<T, CliError>;

/// Tags a library error with the stage that produced it. Invalid
/// configuration values come from flags, so they count as usage errors.
fn stage<T>(stage: &'static str, r: textclf::Result<T>) -> CliResult<T> {
    r.map_err(|source| match source {
        Error::InvalidConfig(msg) => CliError::Usage(format!("{stage}: {msg}")),
        source => CliError::Data { stage, source },
    })
}

fn convergence_outcome(pipeline: &Pipeline, fail: bool) -> CliResult {
    let summaries = pipeline.classifier().summaries();
    let stalled: Vec<&str> = summaries
        .iter()
        .filter(|s| !s.converged)
        .map(|s| s.class.as_str())
        .collect();
    if stalled.is_empty() {
        return Ok(ExitCode::SUCCESS);
    }
    let msg = format!(
        "solver did not converge within {} epochs for: {}",
        pipeline.classifier().config().max_epochs,
        stalled.join(", ")
    );
    if fail {
        Err(CliError::NotConverged(msg))
    } else {
        eprintln!("warning: {msg}");
        Ok(ExitCode::SUCCESS)
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Fit on the train side of a split instead of the whole dataset.
    #[arg(long)]
    pub split: bool,
    #[command(flatten)]
    pub split_args: SplitArgs,
    /// Where to write the model file.
    #[arg(long, short)]
    pub output: PathBuf,
    /// Timestamp to record in the model; omitted by default so that
    /// repeated fits produce identical files.
    #[arg(long)]
    pub created_at: Option<String>,
    /// Exit with status 3 if any class fails to converge.
    #[arg(long)]
    pub fail_on_nonconvergence: bool,
}

pub fn fit(args: &FitArgs) -> CliResult {
    let config = args.config.pipeline_config();
    let corpus = stage("load", args.data.load())?;
    let split = args.split.then(|| args.split_args.spec());
    let train = match &split {
        Some(spec) => stage("split", corpus::stratified_split(&corpus, spec))?.0,
        None => corpus,
    };
    let start = Instant::now();
    let mut pipeline = stage(
        "fit",
        Pipeline::fit(&train, &config, &args.data.default_name(), split.as_ref()),
    )?;
    let elapsed = start.elapsed().as_secs_f64();
    pipeline.metadata_mut().created_at = args.created_at.clone();
    stage("save", model_io::save(&pipeline, &args.output))?;

    let classifier = pipeline.classifier();
    let epochs = classifier
        .summaries()
        .iter()
        .map(|s| s.epochs_run)
        .max()
        .unwrap_or(0);
    let converged = classifier
        .summaries()
        .iter()
        .filter(|s| s.converged)
        .count();
    println!(
        "fit {}: documents={} V={} classes={} max_epochs_run={} converged={}/{} time={:.2}s model={}",
        eval::dataset_name_with_class_count(&pipeline.metadata().dataset_name, classifier.classes().len()),
        train.len(),
        pipeline.tfidf().dimension(),
        classifier.classes().len(),
        epochs,
        converged,
        classifier.classes().len(),
        elapsed,
        args.output.display()
    );
    convergence_outcome(&pipeline, args.fail_on_nonconvergence)
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub data: DataArgs,
    /// Evaluate on the test side of the split recorded in the model.
    #[arg(long)]
    pub held_out: bool,
    /// Report path prefix; writes PREFIX.json, PREFIX.md, PREFIX.csv and
    /// PREFIX.confusion.csv.
    #[arg(long)]
    pub report: PathBuf,
}

pub fn evaluate(args: &EvaluateArgs) -> CliResult {
    let pipeline = stage("load model", model_io::load(&args.model))?;
    let corpus = stage("load", args.data.load())?;
    let split = pipeline.metadata().split;
    let test = if args.held_out {
        let spec = split.ok_or_else(|| {
            CliError::Usage("--held-out needs a model fitted with --split".to_owned())
        })?;
        stage("split", corpus::stratified_split(&corpus, &spec))?.1
    } else {
        corpus
    };
    let provenance = Provenance {
        dataset_name: args
            .data
            .dataset_name
            .clone()
            .unwrap_or_else(|| pipeline.metadata().dataset_name.clone()),
        split_seed: split.map(|s| s.seed),
        train_fraction: split.map(|s| s.train_fraction),
        config_digest: pipeline.metadata().config_digest.clone(),
    };
    let report = stage("evaluate", eval::evaluate(&pipeline, &test, &provenance))?;
    let paths = stage("write report", report::write_report(&report, &args.report))?;
    print_summary(&report);
    println!("report: {}", paths.json.display());
    Ok(ExitCode::SUCCESS)
}

fn print_summary(report: &EvalReport) {
    println!(
        "{}: accuracy={} macro_f1={} correct={}/{} converged={}",
        report.dataset_name_with_class_count,
        report.accuracy,
        report.macro_f1,
        report.correct(),
        report.n_test,
        report.all_converged
    );
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    /// Text to classify; repeatable.
    #[arg(long)]
    pub text: Vec<String>,
    /// File with one document per line (`-` for stdin). Without --text or
    /// --input, documents are read from stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Print the per-term contributions behind each score.
    #[arg(long)]
    pub explain: bool,
    /// Number of contributions to list.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Explain every class, not only the predicted one.
    #[arg(long, requires = "explain")]
    pub all_classes: bool,
    /// JSON lines output.
    #[arg(long)]
    pub json: bool,
}

#[derive(Serialize)]
struct PredictionRecord<'a> {
    index: usize,
    predicted: &'a str,
    score: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    explanations: Option<Vec<PredictionExplanation>>,
}

fn read_lines(reader: impl BufRead, path: &Path) -> CliResult<Vec<String>> {
    reader
        .lines()
        .collect::<io::Result<Vec<_>>>()
        .map_err(|e| CliError::Data {
            stage: "read input",
            source: Error::io(path, e),
        })
}

fn predict_inputs(args: &PredictArgs) -> CliResult<Vec<String>> {
    let mut docs = args.text.clone();
    match &args.input {
        Some(path) if path.as_os_str() == "-" => {
            docs.extend(read_lines(io::stdin().lock(), path)?);
        }
        Some(path) => {
            let file = fs::File::open(path).map_err(|e| CliError::Data {
                stage: "read input",
                source: Error::io(path, e),
            })?;
            docs.extend(read_lines(io::BufReader::new(file), path)?);
        }
        None if args.text.is_empty() => {
            let mut buf = String::new();
            io::stdin()
                .lock()
                .read_to_string(&mut buf)
                .map_err(|e| CliError::Data {
                    stage: "read input",
                    source: Error::io("<stdin>", e),
                })?;
            docs.extend(buf.lines().map(str::to_owned));
        }
        None => {}
    }
    Ok(docs)
}

pub fn predict(args: &PredictArgs) -> CliResult {
    let pipeline = stage("load model", model_io::load(&args.model))?;
    let docs = predict_inputs(args)?;

    let results: Vec<(usize, f64, Option<Vec<PredictionExplanation>>)> = docs
        .par_iter()
        .map(|doc| -> textclf::Result<_> {
            let scores = pipeline.decision_scores(doc)?;
            let best = textclf::solver::argmax_first(&scores).expect("at least two classes");
            let explanations = if !args.explain {
                None
            } else if args.all_classes {
                Some(explain::explain_all_classes(&pipeline, doc, args.k)?)
            } else {
                Some(vec![explain::explain_prediction(&pipeline, doc, args.k)?])
            };
            Ok((best, scores[best], explanations))
        })
        .collect::<textclf::Result<_>>()
        .map_err(|source| CliError::Data {
            stage: "predict",
            source,
        })?;

    let classes = pipeline.classifier().classes();
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    let write_err = |e: io::Error| CliError::Data {
        stage: "write output",
        source: Error::io("<stdout>", e),
    };
    for (index, (best, score, explanations)) in results.into_iter().enumerate() {
        if args.json {
            let record = PredictionRecord {
                index,
                predicted: &classes[best],
                score,
                explanations,
            };
            let line = serde_json::to_string(&record).map_err(|e| CliError::Data {
                stage: "write output",
                source: Error::Serialization(e.to_string()),
            })?;
            writeln!(out, "{line}").map_err(write_err)?;
        } else {
            writeln!(out, "{index}\t{}\t{score}", classes[best]).map_err(write_err)?;
            for ex in explanations.iter().flatten() {
                write_explanation(&mut out, ex).map_err(write_err)?;
            }
        }
    }
    out.flush().map_err(write_err)?;
    Ok(ExitCode::SUCCESS)
}

/// Tab-separated explanation block; every numeric field is printed in
/// shortest round-trip form so the lines can be summed back exactly.
fn write_explanation(out: &mut impl Write, ex: &PredictionExplanation) -> io::Result<()> {
    writeln!(out, "  class\t{}\t{}", ex.class, ex.score)?;
    writeln!(out, "  bias\t{}", ex.bias_contribution)?;
    for c in &ex.contributions {
        writeln!(
            out,
            "  term\t{}\t{}\t{}\t{}",
            c.term, c.tfidf, c.weight, c.product
        )?;
    }
    writeln!(
        out,
        "  rest\t{}\t{}",
        ex.n_active_features - ex.contributions.len(),
        ex.other_contributions
    )
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    /// 20NewsGroup root (both bydate halves may sit under it; they are merged).
    #[arg(long)]
    pub newsgroups: Option<PathBuf>,
    /// BBC News root with one directory per class.
    #[arg(long)]
    pub bbc: Option<PathBuf>,
    /// Extra JSONL/CSV dataset to include.
    #[arg(long)]
    pub records: Option<PathBuf>,
    #[arg(long, default_value = "records")]
    pub records_name: String,
    #[arg(long, default_value = "text")]
    pub text_field: String,
    #[arg(long, default_value = "label")]
    pub label_field: String,
    /// Root holding `20news-bydate/` and `bbc/`, used when no dataset flag is
    /// given.
    #[arg(long, env = DATA_DIR_ENV)]
    pub data_dir: Option<PathBuf>,
    #[command(flatten)]
    pub split: SplitArgs,
    #[command(flatten)]
    pub config: ConfigArgs,
    /// Output directory for models, reports and benchmark.md.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub fail_on_nonconvergence: bool,
}

impl BenchmarkArgs {
    fn sources(&self) -> CliResult<Vec<DatasetSource>> {
        let dir = |name: &str, path: PathBuf| DatasetSource {
            name: name.to_owned(),
            layout: DatasetLayout::DirPerClass(path),
        };
        let mut sources = Vec::new();
        if let Some(path) = &self.newsgroups {
            sources.push(dir(textclf::literature::NEWSGROUPS_BASE, path.clone()));
        }
        if let Some(path) = &self.bbc {
            sources.push(dir(textclf::literature::BBC_NEWS_BASE, path.clone()));
        }
        if let Some(path) = &self.records {
            sources.push(DatasetSource {
                name: self.records_name.clone(),
                layout: DatasetLayout::Records {
                    path: path.clone(),
                    format: RecordFormat::from_path(path).unwrap_or(RecordFormat::Jsonl),
                    text_field: self.text_field.clone(),
                    label_field: self.label_field.clone(),
                },
            });
        }
        if !sources.is_empty() {
            return Ok(sources);
        }

        let Some(root) = &self.data_dir else {
            return Err(CliError::Usage(format!(
                "no dataset given: pass --newsgroups, --bbc or --records, or set {DATA_DIR_ENV}"
            )));
        };
        let candidates = [
            dir(
                textclf::literature::NEWSGROUPS_BASE,
                root.join(NEWSGROUPS_SUBDIR),
            ),
            dir(textclf::literature::BBC_NEWS_BASE, root.join(BBC_SUBDIR)),
        ];
        let expected: Vec<String> = candidates.iter().map(|s| s.expected_layout()).collect();
        let present: Vec<DatasetSource> = candidates
            .into_iter()
            .filter(|s| matches!(&s.layout, DatasetLayout::DirPerClass(p) if p.is_dir()))
            .collect();
        if present.is_empty() {
            return Err(CliError::Data {
                stage: "load",
                source: Error::MissingDataset {
                    path: root.clone(),
                    expected: expected.join("; "),
                },
            });
        }
        Ok(present)
    }
}

pub fn benchmark(args: &BenchmarkArgs) -> CliResult {
    let sources = args.sources()?;
    let config = args.config.pipeline_config();
    let split = args.split.spec();
    fs::create_dir_all(&args.out).map_err(|e| CliError::Data {
        stage: "write report",
        source: Error::io(&args.out, e),
    })?;

    let mut reports = Vec::new();
    let mut outcome = Ok(ExitCode::SUCCESS);
    for source in &sources {
        let start = Instant::now();
        let run = stage("benchmark", benchmark::run_dataset(source, &config, &split))?;
        let name = &run.report.dataset_name_with_class_count;
        stage(
            "save",
            model_io::save(&run.pipeline, args.out.join(format!("{name}.model.json"))),
        )?;
        stage(
            "write report",
            report::write_report(&run.report, &args.out.join(name)),
        )?;
        print_summary(&run.report);
        eprintln!("{name}: finished in {:.2}s", start.elapsed().as_secs_f64());
        if outcome.is_ok() {
            outcome = convergence_outcome(&run.pipeline, args.fail_on_nonconvergence);
        }
        reports.push(run.report);
    }

    let table_path = args.out.join("benchmark.md");
    fs::write(&table_path, report::benchmark_markdown(&reports)).map_err(|e| CliError::Data {
        stage: "write report",
        source: Error::io(&table_path, e),
    })?;
    println!("benchmark table: {}", table_path.display());
    outcome
}

#[derive(Debug, Args)]
pub struct SplitCmdArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Directory for train_ids.txt and test_ids.txt.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn split(args: &SplitCmdArgs) -> CliResult {
    let corpus = stage("load", args.data.load())?;
    let (train, test) = stage(
        "split",
        corpus::stratified_split(&corpus, &args.split.spec()),
    )?;
    fs::create_dir_all(&args.out).map_err(|e| CliError::Data {
        stage: "write split",
        source: Error::io(&args.out, e),
    })?;
    for (file, side) in [("train_ids.txt", &train), ("test_ids.txt", &test)] {
        let path = args.out.join(file);
        let mut body = String::new();
        for id in side.ids() {
            body.push_str(id);
            body.push('\n');
        }
        fs::write(&path, body).map_err(|e| CliError::Data {
            stage: "write split",
            source: Error::io(&path, e),
        })?;
    }
    println!(
        "split: train={} test={} -> {}",
        train.len(),
        test.len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}
