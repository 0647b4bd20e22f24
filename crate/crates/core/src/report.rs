//! Report rendering: JSON, markdown, CSV, and the benchmark comparison table.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::literature::{self, Scale};

pub fn to_json(report: &EvalReport) -> Result<String> {
    let mut s =
        serde_json::to_string_pretty(report).map_err(|e| Error::Serialization(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_owned(), |v| v.to_string())
}

pub fn to_markdown(report: &EvalReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "# {} evaluation: {}",
        report.model, report.dataset_name_with_class_count
    );
    let _ = writeln!(s);
    let _ = writeln!(s, "| metric | value |");
    let _ = writeln!(s, "|---|---|");
    let _ = writeln!(s, "| accuracy | {:.4} |", report.accuracy);
    let _ = writeln!(s, "| macro F1 | {:.4} |", report.macro_f1);
    let _ = writeln!(s, "| test documents | {} |", report.n_test);
    let _ = writeln!(s, "| split seed | {} |", opt(report.split_seed));
    let _ = writeln!(s, "| train fraction | {} |", opt(report.train_fraction));
    let _ = writeln!(s, "| config digest | `{}` |", report.config_digest);
    let _ = writeln!(s, "| all classes converged | {} |", report.all_converged);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "| class | precision | recall | F1 | support | converged |"
    );
    let _ = writeln!(s, "|---|---|---|---|---|---|");
    for (m, converged) in report.per_class.iter().zip(&report.solver_converged) {
        let flag = if m.degenerate { " (degenerate)" } else { "" };
        let _ = writeln!(
            s,
            "| {}{} | {:.4} | {:.4} | {:.4} | {} | {} |",
            m.class, flag, m.precision, m.recall, m.f1, m.support, converged
        );
    }
    s
}

pub const CSV_HEADER: &str =
    "dataset,model,accuracy,macro_f1,n_test,correct,split_seed,train_fraction,config_digest,all_converged";

/// Header plus a single summary row.
pub fn to_csv(report: &EvalReport) -> String {
    format!(
        "{CSV_HEADER}\n{},{},{},{},{},{},{},{},{},{}\n",
        report.dataset_name_with_class_count,
        report.model,
        report.accuracy,
        report.macro_f1,
        report.n_test,
        report.correct(),
        report.split_seed.map_or(String::new(), |v| v.to_string()),
        report
            .train_fraction
            .map_or(String::new(), |v| v.to_string()),
        report.config_digest,
        report.all_converged
    )
}

/// Confusion matrix as CSV: header `gold\predicted,<classes...>`, one row per gold class.
pub fn confusion_to_csv(report: &EvalReport) -> String {
    let mut s = String::from("gold\\predicted");
    for c in &report.classes {
        s.push(',');
        s.push_str(&csv_field(c));
    }
    s.push('\n');
    for (c, row) in report.classes.iter().zip(&report.confusion) {
        s.push_str(&csv_field(c));
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_owned()
    }
}

/// Paths written by [`write_report`].
#[derive(Debug, Clone)]
pub struct ReportPaths {
    pub json: PathBuf,
    pub markdown: PathBuf,
    pub csv: PathBuf,
    pub confusion_csv: PathBuf,
}

impl ReportPaths {
    pub fn from_prefix(prefix: &Path) -> Self {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self {
            json: with(".json"),
            markdown: with(".md"),
            csv: with(".csv"),
            confusion_csv: with(".confusion.csv"),
        }
    }
}

pub fn write_report(report: &EvalReport, prefix: &Path) -> Result<ReportPaths> {
    let paths = ReportPaths::from_prefix(prefix);
    if let Some(dir) = prefix.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    for (path, body) in [
        (&paths.json, to_json(report)?),
        (&paths.markdown, to_markdown(report)),
        (&paths.csv, to_csv(report)),
        (&paths.confusion_csv, confusion_to_csv(report)),
    ] {
        fs::write(path, body).map_err(|e| Error::io(path, e))?;
    }
    Ok(paths)
}

/// Markdown table juxtaposing fresh runs with the published reference rows
/// for the same datasets.
pub fn benchmark_markdown(reports: &[EvalReport]) -> String {
    let mut s = String::from("# SVM+TFIDF benchmark\n\n");
    for report in reports {
        let _ = writeln!(s, "## {}\n", report.dataset_name_with_class_count);
        let _ = writeln!(
            s,
            "Split: train fraction {}, seed {}; test documents: {}; config digest `{}`; converged: {}.\n",
            opt(report.train_fraction),
            opt(report.split_seed),
            report.n_test,
            report.config_digest,
            report.all_converged
        );
        let _ = writeln!(s, "| model | accuracy (%) | reference | status |");
        let _ = writeln!(s, "|---|---|---|---|");
        let _ = writeln!(
            s,
            "| {} (this run) | {:.2} | - | reproduced |",
            report.model,
            report.accuracy * 100.0
        );
        let mut any = false;
        for row in literature::rows_for(&report.dataset_name_with_class_count) {
            any = true;
            let shown = match row.scale {
                Scale::Percent => row.reported.to_owned(),
                Scale::Fraction => format!("{:.2}", row.accuracy() * 100.0),
            };
            let _ = writeln!(
                s,
                "| {} | {} | {} | reported, not reproduced |",
                row.model,
                shown,
                row.reference
                    .map_or_else(|| "-".to_owned(), |r| format!("[{r}]"))
            );
        }
        if !any {
            let _ = writeln!(s, "\nNo published reference rows for this dataset.");
        }
        s.push('\n');
    }
    s
}
