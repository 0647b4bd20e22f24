//! Held-out evaluation: confusion matrix, accuracy, and per-class F1.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledCorpus;
use crate::error::{Error, Result};
use crate::pipeline::Pipeline;

/// Square count matrix; rows are gold classes, columns predicted classes.
pub type ConfusionMatrix = Vec<Vec<u64>>;

pub fn confusion_matrix<S: AsRef<str>, T: AsRef<str>>(
    gold: &[S],
    predicted: &[T],
    classes: &[String],
) -> Result<ConfusionMatrix> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch(format!(
            "{} gold labels vs {} predictions",
            gold.len(),
            predicted.len()
        )));
    }
    let index = |label: &str| -> Result<usize> {
        classes
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    };
    let k = classes.len();
    let mut matrix = vec![vec![0u64; k]; k];
    for (g, p) in gold.iter().zip(predicted) {
        matrix[index(g.as_ref())?][index(p.as_ref())?] += 1;
    }
    Ok(matrix)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: String,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    /// Number of gold documents of this class.
    pub support: u64,
    /// Set when precision or recall had a zero denominator and was taken as 0.
    pub degenerate: bool,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

/// Precision, recall and F1 per class. Zero denominators count as 0 and mark
/// the class degenerate.
pub fn per_class_metrics(confusion: &[Vec<u64>], classes: &[String]) -> Vec<ClassMetrics> {
    let k = confusion.len();
    (0..k)
        .map(|c| {
            let tp = confusion[c][c];
            let row: u64 = confusion[c].iter().sum();
            let col: u64 = confusion.iter().map(|r| r[c]).sum();
            let precision = ratio(tp, col);
            let recall = ratio(tp, row);
            let (p, r) = (precision.unwrap_or(0.0), recall.unwrap_or(0.0));
            let f1 = if p + r > 0.0 {
                2.0 * p * r / (p + r)
            } else {
                0.0
            };
            ClassMetrics {
                class: classes.get(c).cloned().unwrap_or_else(|| c.to_string()),
                precision: p,
                recall: r,
                f1,
                support: row,
                degenerate: precision.is_none() || recall.is_none(),
            }
        })
        .collect()
}

/// Unweighted mean of per-class F1 scores.
pub fn macro_f1(confusion: &[Vec<u64>]) -> f64 {
    if confusion.is_empty() {
        return 0.0;
    }
    let metrics = per_class_metrics(confusion, &[]);
    metrics.iter().map(|m| m.f1).sum::<f64>() / metrics.len() as f64
}

/// `trace / total`, or 0 for an empty matrix.
pub fn accuracy(confusion: &[Vec<u64>]) -> f64 {
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..confusion.len()).map(|i| confusion[i][i]).sum();
    if total == 0 {
        0.0
    } else {
        trace as f64 / total as f64
    }
}

/// `"{name}-{k}"`, e.g. `20NewsGroup-20`.
pub fn dataset_name_with_class_count(name: &str, n_classes: usize) -> String {
    format!("{name}-{n_classes}")
}

/// Provenance attached to a report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub dataset_name: String,
    pub split_seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub config_digest: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dataset_name_with_class_count: String,
    pub model: String,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub n_test: u64,
    pub classes: Vec<String>,
    pub per_class: Vec<ClassMetrics>,
    pub confusion: ConfusionMatrix,
    pub split_seed: Option<u64>,
    pub train_fraction: Option<f64>,
    pub config_digest: String,
    pub solver_converged: Vec<bool>,
    pub all_converged: bool,
}

impl EvalReport {
    pub fn from_predictions<S: AsRef<str>, T: AsRef<str>>(
        gold: &[S],
        predicted: &[T],
        classes: &[String],
        solver_converged: Vec<bool>,
        provenance: &Provenance,
    ) -> Result<Self> {
        if gold.is_empty() {
            return Err(Error::EmptyTestCorpus);
        }
        let confusion = confusion_matrix(gold, predicted, classes)?;
        Ok(Self {
            dataset_name_with_class_count: dataset_name_with_class_count(
                &provenance.dataset_name,
                classes.len(),
            ),
            model: "SVM+TFIDF".to_owned(),
            accuracy: accuracy(&confusion),
            macro_f1: macro_f1(&confusion),
            n_test: gold.len() as u64,
            classes: classes.to_vec(),
            per_class: per_class_metrics(&confusion, classes),
            confusion,
            split_seed: provenance.split_seed,
            train_fraction: provenance.train_fraction,
            config_digest: provenance.config_digest.clone(),
            all_converged: solver_converged.iter().all(|&c| c),
            solver_converged,
        })
    }

    pub fn correct(&self) -> u64 {
        (0..self.confusion.len())
            .map(|i| self.confusion[i][i])
            .sum()
    }
}

/// Predicts every test document and tallies the results.
///
/// Test labels outside the model's classes are an error. Predictions run in
/// parallel but are collected in document order.
pub fn evaluate(
    pipeline: &Pipeline,
    test: &LabeledCorpus,
    provenance: &Provenance,
) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyTestCorpus);
    }
    let gold = test.labels()?;
    if let Some(unseen) = gold
        .iter()
        .find(|g| pipeline.classifier().class_index(g).is_none())
    {
        return Err(Error::UnknownLabel((*unseen).to_owned()));
    }
    let predicted: Vec<&str> = test
        .documents()
        .par_iter()
        .map(|doc| pipeline.predict(&doc.text))
        .collect::<Result<_>>()?;
    let converged = pipeline
        .classifier()
        .models()
        .iter()
        .map(|m| m.converged)
        .collect();
    EvalReport::from_predictions(
        &gold,
        &predicted,
        pipeline.classifier().classes(),
        converged,
        provenance,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn classes(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn confusion_examples() {
        let ab = classes(&["a", "b"]);
        assert_eq!(
            confusion_matrix(&["a", "b"], &["a", "b"], &ab).unwrap(),
            vec![vec![1, 0], vec![0, 1]]
        );
        assert_eq!(
            confusion_matrix(&["a", "a"], &["b", "b"], &ab).unwrap(),
            vec![vec![0, 2], vec![0, 0]]
        );
        assert!(matches!(
            confusion_matrix(&["a"], &["a", "b"], &ab),
            Err(Error::LengthMismatch(_))
        ));
        assert!(matches!(
            confusion_matrix(&["a"], &["z"], &ab),
            Err(Error::UnknownLabel(_))
        ));
    }

    #[test]
    fn four_document_report() {
        let provenance = Provenance {
            dataset_name: "toy".into(),
            split_seed: Some(1),
            train_fraction: Some(0.5),
            config_digest: "d".into(),
        };
        let report = EvalReport::from_predictions(
            &["a", "a", "b", "b"],
            &["a", "b", "b", "b"],
            &classes(&["a", "b"]),
            vec![true, false],
            &provenance,
        )
        .unwrap();
        assert_eq!(report.accuracy, 0.75);
        assert_eq!(report.confusion, vec![vec![1, 1], vec![0, 2]]);
        assert_eq!(report.dataset_name_with_class_count, "toy-2");
        assert!(!report.all_converged);
        assert_eq!(report.correct(), 3);
    }

    #[test]
    fn macro_f1_examples() {
        assert_eq!(macro_f1(&[vec![3, 0], vec![0, 5]]), 1.0);
        assert_eq!(macro_f1(&[vec![1, 1], vec![1, 1]]), 0.5);
        // Third class never gold and never predicted: F1 = 0 and degenerate.
        let m = vec![vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 0]];
        assert!((macro_f1(&m) - 2.0 / 3.0).abs() < 1e-15);
        let per = per_class_metrics(&m, &classes(&["a", "b", "c"]));
        assert!(per[2].degenerate && per[2].f1 == 0.0);
        assert!(!per[0].degenerate);
    }

    #[test]
    fn macro_f1_one_iff_diagonal() {
        assert!(macro_f1(&[vec![2, 0], vec![0, 0]]) < 1.0);
        assert!(macro_f1(&[vec![2, 1], vec![0, 4]]) < 1.0);
    }

    #[test]
    fn random_row_sums_match_gold_counts() {
        let names = classes(&["a", "b", "c", "d"]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let gold: Vec<&str> = (0..30)
                .map(|_| names[rng.gen_range(0..4)].as_str())
                .collect();
            let pred: Vec<&str> = (0..30)
                .map(|_| names[rng.gen_range(0..4)].as_str())
                .collect();
            let m = confusion_matrix(&gold, &pred, &names).unwrap();
            for (i, class) in names.iter().enumerate() {
                let tally = gold.iter().filter(|g| *g == class).count() as u64;
                assert_eq!(m[i].iter().sum::<u64>(), tally);
                let col_tally = pred.iter().filter(|p| *p == class).count() as u64;
                assert_eq!(m.iter().map(|r| r[i]).sum::<u64>(), col_tally);
            }
            let correct = gold.iter().zip(&pred).filter(|(g, p)| g == p).count();
            assert_eq!(accuracy(&m), correct as f64 / 30.0);
            let f1 = macro_f1(&m);
            assert!((0.0..=1.0).contains(&f1));
        }
    }

    #[test]
    fn empty_inputs() {
        let p = Provenance {
            dataset_name: "x".into(),
            split_seed: None,
            train_fraction: None,
            config_digest: String::new(),
        };
        let none: [&str; 0] = [];
        assert!(matches!(
            EvalReport::from_predictions(&none, &none, &classes(&["a", "b"]), vec![], &p),
            Err(Error::EmptyTestCorpus)
        ));
        assert_eq!(accuracy(&[]), 0.0);
        assert_eq!(macro_f1(&[]), 0.0);
    }
}
