//! Exact explanations of linear decisions.
//!
//! A class score is `bias + sum_j w[j] * x[j]`, so listing the products over
//! the document's nonzero features explains the score completely.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::Vocabulary;
use crate::pipeline::Pipeline;
use crate::solver::{argmax_first, MulticlassLinearModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassExplanation {
    pub class: String,
    /// `(term, weight)` by descending weight, ties in term order.
    pub entries: Vec<(String, f64)>,
}

/// The `k` highest-weighted vocabulary terms of `class`.
pub fn top_class_features(
    model: &MulticlassLinearModel,
    vocab: &Vocabulary,
    class: &str,
    k: usize,
) -> Result<ClassExplanation> {
    let c = model
        .class_index(class)
        .ok_or_else(|| Error::UnknownLabel(class.to_owned()))?;
    let weights = model.models()[c].feature_weights();
    if weights.len() != vocab.len() {
        return Err(Error::LengthMismatch(format!(
            "{} weights for {} terms",
            weights.len(),
            vocab.len()
        )));
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    // Indices follow term order, so the index tie-break is the term tie-break.
    let by_weight = |a: &usize, b: &usize| weights[*b].total_cmp(&weights[*a]).then(a.cmp(b));
    let k = k.min(order.len());
    if k < order.len() && k > 0 {
        order.select_nth_unstable_by(k - 1, by_weight);
        order.truncate(k);
    }
    order.sort_unstable_by(by_weight);
    order.truncate(k);
    Ok(ClassExplanation {
        class: class.to_owned(),
        entries: order
            .into_iter()
            .map(|j| (vocab.terms()[j].clone(), weights[j]))
            .collect(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub term: String,
    pub tfidf: f64,
    pub weight: f64,
    pub product: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionExplanation {
    /// Class whose score is decomposed.
    pub class: String,
    /// Whether `class` is the predicted class.
    pub predicted: bool,
    pub score: f64,
    pub bias_contribution: f64,
    /// Top-`k` contributions by descending `|product|`.
    pub contributions: Vec<Contribution>,
    /// Sum of the products not listed in `contributions`.
    pub other_contributions: f64,
    pub n_active_features: usize,
    /// `|score - bias - sum of all products|`
    pub residual_check: f64,
}

fn explain_class(
    pipeline: &Pipeline,
    x: &crate::SparseVector,
    scores: &[f64],
    class_index: usize,
    predicted_index: usize,
    k: usize,
) -> PredictionExplanation {
    let model = &pipeline.classifier().models()[class_index];
    let weights = model.feature_weights();
    let vocab = pipeline.tfidf().vocabulary();

    let mut all: Vec<(usize, f64, f64, f64)> = x
        .iter()
        .map(|(j, v)| (j, v, weights[j], weights[j] * v))
        .collect();
    // Same order and operations as `BinaryModel::decision`.
    let total: f64 = all.iter().fold(0.0, |acc, c| acc + c.3);
    let bias = model.bias();
    let score = scores[class_index];
    let residual_check = (score - bias - total).abs();

    all.sort_by(|a, b| b.3.abs().total_cmp(&a.3.abs()).then(a.0.cmp(&b.0)));
    let shown = k.min(all.len());
    let other_contributions = all[shown..].iter().fold(0.0, |acc, c| acc + c.3);
    let contributions = all[..shown]
        .iter()
        .map(|&(j, tfidf, weight, product)| Contribution {
            term: vocab.terms()[j].clone(),
            tfidf,
            weight,
            product,
        })
        .collect();

    PredictionExplanation {
        class: pipeline.classifier().classes()[class_index].clone(),
        predicted: class_index == predicted_index,
        score,
        bias_contribution: bias,
        contributions,
        other_contributions,
        n_active_features: x.nnz(),
        residual_check,
    }
}

/// Explains the predicted class for `text`, listing the `k` largest
/// contributions.
pub fn explain_prediction(
    pipeline: &Pipeline,
    text: &str,
    k: usize,
) -> Result<PredictionExplanation> {
    let x = pipeline.vectorize(text);
    let scores = pipeline.classifier().decision_scores(&x)?;
    let predicted = argmax_first(&scores).expect("at least two classes");
    Ok(explain_class(
        pipeline, &x, &scores, predicted, predicted, k,
    ))
}

/// One explanation per class, in class order.
pub fn explain_all_classes(
    pipeline: &Pipeline,
    text: &str,
    k: usize,
) -> Result<Vec<PredictionExplanation>> {
    let x = pipeline.vectorize(text);
    let scores = pipeline.classifier().decision_scores(&x)?;
    let predicted = argmax_first(&scores).expect("at least two classes");
    Ok((0..scores.len())
        .map(|c| explain_class(pipeline, &x, &scores, c, predicted, k))
        .collect())
}
