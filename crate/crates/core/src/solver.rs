//! L2-regularized linear SVM trained by dual coordinate descent.
//!
//! For examples `(x_i, y_i)` with `y_i in {+1, -1}` the primal problem is
//!
//! ```text
//! min_w  P(w) = 1/2 |w|^2 + C * sum_i loss(y_i * w . xh_i)
//! ```
//!
//! where `xh_i` is `x_i` with a constant `bias_scale` coordinate appended
//! (when the bias is enabled) and `loss` is the hinge `max(0, 1 - m)` or its
//! square. The solver works on the dual
//!
//! ```text
//! min_a  1/2 a' Qb a - sum_i a_i,   Qb_ij = y_i y_j xh_i . xh_j + D_ii [i = j]
//! ```
//!
//! with `D_ii = 0, 0 <= a_i <= C` for the hinge and `D_ii = 1/(2C), a_i >= 0`
//! for the squared hinge, updating one coordinate at a time in closed form
//! while maintaining `w = sum_i a_i y_i xh_i`.

use std::time::Duration;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digest::class_seed;
use crate::error::{Error, Result};
use crate::sparse::SparseVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    Hinge,
    SquaredHinge,
}

impl std::str::FromStr for Loss {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hinge" => Ok(Loss::Hinge),
            "squared_hinge" | "squared-hinge" => Ok(Loss::SquaredHinge),
            other => Err(Error::InvalidConfig(format!(
                "unknown loss `{other}` (expected hinge or squared_hinge)"
            ))),
        }
    }
}

impl std::fmt::Display for Loss {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Loss::Hinge => "hinge",
            Loss::SquaredHinge => "squared_hinge",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    /// Penalty on the loss term.
    pub c: f64,
    pub loss: Loss,
    /// Stop once an epoch's largest projected-gradient magnitude falls below this.
    pub tolerance: f64,
    pub max_epochs: usize,
    /// Seeds the per-epoch visiting order.
    pub seed: u64,
    /// Value of the constant feature appended for the bias; 0 disables it.
    pub bias_scale: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            loss: Loss::SquaredHinge,
            tolerance: 1e-4,
            max_epochs: 1000,
            seed: 0,
            bias_scale: 1.0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "C must be positive, got {}",
                self.c
            )));
        }
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_epochs == 0 {
            return Err(Error::InvalidConfig("max_epochs must be positive".into()));
        }
        if !(self.bias_scale >= 0.0 && self.bias_scale.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "bias_scale must be nonnegative, got {}",
                self.bias_scale
            )));
        }
        Ok(())
    }

    fn has_bias(&self) -> bool {
        self.bias_scale > 0.0
    }

    /// `(D_ii, upper bound on a_i)`
    fn dual_terms(&self) -> (f64, f64) {
        match self.loss {
            Loss::Hinge => (0.0, self.c),
            Loss::SquaredHinge => (0.5 / self.c, f64::INFINITY),
        }
    }
}

/// One trained binary problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryModel {
    /// Feature weights followed, when the bias is enabled, by the weight of
    /// the appended constant coordinate.
    pub weights: Vec<f64>,
    pub bias_scale: f64,
    /// Final dual variables, one per training example. Empty for models
    /// restored from disk.
    pub dual_variables: Vec<f64>,
    pub converged: bool,
    pub epochs_run: usize,
    /// Largest projected-gradient magnitude seen in the last epoch.
    pub final_violation: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

impl BinaryModel {
    pub fn n_features(&self) -> usize {
        if self.bias_scale > 0.0 {
            self.weights.len() - 1
        } else {
            self.weights.len()
        }
    }

    pub fn feature_weights(&self) -> &[f64] {
        &self.weights[..self.n_features()]
    }

    /// Bias term added to every score: augmented weight times `bias_scale`.
    pub fn bias(&self) -> f64 {
        if self.bias_scale > 0.0 {
            self.weights[self.weights.len() - 1] * self.bias_scale
        } else {
            0.0
        }
    }

    /// `w . x + bias`, summed over `x`'s nonzeros in index order.
    pub fn decision(&self, x: &SparseVector) -> f64 {
        x.dot_dense(self.feature_weights()) + self.bias()
    }

    /// `(P - D) / max(1, P)`
    pub fn relative_gap(&self) -> f64 {
        (self.primal_objective - self.dual_objective) / self.primal_objective.max(1.0)
    }
}

/// Labeled binary training set over a fixed feature dimension.
struct Problem<'a> {
    xs: &'a [SparseVector],
    ys: &'a [f64],
    n_features: usize,
}

impl<'a> Problem<'a> {
    fn new(xs: &'a [SparseVector], ys: &'a [f64], n_features: usize) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch(format!(
                "{} examples vs {} labels",
                xs.len(),
                ys.len()
            )));
        }
        if let Some(y) = ys.iter().find(|&&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidConfig(format!(
                "binary labels must be +1 or -1, got {y}"
            )));
        }
        for x in xs {
            x.check_dimension(n_features)?;
        }
        Ok(Self { xs, ys, n_features })
    }

    /// `w . xh_i`
    #[inline]
    fn margin_raw(&self, i: usize, w: &[f64], bias_scale: f64) -> f64 {
        let mut m = self.xs[i].dot_dense(&w[..self.n_features]);
        if bias_scale > 0.0 {
            m += bias_scale * w[self.n_features];
        }
        m
    }
}

/// Primal and dual objective values for a feasible dual point.
///
/// The primal is evaluated at the supplied `w`; the dual is evaluated from
/// `alpha` alone, reconstructing `sum_i a_i y_i xh_i` internally, so the two
/// values are independent certificates.
pub fn objectives(
    xs: &[SparseVector],
    ys: &[f64],
    n_features: usize,
    alpha: &[f64],
    w: &[f64],
    config: &TrainConfig,
) -> Result<(f64, f64)> {
    config.validate()?;
    let problem = Problem::new(xs, ys, n_features)?;
    let dim = n_features + usize::from(config.has_bias());
    if alpha.len() != xs.len() || w.len() != dim {
        return Err(Error::LengthMismatch(format!(
            "alpha has {} entries for {} examples; w has {} entries for dimension {}",
            alpha.len(),
            xs.len(),
            w.len(),
            dim
        )));
    }
    let (diag, upper) = config.dual_terms();
    if let Some((i, a)) = alpha
        .iter()
        .enumerate()
        .find(|(_, &a)| !(a >= 0.0 && a <= upper && a.is_finite()))
    {
        return Err(Error::InfeasibleDual(format!(
            "alpha[{i}] = {a} outside [0, {upper}]"
        )));
    }
    Ok((
        primal_value(&problem, w, config),
        dual_value(&problem, alpha, diag, config.bias_scale),
    ))
}

fn primal_value(problem: &Problem<'_>, w: &[f64], config: &TrainConfig) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = (0..problem.xs.len())
        .map(|i| {
            let slack =
                (1.0 - problem.ys[i] * problem.margin_raw(i, w, config.bias_scale)).max(0.0);
            match config.loss {
                Loss::Hinge => slack,
                Loss::SquaredHinge => slack * slack,
            }
        })
        .sum();
    reg + config.c * loss
}

fn dual_value(problem: &Problem<'_>, alpha: &[f64], diag: f64, bias_scale: f64) -> f64 {
    let dim = problem.n_features + usize::from(bias_scale > 0.0);
    let mut u = vec![0.0; dim];
    let mut sum_alpha = 0.0;
    let mut sum_sq = 0.0;
    for (i, &a) in alpha.iter().enumerate() {
        sum_alpha += a;
        sum_sq += a * a;
        if a != 0.0 {
            let scale = a * problem.ys[i];
            problem.xs[i].axpy_into(scale, &mut u);
            if bias_scale > 0.0 {
                u[problem.n_features] += scale * bias_scale;
            }
        }
    }
    let u_sq: f64 = u.iter().map(|v| v * v).sum();
    sum_alpha - 0.5 * u_sq - 0.5 * diag * sum_sq
}

/// Trains one binary SVM. `ys` must hold `+1.0` / `-1.0` and contain both.
pub fn train_binary(
    xs: &[SparseVector],
    ys: &[f64],
    n_features: usize,
    config: &TrainConfig,
) -> Result<BinaryModel> {
    train_binary_observed(xs, ys, n_features, config, |_, _| {})
}

/// [`train_binary`] with a callback invoked after every coordinate update
/// with the current `(alpha, w)`. Used to audit solver invariants.
pub fn train_binary_observed(
    xs: &[SparseVector],
    ys: &[f64],
    n_features: usize,
    config: &TrainConfig,
    mut observe: impl FnMut(&[f64], &[f64]),
) -> Result<BinaryModel> {
    config.validate()?;
    let problem = Problem::new(xs, ys, n_features)?;
    if !ys.contains(&1.0) || !ys.contains(&-1.0) {
        return Err(Error::SingleClass);
    }

    let n = xs.len();
    let bias_scale = config.bias_scale;
    let dim = n_features + usize::from(config.has_bias());
    let (diag, upper) = config.dual_terms();

    let mut w = vec![0.0; dim];
    let mut alpha = vec![0.0; n];
    let q_diag: Vec<f64> = xs
        .iter()
        .map(|x| x.squared_norm() + bias_scale * bias_scale + diag)
        .collect();

    // A zero row under the hinge has a constant negative gradient, so its
    // optimum is the upper bound; it never touches w.
    let mut order: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        if q_diag[i] > 0.0 {
            order.push(i);
        } else {
            alpha[i] = upper;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut converged = false;
    let mut epochs_run = 0;
    let mut final_violation = f64::INFINITY;

    for _ in 0..config.max_epochs {
        order.shuffle(&mut rng);
        let mut max_violation: f64 = 0.0;
        for &i in &order {
            let y = ys[i];
            let g = y * problem.margin_raw(i, &w, bias_scale) - 1.0 + diag * alpha[i];
            let pg = if alpha[i] == 0.0 {
                g.min(0.0)
            } else if alpha[i] == upper {
                g.max(0.0)
            } else {
                g
            };
            max_violation = max_violation.max(pg.abs());
            if pg != 0.0 {
                let old = alpha[i];
                alpha[i] = (old - g / q_diag[i]).clamp(0.0, upper);
                let step = (alpha[i] - old) * y;
                if step != 0.0 {
                    xs[i].axpy_into(step, &mut w[..n_features]);
                    if bias_scale > 0.0 {
                        w[n_features] += step * bias_scale;
                    }
                }
                observe(&alpha, &w);
            }
        }
        epochs_run += 1;
        final_violation = max_violation;
        if max_violation < config.tolerance {
            converged = true;
            break;
        }
    }

    let primal_objective = primal_value(&problem, &w, config);
    let dual_objective = dual_value(&problem, &alpha, diag, bias_scale);
    Ok(BinaryModel {
        weights: w,
        bias_scale,
        dual_variables: alpha,
        converged,
        epochs_run,
        final_violation,
        primal_objective,
        dual_objective,
    })
}

/// Per-class record of how training went.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassTrainingSummary {
    pub class: String,
    pub seed: u64,
    pub converged: bool,
    pub epochs_run: usize,
    pub final_violation: f64,
    pub primal_objective: f64,
    pub dual_objective: f64,
}

/// One-vs-rest ensemble of binary SVMs, one per class in sorted order.
#[derive(Debug, Clone)]
pub struct MulticlassLinearModel {
    classes: Vec<String>,
    models: Vec<BinaryModel>,
    config: TrainConfig,
    summaries: Vec<ClassTrainingSummary>,
    /// Wall-clock training time; not persisted.
    pub wall_time: Option<Duration>,
}

impl PartialEq for MulticlassLinearModel {
    fn eq(&self, other: &Self) -> bool {
        self.classes == other.classes
            && self.config == other.config
            && self.summaries == other.summaries
            && self.models.len() == other.models.len()
            && self
                .models
                .iter()
                .zip(&other.models)
                .all(|(a, b)| a.weights == b.weights && a.bias_scale == b.bias_scale)
    }
}

/// Trains one binary model per class (`+1` for the class, `-1` for the rest).
///
/// Class `c` is trained with seed `config.seed ^ stable_digest64(c)`. Classes
/// train in parallel on the current rayon pool; each problem is sequential,
/// so the result does not depend on the pool size.
pub fn train_one_vs_rest<S: AsRef<str> + Sync>(
    xs: &[SparseVector],
    labels: &[S],
    n_features: usize,
    config: &TrainConfig,
) -> Result<MulticlassLinearModel> {
    config.validate()?;
    if xs.len() != labels.len() {
        return Err(Error::LengthMismatch(format!(
            "{} examples vs {} labels",
            xs.len(),
            labels.len()
        )));
    }
    let mut classes: Vec<String> = labels.iter().map(|l| l.as_ref().to_owned()).collect();
    classes.sort();
    classes.dedup();
    if classes.len() < 2 {
        return Err(Error::TooFewClasses(classes.len()));
    }

    let start = std::time::Instant::now();
    let trained = classes
        .par_iter()
        .map(|class| {
            let ys: Vec<f64> = labels
                .iter()
                .map(|l| if l.as_ref() == class { 1.0 } else { -1.0 })
                .collect();
            let class_config = TrainConfig {
                seed: class_seed(config.seed, class),
                ..config.clone()
            };
            let model = train_binary(xs, &ys, n_features, &class_config)?;
            let summary = ClassTrainingSummary {
                class: class.clone(),
                seed: class_config.seed,
                converged: model.converged,
                epochs_run: model.epochs_run,
                final_violation: model.final_violation,
                primal_objective: model.primal_objective,
                dual_objective: model.dual_objective,
            };
            Ok((model, summary))
        })
        .collect::<Result<Vec<_>>>()?;
    let (models, summaries) = trained.into_iter().unzip();

    Ok(MulticlassLinearModel {
        classes,
        models,
        config: config.clone(),
        summaries,
        wall_time: Some(start.elapsed()),
    })
}

/// Index of the largest score; ties go to the lowest index.
pub fn argmax_first(scores: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best.map(|(i, _)| i)
}

impl MulticlassLinearModel {
    /// Assembles a model from per-class parts, e.g. after deserialization.
    pub fn from_parts(
        classes: Vec<String>,
        models: Vec<BinaryModel>,
        config: TrainConfig,
        summaries: Vec<ClassTrainingSummary>,
    ) -> Result<Self> {
        if classes.len() < 2 {
            return Err(Error::TooFewClasses(classes.len()));
        }
        if classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConfig(
                "classes must be sorted and unique".into(),
            ));
        }
        if models.len() != classes.len() || summaries.len() != classes.len() {
            return Err(Error::LengthMismatch(format!(
                "{} classes, {} models, {} summaries",
                classes.len(),
                models.len(),
                summaries.len()
            )));
        }
        let dim = models[0].weights.len();
        if models
            .iter()
            .any(|m| m.weights.len() != dim || m.bias_scale != config.bias_scale)
        {
            return Err(Error::InvalidConfig(
                "per-class models disagree on dimension or bias".into(),
            ));
        }
        Ok(Self {
            classes,
            models,
            config,
            summaries,
            wall_time: None,
        })
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn models(&self) -> &[BinaryModel] {
        &self.models
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn summaries(&self) -> &[ClassTrainingSummary] {
        &self.summaries
    }

    pub fn n_features(&self) -> usize {
        self.models[0].n_features()
    }

    pub fn all_converged(&self) -> bool {
        self.models.iter().all(|m| m.converged)
    }

    pub fn class_index(&self, class: &str) -> Option<usize> {
        self.classes
            .binary_search_by(|c| c.as_str().cmp(class))
            .ok()
    }

    /// Per-class scores `w_c . x + bias_c`, in class order.
    pub fn decision_scores(&self, x: &SparseVector) -> Result<Vec<f64>> {
        x.check_dimension(self.n_features())?;
        Ok(self.models.iter().map(|m| m.decision(x)).collect())
    }

    /// Index into [`classes`](Self::classes) of the highest score.
    pub fn predict_index(&self, x: &SparseVector) -> Result<usize> {
        let scores = self.decision_scores(x)?;
        Ok(argmax_first(&scores).expect("at least two classes"))
    }

    pub fn predict(&self, x: &SparseVector) -> Result<&str> {
        Ok(&self.classes[self.predict_index(x)?])
    }
}
