//! Multinomial logistic regression trained by full-batch gradient descent, and macro-F1.

use std::io::{BufRead, Write};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    /// Coefficient of the `(λ/2)‖W‖²` penalty. The bias is not penalized.
    pub l2_lambda: f64,
    pub learning_rate: f64,
    pub max_epochs: usize,
    /// Training stops once the relative loss improvement of an epoch falls below this.
    pub tolerance: f64,
    /// Unused by the deterministic solver; kept so configurations stay self-describing.
    pub seed: u64,
    /// Standardize features to zero mean and unit variance before fitting.
    pub standardize: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            l2_lambda: 1e-4,
            learning_rate: 0.1,
            max_epochs: 200,
            tolerance: 1e-6,
            seed: 0,
            standardize: true,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.l2_lambda >= 0.0 && self.l2_lambda.is_finite()) {
            return Err(Error::Config("l2_lambda must be non-negative".into()));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        if self.max_epochs == 0 {
            return Err(Error::Config("max_epochs must be positive".into()));
        }
        if self.tolerance.is_nan() || self.tolerance <= 0.0 {
            return Err(Error::Config("tolerance must be positive".into()));
        }
        Ok(())
    }
}

const MAX_HALVINGS: usize = 30;

/// Row-wise softmax, computed after subtracting each row's maximum.
pub fn softmax_rows(logits: &Array2<f64>) -> Array2<f64> {
    let mut probs = logits.clone();
    for mut row in probs.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row.mapv_inplace(|v| v / sum);
    }
    probs
}

/// Mean softmax cross-entropy plus `(λ/2)‖W‖²` over a fixed data set.
pub struct SoftmaxObjective<'a> {
    x: ArrayView2<'a, f64>,
    y: &'a [usize],
    n_classes: usize,
    l2_lambda: f64,
}

struct Evaluation {
    loss: f64,
    probs: Array2<f64>,
}

impl<'a> SoftmaxObjective<'a> {
    pub fn new(x: ArrayView2<'a, f64>, y: &'a [usize], n_classes: usize, l2_lambda: f64) -> Self {
        assert_eq!(x.nrows(), y.len(), "one label per row");
        assert!(y.iter().all(|&c| c < n_classes), "labels in range");
        SoftmaxObjective {
            x,
            y,
            n_classes,
            l2_lambda,
        }
    }

    fn evaluate(&self, weights: &Array2<f64>, bias: &Array1<f64>) -> Evaluation {
        let logits = self.x.dot(&weights.t()) + bias;
        let mut data_loss = 0.0;
        for (row, &label) in logits.rows().into_iter().zip(self.y) {
            let max = row.fold(f64::NEG_INFINITY, |m, &v| m.max(v));
            let log_sum = row.iter().map(|v| (v - max).exp()).sum::<f64>().ln() + max;
            data_loss += log_sum - row[label];
        }
        let n = self.y.len() as f64;
        let penalty = 0.5 * self.l2_lambda * weights.iter().map(|w| w * w).sum::<f64>();
        Evaluation {
            loss: data_loss / n + penalty,
            probs: softmax_rows(&logits),
        }
    }

    pub fn loss(&self, weights: &Array2<f64>, bias: &Array1<f64>) -> f64 {
        self.evaluate(weights, bias).loss
    }

    fn gradient_from(
        &self,
        probs: &Array2<f64>,
        weights: &Array2<f64>,
    ) -> (Array2<f64>, Array1<f64>) {
        let n = self.y.len() as f64;
        let mut residual = probs.clone();
        for (mut row, &label) in residual.rows_mut().into_iter().zip(self.y) {
            row[label] -= 1.0;
        }
        let grad_w = residual.t().dot(&self.x) / n + weights * self.l2_lambda;
        let grad_b = residual.sum_axis(Axis(0)) / n;
        (grad_w, grad_b)
    }

    /// Loss and its analytic gradient with respect to the weights (`classes × features`) and
    /// the bias.
    pub fn loss_and_gradient(
        &self,
        weights: &Array2<f64>,
        bias: &Array1<f64>,
    ) -> (f64, Array2<f64>, Array1<f64>) {
        let eval = self.evaluate(weights, bias);
        let (gw, gb) = self.gradient_from(&eval.probs, weights);
        (eval.loss, gw, gb)
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LogRegModel {
    /// `classes × features`, acting on standardized features.
    weights: Array2<f64>,
    bias: Array1<f64>,
    label_set: LabelSet,
    mean: Array1<f64>,
    std: Array1<f64>,
    loss_history: Vec<f64>,
}

fn check_finite(x: &ArrayView2<f64>) -> Result<()> {
    for ((row, col), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row, col });
        }
    }
    Ok(())
}

/// Fits a softmax regression on `x` with labels `y` (indices into `label_set`).
///
/// Each epoch takes one gradient step starting at the configured learning rate and halves the
/// step, up to 30 times, until the loss does not increase. Training ends after `max_epochs`,
/// when no halved step decreases the loss, or when the relative improvement drops below
/// `tolerance`.
pub fn train(
    x: ArrayView2<f64>,
    y: &[usize],
    label_set: &LabelSet,
    cfg: &TrainConfig,
) -> Result<LogRegModel> {
    cfg.validate()?;
    if x.nrows() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    let k = label_set.k();
    if let Some(&bad) = y.iter().find(|&&c| c >= k) {
        return Err(Error::UnknownCategory(bad));
    }
    if y.iter().all(|&c| Some(&c) == y.first()) {
        return Err(Error::SingleClass);
    }
    check_finite(&x)?;

    let n_features = x.ncols();
    let (mean, std) = if cfg.standardize {
        let mean = x.mean_axis(Axis(0)).expect("at least one row");
        let mut std = x.var_axis(Axis(0), 0.0).mapv(f64::sqrt);
        std.mapv_inplace(|s| if s > 0.0 { s } else { 1.0 });
        (mean, std)
    } else {
        (Array1::zeros(n_features), Array1::ones(n_features))
    };
    let z = (&x - &mean) / &std;
    let objective = SoftmaxObjective::new(z.view(), y, k, cfg.l2_lambda);

    let mut weights = Array2::zeros((k, n_features));
    let mut bias = Array1::zeros(k);
    let mut current = objective.evaluate(&weights, &bias);
    let mut loss_history = vec![current.loss];
    for _ in 0..cfg.max_epochs {
        let (grad_w, grad_b) = objective.gradient_from(&current.probs, &weights);
        let mut step = cfg.learning_rate;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let candidate_w = &weights - &(&grad_w * step);
            let candidate_b = &bias - &(&grad_b * step);
            let eval = objective.evaluate(&candidate_w, &candidate_b);
            if eval.loss <= current.loss {
                accepted = Some((candidate_w, candidate_b, eval));
                break;
            }
            step *= 0.5;
        }
        let Some((new_w, new_b, eval)) = accepted else {
            break;
        };
        let improvement = (current.loss - eval.loss) / current.loss.abs().max(f64::MIN_POSITIVE);
        weights = new_w;
        bias = new_b;
        current = eval;
        loss_history.push(current.loss);
        if improvement < cfg.tolerance {
            break;
        }
    }

    Ok(LogRegModel {
        weights,
        bias,
        label_set: label_set.clone(),
        mean,
        std,
        loss_history,
    })
}

impl LogRegModel {
    /// Builds a model directly from parameters acting on unstandardized features.
    pub fn from_parameters(
        weights: Array2<f64>,
        bias: Array1<f64>,
        label_set: LabelSet,
    ) -> Result<Self> {
        if weights.nrows() != label_set.k() || bias.len() != label_set.k() {
            return Err(Error::DimensionMismatch {
                expected: label_set.k(),
                actual: weights.nrows(),
            });
        }
        let n = weights.ncols();
        Ok(LogRegModel {
            weights,
            bias,
            label_set,
            mean: Array1::zeros(n),
            std: Array1::ones(n),
            loss_history: Vec::new(),
        })
    }

    pub fn n_features(&self) -> usize {
        self.weights.ncols()
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn weights(&self) -> &Array2<f64> {
        &self.weights
    }

    pub fn bias(&self) -> &Array1<f64> {
        &self.bias
    }

    /// Training loss after initialization and after every accepted step.
    pub fn loss_history(&self) -> &[f64] {
        &self.loss_history
    }

    pub fn logits(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                actual: x.ncols(),
            });
        }
        let z = (&x - &self.mean) / &self.std;
        Ok(z.dot(&self.weights.t()) + &self.bias)
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        Ok(softmax_rows(&self.logits(x)?))
    }

    /// Index of the largest logit per row; ties go to the lowest class index.
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<usize>> {
        Ok(argmax_rows(&self.logits(x)?))
    }

    /// Text format: a header with class count, feature count, label names and standardization
    /// statistics, then the bias and the weight rows. Numbers carry 17 significant digits.
    pub fn write_text(&self, mut writer: impl Write) -> std::io::Result<()> {
        fn line(
            writer: &mut impl Write,
            key: &str,
            values: impl Iterator<Item = f64>,
        ) -> std::io::Result<()> {
            write!(writer, "{key}")?;
            for v in values {
                write!(writer, " {v:.16e}")?;
            }
            writeln!(writer)
        }
        writeln!(writer, "logreg 1")?;
        writeln!(writer, "classes {}", self.label_set.k())?;
        writeln!(writer, "features {}", self.n_features())?;
        writeln!(writer, "labels\t{}", self.label_set.labels().join("\t"))?;
        line(&mut writer, "mean", self.mean.iter().copied())?;
        line(&mut writer, "std", self.std.iter().copied())?;
        line(&mut writer, "bias", self.bias.iter().copied())?;
        for row in self.weights.rows() {
            line(&mut writer, "w", row.iter().copied())?;
        }
        Ok(())
    }

    pub fn read_text(reader: impl BufRead) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let mut next = |expected: &str| -> Result<(usize, String)> {
            let (i, line) = lines
                .next()
                .ok_or_else(|| Error::Empty(format!("model file ends before {expected:?}")))?;
            let line = line.map_err(|e| Error::parse(i + 1, e.to_string()))?;
            Ok((i + 1, line))
        };
        fn field<'l>(lineno: usize, line: &'l str, key: &str) -> Result<&'l str> {
            line.strip_prefix(key)
                .and_then(|rest| {
                    rest.strip_prefix([' ', '\t'])
                        .or((rest.is_empty()).then_some(rest))
                })
                .ok_or_else(|| Error::parse(lineno, format!("expected {key:?}")))
        }
        fn numbers(lineno: usize, text: &str, count: usize) -> Result<Vec<f64>> {
            let values = text
                .split_whitespace()
                .map(|t| {
                    t.parse::<f64>()
                        .map_err(|_| Error::parse(lineno, format!("invalid number {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            if values.len() != count {
                return Err(Error::parse(
                    lineno,
                    format!("expected {count} values, found {}", values.len()),
                ));
            }
            Ok(values)
        }
        let (n, l) = next("logreg")?;
        if l.trim() != "logreg 1" {
            return Err(Error::parse(n, "not a logreg model file"));
        }
        let (n, l) = next("classes")?;
        let k: usize = field(n, &l, "classes")?
            .trim()
            .parse()
            .map_err(|_| Error::parse(n, "invalid class count"))?;
        let (n, l) = next("features")?;
        let p: usize = field(n, &l, "features")?
            .trim()
            .parse()
            .map_err(|_| Error::parse(n, "invalid feature count"))?;
        let (n, l) = next("labels")?;
        let labels: Vec<&str> = field(n, &l, "labels")?.split('\t').collect();
        let label_set = LabelSet::new(labels.iter().copied())?;
        if label_set.k() != k || label_set.labels() != labels {
            return Err(Error::parse(
                n,
                "labels must be sorted, distinct and match the class count",
            ));
        }
        let (n, l) = next("mean")?;
        let mean = numbers(n, field(n, &l, "mean")?, p)?;
        let (n, l) = next("std")?;
        let std = numbers(n, field(n, &l, "std")?, p)?;
        let (n, l) = next("bias")?;
        let bias = numbers(n, field(n, &l, "bias")?, k)?;
        let mut weights = Vec::with_capacity(k * p);
        for _ in 0..k {
            let (n, l) = next("w")?;
            weights.extend(numbers(n, field(n, &l, "w")?, p)?);
        }
        Ok(LogRegModel {
            weights: Array2::from_shape_vec((k, p), weights).expect("k * p values"),
            bias: Array1::from(bias),
            label_set,
            mean: Array1::from(mean),
            std: Array1::from(std),
            loss_history: Vec::new(),
        })
    }
}

pub fn argmax_rows(scores: &Array2<f64>) -> Vec<usize> {
    scores
        .rows()
        .into_iter()
        .map(|row| {
            let mut best = 0;
            for (c, &v) in row.iter().enumerate() {
                if v > row[best] {
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Unweighted mean of per-class F1 over all `n_classes` classes. Classes with no true or
/// predicted positives, or with zero precision and recall, contribute 0.
pub fn macro_f1(gold: &[usize], pred: &[usize], n_classes: usize) -> Result<f64> {
    if gold.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            expected: gold.len(),
            actual: pred.len(),
        });
    }
    if gold.is_empty() {
        return Err(Error::Empty("no predictions to score".into()));
    }
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fn_ = vec![0usize; n_classes];
    for (&g, &p) in gold.iter().zip(pred) {
        for id in [g, p] {
            if id >= n_classes {
                return Err(Error::UnknownCategory(id));
            }
        }
        if g == p {
            tp[g] += 1;
        } else {
            fp[p] += 1;
            fn_[g] += 1;
        }
    }
    let total: f64 = (0..n_classes)
        .map(|c| {
            let precision = ratio(tp[c], tp[c] + fp[c]);
            let recall = ratio(tp[c], tp[c] + fn_[c]);
            if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                0.0
            }
        })
        .sum();
    Ok(total / n_classes as f64)
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}
