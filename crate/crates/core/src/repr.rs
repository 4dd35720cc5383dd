//! Document feature vectors built from word embeddings.
//!
//! The weighted representation has one `d`-dimensional block per category. Block `c` is the sum
//! of the embeddings of the document's tokens, each scaled by the token's weight in `c`. Blocks
//! are concatenated in label order, giving `k · d` features. The unweighted baseline is the plain
//! sum or mean of the embeddings.
//!
//! Tokens are tallied and visited in sorted order before summing, so the result does not depend
//! on token order even under floating-point rounding.

use std::collections::BTreeMap;
use std::io::Write;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::embed::EmbeddingModel;
use crate::tokenize::TokenSequence;
use crate::weights::WeightTable;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaselineMode {
    Sum,
    #[default]
    Mean,
}

impl FromStr for BaselineMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sum" => Ok(BaselineMode::Sum),
            "mean" => Ok(BaselineMode::Mean),
            other => Err(Error::Config(format!("unknown baseline mode {other:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    ConcatKd { k: usize, d: usize },
    PlainD { d: usize },
}

impl Layout {
    pub fn len(&self) -> usize {
        match *self {
            Layout::ConcatKd { k, d } => k * d,
            Layout::PlainD { d } => d,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    values: Vec<f64>,
    layout: Layout,
}

impl FeatureVector {
    pub fn zeros(layout: Layout) -> Self {
        FeatureVector {
            values: vec![0.0; layout.len()],
            layout,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Block of category `c` of a concatenated vector.
    pub fn block(&self, c: usize) -> Option<&[f64]> {
        match self.layout {
            Layout::ConcatKd { k, d } if c < k => Some(&self.values[c * d..(c + 1) * d]),
            _ => None,
        }
    }

    /// Scales to unit Euclidean norm. Zero vectors are left unchanged.
    pub fn normalize_l2(&mut self) {
        let norm = self.values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            self.values.iter_mut().for_each(|v| *v /= norm);
        }
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

fn tally(tokens: &TokenSequence) -> BTreeMap<&str, usize> {
    let mut counts = BTreeMap::new();
    for token in tokens.iter() {
        *counts.entry(token).or_insert(0) += 1;
    }
    counts
}

fn add_scaled(dst: &mut [f64], scale: f64, src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += scale * s;
    }
}

/// Concatenated per-category weighted sums. Tokens missing from the embedding model or from the
/// weight table contribute nothing.
pub fn weighted_repr(
    tokens: &TokenSequence,
    weights: &WeightTable,
    model: &EmbeddingModel,
) -> FeatureVector {
    let (k, d) = (weights.k(), model.dim());
    let mut out = FeatureVector::zeros(Layout::ConcatKd { k, d });
    for (token, count) in tally(tokens) {
        let (Some(embedding), Some(scores)) = (model.lookup(token), weights.scores(token)) else {
            continue;
        };
        for (c, &score) in scores.iter().enumerate() {
            if score != 0.0 {
                add_scaled(
                    &mut out.values[c * d..(c + 1) * d],
                    count as f64 * score,
                    embedding,
                );
            }
        }
    }
    out
}

/// Sum or mean of the embeddings of in-vocabulary tokens. A document with no in-vocabulary
/// token maps to the zero vector in both modes.
pub fn unweighted_repr(
    tokens: &TokenSequence,
    model: &EmbeddingModel,
    mode: BaselineMode,
) -> FeatureVector {
    let mut out = FeatureVector::zeros(Layout::PlainD { d: model.dim() });
    let mut found = 0usize;
    for (token, count) in tally(tokens) {
        if let Some(embedding) = model.lookup(token) {
            add_scaled(&mut out.values, count as f64, embedding);
            found += count;
        }
    }
    if mode == BaselineMode::Mean && found > 0 {
        out.values.iter_mut().for_each(|v| *v /= found as f64);
    }
    out
}

/// How documents are turned into feature vectors.
#[derive(Clone, Copy, Debug)]
pub enum Featurizer<'a> {
    Weighted {
        weights: &'a WeightTable,
        l2_normalize: bool,
    },
    Baseline(BaselineMode),
}

impl Featurizer<'_> {
    pub fn featurize(&self, tokens: &TokenSequence, model: &EmbeddingModel) -> FeatureVector {
        match *self {
            Featurizer::Weighted {
                weights,
                l2_normalize,
            } => {
                let mut v = weighted_repr(tokens, weights, model);
                if l2_normalize {
                    v.normalize_l2();
                }
                v
            }
            Featurizer::Baseline(mode) => unweighted_repr(tokens, model, mode),
        }
    }

    pub fn layout(&self, model: &EmbeddingModel) -> Layout {
        match self {
            Featurizer::Weighted { weights, .. } => Layout::ConcatKd {
                k: weights.k(),
                d: model.dim(),
            },
            Featurizer::Baseline(_) => Layout::PlainD { d: model.dim() },
        }
    }

    /// One row per document.
    pub fn matrix<'t>(
        &self,
        docs: impl ExactSizeIterator<Item = &'t TokenSequence>,
        model: &EmbeddingModel,
    ) -> Array2<f64> {
        let n_features = self.layout(model).len();
        let mut matrix = Array2::zeros((docs.len(), n_features));
        for (mut row, tokens) in matrix.rows_mut().into_iter().zip(docs) {
            let v = self.featurize(tokens, model);
            row.iter_mut()
                .zip(v.values())
                .for_each(|(dst, src)| *dst = *src);
        }
        matrix
    }
}

/// Debug dump: one `label<TAB>v1<TAB>..<TAB>vn` line per row.
pub fn write_feature_tsv(
    mut writer: impl Write,
    labels: &[&str],
    features: &Array2<f64>,
) -> std::io::Result<()> {
    for (label, row) in labels.iter().zip(features.rows()) {
        write!(writer, "{label}")?;
        for v in row {
            write!(writer, "\t{v}")?;
        }
        writeln!(writer)?;
    }
    Ok(())
}
