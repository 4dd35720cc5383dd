//! Browser bindings: weight tables for pasted text, the weight curves of the three schemes for a
//! single word, and learning curves on synthetic data.
//!
//! Every exported function takes and returns JSON strings; the page in `www/` renders them.

use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::*;

use tfcr::corpus::{LabelSet, LabeledCorpus};
use tfcr::harness::{self, ExperimentConfig};
use tfcr::synth::SyntheticSpec;
use tfcr::tokenize::{tokenize, TokenSequence, TokenizerConfig};
use tfcr::weights::{self, Scheme, SmoothingConfig};
use tfcr::TrainConfig;

#[derive(Serialize)]
struct WordRow {
    word: String,
    total: u64,
    scores: Vec<f64>,
}

#[derive(Serialize)]
struct WeightView {
    scheme: Scheme,
    labels: Vec<String>,
    rows: Vec<WordRow>,
}

/// Parses `label: text` lines (a tab also works as separator). Blank lines are skipped.
fn parse_lines(text: &str) -> Result<LabeledCorpus, String> {
    let mut pairs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let (label, body) = line
            .split_once('\t')
            .or_else(|| line.split_once(':'))
            .ok_or_else(|| format!("line {}: expected `label: text`", i + 1))?;
        let label = label.trim();
        if label.is_empty() {
            return Err(format!("line {}: empty label", i + 1));
        }
        pairs.push((label.to_owned(), body.trim().to_owned()));
    }
    LabeledCorpus::from_pairs(pairs).map_err(|e| e.to_string())
}

pub fn weight_table_json(corpus_text: &str, scheme: &str, epsilon: f64) -> Result<String, String> {
    let scheme: Scheme = scheme.parse().map_err(|e: tfcr::Error| e.to_string())?;
    let corpus = parse_lines(corpus_text)?;
    let tokens: Vec<TokenSequence> = corpus
        .documents()
        .iter()
        .map(|d| tokenize(&d.text, &TokenizerConfig::default()))
        .collect();
    let counts = weights::count_statistics(
        tokens
            .iter()
            .zip(corpus.documents())
            .map(|(t, d)| (t, d.label)),
        corpus.label_set(),
    )
    .map_err(|e| e.to_string())?;
    let table = weights::build_weight_table(&counts, scheme, &SmoothingConfig { epsilon })
        .map_err(|e| e.to_string())?;
    let mut rows: Vec<WordRow> = table
        .sorted_entries()
        .into_iter()
        .map(|(word, scores)| WordRow {
            word: word.to_owned(),
            total: counts.word_total(word),
            scores: scores.to_vec(),
        })
        .collect();
    let peak = |r: &WordRow| r.scores.iter().copied().fold(0.0, f64::max);
    rows.sort_by(|a, b| {
        peak(b)
            .total_cmp(&peak(a))
            .then_with(|| a.word.cmp(&b.word))
    });
    let view = WeightView {
        scheme,
        labels: corpus.label_set().labels().to_vec(),
        rows,
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(default)]
pub struct ProfileParams {
    /// Tokens in the focus category.
    pub category_tokens: u64,
    /// Occurrences of the word across all categories.
    pub word_total: u64,
    /// Tokens in all other categories together.
    pub other_tokens: u64,
    /// Number of categories.
    pub k: usize,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams {
            category_tokens: 100,
            word_total: 20,
            other_tokens: 300,
            k: 4,
        }
    }
}

#[derive(Serialize)]
struct ProfilePoint {
    word_in_category: u64,
    tfcr: f64,
    tfidf: f64,
    kld: f64,
}

/// Scores of one word in the focus category as its in-category count goes from 0 to the
/// largest value the totals allow. Remaining occurrences sit in a second category.
pub fn score_profile_json(params: &str) -> Result<String, String> {
    let p: ProfileParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    if p.k < 2 || p.category_tokens == 0 || p.word_total == 0 {
        return Err("need k >= 2 and positive totals".into());
    }
    let cap = 5000;
    if p.category_tokens > cap || p.other_tokens > cap || p.word_total > cap {
        return Err(format!("totals are limited to {cap} in the demo"));
    }
    let label_set = LabelSet::new((0..p.k).map(|c| format!("c{c}"))).map_err(|e| e.to_string())?;
    let smoothing = SmoothingConfig::default();
    let lo = p.word_total.saturating_sub(p.other_tokens);
    let hi = p.word_total.min(p.category_tokens);
    let mut points = Vec::new();
    for wc in lo..=hi {
        let rest = p.word_total - wc;
        let mut focus = vec!["w"; wc as usize];
        focus.extend(std::iter::repeat_n(
            "filler",
            (p.category_tokens - wc) as usize,
        ));
        let mut other = vec!["w"; rest as usize];
        other.extend(std::iter::repeat_n(
            "other",
            (p.other_tokens - rest) as usize,
        ));
        let docs: [(TokenSequence, usize); 2] = [
            (focus.into_iter().collect(), 0),
            (other.into_iter().collect(), 1),
        ];
        let counts = weights::count_statistics(docs.iter().map(|(t, l)| (t, *l)), &label_set)
            .map_err(|e| e.to_string())?;
        let kld = if p.other_tokens == 0 {
            0.0
        } else {
            counts.kld("w", 0, &smoothing).map_err(|e| e.to_string())?
        };
        points.push(ProfilePoint {
            word_in_category: wc,
            tfcr: counts.tfcr("w", 0).map_err(|e| e.to_string())?,
            tfidf: counts.tfidf("w", 0).map_err(|e| e.to_string())?,
            kld,
        });
    }
    serde_json::to_string(&points).map_err(|e| e.to_string())
}

#[derive(Deserialize)]
#[serde(default)]
pub struct CurveParams {
    pub data: SyntheticSpec,
    pub sizes: Vec<usize>,
    pub n_folds: usize,
    pub schemes: Vec<Scheme>,
    pub seed: u64,
    pub max_epochs: usize,
}

impl Default for CurveParams {
    fn default() -> Self {
        CurveParams {
            data: SyntheticSpec {
                n_docs: 400,
                n_categories: 4,
                vocab_per_category: 40,
                shared_vocab: 60,
                shared_rate: 0.6,
                dim: 16,
                ..SyntheticSpec::default()
            },
            sizes: vec![20, 40, 80, 160],
            n_folds: 3,
            schemes: Scheme::ALL.to_vec(),
            seed: 1,
            max_epochs: 100,
        }
    }
}

#[derive(Serialize)]
struct CurveView {
    aggregates: Vec<harness::Aggregate>,
    failures: Vec<String>,
}

/// Cross-validated learning curves on a generated corpus.
pub fn learning_curve_json(params: &str) -> Result<String, String> {
    let p: CurveParams = serde_json::from_str(params).map_err(|e| e.to_string())?;
    if p.data.n_docs > 5000 || p.data.dim > 200 || p.data.n_categories > 20 {
        return Err("demo limits: at most 5000 documents, 200 dimensions, 20 categories".into());
    }
    if p.data.n_categories < 2 {
        return Err("need at least 2 categories".into());
    }
    let corpus = p.data.corpus().map_err(|e| e.to_string())?;
    let model = p.data.embeddings();
    let config = ExperimentConfig {
        schemes: p.schemes,
        sizes: p.sizes,
        n_folds: p.n_folds,
        base_seed: p.seed,
        train: TrainConfig {
            max_epochs: p.max_epochs.max(1),
            ..TrainConfig::default()
        },
        jobs: 1,
        ..ExperimentConfig::default()
    };
    let outcome = harness::run_grid(&corpus, &model, &config).map_err(|e| e.to_string())?;
    let view = CurveView {
        aggregates: outcome.table.aggregates(),
        failures: outcome
            .manifest
            .failures
            .iter()
            .map(|f| {
                format!(
                    "{} size {} fold {}: {}",
                    f.key.scheme,
                    f.key.train_size,
                    f.key.fold,
                    f.error.as_deref().unwrap_or("")
                )
            })
            .collect(),
    };
    serde_json::to_string(&view).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = weightTable)]
pub fn weight_table(corpus_text: &str, scheme: &str, epsilon: f64) -> Result<String, JsError> {
    weight_table_json(corpus_text, scheme, epsilon).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = scoreProfile)]
pub fn score_profile(params: &str) -> Result<String, JsError> {
    score_profile_json(params).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = learningCurve)]
pub fn learning_curve(params: &str) -> Result<String, JsError> {
    learning_curve_json(params).map_err(|e| JsError::new(&e))
}
