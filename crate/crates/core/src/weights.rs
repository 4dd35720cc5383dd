//! Count statistics over training documents and per-(word, category) weights.
//!
//! Notation used throughout: `|w_c|` is the number of occurrences of word `w` in category `c`,
//! `N_c` the total number of tokens in `c`, and `|w|` the occurrences of `w` over all categories.

use std::collections::HashMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::LabelSet;
use crate::tokenize::TokenSequence;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    None,
    Tfidf,
    Kld,
    Tfcr,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::None, Scheme::Tfidf, Scheme::Kld, Scheme::Tfcr];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::None => "none",
            Scheme::Tfidf => "tfidf",
            Scheme::Kld => "kld",
            Scheme::Tfcr => "tfcr",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "").as_str() {
            "none" => Ok(Scheme::None),
            "tfidf" => Ok(Scheme::Tfidf),
            "kld" => Ok(Scheme::Kld),
            "tfcr" => Ok(Scheme::Tfcr),
            _ => Err(Error::UnknownScheme(s.to_owned())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SmoothingConfig {
    /// Added to both probabilities in the KLD log ratio. Must be positive.
    pub epsilon: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig { epsilon: 1e-10 }
    }
}

/// Token counts per (word, category), per category and per word.
#[derive(Clone, Debug)]
pub struct CountTable {
    label_set: LabelSet,
    vocab: HashMap<String, usize>,
    words: Vec<String>,
    /// Row-major `words × k`.
    word_category: Vec<u64>,
    word_total: Vec<u64>,
    category_total: Vec<u64>,
}

/// Counts tokens of the given training documents. Labels are indices into `label_set`.
pub fn count_statistics<'a, I>(train_docs: I, label_set: &LabelSet) -> Result<CountTable>
where
    I: IntoIterator<Item = (&'a TokenSequence, usize)>,
{
    let k = label_set.k();
    let mut table = CountTable {
        label_set: label_set.clone(),
        vocab: HashMap::new(),
        words: Vec::new(),
        word_category: Vec::new(),
        word_total: Vec::new(),
        category_total: vec![0; k],
    };
    let mut n_docs = 0;
    for (tokens, label) in train_docs {
        if label >= k {
            return Err(Error::UnknownCategory(label));
        }
        n_docs += 1;
        for token in tokens.iter() {
            let id = match table.vocab.get(token) {
                Some(&id) => id,
                None => {
                    let id = table.words.len();
                    table.vocab.insert(token.to_owned(), id);
                    table.words.push(token.to_owned());
                    table.word_category.extend(std::iter::repeat_n(0, k));
                    table.word_total.push(0);
                    id
                }
            };
            table.word_category[id * k + label] += 1;
            table.word_total[id] += 1;
            table.category_total[label] += 1;
        }
    }
    if n_docs == 0 {
        return Err(Error::Empty("training set has no documents".into()));
    }
    Ok(table)
}

impl CountTable {
    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn k(&self) -> usize {
        self.label_set.k()
    }

    /// Words seen in training, in first-occurrence order.
    pub fn words(&self) -> &[String] {
        &self.words
    }

    fn check_category(&self, c: usize) -> Result<()> {
        if c < self.k() {
            Ok(())
        } else {
            Err(Error::UnknownCategory(c))
        }
    }

    /// `|w_c|`; zero for unseen words.
    pub fn word_count(&self, w: &str, c: usize) -> Result<u64> {
        self.check_category(c)?;
        Ok(self
            .vocab
            .get(w)
            .map_or(0, |&id| self.word_category[id * self.k() + c]))
    }

    /// `|w|`; zero for unseen words.
    pub fn word_total(&self, w: &str) -> u64 {
        self.vocab.get(w).map_or(0, |&id| self.word_total[id])
    }

    /// `N_c`.
    pub fn category_total(&self, c: usize) -> Result<u64> {
        self.check_category(c)?;
        Ok(self.category_total[c])
    }

    /// Total number of tokens counted.
    pub fn total(&self) -> u64 {
        self.category_total.iter().sum()
    }

    /// Number of categories in which `w` occurs at least once.
    pub fn category_frequency(&self, w: &str) -> usize {
        self.vocab
            .get(w)
            .map_or(0, |&id| self.row(id).iter().filter(|&&n| n > 0).count())
    }

    fn row(&self, id: usize) -> &[u64] {
        let k = self.k();
        &self.word_category[id * k..(id + 1) * k]
    }

    /// Share of category `c`'s tokens that are `w`: `|w_c| / N_c`.
    pub fn tf(&self, w: &str, c: usize) -> Result<f64> {
        let wc = self.word_count(w, c)?;
        if wc == 0 {
            return Ok(0.0);
        }
        Ok(wc as f64 / self.category_total[c] as f64)
    }

    /// Share of `w`'s occurrences that fall in category `c`: `|w_c| / |w|`.
    pub fn cr(&self, w: &str, c: usize) -> Result<f64> {
        let wc = self.word_count(w, c)?;
        if wc == 0 {
            return Ok(0.0);
        }
        Ok(wc as f64 / self.word_total(w) as f64)
    }

    /// `|w_c|² / (N_c · |w|)`, the product of [`tf`](Self::tf) and [`cr`](Self::cr). Lies in
    /// `[0, 1]` and equals 1 only when `w` is the sole word of `c` and occurs nowhere else.
    pub fn tfcr(&self, w: &str, c: usize) -> Result<f64> {
        let wc = self.word_count(w, c)?;
        if wc == 0 {
            return Ok(0.0);
        }
        Ok(tfcr_value(wc, self.category_total[c], self.word_total(w)))
    }

    /// `|w_c| / N_c · ln(k / cf(w))`, treating each category as a single document.
    pub fn tfidf(&self, w: &str, c: usize) -> Result<f64> {
        let wc = self.word_count(w, c)?;
        if wc == 0 {
            return Ok(0.0);
        }
        Ok(tfidf_value(
            wc,
            self.category_total[c],
            self.k(),
            self.category_frequency(w),
        ))
    }

    /// `max(0, p · ln((p + ε) / (q + ε)))` with `p = |w_c| / N_c` and `q` the probability of `w`
    /// among the tokens of all other categories.
    ///
    /// Errors when no other category has any tokens, since `q` is then undefined.
    pub fn kld(&self, w: &str, c: usize, smoothing: &SmoothingConfig) -> Result<f64> {
        let wc = self.word_count(w, c)?;
        let rest = self.total() - self.category_total[c];
        if rest == 0 {
            return Err(Error::SingleCategory);
        }
        if wc == 0 {
            return Ok(0.0);
        }
        Ok(kld_value(
            wc,
            self.category_total[c],
            self.word_total(w),
            rest,
            smoothing.epsilon,
        ))
    }
}

fn tfcr_value(wc: u64, nc: u64, w: u64) -> f64 {
    (wc * wc) as f64 / (nc as f64 * w as f64)
}

fn tfidf_value(wc: u64, nc: u64, k: usize, cf: usize) -> f64 {
    wc as f64 / nc as f64 * (k as f64 / cf as f64).ln()
}

fn kld_value(wc: u64, nc: u64, w: u64, rest: u64, epsilon: f64) -> f64 {
    let p = wc as f64 / nc as f64;
    let q = (w - wc) as f64 / rest as f64;
    (p * ((p + epsilon) / (q + epsilon)).ln()).max(0.0)
}

/// Materialized scores for every training word and every category.
#[derive(Clone, Debug)]
pub struct WeightTable {
    scheme: Scheme,
    label_set: LabelSet,
    vocab: HashMap<String, usize>,
    words: Vec<String>,
    /// Row-major `words × k`.
    scores: Vec<f64>,
}

pub fn build_weight_table(
    counts: &CountTable,
    scheme: Scheme,
    smoothing: &SmoothingConfig,
) -> Result<WeightTable> {
    if !(smoothing.epsilon > 0.0 && smoothing.epsilon.is_finite()) {
        return Err(Error::Config(format!(
            "smoothing epsilon must be positive, got {}",
            smoothing.epsilon
        )));
    }
    let k = counts.k();
    let total = counts.total();
    if scheme == Scheme::Kld && counts.category_total.contains(&total) {
        return Err(Error::SingleCategory);
    }
    let mut scores = Vec::with_capacity(counts.words.len() * k);
    for id in 0..counts.words.len() {
        let row = counts.row(id);
        let w = counts.word_total[id];
        let cf = row.iter().filter(|&&n| n > 0).count();
        for (c, &wc) in row.iter().enumerate() {
            let nc = counts.category_total[c];
            let score = match scheme {
                Scheme::None => 1.0,
                _ if wc == 0 => 0.0,
                Scheme::Tfcr => tfcr_value(wc, nc, w),
                Scheme::Tfidf => tfidf_value(wc, nc, k, cf),
                Scheme::Kld => kld_value(wc, nc, w, total - nc, smoothing.epsilon),
            };
            scores.push(score);
        }
    }
    Ok(WeightTable {
        scheme,
        label_set: counts.label_set.clone(),
        vocab: counts.vocab.clone(),
        words: counts.words.clone(),
        scores,
    })
}

impl WeightTable {
    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn k(&self) -> usize {
        self.label_set.k()
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Scores of `word` for every category in label order, or `None` if the word was not seen
    /// in training.
    pub fn scores(&self, word: &str) -> Option<&[f64]> {
        let k = self.k();
        self.vocab
            .get(word)
            .map(|&id| &self.scores[id * k..(id + 1) * k])
    }

    /// Score of `(word, c)`; 0 for unseen words and out-of-range categories.
    pub fn score(&self, word: &str, c: usize) -> f64 {
        self.scores(word)
            .and_then(|s| s.get(c).copied())
            .unwrap_or(0.0)
    }

    /// Sets every score of category `c` to zero.
    pub fn zero_category(&mut self, c: usize) {
        let k = self.k();
        for row in self.scores.chunks_mut(k) {
            row[c] = 0.0;
        }
    }

    /// Words sorted lexicographically, each with its per-category scores.
    pub fn sorted_entries(&self) -> Vec<(&str, &[f64])> {
        let k = self.k();
        let mut entries: Vec<(&str, &[f64])> = self
            .words
            .iter()
            .enumerate()
            .map(|(id, w)| (w.as_str(), &self.scores[id * k..(id + 1) * k]))
            .collect();
        entries.sort_by(|a, b| a.0.cmp(b.0));
        entries
    }

    /// Writes `word<TAB>category<TAB>score` rows sorted by word then category, preceded by a
    /// `word\tcategory\tscore` header. Scores round-trip exactly.
    pub fn write_tsv(&self, mut writer: impl Write) -> std::io::Result<()> {
        writeln!(writer, "word\tcategory\tscore")?;
        for (word, scores) in self.sorted_entries() {
            for (label, score) in self.label_set.labels().iter().zip(scores) {
                writeln!(writer, "{word}\t{label}\t{score}")?;
            }
        }
        Ok(())
    }

    /// Reads rows written by [`write_tsv`](Self::write_tsv). Pairs missing from the file read as 0.
    pub fn read_tsv(reader: impl BufRead, label_set: &LabelSet, scheme: Scheme) -> Result<Self> {
        let k = label_set.k();
        let mut table = WeightTable {
            scheme,
            label_set: label_set.clone(),
            vocab: HashMap::new(),
            words: Vec::new(),
            scores: Vec::new(),
        };
        for (i, line) in reader.lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
            if line.is_empty() || (lineno == 1 && line == "word\tcategory\tscore") {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [word, label, score] = fields[..] else {
                return Err(Error::parse(
                    lineno,
                    format!("expected 3 fields, found {}", fields.len()),
                ));
            };
            let c = label_set
                .index_of(label)
                .ok_or_else(|| Error::parse(lineno, format!("unknown category {label:?}")))?;
            let score: f64 = score
                .parse()
                .map_err(|_| Error::parse(lineno, format!("invalid score {score:?}")))?;
            if !(score.is_finite() && score >= 0.0) {
                return Err(Error::parse(
                    lineno,
                    format!("score must be finite and non-negative, got {score}"),
                ));
            }
            let id = match table.vocab.get(word) {
                Some(&id) => id,
                None => {
                    let id = table.words.len();
                    table.vocab.insert(word.to_owned(), id);
                    table.words.push(word.to_owned());
                    table.scores.extend(std::iter::repeat_n(0.0, k));
                    id
                }
            };
            table.scores[id * k + c] = score;
        }
        Ok(table)
    }
}

/// Equal when scheme, labels and every (word, category) score agree, regardless of the order in
/// which words were first seen.
impl PartialEq for WeightTable {
    fn eq(&self, other: &Self) -> bool {
        self.scheme == other.scheme
            && self.label_set == other.label_set
            && self.words.len() == other.words.len()
            && self.words.iter().all(|w| self.scores(w) == other.scores(w))
    }
}
