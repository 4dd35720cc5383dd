//! Labeled datasets, stratified folds and nested training subsets.

use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::{seeded_rng, Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorpusFormat {
    Tsv,
    Csv,
    Jsonl,
}

impl FromStr for CorpusFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tsv" => Ok(CorpusFormat::Tsv),
            "csv" => Ok(CorpusFormat::Csv),
            "jsonl" => Ok(CorpusFormat::Jsonl),
            other => Err(Error::Config(format!("unknown corpus format {other:?}"))),
        }
    }
}

/// Ordered, duplicate-free category names. The order is lexicographic and fixes the block order
/// of concatenated features and the class order of classifiers.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabelSet(Vec<String>);

impl LabelSet {
    /// Sorts and deduplicates `labels`. At least two distinct labels are required.
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        labels.sort();
        labels.dedup();
        if labels.len() < 2 {
            return Err(Error::TooFewLabels(labels.len()));
        }
        Ok(LabelSet(labels))
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.0
    }

    pub fn name(&self, index: usize) -> Option<&str> {
        self.0.get(index).map(String::as_str)
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.binary_search_by(|l| l.as_str().cmp(label)).ok()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledDocument {
    pub id: usize,
    pub text: String,
    /// Index into the corpus [`LabelSet`].
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LabeledCorpus {
    documents: Vec<LabeledDocument>,
    label_set: LabelSet,
}

impl LabeledCorpus {
    /// Builds a corpus from `(label, text)` pairs in order. The label set is the sorted set of
    /// distinct labels.
    pub fn from_pairs<L, T>(pairs: impl IntoIterator<Item = (L, T)>) -> Result<Self>
    where
        L: Into<String>,
        T: Into<String>,
    {
        let pairs: Vec<(String, String)> = pairs
            .into_iter()
            .map(|(l, t)| (l.into(), t.into()))
            .collect();
        if pairs.is_empty() {
            return Err(Error::Empty("corpus has no documents".into()));
        }
        let label_set = LabelSet::new(pairs.iter().map(|(l, _)| l.clone()))?;
        let documents = pairs
            .into_iter()
            .enumerate()
            .map(|(id, (label, text))| LabeledDocument {
                id,
                text,
                label: label_set.index_of(&label).expect("label collected above"),
            })
            .collect();
        Ok(LabeledCorpus {
            documents,
            label_set,
        })
    }

    pub fn documents(&self) -> &[LabeledDocument] {
        &self.documents
    }

    pub fn label_set(&self) -> &LabelSet {
        &self.label_set
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.documents.iter().map(|d| d.label).collect()
    }
}

pub fn load_corpus(path: impl AsRef<Path>, format: CorpusFormat) -> Result<LabeledCorpus> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_corpus(BufReader::new(file), format)
}

/// Parses a corpus from any reader. Line numbers in errors are 1-based.
pub fn read_corpus(reader: impl Read, format: CorpusFormat) -> Result<LabeledCorpus> {
    let pairs = match format {
        CorpusFormat::Tsv => read_tsv(BufReader::new(reader))?,
        CorpusFormat::Csv => read_csv(reader)?,
        CorpusFormat::Jsonl => read_jsonl(BufReader::new(reader))?,
    };
    if pairs.is_empty() {
        return Err(Error::Empty("corpus file has no records".into()));
    }
    LabeledCorpus::from_pairs(pairs)
}

fn check_label(line: usize, label: &str) -> Result<()> {
    if label.is_empty() {
        Err(Error::parse(line, "empty label"))
    } else {
        Ok(())
    }
}

fn read_tsv(reader: impl BufRead) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::parse(
                lineno,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        }
        if lineno == 1 && fields == ["label", "text"] {
            continue;
        }
        check_label(lineno, fields[0])?;
        pairs.push((fields[0].to_owned(), fields[1].to_owned()));
    }
    Ok(pairs)
}

fn read_csv(reader: impl Read) -> Result<Vec<(String, String)>> {
    let mut csv_reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(reader);
    let mut pairs = Vec::new();
    for (i, record) in csv_reader.records().enumerate() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::parse(line, e.to_string())
        })?;
        let lineno = record
            .position()
            .map(|p| p.line() as usize)
            .unwrap_or(i + 1);
        if record.len() != 2 {
            return Err(Error::parse(
                lineno,
                format!("expected 2 fields, found {}", record.len()),
            ));
        }
        if i == 0 && &record[0] == "label" && &record[1] == "text" {
            continue;
        }
        check_label(lineno, &record[0])?;
        pairs.push((record[0].to_owned(), record[1].to_owned()));
    }
    Ok(pairs)
}

#[derive(Deserialize)]
struct JsonRecord {
    label: String,
    text: String,
}

fn read_jsonl(reader: impl BufRead) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: JsonRecord =
            serde_json::from_str(&line).map_err(|e| Error::parse(lineno, e.to_string()))?;
        check_label(lineno, &record.label)?;
        pairs.push((record.label, record.text));
    }
    Ok(pairs)
}

/// Stratified assignment of every document to one of `n_folds` folds.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldAssignment {
    n_folds: usize,
    fold_of: Vec<usize>,
}

impl FoldAssignment {
    pub fn n_folds(&self) -> usize {
        self.n_folds
    }

    pub fn fold_of(&self, id: usize) -> usize {
        self.fold_of[id]
    }

    /// Document ids in fold `fold`, ascending.
    pub fn test_ids(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&id| self.fold_of[id] == fold)
            .collect()
    }

    /// Document ids outside fold `fold`, ascending.
    pub fn train_ids(&self, fold: usize) -> Vec<usize> {
        (0..self.fold_of.len())
            .filter(|&id| self.fold_of[id] != fold)
            .collect()
    }
}

/// Shuffles the documents of each label with a seeded generator, then deals them round-robin
/// to folds. The dealing position carries over from one label to the next so that overall fold
/// sizes also differ by at most one.
pub fn make_folds(corpus: &LabeledCorpus, n_folds: usize, seed: u64) -> Result<FoldAssignment> {
    if n_folds < 2 {
        return Err(Error::Config(format!(
            "n_folds must be at least 2, got {n_folds}"
        )));
    }
    let k = corpus.label_set().k();
    let mut by_label: Vec<Vec<usize>> = vec![Vec::new(); k];
    for doc in corpus.documents() {
        by_label[doc.label].push(doc.id);
    }
    for (label, ids) in by_label.iter().enumerate() {
        if ids.len() < n_folds {
            return Err(Error::LabelTooSmall {
                label: corpus.label_set().labels()[label].clone(),
                count: ids.len(),
                n_folds,
            });
        }
    }
    let mut rng = seeded_rng(seed);
    let mut fold_of = vec![0; corpus.len()];
    let mut next = 0;
    for ids in &mut by_label {
        ids.shuffle(&mut rng);
        for &id in ids.iter() {
            fold_of[id] = next;
            next = (next + 1) % n_folds;
        }
    }
    Ok(FoldAssignment { n_folds, fold_of })
}

/// Nested training subsets: subset `i` is the first `sizes[i]` ids of `prefix`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubsetChain {
    sizes: Vec<usize>,
    prefix: Vec<usize>,
}

impl SubsetChain {
    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn prefix(&self) -> &[usize] {
        &self.prefix
    }

    /// The subset for the `i`-th size.
    pub fn subset(&self, i: usize) -> &[usize] {
        &self.prefix[..self.sizes[i]]
    }

    /// The subset of exactly `size` documents, if `size` is one of the chain's sizes.
    pub fn subset_of_size(&self, size: usize) -> Option<&[usize]> {
        self.sizes
            .binary_search(&size)
            .ok()
            .map(|_| &self.prefix[..size])
    }
}

pub(crate) fn validate_sizes(sizes: &[usize]) -> Result<()> {
    if sizes.is_empty() {
        return Err(Error::InvalidSizes("no sizes given".into()));
    }
    if sizes[0] == 0 {
        return Err(Error::InvalidSizes("sizes must be positive".into()));
    }
    if let Some(w) = sizes.windows(2).find(|w| w[0] >= w[1]) {
        return Err(Error::InvalidSizes(format!(
            "sizes must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Shuffles `train_ids` once and exposes nested prefixes of the given sizes.
pub fn make_subset_chain(train_ids: &[usize], sizes: &[usize], seed: u64) -> Result<SubsetChain> {
    validate_sizes(sizes)?;
    let largest = *sizes.last().unwrap();
    if largest > train_ids.len() {
        return Err(Error::InvalidSizes(format!(
            "largest size {largest} exceeds the pool of {} documents",
            train_ids.len()
        )));
    }
    let mut prefix = train_ids.to_vec();
    prefix.shuffle(&mut seeded_rng(seed));
    Ok(SubsetChain {
        sizes: sizes.to_vec(),
        prefix,
    })
}
