//! Cross-validated learning curves over weighting schemes and training sizes.
//!
//! For each fold `f` the training pool is every document outside `f`. The pool is shuffled once
//! with seed `base_seed + f` and nested prefixes of the configured sizes form the training sets.
//! Every (scheme, size, fold) cell recomputes counts and weights from its own training prefix,
//! trains a classifier and scores macro-F1 on the whole of fold `f`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use web_time::Instant;

use crate::clf::{self, TrainConfig};
use crate::corpus::{self, CorpusFormat, FoldAssignment, LabeledCorpus, SubsetChain};
use crate::embed::{self, EmbeddingFormat, EmbeddingModel};
use crate::repr::{BaselineMode, Featurizer};
use crate::tokenize::{tokenize, TokenSequence, TokenizerConfig};
use crate::weights::{self, Scheme, SmoothingConfig, WeightTable};
use crate::{Error, Result, PRNG_NAME};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetSource {
    pub path: PathBuf,
    pub format: CorpusFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSource {
    pub path: PathBuf,
    #[serde(default)]
    pub format: EmbeddingFormat,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub dataset: Option<DatasetSource>,
    pub embeddings: Option<EmbeddingSource>,
    pub schemes: Vec<Scheme>,
    pub sizes: Vec<usize>,
    pub n_folds: usize,
    pub baseline_mode: BaselineMode,
    /// Scale weighted representations to unit length.
    pub l2_normalize: bool,
    pub tokenizer: TokenizerConfig,
    pub smoothing: SmoothingConfig,
    pub train: TrainConfig,
    pub base_seed: u64,
    pub output_dir: Option<PathBuf>,
    /// Worker threads for grid cells; 0 uses every available core.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dataset: None,
            embeddings: None,
            schemes: Scheme::ALL.to_vec(),
            sizes: (1..=9).map(|i| i * 1000).collect(),
            n_folds: 10,
            baseline_mode: BaselineMode::default(),
            l2_normalize: false,
            tokenizer: TokenizerConfig::default(),
            smoothing: SmoothingConfig::default(),
            train: TrainConfig::default(),
            base_seed: 0,
            output_dir: None,
            jobs: 0,
        }
    }
}

impl ExperimentConfig {
    /// Reads a TOML file, or JSON when the extension is `.json`.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let config: ExperimentConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text).map_err(|e| Error::Config(e.to_string()))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.schemes.is_empty() {
            return Err(Error::Config("at least one scheme is required".into()));
        }
        let mut schemes = self.schemes.clone();
        schemes.sort();
        schemes.dedup();
        if schemes.len() != self.schemes.len() {
            return Err(Error::Config("schemes must not repeat".into()));
        }
        corpus::validate_sizes(&self.sizes)?;
        if self.n_folds < 2 {
            return Err(Error::Config("n_folds must be at least 2".into()));
        }
        Ok(())
    }

    fn subset_seed(&self, fold: usize) -> u64 {
        self.base_seed.wrapping_add(fold as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub scheme: Scheme,
    pub train_size: usize,
    pub fold: usize,
    pub macro_f1: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub scheme: Scheme,
    pub train_size: usize,
    pub mean: f64,
    /// Sample standard deviation over folds (0 for a single fold).
    pub std: f64,
    pub n_folds: usize,
}

/// Fold-level macro-F1 rows, ordered by scheme (configuration order), size and fold.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub rows: Vec<FoldResult>,
}

/// Mean and sample standard deviation, summing in the given order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl ResultsTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// One aggregate per (scheme, size) present, in row order.
    pub fn aggregates(&self) -> Vec<Aggregate> {
        let mut keys: Vec<(Scheme, usize)> = Vec::new();
        for row in &self.rows {
            if !keys.contains(&(row.scheme, row.train_size)) {
                keys.push((row.scheme, row.train_size));
            }
        }
        keys.into_iter()
            .map(|(scheme, train_size)| {
                let values: Vec<f64> = self
                    .rows
                    .iter()
                    .filter(|r| r.scheme == scheme && r.train_size == train_size)
                    .map(|r| r.macro_f1)
                    .collect();
                let (mean, std) = mean_std(&values);
                Aggregate {
                    scheme,
                    train_size,
                    mean,
                    std,
                    n_folds: values.len(),
                }
            })
            .collect()
    }

    pub fn aggregate(&self, scheme: Scheme, train_size: usize) -> Option<Aggregate> {
        self.aggregates()
            .into_iter()
            .find(|a| a.scheme == scheme && a.train_size == train_size)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CellKey {
    pub scheme: Scheme,
    pub train_size: usize,
    pub fold: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellRecord {
    #[serde(flatten)]
    pub key: CellKey,
    pub status: CellStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub macro_f1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub wall_time_ms: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellStatus {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EmbeddingSummary {
    pub name: String,
    pub dim: usize,
    pub words: usize,
    pub duplicate_words: usize,
    pub header_count_mismatch: Option<usize>,
}

/// Self-description of a run: configuration, seeds, data summary and per-cell outcomes.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Manifest {
    pub library_version: String,
    pub prng: String,
    pub fold_seed: u64,
    /// Seed of the subset shuffle for each fold, indexed by fold.
    pub subset_seeds: Vec<u64>,
    pub sampling: String,
    pub config: ExperimentConfig,
    pub n_documents: usize,
    pub labels: Vec<String>,
    pub embedding: EmbeddingSummary,
    pub failures: Vec<CellRecord>,
    pub cells: Vec<CellRecord>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub table: ResultsTable,
    pub manifest: Manifest,
}

impl ExperimentOutcome {
    pub fn n_failed(&self) -> usize {
        self.manifest.failures.len()
    }
}

/// Tokenized corpus with its folds and per-fold subset chains, ready to run cells.
pub struct Experiment<'a> {
    config: &'a ExperimentConfig,
    corpus: &'a LabeledCorpus,
    model: &'a EmbeddingModel,
    tokens: Vec<TokenSequence>,
    labels: Vec<usize>,
    folds: FoldAssignment,
    chains: Vec<SubsetChain>,
}

impl<'a> Experiment<'a> {
    pub fn prepare(
        corpus: &'a LabeledCorpus,
        model: &'a EmbeddingModel,
        config: &'a ExperimentConfig,
    ) -> Result<Self> {
        config.validate()?;
        let tokens = corpus
            .documents()
            .iter()
            .map(|d| tokenize(&d.text, &config.tokenizer))
            .collect();
        let folds = corpus::make_folds(corpus, config.n_folds, config.base_seed)?;
        let largest = *config.sizes.last().expect("validated");
        let chains = (0..config.n_folds)
            .map(|f| {
                let pool = folds.train_ids(f);
                if largest > pool.len() {
                    return Err(Error::InvalidSizes(format!(
                        "largest size {largest} exceeds the {} training documents of fold {f}",
                        pool.len()
                    )));
                }
                corpus::make_subset_chain(&pool, &config.sizes, config.subset_seed(f))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Experiment {
            config,
            corpus,
            model,
            tokens,
            labels: corpus.labels(),
            folds,
            chains,
        })
    }

    pub fn folds(&self) -> &FoldAssignment {
        &self.folds
    }

    pub fn tokens(&self) -> &[TokenSequence] {
        &self.tokens
    }

    fn size_index(&self, train_size: usize) -> Result<usize> {
        self.config
            .sizes
            .binary_search(&train_size)
            .map_err(|_| Error::InvalidSizes(format!("{train_size} is not a configured size")))
    }

    /// Document ids of the training set of `(train_size, fold)`.
    pub fn training_ids(&self, train_size: usize, fold: usize) -> Result<&[usize]> {
        let i = self.size_index(train_size)?;
        let chain = self
            .chains
            .get(fold)
            .ok_or_else(|| Error::Config(format!("fold {fold} out of range")))?;
        Ok(chain.subset(i))
    }

    /// Weights of a cell, computed from its training documents only. `None` for `Scheme::None`.
    pub fn weights_for(
        &self,
        scheme: Scheme,
        train_size: usize,
        fold: usize,
    ) -> Result<Option<WeightTable>> {
        if scheme == Scheme::None {
            return Ok(None);
        }
        let ids = self.training_ids(train_size, fold)?;
        let counts = weights::count_statistics(
            ids.iter().map(|&id| (&self.tokens[id], self.labels[id])),
            self.corpus.label_set(),
        )?;
        weights::build_weight_table(&counts, scheme, &self.config.smoothing).map(Some)
    }

    /// Trains and evaluates one grid cell.
    pub fn run_cell(&self, key: CellKey) -> Result<f64> {
        let train_ids = self.training_ids(key.train_size, key.fold)?;
        let weights = self.weights_for(key.scheme, key.train_size, key.fold)?;
        let featurizer = match &weights {
            Some(weights) => Featurizer::Weighted {
                weights,
                l2_normalize: self.config.l2_normalize,
            },
            None => Featurizer::Baseline(self.config.baseline_mode),
        };
        let test_ids = self.folds.test_ids(key.fold);
        let x_train = featurizer.matrix(train_ids.iter().map(|&id| &self.tokens[id]), self.model);
        let y_train: Vec<usize> = train_ids.iter().map(|&id| self.labels[id]).collect();
        let model = clf::train(
            x_train.view(),
            &y_train,
            self.corpus.label_set(),
            &self.config.train,
        )?;
        let x_test = featurizer.matrix(test_ids.iter().map(|&id| &self.tokens[id]), self.model);
        let gold: Vec<usize> = test_ids.iter().map(|&id| self.labels[id]).collect();
        let pred = model.predict(x_test.view())?;
        clf::macro_f1(&gold, &pred, self.corpus.label_set().k())
    }

    /// Every cell, ordered by scheme, size and fold.
    pub fn cells(&self) -> Vec<CellKey> {
        let mut cells = Vec::new();
        for &scheme in &self.config.schemes {
            for &train_size in &self.config.sizes {
                for fold in 0..self.config.n_folds {
                    cells.push(CellKey {
                        scheme,
                        train_size,
                        fold,
                    });
                }
            }
        }
        cells
    }

    fn timed_cell(&self, key: CellKey) -> CellRecord {
        let start = Instant::now();
        let result = self.run_cell(key);
        let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
        match result {
            Ok(f1) => CellRecord {
                key,
                status: CellStatus::Ok,
                macro_f1: Some(f1),
                error: None,
                wall_time_ms,
            },
            Err(e) => CellRecord {
                key,
                status: CellStatus::Failed,
                macro_f1: None,
                error: Some(e.to_string()),
                wall_time_ms,
            },
        }
    }

    #[cfg(feature = "parallel")]
    fn run_cells(&self, cells: &[CellKey]) -> Vec<CellRecord> {
        use rayon::prelude::*;
        let run = || cells.par_iter().map(|&key| self.timed_cell(key)).collect();
        if self.config.jobs == 1 {
            return cells.iter().map(|&key| self.timed_cell(key)).collect();
        }
        match rayon::ThreadPoolBuilder::new()
            .num_threads(self.config.jobs)
            .build()
        {
            Ok(pool) => pool.install(run),
            Err(_) => run(),
        }
    }

    #[cfg(not(feature = "parallel"))]
    fn run_cells(&self, cells: &[CellKey]) -> Vec<CellRecord> {
        cells.iter().map(|&key| self.timed_cell(key)).collect()
    }

    /// Runs the whole grid. Failed cells are recorded in the manifest and skipped in the table.
    pub fn run(&self) -> ExperimentOutcome {
        let records = self.run_cells(&self.cells());
        let rows = records
            .iter()
            .filter_map(|r| {
                r.macro_f1.map(|macro_f1| FoldResult {
                    scheme: r.key.scheme,
                    train_size: r.key.train_size,
                    fold: r.key.fold,
                    macro_f1,
                })
            })
            .collect();
        let stats = self.model.stats();
        let manifest = Manifest {
            library_version: env!("CARGO_PKG_VERSION").to_owned(),
            prng: PRNG_NAME.to_owned(),
            fold_seed: self.config.base_seed,
            subset_seeds: (0..self.config.n_folds)
                .map(|f| self.config.subset_seed(f))
                .collect(),
            sampling: "per-fold nested subsets drawn from the documents outside the test fold; \
			           weights recomputed from each training subset; evaluation on the full test fold"
                .to_owned(),
            config: self.config.clone(),
            n_documents: self.corpus.len(),
            labels: self.corpus.label_set().labels().to_vec(),
            embedding: EmbeddingSummary {
                name: self.model.name().to_owned(),
                dim: self.model.dim(),
                words: self.model.len(),
                duplicate_words: stats.duplicates,
                header_count_mismatch: stats.header_count_mismatch,
            },
            failures: records
                .iter()
                .filter(|r| r.status == CellStatus::Failed)
                .cloned()
                .collect(),
            cells: records,
        };
        ExperimentOutcome {
            table: ResultsTable { rows },
            manifest,
        }
    }
}

/// Runs the grid on an already loaded corpus and embedding model.
pub fn run_grid(
    corpus: &LabeledCorpus,
    model: &EmbeddingModel,
    config: &ExperimentConfig,
) -> Result<ExperimentOutcome> {
    Ok(Experiment::prepare(corpus, model, config)?.run())
}

/// Loads the configured dataset and embeddings, then runs the grid.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let dataset = config
        .dataset
        .as_ref()
        .ok_or_else(|| Error::Config("no dataset configured".into()))?;
    let embeddings = config
        .embeddings
        .as_ref()
        .ok_or_else(|| Error::Config("no embeddings configured".into()))?;
    let corpus = corpus::load_corpus(&dataset.path, dataset.format)?;
    let model = embed::load_embeddings(&embeddings.path, embeddings.format)?;
    run_grid(&corpus, &model, config)
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(contents).map_err(|e| Error::io(path, e))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("in-memory write");
    for row in rows {
        writer.write_record(&row).expect("in-memory write");
    }
    writer.into_inner().expect("in-memory flush")
}

pub fn write_manifest(manifest: &Manifest, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let json = serde_json::to_vec_pretty(manifest)?;
    write_file(&dir.join("manifest.json"), &json)
}

/// Writes `results.csv`, `aggregates.csv`, one `curve_<scheme>.csv` per scheme and
/// `manifest.json` into `dir`. Floats are written in shortest round-trip form.
pub fn emit_results(table: &ResultsTable, manifest: &Manifest, dir: &Path) -> Result<Vec<PathBuf>> {
    if table.is_empty() {
        return Err(Error::Empty("results table has no rows".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let results = csv_bytes(
        &["scheme", "train_size", "fold", "macro_f1"],
        table.rows.iter().map(|r| {
            vec![
                r.scheme.to_string(),
                r.train_size.to_string(),
                r.fold.to_string(),
                r.macro_f1.to_string(),
            ]
        }),
    );
    written.push(dir.join("results.csv"));
    write_file(written.last().unwrap(), &results)?;

    let aggregates = table.aggregates();
    let agg = csv_bytes(
        &["scheme", "train_size", "mean_macro_f1", "std_macro_f1"],
        aggregates.iter().map(|a| {
            vec![
                a.scheme.to_string(),
                a.train_size.to_string(),
                a.mean.to_string(),
                a.std.to_string(),
            ]
        }),
    );
    written.push(dir.join("aggregates.csv"));
    write_file(written.last().unwrap(), &agg)?;

    let mut schemes: Vec<Scheme> = Vec::new();
    for a in &aggregates {
        if !schemes.contains(&a.scheme) {
            schemes.push(a.scheme);
        }
    }
    for scheme in schemes {
        let curve = csv_bytes(
            &["train_size", "mean_macro_f1"],
            aggregates
                .iter()
                .filter(|a| a.scheme == scheme)
                .map(|a| vec![a.train_size.to_string(), a.mean.to_string()]),
        );
        written.push(dir.join(format!("curve_{scheme}.csv")));
        write_file(written.last().unwrap(), &curve)?;
    }

    write_manifest(manifest, dir)?;
    written.push(dir.join("manifest.json"));
    Ok(written)
}

/// Parses a `results.csv` written by [`emit_results`].
pub fn read_results_csv(path: &Path) -> Result<ResultsTable> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::parse(i + 2, e.to_string()))?;
        let field = |j: usize| {
            record
                .get(j)
                .ok_or_else(|| Error::parse(i + 2, "missing field"))
        };
        let num = |j: usize| -> Result<usize> {
            field(j)?
                .parse()
                .map_err(|_| Error::parse(i + 2, "invalid integer"))
        };
        rows.push(FoldResult {
            scheme: field(0)?.parse()?,
            train_size: num(1)?,
            fold: num(2)?,
            macro_f1: field(3)?
                .parse()
                .map_err(|_| Error::parse(i + 2, "invalid macro_f1"))?,
        });
    }
    Ok(ResultsTable { rows })
}
