use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use tfcr::clf::{self, LogRegModel, TrainConfig};
use tfcr::corpus::{self, CorpusFormat, LabeledCorpus};
use tfcr::embed::{self, EmbeddingFormat, EmbeddingModel};
use tfcr::harness::{self, ExperimentConfig};
use tfcr::repr::{self, BaselineMode, Featurizer};
use tfcr::tokenize::{tokenize, TokenSequence, TokenizerConfig};
use tfcr::weights::{self, Scheme, SmoothingConfig, WeightTable};

#[derive(Parser)]
#[command(
    name = "tfcr",
    version,
    about = "Category-weighted embedding features for text classification"
)]
struct Cli {
    /// Base seed; overrides the configuration file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for grid cells (0 = all cores); overrides the configuration file.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the cross-validated learning-curve grid described by a config file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute a weight table from a dataset and write it as TSV.
    Weights {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        scheme: Scheme,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write document feature vectors as TSV (label, then values).
    Repr {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a classifier on a whole dataset.
    Train {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long)]
        model_out: PathBuf,
        /// Where to store the weights computed from the training data.
        #[arg(long)]
        weights_out: Option<PathBuf>,
        #[arg(long, default_value_t = TrainConfig::default().l2_lambda)]
        l2_lambda: f64,
        #[arg(long, default_value_t = TrainConfig::default().learning_rate)]
        learning_rate: f64,
        #[arg(long, default_value_t = TrainConfig::default().max_epochs)]
        max_epochs: usize,
        #[arg(long, default_value_t = TrainConfig::default().tolerance)]
        tolerance: f64,
    },
    /// Score a trained classifier on a dataset and print macro-F1.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        features: FeatureArgs,
        #[arg(long)]
        model: PathBuf,
    },
}

#[derive(Args)]
struct DataArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value = "tsv")]
    format: CorpusFormat,
    /// Keep the original letter case.
    #[arg(long)]
    no_lowercase: bool,
    #[arg(long, default_value_t = 1)]
    min_token_len: usize,
    /// KLD smoothing constant.
    #[arg(long, default_value_t = SmoothingConfig::default().epsilon)]
    epsilon: f64,
}

#[derive(Args)]
struct FeatureArgs {
    #[arg(long)]
    embeddings: PathBuf,
    #[arg(long, default_value = "auto")]
    embedding_format: EmbeddingFormat,
    /// `none` selects the unweighted baseline.
    #[arg(long, default_value = "tfcr")]
    scheme: Scheme,
    /// Read weights from this TSV instead of computing them from the dataset.
    #[arg(long)]
    weights: Option<PathBuf>,
    #[arg(long, default_value = "mean")]
    baseline_mode: BaselineMode,
    #[arg(long)]
    l2_normalize: bool,
}

struct Loaded {
    corpus: LabeledCorpus,
    tokens: Vec<TokenSequence>,
    smoothing: SmoothingConfig,
}

impl DataArgs {
    fn load(&self) -> Result<Loaded> {
        let corpus = corpus::load_corpus(&self.dataset, self.format)
            .with_context(|| format!("loading dataset {}", self.dataset.display()))?;
        let config = TokenizerConfig {
            lowercase: !self.no_lowercase,
            min_token_len: self.min_token_len,
        };
        let tokens = corpus
            .documents()
            .iter()
            .map(|d| tokenize(&d.text, &config))
            .collect();
        Ok(Loaded {
            corpus,
            tokens,
            smoothing: SmoothingConfig {
                epsilon: self.epsilon,
            },
        })
    }
}

impl Loaded {
    fn weights(&self, scheme: Scheme) -> Result<WeightTable> {
        let counts = weights::count_statistics(
            self.tokens
                .iter()
                .zip(self.corpus.documents())
                .map(|(t, d)| (t, d.label)),
            self.corpus.label_set(),
        )?;
        Ok(weights::build_weight_table(
            &counts,
            scheme,
            &self.smoothing,
        )?)
    }

    fn labels(&self) -> Vec<usize> {
        self.corpus.labels()
    }
}

fn load_model(args: &FeatureArgs) -> Result<EmbeddingModel> {
    let model = embed::load_embeddings(&args.embeddings, args.embedding_format)
        .with_context(|| format!("loading embeddings {}", args.embeddings.display()))?;
    let stats = model.stats();
    if stats.duplicates > 0 {
        eprintln!("warning: {} duplicate words ignored", stats.duplicates);
    }
    if let Some(count) = stats.header_count_mismatch {
        eprintln!(
            "warning: header announces {count} words, read {}",
            model.len()
        );
    }
    Ok(model)
}

/// Weights for the feature configuration, or `None` for the unweighted baseline.
fn feature_weights(args: &FeatureArgs, data: &Loaded) -> Result<Option<WeightTable>> {
    if args.scheme == Scheme::None {
        return Ok(None);
    }
    match &args.weights {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let table =
                WeightTable::read_tsv(BufReader::new(file), data.corpus.label_set(), args.scheme)?;
            Ok(Some(table))
        }
        None => data.weights(args.scheme).map(Some),
    }
}

fn featurizer<'a>(args: &FeatureArgs, weights: &'a Option<WeightTable>) -> Featurizer<'a> {
    match weights {
        Some(weights) => Featurizer::Weighted {
            weights,
            l2_normalize: args.l2_normalize,
        },
        None => Featurizer::Baseline(args.baseline_mode),
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, out } => {
            let mut cfg = ExperimentConfig::from_file(&config)
                .with_context(|| format!("reading config {}", config.display()))?;
            if let Some(seed) = cli.seed {
                cfg.base_seed = seed;
            }
            if let Some(jobs) = cli.jobs {
                cfg.jobs = jobs;
            }
            if let Some(out) = out {
                cfg.output_dir = Some(out);
            }
            let dir = cfg
                .output_dir
                .clone()
                .unwrap_or_else(|| PathBuf::from("results"));
            let outcome = harness::run_experiment(&cfg)?;
            if outcome.table.is_empty() {
                harness::write_manifest(&outcome.manifest, &dir)?;
                bail!(
                    "every cell failed; see {}",
                    dir.join("manifest.json").display()
                );
            }
            harness::emit_results(&outcome.table, &outcome.manifest, &dir)?;
            println!("scheme\ttrain_size\tmean_macro_f1\tstd_macro_f1\tfolds");
            for a in outcome.table.aggregates() {
                println!(
                    "{}\t{}\t{:.4}\t{:.4}\t{}",
                    a.scheme, a.train_size, a.mean, a.std, a.n_folds
                );
            }
            for failure in &outcome.manifest.failures {
                eprintln!(
                    "failed: {} size {} fold {}: {}",
                    failure.key.scheme,
                    failure.key.train_size,
                    failure.key.fold,
                    failure.error.as_deref().unwrap_or("")
                );
            }
            eprintln!("results written to {}", dir.display());
            Ok(if outcome.n_failed() == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            })
        }
        Command::Weights { data, scheme, out } => {
            let loaded = data.load()?;
            let table = loaded.weights(scheme)?;
            let mut writer = create(&out)?;
            table.write_tsv(&mut writer)?;
            writer.flush()?;
            eprintln!(
                "{} words × {} categories written to {}",
                table.len(),
                table.k(),
                out.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Repr {
            data,
            features,
            out,
        } => {
            let loaded = data.load()?;
            let model = load_model(&features)?;
            let weights = feature_weights(&features, &loaded)?;
            let matrix = featurizer(&features, &weights).matrix(loaded.tokens.iter(), &model);
            let names = loaded.corpus.label_set().labels();
            let labels: Vec<&str> = loaded.labels().iter().map(|&l| names[l].as_str()).collect();
            let mut writer = create(&out)?;
            repr::write_feature_tsv(&mut writer, &labels, &matrix)?;
            writer.flush()?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Train {
            data,
            features,
            model_out,
            weights_out,
            l2_lambda,
            learning_rate,
            max_epochs,
            tolerance,
        } => {
            let loaded = data.load()?;
            let model = load_model(&features)?;
            let weights = feature_weights(&features, &loaded)?;
            let x = featurizer(&features, &weights).matrix(loaded.tokens.iter(), &model);
            let cfg = TrainConfig {
                l2_lambda,
                learning_rate,
                max_epochs,
                tolerance,
                seed: cli.seed.unwrap_or(0),
                ..TrainConfig::default()
            };
            let classifier =
                clf::train(x.view(), &loaded.labels(), loaded.corpus.label_set(), &cfg)?;
            let mut writer = create(&model_out)?;
            classifier.write_text(&mut writer)?;
            writer.flush()?;
            if let (Some(path), Some(table)) = (weights_out, &weights) {
                let mut writer = create(&path)?;
                table.write_tsv(&mut writer)?;
                writer.flush()?;
            }
            let losses = classifier.loss_history();
            eprintln!(
                "trained on {} documents: loss {:.6} -> {:.6} in {} steps",
                loaded.corpus.len(),
                losses[0],
                losses[losses.len() - 1],
                losses.len() - 1
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Eval {
            data,
            features,
            model,
        } => {
            let loaded = data.load()?;
            if features.scheme != Scheme::None && features.weights.is_none() {
                bail!("--weights is required to evaluate a weighted model");
            }
            let embeddings = load_model(&features)?;
            let file =
                File::open(&model).with_context(|| format!("opening {}", model.display()))?;
            let classifier = LogRegModel::read_text(BufReader::new(file))?;
            if classifier.label_set() != loaded.corpus.label_set() {
                bail!("dataset labels differ from the model's labels");
            }
            let weights = feature_weights(&features, &loaded)?;
            let x = featurizer(&features, &weights).matrix(loaded.tokens.iter(), &embeddings);
            let pred = classifier.predict(x.view())?;
            let f1 = clf::macro_f1(&loaded.labels(), &pred, classifier.label_set().k())?;
            println!("{f1}");
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
