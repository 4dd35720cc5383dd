//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line each and exits non-zero if
//! any criterion fails.
//!
//! Criterion 8 needs external data: set `TFCR_20NG` to a 20 Newsgroups corpus file (`.tsv`,
//! `.csv` or `.jsonl`, label + text) and `TFCR_GLOVE` to a GloVe or word2vec text file with at
//! least 100 dimensions. Run it with `--release`; it trains 80 models on ~18k documents.

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tfcr::clf::{self, SoftmaxObjective};
use tfcr::corpus::{self, CorpusFormat, LabelSet, LabeledCorpus};
use tfcr::embed::{self, EmbeddingFormat, EmbeddingModel};
use tfcr::harness::{self, Experiment, ExperimentConfig};
use tfcr::repr::{self, BaselineMode};
use tfcr::synth::SyntheticSpec;
use tfcr::weights::{self, CountTable, Scheme, SmoothingConfig, WeightTable};
use tfcr::TokenSequence;

type Outcome = Result<String, String>;

macro_rules! ensure {
	($cond:expr, $($fmt:tt)+) => {
		if !$cond {
			return Err(format!($($fmt)+));
		}
	};
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn seq(tokens: &[&str]) -> TokenSequence {
    tokens.iter().copied().collect()
}

fn labels(k: usize) -> LabelSet {
    LabelSet::new((0..k).map(|c| format!("c{c}"))).unwrap()
}

fn count(docs: &[(TokenSequence, usize)], k: usize) -> CountTable {
    weights::count_statistics(docs.iter().map(|(t, l)| (t, *l)), &labels(k)).unwrap()
}

// ---------------------------------------------------------------------------------------------
// 1. Weight schemes against a brute-force recount.

struct RandomCorpus {
    k: usize,
    docs: Vec<(Vec<String>, usize)>,
}

fn random_corpus(rng: &mut ChaCha8Rng) -> RandomCorpus {
    let k = rng.random_range(2..=5);
    let vocab = rng.random_range(1..=30);
    let n_docs = rng.random_range(1..=50);
    let docs = (0..n_docs)
        .map(|_| {
            let len = rng.random_range(0..=12);
            let tokens = (0..len)
                .map(|_| format!("v{}", rng.random_range(0..vocab)))
                .collect();
            (tokens, rng.random_range(0..k))
        })
        .collect();
    RandomCorpus { k, docs }
}

/// Scores recomputed from the raw token lists, one (word, category) pair at a time.
fn oracle_scores(
    corpus: &RandomCorpus,
    scheme: Scheme,
    epsilon: f64,
) -> Option<BTreeMap<(String, usize), f64>> {
    let k = corpus.k;
    let mut vocabulary = BTreeSet::new();
    for (tokens, _) in &corpus.docs {
        vocabulary.extend(tokens.iter().cloned());
    }
    let count_in = |w: &str, c: usize| -> u64 {
        let mut n = 0;
        for (tokens, label) in &corpus.docs {
            if *label == c {
                for t in tokens {
                    if t == w {
                        n += 1;
                    }
                }
            }
        }
        n
    };
    let n_c = |c: usize| -> u64 {
        corpus
            .docs
            .iter()
            .filter(|(_, l)| *l == c)
            .map(|(t, _)| t.len() as u64)
            .sum()
    };
    let grand_total: u64 = corpus.docs.iter().map(|(t, _)| t.len() as u64).sum();
    if scheme == Scheme::Kld && (0..k).any(|c| grand_total - n_c(c) == 0) {
        return None;
    }
    let mut out = BTreeMap::new();
    for w in &vocabulary {
        let w_total: u64 = (0..k).map(|c| count_in(w, c)).sum();
        let cf = (0..k).filter(|&c| count_in(w, c) > 0).count();
        for c in 0..k {
            let wc = count_in(w, c);
            let nc = n_c(c);
            let score = if wc == 0 {
                0.0
            } else {
                match scheme {
                    Scheme::Tfcr => (wc * wc) as f64 / (nc as f64 * w_total as f64),
                    Scheme::Tfidf => wc as f64 / nc as f64 * (k as f64 / cf as f64).ln(),
                    Scheme::Kld => {
                        let p = wc as f64 / nc as f64;
                        let q = (w_total - wc) as f64 / (grand_total - nc) as f64;
                        (p * ((p + epsilon) / (q + epsilon)).ln()).max(0.0)
                    }
                    Scheme::None => 1.0,
                }
            };
            out.insert((w.clone(), c), score);
        }
    }
    Some(out)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let smoothing = SmoothingConfig::default();
    let mut rng = rng(1);
    let mut pairs_checked = 0usize;
    let mut max_kld_diff = 0.0f64;
    for trial in 0..100 {
        let corpus = random_corpus(&mut rng);
        let docs: Vec<(TokenSequence, usize)> = corpus
            .docs
            .iter()
            .map(|(t, l)| (t.iter().cloned().collect(), *l))
            .collect();
        let counts = count(&docs, corpus.k);
        for scheme in [Scheme::Tfcr, Scheme::Tfidf, Scheme::Kld] {
            let table = weights::build_weight_table(&counts, scheme, &smoothing);
            let expected = oracle_scores(&corpus, scheme, smoothing.epsilon);
            let (table, expected) = match (table, expected) {
                (Ok(t), Some(e)) => (t, e),
                (Err(_), None) => continue,
                (t, e) => {
                    return Err(format!(
                        "trial {trial} {scheme}: table ok={} but oracle defined={}",
                        t.is_ok(),
                        e.is_some()
                    ))
                }
            };
            ensure!(
                table.len() == expected.len() / corpus.k,
                "trial {trial} {scheme}: vocabulary size differs"
            );
            for ((w, c), want) in &expected {
                let got = table.score(w, *c);
                let pointwise = match scheme {
                    Scheme::Tfcr => counts.tfcr(w, *c),
                    Scheme::Tfidf => counts.tfidf(w, *c),
                    _ => counts.kld(w, *c, &smoothing),
                }
                .map_err(|e| e.to_string())?;
                if scheme == Scheme::Kld {
                    let diff = (got - want).abs().max((pointwise - want).abs());
                    max_kld_diff = max_kld_diff.max(diff);
                    ensure!(
                        diff < 1e-12,
                        "trial {trial} kld({w},{c}) = {got}, oracle {want}"
                    );
                } else {
                    ensure!(
                        got == *want && pointwise == *want,
                        "trial {trial} {scheme}({w},{c}) = {got}/{pointwise}, oracle {want}"
                    );
                }
                pairs_checked += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!(
        "{pairs_checked} scores match; max |Δ| KLD {max_kld_diff:.1e}; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------------------------
// 2. TF-CR invariants.

fn repeat(word: &str, n: u64) -> Vec<&str> {
    vec![word; n as usize]
}

fn criterion_2() -> Outcome {
    let mut rng = rng(2);
    let mut configs = 0;

    // Random count configurations: CR sums to one, TF-CR bounded by TF and CR.
    for _ in 0..1000 {
        let k = rng.random_range(2..=6);
        let vocab = rng.random_range(1..=8);
        let mut docs = Vec::new();
        for c in 0..k {
            let mut tokens = Vec::new();
            for v in 0..vocab {
                let n = if rng.random_bool(0.3) {
                    0
                } else {
                    rng.random_range(1..=20)
                };
                tokens.extend(std::iter::repeat_n(format!("v{v}"), n));
            }
            docs.push((tokens.into_iter().collect::<TokenSequence>(), c));
        }
        let counts = count(&docs, k);
        for w in counts.words() {
            let cr_sum: f64 = (0..k).map(|c| counts.cr(w, c).unwrap()).sum();
            ensure!((cr_sum - 1.0).abs() < 1e-12, "ΣCR({w}) = {cr_sum}");
            for c in 0..k {
                let (tf, cr, tfcr) = (
                    counts.tf(w, c).unwrap(),
                    counts.cr(w, c).unwrap(),
                    counts.tfcr(w, c).unwrap(),
                );
                ensure!(
                    (0.0..=1.0).contains(&tfcr) && tfcr <= tf.min(cr),
                    "tfcr {tfcr} tf {tf} cr {cr}"
                );
                let wc = counts.word_count(w, c).unwrap();
                let exclusive =
                    wc == counts.category_total(c).unwrap() && wc == counts.word_total(w);
                ensure!(
                    (tfcr == 1.0) == exclusive,
                    "tfcr {tfcr} exclusive {exclusive}"
                );
            }
        }
        configs += 1;
    }

    // Exclusive single-word category.
    for n in 1..=50 {
        let docs = [(seq(&repeat("w", n)), 0), (seq(&["x", "y"]), 1)];
        let counts = count(&docs, 2);
        ensure!(
            counts.tfcr("w", 0).unwrap() == 1.0,
            "exclusive word with {n} occurrences"
        );
    }

    // Strictly increasing in |w_c| with N_c and |w| fixed: c0 holds wc copies of w plus filler,
    // c1 holds the remaining |w| − wc copies.
    for _ in 0..1000 {
        let n_c = rng.random_range(2..=60u64);
        let w_total = rng.random_range(2..=60u64);
        let mut previous = 0.0;
        for wc in 1..=n_c.min(w_total) {
            let mut c0 = repeat("w", wc);
            c0.extend(repeat("f", n_c - wc));
            let mut c1 = repeat("w", w_total - wc);
            c1.push("g");
            let counts = count(&[(seq(&c0), 0), (seq(&c1), 1)], 2);
            ensure!(
                counts.category_total(0).unwrap() == n_c && counts.word_total("w") == w_total,
                "construction drifted"
            );
            let score = counts.tfcr("w", 0).unwrap();
            ensure!(
                score > previous,
                "not increasing at |w_c|={wc}, N_c={n_c}, |w|={w_total}"
            );
            previous = score;
        }
        configs += 1;
    }

    // Equal |w_c| and N_c: the word with smaller |w| scores strictly higher.
    for _ in 0..1000 {
        let wc = rng.random_range(1..=20u64);
        let filler = rng.random_range(0..=20u64);
        let extra_a = rng.random_range(0..=30u64);
        let extra_b = extra_a + rng.random_range(1..=30u64);
        let mut c0 = repeat("a", wc);
        c0.extend(repeat("b", wc));
        c0.extend(repeat("f", filler));
        let mut c1 = repeat("a", extra_a);
        c1.extend(repeat("b", extra_b));
        let counts = count(&[(seq(&c0), 0), (seq(&c1), 1)], 2);
        let (a, b) = (counts.tfcr("a", 0).unwrap(), counts.tfcr("b", 0).unwrap());
        ensure!(
            a > b,
            "|w_c|={wc}: |a|={} |b|={} gives {a} <= {b}",
            wc + extra_a,
            wc + extra_b
        );
        configs += 1;
    }
    Ok(format!("{configs} count configurations"))
}

// ---------------------------------------------------------------------------------------------
// 3. Representation invariants.

/// Values on a 1/8 grid so that every product and sum below is exact in f64.
fn dyadic(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    rng.random_range(lo * 8..=hi * 8) as f64 / 8.0
}

fn random_setup(rng: &mut ChaCha8Rng, exact: bool) -> (WeightTable, EmbeddingModel, Vec<String>) {
    let k = rng.random_range(2..=5);
    let d = rng.random_range(1..=6);
    let vocab: Vec<String> = (0..rng.random_range(2..=15))
        .map(|i| format!("t{i}"))
        .collect();
    let label_set = labels(k);
    let mut tsv = String::new();
    let mut model = EmbeddingModel::new("random", d);
    for (i, word) in vocab.iter().enumerate() {
        // Leave a few words without weights or without vectors.
        if i % 5 != 4 {
            for c in 0..k {
                let w = if exact {
                    dyadic(rng, 0, 2)
                } else {
                    rng.random_range(0.0..1.0)
                };
                tsv.push_str(&format!("{word}\tc{c}\t{w}\n"));
            }
        }
        if i % 7 != 6 {
            let v: Vec<f64> = (0..d)
                .map(|_| {
                    if exact {
                        dyadic(rng, -2, 2)
                    } else {
                        rng.random_range(-1.0..1.0)
                    }
                })
                .collect();
            model.insert(word.clone(), &v).unwrap();
        }
    }
    let weights = WeightTable::read_tsv(tsv.as_bytes(), &label_set, Scheme::Tfcr).unwrap();
    (weights, model, vocab)
}

fn random_doc(rng: &mut ChaCha8Rng, vocab: &[String]) -> Vec<String> {
    let mut doc: Vec<String> = (0..rng.random_range(0..=10))
        .map(|_| vocab[rng.random_range(0..vocab.len())].clone())
        .collect();
    if rng.random_bool(0.2) {
        doc.push("unknown".into());
    }
    doc
}

fn criterion_3() -> Outcome {
    let mut rng = rng(3);
    let trials = 500;
    for trial in 0..trials {
        let exact = trial % 2 == 0;
        let (weights, model, vocab) = random_setup(&mut rng, exact);
        let (k, d) = (weights.k(), model.dim());
        let doc1 = random_doc(&mut rng, &vocab);
        let doc2 = random_doc(&mut rng, &vocab);
        let v1 = repr::weighted_repr(&doc1.iter().cloned().collect(), &weights, &model);
        ensure!(v1.len() == k * d, "length {} != k·d = {}", v1.len(), k * d);

        let mut shuffled = doc1.clone();
        for i in (1..shuffled.len()).rev() {
            shuffled.swap(i, rng.random_range(0..=i));
        }
        let vs = repr::weighted_repr(&shuffled.into_iter().collect(), &weights, &model);
        ensure!(vs == v1, "trial {trial}: permutation changed the vector");

        if exact {
            let v2 = repr::weighted_repr(&doc2.iter().cloned().collect(), &weights, &model);
            let joined: TokenSequence = doc1.iter().chain(&doc2).cloned().collect();
            let v12 = repr::weighted_repr(&joined, &weights, &model);
            let summed: Vec<f64> = v1
                .values()
                .iter()
                .zip(v2.values())
                .map(|(a, b)| a + b)
                .collect();
            ensure!(
                v12.values() == summed,
                "trial {trial}: not additive over concatenation"
            );
        }

        let c = rng.random_range(0..k);
        let mut zeroed = weights.clone();
        zeroed.zero_category(c);
        let vz = repr::weighted_repr(&doc1.iter().cloned().collect(), &zeroed, &model);
        for block in 0..k {
            if block == c {
                ensure!(
                    vz.block(block).unwrap().iter().all(|&x| x == 0.0),
                    "block {c} not zeroed"
                );
            } else {
                ensure!(
                    vz.block(block) == v1.block(block),
                    "block {block} changed when zeroing {c}"
                );
            }
        }
    }

    // Unweighted weights: every block equals the plain sum over training-vocabulary tokens.
    for _ in 0..200 {
        let (_, model, vocab) = random_setup(&mut rng, false);
        let k = rng.random_range(2..=4);
        let training: Vec<(TokenSequence, usize)> = (0..4)
            .map(|i| {
                (
                    random_doc(&mut rng, &vocab[..vocab.len() / 2 + 1])
                        .into_iter()
                        .collect(),
                    i % k,
                )
            })
            .collect();
        let counts = count(&training, k);
        let none = weights::build_weight_table(&counts, Scheme::None, &SmoothingConfig::default())
            .unwrap();
        let doc = random_doc(&mut rng, &vocab);
        let known: TokenSequence = doc
            .iter()
            .filter(|t| none.scores(t).is_some())
            .cloned()
            .collect();
        let weighted = repr::weighted_repr(&doc.into_iter().collect(), &none, &model);
        let plain = repr::unweighted_repr(&known, &model, BaselineMode::Sum);
        for c in 0..k {
            ensure!(
                weighted.block(c) == Some(plain.values()),
                "block {c} differs from the plain sum"
            );
        }
    }
    Ok(format!(
        "{trials} random documents and weight tables, plus 200 unweighted checks"
    ))
}

// ---------------------------------------------------------------------------------------------
// 4. Gradient check.

fn criterion_4() -> Outcome {
    let mut rng = rng(4);
    let (n, p, k) = (20, 8, 3);
    let x = Array2::from_shape_fn((n, p), |_| rng.random_range(-2.0..2.0));
    let y: Vec<usize> = (0..n)
        .map(|i| if i < k { i } else { rng.random_range(0..k) })
        .collect();
    let objective = SoftmaxObjective::new(x.view(), &y, k, 0.1);
    let h = 1e-5;
    let mut worst = 0.0f64;
    for point in 0..10 {
        let w = Array2::from_shape_fn((k, p), |_| rng.random_range(-1.0..1.0));
        let b = Array1::from_shape_fn(k, |_| rng.random_range(-1.0..1.0));
        let (_, gw, gb) = objective.loss_and_gradient(&w, &b);
        let mut analytic = Vec::new();
        let mut numeric = Vec::new();
        for idx in 0..k * p {
            let (r, c) = (idx / p, idx % p);
            let mut plus = w.clone();
            plus[[r, c]] += h;
            let mut minus = w.clone();
            minus[[r, c]] -= h;
            numeric.push((objective.loss(&plus, &b) - objective.loss(&minus, &b)) / (2.0 * h));
            analytic.push(gw[[r, c]]);
        }
        for j in 0..k {
            let mut plus = b.clone();
            plus[j] += h;
            let mut minus = b.clone();
            minus[j] -= h;
            numeric.push((objective.loss(&w, &plus) - objective.loss(&w, &minus)) / (2.0 * h));
            analytic.push(gb[j]);
        }
        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff: Vec<f64> = analytic.iter().zip(&numeric).map(|(a, b)| a - b).collect();
        let rel = norm(&diff) / norm(&analytic).max(norm(&numeric)).max(1e-300);
        worst = worst.max(rel);
        ensure!(rel < 1e-4, "point {point}: relative error {rel:.3e}");
    }
    Ok(format!("max relative error {worst:.2e} over 10 points"))
}

// ---------------------------------------------------------------------------------------------
// 5. Macro-F1.

fn criterion_5() -> Outcome {
    let f1 =
        clf::macro_f1(&[0, 0, 1, 1, 2, 2], &[0, 1, 1, 1, 2, 0], 3).map_err(|e| e.to_string())?;
    ensure!((f1 - 0.6556).abs() < 1e-4, "3-class example gave {f1}");
    let perfect = clf::macro_f1(&[0, 1, 1, 0, 1], &[0, 1, 1, 0, 1], 2).unwrap();
    ensure!(perfect == 1.0, "perfect prediction gave {perfect}");
    let inverted = clf::macro_f1(&[0, 1, 1, 0, 1], &[1, 0, 0, 1, 0], 2).unwrap();
    ensure!(inverted == 0.0, "inverted prediction gave {inverted}");
    Ok(format!(
        "3-class {f1:.4}, perfect {perfect}, inverted {inverted}"
    ))
}

// ---------------------------------------------------------------------------------------------
// 6. Separable synthetic data end to end.

fn separable() -> (LabeledCorpus, EmbeddingModel) {
    let spec = SyntheticSpec {
        n_docs: 500,
        n_categories: 2,
        vocab_per_category: 50,
        dim: 20,
        seed: 6,
        ..SyntheticSpec::default()
    };
    (spec.corpus().unwrap(), spec.embeddings())
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let (corpus, model) = separable();
    let config = ExperimentConfig {
        schemes: vec![Scheme::Tfcr, Scheme::None],
        sizes: vec![200],
        n_folds: 5,
        base_seed: 6,
        ..ExperimentConfig::default()
    };
    let outcome = harness::run_grid(&corpus, &model, &config).map_err(|e| e.to_string())?;
    ensure!(
        outcome.n_failed() == 0,
        "{} cells failed",
        outcome.n_failed()
    );
    let tfcr = outcome.table.aggregate(Scheme::Tfcr, 200).unwrap().mean;
    let none = outcome.table.aggregate(Scheme::None, 200).unwrap().mean;
    let elapsed = start.elapsed();
    ensure!(tfcr >= 0.95, "tfcr mean macro-F1 {tfcr}");
    ensure!(tfcr >= none, "tfcr {tfcr} below unweighted {none}");
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "tfcr {tfcr:.4}, unweighted {none:.4}; {:.2}s",
        elapsed.as_secs_f64()
    ))
}

// ---------------------------------------------------------------------------------------------
// 7. Leakage and determinism.

fn criterion_7() -> Outcome {
    let spec = SyntheticSpec {
        n_docs: 300,
        n_categories: 3,
        vocab_per_category: 30,
        shared_vocab: 30,
        shared_rate: 0.5,
        dim: 10,
        seed: 7,
        ..SyntheticSpec::default()
    };
    let (corpus, model) = (spec.corpus().unwrap(), spec.embeddings());
    let config = ExperimentConfig {
        sizes: vec![60, 120],
        n_folds: 4,
        base_seed: 70,
        ..ExperimentConfig::default()
    };
    let experiment = Experiment::prepare(&corpus, &model, &config).map_err(|e| e.to_string())?;
    let mut tables = 0;
    for fold in 0..config.n_folds {
        // The same corpus with the test fold removed.
        let kept: Vec<usize> = experiment.folds().train_ids(fold);
        let reduced = LabeledCorpus::from_pairs(kept.iter().map(|&id| {
            let doc = &corpus.documents()[id];
            (
                corpus.label_set().labels()[doc.label].clone(),
                doc.text.clone(),
            )
        }))
        .unwrap();
        ensure!(
            reduced.label_set() == corpus.label_set(),
            "label set changed"
        );
        let position: BTreeMap<usize, usize> =
            kept.iter().enumerate().map(|(i, &id)| (id, i)).collect();
        let tokens: Vec<TokenSequence> = reduced
            .documents()
            .iter()
            .map(|d| tfcr::tokenize(&d.text, &config.tokenizer))
            .collect();
        for &size in &config.sizes {
            let ids = experiment.training_ids(size, fold).unwrap();
            for &scheme in &[Scheme::Tfidf, Scheme::Kld, Scheme::Tfcr] {
                let inside = experiment.weights_for(scheme, size, fold).unwrap().unwrap();
                let counts = weights::count_statistics(
                    ids.iter().map(|id| {
                        let j = position[id];
                        (&tokens[j], reduced.documents()[j].label)
                    }),
                    reduced.label_set(),
                )
                .unwrap();
                let outside =
                    weights::build_weight_table(&counts, scheme, &config.smoothing).unwrap();
                ensure!(
                    inside == outside,
                    "fold {fold} size {size} {scheme}: weights differ"
                );
                tables += 1;
            }
        }
    }

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    for run in 0..2 {
        let outcome = harness::run_grid(&corpus, &model, &config).map_err(|e| e.to_string())?;
        let out = dir.path().join(format!("run{run}"));
        harness::emit_results(&outcome.table, &outcome.manifest, &out)
            .map_err(|e| e.to_string())?;
        bytes.push(std::fs::read(out.join("results.csv")).unwrap());
    }
    ensure!(
        bytes[0] == bytes[1],
        "results.csv differs between identical runs"
    );
    Ok(format!(
        "{tables} weight tables unchanged; results.csv byte-identical ({} bytes)",
        bytes[0].len()
    ))
}

// ---------------------------------------------------------------------------------------------
// 8. Directional replication on 20 Newsgroups.

fn env_path(name: &str) -> Result<PathBuf, String> {
    std::env::var_os(name)
		.map(PathBuf::from)
		.filter(|p| p.exists())
		.ok_or_else(|| format!("{name} is not set to an existing file; the 20 Newsgroups corpus and a GloVe model are required"))
}

fn criterion_8() -> Outcome {
    let dataset = env_path("TFCR_20NG")?;
    let vectors = env_path("TFCR_GLOVE")?;
    let format = match dataset.extension().and_then(|e| e.to_str()) {
        Some("csv") => CorpusFormat::Csv,
        Some("jsonl") => CorpusFormat::Jsonl,
        _ => CorpusFormat::Tsv,
    };
    let corpus = corpus::load_corpus(&dataset, format).map_err(|e| e.to_string())?;
    let model =
        embed::load_embeddings(&vectors, EmbeddingFormat::Auto).map_err(|e| e.to_string())?;
    ensure!(
        model.dim() >= 100,
        "embedding dimension {} < 100",
        model.dim()
    );
    let config = ExperimentConfig {
        schemes: Scheme::ALL.to_vec(),
        sizes: vec![1000, 5000],
        n_folds: 10,
        base_seed: 2020,
        ..ExperimentConfig::default()
    };
    let outcome = harness::run_grid(&corpus, &model, &config).map_err(|e| e.to_string())?;
    ensure!(
        outcome.n_failed() == 0,
        "{} cells failed",
        outcome.n_failed()
    );
    let mean = |scheme, size| outcome.table.aggregate(scheme, size).unwrap().mean;
    let (tfcr, tfidf, kld) = (
        mean(Scheme::Tfcr, 5000),
        mean(Scheme::Tfidf, 5000),
        mean(Scheme::Kld, 5000),
    );
    let small = (mean(Scheme::Tfcr, 1000), mean(Scheme::None, 1000));
    let note = format!(
		"at 5000: tfcr {tfcr:.3}, tfidf {tfidf:.3}, kld {kld:.3}; at 1000: tfcr {:.3} vs unweighted {:.3} (informational)",
		small.0, small.1
	);
    ensure!(
        tfcr - tfidf >= 0.02 && tfcr - kld >= 0.02,
        "margin below 0.02: {note}"
    );
    Ok(note)
}

// ---------------------------------------------------------------------------------------------

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 weight schemes match brute-force oracle", criterion_1),
        ("2 TF-CR invariants", criterion_2),
        ("3 representation invariants", criterion_3),
        ("4 softmax gradient vs finite differences", criterion_4),
        ("5 macro-F1 oracle", criterion_5),
        ("6 separable synthetic end-to-end", criterion_6),
        ("7 leakage guard and determinism", criterion_7),
        ("8 20 Newsgroups directional replication", criterion_8),
    ];
    panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (name, run) in criteria {
        let outcome = panic::catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("[PASS] criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("[FAIL] criterion {name}: {detail}");
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
