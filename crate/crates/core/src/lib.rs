/*!
Category-aware term weighting for word-embedding text classification.

A document is represented once per category: every token's embedding is scaled by the token's
weight in that category and the scaled embeddings are summed. The `k` per-category sums are
concatenated into a single `k × d` feature vector and fed to a multinomial logistic regression.

Four weighting schemes are available through [`Scheme`]:

* `tfcr` — term frequency within the category times the category ratio of the word,
  `|w_c|² / (N_c · |w|)`. Frequent words that are exclusive to a category get weights close to 1.
* `tfidf` — term frequency times `ln(k / cf(w))`, where each category acts as one document.
* `kld` — the pointwise contribution of the word to the divergence between the in-category and
  out-of-category unigram distributions, clamped at zero.
* `none` — the unweighted baseline (sum or mean of embeddings).

The [`harness`] module runs cross-validated learning curves over nested training subsets and
writes CSV/JSON results.
*/

pub mod clf;
pub mod corpus;
pub mod embed;
mod error;
pub mod harness;
pub mod repr;
pub mod synth;
pub mod tokenize;
pub mod weights;

pub use clf::{macro_f1, LogRegModel, TrainConfig};
pub use corpus::{FoldAssignment, LabelSet, LabeledCorpus, LabeledDocument, SubsetChain};
pub use embed::{EmbeddingFormat, EmbeddingModel};
pub use error::{Error, Result};
pub use harness::{ExperimentConfig, ResultsTable};
pub use repr::{BaselineMode, FeatureVector, Layout};
pub use tokenize::{tokenize, TokenSequence, TokenizerConfig};
pub use weights::{CountTable, Scheme, SmoothingConfig, WeightTable};

/// Name of the pseudo-random generator behind every seeded operation, recorded in run manifests.
pub const PRNG_NAME: &str = "ChaCha8Rng";

pub(crate) fn seeded_rng(seed: u64) -> rand_chacha::ChaCha8Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
