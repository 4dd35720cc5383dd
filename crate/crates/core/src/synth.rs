//! Seeded synthetic corpora and embeddings for tests, demos and smoke runs.
//!
//! Every category owns a private vocabulary (`c<cat>w<i>`). A document of category `c` draws
//! each token from that vocabulary, except that with probability `shared_rate` the token comes
//! from a vocabulary common to all categories (`s<i>`). Embeddings are uniform in `[-1, 1]^d`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::LabeledCorpus;
use crate::embed::EmbeddingModel;
use crate::{seeded_rng, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticSpec {
    pub n_docs: usize,
    pub n_categories: usize,
    pub vocab_per_category: usize,
    pub shared_vocab: usize,
    /// Probability that a token is drawn from the shared vocabulary.
    pub shared_rate: f64,
    pub min_doc_len: usize,
    pub max_doc_len: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n_docs: 500,
            n_categories: 2,
            vocab_per_category: 50,
            shared_vocab: 0,
            shared_rate: 0.0,
            min_doc_len: 5,
            max_doc_len: 15,
            dim: 20,
            seed: 0,
        }
    }
}

fn category_name(c: usize) -> String {
    format!("cat{c:02}")
}

impl SyntheticSpec {
    /// Documents are assigned to categories round-robin, so classes are balanced.
    pub fn corpus(&self) -> Result<LabeledCorpus> {
        let mut rng = seeded_rng(self.seed);
        let shared_rate = if self.shared_vocab == 0 {
            0.0
        } else {
            self.shared_rate.clamp(0.0, 1.0)
        };
        let docs = (0..self.n_docs).map(|i| {
            let c = i % self.n_categories;
            let len = rng.random_range(self.min_doc_len..=self.max_doc_len.max(self.min_doc_len));
            let words: Vec<String> = (0..len)
                .map(|_| {
                    if rng.random_bool(shared_rate) {
                        format!("s{}", rng.random_range(0..self.shared_vocab))
                    } else {
                        format!(
                            "c{c}w{}",
                            rng.random_range(0..self.vocab_per_category.max(1))
                        )
                    }
                })
                .collect();
            (category_name(c), words.join(" "))
        });
        LabeledCorpus::from_pairs(docs.collect::<Vec<_>>())
    }

    /// One vector for every word the corpus can contain.
    pub fn embeddings(&self) -> EmbeddingModel {
        let mut rng = seeded_rng(self.seed ^ 0x9e37_79b9_7f4a_7c15);
        let mut model = EmbeddingModel::new("synthetic", self.dim.max(1));
        let mut vector = vec![0.0; self.dim.max(1)];
        let words = (0..self.n_categories)
            .flat_map(|c| (0..self.vocab_per_category).map(move |i| format!("c{c}w{i}")))
            .chain((0..self.shared_vocab).map(|i| format!("s{i}")));
        for word in words {
            vector
                .iter_mut()
                .for_each(|v| *v = rng.random_range(-1.0..=1.0));
            model.insert(word, &vector).expect("dimension matches");
        }
        model
    }
}
