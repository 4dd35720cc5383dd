//! Tokenizer shared by counting and embedding lookup.

use serde::{Deserialize, Serialize};
use unicode_normalization::UnicodeNormalization;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TokenizerConfig {
    pub lowercase: bool,
    /// Tokens with fewer characters than this are dropped.
    pub min_token_len: usize,
}

impl Default for TokenizerConfig {
    fn default() -> Self {
        TokenizerConfig {
            lowercase: true,
            min_token_len: 1,
        }
    }
}

/// Ordered tokens of one document. Never contains an empty token.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TokenSequence(Vec<String>);

impl TokenSequence {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSequence(tokens.into_iter().filter(|t| !t.is_empty()).collect())
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn into_inner(self) -> Vec<String> {
        self.0
    }
}

impl<S: Into<String>> FromIterator<S> for TokenSequence {
    fn from_iter<I: IntoIterator<Item = S>>(iter: I) -> Self {
        TokenSequence::new(iter.into_iter().map(Into::into).collect())
    }
}

/// NFC-normalizes, optionally lowercases, then splits on maximal runs of characters that are
/// neither letters nor digits.
pub fn tokenize(text: &str, config: &TokenizerConfig) -> TokenSequence {
    let normalized: String = text.nfc().collect();
    let normalized = if config.lowercase {
        // Lowercasing can produce decomposed sequences, so normalize again.
        normalized.to_lowercase().nfc().collect()
    } else {
        normalized
    };
    let min_len = config.min_token_len.max(1);
    TokenSequence(
        normalized
            .split(|c: char| !c.is_alphanumeric())
            .filter(|t| t.chars().count() >= min_len)
            .map(str::to_owned)
            .collect(),
    )
}
