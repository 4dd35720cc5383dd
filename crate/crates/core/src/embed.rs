//! Pre-trained word vectors in word2vec text and GloVe text formats.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmbeddingFormat {
    /// `<vocab_count> <dim>` header line, then one `word v1 .. vd` line per word.
    Word2vecText,
    /// No header; the dimension is taken from the first line.
    GloveText,
    /// A first line of exactly two integers selects `Word2vecText`, anything else `GloveText`.
    #[default]
    Auto,
}

impl FromStr for EmbeddingFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "word2vec_text" | "word2vec" => Ok(EmbeddingFormat::Word2vecText),
            "glove_text" | "glove" => Ok(EmbeddingFormat::GloveText),
            "auto" => Ok(EmbeddingFormat::Auto),
            other => Err(Error::Config(format!("unknown embedding format {other:?}"))),
        }
    }
}

/// Irregularities tolerated while loading.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct LoadStats {
    /// Lines whose word had already been loaded; the first occurrence is kept.
    pub duplicates: usize,
    /// Vocabulary size announced by a word2vec header, when it differs from the number of
    /// vectors actually read.
    pub header_count_mismatch: Option<usize>,
}

impl LoadStats {
    pub fn warnings(&self) -> usize {
        self.duplicates + usize::from(self.header_count_mismatch.is_some())
    }
}

/// Map from word to a `dim`-long vector, stored as one row-major block.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingModel {
    name: String,
    dim: usize,
    words: Vec<String>,
    index: HashMap<String, usize>,
    data: Vec<f64>,
    stats: LoadStats,
}

impl EmbeddingModel {
    pub fn new(name: impl Into<String>, dim: usize) -> Self {
        assert!(dim > 0, "embedding dimension must be positive");
        EmbeddingModel {
            name: name.into(),
            dim,
            words: Vec::new(),
            index: HashMap::new(),
            data: Vec::new(),
            stats: LoadStats::default(),
        }
    }

    /// Adds `word` unless it is already present. Returns whether it was inserted.
    pub fn insert(&mut self, word: impl Into<String>, vector: &[f64]) -> Result<bool> {
        if vector.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: vector.len(),
            });
        }
        let word = word.into();
        if self.index.contains_key(&word) {
            return Ok(false);
        }
        self.index.insert(word.clone(), self.words.len());
        self.words.push(word);
        self.data.extend_from_slice(vector);
        Ok(true)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn stats(&self) -> &LoadStats {
        &self.stats
    }

    /// Exact-match lookup. Out-of-vocabulary tokens return `None`.
    pub fn lookup(&self, token: &str) -> Option<&[f64]> {
        self.index
            .get(token)
            .map(|&i| &self.data[i * self.dim..(i + 1) * self.dim])
    }

    /// Writes the model in GloVe text format. Values use the shortest representation that
    /// parses back to the same `f64`.
    pub fn write_glove_text(&self, mut writer: impl Write) -> std::io::Result<()> {
        for (i, word) in self.words.iter().enumerate() {
            write!(writer, "{word}")?;
            for v in &self.data[i * self.dim..(i + 1) * self.dim] {
                write!(writer, " {v}")?;
            }
            writeln!(writer)?;
        }
        Ok(())
    }
}

pub fn load_embeddings(path: impl AsRef<Path>, format: EmbeddingFormat) -> Result<EmbeddingModel> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    read_embeddings(BufReader::new(file), format, name)
}

fn parse_header(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split_whitespace();
    let count = parts.next()?.parse().ok()?;
    let dim = parts.next()?.parse().ok()?;
    parts.next().is_none().then_some((count, dim))
}

pub fn read_embeddings(
    reader: impl BufRead,
    format: EmbeddingFormat,
    name: impl Into<String>,
) -> Result<EmbeddingModel> {
    let mut lines = reader.lines().enumerate().peekable();
    let mut header = None;
    let first = match lines.peek() {
        Some((_, Ok(line))) => Some(line.clone()),
        Some((_, Err(e))) => return Err(Error::parse(1, e.to_string())),
        None => None,
    };
    let first = first.ok_or_else(|| Error::Empty("embedding file is empty".into()))?;
    match format {
        EmbeddingFormat::Word2vecText => {
            let parsed = parse_header(&first)
                .ok_or_else(|| Error::parse(1, "expected a `<vocab_count> <dim>` header"))?;
            header = Some(parsed);
            lines.next();
        }
        EmbeddingFormat::Auto => {
            if let Some(parsed) = parse_header(&first) {
                header = Some(parsed);
                lines.next();
            }
        }
        EmbeddingFormat::GloveText => {}
    }
    if header.is_some_and(|(_, dim)| dim == 0) {
        return Err(Error::parse(1, "header declares dimension 0"));
    }

    let name = name.into();
    let mut model: Option<EmbeddingModel> =
        header.map(|(_, dim)| EmbeddingModel::new(name.clone(), dim));
    let mut duplicates = 0;
    let mut values = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::parse(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let word = parts.next().expect("non-blank line has a token");
        values.clear();
        for part in parts {
            let v: f64 = part
                .parse()
                .map_err(|_| Error::parse(lineno, format!("non-numeric component {part:?}")))?;
            values.push(v);
        }
        if model.is_none() && values.is_empty() {
            return Err(Error::parse(lineno, "word has no vector components"));
        }
        let model = model.get_or_insert_with(|| EmbeddingModel::new(name.clone(), values.len()));
        if values.len() != model.dim {
            return Err(Error::parse(
                lineno,
                format!("expected {} components, found {}", model.dim, values.len()),
            ));
        }
        if !model.insert(word, &values)? {
            duplicates += 1;
        }
    }
    let mut model = model.ok_or_else(|| Error::Empty("embedding file has no vectors".into()))?;
    model.stats.duplicates = duplicates;
    if let Some((count, _)) = header {
        if count != model.len() + duplicates {
            model.stats.header_count_mismatch = Some(count);
        }
    }
    Ok(model)
}
