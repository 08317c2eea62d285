use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use crate::data::{BoolDataset, Provenance};
use crate::error::{Error, Result};

/// Lowercased runs of alphanumeric characters.
pub fn tokenize(doc: &str) -> impl Iterator<Item = String> + '_ {
    doc.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

/// Fixed token list; position in the list is the feature index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    tokens: Vec<String>,
    lookup: HashMap<String, usize>,
}

impl Vocabulary {
    pub fn from_tokens(tokens: Vec<String>) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::Config("vocabulary is empty".into()));
        }
        let mut lookup = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if lookup.insert(t.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate vocabulary token {t:?}")));
            }
        }
        Ok(Self { tokens, lookup })
    }

    /// The `size` tokens with the highest document frequency in `docs`.
    /// Equal frequencies are ordered lexicographically.
    pub fn build<S: AsRef<str>>(docs: &[S], size: usize) -> Result<Self> {
        let mut df: HashMap<String, usize> = HashMap::new();
        for doc in docs {
            let seen: HashSet<String> = tokenize(doc.as_ref()).collect();
            for t in seen {
                *df.entry(t).or_default() += 1;
            }
        }
        let mut ranked: Vec<(String, usize)> = df.into_iter().collect();
        ranked.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        ranked.truncate(size);
        Self::from_tokens(ranked.into_iter().map(|(t, _)| t).collect())
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    pub fn position(&self, token: &str) -> Option<usize> {
        self.lookup.get(token).copied()
    }

    /// One token per line, in rank order.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut text = self.tokens.join("\n");
        text.push('\n');
        fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_tokens(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::to_owned)
                .collect(),
        )
    }
}

/// Set-of-words encoding: feature `v` is set iff token `v` occurs.
pub fn vectorize_text<S: AsRef<str>>(
    docs: &[S],
    labels: &[usize],
    classes: usize,
    vocab: &Vocabulary,
    source: &str,
) -> Result<BoolDataset> {
    if vocab.is_empty() {
        return Err(Error::Config("vocabulary is empty".into()));
    }
    if docs.len() != labels.len() {
        return Err(Error::Dimension(format!(
            "{} documents but {} labels",
            docs.len(),
            labels.len()
        )));
    }
    let mut ds = BoolDataset::new(
        vocab.len(),
        classes,
        Provenance::Text {
            source: source.to_owned(),
            vocabulary: vocab.len(),
        },
    )?;
    let mut row = vec![0u8; vocab.len()];
    for (doc, &label) in docs.iter().zip(labels) {
        row.fill(0);
        for t in tokenize(doc.as_ref()) {
            if let Some(v) = vocab.position(&t) {
                row[v] = 1;
            }
        }
        ds.push(&row, label)?;
    }
    Ok(ds)
}
