//! Tag inventory: an ordered, indexable set of part-of-speech tag labels.

use std::collections::HashMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// The 36 Penn Treebank word-level tags, in the standard inventory order.
pub const PENN_TREEBANK_TAGS: [&str; 36] = [
    "CC", "CD", "DT", "EX", "FW", "IN", "JJ", "JJR", "JJS", "LS", "MD", "NN", "NNS", "NNP",
    "NNPS", "PDT", "POS", "PRP", "PRP$", "RB", "RBR", "RBS", "RP", "SYM", "TO", "UH", "VB",
    "VBD", "VBG", "VBN", "VBP", "VBZ", "WDT", "WP", "WP$", "WRB",
];

/// Catch-all label appended to the default tagset, bringing it to 37 tags.
pub const CATCH_ALL_TAG: &str = "UNK";

/// Ordered set of tag labels with label -> position lookup. Position order
/// is significant: it fixes vector layouts and breaks scoring ties.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagSet {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl TagSet {
    pub fn new<I, S>(labels: I) -> Result<TagSet>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::data("tagset must contain at least one tag"));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() || label.chars().any(char::is_whitespace) {
                return Err(Error::data(format!("invalid tag label `{label}`")));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::data(format!("duplicate tag `{label}` in tagset")));
            }
        }
        Ok(TagSet { labels, index })
    }

    /// Default inventory: the 36 Penn Treebank tags plus a catch-all, 37
    /// labels total.
    pub fn penn_treebank() -> TagSet {
        TagSet::new(
            PENN_TREEBANK_TAGS
                .iter()
                .copied()
                .chain(std::iter::once(CATCH_ALL_TAG)),
        )
        .expect("built-in tagset is valid")
    }

    /// Read a tagset file: one tag per line, UTF-8, blank lines ignored.
    pub fn from_file(path: &Path) -> Result<TagSet> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut labels = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line.map_err(|e| Error::io(path, e))?;
            let tag = line.trim();
            if !tag.is_empty() {
                labels.push(tag.to_string());
            }
        }
        TagSet::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, idx: usize) -> &str {
        &self.labels[idx]
    }

    pub fn position(&self, tag: &str) -> Option<usize> {
        self.index.get(tag).copied()
    }

    pub fn contains(&self, tag: &str) -> bool {
        self.index.contains_key(tag)
    }

    /// Resolve tag names to positions, failing on the first unknown tag.
    pub fn resolve(&self, tags: &[String]) -> Result<Vec<usize>> {
        tags.iter()
            .map(|t| {
                self.position(t)
                    .ok_or_else(|| Error::data(format!("tag `{t}` not in tagset")))
            })
            .collect()
    }
}
