//! Tag-count vectors per node and fixed-width feature rows per node pair.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;
use std::str::FromStr;

use crate::corpus::PairExample;
use crate::error::{Error, Result};
use crate::fmt::format_num;
use crate::tagset::TagSet;

/// Per-node counts over a fixed ordered tagset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TagCountVector {
    counts: Vec<u64>,
    token_total: u64,
}

impl TagCountVector {
    pub fn zeros(n_tags: usize) -> TagCountVector {
        TagCountVector {
            counts: vec![0; n_tags],
            token_total: 0,
        }
    }

    pub fn from_counts(counts: Vec<u64>) -> TagCountVector {
        let token_total = counts.iter().sum();
        TagCountVector { counts, token_total }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn count(&self, tag_idx: usize) -> u64 {
        self.counts[tag_idx]
    }

    pub fn token_total(&self) -> u64 {
        self.token_total
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

/// Count tags over a tagged token sequence.
pub fn count_tags(tagged: &[(String, String)], tagset: &TagSet) -> Result<TagCountVector> {
    let mut counts = vec![0u64; tagset.len()];
    for (_, tag) in tagged {
        let idx = tagset
            .position(tag)
            .ok_or_else(|| Error::data(format!("tag `{tag}` not in tagset")))?;
        counts[idx] += 1;
    }
    Ok(TagCountVector {
        token_total: tagged.len() as u64,
        counts,
    })
}

/// How a pair of tag-count vectors becomes one feature value per tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureMode {
    /// 1 when the tag appears in both nodes, else 0.
    Indicator,
    /// Matched occurrences: min of the two counts.
    Min,
    /// Sum of the two counts, gated on the tag appearing in both.
    Sum,
}

impl FeatureMode {
    pub fn name(self) -> &'static str {
        match self {
            FeatureMode::Indicator => "indicator",
            FeatureMode::Min => "min",
            FeatureMode::Sum => "sum",
        }
    }
}

impl FromStr for FeatureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<FeatureMode> {
        match s {
            "indicator" => Ok(FeatureMode::Indicator),
            "min" => Ok(FeatureMode::Min),
            "sum" => Ok(FeatureMode::Sum),
            other => Err(Error::data(format!(
                "unknown feature mode `{other}` (expected indicator|min|sum)"
            ))),
        }
    }
}

/// Featurize one node pair over an ordered tag subset (tagset positions).
/// Symmetric in (u, v) for every mode.
pub fn pair_features(
    u: &TagCountVector,
    v: &TagCountVector,
    tag_indices: &[usize],
    mode: FeatureMode,
) -> Result<Vec<f64>> {
    if u.len() != v.len() {
        return Err(Error::data(format!(
            "tag-count vectors over different tagsets ({} vs {} tags)",
            u.len(),
            v.len()
        )));
    }
    let mut out = Vec::with_capacity(tag_indices.len());
    for &t in tag_indices {
        if t >= u.len() {
            return Err(Error::data(format!("tag position {t} outside tagset")));
        }
        let (cu, cv) = (u.counts[t], v.counts[t]);
        let value = match mode {
            FeatureMode::Indicator => {
                if cu > 0 && cv > 0 {
                    1
                } else {
                    0
                }
            }
            FeatureMode::Min => cu.min(cv),
            FeatureMode::Sum => {
                if cu > 0 && cv > 0 {
                    cu + cv
                } else {
                    0
                }
            }
        };
        out.push(value as f64);
    }
    Ok(out)
}

/// A labeled or unlabeled feature matrix with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub feature_names: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub labels: Option<Vec<u8>>,
}

impl FeatureMatrix {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.feature_names.len()
    }
}

/// Feature name used for the optional common-word-count column.
pub const COMMON_WORDS_FEATURE: &str = "common_words";

fn pair_key(u: u64, v: u64) -> (u64, u64) {
    (u.min(v), u.max(v))
}

/// Build one feature row per pair, in input order.
///
/// `common_words`, when supplied together with `include_common_words`, maps
/// `(min(u,v), max(u,v))` to the pair's common-word count and must cover
/// every pair.
pub fn build_dataset(
    pairs: &[PairExample],
    vectors: &HashMap<u64, TagCountVector>,
    tagset: &TagSet,
    tags: &[String],
    mode: FeatureMode,
    include_common_words: bool,
    common_words: Option<&HashMap<(u64, u64), u64>>,
) -> Result<FeatureMatrix> {
    let tag_indices = tagset.resolve(tags)?;
    let mut feature_names: Vec<String> = tags.to_vec();
    if include_common_words {
        feature_names.push(COMMON_WORDS_FEATURE.to_string());
    }

    let mut rows = Vec::with_capacity(pairs.len());
    let mut labels: Vec<u8> = Vec::new();
    let mut labeled_rows = 0usize;
    for pair in pairs {
        let u = vectors
            .get(&pair.u)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.u)))?;
        let v = vectors
            .get(&pair.v)
            .ok_or_else(|| Error::data(format!("no tag-count vector for node {}", pair.v)))?;
        let mut row = pair_features(u, v, &tag_indices, mode)?;
        if include_common_words {
            let counts = common_words.ok_or_else(|| {
                Error::data("include_common_words set but no common-word mapping supplied")
            })?;
            let cw = counts.get(&pair_key(pair.u, pair.v)).ok_or_else(|| {
                Error::data(format!(
                    "no common-word count for pair ({},{})",
                    pair.u, pair.v
                ))
            })?;
            row.push(*cw as f64);
        }
        rows.push(row);
        if let Some(label) = pair.label {
            labeled_rows += 1;
            labels.push(label);
        }
    }
    let labels = if labeled_rows == pairs.len() && !pairs.is_empty() {
        Some(labels)
    } else if labeled_rows == 0 {
        None
    } else {
        return Err(Error::data(
            "pair list mixes labeled and unlabeled rows".to_string(),
        ));
    };
    Ok(FeatureMatrix {
        feature_names,
        rows,
        labels,
    })
}

/// Write a feature matrix as CSV: header of feature names plus a trailing
/// `label` column when labels are present. Deterministic formatting.
pub fn write_matrix_csv(matrix: &FeatureMatrix, path: &Path) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(&matrix.feature_names.join(","));
    if matrix.labels.is_some() {
        if !matrix.feature_names.is_empty() {
            buf.push(',');
        }
        buf.push_str("label");
    }
    buf.push('\n');
    for (i, row) in matrix.rows.iter().enumerate() {
        let mut fields: Vec<String> = row.iter().map(|v| format_num(*v)).collect();
        if let Some(labels) = &matrix.labels {
            fields.push(format!("{}", labels[i]));
        }
        buf.push_str(&fields.join(","));
        buf.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Read a matrix written by [`write_matrix_csv`].
pub fn read_matrix_csv(path: &Path) -> Result<FeatureMatrix> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::data(format!("{} is empty", path.display()))),
    };
    let mut names: Vec<String> = header.split(',').map(str::to_string).collect();
    let has_labels = names.last().map(String::as_str) == Some("label");
    if has_labels {
        names.pop();
    }
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let lineno = lineno + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expected = names.len() + usize::from(has_labels);
        if fields.len() != expected {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {expected} fields, got {}", fields.len()),
            ));
        }
        let mut row = Vec::with_capacity(names.len());
        for f in &fields[..names.len()] {
            let v: f64 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad number `{f}`")))?;
            row.push(v);
        }
        if has_labels {
            let l = fields[names.len()];
            let label = match l {
                "0" => 0,
                "1" => 1,
                _ => return Err(Error::parse(path, lineno, format!("bad label `{l}`"))),
            };
            labels.push(label);
        }
        rows.push(row);
    }
    Ok(FeatureMatrix {
        feature_names: names,
        rows,
        labels: if has_labels { Some(labels) } else { None },
    })
}

/// Persist per-node tag-count vectors: `id` column plus one count column per
/// tag, rows sorted by node id.
pub fn write_vectors_csv(
    vectors: &HashMap<u64, TagCountVector>,
    tagset: &TagSet,
    path: &Path,
) -> Result<()> {
    let mut buf = String::new();
    buf.push_str("id,");
    buf.push_str(&tagset.labels().join(","));
    buf.push('\n');
    let mut ids: Vec<&u64> = vectors.keys().collect();
    ids.sort_unstable();
    for id in ids {
        let vec = &vectors[id];
        if vec.len() != tagset.len() {
            return Err(Error::data(format!(
                "vector for node {id} has {} tags, tagset has {}",
                vec.len(),
                tagset.len()
            )));
        }
        buf.push_str(&id.to_string());
        for c in vec.counts() {
            buf.push(',');
            buf.push_str(&c.to_string());
        }
        buf.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Read a vectors file written by [`write_vectors_csv`]. Returns the tagset
/// implied by the header and the per-node vectors.
pub fn read_vectors_csv(path: &Path) -> Result<(TagSet, HashMap<u64, TagCountVector>)> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::data(format!("{} is empty", path.display()))),
    };
    let mut cols = header.split(',');
    if cols.next() != Some("id") {
        return Err(Error::parse(path, 1, "expected header starting with `id`"));
    }
    let tagset = TagSet::new(cols.map(str::to_string))?;
    let mut vectors = HashMap::new();
    for (lineno, line) in lines.enumerate() {
        let lineno = lineno + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let id: u64 = fields
            .next()
            .unwrap_or("")
            .parse()
            .map_err(|_| Error::parse(path, lineno, "bad node id"))?;
        let mut counts = Vec::with_capacity(tagset.len());
        for f in fields {
            let c: u64 = f
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad count `{f}`")))?;
            counts.push(c);
        }
        if counts.len() != tagset.len() {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected {} counts, got {}", tagset.len(), counts.len()),
            ));
        }
        if vectors.insert(id, TagCountVector::from_counts(counts)).is_some() {
            return Err(Error::parse(path, lineno, format!("duplicate node id {id}")));
        }
    }
    Ok((tagset, vectors))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tcv(pairs: &[(&str, u64)], tagset: &TagSet) -> TagCountVector {
        let mut counts = vec![0u64; tagset.len()];
        for (tag, c) in pairs {
            counts[tagset.position(tag).unwrap()] = *c;
        }
        TagCountVector::from_counts(counts)
    }

    #[test]
    fn count_tags_examples() {
        let ts = TagSet::penn_treebank();
        let tagged = vec![
            ("the".to_string(), "DT".to_string()),
            ("cat".to_string(), "NN".to_string()),
            ("sat".to_string(), "VBD".to_string()),
        ];
        let v = count_tags(&tagged, &ts).unwrap();
        assert_eq!(v.count(ts.position("DT").unwrap()), 1);
        assert_eq!(v.count(ts.position("NN").unwrap()), 1);
        assert_eq!(v.count(ts.position("VBD").unwrap()), 1);
        assert_eq!(v.token_total(), 3);

        let empty = count_tags(&[], &ts).unwrap();
        assert_eq!(empty.token_total(), 0);
        assert!(empty.counts().iter().all(|&c| c == 0));

        let dup = vec![
            ("a".to_string(), "NN".to_string()),
            ("b".to_string(), "NN".to_string()),
        ];
        let v = count_tags(&dup, &ts).unwrap();
        assert_eq!(v.count(ts.position("NN").unwrap()), 2);
        assert_eq!(v.token_total(), 2);
    }

    #[test]
    fn count_tags_rejects_unknown() {
        let ts = TagSet::penn_treebank();
        let bad = vec![("x".to_string(), "BOGUS".to_string())];
        assert!(count_tags(&bad, &ts).is_err());
    }

    #[test]
    fn pair_features_modes() {
        let ts = TagSet::penn_treebank();
        let u = tcv(&[("NN", 3), ("DT", 1)], &ts);
        let v = tcv(&[("NN", 2), ("VB", 5)], &ts);
        let tags = ts
            .resolve(&["NN".to_string(), "DT".to_string(), "VB".to_string()])
            .unwrap();
        assert_eq!(pair_features(&u, &v, &tags, FeatureMode::Min).unwrap(), vec![2.0, 0.0, 0.0]);
        assert_eq!(
            pair_features(&u, &v, &tags, FeatureMode::Indicator).unwrap(),
            vec![1.0, 0.0, 0.0]
        );
        assert_eq!(pair_features(&u, &v, &tags, FeatureMode::Sum).unwrap(), vec![5.0, 0.0, 0.0]);
        // Identity case: min returns u's counts restricted to tags.
        assert_eq!(pair_features(&u, &u, &tags, FeatureMode::Min).unwrap(), vec![3.0, 1.0, 0.0]);
    }

    #[test]
    fn build_dataset_shapes_and_order() {
        let ts = TagSet::penn_treebank();
        let mut vectors = HashMap::new();
        vectors.insert(1, tcv(&[("NN", 3)], &ts));
        vectors.insert(2, tcv(&[("NN", 2)], &ts));
        vectors.insert(3, tcv(&[("DT", 1)], &ts));
        vectors.insert(4, tcv(&[("DT", 4)], &ts));
        let pairs = vec![
            PairExample { u: 1, v: 2, label: Some(1) },
            PairExample { u: 3, v: 4, label: Some(0) },
        ];
        let tags: Vec<String> = ["NN", "DT"].iter().map(|s| s.to_string()).collect();
        let m = build_dataset(&pairs, &vectors, &ts, &tags, FeatureMode::Min, false, None).unwrap();
        assert_eq!(m.n_rows(), 2);
        assert_eq!(m.n_features(), 2);
        assert_eq!(m.rows[0], vec![2.0, 0.0]);
        assert_eq!(m.rows[1], vec![0.0, 1.0]);
        assert_eq!(m.labels, Some(vec![1, 0]));
    }

    #[test]
    fn build_dataset_common_words_column() {
        let ts = TagSet::penn_treebank();
        let mut vectors = HashMap::new();
        vectors.insert(1, tcv(&[("NN", 1)], &ts));
        vectors.insert(2, tcv(&[("NN", 1)], &ts));
        let pairs = vec![PairExample { u: 2, v: 1, label: Some(1) }];
        let mut cw = HashMap::new();
        cw.insert((1, 2), 5u64);
        let tags: Vec<String> = vec!["NN".to_string()];
        let m =
            build_dataset(&pairs, &vectors, &ts, &tags, FeatureMode::Min, true, Some(&cw)).unwrap();
        assert_eq!(m.feature_names.last().unwrap(), COMMON_WORDS_FEATURE);
        assert_eq!(m.rows[0], vec![1.0, 5.0]);
    }

    #[test]
    fn build_dataset_missing_vector_names_node() {
        let ts = TagSet::penn_treebank();
        let vectors = HashMap::new();
        let pairs = vec![PairExample { u: 9, v: 1, label: Some(0) }];
        let err = build_dataset(&pairs, &vectors, &ts, &[], FeatureMode::Min, false, None)
            .unwrap_err();
        assert!(err.to_string().contains("node 9"), "{err}");
    }

    #[test]
    fn matrix_csv_round_trip() {
        let m = FeatureMatrix {
            feature_names: vec!["NN".into(), "DT".into()],
            rows: vec![vec![2.0, 0.0], vec![1.0, 3.0]],
            labels: Some(vec![1, 0]),
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.csv");
        write_matrix_csv(&m, &path).unwrap();
        let back = read_matrix_csv(&path).unwrap();
        assert_eq!(m, back);
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text, "NN,DT,label\n2,0,1\n1,3,0\n");
    }

    #[test]
    fn vectors_csv_round_trip() {
        let ts = TagSet::penn_treebank();
        let mut vectors = HashMap::new();
        vectors.insert(10, tcv(&[("NN", 3), ("VBG", 1)], &ts));
        vectors.insert(2, tcv(&[("DT", 2)], &ts));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        write_vectors_csv(&vectors, &ts, &path).unwrap();
        let (ts2, back) = read_vectors_csv(&path).unwrap();
        assert_eq!(ts.labels(), ts2.labels());
        assert_eq!(back, vectors);
    }
}
