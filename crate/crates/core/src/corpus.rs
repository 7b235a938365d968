//! Corpus ingestion: node and pair files, text cleaning, tokenization, and
//! common-word statistics.

use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// An article node: identifier, raw text, and the cleaned text derived from
/// it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: u64,
    pub raw_text: String,
    pub clean_text: String,
}

/// One row of a train/test pair file. `label` is present for training rows
/// and absent for test rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairExample {
    pub u: u64,
    pub v: u64,
    pub label: Option<u8>,
}

/// A test row: the file's row id (echoed into the submission) plus the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TestPair {
    pub row_id: u64,
    pub pair: PairExample,
}

/// Normalize raw article text: lowercase, replace every character that is
/// not a letter or digit with a space, collapse whitespace runs, and trim.
///
/// Total and idempotent: cleaning already-clean text is a no-op.
pub fn clean_text(raw: &str) -> String {
    let mut out = String::with_capacity(raw.len());
    let mut pending_space = false;
    for c in raw.chars().flat_map(|c| c.to_lowercase()) {
        if c.is_alphanumeric() {
            if pending_space && !out.is_empty() {
                out.push(' ');
            }
            pending_space = false;
            out.push(c);
        } else {
            // Covers both whitespace and replaced specials.
            pending_space = true;
        }
    }
    out
}

/// Split cleaned text on single spaces. Empty input yields no tokens.
pub fn tokenize(clean: &str) -> Vec<&str> {
    if clean.is_empty() {
        Vec::new()
    } else {
        clean.split(' ').collect()
    }
}

/// Number of distinct tokens the two sequences share.
pub fn common_word_count(u_tokens: &[&str], v_tokens: &[&str]) -> usize {
    let u: HashSet<&str> = u_tokens.iter().copied().collect();
    let v: HashSet<&str> = v_tokens.iter().copied().collect();
    u.intersection(&v).count()
}

/// Multiset variant: shared occurrences count once per matchable occurrence
/// (sum over words of min count). Off the default path; `common_word_count`
/// is the standard definition.
pub fn common_word_count_multiset(u_tokens: &[&str], v_tokens: &[&str]) -> usize {
    let mut u_counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for t in u_tokens {
        *u_counts.entry(t).or_insert(0) += 1;
    }
    let mut v_counts: std::collections::HashMap<&str, usize> = std::collections::HashMap::new();
    for t in v_tokens {
        *v_counts.entry(t).or_insert(0) += 1;
    }
    u_counts
        .iter()
        .map(|(w, cu)| v_counts.get(w).map_or(0, |cv| *cu.min(cv)))
        .sum()
}

fn open_lines(path: &Path) -> Result<impl Iterator<Item = std::io::Result<String>>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(BufReader::new(file).lines())
}

fn strip_cr(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

/// Load a node file: UTF-8 lines of `id<TAB>text`. Order is preserved and
/// `clean_text` is computed for every node.
pub fn load_nodes(path: &Path) -> Result<Vec<Node>> {
    let mut nodes = Vec::new();
    let mut seen: HashSet<u64> = HashSet::new();
    for (lineno, line) in open_lines(path)?.enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = strip_cr(&line);
        let (id_str, text) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(path, lineno, "expected `id<TAB>text`"))?;
        if text.contains('\t') {
            return Err(Error::parse(path, lineno, "more than one TAB in line"));
        }
        let id: u64 = id_str
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, lineno, format!("invalid node id `{id_str}`")))?;
        if !seen.insert(id) {
            return Err(Error::data(format!("duplicate node id {id} in {}", path.display())));
        }
        nodes.push(Node {
            id,
            raw_text: text.to_string(),
            clean_text: clean_text(text),
        });
    }
    Ok(nodes)
}

fn parse_label(field: &str) -> Option<u8> {
    match field.trim() {
        "0" => Some(0),
        "1" => Some(1),
        _ => None,
    }
}

/// Load a pair file.
///
/// Labeled rows are `id1,id2,label`; unlabeled rows are `id,id1,id2` with a
/// leading row id (dropped here; see [`load_test_pairs`] to keep it). A
/// single header line is skipped when its fields fail numeric parsing.
pub fn load_pairs(path: &Path, labeled: bool) -> Result<Vec<PairExample>> {
    if labeled {
        parse_pair_rows(path, true).map(|rows| rows.into_iter().map(|t| t.pair).collect())
    } else {
        Ok(load_test_pairs(path)?.into_iter().map(|t| t.pair).collect())
    }
}

/// Load an unlabeled test file `id,id1,id2`, keeping the row ids for the
/// submission file.
pub fn load_test_pairs(path: &Path) -> Result<Vec<TestPair>> {
    parse_pair_rows(path, false)
}

fn parse_pair_rows(path: &Path, labeled: bool) -> Result<Vec<TestPair>> {
    let mut out = Vec::new();
    for (lineno, line) in open_lines(path)?.enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = strip_cr(&line);
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected 3 comma-separated fields, got {}", fields.len()),
            ));
        }
        // A non-numeric first line is treated as a header.
        if lineno == 1 && fields.iter().any(|f| f.trim().parse::<u64>().is_err()) {
            continue;
        }
        let parse_id = |field: &str| -> Result<u64> {
            field
                .trim()
                .parse()
                .map_err(|_| Error::parse(path, lineno, format!("invalid id `{field}`")))
        };
        let (row_id, u, v, label) = if labeled {
            let label = parse_label(fields[2]).ok_or_else(|| {
                Error::parse(path, lineno, format!("label `{}` not in {{0,1}}", fields[2]))
            })?;
            (out.len() as u64, parse_id(fields[0])?, parse_id(fields[1])?, Some(label))
        } else {
            (parse_id(fields[0])?, parse_id(fields[1])?, parse_id(fields[2])?, None)
        };
        if u == v {
            return Err(Error::parse(path, lineno, format!("self-pair ({u},{v})")));
        }
        out.push(TestPair {
            row_id,
            pair: PairExample { u, v, label },
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn clean_text_examples() {
        assert_eq!(clean_text(""), "");
        assert_eq!(clean_text("a{b|c-d"), "a b c d");
        assert_eq!(clean_text("The  CAT."), "the cat");
        assert_eq!(clean_text("a{b|c"), "a b c");
    }

    #[test]
    fn clean_text_trims_and_collapses() {
        assert_eq!(clean_text("  x   y  "), "x y");
        assert_eq!(clean_text("--!!--"), "");
        assert_eq!(clean_text("Ünïcødé 42"), "ünïcødé 42");
    }

    #[test]
    fn tokenize_examples() {
        assert_eq!(tokenize("the cat sat"), vec!["the", "cat", "sat"]);
        assert!(tokenize("").is_empty());
        assert_eq!(tokenize("a b"), vec!["a", "b"]);
    }

    #[test]
    fn common_word_count_examples() {
        assert_eq!(common_word_count(&["a", "b", "b"], &["b", "c"]), 1);
        assert_eq!(common_word_count(&["x", "y", "x"], &["x", "y", "x"]), 2);
        assert_eq!(common_word_count(&[], &["a"]), 0);
    }

    #[test]
    fn multiset_variant_counts_occurrences() {
        assert_eq!(common_word_count_multiset(&["b", "b", "a"], &["b", "b", "b"]), 2);
        assert_eq!(common_word_count_multiset(&["a"], &["c"]), 0);
    }

    #[test]
    fn load_nodes_single_row() {
        let f = write_temp("7\thello\n");
        let nodes = load_nodes(f.path()).unwrap();
        assert_eq!(
            nodes,
            vec![Node {
                id: 7,
                raw_text: "hello".into(),
                clean_text: "hello".into()
            }]
        );
    }

    #[test]
    fn load_nodes_cleans() {
        let f = write_temp("3\ta{b|c\n");
        let nodes = load_nodes(f.path()).unwrap();
        assert_eq!(nodes[0].clean_text, "a b c");
    }

    #[test]
    fn load_nodes_crlf() {
        let f = write_temp("1\tfoo\r\n2\tbar\r\n");
        let nodes = load_nodes(f.path()).unwrap();
        assert_eq!(nodes.len(), 2);
        assert_eq!(nodes[1].raw_text, "bar");
    }

    #[test]
    fn load_nodes_rejects_malformed() {
        let f = write_temp("1\tok\nno_tab_here\n");
        let err = load_nodes(f.path()).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn load_nodes_rejects_bad_id() {
        let f = write_temp("x\ttext\n");
        let err = load_nodes(f.path()).unwrap_err();
        assert!(err.to_string().contains("invalid node id"), "{err}");
    }

    #[test]
    fn load_nodes_rejects_duplicate_id() {
        let f = write_temp("5\ta\n5\tb\n");
        let err = load_nodes(f.path()).unwrap_err();
        assert!(err.to_string().contains("duplicate node id 5"), "{err}");
    }

    #[test]
    fn load_pairs_labeled() {
        let f = write_temp("1,2,1\n3,4,0\n");
        let pairs = load_pairs(f.path(), true).unwrap();
        assert_eq!(
            pairs,
            vec![
                PairExample { u: 1, v: 2, label: Some(1) },
                PairExample { u: 3, v: 4, label: Some(0) },
            ]
        );
    }

    #[test]
    fn load_pairs_skips_header() {
        let f = write_temp("id1,id2,label\n1,2,1\n");
        let pairs = load_pairs(f.path(), true).unwrap();
        assert_eq!(pairs.len(), 1);
    }

    #[test]
    fn load_pairs_rejects_self_pair() {
        let f = write_temp("5,5,0\n");
        let err = load_pairs(f.path(), true).unwrap_err();
        assert!(err.to_string().contains("self-pair"), "{err}");
    }

    #[test]
    fn load_pairs_rejects_bad_label() {
        let f = write_temp("1,2,7\n");
        let err = load_pairs(f.path(), true).unwrap_err();
        assert!(err.to_string().contains("not in {0,1}"), "{err}");
    }

    #[test]
    fn load_test_pairs_keeps_row_ids() {
        let f = write_temp("id,id1,id2\n0,10,20\n1,30,40\n");
        let rows = load_test_pairs(f.path()).unwrap();
        assert_eq!(rows[0].row_id, 0);
        assert_eq!(rows[0].pair, PairExample { u: 10, v: 20, label: None });
        assert_eq!(rows[1].row_id, 1);
    }
}
