//! Property tests for text cleaning, tokenization, and pair-file handling.

use proptest::prelude::*;

use poslink_core::corpus::{
    clean_text, common_word_count, load_nodes, tokenize,
};

proptest! {
    #[test]
    fn clean_text_idempotent(s in any::<String>()) {
        let once = clean_text(&s);
        let twice = clean_text(&once);
        prop_assert_eq!(&once, &twice);
    }

    #[test]
    fn clean_text_output_alphabet(s in any::<String>()) {
        let cleaned = clean_text(&s);
        prop_assert!(!cleaned.starts_with(' '));
        prop_assert!(!cleaned.ends_with(' '));
        prop_assert!(!cleaned.contains("  "));
        for c in cleaned.chars() {
            prop_assert!(c.is_alphanumeric() || c == ' ', "bad char {c:?}");
        }
    }

    #[test]
    fn tokenize_has_no_empty_tokens(s in any::<String>()) {
        let cleaned = clean_text(&s);
        for token in tokenize(&cleaned) {
            prop_assert!(!token.is_empty());
        }
    }

    #[test]
    fn common_words_symmetric_and_bounded(
        a in prop::collection::vec("[a-c]{1,2}", 0..12),
        b in prop::collection::vec("[a-c]{1,2}", 0..12),
    ) {
        let a_refs: Vec<&str> = a.iter().map(String::as_str).collect();
        let b_refs: Vec<&str> = b.iter().map(String::as_str).collect();
        let ab = common_word_count(&a_refs, &b_refs);
        let ba = common_word_count(&b_refs, &a_refs);
        prop_assert_eq!(ab, ba);
        let distinct = |v: &[&str]| v.iter().collect::<std::collections::HashSet<_>>().len();
        prop_assert!(ab <= distinct(&a_refs).min(distinct(&b_refs)));
        // Identity case: intersection with itself is the distinct count.
        prop_assert_eq!(common_word_count(&a_refs, &a_refs), distinct(&a_refs));
    }

    /// Well-formed node files reload to the same (id, raw_text) rows, and
    /// re-serializing reproduces the input bytes.
    #[test]
    fn node_file_round_trip(
        rows in prop::collection::vec((0u64..1000, "[a-z 0-9{|}]{0,20}"), 1..20)
    ) {
        // Unique ids.
        let mut seen = std::collections::HashSet::new();
        let rows: Vec<(u64, String)> = rows
            .into_iter()
            .filter(|(id, _)| seen.insert(*id))
            .collect();
        let mut content = String::new();
        for (id, text) in &rows {
            content.push_str(&format!("{id}\t{text}\n"));
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("node.tsv");
        std::fs::write(&path, &content).unwrap();
        let nodes = load_nodes(&path).unwrap();
        prop_assert_eq!(nodes.len(), rows.len());
        let mut reserialized = String::new();
        for node in &nodes {
            reserialized.push_str(&format!("{}\t{}\n", node.id, node.raw_text));
        }
        prop_assert_eq!(reserialized, content);
    }
}
