//! Rule-based fallback tagger used when no trained model is supplied.

/// Closed-class word table.
fn closed_class(word: &str) -> Option<&'static str> {
    match word {
        "the" | "a" | "an" => Some("DT"),
        "and" | "or" | "but" => Some("CC"),
        "to" => Some("TO"),
        "of" | "in" | "on" | "at" | "by" => Some("IN"),
        "he" | "she" | "it" | "they" | "i" | "we" | "you" => Some("PRP"),
        "can" | "will" | "may" | "must" | "should" | "could" | "would" => Some("MD"),
        _ => None,
    }
}

fn fallback_tag_word(word: &str) -> &'static str {
    if !word.is_empty() && word.chars().all(|c| c.is_numeric()) {
        return "CD";
    }
    if let Some(tag) = closed_class(word) {
        return tag;
    }
    // Suffix rules. The adjective suffixes are checked before the plural
    // rule: every "-ous" word also ends in "s".
    if word.ends_with("ing") {
        "VBG"
    } else if word.ends_with("ed") {
        "VBD"
    } else if word.ends_with("ly") {
        "RB"
    } else if word.ends_with("able")
        || word.ends_with("ible")
        || word.ends_with("ous")
        || word.ends_with("ful")
    {
        "JJ"
    } else if word.ends_with('s') && !word.ends_with("ss") {
        "NNS"
    } else {
        "NN"
    }
}

/// Tag tokens with the suffix/closed-class rule table. Total function; every
/// emitted tag belongs to the Penn Treebank inventory.
pub fn fallback_tag(tokens: &[&str]) -> Vec<(String, String)> {
    tokens
        .iter()
        .map(|w| (w.to_string(), fallback_tag_word(w).to_string()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tagset::TagSet;

    fn tag_of(word: &str) -> String {
        fallback_tag(&[word]).pop().unwrap().1
    }

    #[test]
    fn rule_table_examples() {
        assert_eq!(tag_of("running"), "VBG");
        assert_eq!(tag_of("42"), "CD");
        assert_eq!(tag_of("zzzz"), "NN");
        assert_eq!(tag_of("jumped"), "VBD");
        assert_eq!(tag_of("quickly"), "RB");
        assert_eq!(tag_of("dogs"), "NNS");
        assert_eq!(tag_of("glass"), "NN");
        assert_eq!(tag_of("famous"), "JJ");
        assert_eq!(tag_of("readable"), "JJ");
        assert_eq!(tag_of("helpful"), "JJ");
    }

    #[test]
    fn closed_class_words() {
        assert_eq!(tag_of("the"), "DT");
        assert_eq!(tag_of("and"), "CC");
        assert_eq!(tag_of("to"), "TO");
        assert_eq!(tag_of("of"), "IN");
        assert_eq!(tag_of("they"), "PRP");
        assert_eq!(tag_of("should"), "MD");
    }

    #[test]
    fn output_shape_and_tagset_membership() {
        let tokens = ["the", "running", "17", "dogs", "zzzz", "famous"];
        let tagged = fallback_tag(&tokens);
        assert_eq!(tagged.len(), tokens.len());
        let ts = TagSet::penn_treebank();
        for (_, tag) in &tagged {
            assert!(ts.contains(tag), "{tag} not in tagset");
        }
    }

    #[test]
    fn empty_input() {
        assert!(fallback_tag(&[]).is_empty());
    }
}
