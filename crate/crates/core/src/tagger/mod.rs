//! Trainable averaged-perceptron part-of-speech tagger, plus a rule-based
//! fallback for runs without a trained model.
//!
//! The perceptron is the classic greedy left-to-right sequence tagger:
//! per-token prediction, additive update on mistakes, and final weights
//! averaged over every scoring step. Training is deterministic for a fixed
//! (corpus, epochs, seed).

mod fallback;

pub use fallback::fallback_tag;

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::Rng;
use crate::tagset::TagSet;

const START_MARK: &str = "-START-";
const END_MARK: &str = "-END-";
const MAGIC: &str = "poslink-tagger v1";

/// Lexicon thresholds: a word tagged one way at least `purity_threshold` of
/// the time, across at least `min_word_freq` occurrences, bypasses scoring.
#[derive(Debug, Clone, Copy)]
pub struct TaggerConfig {
    pub min_word_freq: u64,
    pub purity_threshold: f64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig {
            min_word_freq: 20,
            purity_threshold: 0.97,
        }
    }
}

/// A trained averaged-perceptron tagger. Immutable once trained; `tag` may
/// be called concurrently.
#[derive(Debug, Clone)]
pub struct PerceptronTagger {
    tagset: TagSet,
    lexicon: HashMap<String, usize>,
    weights: HashMap<String, Vec<f64>>,
    trained: bool,
}

/// The feature template is a fixed contract: bias; current word; word
/// suffixes of length 1-3; shape flags (all-digits, contains-digit);
/// previous tag; previous word; next word; (previous tag, current word).
fn token_features(word: &str, prev_tag: &str, prev_word: &str, next_word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let suffix = |k: usize| -> String { chars[chars.len().saturating_sub(k)..].iter().collect() };
    let mut feats = Vec::with_capacity(11);
    feats.push("bias".to_string());
    feats.push(format!("w={word}"));
    feats.push(format!("suf1={}", suffix(1)));
    feats.push(format!("suf2={}", suffix(2)));
    feats.push(format!("suf3={}", suffix(3)));
    if !chars.is_empty() && chars.iter().all(|c| c.is_numeric()) {
        feats.push("shape=digits".to_string());
    }
    if chars.iter().any(|c| c.is_numeric()) {
        feats.push("shape=hasdigit".to_string());
    }
    feats.push(format!("t-1={prev_tag}"));
    feats.push(format!("w-1={prev_word}"));
    feats.push(format!("w+1={next_word}"));
    feats.push(format!("t-1w={prev_tag}|{word}"));
    feats
}

fn score_into(weights: &HashMap<String, Vec<f64>>, feats: &[String], scores: &mut [f64]) {
    scores.fill(0.0);
    for f in feats {
        if let Some(w) = weights.get(f) {
            for (s, wt) in scores.iter_mut().zip(w) {
                *s += wt;
            }
        }
    }
}

/// Argmax with ties broken by the lower index (tagset order).
fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (i, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = i;
        }
    }
    best
}

/// Per-feature averaging state: live weights, the running sum of
/// (weight x steps in effect), and the step of last change, each per tag.
type FeatureState = (Vec<f64>, Vec<f64>, Vec<u64>);

struct TrainState {
    by_feature: HashMap<String, FeatureState>,
    n_tags: usize,
    steps: u64,
}

impl TrainState {
    fn new(n_tags: usize) -> Self {
        TrainState {
            by_feature: HashMap::new(),
            n_tags,
            steps: 0,
        }
    }

    fn score(&self, feats: &[String], scores: &mut [f64]) {
        scores.fill(0.0);
        for f in feats {
            if let Some((w, _, _)) = self.by_feature.get(f) {
                for (s, wt) in scores.iter_mut().zip(w) {
                    *s += wt;
                }
            }
        }
    }

    fn bump(&mut self, feat: &str, tag: usize, delta: f64) {
        let n = self.n_tags;
        let (w, totals, stamps) = self
            .by_feature
            .entry(feat.to_string())
            .or_insert_with(|| (vec![0.0; n], vec![0.0; n], vec![0u64; n]));
        totals[tag] += (self.steps - stamps[tag]) as f64 * w[tag];
        stamps[tag] = self.steps;
        w[tag] += delta;
    }

    /// Average over all steps: each weight value counts once per step it was
    /// in effect (values set at step s live through steps s..=n).
    fn into_averaged(mut self) -> HashMap<String, Vec<f64>> {
        let n = self.steps;
        let mut averaged = HashMap::with_capacity(self.by_feature.len());
        if n == 0 {
            return averaged;
        }
        for (feat, (w, mut totals, stamps)) in self.by_feature.drain() {
            let mut avg = vec![0.0; w.len()];
            for t in 0..w.len() {
                totals[t] += (n + 1 - stamps[t]) as f64 * w[t];
                avg[t] = totals[t] / n as f64;
            }
            averaged.insert(feat, avg);
        }
        averaged
    }
}

/// Tagged training sentences: one `(token, gold tag)` sequence per sentence.
pub type TaggedSentence = Vec<(String, String)>;

/// Train with default lexicon thresholds.
pub fn train_tagger(
    sentences: &[TaggedSentence],
    epochs: usize,
    seed: u64,
    tagset: &TagSet,
) -> Result<PerceptronTagger> {
    train_tagger_with(sentences, epochs, seed, tagset, TaggerConfig::default())
}

pub fn train_tagger_with(
    sentences: &[TaggedSentence],
    epochs: usize,
    seed: u64,
    tagset: &TagSet,
    config: TaggerConfig,
) -> Result<PerceptronTagger> {
    if epochs == 0 {
        return Err(Error::data("epochs must be at least 1"));
    }
    if sentences.iter().all(|s| s.is_empty()) {
        return Err(Error::data("empty training set"));
    }
    // Resolve gold tags once, failing on any tag outside the tagset.
    let mut gold: Vec<Vec<usize>> = Vec::with_capacity(sentences.len());
    for sentence in sentences {
        let mut tags = Vec::with_capacity(sentence.len());
        for (_, tag) in sentence {
            let idx = tagset
                .position(tag)
                .ok_or_else(|| Error::data(format!("unknown gold tag `{tag}`")))?;
            tags.push(idx);
        }
        gold.push(tags);
    }

    let lexicon = build_lexicon(sentences, &gold, tagset.len(), config);

    let mut state = TrainState::new(tagset.len());
    let mut order: Vec<usize> = (0..sentences.len()).collect();
    let mut rng = Rng::derive(seed, 0x7a67);
    let mut scores = vec![0.0f64; tagset.len()];
    for _ in 0..epochs {
        rng.shuffle(&mut order);
        for &si in &order {
            let sentence = &sentences[si];
            let mut prev_tag = START_MARK.to_string();
            for i in 0..sentence.len() {
                let word = sentence[i].0.as_str();
                let guess = if let Some(&t) = lexicon.get(word) {
                    t
                } else {
                    let prev_word = if i == 0 { START_MARK } else { sentence[i - 1].0.as_str() };
                    let next_word = if i + 1 == sentence.len() {
                        END_MARK
                    } else {
                        sentence[i + 1].0.as_str()
                    };
                    let feats = token_features(word, &prev_tag, prev_word, next_word);
                    state.steps += 1;
                    state.score(&feats, &mut scores);
                    let guess = argmax(&scores);
                    let truth = gold[si][i];
                    if guess != truth {
                        for f in &feats {
                            state.bump(f, truth, 1.0);
                            state.bump(f, guess, -1.0);
                        }
                    }
                    guess
                };
                prev_tag = tagset.label(guess).to_string();
            }
        }
    }

    Ok(PerceptronTagger {
        tagset: tagset.clone(),
        lexicon,
        weights: state.into_averaged(),
        trained: true,
    })
}

fn build_lexicon(
    sentences: &[TaggedSentence],
    gold: &[Vec<usize>],
    n_tags: usize,
    config: TaggerConfig,
) -> HashMap<String, usize> {
    let mut counts: HashMap<&str, Vec<u64>> = HashMap::new();
    for (sentence, tags) in sentences.iter().zip(gold) {
        for ((word, _), &tag) in sentence.iter().zip(tags) {
            counts.entry(word.as_str()).or_insert_with(|| vec![0; n_tags])[tag] += 1;
        }
    }
    let mut lexicon = HashMap::new();
    for (word, tag_counts) in counts {
        let total: u64 = tag_counts.iter().sum();
        let best = argmax_u64(&tag_counts);
        if total >= config.min_word_freq
            && tag_counts[best] as f64 / total as f64 >= config.purity_threshold
        {
            lexicon.insert(word.to_string(), best);
        }
    }
    lexicon
}

fn argmax_u64(counts: &[u64]) -> usize {
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate().skip(1) {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

impl PerceptronTagger {
    pub fn tagset(&self) -> &TagSet {
        &self.tagset
    }

    pub fn is_trained(&self) -> bool {
        self.trained
    }

    /// Tag a cleaned token sequence. Lexicon words bypass scoring; others are
    /// scored greedily left-to-right with ties broken by tagset order.
    pub fn tag(&self, tokens: &[&str]) -> Result<Vec<(String, String)>> {
        if !self.trained {
            return Err(Error::data("tagger is not trained"));
        }
        let mut out = Vec::with_capacity(tokens.len());
        let mut scores = vec![0.0f64; self.tagset.len()];
        let mut prev_tag = START_MARK.to_string();
        for i in 0..tokens.len() {
            let word = tokens[i];
            let tag_idx = if let Some(&t) = self.lexicon.get(word) {
                t
            } else {
                let prev_word = if i == 0 { START_MARK } else { tokens[i - 1] };
                let next_word = if i + 1 == tokens.len() { END_MARK } else { tokens[i + 1] };
                let feats = token_features(word, &prev_tag, prev_word, next_word);
                score_into(&self.weights, &feats, &mut scores);
                argmax(&scores)
            };
            let label = self.tagset.label(tag_idx);
            out.push((word.to_string(), label.to_string()));
            prev_tag = label.to_string();
        }
        Ok(out)
    }

    /// Write the model as a flat, sorted key-value text file. Two saves of
    /// the same tagger are byte-identical.
    pub fn save(&self, path: &Path) -> Result<()> {
        if !self.trained {
            return Err(Error::data("refusing to save an untrained tagger"));
        }
        let mut buf = String::new();
        buf.push_str(MAGIC);
        buf.push('\n');
        buf.push_str(&format!("tags {}\n", self.tagset.len()));
        for label in self.tagset.labels() {
            buf.push_str(label);
            buf.push('\n');
        }
        let mut lex: Vec<(&String, &usize)> = self.lexicon.iter().collect();
        lex.sort_by(|a, b| a.0.cmp(b.0));
        buf.push_str(&format!("lexicon {}\n", lex.len()));
        for (word, tag) in lex {
            buf.push_str(&format!("{word} {tag}\n"));
        }
        let mut feats: Vec<(&String, &Vec<f64>)> = self.weights.iter().collect();
        feats.sort_by(|a, b| a.0.cmp(b.0));
        // Only nonzero entries are stored.
        let mut lines = Vec::new();
        for (feat, w) in feats {
            let entries: Vec<String> = w
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(t, v)| format!("{t}:{v}"))
                .collect();
            if !entries.is_empty() {
                lines.push(format!("{feat} {}", entries.join(" ")));
            }
        }
        buf.push_str(&format!("weights {}\n", lines.len()));
        for line in lines {
            buf.push_str(&line);
            buf.push('\n');
        }
        buf.push_str("end\n");
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<PerceptronTagger> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut lines = BufReader::new(file).lines().enumerate();
        let mut next_line = |what: &str| -> Result<(usize, String)> {
            match lines.next() {
                Some((n, Ok(line))) => Ok((n + 1, line)),
                Some((_, Err(e))) => Err(Error::io(path, e)),
                None => Err(Error::data(format!(
                    "truncated tagger file {}: missing {what}",
                    path.display()
                ))),
            }
        };
        let (_, magic) = next_line("header")?;
        if magic != MAGIC {
            return Err(Error::data(format!(
                "{} is not a poslink tagger file (or wrong version)",
                path.display()
            )));
        }
        let parse_count = |line: &str, lineno: usize, key: &str| -> Result<usize> {
            let rest = line
                .strip_prefix(key)
                .and_then(|r| r.strip_prefix(' '))
                .ok_or_else(|| Error::parse(path, lineno, format!("expected `{key} <count>`")))?;
            rest.parse()
                .map_err(|_| Error::parse(path, lineno, format!("bad count in `{line}`")))
        };

        let (n1, header) = next_line("tags header")?;
        let n_tags = parse_count(&header, n1, "tags")?;
        let mut labels = Vec::with_capacity(n_tags);
        for _ in 0..n_tags {
            labels.push(next_line("tag label")?.1);
        }
        let tagset = TagSet::new(labels)?;

        let (n2, header) = next_line("lexicon header")?;
        let n_lex = parse_count(&header, n2, "lexicon")?;
        let mut lexicon = HashMap::with_capacity(n_lex);
        for _ in 0..n_lex {
            let (lineno, line) = next_line("lexicon entry")?;
            let (word, tag) = line
                .split_once(' ')
                .ok_or_else(|| Error::parse(path, lineno, "bad lexicon entry"))?;
            let tag: usize = tag
                .parse()
                .map_err(|_| Error::parse(path, lineno, "bad lexicon tag index"))?;
            if tag >= tagset.len() {
                return Err(Error::parse(path, lineno, "lexicon tag index out of range"));
            }
            lexicon.insert(word.to_string(), tag);
        }

        let (n3, header) = next_line("weights header")?;
        let n_feats = parse_count(&header, n3, "weights")?;
        let mut weights = HashMap::with_capacity(n_feats);
        for _ in 0..n_feats {
            let (lineno, line) = next_line("weight entry")?;
            let (feat, entries) = line
                .split_once(' ')
                .ok_or_else(|| Error::parse(path, lineno, "bad weight entry"))?;
            let mut w = vec![0.0f64; tagset.len()];
            for entry in entries.split(' ') {
                let (t, v) = entry
                    .split_once(':')
                    .ok_or_else(|| Error::parse(path, lineno, "bad weight pair"))?;
                let t: usize = t
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad weight tag index"))?;
                if t >= tagset.len() {
                    return Err(Error::parse(path, lineno, "weight tag index out of range"));
                }
                let v: f64 = v
                    .parse()
                    .map_err(|_| Error::parse(path, lineno, "bad weight value"))?;
                if !v.is_finite() {
                    return Err(Error::parse(path, lineno, "non-finite weight"));
                }
                w[t] = v;
            }
            weights.insert(feat.to_string(), w);
        }
        let (_, end) = next_line("end marker")?;
        if end != "end" {
            return Err(Error::data(format!(
                "truncated tagger file {}: missing end marker",
                path.display()
            )));
        }
        Ok(PerceptronTagger {
            tagset,
            lexicon,
            weights,
            trained: true,
        })
    }
}

/// Fraction of tokens tagged identically to gold over a tagged corpus.
pub fn token_accuracy(tagger: &PerceptronTagger, sentences: &[TaggedSentence]) -> Result<f64> {
    let mut correct = 0u64;
    let mut total = 0u64;
    for sentence in sentences {
        let tokens: Vec<&str> = sentence.iter().map(|(w, _)| w.as_str()).collect();
        let tagged = tagger.tag(&tokens)?;
        for ((_, predicted), (_, gold)) in tagged.iter().zip(sentence) {
            if predicted == gold {
                correct += 1;
            }
            total += 1;
        }
    }
    Ok(if total == 0 { 0.0 } else { correct as f64 / total as f64 })
}

/// Parse a tagged-corpus file: one sentence per line, tokens as `word_TAG`
/// separated by spaces. The tag is taken after the last underscore.
pub fn load_tagged_corpus(path: &Path) -> Result<Vec<TaggedSentence>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut sentences = Vec::new();
    for (lineno, line) in BufReader::new(file).lines().enumerate() {
        let lineno = lineno + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut sentence = Vec::new();
        for token in line.split_whitespace() {
            let (word, tag) = token.rsplit_once('_').ok_or_else(|| {
                Error::parse(path, lineno, format!("token `{token}` lacks _TAG suffix"))
            })?;
            if word.is_empty() || tag.is_empty() {
                return Err(Error::parse(path, lineno, format!("malformed token `{token}`")));
            }
            sentence.push((word.to_string(), tag.to_string()));
        }
        sentences.push(sentence);
    }
    Ok(sentences)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sent(pairs: &[(&str, &str)]) -> TaggedSentence {
        pairs.iter().map(|(w, t)| (w.to_string(), t.to_string())).collect()
    }

    fn toy_corpus() -> Vec<TaggedSentence> {
        vec![
            sent(&[("the", "DT"), ("dog", "NN"), ("ran", "VBD")]),
            sent(&[("a", "DT"), ("cat", "NN"), ("slept", "VBD")]),
            sent(&[("the", "DT"), ("cat", "NN"), ("ran", "VBD")]),
            sent(&[("a", "DT"), ("dog", "NN"), ("slept", "VBD")]),
        ]
    }

    #[test]
    fn single_sentence_memorized_after_one_epoch() {
        let tagset = TagSet::penn_treebank();
        let corpus = vec![sent(&[("the", "DT"), ("cat", "NN"), ("sat", "VBD")])];
        let tagger = train_tagger(&corpus, 1, 42, &tagset).unwrap();
        let tagged = tagger.tag(&["the", "cat", "sat"]).unwrap();
        let tags: Vec<&str> = tagged.iter().map(|(_, t)| t.as_str()).collect();
        assert_eq!(tags, vec!["DT", "NN", "VBD"]);
    }

    #[test]
    fn unambiguous_word_gets_its_tag() {
        // "dog" is always NN and frequent enough for the lexicon, so it tags
        // as NN even stripped of any sentence context.
        let tagset = TagSet::penn_treebank();
        let corpus: Vec<TaggedSentence> =
            (0..12).flat_map(|_| toy_corpus()).collect();
        let tagger = train_tagger(&corpus, 5, 1, &tagset).unwrap();
        let tagged = tagger.tag(&["dog"]).unwrap();
        assert_eq!(tagged[0].1, "NN");
    }

    #[test]
    fn lexicon_word_bypasses_scoring() {
        let tagset = TagSet::penn_treebank();
        // 20+ occurrences, fully pure: "dog" enters the lexicon.
        let corpus: Vec<TaggedSentence> =
            (0..25).map(|_| sent(&[("dog", "NN"), ("ran", "VBD")])).collect();
        let tagger = train_tagger(&tagset_corpus_helper(&corpus), 1, 0, &tagset).unwrap();
        assert_eq!(tagger.lexicon.get("dog"), Some(&tagset.position("NN").unwrap()));
        let tagged = tagger.tag(&["dog"]).unwrap();
        assert_eq!(tagged, vec![("dog".to_string(), "NN".to_string())]);
    }

    // Identity helper so the test above reads as intent.
    fn tagset_corpus_helper(corpus: &[TaggedSentence]) -> Vec<TaggedSentence> {
        corpus.to_vec()
    }

    #[test]
    fn empty_input_and_shape() {
        let tagset = TagSet::penn_treebank();
        let tagger = train_tagger(&toy_corpus(), 2, 0, &tagset).unwrap();
        assert!(tagger.tag(&[]).unwrap().is_empty());
        let tagged = tagger.tag(&["completely", "novel", "words", "here"]).unwrap();
        assert_eq!(tagged.len(), 4);
        for (_, tag) in &tagged {
            assert!(tagset.contains(tag));
        }
    }

    #[test]
    fn errors_on_empty_corpus_and_unknown_tag() {
        let tagset = TagSet::penn_treebank();
        assert!(train_tagger(&[], 1, 0, &tagset).is_err());
        let bad = vec![sent(&[("x", "NOT_A_TAG")])];
        let err = train_tagger(&bad, 1, 0, &tagset).unwrap_err();
        assert!(err.to_string().contains("NOT_A_TAG"), "{err}");
    }

    #[test]
    fn untrained_tag_errors() {
        let tagger = PerceptronTagger {
            tagset: TagSet::penn_treebank(),
            lexicon: HashMap::new(),
            weights: HashMap::new(),
            trained: false,
        };
        assert!(tagger.tag(&["x"]).is_err());
    }

    #[test]
    fn training_is_deterministic() {
        let tagset = TagSet::penn_treebank();
        let dir = tempfile::tempdir().unwrap();
        let a_path = dir.path().join("a");
        let b_path = dir.path().join("b");
        train_tagger(&toy_corpus(), 5, 42, &tagset).unwrap().save(&a_path).unwrap();
        train_tagger(&toy_corpus(), 5, 42, &tagset).unwrap().save(&b_path).unwrap();
        let a = std::fs::read(&a_path).unwrap();
        let b = std::fs::read(&b_path).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn save_load_round_trip_tags_identically() {
        let tagset = TagSet::penn_treebank();
        let tagger = train_tagger(&toy_corpus(), 5, 7, &tagset).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tagger.model");
        tagger.save(&path).unwrap();
        let loaded = PerceptronTagger::load(&path).unwrap();
        for tokens in [vec!["the", "dog", "ran"], vec!["weird", "input", "42"]] {
            assert_eq!(tagger.tag(&tokens).unwrap(), loaded.tag(&tokens).unwrap());
        }
    }

    #[test]
    fn load_rejects_truncated_file() {
        let tagset = TagSet::penn_treebank();
        let tagger = train_tagger(&toy_corpus(), 2, 7, &tagset).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("tagger.model");
        tagger.save(&path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        let truncated: String = content.lines().take(5).collect::<Vec<_>>().join("\n");
        std::fs::write(&path, truncated).unwrap();
        assert!(PerceptronTagger::load(&path).is_err());
    }

    #[test]
    fn load_rejects_wrong_magic() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bogus");
        std::fs::write(&path, "something else\n").unwrap();
        let err = PerceptronTagger::load(&path).unwrap_err();
        assert!(err.to_string().contains("not a poslink tagger"), "{err}");
    }

    #[test]
    fn memorizes_small_consistent_corpus() {
        let tagset = TagSet::penn_treebank();
        let corpus = toy_corpus();
        let tagger = train_tagger(&corpus, 5, 42, &tagset).unwrap();
        assert_eq!(token_accuracy(&tagger, &corpus).unwrap(), 1.0);
    }

    #[test]
    fn parses_tagged_corpus_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.txt");
        std::fs::write(&path, "the_DT dog_NN ran_VBD\n\na_DT cat_NN slept_VBD\n").unwrap();
        let sentences = load_tagged_corpus(&path).unwrap();
        assert_eq!(sentences.len(), 2);
        assert_eq!(sentences[0][1], ("dog".to_string(), "NN".to_string()));
    }

    #[test]
    fn tagged_corpus_rejects_missing_tag() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.txt");
        std::fs::write(&path, "word-without-tag\n").unwrap();
        assert!(load_tagged_corpus(&path).is_err());
    }
}
