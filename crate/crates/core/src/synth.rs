//! Seeded planted-link corpus generator.
//!
//! Nodes belong to hidden topics; each topic owns a pool of signature words
//! whose fallback tag class identifies it (gerunds, past-tense verbs,
//! plurals, adjectives, adverbs, numbers). Linked pairs are same-topic and
//! share that vocabulary; unlinked pairs are cross-topic and share only
//! filler. The link signal is therefore recoverable from tag-count features,
//! with document-length variation as the main nuisance factor.

use std::collections::HashSet;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::corpus::{PairExample, TestPair};
use crate::error::{Error, Result};
use crate::rng::Rng;

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n_nodes: usize,
    pub n_pairs: usize,
    pub n_test_pairs: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_nodes: 300,
            n_pairs: 3000,
            n_test_pairs: 600,
            min_tokens: 40,
            max_tokens: 120,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCorpus {
    /// (node id, text); text is already clean (lowercase words and digits).
    pub nodes: Vec<(u64, String)>,
    pub train_pairs: Vec<PairExample>,
    pub test_pairs: Vec<TestPair>,
    /// Ground-truth labels for the test pairs, in row order (not written to
    /// the test file).
    pub test_labels: Vec<u8>,
}

pub struct SynthPaths {
    pub nodes: PathBuf,
    pub train: PathBuf,
    pub test: PathBuf,
}

const N_TOPICS: usize = 6;
const POOL_WORDS: usize = 30;
const CONSONANTS: &[u8] = b"bcdfgjklmnprtvz";
const VOWELS: &[u8] = b"aeiou";
const CLOSED_WORDS: [&str; 9] = ["the", "of", "and", "to", "it", "in", "on", "we", "can"];

/// Suffix per topic class; stems get the suffix, so the fallback tagger maps
/// each pool to one tag (VBG, VBD, NNS, JJ, RB; the last pool is numeric).
const CLASS_SUFFIXES: [&str; 5] = ["ing", "ed", "s", "ous", "ly"];

fn fresh_stem(rng: &mut Rng, used: &mut HashSet<String>) -> String {
    loop {
        let mut stem = String::with_capacity(4);
        stem.push(CONSONANTS[rng.gen_range(CONSONANTS.len())] as char);
        stem.push(VOWELS[rng.gen_range(VOWELS.len())] as char);
        stem.push(CONSONANTS[rng.gen_range(CONSONANTS.len())] as char);
        stem.push(VOWELS[rng.gen_range(VOWELS.len())] as char);
        stem.push(CONSONANTS[rng.gen_range(CONSONANTS.len())] as char);
        if used.insert(stem.clone()) {
            return stem;
        }
    }
}

struct Pools {
    /// Per topic: signature words, all of one tag class.
    signatures: Vec<Vec<String>>,
    /// Per tag class: background words of the same class, disjoint from
    /// every signature pool.
    backgrounds: Vec<Vec<String>>,
    filler: Vec<String>,
    closed: Vec<String>,
}

fn build_pools(rng: &mut Rng) -> Pools {
    let mut used = HashSet::new();
    let class_pool = |rng: &mut Rng, used: &mut HashSet<String>, class: usize, base: u64| {
        (0..POOL_WORDS)
            .map(|i| {
                if class == 5 {
                    // Numeric class: distinct multi-digit tokens.
                    format!("{}", base + i as u64)
                } else {
                    format!("{}{}", fresh_stem(rng, used), CLASS_SUFFIXES[class])
                }
            })
            .collect::<Vec<String>>()
    };
    let signatures: Vec<Vec<String>> = (0..N_TOPICS)
        .map(|t| class_pool(rng, &mut used, t, 10_000 + 100 * t as u64))
        .collect();
    let backgrounds: Vec<Vec<String>> = (0..N_TOPICS)
        .map(|c| class_pool(rng, &mut used, c, 50_000 + 100 * c as u64))
        .collect();
    let filler = (0..2 * POOL_WORDS).map(|_| fresh_stem(rng, &mut used)).collect();
    Pools {
        signatures,
        backgrounds,
        filler,
        closed: CLOSED_WORDS.iter().map(|w| w.to_string()).collect(),
    }
}

fn node_text(rng: &mut Rng, pools: &Pools, topic: usize, config: &SynthConfig) -> String {
    let span = config.max_tokens - config.min_tokens + 1;
    let length = config.min_tokens + rng.gen_range(span);
    let signature_frac = 0.35 + 0.15 * rng.next_f64();
    let background_fracs: Vec<f64> = (0..N_TOPICS)
        .map(|c| if c == topic { 0.0 } else { 0.05 + 0.07 * rng.next_f64() })
        .collect();
    let closed_frac = 0.08;

    let mut tokens = Vec::with_capacity(length);
    for _ in 0..length {
        let mut r = rng.next_f64();
        let pool: &[String] = 'pick: {
            if r < signature_frac {
                break 'pick &pools.signatures[topic][..];
            }
            r -= signature_frac;
            for (c, &frac) in background_fracs.iter().enumerate() {
                if r < frac {
                    break 'pick &pools.backgrounds[c][..];
                }
                r -= frac;
            }
            if r < closed_frac {
                break 'pick &pools.closed[..];
            }
            &pools.filler[..]
        };
        tokens.push(pool[rng.gen_range(pool.len())].clone());
    }
    tokens.join(" ")
}

/// Sample unordered node pairs with the requested labels: label 1 pairs are
/// same-topic, label 0 pairs cross-topic. No duplicates (in either order).
fn sample_pairs(
    rng: &mut Rng,
    topics: &[usize],
    by_topic: &[Vec<u64>],
    count: usize,
    taken: &mut HashSet<(u64, u64)>,
) -> Vec<PairExample> {
    let n = topics.len();
    let mut pairs = Vec::with_capacity(count);
    for k in 0..count {
        let want_link = 2 * k < count;
        loop {
            let (u, v) = if want_link {
                let topic = rng.gen_range(N_TOPICS);
                let members = &by_topic[topic];
                let a = members[rng.gen_range(members.len())];
                let b = members[rng.gen_range(members.len())];
                (a, b)
            } else {
                let a = rng.gen_range(n) as u64;
                let b = rng.gen_range(n) as u64;
                (a, b)
            };
            if u == v {
                continue;
            }
            let same_topic = topics[u as usize] == topics[v as usize];
            if same_topic != want_link {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if !taken.insert(key) {
                continue;
            }
            pairs.push(PairExample {
                u,
                v,
                label: Some(u8::from(want_link)),
            });
            break;
        }
    }
    rng.shuffle(&mut pairs);
    pairs
}

pub fn generate(config: &SynthConfig) -> SynthCorpus {
    assert!(config.n_nodes >= 2 * N_TOPICS, "need at least two nodes per topic");
    assert!(config.min_tokens >= 1 && config.min_tokens <= config.max_tokens);
    let mut rng = Rng::derive(config.seed, 0x73796e);
    let pools = build_pools(&mut rng);

    let topics: Vec<usize> = (0..config.n_nodes).map(|i| i % N_TOPICS).collect();
    let mut by_topic: Vec<Vec<u64>> = vec![Vec::new(); N_TOPICS];
    for (i, &t) in topics.iter().enumerate() {
        by_topic[t].push(i as u64);
    }
    let nodes: Vec<(u64, String)> = topics
        .iter()
        .enumerate()
        .map(|(i, &t)| (i as u64, node_text(&mut rng, &pools, t, config)))
        .collect();

    let mut taken = HashSet::new();
    let train_pairs = sample_pairs(&mut rng, &topics, &by_topic, config.n_pairs, &mut taken);
    let held_out = sample_pairs(&mut rng, &topics, &by_topic, config.n_test_pairs, &mut taken);
    let test_labels: Vec<u8> = held_out.iter().map(|p| p.label.expect("labeled")).collect();
    let test_pairs: Vec<TestPair> = held_out
        .into_iter()
        .enumerate()
        .map(|(row, p)| TestPair {
            row_id: row as u64,
            pair: PairExample { u: p.u, v: p.v, label: None },
        })
        .collect();

    SynthCorpus { nodes, train_pairs, test_pairs, test_labels }
}

/// Write node.tsv, train.csv (headered), and test.csv (headered) under `dir`.
pub fn write_files(corpus: &SynthCorpus, dir: &Path) -> Result<SynthPaths> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let paths = SynthPaths {
        nodes: dir.join("node.tsv"),
        train: dir.join("train.csv"),
        test: dir.join("test.csv"),
    };
    let mut buf = String::new();
    for (id, text) in &corpus.nodes {
        buf.push_str(&format!("{id}\t{text}\n"));
    }
    write_all(&paths.nodes, &buf)?;

    buf.clear();
    buf.push_str("id1,id2,label\n");
    for pair in &corpus.train_pairs {
        buf.push_str(&format!("{},{},{}\n", pair.u, pair.v, pair.label.expect("labeled")));
    }
    write_all(&paths.train, &buf)?;

    buf.clear();
    buf.push_str("id,id1,id2\n");
    for t in &corpus.test_pairs {
        buf.push_str(&format!("{},{},{}\n", t.row_id, t.pair.u, t.pair.v));
    }
    write_all(&paths.test, &buf)?;
    Ok(paths)
}

fn write_all(path: &Path, content: &str) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(content.as_bytes()).map_err(|e| Error::io(path, e))
}
