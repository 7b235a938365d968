//! Subcommand implementations. Each stage reads the previous stage's files
//! from the output directory and writes its own there, so reruns and
//! ablations never repeat expensive work.

use std::collections::HashMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use poslink_core::corpus::{self, Node, PairExample};
use poslink_core::error::{Error, Result};
use poslink_core::features::{
    build_dataset, read_vectors_csv, write_vectors_csv, FeatureMode, TagCountVector,
    COMMON_WORDS_FEATURE,
};
use poslink_core::fmt::format_num;
use poslink_core::models::{self, ClassifierKind, ClassifierSpec};
use poslink_core::stats;
use poslink_core::tagger::{self, PerceptronTagger};
use poslink_core::{chart, eval, synth, TagSet};

const NODES_CACHE: &str = "nodes_clean.tsv";
const PAIRS_CACHE: &str = "pairs.csv";
const VECTORS_FILE: &str = "vectors.csv";
const TAGS_FILE: &str = "tags.txt";
const TTEST_REPORT: &str = "ttest_report.csv";

/// Tag-selection method named on the command line.
#[derive(Debug, Clone)]
pub enum SelectMethod {
    Full,
    TopK(usize),
    TTest(f64),
    List(PathBuf),
}

impl SelectMethod {
    pub fn label(&self) -> String {
        match self {
            SelectMethod::Full => "full".to_string(),
            SelectMethod::TopK(k) => format!("topk:{k}"),
            SelectMethod::TTest(alpha) => format!("ttest:{alpha}"),
            SelectMethod::List(path) => format!("list:{}", path.display()),
        }
    }
}

impl FromStr for SelectMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<SelectMethod, String> {
        if s == "full" {
            return Ok(SelectMethod::Full);
        }
        if let Some(rest) = s.strip_prefix("topk:") {
            let k: usize = rest
                .parse()
                .map_err(|_| format!("bad top-k count `{rest}`"))?;
            if k == 0 {
                return Err("top-k count must be at least 1".to_string());
            }
            return Ok(SelectMethod::TopK(k));
        }
        if let Some(rest) = s.strip_prefix("ttest:") {
            let alpha: f64 = rest
                .parse()
                .map_err(|_| format!("bad alpha `{rest}`"))?;
            if !(0.0 < alpha && alpha < 1.0) {
                return Err(format!("alpha must lie in (0,1), got {alpha}"));
            }
            return Ok(SelectMethod::TTest(alpha));
        }
        if let Some(rest) = s.strip_prefix("list:") {
            return Ok(SelectMethod::List(PathBuf::from(rest)));
        }
        Err(format!(
            "bad selection `{s}` (expected full | topk:K | ttest:ALPHA | list:FILE)"
        ))
    }
}

/// `key=value` hyperparameter pair.
#[derive(Debug, Clone)]
pub struct KeyValue {
    pub key: String,
    pub value: f64,
}

impl FromStr for KeyValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<KeyValue, String> {
        let (key, value) = s
            .split_once('=')
            .ok_or_else(|| format!("bad param `{s}` (expected key=value)"))?;
        let value: f64 = value
            .parse()
            .map_err(|_| format!("bad param value in `{s}`"))?;
        Ok(KeyValue { key: key.to_string(), value })
    }
}

pub fn parse_mode(s: &str) -> Result<FeatureMode> {
    s.parse()
}

pub fn parse_kind(s: &str) -> Result<ClassifierKind> {
    s.parse()
}

fn write_text(path: &Path, content: &str) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(content.as_bytes()).map_err(|e| Error::io(path, e))
}

fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))
}

fn load_cache(out: &Path) -> Result<(Vec<Node>, Vec<PairExample>)> {
    let nodes = corpus::load_nodes(&out.join(NODES_CACHE))?;
    let pairs = corpus::load_pairs(&out.join(PAIRS_CACHE), true)?;
    Ok((nodes, pairs))
}

fn load_vectors(out: &Path) -> Result<(TagSet, HashMap<u64, TagCountVector>)> {
    read_vectors_csv(&out.join(VECTORS_FILE))
}

pub fn cmd_gen(
    out: &Path,
    seed: u64,
    nodes: usize,
    pairs: usize,
    test_pairs: usize,
) -> Result<()> {
    let config = synth::SynthConfig {
        n_nodes: nodes,
        n_pairs: pairs,
        n_test_pairs: test_pairs,
        seed,
        ..synth::SynthConfig::default()
    };
    let corpus = synth::generate(&config);
    let paths = synth::write_files(&corpus, out)?;
    println!(
        "wrote {} nodes, {} labeled pairs, {} test pairs",
        corpus.nodes.len(),
        corpus.train_pairs.len(),
        corpus.test_pairs.len()
    );
    println!("  {}", paths.nodes.display());
    println!("  {}", paths.train.display());
    println!("  {}", paths.test.display());
    Ok(())
}

pub fn cmd_ingest(nodes_path: &Path, pairs_path: &Path, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let nodes = corpus::load_nodes(nodes_path)?;
    let pairs = corpus::load_pairs(pairs_path, true)?;
    let (zeros, ones) = stats::label_distribution(&pairs)?;

    let mut buf = String::new();
    for node in &nodes {
        buf.push_str(&format!("{}\t{}\n", node.id, node.clean_text));
    }
    write_text(&out.join(NODES_CACHE), &buf)?;

    buf.clear();
    buf.push_str("id1,id2,label\n");
    for pair in &pairs {
        buf.push_str(&format!("{},{},{}\n", pair.u, pair.v, pair.label.expect("labeled")));
    }
    write_text(&out.join(PAIRS_CACHE), &buf)?;

    println!(
        "{} nodes, {} pairs ({zeros} with label 0, {ones} with label 1)",
        nodes.len(),
        pairs.len()
    );
    Ok(())
}

pub fn cmd_train_tagger(
    corpus_path: &Path,
    out: &Path,
    epochs: usize,
    seed: u64,
    tagset: Option<&Path>,
) -> Result<()> {
    ensure_out_dir(out)?;
    let sentences = tagger::load_tagged_corpus(corpus_path)?;
    let tagset = match tagset {
        Some(path) => TagSet::from_file(path)?,
        None => TagSet::penn_treebank(),
    };
    let model = tagger::train_tagger(&sentences, epochs, seed, &tagset)?;
    let train_acc = tagger::token_accuracy(&model, &sentences)?;
    let path = out.join("tagger.model");
    model.save(&path)?;
    println!(
        "trained on {} sentences for {epochs} epochs; training accuracy {}",
        sentences.len(),
        format_num(train_acc)
    );
    println!("  {}", path.display());
    Ok(())
}

type TagFn = Box<dyn Fn(&[&str]) -> Result<Vec<(String, String)>>>;

pub fn cmd_tag(
    out: &Path,
    tagger_path: Option<&Path>,
    fallback: bool,
    tagset_path: Option<&Path>,
) -> Result<()> {
    let nodes = corpus::load_nodes(&out.join(NODES_CACHE))?;
    let (tagset, tag_tokens): (TagSet, TagFn) =
        match (tagger_path, fallback) {
            (Some(path), false) => {
                let model = PerceptronTagger::load(path)?;
                let tagset = model.tagset().clone();
                (tagset, Box::new(move |tokens| model.tag(tokens)))
            }
            (None, true) => {
                let tagset = match tagset_path {
                    Some(path) => TagSet::from_file(path)?,
                    None => TagSet::penn_treebank(),
                };
                (tagset, Box::new(|tokens| Ok(tagger::fallback_tag(tokens))))
            }
            (None, false) => {
                return Err(Error::data(
                    "no tagger model given; pass --tagger FILE or --fallback",
                ))
            }
            (Some(_), true) => unreachable!("clap rejects --tagger with --fallback"),
        };

    let mut vectors = HashMap::with_capacity(nodes.len());
    for node in &nodes {
        // The cache stores cleaned text in the text column.
        let tokens = corpus::tokenize(&node.raw_text);
        let tagged = tag_tokens(&tokens)?;
        let vector = poslink_core::features::count_tags(&tagged, &tagset)?;
        vectors.insert(node.id, vector);
    }
    write_vectors_csv(&vectors, &tagset, &out.join(VECTORS_FILE))?;

    let mut seen = vec![false; tagset.len()];
    for vector in vectors.values() {
        for (flag, &count) in seen.iter_mut().zip(vector.counts()) {
            *flag |= count > 0;
        }
    }
    let distinct = seen.iter().filter(|&&s| s).count();
    println!(
        "tagged {} nodes; {distinct} of {} tags observed",
        nodes.len(),
        tagset.len()
    );
    Ok(())
}

pub fn cmd_stats(out: &Path, bucket_width: u64, multiset: bool) -> Result<()> {
    let (nodes, pairs) = load_cache(out)?;
    let (tagset, vectors) = load_vectors(out)?;

    let (zeros, ones) = stats::label_distribution(&pairs)?;
    let labels = vec!["0".to_string(), "1".to_string()];
    write_text(
        &out.join("label_distribution.csv"),
        &format!("label,count\n0,{zeros}\n1,{ones}\n"),
    )?;
    chart::write_bar_chart(
        &out.join("label_distribution.svg"),
        "label distribution",
        &labels,
        &[zeros as f64, ones as f64],
    )?;

    let node_tokens: HashMap<u64, Vec<String>> = nodes
        .iter()
        .map(|n| {
            let tokens = corpus::tokenize(&n.raw_text).into_iter().map(String::from).collect();
            (n.id, tokens)
        })
        .collect();
    let counter = if multiset {
        corpus::common_word_count_multiset
    } else {
        corpus::common_word_count
    };
    let hist = stats::common_word_histogram_with(&pairs, &node_tokens, bucket_width, counter)?;
    let mut buf = String::from("bucket_start,count\n");
    let mut hist_labels = Vec::new();
    let mut hist_values = Vec::new();
    for (bucket, count) in &hist {
        buf.push_str(&format!("{bucket},{count}\n"));
        hist_labels.push(bucket.to_string());
        hist_values.push(*count as f64);
    }
    write_text(&out.join("common_words_hist.csv"), &buf)?;
    chart::write_bar_chart(
        &out.join("common_words_hist.svg"),
        "common words between linked pairs",
        &hist_labels,
        &hist_values,
    )?;

    for (weighted, stem) in [(false, "tag_totals_unweighted"), (true, "tag_totals_weighted")] {
        let totals = stats::tag_appearance_totals(&pairs, &vectors, &tagset, weighted)?;
        let mut buf = String::from("tag,total\n");
        for (tag, total) in tagset.labels().iter().zip(&totals) {
            buf.push_str(&format!("{tag},{total}\n"));
        }
        write_text(&out.join(format!("{stem}.csv")), &buf)?;
        let values: Vec<f64> = totals.iter().map(|&t| t as f64).collect();
        let title = if weighted {
            "common tag appearances (weighted)"
        } else {
            "common tag appearances (not weighted)"
        };
        chart::write_bar_chart(
            &out.join(format!("{stem}.svg")),
            title,
            tagset.labels(),
            &values,
        )?;
    }
    println!("wrote label distribution, common-word histogram, and tag totals under {}", out.display());
    Ok(())
}

fn read_tag_list(path: &Path, tagset: &TagSet) -> Result<Vec<String>> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let tags: Vec<String> = content
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect();
    if tags.is_empty() {
        return Err(Error::data(format!("tag list {} is empty", path.display())));
    }
    tagset.resolve(&tags)?;
    Ok(tags)
}

/// Resolve a selection method to an ordered tag list, plus the t-test report
/// when one was computed.
fn resolve_selection(
    method: &SelectMethod,
    pairs: &[PairExample],
    vectors: &HashMap<u64, TagCountVector>,
    tagset: &TagSet,
) -> Result<(Vec<String>, Option<Vec<stats::TTestResult>>)> {
    match method {
        SelectMethod::Full => Ok((tagset.labels().to_vec(), None)),
        SelectMethod::TopK(k) => {
            let totals = stats::tag_appearance_totals(pairs, vectors, tagset, true)?;
            let (tags, truncated) = stats::top_k_by_weight(&totals, tagset, *k)?;
            if truncated {
                eprintln!(
                    "warning: only {} tags have nonzero weighted totals (asked for {k})",
                    tags.len()
                );
            }
            Ok((tags, None))
        }
        SelectMethod::TTest(alpha) => {
            let (tags, report) = stats::select_tags(pairs, vectors, tagset, *alpha)?;
            Ok((tags, Some(report)))
        }
        SelectMethod::List(path) => Ok((read_tag_list(path, tagset)?, None)),
    }
}

fn write_ttest_report(report: &[stats::TTestResult], path: &Path) -> Result<()> {
    let mut buf = String::from("tag,t_stat,dof,p_value,mean_linked,mean_unlinked\n");
    for row in report {
        buf.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.tag,
            format_num(row.t_stat),
            format_num(row.dof),
            format_num(row.p_value),
            format_num(row.mean_linked),
            format_num(row.mean_unlinked)
        ));
    }
    write_text(path, &buf)
}

pub fn cmd_select(out: &Path, method: &SelectMethod) -> Result<()> {
    let (_, pairs) = load_cache(out)?;
    let (tagset, vectors) = load_vectors(out)?;
    let (tags, report) = resolve_selection(method, &pairs, &vectors, &tagset)?;
    // The per-tag report is informative for every method; compute it
    // opportunistically when the selection itself did not.
    let report = match report {
        Some(r) => Some(r),
        None => stats::select_tags(&pairs, &vectors, &tagset, 0.05)
            .ok()
            .map(|(_, r)| r),
    };
    let mut buf = String::new();
    for tag in &tags {
        buf.push_str(tag);
        buf.push('\n');
    }
    write_text(&out.join(TAGS_FILE), &buf)?;
    if let Some(report) = &report {
        write_ttest_report(report, &out.join(TTEST_REPORT))?;
    }
    println!("selected {} tags ({})", tags.len(), method.label());
    Ok(())
}

fn common_word_counts(
    nodes: &[Node],
    pairs: impl Iterator<Item = (u64, u64)>,
) -> Result<HashMap<(u64, u64), u64>> {
    let token_sets: HashMap<u64, Vec<&str>> = nodes
        .iter()
        .map(|n| (n.id, corpus::tokenize(&n.raw_text)))
        .collect();
    let mut counts = HashMap::new();
    for (u, v) in pairs {
        let key = (u.min(v), u.max(v));
        if counts.contains_key(&key) {
            continue;
        }
        let u_tokens = token_sets
            .get(&u)
            .ok_or_else(|| Error::data(format!("no cached text for node {u}")))?;
        let v_tokens = token_sets
            .get(&v)
            .ok_or_else(|| Error::data(format!("no cached text for node {v}")))?;
        counts.insert(key, corpus::common_word_count(u_tokens, v_tokens) as u64);
    }
    Ok(counts)
}

pub struct TrainArgs<'a> {
    pub out: &'a Path,
    pub tags: Option<&'a Path>,
    pub select: Option<&'a SelectMethod>,
    pub mode: FeatureMode,
    pub model: ClassifierKind,
    pub params: &'a [KeyValue],
    pub valid_fraction: f64,
    pub seed: u64,
    pub common_words: bool,
}

fn build_spec(kind: ClassifierKind, params: &[KeyValue], seed: u64) -> Result<ClassifierSpec> {
    let mut spec = ClassifierSpec::new(kind, seed);
    for kv in params {
        spec.set_param(&kv.key, kv.value)?;
    }
    Ok(spec)
}

pub fn cmd_train(args: TrainArgs<'_>) -> Result<()> {
    let (nodes, pairs) = load_cache(args.out)?;
    let (tagset, vectors) = load_vectors(args.out)?;
    let spec = build_spec(args.model, args.params, args.seed)?;

    let tags = if let Some(path) = args.tags {
        read_tag_list(path, &tagset)?
    } else if let Some(method) = args.select {
        resolve_selection(method, &pairs, &vectors, &tagset)?.0
    } else {
        let default_list = args.out.join(TAGS_FILE);
        if default_list.exists() {
            read_tag_list(&default_list, &tagset)?
        } else {
            tagset.labels().to_vec()
        }
    };

    let cw;
    let common_words = if args.common_words {
        cw = common_word_counts(&nodes, pairs.iter().map(|p| (p.u, p.v)))?;
        Some(&cw)
    } else {
        None
    };
    let matrix = build_dataset(
        &pairs,
        &vectors,
        &tagset,
        &tags,
        args.mode,
        args.common_words,
        common_words,
    )?;
    let (train_m, valid_m) = eval::train_valid_split(&matrix, args.valid_fraction, args.seed)?;

    let started = Instant::now();
    let mut model = models::train(&spec, &train_m)?;
    let train_seconds = started.elapsed().as_secs_f64();
    model.feature_mode = Some(args.mode);
    let predict_started = Instant::now();
    let (acc, f1) = eval::evaluate(&model, &valid_m)?;
    let predict_seconds = predict_started.elapsed().as_secs_f64();

    let model_path = args.out.join(format!("{}.model", spec.kind.name()));
    models::save_model(&model, &model_path)?;
    let report = eval::EvalReport {
        rows: vec![eval::EvalRow {
            model: spec.kind.name().to_string(),
            accuracy: acc,
            f1,
            train_seconds,
            predict_seconds,
            error: None,
        }],
    };
    report.write_csv(&args.out.join("report.csv"))?;
    print!("{}", report.render_table());
    println!(
        "trained on {} rows, validated on {} rows ({} features)",
        train_m.n_rows(),
        valid_m.n_rows(),
        matrix.n_features()
    );
    println!("  {}", model_path.display());
    Ok(())
}

pub fn cmd_predict(out: &Path, model_file: &Path, pairs_path: &Path) -> Result<()> {
    let model = models::load_model(model_file)?;
    let (tagset, vectors) = load_vectors(out)?;
    let test_rows = corpus::load_test_pairs(pairs_path)?;

    let uses_common_words =
        model.feature_names.last().map(String::as_str) == Some(COMMON_WORDS_FEATURE);
    let tags: Vec<String> = if uses_common_words {
        model.feature_names[..model.feature_names.len() - 1].to_vec()
    } else {
        model.feature_names.clone()
    };
    let mode = model.feature_mode.unwrap_or(FeatureMode::Min);

    let pairs: Vec<PairExample> = test_rows.iter().map(|t| t.pair).collect();
    let cw;
    let common_words = if uses_common_words {
        let nodes = corpus::load_nodes(&out.join(NODES_CACHE))?;
        cw = common_word_counts(&nodes, pairs.iter().map(|p| (p.u, p.v)))?;
        Some(&cw)
    } else {
        None
    };
    let matrix = build_dataset(
        &pairs,
        &vectors,
        &tagset,
        &tags,
        mode,
        uses_common_words,
        common_words,
    )?;

    let mut predictions = Vec::with_capacity(matrix.rows.len());
    for row in &matrix.rows {
        predictions.push(model.predict(row)?);
    }
    let row_ids: Vec<u64> = test_rows.iter().map(|t| t.row_id).collect();
    let path = out.join("submission.csv");
    eval::write_submission(&row_ids, &predictions, &path)?;
    let positive = predictions.iter().filter(|&&p| p == 1).count();
    println!(
        "predicted {} pairs ({positive} positive) with {}",
        predictions.len(),
        model.kind().name()
    );
    println!("  {}", path.display());
    Ok(())
}

pub struct AblateArgs<'a> {
    pub out: &'a Path,
    pub sizes: &'a [SelectMethod],
    pub model: ClassifierKind,
    pub params: &'a [KeyValue],
    pub mode: FeatureMode,
    pub valid_fraction: f64,
    pub seed: u64,
}

pub fn cmd_ablate(args: AblateArgs<'_>) -> Result<()> {
    let (_, pairs) = load_cache(args.out)?;
    let (tagset, vectors) = load_vectors(args.out)?;
    let spec = build_spec(args.model, args.params, args.seed)?;

    let mut buf = String::from("selection,n_tags,accuracy,f1\n");
    let mut table = format!(
        "{:<16} {:>7} {:>10} {:>10}\n",
        "selection", "n_tags", "accuracy", "f1"
    );
    for method in args.sizes {
        let (tags, _) = resolve_selection(method, &pairs, &vectors, &tagset)?;
        let matrix =
            build_dataset(&pairs, &vectors, &tagset, &tags, args.mode, false, None)?;
        let (train_m, valid_m) =
            eval::train_valid_split(&matrix, args.valid_fraction, args.seed)?;
        let model = models::train(&spec, &train_m)?;
        let (acc, f1) = eval::evaluate(&model, &valid_m)?;
        buf.push_str(&format!(
            "{},{},{},{}\n",
            method.label(),
            tags.len(),
            format_num(acc),
            format_num(f1)
        ));
        table.push_str(&format!(
            "{:<16} {:>7} {:>10.6} {:>10.6}\n",
            method.label(),
            tags.len(),
            acc,
            f1
        ));
    }
    write_text(&args.out.join("ablation.csv"), &buf)?;
    print!("{table}");
    println!("  {}", args.out.join("ablation.csv").display());
    Ok(())
}
