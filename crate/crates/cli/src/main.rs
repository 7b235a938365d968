//! `poslink`: staged link-prediction pipeline over files.
//!
//! Typical run:
//!   poslink gen --out data
//!   poslink ingest --nodes data/node.tsv --pairs data/train.csv --out work
//!   poslink tag --out work --fallback
//!   poslink stats --out work
//!   poslink select --out work --select ttest:0.05
//!   poslink train --out work --model random_forest
//!   poslink predict --out work --pairs data/test.csv --model-file work/random_forest.model
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{parse_kind, parse_mode, KeyValue, SelectMethod};
use poslink_core::{ClassifierKind, Error, FeatureMode};

#[derive(Parser)]
#[command(name = "poslink", version, about = "Text-based link prediction for article graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutDir {
    /// Output directory; every emitted file lands here.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic benchmark corpus (node.tsv, train.csv,
    /// test.csv).
    Gen {
        #[command(flatten)]
        out: OutDir,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Node count.
        #[arg(long, default_value_t = 300)]
        nodes: usize,
        /// Labeled pair count.
        #[arg(long, default_value_t = 3000)]
        pairs: usize,
        /// Unlabeled test pair count.
        #[arg(long, default_value_t = 600)]
        test_pairs: usize,
    },
    /// Load node and pair files, clean the text, and cache both.
    Ingest {
        /// Node file: `id<TAB>text` per line.
        #[arg(long)]
        nodes: PathBuf,
        /// Labeled pair file: `id1,id2,label` per line.
        #[arg(long)]
        pairs: PathBuf,
        #[command(flatten)]
        out: OutDir,
    },
    /// Train the averaged-perceptron tagger on a `word_TAG` corpus.
    TrainTagger {
        /// Tagged corpus: one sentence per line, `word_TAG` tokens.
        #[arg(long)]
        corpus: PathBuf,
        #[command(flatten)]
        out: OutDir,
        #[arg(long, default_value_t = 5)]
        epochs: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Tagset file (one tag per line); default is the built-in 37-tag
        /// inventory.
        #[arg(long)]
        tagset: Option<PathBuf>,
    },
    /// POS-tag the cached corpus and write per-node tag-count vectors.
    Tag {
        #[command(flatten)]
        out: OutDir,
        /// Trained tagger model file.
        #[arg(long, conflicts_with = "fallback")]
        tagger: Option<PathBuf>,
        /// Use the built-in rule-based tagger.
        #[arg(long)]
        fallback: bool,
        /// Tagset file for --fallback runs.
        #[arg(long, conflicts_with = "tagger")]
        tagset: Option<PathBuf>,
    },
    /// Emit the exploratory reports: label distribution, common-word
    /// histogram, and weighted/unweighted tag totals (CSV + SVG).
    Stats {
        #[command(flatten)]
        out: OutDir,
        #[arg(long, default_value_t = 10)]
        bucket_width: u64,
        /// Count common words as multiset overlap instead of distinct
        /// shared tokens.
        #[arg(long)]
        multiset: bool,
    },
    /// Select feature tags and write the tag list plus the t-test report.
    Select {
        #[command(flatten)]
        out: OutDir,
        /// full | topk:K | ttest:ALPHA | list:FILE
        #[arg(long)]
        select: SelectMethod,
    },
    /// Featurize pairs, split, train one classifier, and report validation
    /// metrics.
    Train {
        #[command(flatten)]
        out: OutDir,
        /// Tag list file (one tag per line); defaults to <out>/tags.txt when
        /// present, else the full tagset.
        #[arg(long, conflicts_with = "select")]
        tags: Option<PathBuf>,
        /// Inline selection method instead of a tag list file.
        #[arg(long)]
        select: Option<SelectMethod>,
        /// indicator | min | sum
        #[arg(long, default_value = "min", value_parser = parse_mode)]
        mode: FeatureMode,
        /// logistic | knn | decision_tree | random_forest | extra_trees |
        /// gbt | mlp | linear_svm
        #[arg(long, value_parser = parse_kind)]
        model: ClassifierKind,
        /// Hyperparameter override, repeatable: --param key=value
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<KeyValue>,
        #[arg(long, default_value_t = 0.2)]
        valid_fraction: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Append the common-word-count column to the features.
        #[arg(long)]
        common_words: bool,
    },
    /// Score unlabeled pairs with a trained model and write the submission
    /// CSV.
    Predict {
        #[command(flatten)]
        out: OutDir,
        #[arg(long)]
        model_file: PathBuf,
        /// Unlabeled pair file: `id,id1,id2` per line.
        #[arg(long)]
        pairs: PathBuf,
    },
    /// Compare tag-selection methods at a fixed classifier: one validation
    /// row per method.
    Ablate {
        #[command(flatten)]
        out: OutDir,
        /// Comma-separated selection methods, e.g. `topk:7,ttest:0.05,full`.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<SelectMethod>,
        #[arg(long, value_parser = parse_kind)]
        model: ClassifierKind,
        #[arg(long = "param", value_name = "K=V")]
        params: Vec<KeyValue>,
        #[arg(long, default_value = "min", value_parser = parse_mode)]
        mode: FeatureMode,
        #[arg(long, default_value_t = 0.2)]
        valid_fraction: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Gen { out, seed, nodes, pairs, test_pairs } => {
            commands::cmd_gen(&out.out, seed, nodes, pairs, test_pairs)
        }
        Command::Ingest { nodes, pairs, out } => commands::cmd_ingest(&nodes, &pairs, &out.out),
        Command::TrainTagger { corpus, out, epochs, seed, tagset } => {
            commands::cmd_train_tagger(&corpus, &out.out, epochs, seed, tagset.as_deref())
        }
        Command::Tag { out, tagger, fallback, tagset } => {
            commands::cmd_tag(&out.out, tagger.as_deref(), fallback, tagset.as_deref())
        }
        Command::Stats { out, bucket_width, multiset } => {
            commands::cmd_stats(&out.out, bucket_width, multiset)
        }
        Command::Select { out, select } => commands::cmd_select(&out.out, &select),
        Command::Train {
            out,
            tags,
            select,
            mode,
            model,
            params,
            valid_fraction,
            seed,
            common_words,
        } => commands::cmd_train(commands::TrainArgs {
            out: &out.out,
            tags: tags.as_deref(),
            select: select.as_ref(),
            mode,
            model,
            params: &params,
            valid_fraction,
            seed,
            common_words,
        }),
        Command::Predict { out, model_file, pairs } => {
            commands::cmd_predict(&out.out, &model_file, &pairs)
        }
        Command::Ablate { out, sizes, model, params, mode, valid_fraction, seed } => {
            commands::cmd_ablate(commands::AblateArgs {
                out: &out.out,
                sizes: &sizes,
                model,
                params: &params,
                mode,
                valid_fraction,
                seed,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are successes, not usage errors.
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Error::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
