//! Text-based link prediction for article graphs.
//!
//! The pipeline: ingest node text and labeled pairs, clean and tokenize,
//! POS-tag every node (trainable averaged perceptron or a rule fallback),
//! reduce each node to a tag-count vector, select discriminative tags with
//! per-tag Welch t-tests, featurize node pairs over the selected tags, and
//! train classical classifiers to score candidate links.

pub mod chart;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod features;
pub mod fmt;
pub mod models;
pub mod parallel;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod tagger;
pub mod tagset;

pub use corpus::{Node, PairExample, TestPair};
pub use error::{Error, Result};
pub use features::{FeatureMatrix, FeatureMode, TagCountVector};
pub use models::{ClassifierKind, ClassifierSpec, TrainedModel};
pub use stats::{TTestResult, WelchTest};
pub use tagger::PerceptronTagger;
pub use tagset::TagSet;
