//! The classifier zoo behind one train/predict contract.
//!
//! Eight learners, all implemented in this crate: logistic regression, KNN,
//! CART decision tree, random forest, extra trees, gradient-boosted trees,
//! an MLP, and a linear SVM. Training is deterministic for a fixed spec
//! (seed included) and feature matrix.

mod forest;
mod gbt;
mod knn;
mod logistic;
mod mlp;
mod standardize;
mod svm;
pub mod tree;

pub use forest::{train_forest, ForestKind, ForestModel};
pub use gbt::{train_gbt, GbtModel, GbtParams};
pub use knn::{train_knn, KnnModel};
pub use logistic::{train_logistic, LogisticModel, LogisticParams};
pub use mlp::{init_mlp, train_mlp, Dense, MlpModel, MlpParams};
pub use standardize::Standardizer;
pub use svm::{train_svm, SvmModel, SvmParams};
pub use tree::{Tree, TreeNode, TreeOptions};

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::features::{FeatureMatrix, FeatureMode};
use crate::parallel;

const MAGIC: &str = "poslink-model v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClassifierKind {
    Logistic,
    Knn,
    DecisionTree,
    RandomForest,
    ExtraTrees,
    Gbt,
    Mlp,
    LinearSvm,
}

impl ClassifierKind {
    pub fn name(self) -> &'static str {
        match self {
            ClassifierKind::Logistic => "logistic",
            ClassifierKind::Knn => "knn",
            ClassifierKind::DecisionTree => "decision_tree",
            ClassifierKind::RandomForest => "random_forest",
            ClassifierKind::ExtraTrees => "extra_trees",
            ClassifierKind::Gbt => "gbt",
            ClassifierKind::Mlp => "mlp",
            ClassifierKind::LinearSvm => "linear_svm",
        }
    }

    pub fn all() -> [ClassifierKind; 8] {
        [
            ClassifierKind::Logistic,
            ClassifierKind::Knn,
            ClassifierKind::DecisionTree,
            ClassifierKind::RandomForest,
            ClassifierKind::ExtraTrees,
            ClassifierKind::Gbt,
            ClassifierKind::Mlp,
            ClassifierKind::LinearSvm,
        ]
    }

    /// Hyperparameter keys this kind accepts; anything else is rejected when
    /// the spec is built.
    fn allowed_keys(self) -> &'static [&'static str] {
        match self {
            ClassifierKind::Logistic => &["lambda", "learning_rate", "max_iter", "tol"],
            ClassifierKind::Knn => &["k"],
            ClassifierKind::DecisionTree => &["max_depth"],
            ClassifierKind::RandomForest | ClassifierKind::ExtraTrees => {
                &["n_estimators", "max_depth"]
            }
            ClassifierKind::Gbt => &["eta", "n_estimators", "max_depth", "min_samples_leaf"],
            ClassifierKind::Mlp => &["epochs", "batch_size", "learning_rate"],
            ClassifierKind::LinearSvm => &["lambda", "epochs"],
        }
    }
}

impl FromStr for ClassifierKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<ClassifierKind> {
        ClassifierKind::all()
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = ClassifierKind::all().iter().map(|k| k.name()).collect();
                Error::data(format!(
                    "unknown model kind `{s}` (expected one of: {})",
                    names.join(", ")
                ))
            })
    }
}

/// A classifier choice plus hyperparameter overrides and the master seed.
/// Unset hyperparameters fall back to each learner's documented defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifierSpec {
    pub kind: ClassifierKind,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(kind: ClassifierKind, seed: u64) -> ClassifierSpec {
        ClassifierSpec {
            kind,
            params: BTreeMap::new(),
            seed,
        }
    }

    /// Set a hyperparameter, rejecting keys the kind does not define.
    pub fn set_param(&mut self, key: &str, value: f64) -> Result<()> {
        if !self.kind.allowed_keys().contains(&key) {
            return Err(Error::data(format!(
                "model `{}` has no hyperparameter `{key}` (allowed: {})",
                self.kind.name(),
                self.kind.allowed_keys().join(", ")
            )));
        }
        if !value.is_finite() {
            return Err(Error::data(format!("hyperparameter `{key}` must be finite")));
        }
        self.params.insert(key.to_string(), value);
        Ok(())
    }

    pub fn with_param(mut self, key: &str, value: f64) -> Result<ClassifierSpec> {
        self.set_param(key, value)?;
        Ok(self)
    }

    /// Boosted-trees preset mirroring a stock LightGBM run: shallow trees,
    /// small step, 100 rounds.
    pub fn gbt_light_preset(seed: u64) -> ClassifierSpec {
        let mut spec = ClassifierSpec::new(ClassifierKind::Gbt, seed);
        spec.set_param("eta", 0.1).expect("valid key");
        spec.set_param("n_estimators", 100.0).expect("valid key");
        spec.set_param("max_depth", 6.0).expect("valid key");
        spec
    }

    fn param(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn usize_param(&self, key: &str, default: usize) -> Result<usize> {
        let v = self.param(key, default as f64);
        if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(Error::data(format!(
                "hyperparameter `{key}` must be a positive integer, got {v}"
            )));
        }
        Ok(v as usize)
    }

    fn optional_usize_param(&self, key: &str) -> Result<Option<usize>> {
        match self.params.get(key) {
            None => Ok(None),
            Some(_) => Ok(Some(self.usize_param(key, 0)?)),
        }
    }
}

/// Learned state per classifier kind.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelState {
    Logistic(LogisticModel),
    Knn(KnnModel),
    Tree(Tree),
    Forest(ForestModel),
    Gbt(GbtModel),
    Mlp(MlpModel),
    Svm(SvmModel),
}

/// A trained classifier bound to the feature layout it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub feature_names: Vec<String>,
    /// Pipeline metadata: how pair features were derived, when known.
    pub feature_mode: Option<FeatureMode>,
    pub state: ModelState,
}

pub fn train(spec: &ClassifierSpec, matrix: &FeatureMatrix) -> Result<TrainedModel> {
    let labels = matrix
        .labels
        .as_ref()
        .ok_or_else(|| Error::data("training requires a labeled feature matrix"))?;
    let n = matrix.rows.len();
    if n < 2 {
        return Err(Error::data(format!("training needs at least 2 rows, got {n}")));
    }
    let d = matrix.feature_names.len();
    if d == 0 {
        return Err(Error::data("training needs at least one feature"));
    }
    for (i, row) in matrix.rows.iter().enumerate() {
        if row.len() != d {
            return Err(Error::data(format!(
                "row {i} has {} features, expected {d}",
                row.len()
            )));
        }
        if row.iter().any(|v| !v.is_finite()) {
            return Err(Error::data(format!("row {i} contains a non-finite value")));
        }
    }
    let has_zero = labels.contains(&0);
    let has_one = labels.contains(&1);
    let tolerates_one_class = matches!(
        spec.kind,
        ClassifierKind::DecisionTree | ClassifierKind::RandomForest | ClassifierKind::ExtraTrees
    );
    if !(has_zero && has_one) && !tolerates_one_class {
        return Err(Error::data(format!(
            "model `{}` requires both labels in the training data",
            spec.kind.name()
        )));
    }

    let x = &matrix.rows;
    let y = labels;
    let workers = parallel::worker_count();
    let state = match spec.kind {
        ClassifierKind::Logistic => {
            let params = LogisticParams {
                lambda: spec.param("lambda", 1e-4),
                learning_rate: spec.param("learning_rate", 0.1),
                max_iter: spec.usize_param("max_iter", 500)?,
                tol: spec.param("tol", 1e-6),
            };
            ModelState::Logistic(train_logistic(x, y, &params))
        }
        ClassifierKind::Knn => ModelState::Knn(train_knn(x, y, spec.usize_param("k", 3)?)),
        ClassifierKind::DecisionTree => {
            let opts = TreeOptions {
                max_depth: spec.optional_usize_param("max_depth")?,
                ..TreeOptions::default()
            };
            ModelState::Tree(tree::fit_classification(x, y, (0..n).collect(), &opts, None))
        }
        ClassifierKind::RandomForest | ClassifierKind::ExtraTrees => {
            let kind = if spec.kind == ClassifierKind::RandomForest {
                ForestKind::Bagged
            } else {
                ForestKind::ExtraTrees
            };
            ModelState::Forest(train_forest(
                x,
                y,
                kind,
                spec.usize_param("n_estimators", 150)?,
                spec.optional_usize_param("max_depth")?,
                spec.seed,
                workers,
            ))
        }
        ClassifierKind::Gbt => {
            let params = GbtParams {
                eta: spec.param("eta", 0.5),
                n_rounds: spec.usize_param("n_estimators", 250)?,
                max_depth: spec.usize_param("max_depth", 40)?,
                min_samples_leaf: spec.usize_param("min_samples_leaf", 2)?,
            };
            ModelState::Gbt(train_gbt(x, y, &params).0)
        }
        ClassifierKind::Mlp => {
            let params = MlpParams {
                epochs: spec.usize_param("epochs", 20)?,
                batch_size: spec.usize_param("batch_size", 256)?,
                learning_rate: spec.param("learning_rate", 1e-3),
            };
            ModelState::Mlp(train_mlp(x, y, &params, spec.seed))
        }
        ClassifierKind::LinearSvm => {
            let params = SvmParams {
                lambda: spec.param("lambda", 1e-4),
                epochs: spec.usize_param("epochs", 10)?,
            };
            ModelState::Svm(train_svm(x, y, &params, spec.seed))
        }
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        feature_names: matrix.feature_names.clone(),
        feature_mode: None,
        state,
    })
}

impl TrainedModel {
    pub fn kind(&self) -> ClassifierKind {
        self.spec.kind
    }

    /// Probability of label 1 for one feature row.
    pub fn predict_proba(&self, row: &[f64]) -> Result<f64> {
        if row.len() != self.feature_names.len() {
            return Err(Error::data(format!(
                "row has {} features, model expects {}",
                row.len(),
                self.feature_names.len()
            )));
        }
        Ok(match &self.state {
            ModelState::Logistic(m) => m.predict_proba(row),
            ModelState::Knn(m) => m.predict_proba(row),
            ModelState::Tree(t) => t.predict(row),
            ModelState::Forest(f) => f.predict_proba(row),
            ModelState::Gbt(g) => g.predict_proba(row),
            ModelState::Mlp(m) => m.predict_proba(row),
            ModelState::Svm(m) => m.predict_proba(row),
        })
    }

    /// 1 iff the probability reaches `threshold` (boundary inclusive).
    pub fn predict_with_threshold(&self, row: &[f64], threshold: f64) -> Result<u8> {
        Ok(u8::from(self.predict_proba(row)? >= threshold))
    }

    pub fn predict(&self, row: &[f64]) -> Result<u8> {
        self.predict_with_threshold(row, 0.5)
    }
}

// ---------------------------------------------------------------------------
// Versioned model container: flat text, kind-tagged, byte-deterministic.
// ---------------------------------------------------------------------------

fn push_kv(buf: &mut String, key: &str, value: impl std::fmt::Display) {
    buf.push_str(key);
    buf.push(' ');
    buf.push_str(&value.to_string());
    buf.push('\n');
}

fn push_f64s(buf: &mut String, key: &str, values: &[f64]) {
    buf.push_str(key);
    for v in values {
        buf.push(' ');
        buf.push_str(&v.to_string());
    }
    buf.push('\n');
}

fn push_standardizer(buf: &mut String, s: &Standardizer) {
    push_f64s(buf, "means", &s.means);
    push_f64s(buf, "stds", &s.stds);
}

fn push_tree(buf: &mut String, tree: &Tree) {
    push_kv(buf, "tree", tree.nodes.len());
    for node in &tree.nodes {
        match node {
            TreeNode::Split { feature, threshold, left, right } => {
                buf.push_str(&format!("s {feature} {threshold} {left} {right}\n"));
            }
            TreeNode::Leaf { value } => {
                buf.push_str(&format!("l {value}\n"));
            }
        }
    }
}

pub fn save_model(model: &TrainedModel, path: &Path) -> Result<()> {
    let mut buf = String::new();
    buf.push_str(MAGIC);
    buf.push('\n');
    push_kv(&mut buf, "kind", model.spec.kind.name());
    push_kv(&mut buf, "seed", model.spec.seed);
    push_kv(&mut buf, "params", model.spec.params.len());
    for (key, value) in &model.spec.params {
        push_kv(&mut buf, key, value);
    }
    push_kv(
        &mut buf,
        "mode",
        model.feature_mode.map_or("none", FeatureMode::name),
    );
    push_kv(&mut buf, "features", model.feature_names.len());
    for name in &model.feature_names {
        buf.push_str(name);
        buf.push('\n');
    }
    buf.push_str("state\n");
    match &model.state {
        ModelState::Logistic(m) => {
            push_standardizer(&mut buf, &m.standardizer);
            push_f64s(&mut buf, "weights", &m.weights);
            push_kv(&mut buf, "bias", m.bias);
        }
        ModelState::Knn(m) => {
            push_standardizer(&mut buf, &m.standardizer);
            push_kv(&mut buf, "k", m.k);
            push_kv(&mut buf, "rows", m.rows.len());
            for (row, label) in m.rows.iter().zip(&m.labels) {
                buf.push_str(&label.to_string());
                for v in row {
                    buf.push(' ');
                    buf.push_str(&v.to_string());
                }
                buf.push('\n');
            }
        }
        ModelState::Tree(t) => push_tree(&mut buf, t),
        ModelState::Forest(f) => {
            push_kv(&mut buf, "trees", f.trees.len());
            for tree in &f.trees {
                push_tree(&mut buf, tree);
            }
        }
        ModelState::Gbt(g) => {
            push_kv(&mut buf, "base", g.base_score);
            push_kv(&mut buf, "eta", g.eta);
            push_kv(&mut buf, "trees", g.trees.len());
            for tree in &g.trees {
                push_tree(&mut buf, tree);
            }
        }
        ModelState::Mlp(m) => {
            push_standardizer(&mut buf, &m.standardizer);
            push_kv(&mut buf, "layers", m.layers.len());
            for layer in &m.layers {
                buf.push_str(&format!("layer {} {}\n", layer.n_in, layer.n_out));
                push_f64s(&mut buf, "w", &layer.w);
                push_f64s(&mut buf, "b", &layer.b);
            }
        }
        ModelState::Svm(m) => {
            push_standardizer(&mut buf, &m.standardizer);
            push_f64s(&mut buf, "weights", &m.weights);
            push_kv(&mut buf, "bias", m.bias);
        }
    }
    buf.push_str("end\n");
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

struct LineReader<'a> {
    lines: std::str::Lines<'a>,
    path: &'a Path,
    lineno: usize,
}

impl<'a> LineReader<'a> {
    fn next(&mut self, what: &str) -> Result<&'a str> {
        self.lineno += 1;
        self.lines.next().ok_or_else(|| {
            Error::data(format!(
                "truncated model file {}: missing {what}",
                self.path.display()
            ))
        })
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::parse(self.path, self.lineno, msg)
    }

    /// Read a `key value` line, returning the value.
    fn kv(&mut self, key: &str) -> Result<&'a str> {
        let line = self.next(key)?;
        line.strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .ok_or_else(|| self.err(format!("expected `{key} ...`, got `{line}`")))
    }

    fn count(&mut self, key: &str) -> Result<usize> {
        let v = self.kv(key)?;
        v.parse().map_err(|_| self.err(format!("bad count `{v}`")))
    }

    fn f64_value(&mut self, key: &str) -> Result<f64> {
        let v = self.kv(key)?;
        v.parse().map_err(|_| self.err(format!("bad number `{v}`")))
    }

    fn f64s(&mut self, key: &str, expected: usize) -> Result<Vec<f64>> {
        let rest = self.kv(key)?;
        let values: std::result::Result<Vec<f64>, _> =
            rest.split(' ').map(str::parse::<f64>).collect();
        let values = values.map_err(|_| self.err(format!("bad number list for `{key}`")))?;
        if values.len() != expected {
            return Err(self.err(format!(
                "`{key}` has {} values, expected {expected}",
                values.len()
            )));
        }
        Ok(values)
    }
}

fn read_standardizer(r: &mut LineReader<'_>, d: usize) -> Result<Standardizer> {
    let means = r.f64s("means", d)?;
    let stds = r.f64s("stds", d)?;
    Ok(Standardizer { means, stds })
}

fn read_tree(r: &mut LineReader<'_>, d: usize) -> Result<Tree> {
    let n_nodes = r.count("tree")?;
    if n_nodes == 0 {
        return Err(r.err("tree must have at least one node"));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    for _ in 0..n_nodes {
        let line = r.next("tree node")?;
        let fields: Vec<&str> = line.split(' ').collect();
        let node = match fields.as_slice() {
            ["s", feature, threshold, left, right] => {
                let feature: usize =
                    feature.parse().map_err(|_| r.err("bad split feature"))?;
                let threshold: f64 =
                    threshold.parse().map_err(|_| r.err("bad split threshold"))?;
                let left: usize = left.parse().map_err(|_| r.err("bad split child"))?;
                let right: usize = right.parse().map_err(|_| r.err("bad split child"))?;
                if feature >= d || left >= n_nodes || right >= n_nodes {
                    return Err(r.err("split node out of range"));
                }
                TreeNode::Split { feature, threshold, left, right }
            }
            ["l", value] => {
                let value: f64 = value.parse().map_err(|_| r.err("bad leaf value"))?;
                TreeNode::Leaf { value }
            }
            _ => return Err(r.err(format!("bad tree node `{line}`"))),
        };
        nodes.push(node);
    }
    Ok(Tree { nodes })
}

pub fn load_model(path: &Path) -> Result<TrainedModel> {
    let content = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut r = LineReader {
        lines: content.lines(),
        path,
        lineno: 0,
    };
    let magic = r.next("header")?;
    if magic != MAGIC {
        return Err(Error::data(format!(
            "{} is not a poslink model file (or wrong version)",
            path.display()
        )));
    }
    let kind: ClassifierKind = r.kv("kind")?.parse()?;
    let seed: u64 = {
        let v = r.kv("seed")?;
        v.parse().map_err(|_| r.err(format!("bad seed `{v}`")))?
    };
    let mut spec = ClassifierSpec::new(kind, seed);
    let n_params = r.count("params")?;
    for _ in 0..n_params {
        let line = r.next("param")?;
        let (key, value) = line
            .split_once(' ')
            .ok_or_else(|| r.err(format!("bad param line `{line}`")))?;
        let value: f64 = value.parse().map_err(|_| r.err("bad param value"))?;
        spec.set_param(key, value)?;
    }
    let feature_mode = match r.kv("mode")? {
        "none" => None,
        m => Some(m.parse::<FeatureMode>()?),
    };
    let n_features = r.count("features")?;
    let mut feature_names = Vec::with_capacity(n_features);
    for _ in 0..n_features {
        feature_names.push(r.next("feature name")?.to_string());
    }
    let state_mark = r.next("state marker")?;
    if state_mark != "state" {
        return Err(r.err("expected `state`"));
    }
    let d = n_features;
    let state = match kind {
        ClassifierKind::Logistic => {
            let standardizer = read_standardizer(&mut r, d)?;
            let weights = r.f64s("weights", d)?;
            let bias = r.f64_value("bias")?;
            ModelState::Logistic(LogisticModel { standardizer, weights, bias })
        }
        ClassifierKind::Knn => {
            let standardizer = read_standardizer(&mut r, d)?;
            let k = r.count("k")?;
            let n_rows = r.count("rows")?;
            let mut rows = Vec::with_capacity(n_rows);
            let mut labels = Vec::with_capacity(n_rows);
            for _ in 0..n_rows {
                let line = r.next("knn row")?;
                let mut fields = line.split(' ');
                let label = match fields.next() {
                    Some("0") => 0u8,
                    Some("1") => 1u8,
                    _ => return Err(r.err("bad knn row label")),
                };
                let row: std::result::Result<Vec<f64>, _> =
                    fields.map(str::parse::<f64>).collect();
                let row = row.map_err(|_| r.err("bad knn row value"))?;
                if row.len() != d {
                    return Err(r.err("knn row width mismatch"));
                }
                labels.push(label);
                rows.push(row);
            }
            ModelState::Knn(KnnModel { standardizer, rows, labels, k })
        }
        ClassifierKind::DecisionTree => ModelState::Tree(read_tree(&mut r, d)?),
        ClassifierKind::RandomForest | ClassifierKind::ExtraTrees => {
            let n_trees = r.count("trees")?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                trees.push(read_tree(&mut r, d)?);
            }
            ModelState::Forest(ForestModel { trees })
        }
        ClassifierKind::Gbt => {
            let base_score = r.f64_value("base")?;
            let eta = r.f64_value("eta")?;
            let n_trees = r.count("trees")?;
            let mut trees = Vec::with_capacity(n_trees);
            for _ in 0..n_trees {
                trees.push(read_tree(&mut r, d)?);
            }
            ModelState::Gbt(GbtModel { base_score, eta, trees })
        }
        ClassifierKind::Mlp => {
            let standardizer = read_standardizer(&mut r, d)?;
            let n_layers = r.count("layers")?;
            let mut layers = Vec::with_capacity(n_layers);
            for _ in 0..n_layers {
                let header = r.kv("layer")?;
                let (n_in, n_out) = header
                    .split_once(' ')
                    .ok_or_else(|| r.err("bad layer header"))?;
                let n_in: usize = n_in.parse().map_err(|_| r.err("bad layer input size"))?;
                let n_out: usize =
                    n_out.parse().map_err(|_| r.err("bad layer output size"))?;
                let w = r.f64s("w", n_in * n_out)?;
                let b = r.f64s("b", n_out)?;
                layers.push(Dense { n_in, n_out, w, b });
            }
            ModelState::Mlp(MlpModel { standardizer, layers })
        }
        ClassifierKind::LinearSvm => {
            let standardizer = read_standardizer(&mut r, d)?;
            let weights = r.f64s("weights", d)?;
            let bias = r.f64_value("bias")?;
            ModelState::Svm(SvmModel { standardizer, weights, bias })
        }
    };
    let end = r.next("end marker")?;
    if end != "end" {
        return Err(Error::data(format!(
            "truncated model file {}: missing end marker",
            path.display()
        )));
    }
    Ok(TrainedModel { spec, feature_names, feature_mode, state })
}
