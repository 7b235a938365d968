//! Splitting, metrics, model comparison, and submission-file generation.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::models::{self, ClassifierSpec, TrainedModel};
use crate::rng::Rng;

/// Stratified seeded train/validation split.
///
/// Rows of each class are shuffled with the seed and allocated to the
/// validation side by largest remainder, so the validation size is exactly
/// `round(n * fraction)` and class proportions carry over.
pub fn train_valid_split(
    matrix: &FeatureMatrix,
    valid_fraction: f64,
    seed: u64,
) -> Result<(FeatureMatrix, FeatureMatrix)> {
    if !(0.0 < valid_fraction && valid_fraction < 1.0) {
        return Err(Error::data(format!(
            "valid fraction must lie in (0,1), got {valid_fraction}"
        )));
    }
    let labels = matrix
        .labels
        .as_ref()
        .ok_or_else(|| Error::data("splitting requires a labeled matrix"))?;
    let n = matrix.rows.len();
    if n < 2 {
        return Err(Error::data("splitting needs at least 2 rows"));
    }
    let n_valid = (n as f64 * valid_fraction).round() as usize;
    if n_valid == 0 || n_valid == n {
        return Err(Error::data(format!(
            "fraction {valid_fraction} leaves one side of the split empty"
        )));
    }

    let mut class_indices: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
    for (i, &label) in labels.iter().enumerate() {
        class_indices[label as usize].push(i);
    }
    let mut rng = Rng::derive(seed, 0x73706c69);
    for indices in &mut class_indices {
        rng.shuffle(indices);
    }

    // Largest-remainder allocation of the validation quota across classes.
    let mut quota = [0usize; 2];
    let mut remainders = [0f64; 2];
    for c in 0..2 {
        let share = class_indices[c].len() as f64 * valid_fraction;
        quota[c] = (share.floor() as usize).min(class_indices[c].len());
        remainders[c] = share - share.floor();
    }
    let mut assigned: usize = quota.iter().sum();
    while assigned < n_valid {
        let c = if (remainders[0] > remainders[1]
            || (remainders[0] == remainders[1] && quota[0] <= quota[1]))
            && quota[0] < class_indices[0].len()
        {
            0
        } else {
            1
        };
        quota[c] += 1;
        remainders[c] = -1.0;
        assigned += 1;
    }
    while assigned > n_valid {
        let c = if quota[0] >= quota[1] && quota[0] > 0 { 0 } else { 1 };
        quota[c] -= 1;
        assigned -= 1;
    }

    let mut valid_idx = Vec::with_capacity(n_valid);
    let mut train_idx = Vec::with_capacity(n - n_valid);
    for c in 0..2 {
        valid_idx.extend_from_slice(&class_indices[c][..quota[c]]);
        train_idx.extend_from_slice(&class_indices[c][quota[c]..]);
    }
    // A final shuffle so neither side is grouped by class.
    rng.shuffle(&mut train_idx);
    rng.shuffle(&mut valid_idx);

    let subset = |indices: &[usize]| FeatureMatrix {
        feature_names: matrix.feature_names.clone(),
        rows: indices.iter().map(|&i| matrix.rows[i].clone()).collect(),
        labels: Some(indices.iter().map(|&i| labels[i]).collect()),
    };
    Ok((subset(&train_idx), subset(&valid_idx)))
}

fn check_lengths(predictions: &[u8], labels: &[u8]) -> Result<()> {
    if predictions.len() != labels.len() {
        return Err(Error::data(format!(
            "predictions ({}) and labels ({}) differ in length",
            predictions.len(),
            labels.len()
        )));
    }
    Ok(())
}

/// F1 of the positive class, computed as 2TP / (2TP + FP + FN); 0 when the
/// denominator vanishes.
pub fn f1_score(predictions: &[u8], labels: &[u8]) -> Result<f64> {
    check_lengths(predictions, labels)?;
    let mut tp = 0u64;
    let mut fp = 0u64;
    let mut fn_ = 0u64;
    for (&p, &l) in predictions.iter().zip(labels) {
        match (p, l) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => {}
        }
    }
    let denom = 2 * tp + fp + fn_;
    Ok(if denom == 0 {
        0.0
    } else {
        2.0 * tp as f64 / denom as f64
    })
}

/// Fraction of exact matches.
pub fn accuracy(predictions: &[u8], labels: &[u8]) -> Result<f64> {
    check_lengths(predictions, labels)?;
    if predictions.is_empty() {
        return Ok(0.0);
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / predictions.len() as f64)
}

/// One row of a model-comparison report.
#[derive(Debug, Clone)]
pub struct EvalRow {
    pub model: String,
    pub accuracy: f64,
    pub f1: f64,
    pub train_seconds: f64,
    pub predict_seconds: f64,
    /// Set when this model failed; metric fields are then zero.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub struct EvalReport {
    pub rows: Vec<EvalRow>,
}

impl EvalReport {
    /// CSV form: `model,accuracy,f1` rows (failed models carry the error
    /// message in place of metrics). Timing columns are deliberately left to
    /// the stdout table so report files stay byte-reproducible.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut buf = String::from("model,accuracy,f1\n");
        for row in &self.rows {
            match &row.error {
                Some(e) => buf.push_str(&format!(
                    "{},error,{}\n",
                    row.model,
                    e.replace(',', ";").replace('\n', " ")
                )),
                None => buf.push_str(&format!(
                    "{},{},{}\n",
                    row.model,
                    crate::fmt::format_num(row.accuracy),
                    crate::fmt::format_num(row.f1)
                )),
            }
        }
        let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
    }

    /// Plain-text table for standard output.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "{:<16} {:>10} {:>10} {:>10} {:>12}\n",
            "model", "accuracy", "f1", "train_s", "predict_s"
        ));
        for row in &self.rows {
            match &row.error {
                Some(e) => out.push_str(&format!("{:<16} failed: {e}\n", row.model)),
                None => out.push_str(&format!(
                    "{:<16} {:>10.6} {:>10.6} {:>10.3} {:>12.3}\n",
                    row.model, row.accuracy, row.f1, row.train_seconds, row.predict_seconds
                )),
            }
        }
        out
    }
}

/// Evaluate one trained model on a labeled matrix.
pub fn evaluate(model: &TrainedModel, valid: &FeatureMatrix) -> Result<(f64, f64)> {
    let labels = valid
        .labels
        .as_ref()
        .ok_or_else(|| Error::data("evaluation requires labels"))?;
    let mut predictions = Vec::with_capacity(valid.rows.len());
    for row in &valid.rows {
        predictions.push(model.predict(row)?);
    }
    Ok((accuracy(&predictions, labels)?, f1_score(&predictions, labels)?))
}

/// Train each spec on `train` and score it on `valid`. Rows are sorted by
/// descending F1 (failed models last); a failing model yields an error row,
/// not a failure of the whole comparison.
pub fn compare_models(
    specs: &[ClassifierSpec],
    train: &FeatureMatrix,
    valid: &FeatureMatrix,
) -> EvalReport {
    let mut rows = Vec::with_capacity(specs.len());
    for spec in specs {
        let name = spec.kind.name().to_string();
        let started = Instant::now();
        let outcome = models::train(spec, train).and_then(|model| {
            let train_seconds = started.elapsed().as_secs_f64();
            let predict_started = Instant::now();
            let metrics = evaluate(&model, valid)?;
            Ok((metrics, train_seconds, predict_started.elapsed().as_secs_f64()))
        });
        match outcome {
            Ok(((acc, f1), train_seconds, predict_seconds)) => rows.push(EvalRow {
                model: name,
                accuracy: acc,
                f1,
                train_seconds,
                predict_seconds,
                error: None,
            }),
            Err(e) => rows.push(EvalRow {
                model: name,
                accuracy: 0.0,
                f1: 0.0,
                train_seconds: 0.0,
                predict_seconds: 0.0,
                error: Some(e.to_string()),
            }),
        }
    }
    rows.sort_by(|a, b| {
        let failed = (a.error.is_some(), b.error.is_some());
        failed
            .0
            .cmp(&failed.1)
            .then(b.f1.partial_cmp(&a.f1).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.model.cmp(&b.model))
    });
    EvalReport { rows }
}

/// Write a submission file: header `id,label`, one row per prediction, LF
/// endings, exactly one final newline.
pub fn write_submission(row_ids: &[u64], predictions: &[u8], path: &Path) -> Result<()> {
    if row_ids.len() != predictions.len() {
        return Err(Error::data(format!(
            "row ids ({}) and predictions ({}) differ in length",
            row_ids.len(),
            predictions.len()
        )));
    }
    let mut buf = String::from("id,label\n");
    for (id, pred) in row_ids.iter().zip(predictions) {
        buf.push_str(&format!("{id},{pred}\n"));
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(buf.as_bytes()).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ClassifierKind;

    fn labeled_matrix(n: usize, seed: u64) -> FeatureMatrix {
        let mut rng = Rng::seed_from(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.next_f64() * 4.0]).collect();
        let labels: Vec<u8> = rows.iter().map(|r| u8::from(r[0] > 2.0)).collect();
        FeatureMatrix {
            feature_names: vec!["x".into()],
            rows,
            labels: Some(labels),
        }
    }

    #[test]
    fn split_sizes() {
        let m = labeled_matrix(10, 1);
        let (train, valid) = train_valid_split(&m, 0.2, 42).unwrap();
        assert_eq!(train.n_rows(), 8);
        assert_eq!(valid.n_rows(), 2);
    }

    #[test]
    fn split_deterministic_per_seed() {
        let m = labeled_matrix(50, 2);
        let a = train_valid_split(&m, 0.3, 7).unwrap();
        let b = train_valid_split(&m, 0.3, 7).unwrap();
        assert_eq!(a.0.rows, b.0.rows);
        assert_eq!(a.1.rows, b.1.rows);
        let c = train_valid_split(&m, 0.3, 8).unwrap();
        assert_ne!(a.1.rows, c.1.rows);
    }

    #[test]
    fn split_stratifies() {
        // 50/50 labels stay within 2 percentage points on both sides.
        let rows: Vec<Vec<f64>> = (0..200).map(|i| vec![i as f64]).collect();
        let labels: Vec<u8> = (0..200).map(|i| (i % 2) as u8).collect();
        let m = FeatureMatrix {
            feature_names: vec!["x".into()],
            rows,
            labels: Some(labels),
        };
        for seed in 0..5 {
            let (train, valid) = train_valid_split(&m, 0.2, seed).unwrap();
            for side in [&train, &valid] {
                let ones: usize =
                    side.labels.as_ref().unwrap().iter().map(|&l| l as usize).sum();
                let frac = ones as f64 / side.n_rows() as f64;
                assert!((frac - 0.5).abs() <= 0.02, "seed {seed}: {frac}");
            }
        }
    }

    #[test]
    fn split_rejects_degenerate_fractions() {
        let m = labeled_matrix(10, 3);
        assert!(train_valid_split(&m, 0.0, 1).is_err());
        assert!(train_valid_split(&m, 1.0, 1).is_err());
        assert!(train_valid_split(&m, 0.01, 1).is_err());
    }

    #[test]
    fn f1_hand_case() {
        let preds = [1u8, 1, 0, 1, 0];
        let labels = [1u8, 0, 0, 1, 1];
        let f1 = f1_score(&preds, &labels).unwrap();
        assert_eq!(f1, 2.0 / 3.0);
    }

    #[test]
    fn f1_edge_conventions() {
        assert_eq!(f1_score(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        // All-negative predictions on data with positives: recall 0 -> F1 0.
        assert_eq!(f1_score(&[0, 0, 0], &[1, 0, 1]).unwrap(), 0.0);
        // No positives anywhere: zero-division convention.
        assert_eq!(f1_score(&[0, 0], &[0, 0]).unwrap(), 0.0);
        assert!(f1_score(&[1], &[1, 0]).is_err());
    }

    #[test]
    fn accuracy_cases() {
        assert_eq!(accuracy(&[1, 0], &[1, 1]).unwrap(), 0.5);
        assert_eq!(accuracy(&[1, 0, 1], &[1, 0, 1]).unwrap(), 1.0);
        assert_eq!(accuracy(&[0, 1], &[1, 0]).unwrap(), 0.0);
        assert!(accuracy(&[0], &[]).is_err());
    }

    #[test]
    fn metrics_permutation_equivariant() {
        let preds = [1u8, 0, 1, 1, 0, 0, 1];
        let labels = [1u8, 1, 0, 1, 0, 1, 1];
        let f1 = f1_score(&preds, &labels).unwrap();
        let acc = accuracy(&preds, &labels).unwrap();
        let perm = [3usize, 0, 6, 2, 5, 1, 4];
        let p2: Vec<u8> = perm.iter().map(|&i| preds[i]).collect();
        let l2: Vec<u8> = perm.iter().map(|&i| labels[i]).collect();
        assert_eq!(f1_score(&p2, &l2).unwrap(), f1);
        assert_eq!(accuracy(&p2, &l2).unwrap(), acc);
    }

    #[test]
    fn compare_models_rows_and_failures() {
        let m = labeled_matrix(60, 4);
        let (train, valid) = train_valid_split(&m, 0.25, 1).unwrap();
        let specs = vec![
            ClassifierSpec::new(ClassifierKind::DecisionTree, 1),
            ClassifierSpec::new(ClassifierKind::Logistic, 1),
        ];
        let report = compare_models(&specs, &train, &valid);
        assert_eq!(report.rows.len(), 2);
        assert!(report.rows[0].f1 >= report.rows[1].f1);
        assert!(compare_models(&[], &train, &valid).rows.is_empty());
        // A model that cannot train (k must be integral) lands in an error
        // row instead of failing the comparison.
        let bad = ClassifierSpec::new(ClassifierKind::Knn, 1)
            .with_param("k", 2.5)
            .unwrap();
        let report = compare_models(&[bad], &train, &valid);
        assert!(report.rows[0].error.is_some());
    }

    #[test]
    fn report_csv_form() {
        let report = EvalReport {
            rows: vec![
                EvalRow {
                    model: "decision_tree".into(),
                    accuracy: 0.983333,
                    f1: 2.0 / 3.0,
                    train_seconds: 0.1,
                    predict_seconds: 0.01,
                    error: None,
                },
                EvalRow {
                    model: "knn".into(),
                    accuracy: 0.0,
                    f1: 0.0,
                    train_seconds: 0.0,
                    predict_seconds: 0.0,
                    error: Some("boom, with comma".into()),
                },
            ],
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("report.csv");
        report.write_csv(&path).unwrap();
        let content = std::fs::read_to_string(&path).unwrap();
        assert_eq!(
            content,
            "model,accuracy,f1\ndecision_tree,0.983333,0.666667\nknn,error,boom; with comma\n"
        );
    }

    #[test]
    fn submission_bytes_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("submission.csv");
        write_submission(&[0, 1], &[1, 0], &path).unwrap();
        let content = std::fs::read(&path).unwrap();
        assert_eq!(content, b"id,label\n0,1\n1,0\n");

        write_submission(&[], &[], &path).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"id,label\n");

        assert!(write_submission(&[1], &[], &path).is_err());
    }
}
