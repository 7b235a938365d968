//! k-nearest-neighbour classifier: exhaustive Euclidean search on
//! standardized features. Distance ties break toward the lower training-row
//! index.

use super::standardize::Standardizer;

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub standardizer: Standardizer,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
    pub k: usize,
}

pub fn train_knn(x: &[Vec<f64>], y: &[u8], k: usize) -> KnnModel {
    let standardizer = Standardizer::fit(x);
    KnnModel {
        rows: standardizer.transform(x),
        labels: y.to_vec(),
        standardizer,
        k: k.max(1),
    }
}

impl KnnModel {
    /// Indices of the k nearest training rows, nearest first.
    fn neighbours(&self, query: &[f64]) -> Vec<usize> {
        let mut dists: Vec<(f64, usize)> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let d2: f64 = row
                    .iter()
                    .zip(query)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                (d2, i)
            })
            .collect();
        dists.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite distances").then(a.1.cmp(&b.1)));
        let k = self.k.min(dists.len());
        dists.into_iter().take(k).map(|(_, i)| i).collect()
    }

    /// Fraction of label-1 votes among the k nearest neighbours.
    pub fn predict_proba(&self, row: &[f64]) -> f64 {
        let query = self.standardizer.transform_row(row);
        let neighbours = self.neighbours(&query);
        let ones = neighbours.iter().filter(|&&i| self.labels[i] == 1).count();
        ones as f64 / neighbours.len() as f64
    }

    /// Majority vote with ties resolved to label 0.
    pub fn majority_vote(&self, row: &[f64]) -> u8 {
        let query = self.standardizer.transform_row(row);
        let neighbours = self.neighbours(&query);
        let ones = neighbours.iter().filter(|&&i| self.labels[i] == 1).count();
        u8::from(2 * ones > neighbours.len())
    }
}
