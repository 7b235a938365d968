//! Per-feature standardization fitted on training data, used by the
//! gradient- and distance-based learners.

#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    /// Fit means and population standard deviations. Constant features get a
    /// std of 1 so they transform to zero.
    pub fn fit(rows: &[Vec<f64>]) -> Standardizer {
        let d = rows.first().map_or(0, Vec::len);
        let n = rows.len() as f64;
        let mut means = vec![0.0; d];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; d];
        for row in rows {
            for j in 0..d {
                let diff = row[j] - means[j];
                stds[j] += diff * diff;
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Standardizer { means, stds }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.stds))
            .map(|(v, (m, s))| (v - m) / s)
            .collect()
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.transform_row(r)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardized_columns_have_zero_mean_unit_var() {
        let rows = vec![vec![1.0, 10.0], vec![2.0, 10.0], vec![3.0, 10.0], vec![6.0, 10.0]];
        let s = Standardizer::fit(&rows);
        let t = s.transform(&rows);
        let n = t.len() as f64;
        for j in 0..2 {
            let mean: f64 = t.iter().map(|r| r[j]).sum::<f64>() / n;
            assert!(mean.abs() < 1e-12);
        }
        let var0: f64 = t.iter().map(|r| r[0] * r[0]).sum::<f64>() / n;
        assert!((var0 - 1.0).abs() < 1e-12);
        // Constant column maps to zeros rather than NaN.
        assert!(t.iter().all(|r| r[1] == 0.0));
    }
}
