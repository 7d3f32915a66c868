//! Classifiers and evaluation metrics: extremely randomized trees, random
//! forest, k-nearest-neighbor and logistic-regression baselines.

pub mod forest;
pub mod knn;
pub mod linear;
pub mod metrics;
pub mod model_io;

use thiserror::Error;

use crate::features::FeatureTable;

#[derive(Debug, Error, PartialEq)]
pub enum ClassifyError {
    #[error("training table is empty")]
    EmptyTable,
    #[error("rows have {got} columns, model expects {expected}")]
    ColumnMismatch { expected: usize, got: usize },
    #[error("k = {k} exceeds the {n} training rows")]
    KTooLarge { k: usize, n: usize },
    #[error("scores ({scores}) and labels ({labels}) differ in length")]
    LengthMismatch { scores: usize, labels: usize },
}

/// Borrowed row-major dataset view.
#[derive(Debug, Clone, Copy)]
pub struct Dataset<'a> {
    pub width: usize,
    pub values: &'a [f64],
    pub labels: &'a [u8],
}

impl<'a> Dataset<'a> {
    pub fn from_table(table: &'a FeatureTable) -> Self {
        Dataset {
            width: table.n_columns(),
            values: &table.values,
            labels: &table.labels,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn row(&self, i: usize) -> &'a [f64] {
        &self.values[i * self.width..(i + 1) * self.width]
    }
}

/// Owned row-major dataset, used for split subsets and standardized copies.
#[derive(Debug, Clone)]
pub struct OwnedDataset {
    pub width: usize,
    pub values: Vec<f64>,
    pub labels: Vec<u8>,
}

impl OwnedDataset {
    pub fn view(&self) -> Dataset<'_> {
        Dataset {
            width: self.width,
            values: &self.values,
            labels: &self.labels,
        }
    }

    /// Gather the given rows of a table into an owned dataset.
    pub fn gather(table: &FeatureTable, rows: &[usize]) -> Self {
        let width = table.n_columns();
        let mut values = Vec::with_capacity(rows.len() * width);
        let mut labels = Vec::with_capacity(rows.len());
        for &r in rows {
            values.extend_from_slice(table.row(r));
            labels.push(table.labels[r]);
        }
        OwnedDataset {
            width,
            values,
            labels,
        }
    }
}

/// Per-column mean and standard deviation fitted on training data only.
#[derive(Debug, Clone)]
pub struct ColumnStats {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl ColumnStats {
    pub fn fit(data: Dataset<'_>) -> Self {
        let n = data.n_rows().max(1) as f64;
        let w = data.width;
        let mut means = vec![0.0; w];
        for i in 0..data.n_rows() {
            for (m, v) in means.iter_mut().zip(data.row(i)) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut vars = vec![0.0; w];
        for i in 0..data.n_rows() {
            for ((var, v), m) in vars.iter_mut().zip(data.row(i)).zip(&means) {
                let d = v - m;
                *var += d * d;
            }
        }
        let stds = vars
            .into_iter()
            .map(|v| {
                let s = (v / n).sqrt();
                // Constant columns pass through unscaled.
                if s > 0.0 {
                    s
                } else {
                    1.0
                }
            })
            .collect();
        ColumnStats { means, stds }
    }

    pub fn transform(&self, data: Dataset<'_>) -> OwnedDataset {
        let w = data.width;
        assert_eq!(w, self.means.len(), "column count mismatch");
        let mut values = Vec::with_capacity(data.values.len());
        for i in 0..data.n_rows() {
            for (j, v) in data.row(i).iter().enumerate() {
                values.push((v - self.means[j]) / self.stds[j]);
            }
        }
        OwnedDataset {
            width: w,
            values,
            labels: data.labels.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standardization_centers_training_columns() {
        let values = vec![1.0, 10.0, 2.0, 10.0, 3.0, 10.0];
        let labels = vec![0, 1, 0];
        let data = Dataset {
            width: 2,
            values: &values,
            labels: &labels,
        };
        let stats = ColumnStats::fit(data);
        let scaled = stats.transform(data);
        let mean0: f64 = (0..3).map(|i| scaled.view().row(i)[0]).sum::<f64>() / 3.0;
        assert!(mean0.abs() < 1e-12);
        // Constant column stays put after centering.
        for i in 0..3 {
            assert_eq!(scaled.view().row(i)[1], 0.0);
        }
    }
}
