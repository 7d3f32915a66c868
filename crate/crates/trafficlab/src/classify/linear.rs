//! Logistic regression trained by full-batch gradient descent on the
//! cross-entropy loss. Expects standardized columns; no regularization.

use crate::features::sigmoid;

use super::{ClassifyError, Dataset};

#[derive(Debug, Clone)]
pub struct LogRegParams {
    pub learning_rate: f64,
    pub epochs: usize,
}

impl Default for LogRegParams {
    fn default() -> Self {
        LogRegParams {
            learning_rate: 0.1,
            epochs: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct LogRegModel {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LogRegModel {
    pub fn score(&self, row: &[f64]) -> f64 {
        let z: f64 = self
            .weights
            .iter()
            .zip(row)
            .map(|(w, x)| w * x)
            .sum::<f64>()
            + self.bias;
        sigmoid(z)
    }
}

/// Mean cross-entropy gradient of the loss at `(weights, bias)`:
/// `(1/n) sum (sigmoid(w.x + b) - y) x` and the matching bias term.
pub fn gradient(data: Dataset<'_>, weights: &[f64], bias: f64) -> (Vec<f64>, f64) {
    let n = data.n_rows() as f64;
    let mut grad_w = vec![0.0; data.width];
    let mut grad_b = 0.0;
    for i in 0..data.n_rows() {
        let row = data.row(i);
        let z: f64 = weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + bias;
        let err = sigmoid(z) - f64::from(data.labels[i]);
        for (g, x) in grad_w.iter_mut().zip(row) {
            *g += err * x;
        }
        grad_b += err;
    }
    for g in &mut grad_w {
        *g /= n;
    }
    (grad_w, grad_b / n)
}

/// Mean cross-entropy loss, clamped away from log(0).
pub fn loss(data: Dataset<'_>, weights: &[f64], bias: f64) -> f64 {
    let n = data.n_rows() as f64;
    let mut total = 0.0;
    for i in 0..data.n_rows() {
        let row = data.row(i);
        let z: f64 = weights.iter().zip(row).map(|(w, x)| w * x).sum::<f64>() + bias;
        let p = sigmoid(z).clamp(1e-12, 1.0 - 1e-12);
        total -= if data.labels[i] == 1 {
            p.ln()
        } else {
            (1.0 - p).ln()
        };
    }
    total / n
}

/// Train from zero-initialized weights; deterministic.
pub fn train_logreg(data: Dataset<'_>, params: &LogRegParams) -> Result<LogRegModel, ClassifyError> {
    if data.n_rows() == 0 {
        return Err(ClassifyError::EmptyTable);
    }
    let mut weights = vec![0.0; data.width];
    let mut bias = 0.0;
    for _ in 0..params.epochs {
        let (grad_w, grad_b) = gradient(data, &weights, bias);
        for (w, g) in weights.iter_mut().zip(&grad_w) {
            *w -= params.learning_rate * g;
        }
        bias -= params.learning_rate * grad_b;
    }
    Ok(LogRegModel { weights, bias })
}

pub fn predict(model: &LogRegModel, data: Dataset<'_>) -> Result<Vec<f64>, ClassifyError> {
    if data.width != model.weights.len() {
        return Err(ClassifyError::ColumnMismatch {
            expected: model.weights.len(),
            got: data.width,
        });
    }
    Ok((0..data.n_rows()).map(|i| model.score(data.row(i))).collect())
}
