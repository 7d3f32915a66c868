//! Structural embedding from heat-wavelet coefficient distributions.
//!
//! For each node the heat-kernel column is treated as an empirical
//! distribution and summarized by its characteristic function sampled at
//! evenly spaced points; real and imaginary parts interleave into the
//! embedding row. Structurally equivalent nodes receive identical rows.

use ndarray::Array2;

use crate::graph::Graph;
use crate::par;
use crate::spectral::{eigh, heat_kernel_matrix};

use super::{EmbedError, EmbeddingMatrix, EmbeddingMethod};

#[derive(Debug, Clone)]
pub struct GraphWaveParams {
    /// Heat-kernel scale.
    pub scale: f64,
    /// Number of characteristic-function sample points; output dimension is
    /// twice this.
    pub n_sample_points: usize,
    /// Sample points are `t_max/d, 2*t_max/d, ..., t_max` (zero is skipped:
    /// the characteristic function is constant there).
    pub t_max: f64,
}

impl Default for GraphWaveParams {
    fn default() -> Self {
        GraphWaveParams {
            scale: 1.0,
            n_sample_points: 50,
            t_max: 100.0,
        }
    }
}

impl GraphWaveParams {
    pub fn fingerprint(&self) -> String {
        format!(
            "graphwave(s={},d_s={},t_max={})",
            self.scale, self.n_sample_points, self.t_max
        )
    }

    pub fn sample_points(&self) -> Vec<f64> {
        let step = self.t_max / self.n_sample_points as f64;
        (1..=self.n_sample_points).map(|i| i as f64 * step).collect()
    }
}

/// Characteristic function of a coefficient vector at point `t`:
/// `(mean cos(t x), mean sin(t x))`.
pub fn characteristic_point(coefficients: &[f64], t: f64) -> (f64, f64) {
    let n = coefficients.len() as f64;
    let (mut re, mut im) = (0.0, 0.0);
    for &x in coefficients {
        let arg = t * x;
        re += arg.cos();
        im += arg.sin();
    }
    (re / n, im / n)
}

pub fn graphwave(g: &Graph, params: &GraphWaveParams) -> Result<EmbeddingMatrix, EmbedError> {
    assert!(params.scale > 0.0, "scale must be positive");
    assert!(params.n_sample_points >= 1, "need at least one sample point");
    assert!(params.t_max > 0.0, "t_max must be positive");
    let n = g.n_nodes();
    let eig = eigh(&g.laplacian())?;
    let kernel = heat_kernel_matrix(&eig, params.scale);
    let points = params.sample_points();
    let dim = 2 * params.n_sample_points;

    let rows_vec = par::map_indexed(n, |a| {
        let column: Vec<f64> = (0..n).map(|m| kernel[[m, a]]).collect();
        let mut row = Vec::with_capacity(dim);
        for &t in &points {
            let (re, im) = characteristic_point(&column, t);
            row.push(re);
            row.push(im);
        }
        row
    });
    let mut rows = Array2::zeros((n, dim));
    for (a, row) in rows_vec.into_iter().enumerate() {
        for (k, v) in row.into_iter().enumerate() {
            rows[[a, k]] = v;
        }
    }
    Ok(EmbeddingMatrix {
        method: EmbeddingMethod::GraphWave,
        dim,
        rows,
        params_fingerprint: params.fingerprint(),
    })
}
