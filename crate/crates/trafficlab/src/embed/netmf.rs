//! Proximity-matrix factorization embedding.
//!
//! Builds the log-floored window-averaged transition matrix
//! `M = log(max(vol/(b*T) * sum_{r=1..T} P^r * D^-1, 1))` with `P = D^-1 A`,
//! then factors it with the truncated SVD and scales the left factors by the
//! square-rooted singular values.

use ndarray::Array2;

use crate::graph::Graph;
use crate::spectral::truncated_svd;

use super::{EmbedError, EmbeddingMatrix, EmbeddingMethod};

#[derive(Debug, Clone)]
pub struct NetMfParams {
    /// Window size: number of transition powers averaged.
    pub window: usize,
    /// Negative-sample constant dividing the volume.
    pub negatives: usize,
    pub dim: usize,
    pub seed: u64,
}

impl Default for NetMfParams {
    fn default() -> Self {
        NetMfParams {
            window: 10,
            negatives: 1,
            dim: 32,
            seed: 0,
        }
    }
}

impl NetMfParams {
    pub fn fingerprint(&self) -> String {
        format!(
            "netmf(T={},b={},d={},seed={})",
            self.window, self.negatives, self.dim, self.seed
        )
    }
}

/// The log-floored proximity matrix. Entries are always nonnegative; rows
/// and columns of isolated nodes are zero.
pub fn proximity_matrix(g: &Graph, params: &NetMfParams) -> Result<Array2<f64>, EmbedError> {
    assert!(params.window >= 1 && params.negatives >= 1);
    let n = g.n_nodes();
    if g.n_edges() == 0 {
        return Err(EmbedError::NoEdges);
    }
    let mut transition = Array2::zeros((n, n));
    for i in 0..n {
        let deg = g.degree(i);
        if deg == 0 {
            continue;
        }
        let w = 1.0 / deg as f64;
        for &j in g.neighbors(i) {
            transition[[i, j]] = w;
        }
    }
    let mut power = transition.clone();
    let mut sum = transition.clone();
    for _ in 1..params.window {
        power = power.dot(&transition);
        sum += &power;
    }
    let volume = 2.0 * g.n_edges() as f64;
    let lead = volume / (params.negatives as f64 * params.window as f64);
    let mut m = sum;
    for i in 0..n {
        for j in 0..n {
            let deg_j = g.degree(j);
            let scaled = if deg_j == 0 {
                0.0
            } else {
                lead * m[[i, j]] / deg_j as f64
            };
            m[[i, j]] = scaled.max(1.0).ln();
        }
    }
    Ok(m)
}

pub fn netmf(g: &Graph, params: &NetMfParams) -> Result<EmbeddingMatrix, EmbedError> {
    let n = g.n_nodes();
    if params.dim == 0 || params.dim > n {
        return Err(EmbedError::DimOutOfRange { d: params.dim, n });
    }
    let m = proximity_matrix(g, params)?;
    let svd = truncated_svd(&m, params.dim)?;
    let mut rows = svd.left_factors;
    for k in 0..params.dim {
        let scale = svd.singular_values[k].sqrt();
        for i in 0..n {
            rows[[i, k]] *= scale;
        }
    }
    Ok(EmbeddingMatrix {
        method: EmbeddingMethod::NetMf,
        dim: params.dim,
        rows,
        params_fingerprint: params.fingerprint(),
    })
}
