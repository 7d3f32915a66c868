//! Geometric Laplacian embedding.
//!
//! Embeds nodes as `Y = U_d * sqrt(L_d)` from the eigendecomposition of the
//! unnormalized Laplacian, taking the d *largest* eigenpairs: that is the
//! solution of the trace-maximization problem with the `Y^T Y = diag`
//! constraint. The classical distance-minimizing variant (smallest
//! eigenpairs) is available behind [`GleeVariant::Smallest`] for comparison.

use ndarray::Array2;

use crate::graph::Graph;
use crate::spectral::{eigh, EigenDecomposition};

use super::{EmbedError, EmbeddingMatrix, EmbeddingMethod};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum GleeVariant {
    /// Distance-maximizing: the d largest eigenpairs.
    #[default]
    Largest,
    /// Classical eigenmap direction: the d smallest eigenpairs.
    Smallest,
}

impl GleeVariant {
    fn name(self) -> &'static str {
        match self {
            GleeVariant::Largest => "largest",
            GleeVariant::Smallest => "smallest",
        }
    }
}

pub fn glee(g: &Graph, d: usize) -> Result<EmbeddingMatrix, EmbedError> {
    glee_with_variant(g, d, GleeVariant::Largest)
}

pub fn glee_with_variant(
    g: &Graph,
    d: usize,
    variant: GleeVariant,
) -> Result<EmbeddingMatrix, EmbedError> {
    let eig = eigh(&g.laplacian())?;
    embed_from_eigen(&eig, d, variant)
}

/// Gaussian kernel affinity for a point cloud: `A[i][j] =
/// exp(-||x_i - x_j||^2 / (2 sigma^2))`, zero diagonal.
pub fn gaussian_affinity(points: &Array2<f64>, sigma: f64) -> Array2<f64> {
    let n = points.nrows();
    let denom = 2.0 * sigma * sigma;
    let mut a = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let dist_sq: f64 = (0..points.ncols())
                .map(|k| {
                    let diff = points[[i, k]] - points[[j, k]];
                    diff * diff
                })
                .sum();
            let w = (-dist_sq / denom).exp();
            a[[i, j]] = w;
            a[[j, i]] = w;
        }
    }
    a
}

/// Embedding of a weighted affinity matrix via its Laplacian. This is the
/// point-cloud path: build affinity with [`gaussian_affinity`], then embed.
pub fn glee_from_affinity(
    affinity: &Array2<f64>,
    d: usize,
    variant: GleeVariant,
) -> Result<EmbeddingMatrix, EmbedError> {
    let n = affinity.nrows();
    let mut lap = -affinity.clone();
    for i in 0..n {
        lap[[i, i]] = 0.0;
        let degree: f64 = (0..n).filter(|&j| j != i).map(|j| affinity[[i, j]]).sum();
        lap[[i, i]] = degree;
    }
    let eig = eigh(&lap)?;
    embed_from_eigen(&eig, d, variant)
}

fn embed_from_eigen(
    eig: &EigenDecomposition,
    d: usize,
    variant: GleeVariant,
) -> Result<EmbeddingMatrix, EmbedError> {
    let n = eig.eigenvalues.len();
    if d == 0 || d > n {
        return Err(EmbedError::DimOutOfRange { d, n });
    }
    // Eigenvalues ascend; pick the requested end.
    let source_col = |k: usize| match variant {
        GleeVariant::Largest => n - 1 - k,
        GleeVariant::Smallest => k,
    };
    let mut rows = Array2::zeros((n, d));
    for k in 0..d {
        let col = source_col(k);
        // Laplacian spectra are nonnegative up to round-off.
        let scale = eig.eigenvalues[col].max(0.0).sqrt();
        for i in 0..n {
            rows[[i, k]] = eig.eigenvectors[[i, col]] * scale;
        }
    }
    Ok(EmbeddingMatrix {
        method: EmbeddingMethod::Glee,
        dim: d,
        rows,
        params_fingerprint: format!("glee(d={d},variant={})", variant.name()),
    })
}
