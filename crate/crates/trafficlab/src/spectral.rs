//! Dense symmetric eigendecomposition, truncated SVD, and heat-kernel
//! application — the numerical kernels shared by every embedding method.
//!
//! The eigensolver is Householder tridiagonalization followed by the
//! implicit-shift QL iteration; the SVD is one-sided Jacobi. Both are
//! deterministic, which together with the sign convention below makes every
//! downstream embedding byte-reproducible.

use ndarray::{Array1, Array2};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),
    #[error("eigeniteration failed to converge within {0} iterations")]
    ConvergenceFailure(usize),
    #[error("rank {d} out of range for a {n}x{m} matrix")]
    RankOutOfRange { d: usize, n: usize, m: usize },
    #[error("node index {index} out of range for {n} nodes")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Iteration cap per eigenvalue in the QL stage.
const QL_MAX_ITER: usize = 60;
/// Allowed asymmetry in `eigh` inputs.
const SYMMETRY_TOL: f64 = 1e-10;

/// Full eigendecomposition of a symmetric matrix.
///
/// Eigenvalues ascend; eigenvectors are the corresponding orthonormal
/// columns. In each eigenvector the first component with magnitude above
/// 1e-12 is positive.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Array2<f64>,
}

/// Rank-d factorization from [`truncated_svd`]: singular values descend,
/// factor columns are orthonormal.
#[derive(Debug, Clone)]
pub struct SvdResult {
    pub left_factors: Array2<f64>,
    pub singular_values: Vec<f64>,
    pub right_factors: Array2<f64>,
}

/// Symmetric eigendecomposition.
pub fn eigh(matrix: &Array2<f64>) -> Result<EigenDecomposition, SpectralError> {
    let n = matrix.nrows();
    assert_eq!(n, matrix.ncols(), "eigh requires a square matrix");
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((matrix[[i, j]] - matrix[[j, i]]).abs());
        }
    }
    if asym > SYMMETRY_TOL {
        return Err(SpectralError::NotSymmetric(asym));
    }
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: Vec::new(),
            eigenvectors: Array2::zeros((0, 0)),
        });
    }

    // Work on the symmetrized copy so the tiny allowed asymmetry cannot leak
    // into the transform accumulation.
    let mut z = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            z[i * n + j] = 0.5 * (matrix[[i, j]] + matrix[[j, i]]);
        }
    }
    let mut d = vec![0.0f64; n];
    let mut e = vec![0.0f64; n];
    tred2(&mut z, &mut d, &mut e, n);
    tql2(&mut z, &mut d, &mut e, n)?;

    // Ascending eigenvalue order with the deterministic sign convention.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let mut eigenvalues = Vec::with_capacity(n);
    let mut eigenvectors = Array2::zeros((n, n));
    for (col, &src) in order.iter().enumerate() {
        eigenvalues.push(d[src]);
        let flip = column_sign(&z, n, src);
        for row in 0..n {
            eigenvectors[[row, col]] = flip * z[row * n + src];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

fn column_sign(z: &[f64], n: usize, col: usize) -> f64 {
    for row in 0..n {
        let v = z[row * n + col];
        if v.abs() > 1e-12 {
            return if v > 0.0 { 1.0 } else { -1.0 };
        }
    }
    1.0
}

/// Householder reduction of a symmetric matrix to tridiagonal form,
/// accumulating the orthogonal transform in `z` (row-major n*n).
fn tred2(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) {
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| z[i * n + k].abs()).sum();
            if scale == 0.0 {
                e[i] = z[i * n + l];
            } else {
                for k in 0..=l {
                    z[i * n + k] /= scale;
                    h += z[i * n + k] * z[i * n + k];
                }
                let f = z[i * n + l];
                let mut g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i * n + l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    z[j * n + i] = z[i * n + j] / h;
                    g = 0.0;
                    for k in 0..=j {
                        g += z[j * n + k] * z[i * n + k];
                    }
                    for k in (j + 1)..=l {
                        g += z[k * n + j] * z[i * n + k];
                    }
                    e[j] = g / h;
                    f_acc += e[j] * z[i * n + j];
               }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z[i * n + j];
                    let gj = e[j] - hh * f;
                    e[j] = gj;
                    for k in 0..=j {
                        z[j * n + k] -= f * e[k] + gj * z[i * n + k];
                    }
                }
            }
        } else {
            e[i] = z[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[i * n + k] * z[k * n + j];
                }
                for k in 0..i {
                    z[k * n + j] -= g * z[k * n + i];
                }
            }
        }
        d[i] = z[i * n + i];
        z[i * n + i] = 1.0;
        for j in 0..i {
            z[j * n + i] = 0.0;
            z[i * n + j] = 0.0;
        }
    }
}

/// Implicit-shift QL iteration on a tridiagonal matrix, accumulating
/// eigenvectors into the columns of `z`.
fn tql2(z: &mut [f64], d: &mut [f64], e: &mut [f64], n: usize) -> Result<(), SpectralError> {
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > QL_MAX_ITER {
                return Err(SpectralError::ConvergenceFailure(QL_MAX_ITER));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + if g >= 0.0 { r.abs() } else { -r.abs() });
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k * n + i + 1];
                    z[k * n + i + 1] = s * z[k * n + i] + c * f;
                    z[k * n + i] = c * z[k * n + i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Rank-`d` singular value decomposition via one-sided Jacobi.
///
/// The full decomposition is computed and truncated, so the Frobenius error
/// of the rank-`d` reconstruction equals the tail energy of the dropped
/// singular values.
pub fn truncated_svd(matrix: &Array2<f64>, d: usize) -> Result<SvdResult, SpectralError> {
    let (n, m) = matrix.dim();
    if d == 0 || d > n.min(m) {
        return Err(SpectralError::RankOutOfRange { d, n, m });
    }
    // One-sided Jacobi orthogonalizes columns; run on the tall orientation.
    if n < m {
        let t = truncated_svd(&matrix.t().to_owned(), d)?;
        return Ok(SvdResult {
            left_factors: t.right_factors,
            singular_values: t.singular_values,
            right_factors: t.left_factors,
        });
    }

    let mut g: Vec<Array1<f64>> = (0..m).map(|j| matrix.column(j).to_owned()).collect();
    let mut v: Array2<f64> = Array2::eye(m);
    let tol = 1e-14;
    let max_sweeps = 64;
    for _ in 0..max_sweeps {
        let mut rotated = false;
        for p in 0..m {
            for q in (p + 1)..m {
                let alpha = g[p].dot(&g[p]);
                let beta = g[q].dot(&g[q]);
                let gamma = g[p].dot(&g[q]);
                if gamma.abs() <= tol * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..n {
                    let gp = g[p][i];
                    let gq = g[q][i];
                    g[p][i] = c * gp - s * gq;
                    g[q][i] = s * gp + c * gq;
                }
                for i in 0..m {
                    let vp = v[[i, p]];
                    let vq = v[[i, q]];
                    v[[i, p]] = c * vp - s * vq;
                    v[[i, q]] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut norms: Vec<f64> = g.iter().map(|col| col.dot(col).sqrt()).collect();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    norms.sort_by(|a, b| b.total_cmp(a));

    let max_norm = norms.first().copied().unwrap_or(0.0);
    let mut left = Array2::zeros((n, d));
    let mut right = Array2::zeros((m, d));
    let mut filled: Vec<usize> = Vec::new();
    for k in 0..d {
        let src = order[k];
        let sigma = norms[k];
        if sigma > max_norm * 1e-13 && sigma > 0.0 {
            for i in 0..n {
                left[[i, k]] = g[src][i] / sigma;
            }
        } else {
            // Null direction: complete the left basis orthonormally.
            fill_orthonormal(&mut left, &filled, k);
        }
        for i in 0..m {
            right[[i, k]] = v[[i, src]];
        }
        // Sign convention matching eigh, flipping both factors together.
        let mut flip = 1.0;
        for i in 0..n {
            if left[[i, k]].abs() > 1e-12 {
                flip = left[[i, k]].signum();
                break;
            }
        }
        if flip < 0.0 {
            for i in 0..n {
                left[[i, k]] = -left[[i, k]];
            }
            for i in 0..m {
                right[[i, k]] = -right[[i, k]];
            }
        }
        filled.push(k);
    }
    Ok(SvdResult {
        left_factors: left,
        singular_values: norms[..d].to_vec(),
        right_factors: right,
    })
}

/// Gram-Schmidt a standard basis vector against the already-filled columns.
fn fill_orthonormal(u: &mut Array2<f64>, filled: &[usize], k: usize) {
    let n = u.nrows();
    for seed in 0..n {
        let mut cand = Array1::zeros(n);
        cand[seed] = 1.0;
        for &j in filled {
            let proj: f64 = (0..n).map(|i| u[[i, j]] * cand[i]).sum();
            for i in 0..n {
                cand[i] -= proj * u[[i, j]];
            }
        }
        let norm = cand.dot(&cand).sqrt();
        if norm > 1e-6 {
            for i in 0..n {
                u[[i, k]] = cand[i] / norm;
            }
            return;
        }
    }
}

/// Column `a` of the heat kernel `U diag(exp(-s*lambda)) U^T`.
///
/// On a graph Laplacian each column sums to 1: diffusion conserves mass.
pub fn heat_kernel_column(
    eig: &EigenDecomposition,
    scale: f64,
    node: usize,
) -> Result<Array1<f64>, SpectralError> {
    let n = eig.eigenvalues.len();
    if node >= n {
        return Err(SpectralError::IndexOutOfRange { index: node, n });
    }
    let mut column = Array1::zeros(n);
    for k in 0..n {
        let w = (-scale * eig.eigenvalues[k]).exp() * eig.eigenvectors[[node, k]];
        if w == 0.0 {
            continue;
        }
        for i in 0..n {
            column[i] += w * eig.eigenvectors[[i, k]];
        }
    }
    Ok(column)
}

/// Full heat-kernel matrix `U diag(exp(-s*lambda)) U^T`; column `a` equals
/// [`heat_kernel_column`] for node `a`.
pub fn heat_kernel_matrix(eig: &EigenDecomposition, scale: f64) -> Array2<f64> {
    let n = eig.eigenvalues.len();
    let mut weighted = eig.eigenvectors.clone();
    for k in 0..n {
        let w = (-scale * eig.eigenvalues[k]).exp();
        for i in 0..n {
            weighted[[i, k]] *= w;
        }
    }
    weighted.dot(&eig.eigenvectors.t())
}
