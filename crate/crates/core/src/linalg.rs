//! Minimal dense eigensolvers: cyclic Jacobi for real-symmetric and
//! complex-Hermitian matrices.
//!
//! The crate needs exactly two spectral operations (factoring a 5x5
//! diffusion matrix and bounding the smallest eigenvalue of a density
//! matrix), so a dependency-free Jacobi implementation is sufficient.
//! Eigenvalues are returned in the order the diagonal ends up in (no
//! sorting), which means an already-diagonal input passes through with its
//! order intact.

use num_complex::Complex64;

/// Row-major square matrix view helpers.
#[inline]
fn at(a: &[f64], n: usize, i: usize, j: usize) -> f64 {
    a[i * n + j]
}

/// Eigendecomposition of a real symmetric matrix (row-major, n x n).
/// Returns (eigenvalues, eigenvectors); eigenvector k is the column
/// `v[i * n + k]`, so `a = v diag(l) v^T`.
///
/// Off-diagonal asymmetry is not checked; the caller guarantees symmetry.
pub fn sym_eigen(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let scale: f64 = (0..n).map(|i| at(&m, n, i, i).abs()).fold(0.0, f64::max);
    let tol = 1e-15 * scale.max(1e-300);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(at(&m, n, i, j).abs());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let vals = (0..n).map(|i| at(&m, n, i, i)).collect();
    (vals, v)
}

/// Eigenvalues of a complex Hermitian matrix (row-major, n x n), unsorted.
/// Only the values are accumulated; used for positivity diagnostics.
pub fn herm_eigenvalues(a: &[Complex64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let scale: f64 = (0..n).map(|i| m[i * n + i].re.abs()).fold(0.0, f64::max);
    let tol = 1e-15 * scale.max(1e-300);
    for _sweep in 0..64 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in (i + 1)..n {
                off = off.max(m[i * n + j].norm());
            }
        }
        if off <= tol {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                let r = apq.norm();
                if r <= tol * 1e-2 {
                    continue;
                }
                // Phase e^{i phi} = apq / |apq|; the rotation is the real
                // Jacobi rotation conjugated by that phase.
                let phase = apq / r;
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let theta = (aqq - app) / (2.0 * r);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Columns: col_p' = c col_p - s conj(phase) col_q,
                //          col_q' = s phase col_p + c col_q.
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * phase.conj() * mkq;
                    m[k * n + q] = s * phase * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * phase * mqk;
                    m[q * n + k] = s * phase.conj() * mpk + c * mqk;
                }
            }
        }
    }
    (0..n).map(|i| m[i * n + i].re).collect()
}
