//! Cyclic Jacobi eigensolver for small dense symmetric matrices.

use crate::error::{Error, Result};

pub const JACOBI_TOL: f64 = 1e-12;
const MAX_SWEEPS: usize = 100;

/// Eigen-decomposition `A = V·diag(λ)·Vᵀ` of a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub n: usize,
    pub eigenvalues: Vec<f64>,
    /// Row-major `n × n`; column `k` is the eigenvector of `eigenvalues[k]`.
    pub eigenvectors: Vec<f64>,
}

impl SymmetricEigen {
    /// Runs cyclic Jacobi sweeps on the row-major matrix `a` until the
    /// off-diagonal Frobenius norm drops below `tol·‖A‖_F`.
    pub fn jacobi(a: &[f64], n: usize, tol: f64) -> Result<Self> {
        crate::error::check_dim(n * n, a.len())?;
        let mut a = a.to_vec();
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }

        let fro = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        let target = tol * fro;
        let mut off = off_diagonal_norm(&a, n);
        let mut sweeps = 0;

        while off > target && fro > 0.0 {
            if sweeps == MAX_SWEEPS {
                return Err(Error::EigenNoConvergence {
                    sweeps,
                    off_norm: off,
                });
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    rotate(&mut a, &mut v, n, p, q);
                }
            }
            sweeps += 1;
            off = off_diagonal_norm(&a, n);
        }

        let eigenvalues = (0..n).map(|i| a[i * n + i]).collect();
        Ok(Self {
            n,
            eigenvalues,
            eigenvectors: v,
        })
    }

    /// `V·diag(values)·Vᵀ`, row-major.
    pub fn reassemble(&self, values: &[f64]) -> Vec<f64> {
        let n = self.n;
        let v = &self.eigenvectors;
        let mut out = vec![0.0; n * n];
        for k in 0..n {
            let lam = values[k];
            if lam == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = lam * v[i * n + k];
                if vik == 0.0 {
                    continue;
                }
                let row = &mut out[i * n..(i + 1) * n];
                for (j, r) in row.iter_mut().enumerate() {
                    *r += vik * v[j * n + k];
                }
            }
        }
        out
    }

    pub fn max_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }
}

fn off_diagonal_norm(a: &[f64], n: usize) -> f64 {
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            s += a[p * n + q] * a[p * n + q];
        }
    }
    (2.0 * s).sqrt()
}

#[inline]
fn rotate(a: &mut [f64], v: &mut [f64], n: usize, p: usize, q: usize) {
    let apq = a[p * n + q];
    if apq == 0.0 {
        return;
    }
    let app = a[p * n + p];
    let aqq = a[q * n + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    // A ← A·J on columns p, q
    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = c * akp - s * akq;
        a[k * n + q] = s * akp + c * akq;
    }
    // A ← Jᵀ·A on rows p, q
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = c * apk - s * aqk;
        a[q * n + k] = s * apk + c * aqk;
    }
    a[p * n + q] = 0.0;
    a[q * n + p] = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = c * vkp - s * vkq;
        v[k * n + q] = s * vkp + c * vkq;
    }
}
