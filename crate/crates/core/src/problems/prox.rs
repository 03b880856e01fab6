//! Nonsmooth terms with closed-form proximal maps.

use crate::error::{check_dim, Error, Result};
use crate::model::{ExtValue, ProxOracle};
use crate::problems::eigen::{SymmetricEigen, JACOBI_TOL};
use crate::problems::simplex::project_simplex;

/// Membership tolerance used by the indicator `value` functions.
pub const DOMAIN_TOL: f64 = 1e-9;

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("prox weight must be positive, got {lambda}"),
        })
    }
}

/// `h ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl ProxOracle for ZeroFunction {
    fn value(&self, _x: &[f64]) -> ExtValue {
        ExtValue::Finite(0.0)
    }

    fn prox(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        Ok(x.to_vec())
    }
}

/// Indicator of the box `[lo, hi]ⁿ`.
#[derive(Debug, Clone, Copy)]
pub struct BoxIndicator {
    pub lo: f64,
    pub hi: f64,
}

impl BoxIndicator {
    pub fn symmetric(radius: f64) -> Self {
        Self {
            lo: -radius,
            hi: radius,
        }
    }
}

impl ProxOracle for BoxIndicator {
    fn value(&self, x: &[f64]) -> ExtValue {
        let tol = DOMAIN_TOL * (1.0 + self.lo.abs().max(self.hi.abs()));
        if x.iter().all(|&v| v >= self.lo - tol && v <= self.hi + tol) {
            ExtValue::Finite(0.0)
        } else {
            ExtValue::PlusInfinity
        }
    }

    fn prox(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        Ok(x.iter().map(|v| v.clamp(self.lo, self.hi)).collect())
    }
}

/// Indicator of the nonnegative orthant.
#[derive(Debug, Clone, Copy, Default)]
pub struct NonnegIndicator;

impl ProxOracle for NonnegIndicator {
    fn value(&self, x: &[f64]) -> ExtValue {
        if x.iter().all(|&v| v >= -DOMAIN_TOL) {
            ExtValue::Finite(0.0)
        } else {
            ExtValue::PlusInfinity
        }
    }

    fn prox(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        Ok(x.iter().map(|v| v.max(0.0)).collect())
    }
}

/// Euclidean projection of a row-major `n × n` matrix onto the spectraplex
/// `{Z ⪰ 0, tr Z = 1}`.
pub fn project_spectraplex(z: &[f64], n: usize) -> Result<Vec<f64>> {
    check_dim(n * n, z.len())?;
    let mut sym = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            sym[i * n + j] = 0.5 * (z[i * n + j] + z[j * n + i]);
        }
    }
    let eig = SymmetricEigen::jacobi(&sym, n, JACOBI_TOL)?;
    let projected = project_simplex(&eig.eigenvalues)?;
    let mut out = eig.reassemble(&projected);
    // exact symmetry
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (out[i * n + j] + out[j * n + i]);
            out[i * n + j] = avg;
            out[j * n + i] = avg;
        }
    }
    Ok(out)
}

/// Indicator of the spectraplex in `ℝ^{n×n}`.
#[derive(Debug, Clone, Copy)]
pub struct Spectraplex {
    pub n: usize,
}

impl Spectraplex {
    fn contains(&self, z: &[f64]) -> bool {
        let n = self.n;
        if z.len() != n * n {
            return false;
        }
        let trace: f64 = (0..n).map(|i| z[i * n + i]).sum();
        if (trace - 1.0).abs() > DOMAIN_TOL {
            return false;
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if (z[i * n + j] - z[j * n + i]).abs() > DOMAIN_TOL {
                    return false;
                }
            }
        }
        // Cholesky of Z + tol·I succeeds iff λ_min(Z) > -tol (up to rounding)
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.5 * (z[i * n + j] + z[j * n + i]);
                if i == j {
                    s += DOMAIN_TOL;
                }
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return false;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        true
    }
}

impl ProxOracle for Spectraplex {
    fn value(&self, x: &[f64]) -> ExtValue {
        if self.contains(x) {
            ExtValue::Finite(0.0)
        } else {
            ExtValue::PlusInfinity
        }
    }

    fn prox(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        check_lambda(lambda)?;
        project_spectraplex(x, self.n)
    }
}
