//! Synthetic quadratic composite problems `½xᵀHx + cᵀx + h(x)` with exactly
//! known curvature.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{CompositeProblem, ProblemMeta, ProxOracle, SmoothOracle};
use crate::problems::prox::{BoxIndicator, ZeroFunction};
use crate::vecops::dot;

#[derive(Debug, Clone)]
pub struct QuadraticObjective {
    n: usize,
    /// Row-major symmetric `n × n`.
    pub hessian: Vec<f64>,
    pub linear: Vec<f64>,
    pub spectrum: Vec<f64>,
}

impl QuadraticObjective {
    /// `H = Q·diag(spectrum)·Qᵀ` with a seeded random orthogonal `Q`, and
    /// `c` drawn uniformly from `[-1, 1]ⁿ`.
    pub fn with_spectrum(spectrum: Vec<f64>, seed: u64) -> Self {
        let n = spectrum.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let raw = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let q = raw.qr().q();
        let mut hessian = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                hessian[i * n + j] = (0..n).map(|k| q[(i, k)] * spectrum[k] * q[(j, k)]).sum();
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (hessian[i * n + j] + hessian[j * n + i]);
                hessian[i * n + j] = avg;
                hessian[j * n + i] = avg;
            }
        }
        let linear = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        Self {
            n,
            hessian,
            linear,
            spectrum,
        }
    }

    pub fn hess_apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        (0..n)
            .map(|i| dot(&self.hessian[i * n..(i + 1) * n], x))
            .collect()
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.spectrum
            .iter()
            .fold(0.0, |acc: f64, v| acc.max(v.abs()))
    }
}

impl SmoothOracle for QuadraticObjective {
    fn dim(&self) -> usize {
        self.n
    }

    fn value(&self, x: &[f64]) -> f64 {
        0.5 * dot(x, &self.hess_apply(x)) + dot(&self.linear, x)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.hess_apply(x);
        g.iter_mut().zip(&self.linear).for_each(|(a, c)| *a += c);
        g
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.max_abs_eigenvalue())
    }
}

/// Evenly spaced spectrum on `[lo, hi]` with both extremes attained.
pub fn linear_spectrum(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    if n == 1 {
        return vec![hi];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

/// Quadratic with Hessian spectrum spread over `[−m, M]`, `h` either zero or
/// the indicator of `[−1, 1]ⁿ`.
///
/// In the convex unconstrained case the linear term is placed in the range
/// of `H`, so `φ* = −½ wᵀHw` for `c = Hw` is finite and recorded in meta.
pub fn gen_quadratic(
    n: usize,
    m: f64,
    big_m: f64,
    convex: bool,
    boxed: bool,
    seed: u64,
) -> Result<CompositeProblem> {
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "dimension must be positive".into(),
        });
    }
    if !(m >= 0.0 && big_m > 0.0 && m <= big_m) {
        return Err(Error::InvalidParameter {
            name: "m, M",
            reason: format!("need 0 <= m <= M and M > 0, got ({m}, {big_m})"),
        });
    }
    if convex && m != 0.0 {
        return Err(Error::InvalidParameter {
            name: "m",
            reason: "a convex instance must have m = 0".into(),
        });
    }
    if n == 1 && m > 0.0 {
        return Err(Error::InvalidParameter {
            name: "n",
            reason: "a one-dimensional instance cannot attain both -m and M".into(),
        });
    }
    let mut obj = QuadraticObjective::with_spectrum(linear_spectrum(n, -m, big_m), seed);
    let mut phi_star = None;
    if convex && !boxed {
        let w = obj.linear.clone();
        obj.linear = obj.hess_apply(&w);
        phi_star = Some(-0.5 * dot(&w, &obj.linear));
    }
    let h: Arc<dyn ProxOracle> = if boxed {
        Arc::new(BoxIndicator::symmetric(1.0))
    } else {
        Arc::new(ZeroFunction)
    };
    let meta = ProblemMeta {
        curv_lower: m,
        curv_upper: big_m,
        phi_star,
        d0: None,
    };
    CompositeProblem::new(Arc::new(obj), h, Some(meta))
}
