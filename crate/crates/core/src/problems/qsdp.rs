//! Nonconvex quadratic semidefinite programs over the spectraplex:
//!
//! ```text
//! min  −(η₁/2)‖D·ℬ(Z)‖² + (η₂/2)‖𝒜(Z) − b‖²   s.t.  tr Z = 1, Z ⪰ 0
//! ```
//!
//! with `[𝒜(Z)]_j = A_j • Z` and `[ℬ(Z)]_j = B_j • Z`.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CompositeProblem, ProblemMeta, SmoothOracle};
use crate::problems::power::{power_iteration_lmax, POWER_MAX_ITERS, POWER_TOL};
use crate::problems::prox::Spectraplex;
use crate::vecops::dot;

pub const QSDP_FORMAT: &str = "cfapd-qsdp-v1";

/// A fully sampled QSDP instance; serializes to a self-contained file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QsdpInstance {
    pub format: String,
    pub n: usize,
    pub l: usize,
    pub seed: u64,
    pub eta1: f64,
    pub eta2: f64,
    /// `l` row-major `n × n` matrices, concatenated.
    pub a_mats: Vec<f64>,
    pub b_mats: Vec<f64>,
    pub d: Vec<f64>,
    pub b: Vec<f64>,
    /// Requested curvature pair `(m, M)`.
    pub target_m: f64,
    #[serde(rename = "target_M")]
    pub target_big_m: f64,
}

impl QsdpInstance {
    /// Samples `A₁…A_l` (row-major), then `B₁…B_l`, then `b`, all uniform on
    /// `[0, 1]`, then the diagonal of `D` uniformly from `{1, …, 1000}`, from
    /// `ChaCha8Rng::seed_from_u64(seed)`; then calibrates `η₁, η₂`.
    pub fn generate(n: usize, l: usize, m: f64, big_m: f64, seed: u64) -> Result<Self> {
        if n == 0 || l == 0 {
            return Err(Error::InvalidParameter {
                name: "n, l",
                reason: "matrix side and operator dimension must be positive".into(),
            });
        }
        if !(m > 0.0 && m <= big_m) {
            return Err(Error::InvalidParameter {
                name: "m, M",
                reason: format!("need 0 < m <= M, got ({m}, {big_m})"),
            });
        }
        let nn = n * n;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a_mats: Vec<f64> = (0..l * nn).map(|_| rng.random::<f64>()).collect();
        let b_mats: Vec<f64> = (0..l * nn).map(|_| rng.random::<f64>()).collect();
        let b: Vec<f64> = (0..l).map(|_| rng.random::<f64>()).collect();
        let d: Vec<f64> = (0..l)
            .map(|_| rng.random_range(1..=1000u32) as f64)
            .collect();

        let mut inst = Self {
            format: QSDP_FORMAT.to_string(),
            n,
            l,
            seed,
            eta1: 1.0,
            eta2: 1.0,
            a_mats,
            b_mats,
            d,
            b,
            target_m: m,
            target_big_m: big_m,
        };
        let (neg, pos) = inst.unscaled_part_norms()?;
        inst.eta1 = m / neg;
        inst.eta2 = big_m / pos;
        Ok(inst)
    }

    /// `(λ_max(ℬ*D²ℬ), λ_max(𝒜*𝒜))` by power iteration.
    pub fn unscaled_part_norms(&self) -> Result<(f64, f64)> {
        let nn = self.n * self.n;
        let weights: Vec<f64> = self.d.iter().map(|d| d * d).collect();
        let neg = power_iteration_lmax(
            |z| gram_apply(&self.b_mats, &weights, self.l, nn, z),
            nn,
            POWER_MAX_ITERS,
            POWER_TOL,
        )?;
        let ones = vec![1.0; self.l];
        let pos = power_iteration_lmax(
            |z| gram_apply(&self.a_mats, &ones, self.l, nn, z),
            nn,
            POWER_MAX_ITERS,
            POWER_TOL,
        )?;
        for v in [neg, pos] {
            if !(v > 1e-12) {
                return Err(Error::DegenerateOperator(v));
            }
        }
        Ok((neg, pos))
    }

    /// Same instance with the concave part removed (`η₁ = 0`), hence convex.
    pub fn without_negative_part(mut self) -> Self {
        self.eta1 = 0.0;
        self.target_m = 0.0;
        self
    }

    /// `I/n`, the standard starting point.
    pub fn initial_point(&self) -> Vec<f64> {
        let n = self.n;
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0 / n as f64;
        }
        z
    }

    pub fn objective(&self) -> QsdpObjective {
        QsdpObjective {
            n: self.n,
            l: self.l,
            eta1: self.eta1,
            eta2: self.eta2,
            a_mats: self.a_mats.clone(),
            b_mats: self.b_mats.clone(),
            d_sq: self.d.iter().map(|d| d * d).collect(),
            b: self.b.clone(),
            lipschitz: self.target_m.max(self.target_big_m),
        }
    }

    pub fn problem(&self) -> Result<CompositeProblem> {
        let meta = ProblemMeta {
            curv_lower: self.target_m,
            // conservative: the upper curvature of a difference of two PSD
            // forms is bounded by the sum of their norms
            curv_upper: self.target_big_m + self.target_m,
            phi_star: None,
            d0: None,
        };
        CompositeProblem::new(
            Arc::new(self.objective()),
            Arc::new(Spectraplex { n: self.n }),
            Some(meta),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        if inst.format != QSDP_FORMAT {
            return Err(Error::Config(format!(
                "unsupported instance format `{}` (expected `{QSDP_FORMAT}`)",
                inst.format
            )));
        }
        let nn = inst.n * inst.n;
        if inst.a_mats.len() != inst.l * nn
            || inst.b_mats.len() != inst.l * nn
            || inst.d.len() != inst.l
            || inst.b.len() != inst.l
        {
            return Err(Error::Config(
                "instance arrays have inconsistent sizes".into(),
            ));
        }
        Ok(inst)
    }
}

/// `z ↦ Σ_j w_j (M_j • z) M_j`.
fn gram_apply(mats: &[f64], weights: &[f64], l: usize, nn: usize, z: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; nn];
    for j in 0..l {
        let mj = &mats[j * nn..(j + 1) * nn];
        let coef = weights[j] * dot(mj, z);
        for (o, m) in out.iter_mut().zip(mj) {
            *o += coef * m;
        }
    }
    out
}

/// Smooth part of the QSDP objective.
#[derive(Debug, Clone)]
pub struct QsdpObjective {
    n: usize,
    l: usize,
    eta1: f64,
    eta2: f64,
    a_mats: Vec<f64>,
    b_mats: Vec<f64>,
    d_sq: Vec<f64>,
    b: Vec<f64>,
    lipschitz: f64,
}

impl QsdpObjective {
    fn mat<'a>(&self, mats: &'a [f64], j: usize) -> &'a [f64] {
        let nn = self.n * self.n;
        &mats[j * nn..(j + 1) * nn]
    }
}

impl SmoothOracle for QsdpObjective {
    fn dim(&self) -> usize {
        self.n * self.n
    }

    fn value(&self, z: &[f64]) -> f64 {
        let mut neg = 0.0;
        let mut pos = 0.0;
        for j in 0..self.l {
            if self.eta1 != 0.0 {
                let bz = dot(self.mat(&self.b_mats, j), z);
                neg += self.d_sq[j] * bz * bz;
            }
            let r = dot(self.mat(&self.a_mats, j), z) - self.b[j];
            pos += r * r;
        }
        -0.5 * self.eta1 * neg + 0.5 * self.eta2 * pos
    }

    fn gradient(&self, z: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; z.len()];
        for j in 0..self.l {
            if self.eta1 != 0.0 {
                let bj = self.mat(&self.b_mats, j);
                let coef = -self.eta1 * self.d_sq[j] * dot(bj, z);
                for (gi, m) in g.iter_mut().zip(bj) {
                    *gi += coef * m;
                }
            }
            let aj = self.mat(&self.a_mats, j);
            let coef = self.eta2 * (dot(aj, z) - self.b[j]);
            for (gi, m) in g.iter_mut().zip(aj) {
                *gi += coef * m;
            }
        }
        g
    }

    fn lipschitz_hint(&self) -> Option<f64> {
        Some(self.lipschitz)
    }
}

/// Generates a QSDP problem with curvature pair `(m, M)`.
pub fn gen_qsdp(n: usize, l: usize, m: f64, big_m: f64, seed: u64) -> Result<CompositeProblem> {
    QsdpInstance::generate(n, l, m, big_m, seed)?.problem()
}
