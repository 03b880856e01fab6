//! Problem generators and proximal operators.

pub mod eigen;
pub mod power;
pub mod prox;
pub mod qsdp;
pub mod quadratic;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::model::CompositeProblem;

pub use power::power_iteration_lmax;
pub use prox::{project_spectraplex, BoxIndicator, NonnegIndicator, Spectraplex, ZeroFunction};
pub use qsdp::{gen_qsdp, QsdpInstance, QsdpObjective};
pub use quadratic::{gen_quadratic, QuadraticObjective};
pub use simplex::project_simplex;

/// Recipe that regenerates a problem deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ProblemSpec {
    Quadratic {
        n: usize,
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
        convex: bool,
        boxed: bool,
        seed: u64,
    },
    Qsdp {
        n: usize,
        l: usize,
        m: f64,
        #[serde(rename = "M")]
        big_m: f64,
        seed: u64,
        #[serde(default)]
        convex: bool,
    },
}

impl ProblemSpec {
    pub fn family(&self) -> &'static str {
        match self {
            ProblemSpec::Quadratic { .. } => "quadratic",
            ProblemSpec::Qsdp { .. } => "qsdp",
        }
    }

    pub fn build(&self) -> Result<CompositeProblem> {
        match *self {
            ProblemSpec::Quadratic {
                n,
                m,
                big_m,
                convex,
                boxed,
                seed,
            } => gen_quadratic(n, m, big_m, convex, boxed, seed),
            ProblemSpec::Qsdp { .. } => self.qsdp_instance()?.expect("qsdp").problem(),
        }
    }

    /// The sampled instance behind a QSDP spec.
    pub fn qsdp_instance(&self) -> Result<Option<QsdpInstance>> {
        match *self {
            ProblemSpec::Qsdp {
                n,
                l,
                m,
                big_m,
                seed,
                convex,
            } => {
                let inst = QsdpInstance::generate(n, l, m, big_m, seed)?;
                Ok(Some(if convex {
                    inst.without_negative_part()
                } else {
                    inst
                }))
            }
            _ => Ok(None),
        }
    }

    /// `I/n` for QSDP, the origin for quadratics.
    pub fn initial_point(&self) -> Vec<f64> {
        match *self {
            ProblemSpec::Quadratic { n, .. } => vec![0.0; n],
            ProblemSpec::Qsdp { n, .. } => {
                let mut z = vec![0.0; n * n];
                for i in 0..n {
                    z[i * n + i] = 1.0 / n as f64;
                }
                z
            }
        }
    }
}
