//! Curvature-free accelerated proximal methods for nonconvex composite
//! optimization `min φ = f + h`.
//!
//! * [`acg`]: CF.ACG, the inner accelerated composite gradient solver with
//!   local convexity checks.
//! * [`apd`]: CF.APD, the outer inexact proximal point method.
//! * [`pgd`]: adaptive proximal gradient baseline.
//! * [`problems`]: QSDP and synthetic quadratic generators, prox operators.
//! * [`bench`]: experiment grids and CSV output.

pub mod acg;
pub mod apd;
pub mod bench;
pub mod error;
pub mod model;
pub mod parallel;
pub mod pgd;
pub mod problems;
pub mod trace;
pub mod vecops;

pub use acg::{acg_run, AcgOutcome, AcgParams, AcgStatus};
pub use apd::{apd_run, ApdParams, SolveResult};
pub use bench::{run_experiment, BenchConfig, CsvRow, RhoRule, SolveSettings};
pub use error::{Error, Result};
pub use model::{
    check_stationarity, finite_diff_grad, quad_argmin_regularized, quad_combine, quad_eval,
    CompositeProblem, ExtValue, ProblemMeta, ProxOracle, QuadraticModel, RunRecord, Slack,
    SmoothOracle, Status,
};
pub use parallel::Execution;
pub use pgd::{pgd_run, PgdParams};
pub use problems::ProblemSpec;
pub use trace::{verify_descent_invariants, DescentReport, SolveTrace, SolverKind};
