//! Adaptive proximal gradient descent with backtracking, the reference
//! curvature-free baseline.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::apd::{SolveResult, DEFAULT_THETA};
use crate::error::{check_dim, Error, Result};
use crate::model::{ensure_finite, CompositeProblem, RunRecord, Slack, Status};
use crate::problems::ProblemSpec;
use crate::trace::{
    OuterTraceEntry, SolveTrace, SolverKind, TraceHeader, TraceSummary, TRACE_FORMAT,
};
use crate::vecops::{dist_sq, dot, norm};

/// Floor on the curvature estimate after repeated decreases.
pub const L_MIN: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PgdParams {
    pub l_init: f64,
    pub gamma_u: f64,
    pub gamma_d: f64,
    pub rho: f64,
    /// Cap on accepted steps.
    pub max_iters: u64,
    /// Cap on trial steps, each costing one prox evaluation.
    pub max_total_inner: u64,
    pub time_limit: Option<f64>,
    /// Slack of the descent test, exact by default.
    pub slack: Slack,
    /// Keep the per-iteration trace in memory.
    pub keep_trace: bool,
}

impl PgdParams {
    pub fn new(rho: f64) -> Self {
        Self {
            l_init: 1.0,
            gamma_u: 2.0,
            gamma_d: 2.0,
            rho,
            max_iters: u64::MAX,
            max_total_inner: u64::MAX,
            time_limit: None,
            slack: Slack::EXACT,
            keep_trace: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.l_init > 0.0 && self.l_init.is_finite()) {
            return bad("l_init", format!("must be positive, got {}", self.l_init));
        }
        if !(self.gamma_u > 1.0) {
            return bad("gamma_u", format!("must exceed 1, got {}", self.gamma_u));
        }
        if !(self.gamma_d > 1.0) {
            return bad("gamma_d", format!("must exceed 1, got {}", self.gamma_d));
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho", format!("must be positive, got {}", self.rho));
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0)) {
            return bad("time_limit", "must be positive".into());
        }
        Ok(())
    }
}

/// Runs PGD from `z0` until `‖v‖ ≤ ρ` or a limit is hit.
///
/// In the trace, `u = ∇f(z⁺) − ∇f(z)` and `m = L/2`, so that the recorded
/// residual reads `v = u + 2m(z − z⁺)` as for CF.APD.
pub fn pgd_run(
    problem: &CompositeProblem,
    z0: &[f64],
    params: &PgdParams,
    spec: Option<&ProblemSpec>,
) -> Result<SolveResult> {
    params.validate()?;
    check_dim(problem.dim(), z0.len())?;
    ensure_finite("z0", z0)?;
    let start = Instant::now();
    let deadline = params
        .time_limit
        .map(|t| start + Duration::from_secs_f64(t));
    let (f, h) = (problem.f.as_ref(), problem.h.as_ref());

    let mut record = RunRecord::default();
    let h0 = h.value(z0).finite().ok_or(Error::OutsideDomain)?;
    let mut z = z0.to_vec();
    let mut fz = f.value(&z);
    let mut gz = f.gradient(&z);
    record.func_evals += 1;
    record.grad_evals += 1;
    let phi0 = fz + h0;
    let mut trace = SolveTrace {
        header: TraceHeader {
            format: TRACE_FORMAT.to_string(),
            solver: SolverKind::Pgd,
            problem: spec.cloned(),
            theta: DEFAULT_THETA,
            rho: params.rho,
            z0: z0.to_vec(),
            phi0,
            phi_star: problem.meta.and_then(|m| m.phi_star),
        },
        entries: Vec::new(),
        summary: None,
    };

    let mut l = params.l_init;
    let mut v = vec![0.0; z.len()];
    let status = 'outer: loop {
        if record.outer_iters >= params.max_iters {
            break Status::IterLimit;
        }
        // backtracking on the descent inequality
        let (zp, fzp) = loop {
            if record.inner_iters >= params.max_total_inner {
                break 'outer Status::IterLimit;
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                break 'outer Status::TimeLimit;
            }
            let fwd: Vec<f64> = z.iter().zip(&gz).map(|(a, g)| a - g / l).collect();
            record.prox_evals += 1;
            record.inner_iters += 1;
            let zp = h.prox(1.0 / l, &fwd)?;
            ensure_finite("z_plus", &zp)?;
            record.func_evals += 1;
            let fzp = f.value(&zp);
            let d: Vec<f64> = zp.iter().zip(&z).map(|(a, b)| a - b).collect();
            let gap = (fzp - fz) - dot(&gz, &d);
            if params
                .slack
                .holds_scaled(gap, 0.5 * l * dist_sq(&zp, &z), fz.abs())
            {
                break (zp, fzp);
            }
            l *= params.gamma_u;
        };
        record.grad_evals += 1;
        let gzp = f.gradient(&zp);
        let u: Vec<f64> = gzp.iter().zip(&gz).map(|(a, b)| a - b).collect();
        v = (0..z.len()).map(|i| u[i] + l * (z[i] - zp[i])).collect();
        let residual = norm(&v);
        let phi = fzp + h.value(&zp).finite().ok_or(Error::OutsideDomain)?;
        if params.keep_trace {
            trace.entries.push(OuterTraceEntry {
                k: record.outer_iters,
                m: 0.5 * l,
                big_m: l,
                l,
                inner_iters: 1,
                inner_iters_total: 1,
                inner_calls: 1,
                phi,
                residual,
                z: zp.clone(),
                u,
                v: v.clone(),
            });
        }
        record.outer_iters += 1;
        record.final_residual = residual;
        z = zp;
        fz = fzp;
        gz = gzp;
        if residual <= params.rho {
            break Status::Solved;
        }
        l = (l / params.gamma_d).max(L_MIN);
    };

    record.status = status;
    record.wall_time_s = start.elapsed().as_secs_f64();
    trace.summary = Some(TraceSummary {
        record: record.clone(),
    });
    Ok(SolveResult {
        z_bar: z,
        v_bar: v,
        record,
        trace,
    })
}
