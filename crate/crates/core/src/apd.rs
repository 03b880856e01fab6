//! Curvature-free accelerated inexact proximal point method (CF.APD).
//!
//! Each outer iteration approximately solves the proximal subproblem
//! `min φ(·)/(2m) + ½‖· − z_k‖²` with CF.ACG. When ACG reports a
//! convexity failure the weak-convexity estimate `m` is multiplied by `α`
//! and the subproblem is retried from the same point.

use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::acg::{acg_run_with, AcgParams, AcgStatus, LINE_SEARCH_CAP};
use crate::error::{check_dim, Error, Result};
use crate::model::{
    ensure_finite, CompositeProblem, ExtValue, ProxOracle, RunRecord, Slack, SmoothOracle, Status,
};
use crate::problems::ProblemSpec;
use crate::trace::{
    OuterTraceEntry, SolveTrace, SolverKind, TraceHeader, TraceSummary, TRACE_FORMAT,
};
use crate::vecops::norm;

/// Strong convexity of every prox subproblem.
pub const SUBPROBLEM_MU: f64 = 0.5;
/// Relative-error parameter of the inner termination test.
pub const SUBPROBLEM_SIGMA: f64 = 0.25;
/// Default `θ ∈ (2, ∞)`.
pub const DEFAULT_THETA: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApdParams {
    pub rho: f64,
    pub m0: f64,
    pub big_m0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub theta: f64,
    /// Let `m` and `L` shrink between calls.
    pub decay: bool,
    pub max_outer: u64,
    /// Cap on inner iterations summed over the whole run.
    pub max_total_inner: u64,
    /// Wall-clock budget in seconds.
    pub time_limit: Option<f64>,
    pub slack: Slack,
    /// Keep the per-iteration trace in memory.
    pub keep_trace: bool,
}

impl ApdParams {
    pub fn new(rho: f64, m0: f64, big_m0: f64) -> Self {
        Self {
            rho,
            m0,
            big_m0,
            alpha: 2.0,
            beta: 2.0,
            theta: DEFAULT_THETA,
            decay: false,
            max_outer: 1_000_000,
            max_total_inner: u64::MAX,
            time_limit: None,
            slack: Slack::default(),
            keep_trace: true,
        }
    }

    /// `m₀ = ρ`, `M₀ = 1`.
    pub fn standard(rho: f64) -> Self {
        Self::new(rho, rho, 1.0)
    }

    /// `m₀ = ρ²`, `M₀ = 1`.
    pub fn rho_squared(rho: f64) -> Self {
        Self::new(rho, rho * rho, 1.0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return bad("rho", format!("must be positive, got {}", self.rho));
        }
        if !(self.m0 > 0.0 && self.m0.is_finite()) {
            return bad("m0", format!("must be positive, got {}", self.m0));
        }
        if !(self.big_m0 >= self.m0 && self.big_m0.is_finite()) {
            return bad(
                "M0",
                format!("need M0 >= m0 = {}, got {}", self.m0, self.big_m0),
            );
        }
        if !(self.alpha > 1.0) {
            return bad("alpha", format!("must exceed 1, got {}", self.alpha));
        }
        if !(self.beta > 1.0) {
            return bad("beta", format!("must exceed 1, got {}", self.beta));
        }
        if !(self.theta > 2.0) {
            return bad("theta", format!("must exceed 2, got {}", self.theta));
        }
        if self.time_limit.is_some_and(|t| !(t > 0.0)) {
            return bad("time_limit", "must be positive".into());
        }
        Ok(())
    }
}

/// `ψˢ = f/(2m) + ½‖· − z_k‖²`.
pub struct SubproblemSmooth<'a> {
    f: &'a dyn SmoothOracle,
    scale: f64,
    anchor: &'a [f64],
}

impl<'a> SubproblemSmooth<'a> {
    pub fn new(f: &'a dyn SmoothOracle, m: f64, anchor: &'a [f64]) -> Self {
        Self {
            f,
            scale: 0.5 / m,
            anchor,
        }
    }
}

impl SmoothOracle for SubproblemSmooth<'_> {
    fn dim(&self) -> usize {
        self.anchor.len()
    }

    fn value(&self, x: &[f64]) -> f64 {
        self.scale * self.f.value(x) + 0.5 * crate::vecops::dist_sq(x, self.anchor)
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = self.f.gradient(x);
        for ((gi, xi), ai) in g.iter_mut().zip(x).zip(self.anchor) {
            *gi = self.scale * *gi + (xi - ai);
        }
        g
    }
}

/// `ψⁿ = h/(2m)`.
pub struct SubproblemNonsmooth<'a> {
    h: &'a dyn ProxOracle,
    scale: f64,
}

impl<'a> SubproblemNonsmooth<'a> {
    pub fn new(h: &'a dyn ProxOracle, m: f64) -> Self {
        Self { h, scale: 0.5 / m }
    }
}

impl ProxOracle for SubproblemNonsmooth<'_> {
    fn value(&self, x: &[f64]) -> ExtValue {
        self.h.value(x).scale(self.scale)
    }

    fn prox(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.h.prox(lambda * self.scale, x)
    }
}

/// Subproblem oracles at `(m, z_anchor)` and the inner solver data
/// `μ = ½`, `L₀ = M/(2m) + 1`, `σ = ¼`.
pub fn apd_build_subproblem<'a>(
    problem: &'a CompositeProblem,
    m: f64,
    z_anchor: &'a [f64],
    big_m: f64,
    params: &ApdParams,
) -> (SubproblemSmooth<'a>, SubproblemNonsmooth<'a>, AcgParams) {
    let psi_s = SubproblemSmooth::new(problem.f.as_ref(), m, z_anchor);
    let psi_n = SubproblemNonsmooth::new(problem.h.as_ref(), m);
    let mut acg = AcgParams::new(
        SUBPROBLEM_MU,
        big_m / (2.0 * m) + 1.0,
        SUBPROBLEM_SIGMA,
        params.theta,
        params.beta,
    );
    acg.slack = params.slack;
    (psi_s, psi_n, acg)
}

/// Output of [`apd_run`].
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub z_bar: Vec<f64>,
    pub v_bar: Vec<f64>,
    pub record: RunRecord,
    pub trace: SolveTrace,
}

/// Accepted step of the `m` search.
pub struct MStep {
    pub m: f64,
    pub y: Vec<f64>,
    pub u_tilde: Vec<f64>,
    pub l: f64,
    pub inner_iters: u64,
    pub inner_iters_total: u64,
    pub calls: u64,
    pub status: AcgStatus,
}

/// Tries `m = m_start·αˢ` until the inner solve succeeds. A limit status
/// from the inner solver is passed through with the last attempt.
pub fn apd_m_line_search(
    problem: &CompositeProblem,
    z: &[f64],
    m_start: f64,
    big_m: f64,
    params: &ApdParams,
    deadline: Option<Instant>,
    record: &mut RunRecord,
) -> Result<MStep> {
    let mut m = m_start;
    let mut total = 0;
    for calls in 1..=LINE_SEARCH_CAP as u64 + 1 {
        let (psi_s, psi_n, mut acg) = apd_build_subproblem(problem, m, z, big_m, params);
        if params.decay {
            acg.l0 = SUBPROBLEM_MU.max(acg.l0 / (1.0 + params.beta / 2.0));
        }
        acg.max_iters = params.max_total_inner.saturating_sub(record.inner_iters);
        let (out, rec) = acg_run_with(&psi_s, &psi_n, z, &acg, deadline, None)?;
        record.absorb(&rec);
        total += out.iterations;
        if out.status != AcgStatus::Failure {
            return Ok(MStep {
                m,
                y: out.y_out,
                u_tilde: out.u_out,
                l: out.l_out,
                inner_iters: out.iterations,
                inner_iters_total: total,
                calls,
                status: out.status,
            });
        }
        m *= params.alpha;
    }
    Err(Error::LineSearchExhausted {
        trials: LINE_SEARCH_CAP,
        last: m,
    })
}

/// Runs CF.APD from `z0` until `‖v‖ ≤ ρ` or a limit is hit.
pub fn apd_run(
    problem: &CompositeProblem,
    z0: &[f64],
    params: &ApdParams,
    solver: SolverKind,
    spec: Option<&ProblemSpec>,
) -> Result<SolveResult> {
    params.validate()?;
    check_dim(problem.dim(), z0.len())?;
    ensure_finite("z0", z0)?;
    let start = Instant::now();
    let deadline = params
        .time_limit
        .map(|t| start + Duration::from_secs_f64(t));

    let mut record = RunRecord::default();
    record.func_evals += 1;
    let phi0 = problem
        .objective(z0)?
        .finite()
        .ok_or(Error::OutsideDomain)?;
    let mut trace = SolveTrace {
        header: TraceHeader {
            format: TRACE_FORMAT.to_string(),
            solver,
            problem: spec.cloned(),
            theta: params.theta,
            rho: params.rho,
            z0: z0.to_vec(),
            phi0,
            phi_star: problem.meta.and_then(|m| m.phi_star),
        },
        entries: Vec::new(),
        summary: None,
    };

    let mut z = z0.to_vec();
    let mut v = vec![0.0; z.len()];
    let mut m = params.m0;
    let mut big_m = params.big_m0;
    let status = loop {
        if record.outer_iters >= params.max_outer {
            break Status::IterLimit;
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            break Status::TimeLimit;
        }
        if record.inner_iters >= params.max_total_inner {
            break Status::IterLimit;
        }
        let m_start = if params.decay {
            params.m0.max(m / (1.0 + params.alpha / 2.0))
        } else {
            m
        };
        let step = apd_m_line_search(problem, &z, m_start, big_m, params, deadline, &mut record)?;
        match step.status {
            AcgStatus::IterLimit => break Status::IterLimit,
            AcgStatus::TimeLimit => break Status::TimeLimit,
            AcgStatus::Stalled => break Status::Failed,
            _ => {}
        }

        let two_m = 2.0 * step.m;
        let u: Vec<f64> = step.u_tilde.iter().map(|x| two_m * x).collect();
        v = (0..z.len())
            .map(|i| u[i] + two_m * (z[i] - step.y[i]))
            .collect();
        record.func_evals += 1;
        let phi = problem
            .objective(&step.y)?
            .finite()
            .ok_or(Error::OutsideDomain)?;
        let residual = norm(&v);
        if params.keep_trace {
            trace.entries.push(OuterTraceEntry {
                k: record.outer_iters,
                m: step.m,
                big_m,
                l: step.l,
                inner_iters: step.inner_iters,
                inner_iters_total: step.inner_iters_total,
                inner_calls: step.calls,
                phi,
                residual,
                z: step.y.clone(),
                u,
                v: v.clone(),
            });
        }
        record.outer_iters += 1;
        record.final_residual = residual;
        z = step.y;
        m = step.m;
        big_m = two_m * (step.l - 1.0);
        if residual <= params.rho {
            break Status::Solved;
        }
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

/// `(α + β)·c` floored at `c₀`, the growth cap on curvature estimates.
fn capped(c0: f64, alpha: f64, beta: f64, c_star: f64) -> f64 {
    c0.max((alpha + beta) * c_star)
}

/// Upper bound on the total number of inner iterations of CF.APD without
/// decay, given the true curvature pair and `Δ₀ = φ(z₀) − φ*`.
pub fn apd_inner_iteration_bound(
    params: &ApdParams,
    m_star: f64,
    big_m_star: f64,
    delta0: f64,
) -> f64 {
    let (a, b, th) = (params.alpha, params.beta, params.theta);
    let m_bar = capped(params.m0, a, b, m_star);
    let big_m_bar = capped(params.big_m0, a, b, big_m_star);
    let c0 = apd_c0(params, m_bar, big_m_bar);
    let r2 = params.rho * params.rho;
    let left = 1.0 + 2.0 * th * m_bar * delta0 / r2;
    let right = 1.0 / params.m0 + 2.0 * th * delta0 / r2;
    (8.0 * c0 * (left * right).sqrt()).ceil()
}

/// `⌈4C₀/√m⌉`, the inner-iteration bound of one outer iteration accepted at `m`.
pub fn apd_outer_inner_bound(params: &ApdParams, m_star: f64, big_m_star: f64, m: f64) -> f64 {
    let m_bar = capped(params.m0, params.alpha, params.beta, m_star);
    let big_m_bar = capped(params.big_m0, params.alpha, params.beta, big_m_star);
    (4.0 * apd_c0(params, m_bar, big_m_bar) / m.sqrt()).ceil()
}

/// `C₀ = √(m₀P₀)·log₁⁺{P₀·𝒜_{1/2,P₀}(1/4, θ)}` with `P₀ = 5β(M̄ + m̄)/m₀`.
pub fn apd_c0(params: &ApdParams, m_bar: f64, big_m_bar: f64) -> f64 {
    let p0 = 5.0 * params.beta * (big_m_bar + m_bar) / params.m0;
    let a = crate::acg::acg_success_threshold(p0, SUBPROBLEM_MU, SUBPROBLEM_SIGMA, params.theta);
    (params.m0 * p0).sqrt() * crate::acg::log1_plus(p0 * a)
}
