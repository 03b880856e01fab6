//! Curvature-free accelerated composite gradient (CF.ACG) method.
//!
//! Minimizes `ψ = ψˢ + ψⁿ` where `ψˢ` is smooth and `ψⁿ` is accessed only
//! through its prox. Each iteration runs a backtracking search over the
//! curvature estimate `L`, takes a μ-strongly-convex accelerated step, and
//! then checks a small set of local convexity inequalities along the
//! iterates. A violated inequality proves `ψˢ` is not μ-strongly convex on
//! the trajectory and the method returns early with [`AcgStatus::Failure`].
//! Otherwise it stops once the relative termination inequalities hold.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::model::{ensure_finite, ProxOracle, QuadraticModel, RunRecord, Slack, SmoothOracle};
use crate::vecops::{dist_sq, dot, norm_sq};

/// Maximum number of `L ← βL` increases per iteration.
pub const LINE_SEARCH_CAP: usize = 60;

/// Default slack of the curvature condition. It only has to absorb
/// rounding in the function values, and a looser one lets the search
/// accept steps that are too long once the iterates are close together.
pub const DESCENT_SLACK: Slack = Slack {
    abs: 0.0,
    rel: 1e-13,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AcgParams {
    pub mu: f64,
    pub l0: f64,
    pub sigma: f64,
    pub theta: f64,
    pub beta: f64,
    pub max_iters: u64,
    /// Slack of the convexity and termination checks.
    pub slack: Slack,
    /// Slack of the curvature (descent) condition in the line search.
    pub descent_slack: Slack,
}

impl AcgParams {
    pub fn new(mu: f64, l0: f64, sigma: f64, theta: f64, beta: f64) -> Self {
        Self {
            mu,
            l0,
            sigma,
            theta,
            beta,
            max_iters: 1_000_000,
            slack: Slack::default(),
            descent_slack: DESCENT_SLACK,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        if !(self.mu > 0.0 && self.mu.is_finite()) {
            return bad("mu", format!("must be positive, got {}", self.mu));
        }
        if !(self.l0 >= self.mu && self.l0.is_finite()) {
            return bad(
                "l0",
                format!("need L0 >= mu = {}, got {}", self.mu, self.l0),
            );
        }
        if !(self.sigma > 0.0) {
            return bad("sigma", format!("must be positive, got {}", self.sigma));
        }
        if !(self.theta > 2.0) {
            return bad("theta", format!("must exceed 2, got {}", self.theta));
        }
        if !(self.beta > 1.0) {
            return bad("beta", format!("must exceed 1, got {}", self.beta));
        }
        Ok(())
    }
}

/// Iterate `(x_j, y_j, A_j, Q_j, L_j)` of CF.ACG.
#[derive(Debug, Clone)]
pub struct AcgState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub a_sum: f64,
    pub model: QuadraticModel,
    pub l: f64,
    pub j: u64,
    pub y0: Vec<f64>,
    /// `ψ(y_j)`
    pub psi_y: f64,
    /// `ψ(y₀)`
    pub psi_y0: f64,
}

impl AcgState {
    pub fn xi(&self, mu: f64) -> f64 {
        1.0 + mu * self.a_sum
    }
}

/// Everything computed by one trial step at a fixed `L`.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub l: f64,
    /// `a_j`
    pub a: f64,
    /// `A_{j+1}`
    pub a_next: f64,
    pub xi: f64,
    pub xi_next: f64,
    pub x_tilde: Vec<f64>,
    pub y_next: Vec<f64>,
    pub x_next: Vec<f64>,
    pub u_tilde: Vec<f64>,
    /// `q^L_{j+1}`
    pub q_next: QuadraticModel,
    pub q_tilde_at_y_next: f64,
    pub psi_s_x_tilde: f64,
    pub psi_s_y_next: f64,
    /// `ℓ_{ψˢ}(y_{j+1}; x̃_j)`
    pub lin_y_next: f64,
    pub psi_y_next: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcgStatus {
    Success,
    Failure,
    IterLimit,
    TimeLimit,
    /// `A_{j+1}` passed the success threshold for the largest `L` seen
    /// without the termination test firing. In exact arithmetic this cannot
    /// happen once the convexity checks hold, so rounding has taken over.
    Stalled,
}

#[derive(Debug, Clone)]
pub struct AcgOutcome {
    pub y_out: Vec<f64>,
    pub u_out: Vec<f64>,
    pub l_out: f64,
    pub status: AcgStatus,
    pub iterations: u64,
    pub a_sum: f64,
}

/// One accepted iteration, for the invariant harness.
#[derive(Debug, Clone)]
pub struct AcgIterRecord {
    /// Index `j` of the iteration producing `y_{j+1}`.
    pub j: u64,
    pub l: f64,
    pub trials: usize,
    pub a: f64,
    pub a_prev: f64,
    pub a_next: f64,
    pub xi: f64,
    pub xi_next: f64,
    pub x_prev: Vec<f64>,
    pub y_prev: Vec<f64>,
    pub x_tilde: Vec<f64>,
    pub x_next: Vec<f64>,
    pub y_next: Vec<f64>,
    pub u_tilde: Vec<f64>,
    pub q_next: QuadraticModel,
    pub big_q_next: QuadraticModel,
    pub psi_y_prev: f64,
    pub psi_y_next: f64,
    pub convexity_ok: bool,
    pub terminated: bool,
}

/// Oracle access with evaluation accounting and a one-entry gradient cache.
pub struct Evaluator<'a> {
    psi_s: &'a dyn SmoothOracle,
    psi_n: &'a dyn ProxOracle,
    pub record: RunRecord,
    cache: Option<(Vec<f64>, f64, Vec<f64>)>,
}

impl<'a> Evaluator<'a> {
    pub fn new(psi_s: &'a dyn SmoothOracle, psi_n: &'a dyn ProxOracle) -> Self {
        Self {
            psi_s,
            psi_n,
            record: RunRecord::default(),
            cache: None,
        }
    }

    fn smooth(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        self.record.func_evals += 1;
        self.record.grad_evals += 1;
        (self.psi_s.value(x), self.psi_s.gradient(x))
    }

    /// Like [`Self::smooth`] but reuses the last result when `x` repeats.
    fn smooth_cached(&mut self, x: &[f64]) -> (f64, Vec<f64>) {
        if let Some((cx, v, g)) = &self.cache {
            if cx.as_slice() == x {
                return (*v, g.clone());
            }
        }
        let (v, g) = self.smooth(x);
        self.cache = Some((x.to_vec(), v, g.clone()));
        (v, g)
    }

    fn prox(&mut self, lambda: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.record.prox_evals += 1;
        self.psi_n.prox(lambda, x)
    }

    fn nonsmooth(&self, x: &[f64]) -> Result<f64> {
        self.psi_n.value(x).finite().ok_or(Error::OutsideDomain)
    }

    fn psi(&mut self, x: &[f64]) -> Result<f64> {
        self.record.func_evals += 1;
        Ok(self.psi_s.value(x) + self.nonsmooth(x)?)
    }
}

/// Positive root of `L·a² − ξ·a − ξ·A = 0`.
pub fn acg_step_size(xi: f64, a_sum: f64, l: f64) -> f64 {
    debug_assert!(xi >= 1.0 && a_sum >= 0.0 && l > 0.0);
    // both terms of the numerator are nonnegative, so no cancellation
    (xi + (xi * xi + 4.0 * l * xi * a_sum).sqrt()) / (2.0 * l)
}

/// Builds the μ-ACG step and auxiliary quantities at curvature estimate `l`.
pub fn acg_candidate(
    state: &AcgState,
    l: f64,
    mu: f64,
    eval: &mut Evaluator<'_>,
) -> Result<Candidate> {
    let xi = state.xi(mu);
    let a = acg_step_size(xi, state.a_sum, l);
    let a_next = state.a_sum + a;
    let xi_next = 1.0 + mu * a_next;

    let (wy, wx) = (state.a_sum / a_next, a / a_next);
    let x_tilde: Vec<f64> = state
        .y
        .iter()
        .zip(&state.x)
        .map(|(y, x)| wy * y + wx * x)
        .collect();

    let (psi_s_x_tilde, grad_x_tilde) = eval.smooth_cached(&x_tilde);
    let lm = l + mu;
    let forward: Vec<f64> = x_tilde
        .iter()
        .zip(&grad_x_tilde)
        .map(|(x, g)| x - g / lm)
        .collect();
    let y_next = eval.prox(1.0 / lm, &forward)?;
    ensure_finite("y_next", &y_next)?;
    let psi_n_y_next = eval.nonsmooth(&y_next)?;

    let step = a / (1.0 + a_next * mu);
    let x_next: Vec<f64> = (0..y_next.len())
        .map(|i| {
            let x = state.x[i];
            x + step * (l * (y_next[i] - x_tilde[i]) + mu * (y_next[i] - x))
        })
        .collect();

    let (psi_s_y_next, grad_y_next) = eval.smooth(&y_next);
    let u_tilde: Vec<f64> = (0..y_next.len())
        .map(|i| grad_y_next[i] - grad_x_tilde[i] + lm * (x_tilde[i] - y_next[i]))
        .collect();

    let disp: Vec<f64> = y_next.iter().zip(&x_tilde).map(|(y, x)| y - x).collect();
    let lin_y_next = psi_s_x_tilde + dot(&grad_x_tilde, &disp);
    let q_tilde_at_y_next = lin_y_next + psi_n_y_next + 0.5 * mu * norm_sq(&disp);

    // q^L(·) = q̃(y) + L⟨x̃ − y, · − y⟩ + (μ/2)‖· − y‖²
    let slope: Vec<f64> = disp.iter().map(|d| -l * d).collect();
    let q_next = QuadraticModel::around(&y_next, q_tilde_at_y_next, &slope, mu);

    Ok(Candidate {
        l,
        a,
        a_next,
        xi,
        xi_next,
        x_tilde,
        y_next,
        x_next,
        u_tilde,
        q_next,
        q_tilde_at_y_next,
        psi_s_x_tilde,
        psi_s_y_next,
        lin_y_next,
        psi_y_next: psi_s_y_next + psi_n_y_next,
    })
}

/// Descent inequality at `L` plus the estimate-sequence inequality.
pub fn acg_curvature_check(
    cand: &Candidate,
    state: &AcgState,
    mu: f64,
    slack: Slack,
) -> Result<bool> {
    let d_sq = dist_sq(&cand.y_next, &cand.x_tilde);
    let lhs1 = cand.psi_s_y_next - cand.lin_y_next;
    let rhs1 = 0.5 * cand.l * d_sq;
    let mag1 = cand.psi_s_y_next.abs().max(cand.psi_s_x_tilde.abs());
    if !slack.holds_scaled(lhs1, rhs1, mag1) {
        return Ok(false);
    }

    let q_at_y = cand.q_next.eval(&state.y)?;
    let lhs2 = 0.5 * mu * cand.a_next * d_sq + 0.5 * cand.xi_next * dist_sq(&state.y, &cand.x_next);
    let rhs2 =
        cand.a_next * (q_at_y - cand.psi_y_next) + 0.5 * cand.xi * dist_sq(&state.y, &state.x);
    let mag2 = cand.a_next * cand.q_next.eval_magnitude(&state.y).max(cand.psi_y_next.abs());
    Ok(slack.holds_scaled(lhs2, rhs2, mag2))
}

/// Local convexity inequalities; `big_q_next` is `Q^L_{j+1}`.
pub fn acg_convexity_check(
    cand: &Candidate,
    state: &AcgState,
    big_q_next: &QuadraticModel,
    slack: Slack,
) -> Result<bool> {
    let checks = [
        (&cand.q_next, &state.y, state.psi_y),
        (big_q_next, &state.y, state.psi_y),
        (big_q_next, &cand.y_next, cand.psi_y_next),
    ];
    for (model, at, psi) in checks {
        if !slack.holds_scaled(model.eval(at)?, psi, model.eval_magnitude(at)) {
            return Ok(false);
        }
    }
    let diff: Vec<f64> = state
        .y0
        .iter()
        .zip(&cand.y_next)
        .map(|(a, b)| a - b)
        .collect();
    let rhs = cand.psi_y_next + dot(&cand.u_tilde, &diff);
    Ok(slack.holds_scaled(rhs, state.psi_y0, cand.psi_y_next.abs()))
}

/// Relative termination inequalities.
pub fn acg_termination_check(
    cand: &Candidate,
    y0: &[f64],
    psi_y0: f64,
    theta: f64,
    sigma: f64,
    slack: Slack,
) -> bool {
    let disp_sq = dist_sq(&cand.y_next, y0);
    let lhs1: f64 = (0..y0.len())
        .map(|i| (cand.u_tilde[i] + y0[i] - cand.y_next[i]).powi(2))
        .sum();
    let rhs1 = theta * (psi_y0 - cand.psi_y_next + 0.5 * disp_sq);
    let mag1 = theta * psi_y0.abs().max(cand.psi_y_next.abs());
    if !slack.holds_scaled(lhs1, rhs1, mag1) {
        return false;
    }
    slack.holds_ratio(norm_sq(&cand.u_tilde), sigma * sigma * disp_sq)
}

/// Tries `L = L_j·βˢ` for `s = 0, 1, …` until the curvature check passes.
/// Returns the accepted candidate and the number of trials.
pub fn acg_line_search(
    state: &AcgState,
    params: &AcgParams,
    eval: &mut Evaluator<'_>,
) -> Result<(Candidate, usize)> {
    let mut l = state.l;
    for trial in 1..=LINE_SEARCH_CAP + 1 {
        let cand = acg_candidate(state, l, params.mu, eval)?;
        if acg_curvature_check(&cand, state, params.mu, params.descent_slack)? {
            return Ok((cand, trial));
        }
        l *= params.beta;
    }
    Err(Error::LineSearchExhausted {
        trials: LINE_SEARCH_CAP,
        last: l,
    })
}

/// Initial state at `y₀` with `(x₀, A₀) = (y₀, 0)` and `Q₀ = 0`.
pub fn acg_init(y0: &[f64], params: &AcgParams, eval: &mut Evaluator<'_>) -> Result<AcgState> {
    params.validate()?;
    check_dim(eval.psi_s.dim(), y0.len())?;
    ensure_finite("y0", y0)?;
    let psi_y0 = eval.psi(y0)?;
    Ok(AcgState {
        x: y0.to_vec(),
        y: y0.to_vec(),
        a_sum: 0.0,
        model: QuadraticModel::zero(y0.len(), params.mu),
        l: params.l0,
        j: 0,
        y0: y0.to_vec(),
        psi_y: psi_y0,
        psi_y0,
    })
}

/// Runs CF.ACG from `y0`.
pub fn acg_run(
    psi_s: &dyn SmoothOracle,
    psi_n: &dyn ProxOracle,
    y0: &[f64],
    params: &AcgParams,
) -> Result<(AcgOutcome, RunRecord)> {
    acg_run_with(psi_s, psi_n, y0, params, None, None)
}

/// [`acg_run`] with an optional deadline and per-iteration trace sink.
pub fn acg_run_with(
    psi_s: &dyn SmoothOracle,
    psi_n: &dyn ProxOracle,
    y0: &[f64],
    params: &AcgParams,
    deadline: Option<Instant>,
    trace: Option<&mut Vec<AcgIterRecord>>,
) -> Result<(AcgOutcome, RunRecord)> {
    let mut eval = Evaluator::new(psi_s, psi_n);
    let state = acg_init(y0, params, &mut eval)?;
    let outcome = run_from(state, params, &mut eval, deadline, trace)?;
    Ok((outcome, eval.record))
}

fn run_from(
    mut state: AcgState,
    params: &AcgParams,
    eval: &mut Evaluator<'_>,
    deadline: Option<Instant>,
    mut trace: Option<&mut Vec<AcgIterRecord>>,
) -> Result<AcgOutcome> {
    let mut last_u = vec![0.0; state.y.len()];
    let stop = |state: &AcgState, u: Vec<f64>, status| AcgOutcome {
        y_out: state.y.clone(),
        u_out: u,
        l_out: state.l,
        status,
        iterations: state.j,
        a_sum: state.a_sum,
    };
    loop {
        if state.j >= params.max_iters {
            return Ok(stop(&state, last_u, AcgStatus::IterLimit));
        }
        if deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(stop(&state, last_u, AcgStatus::TimeLimit));
        }

        let (cand, trials) = acg_line_search(&state, params, eval)?;
        let big_q_next = QuadraticModel::combine(&state.model, &cand.q_next, state.a_sum, cand.a)?;
        let convex_ok = acg_convexity_check(&cand, &state, &big_q_next, params.slack)?;
        let done = convex_ok
            && acg_termination_check(
                &cand,
                &state.y0,
                state.psi_y0,
                params.theta,
                params.sigma,
                params.slack,
            );
        eval.record.inner_iters += 1;

        if let Some(trace) = trace.as_deref_mut() {
            trace.push(AcgIterRecord {
                j: state.j,
                l: cand.l,
                trials,
                a: cand.a,
                a_prev: state.a_sum,
                a_next: cand.a_next,
                xi: cand.xi,
                xi_next: cand.xi_next,
                x_prev: state.x.clone(),
                y_prev: state.y.clone(),
                x_tilde: cand.x_tilde.clone(),
                x_next: cand.x_next.clone(),
                y_next: cand.y_next.clone(),
                u_tilde: cand.u_tilde.clone(),
                q_next: cand.q_next.clone(),
                big_q_next: big_q_next.clone(),
                psi_y_prev: state.psi_y,
                psi_y_next: cand.psi_y_next,
                convexity_ok: convex_ok,
                terminated: done,
            });
        }

        let status = if !convex_ok {
            Some(AcgStatus::Failure)
        } else if done {
            Some(AcgStatus::Success)
        } else if cand.a_next
            >= acg_success_threshold(cand.l, params.mu, params.sigma, params.theta)
        {
            Some(AcgStatus::Stalled)
        } else {
            None
        };

        state.j += 1;
        state.l = cand.l;
        state.a_sum = cand.a_next;
        state.model = big_q_next;
        state.psi_y = cand.psi_y_next;
        state.x = cand.x_next;
        state.y = cand.y_next;
        last_u = cand.u_tilde;

        if let Some(status) = status {
            return Ok(stop(&state, last_u, status));
        }
    }
}

/// `⌈1 + 2√(2L̄/μ)·log₁⁺(L̄·𝒜)⌉`, the iteration bound for strongly convex `ψˢ`.
pub fn acg_iteration_bound(l_bar: f64, mu: f64, sigma: f64, theta: f64) -> f64 {
    let a = acg_success_threshold(l_bar, mu, sigma, theta);
    (1.0 + 2.0 * (2.0 * l_bar / mu).sqrt() * log1_plus(l_bar * a)).ceil()
}

/// `𝒜_{μ,L̄}(σ, θ) = (4L̄/μ)[1/μ + 36L̄·max{1/σ², 4θ/(θ−2)}]`; past it both
/// termination inequalities hold, which needs each of the two terms.
pub fn acg_success_threshold(l_bar: f64, mu: f64, sigma: f64, theta: f64) -> f64 {
    let m = (1.0 / (sigma * sigma)).max(4.0 * theta / (theta - 2.0));
    4.0 * l_bar / mu * (1.0 / mu + 36.0 * l_bar * m)
}

/// `max{log t, 1}`
pub fn log1_plus(t: f64) -> f64 {
    t.ln().max(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::prox::{BoxIndicator, ZeroFunction};

    /// `c/2·‖x − center‖²`
    struct ScaledSq {
        c: f64,
        center: Vec<f64>,
    }

    impl SmoothOracle for ScaledSq {
        fn dim(&self) -> usize {
            self.center.len()
        }
        fn value(&self, x: &[f64]) -> f64 {
            0.5 * self.c * dist_sq(x, &self.center)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.iter()
                .zip(&self.center)
                .map(|(a, b)| self.c * (a - b))
                .collect()
        }
    }

    fn sq(c: f64, n: usize) -> ScaledSq {
        ScaledSq {
            c,
            center: vec![0.0; n],
        }
    }

    fn params(mu: f64, l0: f64) -> AcgParams {
        AcgParams::new(mu, l0, 0.25, 4.0, 2.0)
    }

    #[test]
    fn success_threshold_value() {
        // (4/μ)(1/μ + 36·max{16, 8}) at L̄ = 1, μ = ½
        assert_eq!(acg_success_threshold(1.0, 0.5, 0.25, 4.0), 8.0 * (2.0 + 36.0 * 16.0));
        // the θ term dominates for a loose σ
        assert_eq!(acg_success_threshold(1.0, 0.5, 1.0, 3.0), 8.0 * (2.0 + 36.0 * 12.0));
    }

    #[test]
    fn step_size_examples() {
        assert_eq!(acg_step_size(1.0, 0.0, 1.0), 1.0);
        let golden = (1.0 + 5f64.sqrt()) / 2.0;
        assert!((acg_step_size(1.0, 1.0, 1.0) - golden).abs() < 1e-12);
    }

    #[test]
    fn hand_trace_first_iteration() {
        let f = sq(1.0, 1);
        let mut eval = Evaluator::new(&f, &ZeroFunction);
        let p = params(1.0, 1.0);
        let state = acg_init(&[1.0], &p, &mut eval).unwrap();
        let c = acg_candidate(&state, 1.0, 1.0, &mut eval).unwrap();
        assert_eq!(c.xi, 1.0);
        assert_eq!(c.a, 1.0);
        assert_eq!(c.a_next, 1.0);
        assert_eq!(c.x_tilde, vec![1.0]);
        assert_eq!(c.y_next, vec![0.5]);
        assert_eq!(c.x_next, vec![0.5]);
        assert_eq!(c.u_tilde, vec![0.5]);
        // q^L(y_next) = q̃(y_next)
        assert!((c.q_next.eval(&c.y_next).unwrap() - c.q_tilde_at_y_next).abs() < 1e-15);
        // x_next agrees with the regularized argmin of q^L around x_j
        let x = c.q_next.argmin_regularized(c.a / c.xi, &state.x).unwrap();
        assert!((x[0] - c.x_next[0]).abs() < 1e-10);

        assert!(acg_curvature_check(&c, &state, 1.0, Slack::default()).unwrap());
        let big_q = QuadraticModel::combine(&state.model, &c.q_next, 0.0, c.a).unwrap();
        assert!(acg_convexity_check(&c, &state, &big_q, Slack::default()).unwrap());
    }

    #[test]
    fn curvature_check_rejects_small_l() {
        let f = sq(10.0, 2);
        let mut eval = Evaluator::new(&f, &ZeroFunction);
        let p = params(0.5, 1.0);
        let state = acg_init(&[1.0, -2.0], &p, &mut eval).unwrap();
        let c = acg_candidate(&state, 1.0, 0.5, &mut eval).unwrap();
        let d_sq = dist_sq(&c.y_next, &c.x_tilde);
        assert!(c.psi_s_y_next - c.lin_y_next > 0.5 * c.l * d_sq);
        assert!(!acg_curvature_check(&c, &state, 0.5, Slack::default()).unwrap());
    }

    #[test]
    fn line_search_stops_between_l_star_and_beta_l_star() {
        let f = sq(4.0, 3);
        let mut eval = Evaluator::new(&f, &ZeroFunction);
        let p = params(0.5, 1.0);
        let state = acg_init(&[1.0, 2.0, -1.0], &p, &mut eval).unwrap();
        let (c, trials) = acg_line_search(&state, &p, &mut eval).unwrap();
        assert!(c.l == 4.0 || c.l == 8.0, "L = {}", c.l);
        assert!(trials <= 4);
    }

    #[test]
    fn line_search_keeps_l_when_already_large() {
        let f = sq(4.0, 3);
        let mut eval = Evaluator::new(&f, &ZeroFunction);
        let p = params(0.5, 5.0);
        let state = acg_init(&[1.0, 2.0, -1.0], &p, &mut eval).unwrap();
        let (c, trials) = acg_line_search(&state, &p, &mut eval).unwrap();
        assert_eq!((c.l, trials), (5.0, 1));
    }

    #[test]
    fn starting_at_minimizer_succeeds_immediately() {
        let f = ScaledSq {
            c: 1.0,
            center: vec![0.3, -0.7],
        };
        let (out, rec) = acg_run(&f, &ZeroFunction, &[0.3, -0.7], &params(0.5, 1.0)).unwrap();
        assert_eq!(out.status, AcgStatus::Success);
        assert_eq!(out.iterations, 1);
        assert_eq!(out.u_out, vec![0.0, 0.0]);
        assert_eq!(out.y_out, vec![0.3, -0.7]);
        assert_eq!(rec.prox_evals, 1);
    }

    #[test]
    fn termination_trivial_and_sigma_cases() {
        let f = sq(1.0, 1);
        let mut eval = Evaluator::new(&f, &ZeroFunction);
        let state = acg_init(&[0.0], &params(1.0, 1.0), &mut eval).unwrap();
        let mut c = acg_candidate(&state, 1.0, 1.0, &mut eval).unwrap();
        assert!(acg_termination_check(
            &c,
            &[0.0],
            0.0,
            4.0,
            0.25,
            Slack::default()
        ));
        c.y_next = vec![1e-3];
        c.u_tilde = vec![1e3];
        assert!(!acg_termination_check(
            &c,
            &[0.0],
            0.0,
            4.0,
            0.25,
            Slack::default()
        ));
    }

    #[test]
    fn negative_curvature_is_detected() {
        // ψˢ = −‖x‖² is not 1/2-strongly convex
        let f = sq(-2.0, 2);
        let (out, _) = acg_run(&f, &ZeroFunction, &[1.0, 0.5], &params(0.5, 1.0)).unwrap();
        assert_eq!(out.status, AcgStatus::Failure);
    }

    #[test]
    fn prox_form_matches_direct_box_argmin() {
        // argmin ℓ(y; x̃) + box(y) + (L+μ)/2‖y − x̃‖² is separable: each
        // coordinate minimizes a 1-d convex quadratic over [-1, 1]
        let f = ScaledSq {
            c: 3.0,
            center: vec![2.0, -3.0, 0.2],
        };
        let bx = BoxIndicator::symmetric(1.0);
        let mut eval = Evaluator::new(&f, &bx);
        let p = params(0.5, 1.0);
        let state = acg_init(&[0.0, 0.0, 0.0], &p, &mut eval).unwrap();
        let c = acg_candidate(&state, 2.0, 0.5, &mut eval).unwrap();
        let g = f.gradient(&c.x_tilde);
        for i in 0..3 {
            // minimize g·t + (L+μ)/2 (t − x̃)² on [-1, 1] by bisection on the derivative
            let deriv = |t: f64| g[i] + 2.5 * (t - c.x_tilde[i]);
            let (mut lo, mut hi) = (-1.0f64, 1.0f64);
            if deriv(lo) >= 0.0 {
                hi = lo;
            } else if deriv(hi) <= 0.0 {
                lo = hi;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if deriv(mid) > 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let t = 0.5 * (lo + hi);
            assert!((t - c.y_next[i]).abs() <= 1e-10 * (1.0 + t.abs()));
        }
    }

    #[test]
    fn initial_model_is_irrelevant() {
        let f = ScaledSq {
            c: 3.0,
            center: vec![1.0, -1.0],
        };
        let p = params(0.5, 1.0);
        let run = |model: QuadraticModel| {
            let mut eval = Evaluator::new(&f, &ZeroFunction);
            let mut state = acg_init(&[0.0, 0.0], &p, &mut eval).unwrap();
            state.model = model;
            run_from(state, &p, &mut eval, None, None).unwrap()
        };
        let a = run(QuadraticModel::zero(2, 0.5));
        let b = run(QuadraticModel::new(1e3, vec![-7.0, 42.0], 0.5));
        assert_eq!(a.y_out, b.y_out);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn invalid_params_are_rejected() {
        let f = sq(1.0, 1);
        for p in [
            params(0.5, 0.25),
            AcgParams::new(0.5, 1.0, 0.25, 2.0, 2.0),
            AcgParams::new(0.5, 1.0, 0.25, 4.0, 1.0),
            AcgParams::new(0.0, 1.0, 0.25, 4.0, 2.0),
        ] {
            assert!(acg_run(&f, &ZeroFunction, &[0.0], &p).is_err());
        }
        assert!(acg_run(&f, &ZeroFunction, &[0.0, 1.0], &params(0.5, 1.0)).is_err());
    }

    #[test]
    fn infeasible_start_is_an_error() {
        let f = sq(1.0, 1);
        let bx = BoxIndicator::symmetric(1.0);
        assert!(matches!(
            acg_run(&f, &bx, &[3.0], &params(0.5, 1.0)),
            Err(Error::OutsideDomain)
        ));
    }
}
