//! Outer-iteration traces, their JSON-lines serialization, and the
//! descent-invariant verifier.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{RunRecord, Slack};
use crate::problems::ProblemSpec;
use crate::vecops::{dist_sq, norm_sq};

pub const TRACE_FORMAT: &str = "cfapd-trace-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverKind {
    /// CF.APD with `m₀ = ρ`.
    Apd,
    /// CF.APD with `m₀ = ρ²`.
    ApdRho2,
    Pgd,
}

impl SolverKind {
    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Apd => "apd",
            SolverKind::ApdRho2 => "apd_rho2",
            SolverKind::Pgd => "pgd",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "apd" => Some(SolverKind::Apd),
            "apd_rho2" => Some(SolverKind::ApdRho2),
            "pgd" => Some(SolverKind::Pgd),
            _ => None,
        }
    }

    pub fn is_apd(self) -> bool {
        matches!(self, SolverKind::Apd | SolverKind::ApdRho2)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceHeader {
    pub format: String,
    pub solver: SolverKind,
    pub problem: Option<ProblemSpec>,
    pub theta: f64,
    pub rho: f64,
    pub z0: Vec<f64>,
    pub phi0: f64,
    pub phi_star: Option<f64>,
}

/// One accepted outer iteration `k → k+1`.
///
/// `v = u + 2m(z_k − z_{k+1})` with `m` the accepted curvature estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OuterTraceEntry {
    pub k: u64,
    pub m: f64,
    #[serde(rename = "M")]
    pub big_m: f64,
    pub l: f64,
    /// Iterations of the accepted inner call.
    pub inner_iters: u64,
    /// Iterations of all inner calls this outer iteration, failed ones included.
    pub inner_iters_total: u64,
    pub inner_calls: u64,
    pub phi: f64,
    pub residual: f64,
    pub z: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub record: RunRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceLine {
    Header(TraceHeader),
    Outer(OuterTraceEntry),
    Summary(TraceSummary),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub header: TraceHeader,
    pub entries: Vec<OuterTraceEntry>,
    pub summary: Option<TraceSummary>,
}

impl SolveTrace {
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let mut line = |l: &TraceLine| -> Result<()> {
            serde_json::to_writer(&mut w, l)?;
            w.write_all(b"\n")?;
            Ok(())
        };
        line(&TraceLine::Header(self.header.clone()))?;
        for e in &self.entries {
            line(&TraceLine::Outer(e.clone()))?;
        }
        if let Some(s) = &self.summary {
            line(&TraceLine::Summary(s.clone()))?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut header = None;
        let mut entries = Vec::new();
        let mut summary = None;
        for (i, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<TraceLine>(&line)? {
                TraceLine::Header(h) if i == 0 => header = Some(h),
                TraceLine::Header(_) => {
                    return Err(Error::Trace(format!("line {}: repeated header", i + 1)))
                }
                TraceLine::Outer(_) | TraceLine::Summary(_) if header.is_none() => {
                    return Err(Error::Trace("first line must be the header".into()))
                }
                TraceLine::Outer(e) => entries.push(e),
                TraceLine::Summary(s) => summary = Some(s),
            }
        }
        let header = header.ok_or_else(|| Error::Trace("empty trace".into()))?;
        if header.format != TRACE_FORMAT {
            return Err(Error::Trace(format!(
                "unsupported trace format `{}` (expected `{TRACE_FORMAT}`)",
                header.format
            )));
        }
        Ok(Self {
            header,
            entries,
            summary,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DescentCheck {
    /// `‖u + 2m(z_k − z_{k+1})‖² ≤ 2θm[φ(z_k) − φ(z_{k+1})]`
    ResidualDecrease,
    /// `‖u‖² ≤ m²‖z_k − z_{k+1}‖²`
    ResidualRatio,
    /// `φ(z_{k+1}) ≤ φ(z_k)`
    Monotone,
    /// `min_{i≤k} ‖v_i‖² ≤ 2θ[φ(z₀) − φ*] / Σ_{i≤k} 1/m_i`
    Aggregate,
    /// Recorded `v` disagrees with `u + 2m(z_k − z_{k+1})`.
    Consistency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub k: u64,
    pub check: DescentCheck,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DescentReport {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl DescentReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Recomputes the descent-scheme inequalities along a trace.
///
/// The residual inequalities apply to CF.APD traces only; gradient
/// traces are checked for monotonicity and consistency.
pub fn verify_descent_invariants(trace: &SolveTrace, slack: Slack) -> DescentReport {
    let h = &trace.header;
    let apd = h.solver.is_apd();
    let mut report = DescentReport::default();
    let mut flag = |k, check, lhs, rhs| report.violations.push(Violation { k, check, lhs, rhs });

    let mut z_prev: &[f64] = &h.z0;
    let mut phi_prev = h.phi0;
    let mut min_v_sq = f64::INFINITY;
    let mut inv_m_sum = 0.0;
    let mut checked = 0;
    for e in &trace.entries {
        checked += 1;
        let two_m = 2.0 * e.m;
        let v_re: Vec<f64> = (0..e.z.len())
            .map(|i| e.u[i] + two_m * (z_prev[i] - e.z[i]))
            .collect();
        let v_sq = norm_sq(&v_re);
        let mismatch = dist_sq(&v_re, &e.v);
        let mag = norm_sq(&e.u).max(two_m * two_m * dist_sq(z_prev, &e.z));
        if !slack.holds_scaled(mismatch, 0.0, mag) {
            flag(e.k, DescentCheck::Consistency, mismatch, 0.0);
        }
        let phi_mag = phi_prev.abs().max(e.phi.abs());
        if !slack.holds_scaled(e.phi, phi_prev, phi_mag) {
            flag(e.k, DescentCheck::Monotone, e.phi, phi_prev);
        }
        if apd {
            let rhs = h.theta * two_m * (phi_prev - e.phi);
            if !slack.holds_scaled(v_sq, rhs, h.theta * two_m * phi_mag) {
                flag(e.k, DescentCheck::ResidualDecrease, v_sq, rhs);
            }
            let lhs = norm_sq(&e.u);
            let rhs = e.m * e.m * dist_sq(z_prev, &e.z);
            if !slack.holds_ratio(lhs, rhs) {
                flag(e.k, DescentCheck::ResidualRatio, lhs, rhs);
            }
            if let Some(phi_star) = h.phi_star {
                min_v_sq = min_v_sq.min(v_sq);
                inv_m_sum += 1.0 / e.m;
                let rhs = 2.0 * h.theta * (h.phi0 - phi_star) / inv_m_sum;
                let mag = 2.0 * h.theta * h.phi0.abs().max(phi_star.abs()) / inv_m_sum;
                if !slack.holds_scaled(min_v_sq, rhs, mag) {
                    flag(e.k, DescentCheck::Aggregate, min_v_sq, rhs);
                }
            }
        }
        z_prev = &e.z;
        phi_prev = e.phi;
    }
    report.checked = checked;
    report
}
