//! Problem abstraction, the Θ(n) quadratic model algebra, and stationarity
//! verification shared by every solver.

use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::vecops::{all_finite, dot, norm, norm_sq};

/// Value of an extended-real-valued convex function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtValue {
    Finite(f64),
    PlusInfinity,
}

impl ExtValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            ExtValue::Finite(v) => Some(v),
            ExtValue::PlusInfinity => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn scale(self, factor: f64) -> ExtValue {
        debug_assert!(factor > 0.0);
        match self {
            ExtValue::Finite(v) => ExtValue::Finite(v * factor),
            inf => inf,
        }
    }
}

impl Add<f64> for ExtValue {
    type Output = ExtValue;

    fn add(self, rhs: f64) -> ExtValue {
        match self {
            ExtValue::Finite(v) => ExtValue::Finite(v + rhs),
            inf => inf,
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(v) => write!(f, "{v}"),
            ExtValue::PlusInfinity => write!(f, "+inf"),
        }
    }
}

/// Differentiable part `f` of a composite objective.
///
/// Implementations must be callable concurrently from several solves.
pub trait SmoothOracle: Send + Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Lipschitz constant of the gradient, when known.
    fn lipschitz_hint(&self) -> Option<f64> {
        None
    }
}

/// Proper closed convex part `h`, accessed through its value and its
/// proximal map `(λ, x) ↦ argmin_u { λ·h(u) + ½‖u − x‖² }`.
pub trait ProxOracle: Send + Sync {
    fn value(&self, x: &[f64]) -> ExtValue;

    fn prox(&self, lambda: f64, x: &[f64]) -> Result<Vec<f64>>;
}

/// Known curvature and optimality data of a generated problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemMeta {
    /// Smallest `m` with `f − ℓ_f ≥ −(m/2)‖·‖²`.
    pub curv_lower: f64,
    /// Smallest `M` with `f − ℓ_f ≤ (M/2)‖·‖²`.
    pub curv_upper: f64,
    pub phi_star: Option<f64>,
    pub d0: Option<f64>,
}

/// `φ = f + h` on ℝⁿ.
#[derive(Clone)]
pub struct CompositeProblem {
    pub f: Arc<dyn SmoothOracle>,
    pub h: Arc<dyn ProxOracle>,
    dim: usize,
    pub meta: Option<ProblemMeta>,
}

impl fmt::Debug for CompositeProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompositeProblem")
            .field("dim", &self.dim)
            .field("meta", &self.meta)
            .finish_non_exhaustive()
    }
}

impl CompositeProblem {
    pub fn new(
        f: Arc<dyn SmoothOracle>,
        h: Arc<dyn ProxOracle>,
        meta: Option<ProblemMeta>,
    ) -> Result<Self> {
        let dim = f.dim();
        if dim == 0 {
            return Err(Error::InvalidParameter {
                name: "dim",
                reason: "ambient dimension must be positive".into(),
            });
        }
        if let Some(meta) = &meta {
            if !(meta.curv_lower >= 0.0 && meta.curv_lower <= meta.curv_upper) {
                return Err(Error::InvalidParameter {
                    name: "meta",
                    reason: format!(
                        "need 0 <= m* <= M*, got m* = {}, M* = {}",
                        meta.curv_lower, meta.curv_upper
                    ),
                });
            }
        }
        Ok(Self { f, h, dim, meta })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `φ(x) = f(x) + h(x)`.
    pub fn objective(&self, x: &[f64]) -> Result<ExtValue> {
        check_dim(self.dim, x.len())?;
        Ok(self.h.value(x) + self.f.value(x))
    }
}

/// `a + ⟨b, x⟩ + (μ/2)‖x‖²`, stored in Θ(n) space.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticModel {
    pub constant: f64,
    pub linear: Vec<f64>,
    pub curvature: f64,
    /// Size of the terms cancelled into `constant`, used to scale
    /// comparisons against model values.
    pub magnitude: f64,
}

impl QuadraticModel {
    pub fn new(constant: f64, linear: Vec<f64>, curvature: f64) -> Self {
        Self {
            constant,
            linear,
            curvature,
            magnitude: constant.abs(),
        }
    }

    pub fn zero(dim: usize, curvature: f64) -> Self {
        Self::new(0.0, vec![0.0; dim], curvature)
    }

    /// Expands `value + ⟨slope, x − center⟩ + (μ/2)‖x − center‖²` into
    /// origin-based coefficients.
    pub fn around(center: &[f64], value: f64, slope: &[f64], curvature: f64) -> Self {
        debug_assert_eq!(center.len(), slope.len());
        let (lin, quad) = (dot(slope, center), 0.5 * curvature * norm_sq(center));
        let linear = slope
            .iter()
            .zip(center)
            .map(|(g, c)| g - curvature * c)
            .collect();
        Self {
            constant: value - lin + quad,
            linear,
            curvature,
            magnitude: value.abs() + lin.abs() + quad,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self.constant + dot(&self.linear, x) + 0.5 * self.curvature * norm_sq(x))
    }

    /// Bound on the size of the terms summed by [`QuadraticModel::eval`].
    pub fn eval_magnitude(&self, x: &[f64]) -> f64 {
        let lin: f64 = self.linear.iter().zip(x).map(|(b, x)| (b * x).abs()).sum();
        self.magnitude + lin + 0.5 * self.curvature.abs() * norm_sq(x)
    }

    /// `(w_prev·prev + w_new·new) / (w_prev + w_new)`, coefficient-wise.
    pub fn combine(prev: &Self, new: &Self, w_prev: f64, w_new: f64) -> Result<Self> {
        check_dim(prev.dim(), new.dim())?;
        if prev.curvature != new.curvature {
            return Err(Error::CurvatureMismatch {
                left: prev.curvature,
                right: new.curvature,
            });
        }
        let total = w_prev + w_new;
        if !(w_prev >= 0.0 && w_new > 0.0 && total > 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: format!("need w_prev >= 0 and w_new > 0, got ({w_prev}, {w_new})"),
            });
        }
        let (cp, cn) = (w_prev / total, w_new / total);
        Ok(Self {
            constant: cp * prev.constant + cn * new.constant,
            linear: prev
                .linear
                .iter()
                .zip(&new.linear)
                .map(|(p, n)| cp * p + cn * n)
                .collect(),
            curvature: prev.curvature,
            magnitude: cp * prev.magnitude + cn * new.magnitude,
        })
    }

    /// Unique minimizer of `weight·model(·) + ½‖· − anchor‖²`.
    pub fn argmin_regularized(&self, weight: f64, anchor: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), anchor.len())?;
        if !(weight > 0.0) {
            return Err(Error::InvalidParameter {
                name: "weight",
                reason: format!("must be positive, got {weight}"),
            });
        }
        let denom = 1.0 + weight * self.curvature;
        Ok(anchor
            .iter()
            .zip(&self.linear)
            .map(|(a, b)| (a - weight * b) / denom)
            .collect())
    }
}

pub fn quad_eval(model: &QuadraticModel, x: &[f64]) -> Result<f64> {
    model.eval(x)
}

pub fn quad_combine(
    prev: &QuadraticModel,
    new: &QuadraticModel,
    a_prev: f64,
    a_new: f64,
) -> Result<QuadraticModel> {
    QuadraticModel::combine(prev, new, a_prev, a_new)
}

pub fn quad_argmin_regularized(
    model: &QuadraticModel,
    weight: f64,
    anchor: &[f64],
) -> Result<Vec<f64>> {
    model.argmin_regularized(weight, anchor)
}

/// Additive slack for inequality checks:
/// `lhs ≤ rhs + abs + rel·max(|lhs|, |rhs|, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Slack {
    pub abs: f64,
    pub rel: f64,
}

impl Default for Slack {
    fn default() -> Self {
        Self {
            abs: 0.0,
            rel: 1e-10,
        }
    }
}

impl Slack {
    pub const EXACT: Slack = Slack { abs: 0.0, rel: 0.0 };

    pub fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    #[inline]
    pub fn holds(&self, lhs: f64, rhs: f64) -> bool {
        self.holds_scaled(lhs, rhs, 0.0)
    }

    /// Like [`Slack::holds`], with `magnitude` (the size of the operands
    /// that were subtracted to form `lhs` or `rhs`) joining the scale, so
    /// cancellation in those differences is absorbed.
    #[inline]
    pub fn holds_scaled(&self, lhs: f64, rhs: f64, magnitude: f64) -> bool {
        let scale = lhs.abs().max(rhs.abs()).max(magnitude).max(1.0);
        lhs <= rhs + self.abs + self.rel * scale
    }

    /// `lhs ≤ rhs·(1 + rel) + abs`, without the unit floor on the scale.
    /// For nonnegative quantities computed without cancellation, such as
    /// squared norms, where the floor would swamp small values.
    #[inline]
    pub fn holds_ratio(&self, lhs: f64, rhs: f64) -> bool {
        lhs <= rhs + self.abs + self.rel * rhs.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Solved,
    IterLimit,
    TimeLimit,
    Failed,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Status::Solved => "solved",
            Status::IterLimit => "iter_limit",
            Status::TimeLimit => "time_limit",
            Status::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// Per-solve statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub prox_evals: u64,
    pub grad_evals: u64,
    pub func_evals: u64,
    pub outer_iters: u64,
    pub inner_iters: u64,
    pub wall_time_s: f64,
    pub final_residual: f64,
    pub status: Status,
}

impl Default for RunRecord {
    fn default() -> Self {
        Self {
            prox_evals: 0,
            grad_evals: 0,
            func_evals: 0,
            outer_iters: 0,
            inner_iters: 0,
            wall_time_s: 0.0,
            final_residual: f64::INFINITY,
            status: Status::Failed,
        }
    }
}

impl RunRecord {
    /// Adds the evaluation and iteration counts of `other`.
    pub fn absorb(&mut self, other: &RunRecord) {
        self.prox_evals += other.prox_evals;
        self.grad_evals += other.grad_evals;
        self.func_evals += other.func_evals;
        self.outer_iters += other.outer_iters;
        self.inner_iters += other.inner_iters;
    }
}

/// Certifies `v̄ ∈ ∇f(z̄) + ∂h(z̄)` through the prox fixed point
/// `prox(λ, z̄ + λw) = z̄` with `w = v̄ − ∇f(z̄)`.
pub fn check_stationarity(
    problem: &CompositeProblem,
    z_bar: &[f64],
    v_bar: &[f64],
    lambda: f64,
    tol: f64,
) -> Result<bool> {
    check_dim(problem.dim(), z_bar.len())?;
    check_dim(problem.dim(), v_bar.len())?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter {
            name: "lambda",
            reason: format!("must be positive, got {lambda}"),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            reason: format!("must be positive, got {tol}"),
        });
    }
    let grad = problem.f.gradient(z_bar);
    let shifted: Vec<f64> = z_bar
        .iter()
        .zip(v_bar.iter().zip(&grad))
        .map(|(z, (v, g))| z + lambda * (v - g))
        .collect();
    let p = problem.h.prox(lambda, &shifted)?;
    let residual = crate::vecops::dist(&p, z_bar);
    Ok(residual <= tol * (1.0 + norm(z_bar)))
}

/// Central-difference gradient of `oracle` at `x`.
pub fn finite_diff_grad(oracle: &dyn SmoothOracle, x: &[f64], step: f64) -> Result<Vec<f64>> {
    check_dim(oracle.dim(), x.len())?;
    if !(step > 0.0) {
        return Err(Error::InvalidParameter {
            name: "step",
            reason: format!("must be positive, got {step}"),
        });
    }
    let mut probe = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let orig = probe[i];
        probe[i] = orig + step;
        let fp = oracle.value(&probe);
        probe[i] = orig - step;
        let fm = oracle.value(&probe);
        probe[i] = orig;
        if !fp.is_finite() || !fm.is_finite() {
            return Err(Error::UndefinedProbe { coord: i });
        }
        grad.push((fp - fm) / (2.0 * step));
    }
    Ok(grad)
}

pub(crate) fn ensure_finite(name: &'static str, x: &[f64]) -> Result<()> {
    if all_finite(x) {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: "contains NaN or infinite entries".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::prox::{NonnegIndicator, ZeroFunction};

    struct HalfNormSq(usize);

    impl SmoothOracle for HalfNormSq {
        fn dim(&self) -> usize {
            self.0
        }
        fn value(&self, x: &[f64]) -> f64 {
            0.5 * norm_sq(x)
        }
        fn gradient(&self, x: &[f64]) -> Vec<f64> {
            x.to_vec()
        }
    }

    struct Affine;

    impl SmoothOracle for Affine {
        fn dim(&self) -> usize {
            3
        }
        fn value(&self, x: &[f64]) -> f64 {
            1.5 - 2.0 * x[0] + 0.25 * x[1] + 7.0 * x[2]
        }
        fn gradient(&self, _x: &[f64]) -> Vec<f64> {
            vec![-2.0, 0.25, 7.0]
        }
    }

    fn model(constant: f64, linear: Vec<f64>, curvature: f64) -> QuadraticModel {
        QuadraticModel::new(constant, linear, curvature)
    }

    #[test]
    fn quad_eval_examples() {
        let zero = QuadraticModel::zero(3, 0.0);
        assert_eq!(zero.eval(&[4.0, -1.0, 2.0]).unwrap(), 0.0);

        let m = model(1.0, vec![2.0], 2.0);
        assert_eq!(m.eval(&[3.0]).unwrap(), 16.0);

        let pure = model(0.0, vec![0.0, 0.0], 2.0);
        let s = 0.5f64.sqrt();
        assert!((pure.eval(&[s, s]).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quad_eval_dimension_mismatch() {
        let m = QuadraticModel::zero(2, 1.0);
        assert!(matches!(
            m.eval(&[1.0]),
            Err(Error::DimensionMismatch {
                expected: 2,
                actual: 1
            })
        ));
    }

    #[test]
    fn around_reproduces_centered_form() {
        let center = [0.3, -1.2, 2.0];
        let slope = [1.0, 0.5, -0.25];
        let m = QuadraticModel::around(&center, 4.0, &slope, 0.7);
        let x = [1.1, 0.4, -0.9];
        let d: Vec<f64> = x.iter().zip(&center).map(|(a, c)| a - c).collect();
        let direct = 4.0 + dot(&slope, &d) + 0.35 * norm_sq(&d);
        assert!((m.eval(&x).unwrap() - direct).abs() < 1e-13);
        assert!((m.eval(&center).unwrap() - 4.0).abs() < 1e-13);
    }

    #[test]
    fn combine_first_step_returns_new_model() {
        let prev = model(123.0, vec![9.0, -9.0], 0.5);
        let new = model(-1.0, vec![2.0, 3.0], 0.5);
        let out = QuadraticModel::combine(&prev, &new, 0.0, 0.8).unwrap();
        assert_eq!(out, new);
    }

    #[test]
    fn combine_midpoint() {
        let prev = model(0.0, vec![0.0], 1.0);
        let new = model(2.0, vec![4.0], 1.0);
        let out = QuadraticModel::combine(&prev, &new, 1.0, 1.0).unwrap();
        assert_eq!(out, model(1.0, vec![2.0], 1.0));
    }

    #[test]
    fn combine_errors() {
        let a = model(0.0, vec![0.0], 1.0);
        let b = model(0.0, vec![0.0], 2.0);
        assert!(matches!(
            QuadraticModel::combine(&a, &b, 1.0, 1.0),
            Err(Error::CurvatureMismatch { .. })
        ));
        assert!(QuadraticModel::combine(&a, &a, 0.0, 0.0).is_err());
    }

    #[test]
    fn argmin_regularized_examples() {
        let m = model(3.0, vec![0.0, 0.0], 0.0);
        assert_eq!(
            m.argmin_regularized(2.0, &[1.0, -2.0]).unwrap(),
            vec![1.0, -2.0]
        );

        let m = model(0.0, vec![1.0], 1.0);
        assert_eq!(m.argmin_regularized(1.0, &[0.0]).unwrap(), vec![-0.5]);

        let m = model(0.4, vec![1.5, -0.3, 2.2], 0.75);
        let anchor = [0.1, 4.0, -3.0];
        let w = 2.5;
        let x = m.argmin_regularized(w, &anchor).unwrap();
        for i in 0..3 {
            let g = w * (m.linear[i] + m.curvature * x[i]) + (x[i] - anchor[i]);
            assert!(g.abs() <= 1e-12);
        }
        assert!(m.argmin_regularized(0.0, &anchor).is_err());
    }

    fn problem_with(h: Arc<dyn ProxOracle>) -> CompositeProblem {
        CompositeProblem::new(Arc::new(HalfNormSq(2)), h, None).unwrap()
    }

    #[test]
    fn stationarity_examples() {
        let p = problem_with(Arc::new(ZeroFunction));
        let z = [0.5, -2.0];
        assert!(check_stationarity(&p, &z, &z, 1.0, 1e-8).unwrap());

        let v = [1.5, -2.0];
        let znorm = norm(&z);
        let tol = 0.99 / (1.0 + znorm);
        assert!(!check_stationarity(&p, &z, &v, 1.0, tol).unwrap());

        // normal cone of the nonnegative orthant at 0 contains (-1, -1)
        let p = problem_with(Arc::new(NonnegIndicator));
        let z = [0.0, 0.0];
        let v = [-1.0, -1.0];
        assert!(check_stationarity(&p, &z, &v, 1.0, 1e-8).unwrap());
        assert!(!check_stationarity(&p, &z, &[1.0, 0.0], 1.0, 1e-8).unwrap());

        assert!(check_stationarity(&p, &z, &v, 0.0, 1e-8).is_err());
        assert!(check_stationarity(&p, &z, &v, 1.0, -1.0).is_err());
    }

    #[test]
    fn stationarity_invariant_to_lambda() {
        let p = problem_with(Arc::new(NonnegIndicator));
        let z = [0.0, 3.0];
        let v = [-2.0, 3.0];
        for lambda in [0.1, 1.0, 10.0] {
            assert!(check_stationarity(&p, &z, &v, lambda, 1e-8).unwrap());
        }
    }

    #[test]
    fn finite_diff_examples() {
        let g = finite_diff_grad(&HalfNormSq(2), &[1.0, 2.0], 1e-4).unwrap();
        assert!((g[0] - 1.0).abs() < 1e-8 && (g[1] - 2.0).abs() < 1e-8);

        for step in [1e-1, 1e-3] {
            let g = finite_diff_grad(&Affine, &[0.3, -0.7, 1.9], step).unwrap();
            assert!((g[0] + 2.0).abs() < 1e-9);
            assert!((g[1] - 0.25).abs() < 1e-9);
            assert!((g[2] - 7.0).abs() < 1e-9);
        }
        assert!(finite_diff_grad(&Affine, &[0.0; 3], 0.0).is_err());
    }

    #[test]
    fn meta_is_validated() {
        let bad = ProblemMeta {
            curv_lower: 2.0,
            curv_upper: 1.0,
            phi_star: None,
            d0: None,
        };
        assert!(
            CompositeProblem::new(Arc::new(HalfNormSq(1)), Arc::new(ZeroFunction), Some(bad))
                .is_err()
        );
    }

    #[test]
    fn slack_comparison() {
        let s = Slack::default();
        assert!(s.holds(1.0, 1.0));
        assert!(s.holds(1.0 + 1e-11, 1.0));
        assert!(!s.holds(1.0 + 1e-9, 1.0));
        assert!(!Slack::EXACT.holds(1.0 + 1e-15, 1.0));
    }
}
