use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::vecops::{dot, norm};

pub const POWER_TOL: f64 = 1e-6;
pub const POWER_MAX_ITERS: usize = 10_000;
const START_SEED: u64 = 0x5eed_cafe;

/// Largest eigenvalue of a symmetric positive semidefinite operator.
///
/// Stops once the eigen-residual `‖Av − λv‖` falls below `tol·λ` for the
/// unit iterate `v`. The start vector comes from a fixed-seed generator so
/// repeated calls agree bit for bit.
pub fn power_iteration_lmax<F>(op: F, dim: usize, iters: usize, tol: f64) -> Result<f64>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if dim == 0 {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(START_SEED);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nv = norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);

    let mut estimate = 0.0;
    for _ in 0..iters {
        let av = op(&v);
        estimate = dot(&v, &av);
        let residual = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - estimate * x).powi(2))
            .sum::<f64>()
            .sqrt();
        let nav = norm(&av);
        if residual <= tol * estimate.abs() || nav == 0.0 {
            return Ok(estimate);
        }
        v = av.into_iter().map(|x| x / nav).collect();
    }
    Err(Error::PowerIterationNoConvergence { iters, estimate })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        let l = power_iteration_lmax(|x| x.to_vec(), 5, POWER_MAX_ITERS, POWER_TOL).unwrap();
        assert!((l - 1.0).abs() < 1e-12);
    }

    #[test]
    fn diagonal() {
        let d = [1.0, 2.0, 3.0];
        let op = |x: &[f64]| x.iter().zip(&d).map(|(a, b)| a * b).collect();
        let l = power_iteration_lmax(op, 3, POWER_MAX_ITERS, POWER_TOL).unwrap();
        assert!((l - 3.0).abs() <= 1e-6);
    }

    #[test]
    fn rank_one() {
        let v = [1.0, -2.0, 0.5, 3.0];
        let vv = dot(&v, &v);
        let op = |x: &[f64]| {
            let s = dot(&v, x);
            v.iter().map(|a| a * s).collect()
        };
        let l = power_iteration_lmax(op, 4, POWER_MAX_ITERS, POWER_TOL).unwrap();
        assert!((l - vv).abs() <= 1e-6 * vv);
    }

    #[test]
    fn reports_last_estimate_on_failure() {
        let d = [1.0, 0.999_999];
        let op = |x: &[f64]| x.iter().zip(&d).map(|(a, b)| a * b).collect();
        match power_iteration_lmax(op, 2, 3, 1e-14) {
            Err(Error::PowerIterationNoConvergence { iters: 3, estimate }) => {
                assert!(estimate > 0.99)
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
