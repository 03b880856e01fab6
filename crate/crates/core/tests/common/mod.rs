#![allow(dead_code)]

use std::sync::Arc;

use cfapd::acg::{acg_run_with, AcgIterRecord, AcgOutcome, AcgParams};
use cfapd::problems::quadratic::{linear_spectrum, QuadraticObjective};
use cfapd::problems::{BoxIndicator, ZeroFunction};
use cfapd::{ProxOracle, RunRecord, SmoothOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A strongly convex inner problem with spectrum in `[mu, l_star]`.
pub struct InnerInstance {
    pub psi_s: QuadraticObjective,
    pub psi_n: Arc<dyn ProxOracle>,
    pub y0: Vec<f64>,
    pub l_star: f64,
    pub params: AcgParams,
}

pub fn inner_instance(seed: u64, mu: f64) -> InnerInstance {
    let mut r = rng(seed);
    let n = r.random_range(2..=30);
    let l_star = r.random_range(1.0..200.0f64).max(mu);
    let boxed = seed % 2 == 0;
    let l0 = r.random_range(mu..3.0 * l_star);
    let y0 = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    let psi_s = QuadraticObjective::with_spectrum(linear_spectrum(n, mu, l_star), seed ^ 0xabc);
    let psi_n: Arc<dyn ProxOracle> = if boxed {
        Arc::new(BoxIndicator::symmetric(1.0))
    } else {
        Arc::new(ZeroFunction)
    };
    InnerInstance {
        psi_s,
        psi_n,
        y0,
        l_star,
        params: AcgParams::new(mu, l0, 0.25, 4.0, 2.0),
    }
}

pub fn run_traced(
    psi_s: &dyn SmoothOracle,
    psi_n: &dyn ProxOracle,
    y0: &[f64],
    params: &AcgParams,
) -> (AcgOutcome, RunRecord, Vec<AcgIterRecord>) {
    let mut trace = Vec::new();
    let (out, rec) = acg_run_with(psi_s, psi_n, y0, params, None, Some(&mut trace)).unwrap();
    (out, rec, trace)
}

/// Euclidean projection onto the unit simplex by enumerating supports:
/// on support `S` the projection is `w_S − τ` with `τ = (Σ_S w − 1)/|S|`,
/// and the answer is the feasible candidate closest to `w`.
pub fn brute_force_simplex(w: &[f64]) -> Vec<f64> {
    let n = w.len();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let tau = (support.iter().map(|&i| w[i]).sum::<f64>() - 1.0) / support.len() as f64;
        let mut x = vec![0.0; n];
        let mut ok = true;
        for &i in &support {
            x[i] = w[i] - tau;
            if x[i] < -1e-14 {
                ok = false;
            }
        }
        if !ok {
            continue;
        }
        let d: f64 = x.iter().zip(w).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.expect("some support is feasible").1
}

/// Minimum eigenvalue of a symmetric row-major matrix through nalgebra.
pub fn min_eigenvalue(z: &[f64], n: usize) -> f64 {
    let m = nalgebra::DMatrix::from_row_slice(n, n, z);
    let sym = (&m + m.transpose()) * 0.5;
    sym.symmetric_eigen().eigenvalues.min()
}

pub fn random_symmetric(n: usize, scale: f64, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    let mut z = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = r.random_range(-scale..scale);
            z[i * n + j] = v;
            z[j * n + i] = v;
        }
    }
    z
}

pub fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let den: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den.max(1e-300)
}
