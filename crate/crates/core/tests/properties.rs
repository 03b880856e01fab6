mod common;

use cfapd::parallel::map_items;
use cfapd::problems::{gen_qsdp, gen_quadratic, project_simplex, project_spectraplex};
use cfapd::vecops::{dist, dot};
use cfapd::{
    finite_diff_grad, quad_argmin_regularized, quad_combine, quad_eval, Execution,
    QuadraticModel,
};
use common::*;
use proptest::collection::vec;
use proptest::prelude::*;

fn model_strategy(dim: usize) -> impl Strategy<Value = QuadraticModel> {
    (
        -10.0..10.0f64,
        vec(-10.0..10.0f64, dim),
        vec(-10.0..10.0f64, dim),
    )
        .prop_map(|(value, center, slope)| QuadraticModel::around(&center, value, &slope, 0.5))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // A cascade of combinations evaluates to the weighted mean of the
    // individual evaluations.
    #[test]
    fn combine_cascade_is_weighted_mean(
        models in vec(model_strategy(4), 1..8),
        weights in vec(0.01..5.0f64, 8),
        x in vec(-3.0..3.0f64, 4),
    ) {
        let mut acc = models[0].clone();
        let mut total = weights[0];
        let mut expected = weights[0] * quad_eval(&models[0], &x).unwrap();
        for (q, &w) in models.iter().zip(&weights).skip(1) {
            acc = quad_combine(&acc, q, total, w).unwrap();
            total += w;
            expected += w * quad_eval(q, &x).unwrap();
        }
        let got = quad_eval(&acc, &x).unwrap();
        let want = expected / total;
        prop_assert!((got - want).abs() <= 1e-9 * (1.0 + acc.eval_magnitude(&x)));
    }

    // The minimizer zeroes the gradient w·(b + μx) + (x − anchor).
    #[test]
    fn argmin_regularized_is_stationary(
        q in model_strategy(5),
        weight in 0.01..100.0f64,
        anchor in vec(-3.0..3.0f64, 5),
    ) {
        let x = quad_argmin_regularized(&q, weight, &anchor).unwrap();
        for i in 0..5 {
            let g = weight * (q.linear[i] + q.curvature * x[i]) + x[i] - anchor[i];
            prop_assert!(g.abs() <= 1e-9 * (1.0 + weight * q.linear[i].abs() + anchor[i].abs()));
        }
    }

    #[test]
    fn simplex_projection_matches_enumeration(w in vec(-3.0..3.0f64, 1..8)) {
        let p = project_simplex(&w).unwrap();
        prop_assert!(dist(&p, &brute_force_simplex(&w)) <= 1e-10);
        prop_assert!(p.iter().all(|&x| x >= 0.0));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn simplex_projection_variational_inequality(
        w in vec(-3.0..3.0f64, 6),
        v in vec(0.0..1.0f64, 6),
    ) {
        let p = project_simplex(&w).unwrap();
        let s: f64 = v.iter().sum::<f64>().max(1e-12);
        let feasible: Vec<f64> = v.iter().map(|x| x / s).collect();
        let lhs: f64 = (0..6).map(|i| (w[i] - p[i]) * (feasible[i] - p[i])).sum();
        prop_assert!(lhs <= 1e-10);
    }

    #[test]
    fn spectraplex_projection_properties(
        dim in 1usize..9,
        seed_a in any::<u64>(),
        seed_b in any::<u64>(),
        scale in 0.1..10.0f64,
    ) {
        let a = random_symmetric(dim, scale, seed_a);
        let b = random_symmetric(dim, scale, seed_b);
        let pa = project_spectraplex(&a, dim).unwrap();
        let pb = project_spectraplex(&b, dim).unwrap();
        prop_assert!(min_eigenvalue(&pa, dim) >= -1e-10);
        let tr: f64 = (0..dim).map(|i| pa[i * dim + i]).sum();
        prop_assert!((tr - 1.0).abs() <= 1e-10);
        prop_assert!(dist(&project_spectraplex(&pa, dim).unwrap(), &pa) <= 1e-10);
        prop_assert!(dist(&pa, &pb) <= dist(&a, &b) + 1e-10);
        // ⟨a − P(a), P(b) − P(a)⟩ ≤ 0 since P(b) is feasible
        let diff: Vec<f64> = a.iter().zip(&pa).map(|(x, y)| x - y).collect();
        let dir: Vec<f64> = pb.iter().zip(&pa).map(|(x, y)| x - y).collect();
        prop_assert!(dot(&diff, &dir) <= 1e-9 * (1.0 + scale));
    }

    #[test]
    fn quadratic_gradient_matches_finite_differences(
        n in 1usize..12,
        m in 0.0..5.0f64,
        extra in 0.1..20.0f64,
        seed in any::<u64>(),
        x in vec(-1.0..1.0f64, 12),
    ) {
        prop_assume!(n > 1 || m == 0.0);
        let p = gen_quadratic(n, m, m + extra, false, true, seed).unwrap();
        let x = &x[..n];
        let fd = finite_diff_grad(p.f.as_ref(), x, 1e-5).unwrap();
        prop_assert!(rel_err(&fd, &p.f.gradient(x)) <= 1e-6);
    }

    #[test]
    fn execution_modes_agree(items in vec(any::<i64>(), 0..200)) {
        let f = |x: &i64| x.wrapping_mul(31).rotate_left(7);
        prop_assert_eq!(
            map_items(&items, Execution::Sequential, f),
            map_items(&items, Execution::Parallel, f)
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn qsdp_gradient_matches_finite_differences(
        n in 2usize..7,
        l in 1usize..5,
        seed in any::<u64>(),
        point_seed in any::<u64>(),
    ) {
        let p = gen_qsdp(n, l, 2.0, 30.0, seed).unwrap();
        let z = project_spectraplex(&random_symmetric(n, 1.0, point_seed), n).unwrap();
        let fd = finite_diff_grad(p.f.as_ref(), &z, 1e-4).unwrap();
        prop_assert!(rel_err(&fd, &p.f.gradient(&z)) <= 1e-5);
    }
}
