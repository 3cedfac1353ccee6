mod common;

use markov_bounds::chain::{fundamental, perron, stationary};
use markov_bounds::divergence::{
    family_relative_entropy, family_renyi, ipi_check, legendre, legendre_inf_form, m_projection,
    tilt_to_mean, DivergencePair,
};
use markov_bounds::expfamily::asymptotic_variance;
use markov_bounds::optimize::{grid_max_1d, linspace};
use markov_bounds::{TiltedFamily, TransitionMatrix};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn stochastic_perron_eigenvalue_is_one(seed in any::<u64>(), dim in 1usize..=6) {
        let mut r = common::rng(seed);
        let w = common::ergodic(&mut r, dim, 0.3);
        let p = perron(w.matrix()).unwrap();
        prop_assert!((p.eigenvalue - 1.0).abs() < 1e-10);
    }

    #[test]
    fn perron_residual_on_scaled_matrices(seed in any::<u64>(), dim in 1usize..=6) {
        let mut r = common::rng(seed);
        let w = common::ergodic(&mut r, dim, 0.3);
        let m = DMatrix::from_fn(dim, dim, |i, j| w.get(i, j) * (0.1 + 10.0 * (((i * 7 + j * 3 + seed as usize) % 11) as f64)));
        let p = perron(&m).unwrap();
        prop_assert!(p.residual < 1e-10, "residual {}", p.residual);
        let mv = &m * DMatrix::from_column_slice(dim, 1, &p.right_vec);
        for i in 0..dim {
            prop_assert!((mv[i] - p.eigenvalue * p.right_vec[i]).abs() <= 1e-10 * p.eigenvalue);
            prop_assert!(p.right_vec[i] > 0.0 && p.left_vec[i] >= 1.0 - 1e-15);
        }
    }

    #[test]
    fn fundamental_is_two_sided_inverse(seed in any::<u64>(), dim in 1usize..=5) {
        let mut r = common::rng(seed);
        let w = common::ergodic(&mut r, dim, 0.3);
        let f = fundamental(&w).unwrap();
        let sys = DMatrix::<f64>::identity(dim, dim) - w.matrix() + &f.a;
        let id = DMatrix::<f64>::identity(dim, dim);
        prop_assert!((&f.z * &sys - &id).amax() < 1e-10);
        prop_assert!((&sys * &f.z - &id).amax() < 1e-10);
    }

    #[test]
    fn truncated_series_error_decreases(seed in any::<u64>(), dim in 2usize..=4) {
        let mut r = common::rng(seed);
        let w = common::ergodic(&mut r, dim, 0.0);
        let f = fundamental(&w).unwrap();
        let b = w.matrix() - &f.a;
        let mut term = DMatrix::<f64>::identity(dim, dim);
        let mut sum = term.clone();
        let mut prev = f64::INFINITY;
        for _ in 0..30 {
            let err = (&f.z - &sum).amax();
            prop_assert!(err <= prev + 1e-12, "{err} > {prev}");
            prev = err;
            term = &term * &b;
            sum += &term;
        }
    }

    #[test]
    fn cgf_sandwich(seed in any::<u64>(), dim in 2usize..=3, n in 1usize..=30, theta in -2.0f64..2.0) {
        let mut r = common::rng(seed);
        let fam = common::family(&mut r, dim);
        let b = fam.cgf_bounds(n, theta).unwrap();
        let exact = fam.cgf_exact(n, theta).unwrap();
        prop_assert!(b.lower - exact <= 1e-10 && exact - b.upper <= 1e-10, "{} {} {}", b.lower, exact, b.upper);
    }

    #[test]
    fn phi_is_convex(seed in any::<u64>(), t1 in -3.0f64..3.0, t2 in -3.0f64..3.0, lam in 0.0f64..1.0) {
        let mut r = common::rng(seed);
        let fam = common::family(&mut r, 3);
        let mid = fam.phi(lam * t1 + (1.0 - lam) * t2).unwrap();
        let chord = lam * fam.phi(t1).unwrap() + (1.0 - lam) * fam.phi(t2).unwrap();
        prop_assert!(mid <= chord + 1e-10);
    }

    #[test]
    fn eta_matches_finite_difference(seed in any::<u64>(), theta in -2.0f64..2.0) {
        let mut r = common::rng(seed);
        let fam = common::family(&mut r, 3);
        let h = 1e-4;
        let f = |t: f64| fam.phi(t).unwrap();
        let d1 = (f(theta + h) - f(theta - h)) / (2.0 * h);
        let d2 = (f(theta + h / 2.0) - f(theta - h / 2.0)) / h;
        let fd = (4.0 * d2 - d1) / 3.0;
        prop_assert!((fam.eta(theta).unwrap() - fd).abs() < 1e-7);
    }

    #[test]
    fn variance_formula_matches_curvature(seed in any::<u64>(), dim in 2usize..=4) {
        let mut r = common::rng(seed);
        let fam = common::family(&mut r, dim);
        let v = asymptotic_variance(fam.base(), fam.generator()).unwrap();
        let fd = fam.fisher(0.0).unwrap();
        prop_assert!((v - fd).abs() <= 1e-6 * v.abs(), "{v} vs {fd}");
    }

    #[test]
    fn relative_entropy_nonnegative_and_zero_on_diagonal(seed in any::<u64>(), dim in 2usize..=4) {
        let mut r = common::rng(seed);
        let w = common::ergodic(&mut r, dim, 0.2);
        let v = common::same_support(&mut r, &w);
        let d = DivergencePair::new(w.clone(), v).unwrap().relative_entropy().unwrap();
        prop_assert!(d > 1e-10);
        let d0 = DivergencePair::new(w.clone(), w).unwrap().relative_entropy().unwrap();
        prop_assert!(d0.abs() < 1e-10);
    }

    #[test]
    fn renyi_increasing_and_s_times_renyi_convex(seed in any::<u64>(), dim in 2usize..=3) {
        let mut r = common::rng(seed);
        let w = common::ergodic(&mut r, dim, 0.2);
        let v = common::same_support(&mut r, &w);
        let pair = DivergencePair::new(w, v).unwrap();
        let ss = linspace(-0.9, 3.0, 40);
        let d: Vec<f64> = ss.iter().map(|&s| if s.abs() < 1e-12 { pair.relative_entropy().unwrap() } else { pair.renyi(s).unwrap() }).collect();
        for k in 1..ss.len() {
            prop_assert!(d[k] > d[k - 1], "not increasing at s = {}", ss[k]);
        }
        let sd: Vec<f64> = ss.iter().zip(&d).map(|(s, d)| s * d).collect();
        for k in 1..ss.len() - 1 {
            prop_assert!(sd[k - 1] + sd[k + 1] - 2.0 * sd[k] >= -1e-12);
        }
    }

    #[test]
    fn family_closed_forms_match_materialized(seed in any::<u64>(), t in -1.5f64..1.5, tb in -1.5f64..1.5, s in 0.1f64..2.0) {
        let mut r = common::rng(seed);
        let fam = common::family(&mut r, 3);
        let wt = fam.point(t).unwrap().w_theta.clone();
        let wb = fam.point(tb).unwrap().w_theta.clone();
        let pair = DivergencePair::new(wt, wb).unwrap();
        let d = family_relative_entropy(&fam, t, tb).unwrap();
        prop_assert!((d - pair.relative_entropy().unwrap()).abs() < 1e-7);
        let rr = family_renyi(&fam, t, tb, s).unwrap();
        prop_assert!((rr - pair.renyi(s).unwrap()).abs() < 1e-7);
    }
}

proptest! {
    #![proptest_config(cfg(24))]

    #[test]
    fn legendre_four_ways(seed in any::<u64>(), u in 0.1f64..0.9, upper in any::<bool>()) {
        let mut r = common::rng(seed);
        let fam = common::family(&mut r, 2);
        let eta0 = fam.eta(0.0).unwrap();
        let (lo, hi) = fam.eta_range().unwrap();
        let a = if upper { eta0 + u * (hi - eta0) } else { eta0 + u * (lo - eta0) };
        let l = legendre(&fam, a).unwrap();
        let grid = linspace(-fam.theta_max(), fam.theta_max(), 4001);
        let (_, sup) = grid_max_1d(|t| t * a - fam.phi(t).unwrap(), &grid, 1e-12).unwrap();
        let ws = fam.point(l.theta_star).unwrap().w_theta.clone();
        let d = DivergencePair::new(ws, fam.base().clone()).unwrap().relative_entropy().unwrap();
        let inf = legendre_inf_form(&fam, a).unwrap();
        for v in [sup, d, inf] {
            prop_assert!((v - l.value).abs() < 1e-5, "{} vs {}", v, l.value);
        }
    }

    #[test]
    fn pythagorean_identity(seed in any::<u64>(), u in -0.8f64..0.8) {
        let mut r = common::rng(seed);
        let w0 = common::ergodic(&mut r, 3, 0.0);
        let gen = common::generator(&mut r, &w0);
        let fam = TiltedFamily::new(w0.clone(), gen.clone(), stationary(&w0).unwrap()).unwrap();
        let eta0 = fam.eta(0.0).unwrap();
        let (lo, hi) = fam.eta_range().unwrap();
        let a = if u > 0.0 { eta0 + u * (hi - eta0) } else { eta0 - u * (lo - eta0) };
        let other = common::same_support(&mut r, &w0);
        let test = tilt_to_mean(&other, &gen, a).unwrap();
        prop_assert!(m_projection(&fam, a, &test).unwrap().pythagorean_residual <= 1e-6);
    }

    #[test]
    fn data_processing_margins(seed in any::<u64>(), ny in 2usize..=3) {
        let mut r = common::rng(seed);
        let wx = common::ergodic(&mut r, 2, 0.0);
        let vx = common::ergodic(&mut r, 2, 0.0);
        let w: TransitionMatrix = common::non_hidden_joint(&mut r, &wx, ny);
        let v = common::non_hidden_joint(&mut r, &vx, ny);
        let rep = ipi_check(&w, &v, 2, ny, &[-0.5, 0.5, 1.0, 2.0]).unwrap();
        prop_assert!(rep.min_margin() >= -1e-9, "margin {}", rep.min_margin());
    }
}

#[test]
fn corrections_vanish_at_zero() {
    let mut r = common::rng(11);
    for _ in 0..10 {
        let fam = common::family(&mut r, 3);
        let mut prev = f64::INFINITY;
        for k in 1..=8 {
            let p = fam.point(10f64.powi(-k)).unwrap();
            let m = p.delta_upper.abs().max(p.delta_lower.abs());
            assert!(m <= prev + 1e-15);
            prev = m;
        }
        assert!(prev < 1e-6, "max |δ| at θ = 1e-8 is {prev}");
    }
}
