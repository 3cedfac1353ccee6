//! Large-`n` behaviour: CLT scaling, divergence-rate limits, Hoeffding
//! consistency and the role swap of a testing pair.

mod common;

use markov_bounds::chain::stationary;
use markov_bounds::divergence::{hoeffding_exponent, DivergencePair};
use markov_bounds::expfamily::asymptotic_variance;
use markov_bounds::testing::{build_ht, ht_lower, ht_upper};
use markov_bounds::{fixtures, TailOptions};

#[test]
fn cgf_has_gaussian_scaling() {
    let mut fams = vec![fixtures::family_a().unwrap()];
    let mut r = common::rng(21);
    fams.push(common::family(&mut r, 3));
    let n = 10_000usize;
    let nn = n as f64;
    for fam in &fams {
        let eta0 = fam.eta(0.0).unwrap();
        let v = asymptotic_variance(fam.base(), fam.generator()).unwrap();
        for delta in [0.5, 1.0, 2.0] {
            let phin = fam.cgf_exact(n, delta / nn.sqrt()).unwrap();
            let gap = (phin - delta * nn.sqrt() * eta0 - delta * delta * v / 2.0).abs();
            assert!(gap <= 5e-3, "δ = {delta}: gap {gap}");
        }
    }
}

/// `(1/n)·D_{1+s}` of the path measures is `φₙ(−s)/(ns)` for a testing
/// family and tends to `φ(−s)/s`; the gap is at most `max(|δ̄|, |δ̲|)/(n|s|)`.
#[test]
fn path_renyi_rate_converges() {
    let mut r = common::rng(22);
    for _ in 0..5 {
        let w0 = common::ergodic(&mut r, 3, 0.0);
        let w1 = common::same_support(&mut r, &w0);
        let (p0, p1) = (common::distribution(&mut r, 3), common::distribution(&mut r, 3));
        let ht = build_ht(&w0, &p0, &w1, &p1).unwrap();
        for s in [-0.5, 0.5, 1.0] {
            let p = ht.fam.point(-s).unwrap();
            let limit = p.phi / s;
            let slack = p.delta_upper.abs().max(p.delta_lower.abs());
            for n in [10usize, 100, 1000] {
                let nn = n as f64;
                let rate = ht.fam.cgf_exact(n, -s).unwrap() / (nn * s);
                assert!((rate - limit).abs() <= slack / (nn * s.abs()) + 1e-12);
            }
        }
        // The limit is the Rényi rate of the transition matrices.
        let pair = DivergencePair::new(w0, w1).unwrap();
        let d = pair.renyi(0.5).unwrap();
        assert!((ht.fam.phi(-0.5).unwrap() / 0.5 - d).abs() < 1e-9);
    }
}

#[test]
fn ht_bounds_approach_hoeffding_exponent() {
    let ht = fixtures::ht_ab().unwrap();
    let opts = TailOptions::default();
    let n = 1000usize;
    let nn = n as f64;
    for frac in [0.25, 0.5, 0.75] {
        let r = frac * ht.d01;
        let h = hoeffding_exponent(&ht.fam, r).unwrap();
        let p = ht.fam.point(h.theta_hat).unwrap();
        let slack = 5.0 / nn * (1.0 + p.delta_upper.abs() + p.delta_lower.abs());
        let lo = ht_lower(&ht, n, r).unwrap() / nn;
        assert!((lo - h.value).abs() <= slack, "lower/n {lo} vs {}", h.value);
        // The upper bound closes at rate n^{-1/2}, not 1/n.
        let up = ht_upper(&ht, n, r, &opts).unwrap();
        assert!(up.feasible);
        let up = up.value / nn;
        assert!(up >= h.value - 1e-12);
        assert!(up - h.value <= slack * nn.sqrt(), "upper/n {up} vs {}", h.value);
    }
}

#[test]
fn role_swap_reflects_the_family() {
    let mut r = common::rng(23);
    for _ in 0..5 {
        let w0 = common::ergodic(&mut r, 3, 0.2);
        let w1 = common::same_support(&mut r, &w0);
        let (p0, p1) = (stationary(&w0).unwrap(), stationary(&w1).unwrap());
        let fwd = build_ht(&w0, &p0, &w1, &p1).unwrap();
        let rev = build_ht(&w1, &p1, &w0, &p0).unwrap();
        for t in [-0.5, 0.2, 0.7, 1.3] {
            let a = fwd.fam.phi(t).unwrap();
            let b = rev.fam.phi(1.0 - t).unwrap();
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
        assert!((fwd.d01 - rev.d10).abs() < 1e-10);
        // r = 0 sits at θ̂ = 1, where the exponent is D(W₁‖W₀).
        let h = hoeffding_exponent(&fwd.fam, 0.0).unwrap();
        assert_eq!(h.theta_hat, 1.0);
        assert!((h.value - fwd.d10).abs() < 1e-12);
        // r = D(W₀‖W₁) sits at θ̂ = 0 with exponent zero.
        let h = hoeffding_exponent(&fwd.fam, fwd.d01).unwrap();
        assert_eq!((h.theta_hat, h.value), (0.0, 0.0));
    }
}
