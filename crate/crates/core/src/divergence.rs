//! Divergence rates between transition matrices.
//!
//! For two matrices with a common support, `φ_{W,V}(1+s)` is the log Perron
//! eigenvalue of the entrywise combination `W^{1+s}·V^{−s}`. The relative
//! entropy rate is its derivative at `s = 0` and the Rényi rate is
//! `D_{1+s}(W‖V) = φ_{W,V}(1+s)/s`.
//!
//! Inside an exponential family the same quantities have closed forms in
//! terms of the potential `φ`, which is what the bound evaluators use.

use std::collections::HashMap;
use std::sync::RwLock;

use nalgebra::DMatrix;

use crate::chain::{self, classify, Distribution, TransitionMatrix};
use crate::error::{Error, Result};
use crate::expfamily::{GeneratorSpec, TiltedFamily};
use crate::optimize::{bisect, grid_max_1d, grid_min_2d, linspace, log_grid};

/// Disagreement between the two relative-entropy routes that is reported
/// as a solver failure.
pub const CONSISTENCY_TOL: f64 = 1e-6;
/// Tolerance of the non-hidden condition on joint chains.
pub const HIDDEN_TOL: f64 = 1e-10;

const FD_STEP: f64 = 1e-4;

/// Two chains on the same support, with a memo table for `φ(1+s)`.
pub struct DivergencePair {
    w: TransitionMatrix,
    v: TransitionMatrix,
    pi_w: Distribution,
    cache: RwLock<HashMap<u64, f64>>,
}

impl std::fmt::Debug for DivergencePair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DivergencePair")
            .field("w", &self.w)
            .field("v", &self.v)
            .finish_non_exhaustive()
    }
}

impl DivergencePair {
    pub fn new(w: TransitionMatrix, v: TransitionMatrix) -> Result<Self> {
        if w.dim() != v.dim() {
            return Err(Error::DimensionMismatch {
                expected: w.dim(),
                got: v.dim(),
            });
        }
        for m in [&w, &v] {
            let c = classify(m);
            if !c.ergodic {
                return Err(if c.irreducible {
                    Error::NotErgodic { period: c.period }
                } else {
                    Error::NotIrreducible
                });
            }
        }
        if !w.same_support(&v) {
            return Err(Error::SupportMismatch);
        }
        let pi_w = chain::stationary(&w)?;
        Ok(Self {
            w,
            v,
            pi_w,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn w(&self) -> &TransitionMatrix {
        &self.w
    }

    pub fn v(&self) -> &TransitionMatrix {
        &self.v
    }

    /// `log` of the Perron eigenvalue of `W^{1+s}·V^{−s}`.
    pub fn varphi(&self, one_plus_s: f64) -> Result<f64> {
        let key = one_plus_s.to_bits();
        if let Some(v) = self.cache.read().ok().and_then(|c| c.get(&key).copied()) {
            return Ok(v);
        }
        let s = one_plus_s - 1.0;
        let d = self.w.dim();
        let m = DMatrix::from_fn(d, d, |x, xb| {
            let a = self.w.get(x, xb);
            if a > 0.0 {
                (one_plus_s * a.ln() - s * self.v.get(x, xb).ln()).exp()
            } else {
                0.0
            }
        });
        let value = chain::perron(&m)?.eigenvalue.ln();
        if let Ok(mut c) = self.cache.write() {
            c.insert(key, value);
        }
        Ok(value)
    }

    /// `Σ_x̄ π_W(x̄) Σₓ W(x|x̄)·log(W(x|x̄)/V(x|x̄))`.
    pub fn relative_entropy_stationary(&self) -> f64 {
        self.w
            .support()
            .into_iter()
            .map(|(x, xb)| {
                let a = self.w.get(x, xb);
                self.pi_w[xb] * a * (a / self.v.get(x, xb)).ln()
            })
            .sum()
    }

    /// `dφ/ds` at `s = 0`, by Richardson-extrapolated central differences.
    pub fn relative_entropy_derivative(&self) -> Result<f64> {
        let central =
            |h: f64| -> Result<f64> { Ok((self.varphi(1.0 + h)? - self.varphi(1.0 - h)?) / (2.0 * h)) };
        let coarse = central(FD_STEP)?;
        let fine = central(FD_STEP / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// `D(W‖V)`, cross-checked between the stationary sum and the
    /// derivative of `φ`.
    pub fn relative_entropy(&self) -> Result<f64> {
        let first = self.relative_entropy_stationary();
        let second = self.relative_entropy_derivative()?;
        if (first - second).abs() > CONSISTENCY_TOL {
            return Err(Error::ConsistencyFailure { first, second });
        }
        Ok(first)
    }

    /// `D_{1+s}(W‖V) = φ(1+s)/s`; `s = 0` gives the relative entropy.
    pub fn renyi(&self, s: f64) -> Result<f64> {
        if s == 0.0 {
            return self.relative_entropy();
        }
        Ok(self.varphi(1.0 + s)? / s)
    }
}

pub fn varphi(pair: &DivergencePair, one_plus_s: f64) -> Result<f64> {
    pair.varphi(one_plus_s)
}

pub fn relative_entropy(pair: &DivergencePair) -> Result<f64> {
    pair.relative_entropy()
}

pub fn renyi(pair: &DivergencePair, s: f64) -> Result<f64> {
    pair.renyi(s)
}

/// Divergences between two members of an exponential family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FamilyDivergences {
    pub d: f64,
    pub renyi: f64,
}

/// `D(W_θ‖W_θ̄) = (θ − θ̄)φ′(θ) − φ(θ) + φ(θ̄)` and
/// `D_{1+s}(W_θ‖W_θ̄) = [φ((1+s)θ − sθ̄) − (1+s)φ(θ) + sφ(θ̄)]/s`.
pub fn family_divergences(
    fam: &TiltedFamily,
    theta: f64,
    theta_bar: f64,
    s: f64,
) -> Result<FamilyDivergences> {
    let d = family_relative_entropy(fam, theta, theta_bar)?;
    let renyi = if s == 0.0 {
        d
    } else {
        family_renyi(fam, theta, theta_bar, s)?
    };
    Ok(FamilyDivergences { d, renyi })
}

pub fn family_relative_entropy(fam: &TiltedFamily, theta: f64, theta_bar: f64) -> Result<f64> {
    if theta == theta_bar {
        return Ok(0.0);
    }
    let p = fam.point(theta)?;
    Ok((theta - theta_bar) * p.eta - p.phi + fam.phi(theta_bar)?)
}

pub fn family_renyi(fam: &TiltedFamily, theta: f64, theta_bar: f64, s: f64) -> Result<f64> {
    if theta == theta_bar {
        return Ok(0.0);
    }
    let mixed = fam.phi((1.0 + s) * theta - s * theta_bar)?;
    Ok((mixed - (1.0 + s) * fam.phi(theta)? + s * fam.phi(theta_bar)?) / s)
}

/// Legendre transform of `φ` at `a` on the branch containing `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Legendre {
    pub value: f64,
    pub theta_star: f64,
}

/// `sup_θ [θa − φ(θ)]` over `θ ≥ 0` when `a ≥ η(0)` and over `θ ≤ 0`
/// otherwise; attained at `θ* = η⁻¹(a)`.
pub fn legendre(fam: &TiltedFamily, a: f64) -> Result<Legendre> {
    let theta_star = fam.eta_inverse(a)?;
    let value = if theta_star == 0.0 {
        0.0
    } else {
        theta_star * a - fam.phi(theta_star)?
    };
    Ok(Legendre { value, theta_star })
}

/// Grid for `s` in the Rényi-infimum searches: `10^{-7}` to `10^{3}`.
pub fn renyi_s_grid() -> Vec<f64> {
    log_grid(-7.0, 3.0, 101)
}

/// θ grid on `(lo, hi)` clustered logarithmically at `lo`, where the
/// infima below are approached.
fn clustered_grid(lo: f64, hi: f64) -> Vec<f64> {
    let mut g: Vec<f64> = log_grid(-7.0, 0.0, 101)
        .into_iter()
        .map(|t| lo + (hi - lo) * t)
        .collect();
    if hi < lo {
        g.reverse();
    }
    g
}

/// `inf_{s > 0, θ strictly between from and to} D_{1+s}(W_θ‖W₀)` where
/// `W₀` is the base of the family. Grid scan plus coordinate refinement.
pub fn renyi_infimum(fam: &TiltedFamily, from: f64, to: f64) -> Result<f64> {
    let log_s: Vec<f64> = renyi_s_grid().iter().map(|s| s.log10()).collect();
    let thetas = clustered_grid(from, to);
    let f = |ls: f64, t: f64| {
        family_renyi(fam, t, 0.0, 10f64.powf(ls)).unwrap_or(f64::INFINITY)
    };
    grid_min_2d(f, &log_s, &thetas, 3)
        .map(|m| m.value)
        .ok_or_else(|| Error::InvalidInput("no finite value on the search grid".into()))
}

/// The infimum form of the Legendre transform: `inf D_{1+s}(W_θ‖W₀)` over
/// `s > 0` and `θ` beyond `θ*` (above it for `a > η(0)`, below otherwise).
pub fn legendre_inf_form(fam: &TiltedFamily, a: f64) -> Result<f64> {
    let theta_star = fam.eta_inverse(a)?;
    let span = 3.0 * theta_star.abs().max(1.0);
    let to = if a >= fam.eta(0.0)? {
        (theta_star + span).min(fam.theta_max())
    } else {
        (theta_star - span).max(-fam.theta_max())
    };
    renyi_infimum(fam, theta_star, to)
}

fn require_ht_family(fam: &TiltedFamily) -> Result<f64> {
    let phi1 = fam.phi(1.0)?;
    if phi1.abs() > 1e-9 {
        return Err(Error::InvalidInput(format!(
            "not a testing family: phi(1) = {phi1:e}"
        )));
    }
    // D(W₀‖W₁) = −φ′(0) for a testing family.
    Ok(-fam.eta(0.0)?)
}

/// Smaller root `θ̂(r) ∈ [0, 1]` of `(θ − 1)φ′(θ) − φ(θ) = r` for a testing
/// family (`W₀` at `θ = 0`, `W₁` at `θ = 1`).
pub fn theta_hat(fam: &TiltedFamily, r: f64) -> Result<f64> {
    let d01 = require_ht_family(fam)?;
    let slack = 1e-12 * d01.max(1.0);
    if !(r >= -slack && r <= d01 + slack) {
        return Err(Error::OutOfRange {
            what: "exponent r",
            value: r,
            lo: 0.0,
            hi: d01,
        });
    }
    if r <= 0.0 {
        return Ok(1.0);
    }
    if r >= d01 {
        return Ok(0.0);
    }
    let mut err = None;
    let root = bisect(
        |t| match fam.point(t) {
            Ok(p) => (t - 1.0) * p.eta - p.phi - r,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        },
        0.0,
        1.0,
        1e-13,
    );
    match err {
        Some(e) => Err(e),
        None => Ok(root),
    }
}

/// The Hoeffding exponent `min_{D(W‖W₁) ≤ r} D(W‖W₀)` and its three
/// alternative expressions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingExponent {
    pub value: f64,
    pub theta_hat: f64,
    /// `[D(W_θ̂‖W₀), sup (−θr − φ)/(1−θ), sup θ(−r + D_{1−θ}(W₀‖W₁))/(1−θ),
    /// inf_{s, θ ∈ (θ̂, 1)} D_{1+s}(W_θ‖W₀)]`.
    pub expressions: [f64; 4],
}

impl HoeffdingExponent {
    pub fn spread(&self) -> f64 {
        let hi = self.expressions.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let lo = self.expressions.iter().cloned().fold(f64::INFINITY, f64::min);
        hi - lo
    }
}

/// Upper end of the `θ ∈ [0, 1)` searches; keeps `1 − θ` away from zero.
pub const THETA_ONE_GAP: f64 = 1e-6;

pub fn hoeffding_exponent(fam: &TiltedFamily, r: f64) -> Result<HoeffdingExponent> {
    let th = theta_hat(fam, r)?;
    let e1 = family_relative_entropy(fam, th, 0.0)?;
    let grid = linspace(0.0, 1.0 - THETA_ONE_GAP, 201);
    let e2 = grid_max_1d(
        |t| match fam.phi(t) {
            Ok(phi) => (-t * r - phi) / (1.0 - t),
            Err(_) => f64::NAN,
        },
        &grid,
        1e-12,
    )
    .map_or(0.0, |(_, v)| v.max(0.0));

    let w1 = fam.point(1.0)?.w_theta.clone();
    let pair = DivergencePair::new(fam.base().clone(), w1)?;
    let e3 = grid_max_1d(
        |t| {
            if t == 0.0 {
                return 0.0;
            }
            match pair.renyi(-t) {
                Ok(d) => t * (-r + d) / (1.0 - t),
                Err(_) => f64::NAN,
            }
        },
        &grid,
        1e-12,
    )
    .map_or(0.0, |(_, v)| v.max(0.0));

    let e4 = if th >= 1.0 {
        e1
    } else {
        renyi_infimum(fam, th, 1.0)?
    };
    Ok(HoeffdingExponent {
        value: e1,
        theta_hat: th,
        expressions: [e1, e2, e3, e4],
    })
}

/// Projection of the base chain `V = W₀` onto the mean set `{W: E_W g = a}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MProjection {
    pub theta_star: f64,
    /// `|D(W‖V) − D(W‖V*) − D(V*‖V)|` for the supplied test matrix `W`.
    pub pythagorean_residual: f64,
}

/// Stationary mean of `g` under `w`.
pub fn stationary_mean(w: &TransitionMatrix, gen: &GeneratorSpec) -> Result<f64> {
    let pi = chain::stationary(w)?;
    Ok(w.support()
        .into_iter()
        .map(|(x, xb)| pi[xb] * w.get(x, xb) * gen.value(x, xb))
        .sum())
}

/// `V* = W_{θ*}` with `η(θ*) = a`, checked against a test matrix in the
/// mean set through the Pythagorean identity.
pub fn m_projection(fam: &TiltedFamily, a: f64, test: &TransitionMatrix) -> Result<MProjection> {
    let theta_star = fam.eta_inverse(a)?;
    let mean = stationary_mean(test, fam.generator())?;
    if (mean - a).abs() > 1e-8 * a.abs().max(1.0) {
        return Err(Error::InvalidInput(format!(
            "test matrix has mean {mean}, expected {a}"
        )));
    }
    let v = fam.base();
    let v_star = fam.point(theta_star)?.w_theta.clone();
    let d_wv = DivergencePair::new(test.clone(), v.clone())?.relative_entropy()?;
    let d_wvs = DivergencePair::new(test.clone(), v_star.clone())?.relative_entropy()?;
    let d_vsv = DivergencePair::new(v_star, v.clone())?.relative_entropy()?;
    Ok(MProjection {
        theta_star,
        pythagorean_residual: (d_wv - d_wvs - d_vsv).abs(),
    })
}

/// Member of the family through `base` (same generator) with stationary
/// mean `a`; used to build test matrices for [`m_projection`].
pub fn tilt_to_mean(base: &TransitionMatrix, gen: &GeneratorSpec, a: f64) -> Result<TransitionMatrix> {
    let pi = chain::stationary(base)?;
    let fam = TiltedFamily::new(base.clone(), gen.clone(), pi)?;
    let t = fam.eta_inverse(a)?;
    Ok(fam.point(t)?.w_theta.clone())
}

/// `W_X(x|x′) = Σ_y W(x,y|x′,y′)` for a joint chain on `X × Y` whose state
/// `(x, y)` has index `x·|Y| + y`. Fails when the sum depends on `y′`.
pub fn marginalize_non_hidden(
    joint: &TransitionMatrix,
    nx: usize,
    ny: usize,
) -> Result<TransitionMatrix> {
    if nx * ny != joint.dim() || nx == 0 || ny == 0 {
        return Err(Error::DimensionMismatch {
            expected: joint.dim(),
            got: nx * ny,
        });
    }
    let mut out = DMatrix::<f64>::zeros(nx, nx);
    for xp in 0..nx {
        for yp in 0..ny {
            let col = xp * ny + yp;
            for x in 0..nx {
                let s: f64 = (0..ny).map(|y| joint.get(x * ny + y, col)).sum();
                if yp == 0 {
                    out[(x, xp)] = s;
                } else {
                    let deviation = (s - out[(x, xp)]).abs();
                    if deviation > HIDDEN_TOL {
                        return Err(Error::HiddenChain { col, deviation });
                    }
                }
            }
        }
    }
    TransitionMatrix::from_matrix(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenyiMargin {
    pub s: f64,
    pub joint: f64,
    pub marginal: f64,
    pub margin: f64,
}

/// Data-processing comparison between a joint pair and its `X` marginals.
#[derive(Debug, Clone, PartialEq)]
pub struct IpiReport {
    pub joint: f64,
    pub marginal: f64,
    pub margin: f64,
    pub renyi: Vec<RenyiMargin>,
}

impl IpiReport {
    pub fn min_margin(&self) -> f64 {
        self.renyi.iter().map(|r| r.margin).fold(self.margin, f64::min)
    }
}

pub fn ipi_check(
    w_joint: &TransitionMatrix,
    v_joint: &TransitionMatrix,
    nx: usize,
    ny: usize,
    s_list: &[f64],
) -> Result<IpiReport> {
    let wx = marginalize_non_hidden(w_joint, nx, ny)?;
    let vx = marginalize_non_hidden(v_joint, nx, ny)?;
    let joint_pair = DivergencePair::new(w_joint.clone(), v_joint.clone())?;
    let marg_pair = DivergencePair::new(wx, vx)?;
    let joint = joint_pair.relative_entropy()?;
    let marginal = marg_pair.relative_entropy()?;
    let mut renyi = Vec::with_capacity(s_list.len());
    for &s in s_list {
        if !(s > -1.0) || s == 0.0 {
            return Err(Error::OutOfRange {
                what: "Renyi order s",
                value: s,
                lo: -1.0,
                hi: f64::INFINITY,
            });
        }
        let j = joint_pair.renyi(s)?;
        let m = marg_pair.renyi(s)?;
        renyi.push(RenyiMargin {
            s,
            joint: j,
            marginal: m,
            margin: j - m,
        });
    }
    Ok(IpiReport {
        joint,
        marginal,
        margin: joint - marginal,
        renyi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::validate;
    use crate::expfamily::iid_family;

    fn chain_a() -> TransitionMatrix {
        validate(&[vec![0.7, 0.4], vec![0.3, 0.6]]).unwrap()
    }

    fn chain_b() -> TransitionMatrix {
        validate(&[vec![0.6, 0.3], vec![0.4, 0.7]]).unwrap()
    }

    fn family_a() -> TiltedFamily {
        let w = chain_a();
        let pi = chain::stationary(&w).unwrap();
        TiltedFamily::new(w, GeneratorSpec::indicator(2, 1), pi).unwrap()
    }

    fn ht_family() -> TiltedFamily {
        let (w0, w1) = (chain_a(), chain_b());
        let g = GeneratorSpec::from_fn(2, |x, xb| (w1.get(x, xb) / w0.get(x, xb)).ln(), "llr");
        let pi = chain::stationary(&w0).unwrap();
        TiltedFamily::new(w0, g, pi).unwrap()
    }

    /// Log of the larger root of the characteristic polynomial of a 2×2 matrix.
    fn log_perron_2x2(m: [[f64; 2]; 2]) -> f64 {
        let tr = m[0][0] + m[1][1];
        let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        ((tr + (tr * tr - 4.0 * det).sqrt()) / 2.0).ln()
    }

    #[test]
    fn varphi_examples() {
        let pair = DivergencePair::new(chain_a(), chain_a()).unwrap();
        for s in [-0.5, 0.5, 2.0] {
            assert!(pair.varphi(1.0 + s).unwrap().abs() < 1e-12);
        }
        let pair = DivergencePair::new(chain_a(), chain_b()).unwrap();
        assert!(pair.varphi(1.0).unwrap().abs() < 1e-12);
        let (a, b) = (chain_a(), chain_b());
        let m = [
            [a.get(0, 0).powi(2) / b.get(0, 0), a.get(0, 1).powi(2) / b.get(0, 1)],
            [a.get(1, 0).powi(2) / b.get(1, 0), a.get(1, 1).powi(2) / b.get(1, 1)],
        ];
        assert!((pair.varphi(2.0).unwrap() - log_perron_2x2(m)).abs() < 1e-12);
    }

    #[test]
    fn support_mismatch() {
        let w = validate(&[vec![0.5, 1.0], vec![0.5, 0.0]]).unwrap();
        assert!(matches!(
            DivergencePair::new(w, chain_a()),
            Err(Error::SupportMismatch)
        ));
    }

    #[test]
    fn relative_entropy_examples() {
        let pair = DivergencePair::new(chain_a(), chain_a()).unwrap();
        assert!(pair.relative_entropy().unwrap().abs() < 1e-12);
        let pair = DivergencePair::new(chain_a(), chain_b()).unwrap();
        let d = pair.relative_entropy().unwrap();
        assert!(d > 0.0);
        assert!((d - pair.relative_entropy_derivative().unwrap()).abs() < 1e-7);

        let (p, q) = ([0.2, 0.5, 0.3], [0.4, 0.4, 0.2]);
        let pair = DivergencePair::new(
            TransitionMatrix::iid(&p).unwrap(),
            TransitionMatrix::iid(&q).unwrap(),
        )
        .unwrap();
        let kl: f64 = p.iter().zip(&q).map(|(a, b)| a * (a / b).ln()).sum();
        assert!((pair.relative_entropy().unwrap() - kl).abs() < 1e-12);
    }

    #[test]
    fn renyi_examples() {
        let pair = DivergencePair::new(chain_a(), chain_b()).unwrap();
        let d = pair.relative_entropy().unwrap();
        assert!((pair.renyi(1e-6).unwrap() - d).abs() < 1e-5);
        let ss = [-0.5, -0.1, 0.1, 0.5, 1.0, 2.0];
        let vals: Vec<f64> = ss.iter().map(|&s| pair.renyi(s).unwrap()).collect();
        assert!(vals.windows(2).all(|w| w[1] > w[0]), "{vals:?}");
        let same = DivergencePair::new(chain_b(), chain_b()).unwrap();
        assert!(same.renyi(0.7).unwrap().abs() < 1e-12);
    }

    #[test]
    fn family_closed_forms_match_materialized() {
        let fam = family_a();
        for &(t, tb, s) in &[(0.5, -0.3, 0.7), (1.2, 0.4, -0.4), (-0.8, 0.0, 2.0)] {
            let fd = family_divergences(&fam, t, tb, s).unwrap();
            let pair = DivergencePair::new(
                fam.point(t).unwrap().w_theta.clone(),
                fam.point(tb).unwrap().w_theta.clone(),
            )
            .unwrap();
            assert!((fd.d - pair.relative_entropy().unwrap()).abs() < 1e-7);
            assert!((fd.renyi - pair.renyi(s).unwrap()).abs() < 1e-7);
        }
        let z = family_divergences(&fam, 0.3, 0.3, 0.5).unwrap();
        assert_eq!((z.d, z.renyi), (0.0, 0.0));
    }

    #[test]
    fn fisher_limits() {
        let fam = family_a();
        let (t, delta) = (0.4, 1e-3);
        let fi = fam.fisher(t).unwrap();
        let d = family_relative_entropy(&fam, t + delta, t).unwrap() / (delta * delta);
        assert!(((d - fi / 2.0) / (fi / 2.0)).abs() < 0.01);
        let s = 0.8;
        let r = family_renyi(&fam, t + delta, t, s).unwrap() / (delta * delta);
        let target = (1.0 + s) * fi / 2.0;
        assert!(((r - target) / target).abs() < 0.01);
    }

    #[test]
    fn legendre_examples() {
        let fam = family_a();
        let l = legendre(&fam, fam.eta(0.0).unwrap()).unwrap();
        assert_eq!((l.value, l.theta_star), (0.0, 0.0));

        let l = legendre(&fam, 0.6).unwrap();
        let d = family_relative_entropy(&fam, l.theta_star, 0.0).unwrap();
        assert!((l.value - d).abs() < 1e-8);
        let grid_max = linspace(0.0, 5.0, 5001)
            .into_iter()
            .map(|t| t * 0.6 - fam.phi(t).unwrap())
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(grid_max <= l.value + 1e-12 && l.value - grid_max < 1e-6);
        let inf = legendre_inf_form(&fam, 0.6).unwrap();
        assert!((inf - l.value).abs() < 1e-4, "{inf} vs {}", l.value);

        let lower = legendre(&fam, 0.3).unwrap();
        assert!(lower.theta_star < 0.0 && lower.value > 0.0);
        let inf = legendre_inf_form(&fam, 0.3).unwrap();
        assert!((inf - lower.value).abs() < 1e-4);
    }

    #[test]
    fn theta_hat_examples() {
        let fam = ht_family();
        let d01 = DivergencePair::new(chain_a(), chain_b())
            .unwrap()
            .relative_entropy()
            .unwrap();
        assert_eq!(theta_hat(&fam, d01).unwrap(), 0.0);
        assert_eq!(theta_hat(&fam, 0.0).unwrap(), 1.0);
        let r = d01 / 3.0;
        let t = theta_hat(&fam, r).unwrap();
        let p = fam.point(t).unwrap();
        assert!(((t - 1.0) * p.eta - p.phi - r).abs() < 1e-9);
        assert!(matches!(theta_hat(&fam, 2.0 * d01), Err(Error::OutOfRange { .. })));
        assert!(matches!(theta_hat(&family_a(), 0.01), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn hoeffding_examples() {
        let fam = ht_family();
        let d10 = DivergencePair::new(chain_b(), chain_a())
            .unwrap()
            .relative_entropy()
            .unwrap();
        let h = hoeffding_exponent(&fam, 0.0).unwrap();
        assert!((h.value - d10).abs() < 1e-9);
        let d01 = -fam.eta(0.0).unwrap();
        let h = hoeffding_exponent(&fam, d01).unwrap();
        assert!(h.value.abs() < 1e-12);
        let h = hoeffding_exponent(&fam, d01 / 2.0).unwrap();
        assert!(h.spread() < 1e-5, "{h:?}");
    }

    #[test]
    fn m_projection_examples() {
        let fam = family_a();
        let a0 = fam.eta(0.0).unwrap();
        let m = m_projection(&fam, a0, &chain_a()).unwrap();
        assert_eq!(m.theta_star, 0.0);
        assert!(m.pythagorean_residual < 1e-12);

        let a = 0.55;
        let test = tilt_to_mean(&chain_b(), fam.generator(), a).unwrap();
        let m = m_projection(&fam, a, &test).unwrap();
        assert!(m.pythagorean_residual <= 1e-6, "{m:?}");
        let v_star = fam.point(m.theta_star).unwrap().w_theta.clone();
        let d_wv = DivergencePair::new(test, chain_a()).unwrap().relative_entropy().unwrap();
        let d_vsv = DivergencePair::new(v_star, chain_a()).unwrap().relative_entropy().unwrap();
        assert!(d_wv >= d_vsv);
    }

    fn kron(a: &TransitionMatrix, b: &TransitionMatrix) -> TransitionMatrix {
        TransitionMatrix::from_matrix(a.matrix().kronecker(b.matrix())).unwrap()
    }

    #[test]
    fn marginalize_examples() {
        let joint = kron(&chain_a(), &chain_b());
        let wx = marginalize_non_hidden(&joint, 2, 2).unwrap();
        assert!((wx.matrix() - chain_a().matrix()).amax() < 1e-15);

        // From x′ = 0 the mass landing on x = 0 depends on y′.
        let hidden = validate(&[
            vec![0.35, 0.5, 0.2, 0.2],
            vec![0.35, 0.3, 0.2, 0.2],
            vec![0.15, 0.1, 0.3, 0.3],
            vec![0.15, 0.1, 0.3, 0.3],
        ])
        .unwrap();
        assert!(matches!(
            marginalize_non_hidden(&hidden, 2, 2),
            Err(Error::HiddenChain { .. })
        ));
    }

    #[test]
    fn ipi_examples() {
        let joint = kron(&chain_a(), &chain_b());
        let r = ipi_check(&joint, &joint, 2, 2, &[0.5]).unwrap();
        assert!(r.margin.abs() < 1e-12 && r.min_margin().abs() < 1e-12);

        let w = kron(&chain_a(), &chain_b());
        let v = kron(&chain_b(), &chain_b());
        let r = ipi_check(&w, &v, 2, 2, &[-0.5, 0.5, 1.0, 2.0]).unwrap();
        assert!(r.margin.abs() < 1e-9);
        for m in &r.renyi {
            assert!(m.margin.abs() < 1e-9);
        }
    }

    #[test]
    fn iid_relative_entropy_of_tilts() {
        let fam = iid_family(&[0.3, 0.7], &[1.0, -1.0]).unwrap();
        let t = 0.6;
        let p = fam.point(t).unwrap();
        let pt = [p.w_theta.get(0, 0), p.w_theta.get(1, 0)];
        let kl = pt[0] * (pt[0] / 0.3).ln() + pt[1] * (pt[1] / 0.7).ln();
        assert!((family_relative_entropy(&fam, t, 0.0).unwrap() - kl).abs() < 1e-12);
    }
}
