//! Testing `W₀ⁿ×P₀` against `W₁ⁿ×P₁` from one observed path `X₁ … Xₙ₊₁`.
//!
//! The quantity of interest is the optimal second-kind error
//!
//! ```text
//! β_ε = min { P₀(Sᶜ) : P₁(S) ≤ ε }
//! ```
//!
//! studied through the family with generator `g = log(W₁/W₀)` and initial
//! weight `h = log(P₁/P₀)`, so that `g̃ⁿ` is the log-likelihood ratio of the
//! whole path, `W_{θ=0} = W₀`, `W_{θ=1} = W₁` and `φ(0) = φ(1) = 0`.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::chain::{Distribution, TransitionMatrix};
use crate::divergence::{family_relative_entropy, family_renyi, theta_hat, DivergencePair};
use crate::error::{Error, Result};
use crate::expfamily::{check_distribution, GeneratorSpec, TiltedFamily};
use crate::optimize::{golden_min, grid_max_1d, grid_min_2d, linspace, log_grid};
use crate::oracle::{enumerate, PathDistribution};
use crate::tail::{log1m_exp, Optimizer, TailOptions};

/// Distance kept between `θ` and one in the searches over `[0, 1)`.
pub const THETA_ONE_GAP: f64 = 1e-6;

/// Two hypotheses and the family joining them.
#[derive(Debug, Clone)]
pub struct HTFamily {
    pub w0: TransitionMatrix,
    pub w1: TransitionMatrix,
    pub p0: Distribution,
    pub p1: Distribution,
    pub fam: TiltedFamily,
    /// `D(W₀‖W₁)`.
    pub d01: f64,
    /// `D(W₁‖W₀)`.
    pub d10: f64,
}

pub fn build_ht(
    w0: &TransitionMatrix,
    p0: &[f64],
    w1: &TransitionMatrix,
    p1: &[f64],
) -> Result<HTFamily> {
    if w0.dim() != w1.dim() {
        return Err(Error::DimensionMismatch {
            expected: w0.dim(),
            got: w1.dim(),
        });
    }
    if !w0.same_support(w1) {
        return Err(Error::SupportMismatch);
    }
    let d = w0.dim();
    check_distribution(p0, d)?;
    check_distribution(p1, d)?;
    if p0.iter().chain(p1).any(|&p| p <= 0.0) {
        return Err(Error::InvalidInput(
            "initial distributions must have full support".into(),
        ));
    }
    let gen = GeneratorSpec::from_fn(
        d,
        |x, xb| {
            if w0.in_support(x, xb) {
                (w1.get(x, xb) / w0.get(x, xb)).ln()
            } else {
                0.0
            }
        },
        "log W1/W0",
    )
    .with_h(p0.iter().zip(p1).map(|(a, b)| (b / a).ln()).collect());
    let fam = TiltedFamily::new(w0.clone(), gen, p0.to_vec())?;

    let phi1 = fam.phi(1.0)?;
    if phi1.abs() > 1e-10 {
        return Err(Error::ConsistencyFailure {
            first: phi1,
            second: 0.0,
        });
    }
    let end = fam.point(1.0)?;
    let dev = (end.w_theta.matrix() - w1.matrix()).amax();
    if dev > 1e-9 {
        return Err(Error::ConsistencyFailure {
            first: dev,
            second: 0.0,
        });
    }
    let d01 = DivergencePair::new(w0.clone(), w1.clone())?.relative_entropy()?;
    let d10 = DivergencePair::new(w1.clone(), w0.clone())?.relative_entropy()?;
    Ok(HTFamily {
        w0: w0.clone(),
        w1: w1.clone(),
        p0: p0.to_vec(),
        p1: p1.to_vec(),
        fam,
        d01,
        d10,
    })
}

/// How the first-kind error is constrained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constraint {
    /// `P₁(S) ≤ e^{−nr}`.
    Exponent(f64),
    /// `P₁(S) ≤ ε`.
    Level(f64),
}

impl Constraint {
    pub fn exponent(self, n: usize) -> f64 {
        match self {
            Constraint::Exponent(r) => r,
            Constraint::Level(eps) => -eps.ln() / n as f64,
        }
    }

    pub fn level(self, n: usize) -> f64 {
        match self {
            Constraint::Exponent(r) => (-(n as f64) * r).exp(),
            Constraint::Level(eps) => eps,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HTBoundReport {
    pub n: usize,
    pub constraint: Constraint,
    pub lower_neg_log_beta: f64,
    pub upper_neg_log_beta: f64,
    pub optimizer: Optimizer,
    pub feasible: bool,
    pub exact_neg_log_beta: Option<f64>,
}

fn check_r(ht: &HTFamily, r: f64) -> Result<()> {
    let slack = 1e-12 * ht.d01.max(1.0);
    if r >= -slack && r <= ht.d01 + slack {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "exponent r",
            value: r,
            lo: 0.0,
            hi: ht.d01,
        })
    }
}

/// `sup_{0 ≤ θ < 1} [n(−θr − φ(θ)) − δ̄(θ)]/(1 − θ)`, a lower bound on
/// `−log β_{e^{−nr}}` attained by likelihood-ratio threshold tests.
pub fn ht_lower(ht: &HTFamily, n: usize, r: f64) -> Result<f64> {
    check_r(ht, r)?;
    let nn = n as f64;
    let grid = linspace(0.0, 1.0 - THETA_ONE_GAP, 201);
    let best = grid_max_1d(
        |t| match ht.fam.point(t) {
            Ok(p) => (nn * (-t * r - p.phi) - p.delta_upper) / (1.0 - t),
            Err(_) => f64::NAN,
        },
        &grid,
        1e-12,
    );
    Ok(best.map_or(0.0, |(_, v)| v))
}

struct HtObjective<'a> {
    ht: &'a HTFamily,
    n: f64,
    r: f64,
    theta_hat: f64,
}

impl HtObjective<'_> {
    /// Exponent of `2e^{E}` in the log term for the shift `θ′ ≤ θ`.
    fn exponent(&self, theta: f64, shifted: f64) -> Result<f64> {
        let fam = &self.ht.fam;
        let bar = (theta - shifted) / (1.0 - theta);
        let p = fam.point(theta)?;
        let q = fam.point(shifted)?;
        Ok(
            self.n * (q.phi - (1.0 + bar) * p.phi - bar * self.r) / (1.0 + bar) - p.delta_lower
                + q.delta_upper / (1.0 + bar),
        )
    }

    fn hat_exponent(&self, theta: f64) -> Result<f64> {
        let fam = &self.ht.fam;
        let p = fam.point(theta)?;
        let th = self.theta_hat;
        let d = family_relative_entropy(fam, th, theta)?;
        Ok(-self.n * d - p.delta_lower + (1.0 - theta) * fam.point(th)?.delta_upper / (1.0 - th))
    }

    fn best_shift(&self, theta: f64, free: bool) -> (f64, f64) {
        let base = self.hat_exponent(theta).unwrap_or(f64::INFINITY);
        if !free {
            return (self.theta_hat, base);
        }
        let lo = self.theta_hat - 0.5 * (theta - self.theta_hat);
        let (t, v) = golden_min(
            |t| self.exponent(theta, t).unwrap_or(f64::INFINITY),
            lo,
            theta,
            1e-10,
        );
        if v < base {
            (t, v)
        } else {
            (self.theta_hat, base)
        }
    }

    fn value(&self, s: f64, theta: f64, exponent: f64) -> f64 {
        let fam = &self.ht.fam;
        let renyi = match family_renyi(fam, theta, 0.0, s) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        let (pu, pl) = match (fam.point((1.0 + s) * theta), fam.point(theta)) {
            (Ok(pu), Ok(pl)) => (pu, pl),
            _ => return f64::INFINITY,
        };
        let log_term = log1m_exp(exponent + std::f64::consts::LN_2);
        if !log_term.is_finite() {
            return f64::INFINITY;
        }
        self.n * renyi + (pu.delta_upper - (1.0 + s) * pl.delta_lower) / s
            - (1.0 + s) / s * log_term
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HtUpper {
    pub value: f64,
    pub optimizer: Optimizer,
    pub feasible: bool,
}

/// Upper bound on `−log β_{e^{−nr}}` (valid for every test), minimised over
/// `s > 0` and `θ ∈ (θ̂(r), 1)`.
pub fn ht_upper(ht: &HTFamily, n: usize, r: f64, opts: &TailOptions) -> Result<HtUpper> {
    check_r(ht, r)?;
    let th = theta_hat(&ht.fam, r.clamp(0.0, ht.d01))?;
    let infeasible = HtUpper {
        value: f64::INFINITY,
        optimizer: Optimizer {
            s: f64::NAN,
            theta: f64::NAN,
            theta_shift: th,
        },
        feasible: false,
    };
    if th >= 1.0 {
        return Ok(infeasible);
    }
    let obj = HtObjective {
        ht,
        n: n as f64,
        r,
        theta_hat: th,
    };
    let width = (1.0 - th) * (1.0 - THETA_ONE_GAP);
    let thetas: Vec<f64> = log_grid(-5.0, 0.0, opts.theta_points)
        .into_iter()
        .map(|u| th + width * u)
        .collect();
    let log_s = linspace(opts.s_exponents.0, opts.s_exponents.1, opts.s_points);
    let mut cache = std::collections::HashMap::new();
    let mut shift_for = |theta: f64| -> (f64, f64) {
        *cache
            .entry(theta.to_bits())
            .or_insert_with(|| obj.best_shift(theta, opts.free_shift))
    };
    let best = grid_min_2d(
        |ls, theta| {
            let (_, e) = shift_for(theta);
            obj.value(10f64.powf(ls), theta, e)
        },
        &log_s,
        &thetas,
        opts.refine_rounds,
    );
    Ok(match best {
        Some(m) => HtUpper {
            value: m.value,
            optimizer: Optimizer {
                s: 10f64.powf(m.x),
                theta: m.y,
                theta_shift: shift_for(m.y).0,
            },
            feasible: true,
        },
        None => infeasible,
    })
}

/// Both bounds for the given constraint.
pub fn ht_bounds(
    ht: &HTFamily,
    n: usize,
    constraint: Constraint,
    opts: &TailOptions,
) -> Result<HTBoundReport> {
    let r = constraint.exponent(n);
    let lower = ht_lower(ht, n, r)?;
    let upper = ht_upper(ht, n, r, opts)?;
    Ok(HTBoundReport {
        n,
        constraint,
        lower_neg_log_beta: lower,
        upper_neg_log_beta: upper.value,
        optimizer: upper.optimizer,
        feasible: upper.feasible,
        exact_neg_log_beta: None,
    })
}

/// `n·D(W₀‖W₁) − n^{1−t}·√(2φ″(0)r)`.
pub fn md_expansion(ht: &HTFamily, n: usize, t: f64, r: f64) -> Result<f64> {
    if !(t > 0.0 && t < 0.5) {
        return Err(Error::OutOfRange {
            what: "moderate-deviation exponent t",
            value: t,
            lo: 0.0,
            hi: 0.5,
        });
    }
    if !(r >= 0.0) {
        return Err(Error::OutOfRange {
            what: "exponent r",
            value: r,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let nn = n as f64;
    Ok(md_expansion_value(nn, ht.d01, ht.fam.fisher(0.0)?, t, r))
}

/// The expansion from plain numbers.
pub fn md_expansion_value(n: f64, d01: f64, fisher0: f64, t: f64, r: f64) -> f64 {
    d01 * n - (2.0 * fisher0 * r).sqrt() * n.powf(1.0 - t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpectrumMode {
    /// Exact law of the log-likelihood ratio; fails over budget.
    Exact { budget: u128 },
    /// Gaussian law with mean `n·D(W₁‖W₀)` and variance `n·φ″(1)`.
    Gaussian,
    /// Exact when within budget, Gaussian otherwise.
    Auto { budget: u128 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoSpectrumBounds {
    pub lower: f64,
    pub upper: f64,
    /// Set when the Gaussian law was used; such values carry no guarantee.
    pub approximate: bool,
}

/// Bounds from the law of the log-likelihood ratio `L` under `P₁`, given as
/// `(value, P₁ mass)` atoms sorted ascending:
/// `lower = sup{a : P₁{L < a} ≤ ε}`,
/// `upper = inf{a − log δ : P₁{L < a} ≥ ε + δ, δ > 0}`.
pub fn info_spectrum_from_atoms(atoms: &[(f64, f64)], epsilon: f64) -> Result<InfoSpectrumBounds> {
    check_level(epsilon, false)?;
    let mut cum = 0.0;
    let mut lower = f64::NAN;
    let mut upper = f64::INFINITY;
    for &(v, p) in atoms {
        cum += p;
        if cum > epsilon {
            if lower.is_nan() {
                lower = v;
            }
            upper = upper.min(v - (cum - epsilon).ln());
        }
    }
    if lower.is_nan() {
        return Err(Error::InvalidInput("atoms carry no mass above the level".into()));
    }
    Ok(InfoSpectrumBounds {
        lower,
        upper,
        approximate: false,
    })
}

fn check_level(epsilon: f64, closed: bool) -> Result<()> {
    let ok = if closed {
        (0.0..=1.0).contains(&epsilon)
    } else {
        epsilon > 0.0 && epsilon < 1.0
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "level epsilon",
            value: epsilon,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Law of the whole-path log-likelihood ratio with both path measures.
pub fn enumerate_ht(ht: &HTFamily, n: usize, budget: u128) -> Result<PathDistribution> {
    enumerate(
        &ht.w0,
        &ht.p0,
        ht.fam.generator(),
        n,
        Some((&ht.w1, &ht.p1)),
        budget,
    )
}

fn p1_atoms(dist: &PathDistribution) -> Vec<(f64, f64)> {
    dist.atoms
        .iter()
        .map(|a| (a.value, a.prob_w1.unwrap_or(0.0)))
        .collect()
}

pub fn info_spectrum_bounds(
    ht: &HTFamily,
    n: usize,
    epsilon: f64,
    mode: SpectrumMode,
) -> Result<InfoSpectrumBounds> {
    check_level(epsilon, false)?;
    let exact = |budget| -> Result<InfoSpectrumBounds> {
        let dist = enumerate_ht(ht, n, budget)?;
        info_spectrum_from_atoms(&p1_atoms(&dist), epsilon)
    };
    match mode {
        SpectrumMode::Exact { budget } => exact(budget),
        SpectrumMode::Auto { budget } => match exact(budget) {
            Err(Error::BudgetExceeded { .. }) => gaussian_spectrum(ht, n, epsilon),
            other => other,
        },
        SpectrumMode::Gaussian => gaussian_spectrum(ht, n, epsilon),
    }
}

fn gaussian_spectrum(ht: &HTFamily, n: usize, epsilon: f64) -> Result<InfoSpectrumBounds> {
    let nn = n as f64;
    let mean = nn * ht.d10;
    let sd = (nn * ht.fam.fisher(1.0)?).sqrt();
    let std = Normal::standard();
    let lower = mean + sd * std.inverse_cdf(epsilon);
    let room = 1.0 - epsilon;
    let grid: Vec<f64> = linspace(1e-9, 1.0 - 1e-9, 400)
        .into_iter()
        .map(|u| u * room)
        .collect();
    let upper = grid_max_1d(
        |delta| -(mean + sd * std.inverse_cdf(epsilon + delta) - delta.ln()),
        &grid,
        1e-12,
    )
    .map_or(f64::INFINITY, |(_, v)| -v);
    Ok(InfoSpectrumBounds {
        lower,
        upper,
        approximate: true,
    })
}

/// `n·D(W₁‖W₀) + √n·√φ″(1)·Φ⁻¹(ε)`.
pub fn stein_strassen(ht: &HTFamily, n: usize, epsilon: f64) -> Result<f64> {
    check_level(epsilon, false)?;
    let nn = n as f64;
    let q = Normal::standard().inverse_cdf(epsilon);
    Ok(nn * ht.d10 + nn.sqrt() * ht.fam.fisher(1.0)?.sqrt() * q)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactBeta {
    pub beta: f64,
    /// Likelihood-ratio value of the boundary atom.
    pub threshold: f64,
    /// Fraction of the boundary atom kept in the acceptance region.
    pub randomization: f64,
}

/// Optimal `β_ε` by enumeration: atoms are added to the acceptance region
/// in increasing likelihood ratio until their `P₁` mass reaches `ε`, the
/// boundary atom split at random (or dropped when `randomized` is false).
pub fn exact_beta(
    ht: &HTFamily,
    n: usize,
    epsilon: f64,
    budget: u128,
    randomized: bool,
) -> Result<ExactBeta> {
    check_level(epsilon, true)?;
    let dist = enumerate_ht(ht, n, budget)?;
    Ok(beta_from_atoms(&dist, epsilon, randomized))
}

pub fn beta_from_atoms(dist: &PathDistribution, epsilon: f64, randomized: bool) -> ExactBeta {
    let atoms = &dist.atoms;
    if epsilon >= 1.0 {
        return ExactBeta {
            beta: 0.0,
            threshold: atoms.last().map_or(f64::INFINITY, |a| a.value),
            randomization: 1.0,
        };
    }
    let mut cum = 0.0;
    for (k, a) in atoms.iter().enumerate() {
        let p1 = a.prob_w1.unwrap_or(0.0);
        if cum + p1 <= epsilon {
            cum += p1;
            continue;
        }
        let gamma = if randomized && p1 > 0.0 {
            ((epsilon - cum) / p1).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let rest: f64 = atoms[k + 1..].iter().map(|b| b.prob_w0).sum();
        return ExactBeta {
            beta: rest + (1.0 - gamma) * a.prob_w0,
            threshold: a.value,
            randomization: gamma,
        };
    }
    ExactBeta {
        beta: 0.0,
        threshold: atoms.last().map_or(f64::INFINITY, |a| a.value),
        randomization: 1.0,
    }
}
