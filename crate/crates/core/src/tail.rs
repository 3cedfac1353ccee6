//! Finite-length bounds on `−log P{g̃ⁿ ≥ na}` (and the mirror lower tail).
//!
//! The lower bound is the Chernoff bound with the upper CGF correction,
//! evaluated at its stationary point `θ* = η⁻¹(a)`:
//!
//! ```text
//! n·D(W_θ*‖W₀) − δ̄(θ*)
//! ```
//!
//! The upper bound comes from a change of measure to `W_θ` plus Hölder's
//! inequality with exponent `1 + s`:
//!
//! ```text
//! n·D_{1+s}(W_θ‖W₀) + [δ̄((1+s)θ) − (1+s)·δ̲(θ)]/s
//!     − (1+s)/s · log(1 − exp(−n·D(W_θ*‖W_θ) + δ̄(θ*) − δ̲(θ)))
//! ```
//!
//! minimised over `s > 0` and `θ` beyond `θ*`. The exponent of the last term
//! may also use any `θ′ = θ + θ̄` between `θ` and the mean side instead of
//! `θ*`; the evaluator searches that extra freedom when asked to.

use std::fmt;

use crate::divergence::{family_relative_entropy, family_renyi, legendre};
use crate::error::{Error, Result};
use crate::expfamily::{asymptotic_variance, TiltedFamily};
use crate::optimize::{golden_max, grid_min_2d, log_grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    /// `P{g̃ⁿ ≥ na}` with `a` above the mean.
    Upper,
    /// `P{g̃ⁿ ≤ na}` with `a` below the mean.
    Lower,
}

impl Side {
    fn sign(self) -> f64 {
        match self {
            Side::Upper => 1.0,
            Side::Lower => -1.0,
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Upper => "upper",
            Side::Lower => "lower",
        })
    }
}

impl std::str::FromStr for Side {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "upper" | "upper_tail" => Ok(Side::Upper),
            "lower" | "lower_tail" => Ok(Side::Lower),
            other => Err(Error::InvalidInput(format!("unknown side {other:?}"))),
        }
    }
}

/// Search grids for the upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct TailOptions {
    /// Exponents of the `s` grid: `10^lo ..= 10^hi`.
    pub s_exponents: (f64, f64),
    pub s_points: usize,
    pub theta_points: usize,
    pub refine_rounds: usize,
    /// Also optimise the free shift `θ̄` in the log term.
    pub free_shift: bool,
}

impl Default for TailOptions {
    fn default() -> Self {
        Self {
            s_exponents: (-4.0, 3.0),
            s_points: 71,
            theta_points: 101,
            refine_rounds: 3,
            free_shift: true,
        }
    }
}

impl TailOptions {
    /// Coarser grids for sweeps over many `n`.
    pub fn fast() -> Self {
        Self {
            s_points: 36,
            theta_points: 41,
            refine_rounds: 2,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Optimizer {
    pub s: f64,
    pub theta: f64,
    /// Parameter used in the exponent of the log term (`θ*` unless shifted).
    pub theta_shift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpperBound {
    pub value: f64,
    pub optimizer: Optimizer,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailBoundReport {
    pub n: usize,
    pub a: f64,
    pub side: Side,
    pub lower_bound_on_neg_log: f64,
    pub upper_bound_on_neg_log: f64,
    pub optimizer: Optimizer,
    pub feasible: bool,
    pub exact_neg_log: Option<f64>,
}

fn check_side(fam: &TiltedFamily, a: f64, side: Side) -> Result<()> {
    let mean = fam.eta(0.0)?;
    let ok = match side {
        Side::Upper => a > mean,
        Side::Lower => a < mean,
    };
    if ok {
        Ok(())
    } else {
        Err(Error::WrongSide { a, mean })
    }
}

/// `n·D(W_θ*‖W₀) − δ̄(θ*)`, a lower bound on `−log` of the tail probability.
pub fn tail_lower(fam: &TiltedFamily, n: usize, a: f64, side: Side) -> Result<f64> {
    check_side(fam, a, side)?;
    let l = legendre(fam, a)?;
    let p = fam.point(l.theta_star)?;
    Ok(n as f64 * l.value - p.delta_upper)
}

/// `log(1 − eˣ)` for `x < 0`, `−∞` otherwise.
pub(crate) fn log1m_exp(x: f64) -> f64 {
    if x >= 0.0 {
        f64::NEG_INFINITY
    } else if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

struct UpperObjective<'a> {
    fam: &'a TiltedFamily,
    n: f64,
    a: f64,
    side: Side,
    theta_star: f64,
    delta_upper_star: f64,
}

impl UpperObjective<'_> {
    /// Exponent of the log term for the shift `θ′`:
    /// `n[(θ′ − θ)a − φ(θ′) + φ(θ)] − δ̄(θ′) + δ̲(θ)`, larger is better.
    fn exponent(&self, theta: f64, theta_shift: f64) -> Result<f64> {
        let p = self.fam.point(theta)?;
        let q = self.fam.point(theta_shift)?;
        Ok(self.n * ((theta_shift - theta) * self.a - q.phi + p.phi) - q.delta_upper
            + p.delta_lower)
    }

    fn star_exponent(&self, theta: f64) -> Result<f64> {
        let p = self.fam.point(theta)?;
        let d = family_relative_entropy(self.fam, self.theta_star, theta)?;
        Ok(self.n * d - self.delta_upper_star + p.delta_lower)
    }

    /// Best shift between `θ` and `θ*` (and slightly past `θ*`).
    fn best_shift(&self, theta: f64, free: bool) -> (f64, f64) {
        let base = self.star_exponent(theta).unwrap_or(f64::NEG_INFINITY);
        if !free {
            return (self.theta_star, base);
        }
        let overshoot = 0.5 * (theta - self.theta_star);
        let far = self.theta_star - overshoot;
        let (t, v) = golden_max(
            |t| self.exponent(theta, t).unwrap_or(f64::NEG_INFINITY),
            far.min(theta),
            far.max(theta),
            1e-10,
        );
        if v > base {
            (t, v)
        } else {
            (self.theta_star, base)
        }
    }

    fn value(&self, s: f64, theta: f64, exponent: f64) -> f64 {
        let renyi = match family_renyi(self.fam, theta, 0.0, s) {
            Ok(v) => v,
            Err(_) => return f64::INFINITY,
        };
        let (pu, pl) = match (self.fam.point((1.0 + s) * theta), self.fam.point(theta)) {
            (Ok(pu), Ok(pl)) => (pu, pl),
            _ => return f64::INFINITY,
        };
        let log_term = log1m_exp(-exponent);
        if !log_term.is_finite() {
            return f64::INFINITY;
        }
        self.n * renyi + (pu.delta_upper - (1.0 + s) * pl.delta_lower) / s
            - (1.0 + s) / s * log_term
    }
}

/// Upper bound on `−log` of the tail probability, minimised over `(s, θ)`.
/// Returns an infeasible report with value `+∞` when no grid pair gives a
/// finite bound.
pub fn tail_upper(
    fam: &TiltedFamily,
    n: usize,
    a: f64,
    side: Side,
    opts: &TailOptions,
) -> Result<UpperBound> {
    check_side(fam, a, side)?;
    let theta_star = fam.eta_inverse(a)?;
    let obj = UpperObjective {
        fam,
        n: n as f64,
        a,
        side,
        theta_star,
        delta_upper_star: fam.point(theta_star)?.delta_upper,
    };
    let span = 3.0 * theta_star.abs().max(1.0);
    let sign = obj.side.sign();
    let limit = sign * fam.theta_max();
    let thetas: Vec<f64> = {
        let mut g: Vec<f64> = log_grid(-5.0, 0.0, opts.theta_points)
            .into_iter()
            .map(|u| theta_star + sign * span * u)
            .filter(|t| sign * (t - limit) <= 0.0)
            .collect();
        g.sort_by(f64::total_cmp);
        g
    };
    let log_s: Vec<f64> = crate::optimize::linspace(opts.s_exponents.0, opts.s_exponents.1, opts.s_points);

    let mut shift_cache = std::collections::HashMap::new();
    let mut shift_for = |theta: f64| -> (f64, f64) {
        *shift_cache
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
        Some(m) => {
            let (shift, _) = shift_for(m.y);
            UpperBound {
                value: m.value,
                optimizer: Optimizer {
                    s: 10f64.powf(m.x),
                    theta: m.y,
                    theta_shift: shift,
                },
                feasible: true,
            }
        }
        None => UpperBound {
            value: f64::INFINITY,
            optimizer: Optimizer {
                s: f64::NAN,
                theta: f64::NAN,
                theta_shift: theta_star,
            },
            feasible: false,
        },
    })
}

/// Both bounds in one report.
pub fn tail_bounds(
    fam: &TiltedFamily,
    n: usize,
    a: f64,
    side: Side,
    opts: &TailOptions,
) -> Result<TailBoundReport> {
    let lower = tail_lower(fam, n, a, side)?;
    let upper = tail_upper(fam, n, a, side, opts)?;
    Ok(TailBoundReport {
        n,
        a,
        side,
        lower_bound_on_neg_log: lower,
        upper_bound_on_neg_log: upper.value,
        optimizer: upper.optimizer,
        feasible: upper.feasible,
        exact_neg_log: None,
    })
}

/// Large-deviation rate at `η(0) ± δ`.
pub fn ld_rate(fam: &TiltedFamily, delta: f64, side: Side) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::OutOfRange {
            what: "deviation delta",
            value: delta,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    let a = fam.eta(0.0)? + side.sign() * delta;
    Ok(legendre(fam, a)?.value)
}

/// Moderate-deviation rate `δ²/(2φ″(0))` for thresholds `η(0) ± δ/nᵗ`.
pub fn md_rate(fam: &TiltedFamily, t: f64, delta: f64) -> Result<f64> {
    if !(t > 0.0 && t < 0.5) {
        return Err(Error::OutOfRange {
            what: "moderate-deviation exponent t",
            value: t,
            lo: 0.0,
            hi: 0.5,
        });
    }
    if !(delta > 0.0) {
        return Err(Error::OutOfRange {
            what: "deviation delta",
            value: delta,
            lo: 0.0,
            hi: f64::INFINITY,
        });
    }
    Ok(delta * delta / (2.0 * asymptotic_variance(fam.base(), fam.generator())?))
}
