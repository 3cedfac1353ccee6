//! One-parameter exponential family of transition matrices.
//!
//! For a base chain `W` and a generator `g(x, x̄)` the family is built from
//! the entrywise tilt `W̃_θ(x|x̄) = W(x|x̄)·exp(θ·g(x, x̄))`. Its Perron
//! eigenvalue `λ_θ` gives the potential `φ(θ) = log λ_θ`, and conjugating
//! `W̃_θ` by the left Perron vector turns it back into a stochastic matrix
//! `W_θ`.
//!
//! The additive functional studied everywhere else in the crate is
//!
//! ```text
//! g̃ⁿ(X₁ … Xₙ₊₁) = Σᵢ g(Xᵢ₊₁, Xᵢ) + h(X₁),     X₁ ~ P₀
//! ```
//!
//! whose cumulant generating function `φₙ(θ)` is sandwiched by
//! `nφ(θ) + δ̲(θ) ≤ φₙ(θ) ≤ nφ(θ) + δ̄(θ)` with
//! `δ̄(θ) = log⟨v_θ, w_θ⟩`, `δ̲(θ) = δ̄(θ) − log max v_θ`,
//! `w_θ(x) = P₀(x)·exp(θ·h(x))` and `v_θ` the left Perron vector scaled to
//! have minimum one.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, RwLock};

use nalgebra::{DMatrix, DVector};

use crate::chain::{self, classify, Distribution, PerronData, TransitionMatrix};
use crate::error::{Error, Result};
use crate::optimize::bisect;

/// Natural-parameter clamp used by searches over θ.
pub const THETA_MAX: f64 = 50.0;
/// Largest `|θ·g|` allowed on the support.
pub const EXP_GUARD: f64 = 700.0;
/// Least-squares residual at or below which a generator is declared degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;

/// Two-input generator `g(x, x̄)` plus initial weight `h(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    /// `g[(x, x̄)]`; entries outside the support of the attached chain are ignored.
    pub g: DMatrix<f64>,
    pub h: Vec<f64>,
    pub label: String,
}

impl GeneratorSpec {
    pub fn new(g: &[Vec<f64>], h: Option<Vec<f64>>, label: impl Into<String>) -> Result<Self> {
        let d = g.len();
        if d == 0 {
            return Err(Error::Empty);
        }
        for (row, r) in g.iter().enumerate() {
            if r.len() != d {
                return Err(Error::NotSquare {
                    rows: d,
                    row,
                    cols: r.len(),
                });
            }
        }
        let h = h.unwrap_or_else(|| vec![0.0; d]);
        if h.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: h.len(),
            });
        }
        Ok(Self {
            g: DMatrix::from_fn(d, d, |i, j| g[i][j]),
            h,
            label: label.into(),
        })
    }

    pub fn from_fn(dim: usize, f: impl Fn(usize, usize) -> f64, label: impl Into<String>) -> Self {
        Self {
            g: DMatrix::from_fn(dim, dim, f),
            h: vec![0.0; dim],
            label: label.into(),
        }
    }

    /// `g(x, x̄) = 1{x = state}`.
    pub fn indicator(dim: usize, state: usize) -> Self {
        Self::from_fn(dim, |x, _| f64::from(x == state), format!("1{{x={state}}}"))
    }

    /// `g(x, x̄) = values[x]`, a function of the arrival state only.
    pub fn of_next_state(values: &[f64]) -> Self {
        Self::from_fn(values.len(), |x, _| values[x], "g(x)")
    }

    pub fn with_h(mut self, h: Vec<f64>) -> Self {
        self.h = h;
        self
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    #[inline]
    pub fn value(&self, x: usize, xbar: usize) -> f64 {
        self.g[(x, xbar)]
    }

    /// Same generator shifted by a constant on every pair.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            g: self.g.map(|v| v + c),
            h: self.h.clone(),
            label: format!("{}+{c}", self.label),
        }
    }

    fn check_against(&self, w: &TransitionMatrix) -> Result<()> {
        if self.dim() != w.dim() {
            return Err(Error::DimensionMismatch {
                expected: w.dim(),
                got: self.dim(),
            });
        }
        for (x, xbar) in w.support() {
            if !self.value(x, xbar).is_finite() {
                return Err(Error::NonFinite { row: x, col: xbar });
            }
        }
        if self.h.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("h must be finite".into()));
        }
        Ok(())
    }
}

/// Result of the telescoping-form test `g(x, x̄) = f(x) − f(x̄) + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Degeneracy {
    pub degenerate: bool,
    /// `(f, c)` with `f[0] = 0`, present when degenerate.
    pub witness: Option<(Vec<f64>, f64)>,
    /// Sup-norm residual of the least-squares fit.
    pub residual: f64,
}

/// Least-squares fit of `g` to `f(x) − f(x̄) + c` over the support of `w`.
pub fn check_nondegenerate(w: &TransitionMatrix, gen: &GeneratorSpec) -> Degeneracy {
    let d = w.dim();
    let support = w.support();
    // Unknowns: f(1..d) (f(0) pinned to 0) and c.
    let cols = d;
    let mut a = DMatrix::<f64>::zeros(support.len(), cols);
    let mut rhs = DVector::<f64>::zeros(support.len());
    for (row, &(x, xbar)) in support.iter().enumerate() {
        if x > 0 {
            a[(row, x - 1)] += 1.0;
        }
        if xbar > 0 {
            a[(row, xbar - 1)] -= 1.0;
        }
        a[(row, cols - 1)] = 1.0;
        rhs[row] = gen.value(x, xbar);
    }
    let sol = a
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .unwrap_or_else(|_| DVector::zeros(cols));
    let residual = (&a * &sol - &rhs).amax();
    let degenerate = residual <= DEGENERACY_TOL;
    let witness = degenerate.then(|| {
        let mut f = vec![0.0; d];
        for x in 1..d {
            f[x] = sol[x - 1];
        }
        (f, sol[cols - 1])
    });
    Degeneracy {
        degenerate,
        witness,
        residual,
    }
}

/// Entrywise tilt `W(x|x̄)·exp(θ·g(x, x̄))`; off-support entries stay zero.
pub fn tilt(w: &TransitionMatrix, gen: &GeneratorSpec, theta: f64) -> Result<DMatrix<f64>> {
    let d = w.dim();
    let mut out = DMatrix::<f64>::zeros(d, d);
    for xbar in 0..d {
        for x in 0..d {
            let p = w.get(x, xbar);
            if p > 0.0 {
                let e = theta * gen.value(x, xbar);
                if e.abs() > EXP_GUARD || !e.is_finite() {
                    return Err(Error::Overflow { value: e.abs() });
                }
                out[(x, xbar)] = p * e.exp();
            }
        }
    }
    Ok(out)
}

/// Midpoint of the range of `g` on the support of `w`.
fn g_center(w: &TransitionMatrix, gen: &GeneratorSpec) -> (f64, f64) {
    let (lo, hi) = w
        .support()
        .into_iter()
        .map(|(x, xb)| gen.value(x, xb))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (0.5 * (lo + hi), 0.5 * (hi - lo))
}

/// `W·exp(θ(g − c))` with `c` the midpoint of `g`, and the offset `θc`
/// to add back to log-eigenvalues. Centering makes the usable `θ` range
/// depend only on the spread of `g`.
fn centered_tilt(
    w: &TransitionMatrix,
    gen: &GeneratorSpec,
    center: f64,
    theta: f64,
) -> Result<(DMatrix<f64>, f64)> {
    let d = w.dim();
    let mut out = DMatrix::<f64>::zeros(d, d);
    for (x, xbar) in w.support() {
        let e = theta * (gen.value(x, xbar) - center);
        if e.abs() > EXP_GUARD || !e.is_finite() {
            return Err(Error::Overflow { value: e.abs() });
        }
        out[(x, xbar)] = w.get(x, xbar) * e.exp();
    }
    Ok((out, theta * center))
}

/// `log Σ aᵢ·exp(θhᵢ)` without overflow.
fn log_weighted_exp(a: &[f64], h: &[f64], theta: f64) -> f64 {
    let m = a
        .iter()
        .zip(h)
        .filter(|(a, _)| **a > 0.0)
        .map(|(_, h)| theta * h)
        .fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = a.iter().zip(h).map(|(a, h)| a * (theta * h - m).exp()).sum();
    m + s.ln()
}

/// Everything the bounds need at a single natural parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    pub theta: f64,
    pub lambda: f64,
    pub phi: f64,
    /// `left_vec` is `v_θ` (minimum one), `right_vec` is `P̃_θ` (sum one).
    pub perron: PerronData,
    pub w_theta: TransitionMatrix,
    pub pi_theta: Distribution,
    /// `φ′(θ)`, the stationary mean of `g` under `W_θ`.
    pub eta: f64,
    pub delta_upper: f64,
    pub delta_lower: f64,
}

impl ThetaPoint {
    pub fn residual(&self) -> f64 {
        self.perron.residual
    }
}

/// Lower and upper bounds on `φₙ(θ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgfBounds {
    pub lower: f64,
    pub upper: f64,
}

type Cache = RwLock<HashMap<u64, Arc<ThetaPoint>>>;

/// The exponential family generated by `gen` through `base`, together with
/// the initial distribution used by the finite-length corrections.
pub struct TiltedFamily {
    base: TransitionMatrix,
    gen: GeneratorSpec,
    initial: Distribution,
    degenerate: bool,
    theta_max: f64,
    /// Midpoint of `g`, factored out of every tilt.
    center: f64,
    cache: Cache,
}

impl fmt::Debug for TiltedFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TiltedFamily")
            .field("base", &self.base)
            .field("gen", &self.gen)
            .field("initial", &self.initial)
            .field("degenerate", &self.degenerate)
            .finish_non_exhaustive()
    }
}

impl Clone for TiltedFamily {
    fn clone(&self) -> Self {
        let cache = self.cache.read().map(|c| c.clone()).unwrap_or_default();
        Self {
            base: self.base.clone(),
            gen: self.gen.clone(),
            initial: self.initial.clone(),
            degenerate: self.degenerate,
            theta_max: self.theta_max,
            center: self.center,
            cache: RwLock::new(cache),
        }
    }
}

impl TiltedFamily {
    /// Builds the family; fails on non-ergodic bases and degenerate generators.
    pub fn new(base: TransitionMatrix, gen: GeneratorSpec, initial: Distribution) -> Result<Self> {
        Self::build(base, gen, initial, false)
    }

    /// Like [`TiltedFamily::new`] but accepts degenerate generators, for
    /// which `φ` is affine and every bound is valid but trivial.
    pub fn new_allow_degenerate(
        base: TransitionMatrix,
        gen: GeneratorSpec,
        initial: Distribution,
    ) -> Result<Self> {
        Self::build(base, gen, initial, true)
    }

    fn build(
        base: TransitionMatrix,
        gen: GeneratorSpec,
        initial: Distribution,
        allow_degenerate: bool,
    ) -> Result<Self> {
        let class = classify(&base);
        if !class.ergodic {
            return Err(Error::NotErgodic {
                period: class.period,
            });
        }
        gen.check_against(&base)?;
        check_distribution(&initial, base.dim())?;
        let degenerate = check_nondegenerate(&base, &gen).degenerate;
        if degenerate && !allow_degenerate {
            return Err(Error::DegenerateGenerator);
        }
        let (center, half_spread) = g_center(&base, &gen);
        let theta_max = if half_spread > 0.0 {
            THETA_MAX.min(0.999 * EXP_GUARD / half_spread)
        } else {
            THETA_MAX
        };
        Ok(Self {
            base,
            gen,
            initial,
            degenerate,
            theta_max,
            center,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn base(&self) -> &TransitionMatrix {
        &self.base
    }

    pub fn generator(&self) -> &GeneratorSpec {
        &self.gen
    }

    pub fn initial(&self) -> &Distribution {
        &self.initial
    }

    pub fn is_degenerate(&self) -> bool {
        self.degenerate
    }

    /// Largest `|θ|` searched by the inverse and optimizers.
    pub fn theta_max(&self) -> f64 {
        self.theta_max
    }

    /// Cached per-θ bundle.
    pub fn point(&self, theta: f64) -> Result<Arc<ThetaPoint>> {
        let key = theta.to_bits();
        if let Some(p) = self.cache.read().ok().and_then(|c| c.get(&key).cloned()) {
            return Ok(p);
        }
        let p = Arc::new(self.compute_point(theta)?);
        if let Ok(mut c) = self.cache.write() {
            c.insert(key, Arc::clone(&p));
        }
        Ok(p)
    }

    fn compute_point(&self, theta: f64) -> Result<ThetaPoint> {
        let d = self.base.dim();
        let (tilted, offset) = centered_tilt(&self.base, &self.gen, self.center, theta)?;
        let perron = chain::perron(&tilted)?;
        let lambda = perron.eigenvalue;
        let phi = lambda.ln() + offset;
        let v = &perron.left_vec;
        let w_theta = DMatrix::from_fn(d, d, |x, xb| tilted[(x, xb)] * v[x] / (v[xb] * lambda));
        let mut pi: Vec<f64> = v.iter().zip(&perron.right_vec).map(|(a, b)| a * b).collect();
        let s: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|p| *p /= s);
        let mut eta = 0.0;
        for xb in 0..d {
            for x in 0..d {
                if self.base.in_support(x, xb) {
                    eta += w_theta[(x, xb)] * pi[xb] * self.gen.value(x, xb);
                }
            }
        }
        let weighted: Vec<f64> = v.iter().zip(&self.initial).map(|(v, p)| v * p).collect();
        let delta_upper = log_weighted_exp(&weighted, &self.gen.h, theta);
        let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Ok(ThetaPoint {
            theta,
            lambda: phi.exp(),
            phi,
            w_theta: TransitionMatrix::from_matrix_unchecked(w_theta),
            pi_theta: pi,
            eta,
            delta_upper,
            delta_lower: delta_upper - vmax.ln(),
            perron,
        })
    }

    pub fn phi(&self, theta: f64) -> Result<f64> {
        Ok(self.point(theta)?.phi)
    }

    pub fn eta(&self, theta: f64) -> Result<f64> {
        Ok(self.point(theta)?.eta)
    }

    /// `(η(−θmax), η(θmax))`, the attainable expectation range.
    pub fn eta_range(&self) -> Result<(f64, f64)> {
        Ok((self.eta(-self.theta_max)?, self.eta(self.theta_max)?))
    }

    /// Natural parameter with `η(θ) = a`, by bisection.
    pub fn eta_inverse(&self, a: f64) -> Result<f64> {
        let (lo, hi) = self.eta_range()?;
        if !(a > lo && a < hi) {
            return Err(Error::OutOfRange {
                what: "expectation parameter",
                value: a,
                lo,
                hi,
            });
        }
        let e0 = self.eta(0.0)?;
        if a == e0 {
            return Ok(0.0);
        }
        let (tlo, thi) = if a > e0 {
            (0.0, self.theta_max)
        } else {
            (-self.theta_max, 0.0)
        };
        let mut err = None;
        let root = bisect(
            |t| match self.eta(t) {
                Ok(e) => e - a,
                Err(e) => {
                    err.get_or_insert(e);
                    0.0
                }
            },
            tlo,
            thi,
            1e-15,
        );
        match err {
            Some(e) => Err(e),
            None => Ok(root),
        }
    }

    /// `φ″(θ)` by Richardson-extrapolated central differences of `η`.
    pub fn fisher(&self, theta: f64) -> Result<f64> {
        let h = 1e-3;
        let central = |h: f64| -> Result<f64> {
            Ok((self.eta(theta + h)? - self.eta(theta - h)?) / (2.0 * h))
        };
        let coarse = central(h)?;
        let fine = central(h / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// `w_θ(x) = P₀(x)·exp(θ·h(x))`.
    pub fn initial_weight(&self, theta: f64) -> Vec<f64> {
        self.initial
            .iter()
            .zip(&self.gen.h)
            .map(|(p, h)| p * (theta * h).exp())
            .collect()
    }

    /// Exact `φₙ(θ) = log⟨u, W̃_θⁿ w_θ⟩` with per-step rescaling.
    pub fn cgf_exact(&self, n: usize, theta: f64) -> Result<f64> {
        let (tilted, offset) = centered_tilt(&self.base, &self.gen, self.center, theta)?;
        let d = self.base.dim();
        let lse = log_weighted_exp(&self.initial, &self.gen.h, theta);
        let mut log_acc = lse + n as f64 * offset;
        let mut x: Vec<f64> = (0..d)
            .map(|i| self.initial[i] * (theta * self.gen.h[i] - lse).exp())
            .collect();
        let mut y = vec![0.0; d];
        for _ in 0..n {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = (0..d).map(|j| tilted[(i, j)] * x[j]).sum();
            }
            let s: f64 = y.iter().sum();
            log_acc += s.ln();
            for (xi, yi) in x.iter_mut().zip(&y) {
                *xi = yi / s;
            }
        }
        Ok(log_acc)
    }

    /// `(nφ(θ) + δ̲(θ), nφ(θ) + δ̄(θ))`.
    pub fn cgf_bounds(&self, n: usize, theta: f64) -> Result<CgfBounds> {
        let p = self.point(theta)?;
        let base = n as f64 * p.phi;
        Ok(CgfBounds {
            lower: base + p.delta_lower,
            upper: base + p.delta_upper,
        })
    }
}

pub(crate) fn check_distribution(p: &[f64], dim: usize) -> Result<()> {
    if p.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidInput(
            "distribution entries must be finite and nonnegative".into(),
        ));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > chain::STOCHASTIC_TOL {
        return Err(Error::InvalidInput(format!("distribution sums to {s}")));
    }
    Ok(())
}

/// Free-function form of [`TiltedFamily::point`].
pub fn theta_point(fam: &TiltedFamily, theta: f64) -> Result<Arc<ThetaPoint>> {
    fam.point(theta)
}

/// Asymptotic variance `lim Var(g̃ⁿ)/n` through the fundamental matrix:
/// `V₀[g] + 2·ḡᵀ(Z − A)b` where `ḡ(x̄) = Σₓ W(x|x̄)g(x, x̄)` is the expected
/// next increment from `x̄` and `b(x) = Σ_x̄ W(x|x̄)π(x̄)g(x, x̄)` the
/// stationary mass of increments arriving in `x`.
pub fn asymptotic_variance(w: &TransitionMatrix, gen: &GeneratorSpec) -> Result<f64> {
    gen.check_against(w)?;
    let fm = chain::fundamental(w)?;
    let d = w.dim();
    let pi = &fm.pi;
    let (mut mean, mut second) = (0.0, 0.0);
    for xb in 0..d {
        for x in 0..d {
            if w.in_support(x, xb) {
                let p = pi[xb] * w.get(x, xb);
                let g = gen.value(x, xb);
                mean += p * g;
                second += p * g * g;
            }
        }
    }
    let gbar = next_increment(w, gen);
    let b = arriving_increment(w, gen, pi);
    let za = &fm.z - &fm.a;
    let cross = DVector::from_vec(gbar).dot(&(za * DVector::from_vec(b)));
    Ok(second - mean * mean + 2.0 * cross)
}

/// Derivative at `θ = 0` of the right Perron vector `P̃_θ`: `(Z − A)·b`.
pub fn stationary_derivative(w: &TransitionMatrix, gen: &GeneratorSpec) -> Result<Vec<f64>> {
    gen.check_against(w)?;
    let fm = chain::fundamental(w)?;
    let b = arriving_increment(w, gen, &fm.pi);
    let out = (&fm.z - &fm.a) * DVector::from_vec(b);
    Ok(out.iter().cloned().collect())
}

fn next_increment(w: &TransitionMatrix, gen: &GeneratorSpec) -> Vec<f64> {
    let d = w.dim();
    (0..d)
        .map(|xb| {
            (0..d)
                .filter(|&x| w.in_support(x, xb))
                .map(|x| w.get(x, xb) * gen.value(x, xb))
                .sum()
        })
        .collect()
}

fn arriving_increment(w: &TransitionMatrix, gen: &GeneratorSpec, pi: &[f64]) -> Vec<f64> {
    let d = w.dim();
    (0..d)
        .map(|x| {
            (0..d)
                .filter(|&xb| w.in_support(x, xb))
                .map(|xb| w.get(x, xb) * pi[xb] * gen.value(x, xb))
                .sum()
        })
        .collect()
}

/// The distribution-level family `P_θ(x) ∝ P(x)·exp(θ·g(x))`, embedded as a
/// chain whose every column is `P`.
pub fn iid_family(p: &[f64], g_single: &[f64]) -> Result<TiltedFamily> {
    if p.iter().any(|v| *v <= 0.0) {
        return Err(Error::InvalidInput("i.i.d. family needs P > 0".into()));
    }
    if g_single.len() != p.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: g_single.len(),
        });
    }
    let w = TransitionMatrix::iid(p)?;
    TiltedFamily::new(w, GeneratorSpec::of_next_state(g_single), p.to_vec())
}
