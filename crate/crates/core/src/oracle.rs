//! Ground truth for small instances: exhaustive path enumeration and a
//! seeded Monte Carlo sampler.
//!
//! Enumeration visits all `|X|^{n+1}` paths `X₁ … Xₙ₊₁` depth first and
//! aggregates the law of `g̃ⁿ` into atoms keyed by the value rounded to a
//! `1e-12` grid. With a second chain attached, every atom also carries the
//! path measure under that chain, which makes likelihood-ratio atoms exact.
//!
//! The sampler uses `ChaCha8Rng` from `rand_chacha` 0.9.0, seeded with
//! `seed_from_u64(seed)`; sample `i` runs on stream `i` (`set_stream(i)`),
//! so results do not depend on how samples are scheduled. Each step draws
//! one `f64` in `[0, 1)` and inverts the cumulative column of the
//! transition matrix.

use std::collections::HashMap;
use std::io;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::chain::TransitionMatrix;
use crate::error::{Error, Result};
use crate::expfamily::{asymptotic_variance, check_distribution, GeneratorSpec, TiltedFamily};
use crate::tail::Side;

/// Default cap on the number of enumerated paths.
pub const DEFAULT_BUDGET: u128 = 10_000_000;
/// Granularity of atom aggregation.
pub const ATOM_GRID: f64 = 1e-12;
/// Two-sided 95% standard normal quantile.
pub const Z_95: f64 = 1.959963984540054;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Atom {
    pub value: f64,
    pub prob_w0: f64,
    pub prob_w1: Option<f64>,
}

/// Exact law of `g̃ⁿ`, atoms sorted by value.
#[derive(Debug, Clone, PartialEq)]
pub struct PathDistribution {
    pub n: usize,
    pub atoms: Vec<Atom>,
    pub total_w0: f64,
}

/// Number of paths of length `n + 1` over `dim` states, saturating.
pub fn path_count(dim: usize, n: usize) -> u128 {
    u32::try_from(n + 1)
        .ok()
        .and_then(|e| (dim as u128).checked_pow(e))
        .unwrap_or(u128::MAX)
}

struct Walker<'a> {
    w0: &'a TransitionMatrix,
    w1: Option<&'a TransitionMatrix>,
    gen: &'a GeneratorSpec,
    n: usize,
    atoms: HashMap<i64, Atom>,
}

impl Walker<'_> {
    fn visit(&mut self, state: usize, depth: usize, value: f64, p0: f64, p1: f64) {
        if depth == self.n {
            let key = (value / ATOM_GRID).round() as i64;
            let has_w1 = self.w1.is_some();
            let atom = self.atoms.entry(key).or_insert(Atom {
                value,
                prob_w0: 0.0,
                prob_w1: has_w1.then_some(0.0),
            });
            atom.prob_w0 += p0;
            if let Some(q) = atom.prob_w1.as_mut() {
                *q += p1;
            }
            return;
        }
        for next in 0..self.w0.dim() {
            let t0 = self.w0.get(next, state);
            let t1 = self.w1.map_or(0.0, |w| w.get(next, state));
            if t0 == 0.0 && t1 == 0.0 {
                continue;
            }
            let step = if t0 > 0.0 || self.w0.in_support(next, state) {
                self.gen.value(next, state)
            } else {
                0.0
            };
            self.visit(next, depth + 1, value + step, p0 * t0, p1 * t1);
        }
    }
}

/// Exhaustive law of `g̃ⁿ` under `(W, P₀)`, optionally with the path measure
/// of a second chain `(W₁, P₁)` on every atom.
pub fn enumerate(
    w: &TransitionMatrix,
    p0: &[f64],
    gen: &GeneratorSpec,
    n: usize,
    also: Option<(&TransitionMatrix, &[f64])>,
    budget: u128,
) -> Result<PathDistribution> {
    let d = w.dim();
    check_distribution(p0, d)?;
    if gen.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: gen.dim(),
        });
    }
    if let Some((w1, p1)) = also {
        if w1.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: w1.dim(),
            });
        }
        check_distribution(p1, d)?;
    }
    let required = path_count(d, n);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let mut walker = Walker {
        w0: w,
        w1: also.map(|(m, _)| m),
        gen,
        n,
        atoms: HashMap::new(),
    };
    for x in 0..d {
        let q0 = p0[x];
        let q1 = also.map_or(0.0, |(_, p)| p[x]);
        if q0 == 0.0 && q1 == 0.0 {
            continue;
        }
        walker.visit(x, 0, gen.h[x], q0, q1);
    }
    let mut atoms: Vec<Atom> = walker.atoms.into_values().collect();
    atoms.sort_by(|a, b| a.value.total_cmp(&b.value));
    let total_w0 = atoms.iter().map(|a| a.prob_w0).sum();
    Ok(PathDistribution { n, atoms, total_w0 })
}

/// [`enumerate`] for the family's base chain, generator and initial law.
pub fn enumerate_family(fam: &TiltedFamily, n: usize, budget: u128) -> Result<PathDistribution> {
    enumerate(fam.base(), fam.initial(), fam.generator(), n, None, budget)
}

/// `P{g̃ⁿ ≥ na}` (upper) or `P{g̃ⁿ ≤ na}` (lower), boundary atoms included
/// up to a relative tolerance of `1e-9`.
pub fn exact_tail(dist: &PathDistribution, a: f64, side: Side) -> f64 {
    let na = dist.n as f64 * a;
    let tol = 1e-9 * na.abs().max(1.0);
    dist.atoms
        .iter()
        .filter(|atom| match side {
            Side::Upper => atom.value >= na - tol,
            Side::Lower => atom.value <= na + tol,
        })
        .map(|atom| atom.prob_w0)
        .sum()
}

impl PathDistribution {
    /// `log E[exp(θ·g̃ⁿ)]`, by a shifted log-sum-exp.
    pub fn cgf(&self, theta: f64) -> f64 {
        let terms: Vec<(f64, f64)> = self
            .atoms
            .iter()
            .filter(|a| a.prob_w0 > 0.0)
            .map(|a| (theta * a.value, a.prob_w0))
            .collect();
        let m = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        m + terms.iter().map(|(e, p)| p * (e - m).exp()).sum::<f64>().ln()
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|a| a.value * a.prob_w0).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.atoms
            .iter()
            .map(|a| a.prob_w0 * (a.value - m).powi(2))
            .sum()
    }

    /// CSV with header `value,prob_w0[,prob_w1]`; floats use the shortest
    /// representation that round-trips.
    pub fn write_csv<W: io::Write>(&self, out: W) -> Result<()> {
        let io_err = |e: csv::Error| Error::InvalidInput(format!("csv: {e}"));
        let mut wtr = csv::Writer::from_writer(out);
        let with_w1 = self.atoms.first().is_some_and(|a| a.prob_w1.is_some());
        if with_w1 {
            wtr.write_record(["value", "prob_w0", "prob_w1"]).map_err(io_err)?;
        } else {
            wtr.write_record(["value", "prob_w0"]).map_err(io_err)?;
        }
        for a in &self.atoms {
            let mut rec = vec![a.value.to_string(), a.prob_w0.to_string()];
            if let Some(q) = a.prob_w1 {
                rec.push(q.to_string());
            }
            wtr.write_record(&rec).map_err(io_err)?;
        }
        wtr.flush()
            .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
    }

    /// Reads the format written by [`PathDistribution::write_csv`].
    pub fn read_csv<R: io::Read>(n: usize, input: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(input);
        let mut atoms = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| Error::InvalidInput(format!("csv: {e}")))?;
            let field = |i: usize| -> Result<f64> {
                rec.get(i)
                    .ok_or_else(|| Error::InvalidInput("csv: missing column".into()))?
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("csv: {e}")))
            };
            atoms.push(Atom {
                value: field(0)?,
                prob_w0: field(1)?,
                prob_w1: if rec.len() > 2 { Some(field(2)?) } else { None },
            });
        }
        let total_w0 = atoms.iter().map(|a| a.prob_w0).sum();
        Ok(Self { n, atoms, total_w0 })
    }
}

/// Empirical frequency of a tail event with its Wilson 95% interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailEstimate {
    pub threshold: f64,
    pub side: Side,
    pub frequency: f64,
    pub interval: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalSummary {
    pub seed: u64,
    pub count: usize,
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub tail_estimates: Vec<TailEstimate>,
    /// Kolmogorov–Smirnov distance to `N(n·η(0), n·φ″(0))`.
    pub ks_vs_gaussian: f64,
}

/// Wilson score interval for `successes` out of `count`.
pub fn wilson(successes: usize, count: usize, z: f64) -> (f64, f64) {
    let nn = count as f64;
    let p = successes as f64 / nn;
    let z2 = z * z;
    let denom = 1.0 + z2 / nn;
    let center = (p + z2 / (2.0 * nn)) / denom;
    let half = z / denom * (p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// Sup distance between the empirical CDF of `values` and `cdf`. Ties are
/// handled by comparing on both sides of every jump.
pub fn ks_statistic(values: &mut [f64], cdf: impl Fn(f64) -> f64) -> f64 {
    values.sort_by(f64::total_cmp);
    let nn = values.len() as f64;
    let mut d: f64 = 0.0;
    let mut i = 0;
    while i < values.len() {
        let v = values[i];
        let mut j = i;
        while j < values.len() && values[j] == v {
            j += 1;
        }
        let f = cdf(v);
        d = d.max((f - i as f64 / nn).abs()).max((j as f64 / nn - f).abs());
        i = j;
    }
    d
}

fn cumulative(p: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    p.iter()
        .map(|x| {
            acc += x;
            acc
        })
        .collect()
}

fn draw(cdf: &[f64], u: f64) -> usize {
    let k = cdf.partition_point(|&c| c <= u);
    if k < cdf.len() {
        k
    } else {
        // Round-off left the last cumulative below u: use the last
        // state that carries mass.
        (0..cdf.len())
            .rev()
            .find(|&i| if i == 0 { cdf[0] > 0.0 } else { cdf[i] > cdf[i - 1] })
            .unwrap_or(0)
    }
}

/// Seeded Monte Carlo summary of `g̃ⁿ` under the family's base chain.
/// `tail_thresholds` are per-step thresholds `a`, compared non-strictly
/// against `g̃ⁿ/n`.
pub fn sample(
    fam: &TiltedFamily,
    n: usize,
    count: usize,
    seed: u64,
    tail_thresholds: &[(f64, Side)],
) -> Result<EmpiricalSummary> {
    if count == 0 {
        return Err(Error::InvalidInput("count must be positive".into()));
    }
    let w = fam.base();
    let gen = fam.generator();
    let d = w.dim();
    let columns: Vec<Vec<f64>> = (0..d)
        .map(|xb| cumulative(&(0..d).map(|x| w.get(x, xb)).collect::<Vec<_>>()))
        .collect();
    let init = cumulative(fam.initial());

    let mut values = Vec::with_capacity(count);
    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut x = draw(&init, rng.random());
        let mut acc = gen.h[x];
        for _ in 0..n {
            let next = draw(&columns[x], rng.random());
            acc += gen.value(next, x);
            x = next;
        }
        values.push(acc);
    }

    let nn = count as f64;
    let mean = values.iter().sum::<f64>() / nn;
    let variance = if count > 1 {
        values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nn - 1.0)
    } else {
        0.0
    };
    let tail_estimates = tail_thresholds
        .iter()
        .map(|&(a, side)| {
            let na = n as f64 * a;
            let tol = 1e-9 * na.abs().max(1.0);
            let hits = values
                .iter()
                .filter(|&&v| match side {
                    Side::Upper => v >= na - tol,
                    Side::Lower => v <= na + tol,
                })
                .count();
            TailEstimate {
                threshold: a,
                side,
                frequency: hits as f64 / nn,
                interval: wilson(hits, count, Z_95),
            }
        })
        .collect();

    let mu = n as f64 * fam.eta(0.0)?;
    let sigma = (n as f64 * asymptotic_variance(fam.base(), fam.generator())?).sqrt();
    let ks_vs_gaussian = match Normal::new(mu, sigma) {
        Ok(normal) => ks_statistic(&mut values, |v| normal.cdf(v)),
        Err(_) => f64::NAN,
    };
    Ok(EmpiricalSummary {
        seed,
        count,
        n,
        mean,
        variance,
        tail_estimates,
        ks_vs_gaussian,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{stationary, validate};

    fn family_a() -> TiltedFamily {
        let w = validate(&[vec![0.7, 0.4], vec![0.3, 0.6]]).unwrap();
        let pi = stationary(&w).unwrap();
        TiltedFamily::new(w, GeneratorSpec::indicator(2, 1), pi).unwrap()
    }

    #[test]
    fn four_path_hand_computation() {
        let fam = family_a();
        let dist = enumerate_family(&fam, 1, DEFAULT_BUDGET).unwrap();
        assert_eq!(dist.atoms.len(), 2);
        let p0 = 4.0 / 7.0 * 0.7 + 3.0 / 7.0 * 0.4;
        assert!((dist.atoms[0].value - 0.0).abs() < 1e-15);
        assert!((dist.atoms[0].prob_w0 - p0).abs() < 1e-15);
        assert!((dist.atoms[1].prob_w0 - (1.0 - p0)).abs() < 1e-15);
        assert!((dist.total_w0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_generator_gives_h_atoms() {
        let w = validate(&[vec![0.7, 0.4], vec![0.3, 0.6]]).unwrap();
        let gen = GeneratorSpec::from_fn(2, |_, _| 0.0, "0").with_h(vec![-1.0, 2.0]);
        let dist = enumerate(&w, &[0.25, 0.75], &gen, 4, None, DEFAULT_BUDGET).unwrap();
        let values: Vec<f64> = dist.atoms.iter().map(|a| a.value).collect();
        assert_eq!(values, vec![-1.0, 2.0]);
        assert!((dist.atoms[0].prob_w0 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn cgf_matches_exact() {
        let fam = family_a();
        let dist = enumerate_family(&fam, 9, DEFAULT_BUDGET).unwrap();
        for t in [-1.5, -0.2, 0.3, 2.0] {
            assert!((dist.cgf(t) - fam.cgf_exact(9, t).unwrap()).abs() < 1e-10);
        }
    }

    #[test]
    fn budget_is_checked_first() {
        let fam = family_a();
        let err = enumerate_family(&fam, 30, DEFAULT_BUDGET).unwrap_err();
        assert_eq!(
            err,
            Error::BudgetExceeded {
                required: 1u128 << 31,
                budget: DEFAULT_BUDGET
            }
        );
    }

    #[test]
    fn exact_tail_edges() {
        let fam = family_a();
        let dist = enumerate_family(&fam, 10, DEFAULT_BUDGET).unwrap();
        assert!((exact_tail(&dist, -0.1, Side::Upper) - 1.0).abs() < 1e-12);
        assert_eq!(exact_tail(&dist, 1.1, Side::Upper), 0.0);
        let mut prev = 1.0 + 1e-12;
        for k in 0..=10 {
            let t = exact_tail(&dist, k as f64 / 10.0, Side::Upper);
            assert!(t <= prev);
            prev = t;
        }
        // Boundary atoms count on both sides.
        let up = exact_tail(&dist, 0.6, Side::Upper);
        let low = exact_tail(&dist, 0.6, Side::Lower);
        assert!(up + low > 1.0);
    }

    #[test]
    fn csv_round_trip() {
        let fam = family_a();
        let dist = enumerate_family(&fam, 6, DEFAULT_BUDGET).unwrap();
        let mut buf = Vec::new();
        dist.write_csv(&mut buf).unwrap();
        let back = PathDistribution::read_csv(6, buf.as_slice()).unwrap();
        assert_eq!(back.atoms, dist.atoms);
    }

    #[test]
    fn sampling_is_deterministic() {
        let fam = family_a();
        let th = [(0.6, Side::Upper), (0.3, Side::Lower)];
        let a = sample(&fam, 50, 2000, 7, &th).unwrap();
        let b = sample(&fam, 50, 2000, 7, &th).unwrap();
        assert_eq!(a, b);
        let c = sample(&fam, 50, 2000, 8, &th).unwrap();
        assert_ne!(a.mean, c.mean);
        for t in &a.tail_estimates {
            assert!(t.interval.0 <= t.frequency && t.frequency <= t.interval.1);
        }
    }

    #[test]
    fn wilson_and_ks() {
        let (lo, hi) = wilson(0, 100, Z_95);
        assert!(lo.abs() < 1e-15);
        assert!(hi > 0.0 && hi < 0.05);
        let mut v = vec![0.5; 10];
        // Point mass at 0.5 against the uniform CDF: the jump is 1 at 0.5.
        assert!((ks_statistic(&mut v, |x| x) - 0.5).abs() < 1e-15);
    }
}
