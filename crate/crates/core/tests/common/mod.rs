//! Seeded random instances shared by the integration tests.

#![allow(dead_code)]

use markov_bounds::chain::{classify, stationary};
use markov_bounds::expfamily::check_nondegenerate;
use markov_bounds::{GeneratorSpec, TiltedFamily, TransitionMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random positive probability vector.
pub fn distribution(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..dim).map(|_| 0.05 + rng.random::<f64>()).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

/// Random ergodic chain; each entry is zero with probability `zero_prob`.
pub fn ergodic(rng: &mut ChaCha8Rng, dim: usize, zero_prob: f64) -> TransitionMatrix {
    loop {
        let mut cols = Vec::with_capacity(dim);
        for _ in 0..dim {
            let mut col: Vec<f64> = (0..dim)
                .map(|_| {
                    if rng.random::<f64>() < zero_prob {
                        0.0
                    } else {
                        0.05 + rng.random::<f64>()
                    }
                })
                .collect();
            let s: f64 = col.iter().sum();
            if s == 0.0 {
                col[rng.random_range(0..dim)] = 1.0;
            } else {
                col.iter_mut().for_each(|v| *v /= s);
            }
            cols.push(col);
        }
        let rows: Vec<Vec<f64>> = (0..dim).map(|x| (0..dim).map(|xb| cols[xb][x]).collect()).collect();
        let w = TransitionMatrix::new(&rows).expect("columns normalized");
        if classify(&w).ergodic {
            return w;
        }
    }
}

/// Chain with the same support as `w` and fresh positive weights on it.
pub fn same_support(rng: &mut ChaCha8Rng, w: &TransitionMatrix) -> TransitionMatrix {
    let d = w.dim();
    let mut rows = vec![vec![0.0; d]; d];
    for xb in 0..d {
        let mut s = 0.0;
        for (x, row) in rows.iter_mut().enumerate() {
            if w.in_support(x, xb) {
                row[xb] = 0.05 + rng.random::<f64>();
                s += row[xb];
            }
        }
        rows.iter_mut().for_each(|r| r[xb] /= s);
    }
    TransitionMatrix::new(&rows).expect("columns normalized")
}

/// Generator with entries uniform in `[-1, 1]`, redrawn until non-degenerate.
pub fn generator(rng: &mut ChaCha8Rng, w: &TransitionMatrix) -> GeneratorSpec {
    let d = w.dim();
    loop {
        let vals: Vec<f64> = (0..d * d).map(|_| rng.random_range(-1.0..1.0)).collect();
        let gen = GeneratorSpec::from_fn(d, |x, xb| vals[x * d + xb], "random");
        if !check_nondegenerate(w, &gen).degenerate {
            return gen;
        }
    }
}

/// Random ergodic family of dimension `dim`; half the time started from a
/// random law instead of stationarity.
pub fn family(rng: &mut ChaCha8Rng, dim: usize) -> TiltedFamily {
    let w = ergodic(rng, dim, 0.2);
    let gen = generator(rng, &w);
    let p = if rng.random::<bool>() {
        stationary(&w).expect("ergodic")
    } else {
        distribution(rng, dim)
    };
    TiltedFamily::new(w, gen, p).expect("ergodic, non-degenerate")
}

/// Joint chain on `X × Y` (index `x·ny + y`) whose `X` coordinate moves by
/// `wx` regardless of `y`, with `y` drawn from a random positive kernel.
pub fn non_hidden_joint(rng: &mut ChaCha8Rng, wx: &TransitionMatrix, ny: usize) -> TransitionMatrix {
    let nx = wx.dim();
    let d = nx * ny;
    let mut rows = vec![vec![0.0; d]; d];
    for xp in 0..nx {
        for yp in 0..ny {
            for x in 0..nx {
                let q = distribution(rng, ny);
                for y in 0..ny {
                    rows[x * ny + y][xp * ny + yp] = wx.get(x, xp) * q[y];
                }
            }
        }
    }
    TransitionMatrix::new(&rows).expect("columns normalized")
}

/// `a` values strictly inside `(η(0), η_max)` (upper) or `(η_min, η(0))`
/// (lower), `k` evenly spaced interior points.
pub fn a_grid(fam: &TiltedFamily, upper: bool, k: usize) -> Vec<f64> {
    let eta0 = fam.eta(0.0).unwrap();
    let (lo, hi) = fam.eta_range().unwrap();
    let end = if upper { hi } else { lo };
    (1..=k)
        .map(|i| eta0 + (end - eta0) * i as f64 / (k + 1) as f64)
        .collect()
}
