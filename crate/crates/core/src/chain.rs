//! Stochastic-matrix primitives.
//!
//! Matrices follow the conditional-probability orientation throughout the
//! crate: `entry[x][x̄] = W(x|x̄)` is the probability of moving *from* `x̄`
//! *to* `x`, so every column sums to one and distributions are column
//! vectors (`P_next = W · P`).

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A probability vector over the state alphabet.
pub type Distribution = Vec<f64>;

/// Column sums further than this from one are rejected.
pub const STOCHASTIC_TOL: f64 = 1e-9;

/// Validated column-stochastic transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    m: DMatrix<f64>,
}

impl TransitionMatrix {
    /// Validates a row-major `dim × dim` array where `raw[x][x̄] = W(x|x̄)`.
    pub fn new(raw: &[Vec<f64>]) -> Result<Self> {
        validate(raw)
    }

    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 {
            return Err(Error::Empty);
        }
        if m.nrows() != m.ncols() {
            return Err(Error::NotSquare {
                rows: m.nrows(),
                row: 0,
                cols: m.ncols(),
            });
        }
        let dim = m.nrows();
        let mut m = m;
        for j in 0..dim {
            for i in 0..dim {
                let v = m[(i, j)];
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                if v < 0.0 {
                    return Err(Error::NegativeEntry {
                        row: i,
                        col: j,
                        value: v,
                    });
                }
            }
            let sum: f64 = m.column(j).sum();
            if (sum - 1.0).abs() > STOCHASTIC_TOL {
                return Err(Error::ColumnNotStochastic { col: j, sum });
            }
            // Renormalize only visibly-off columns so that re-validating an
            // already valid matrix leaves it bit-identical.
            if (sum - 1.0).abs() > 1e-12 {
                for i in 0..dim {
                    m[(i, j)] /= sum;
                }
            }
        }
        Ok(Self { m })
    }

    /// Wraps a matrix already known to be column-stochastic.
    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self { m }
    }

    /// Builds the chain whose every column equals `p` (an i.i.d. source).
    pub fn iid(p: &[f64]) -> Result<Self> {
        let d = p.len();
        Self::from_matrix(DMatrix::from_fn(d, d, |i, _| p[i]))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    /// `W(x|x̄)`.
    #[inline]
    pub fn get(&self, x: usize, xbar: usize) -> f64 {
        self.m[(x, xbar)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    #[inline]
    pub fn in_support(&self, x: usize, xbar: usize) -> bool {
        self.m[(x, xbar)] > 0.0
    }

    /// Support pairs `(x, x̄)` with `W(x|x̄) > 0`, in column-major order.
    pub fn support(&self) -> Vec<(usize, usize)> {
        let d = self.dim();
        let mut out = Vec::new();
        for xbar in 0..d {
            for x in 0..d {
                if self.in_support(x, xbar) {
                    out.push((x, xbar));
                }
            }
        }
        out
    }

    pub fn same_support(&self, other: &TransitionMatrix) -> bool {
        self.dim() == other.dim()
            && self
                .m
                .iter()
                .zip(other.m.iter())
                .all(|(a, b)| (*a > 0.0) == (*b > 0.0))
    }

    /// Row-major copy, `rows[x][x̄] = W(x|x̄)`.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| (0..self.dim()).map(|j| self.m[(i, j)]).collect())
            .collect()
    }

    /// One step of the chain: `W · p`.
    pub fn apply(&self, p: &[f64]) -> Distribution {
        let d = self.dim();
        (0..d)
            .map(|x| (0..d).map(|xb| self.m[(x, xb)] * p[xb]).sum())
            .collect()
    }
}

/// Validates a raw row-major matrix into a [`TransitionMatrix`].
pub fn validate(raw: &[Vec<f64>]) -> Result<TransitionMatrix> {
    let dim = raw.len();
    if dim == 0 {
        return Err(Error::Empty);
    }
    for (row, r) in raw.iter().enumerate() {
        if r.len() != dim {
            return Err(Error::NotSquare {
                rows: dim,
                row,
                cols: r.len(),
            });
        }
    }
    TransitionMatrix::from_matrix(DMatrix::from_fn(dim, dim, |i, j| raw[i][j]))
}

/// Structural classification of the support digraph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Classification {
    pub irreducible: bool,
    pub ergodic: bool,
    pub period: usize,
}

pub fn classify(w: &TransitionMatrix) -> Classification {
    classify_support(w.matrix())
}

/// Classifies any nonnegative square matrix by its positive pattern.
/// Edges run `x̄ → x` whenever `m[x][x̄] > 0`.
pub fn classify_support(m: &DMatrix<f64>) -> Classification {
    let d = m.nrows();
    let forward = bfs_levels(d, |u, v| m[(v, u)] > 0.0);
    let backward = bfs_levels(d, |u, v| m[(u, v)] > 0.0);
    let irreducible = forward.iter().all(Option::is_some) && backward.iter().all(Option::is_some);
    if !irreducible {
        return Classification {
            irreducible: false,
            ergodic: false,
            period: 0,
        };
    }
    let mut period = 0usize;
    for u in 0..d {
        for v in 0..d {
            if m[(v, u)] > 0.0 {
                let lu = forward[u].unwrap() as i64;
                let lv = forward[v].unwrap() as i64;
                period = gcd(period, (lu + 1 - lv).unsigned_abs() as usize);
            }
        }
    }
    Classification {
        irreducible: true,
        ergodic: period == 1,
        period,
    }
}

fn bfs_levels(d: usize, edge: impl Fn(usize, usize) -> bool) -> Vec<Option<usize>> {
    let mut level = vec![None; d];
    let mut queue = VecDeque::new();
    level[0] = Some(0);
    queue.push_back(0);
    while let Some(u) = queue.pop_front() {
        let lu = level[u].unwrap();
        for v in 0..d {
            if level[v].is_none() && edge(u, v) {
                level[v] = Some(lu + 1);
                queue.push_back(v);
            }
        }
    }
    level
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Dominant eigendata of a nonnegative irreducible matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PerronData {
    pub eigenvalue: f64,
    /// Right eigenvector, normalized to sum 1.
    pub right_vec: Vec<f64>,
    /// Eigenvector of the transpose, normalized so its minimum entry is 1.
    pub left_vec: Vec<f64>,
    /// Largest of the two relative residuals `‖Mv − λv‖∞ / (λ‖v‖∞)`.
    pub residual: f64,
}

/// Iteration cap for the eigenvector solver.
pub const PERRON_MAX_ITER: usize = 500;
/// Relative gap between the Collatz–Wielandt bounds accepted as converged.
const EIGENVALUE_TOL: f64 = 1e-15;
/// Relative residual above which the result is rejected.
const RESIDUAL_TOL: f64 = 1e-9;

/// Perron-Frobenius eigenvalue and positive eigenvectors.
pub fn perron(m: &DMatrix<f64>) -> Result<PerronData> {
    let d = m.nrows();
    if d == 0 {
        return Err(Error::Empty);
    }
    if m.ncols() != d {
        return Err(Error::NotSquare {
            rows: d,
            row: 0,
            cols: m.ncols(),
        });
    }
    if let Some(pos) = m.iter().position(|v| !v.is_finite() || *v < 0.0) {
        let (row, col) = (pos % d, pos / d);
        return Err(if m[(row, col)].is_finite() {
            Error::NegativeEntry {
                row,
                col,
                value: m[(row, col)],
            }
        } else {
            Error::NonFinite { row, col }
        });
    }
    if !classify_support(m).irreducible {
        return Err(Error::NotIrreducible);
    }

    let mut right_vec = noda(m)?;
    let mt = m.transpose();
    let mut left_vec = noda(&mt)?;
    // `uᵀAv / uᵀv` weights each component by both vectors, so entries too
    // small to be resolved relative to the largest do not spoil it.
    let u = DVector::from_column_slice(&left_vec);
    let v = DVector::from_column_slice(&right_vec);
    let eigenvalue = u.dot(&(m * &v)) / u.dot(&v);

    let s: f64 = right_vec.iter().sum();
    right_vec.iter_mut().for_each(|v| *v /= s);
    let mn = left_vec.iter().cloned().fold(f64::INFINITY, f64::min);
    left_vec.iter_mut().for_each(|v| *v /= mn);

    let residual = relative_residual(m, &right_vec, eigenvalue)
        .max(relative_residual(&mt, &left_vec, eigenvalue));
    if !(residual <= RESIDUAL_TOL) {
        return Err(Error::NoConvergence {
            iterations: PERRON_MAX_ITER,
            residual,
        });
    }
    Ok(PerronData {
        eigenvalue,
        right_vec,
        left_vec,
        residual,
    })
}

/// `X⁻¹AX` for `X = diag(x)`; its row sums are `(Ax)ᵢ/xᵢ`.
fn similar(a: &DMatrix<f64>, x: &DVector<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (x[j] / x[i]))
}

/// Collatz–Wielandt bounds `min/max (Ax)ᵢ/xᵢ` from the row sums of `X⁻¹AX`.
fn cw_bounds(b: &DMatrix<f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi: f64 = 0.0;
    for r in b.row_iter() {
        let s = r.sum();
        lo = lo.min(s);
        hi = hi.max(s);
    }
    (lo, hi)
}

/// Noda iteration: inverse iteration shifted just above the smallest
/// Collatz–Wielandt upper bound seen so far. The shift stays above the
/// spectral radius, so iterates stay positive, and it converges for every
/// irreducible nonnegative matrix, periodic or not. Each step works on
/// `X⁻¹AX`, whose Perron vector tends to all ones; a few plain power steps
/// at the end restore the relative accuracy of tiny components.
fn noda(a: &DMatrix<f64>) -> Result<Vec<f64>> {
    let d = a.nrows();
    let mut x = DVector::from_element(d, 1.0);
    let mut b = a.clone();
    let (mut lo, mut hi) = cw_bounds(&b);
    let mut bound = hi;
    let mut margin = 1e-12;
    let id = DMatrix::<f64>::identity(d, d);
    let ones = DVector::from_element(d, 1.0);
    let mut iterations = 0;
    let mut stalled = 0;
    while hi - lo > EIGENVALUE_TOL * hi && iterations < PERRON_MAX_ITER && stalled < 5 {
        iterations += 1;
        let z = (&id * (bound * (1.0 + margin)) - &b).lu().solve(&ones);
        let Some(z) = z.filter(|z| z.iter().all(|v| *v > 0.0 && v.is_finite())) else {
            // Round-off put the shift at or below the radius.
            if margin > 1e-4 {
                break;
            }
            margin *= 1e3;
            continue;
        };
        let mut y = x.component_mul(&z);
        y /= y.amax();
        let nb = similar(a, &y);
        let (l, h) = cw_bounds(&nb);
        if h - l < hi - lo {
            stalled = 0;
        } else {
            stalled += 1;
        }
        x = y;
        b = nb;
        (lo, hi) = (l, h);
        bound = bound.min(h);
    }
    for _ in 0..4 * d + 8 {
        let mut y = a * &x;
        let mx = y.amax();
        if !(mx > 0.0 && mx.is_finite()) {
            break;
        }
        y /= mx;
        x = y;
    }
    if x.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::NoConvergence {
            iterations,
            residual: f64::INFINITY,
        });
    }
    Ok(x.iter().cloned().collect())
}

fn relative_residual(a: &DMatrix<f64>, x: &[f64], lambda: f64) -> f64 {
    let v = DVector::from_column_slice(x);
    let r = a * &v - &v * lambda;
    r.amax() / (lambda * v.amax())
}

/// Stationary distribution `π = Wπ` of an ergodic chain.
pub fn stationary(w: &TransitionMatrix) -> Result<Distribution> {
    let class = classify(w);
    if !class.ergodic {
        return Err(Error::NotErgodic {
            period: class.period,
        });
    }
    Ok(perron(w.matrix())?.right_vec)
}

/// `Z = (I − (W − A))⁻¹` with `A[x][x̄] = π(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalMatrix {
    pub z: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub pi: Distribution,
}

pub fn fundamental(w: &TransitionMatrix) -> Result<FundamentalMatrix> {
    let pi = stationary(w)?;
    let d = w.dim();
    let a = DMatrix::from_fn(d, d, |i, _| pi[i]);
    let system = DMatrix::<f64>::identity(d, d) - w.matrix() + &a;
    let z = system.try_inverse().ok_or(Error::SingularSystem)?;
    if z.iter().any(|v| !v.is_finite()) {
        return Err(Error::SingularSystem);
    }
    Ok(FundamentalMatrix { z, a, pi })
}
