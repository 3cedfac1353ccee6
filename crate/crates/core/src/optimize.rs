//! Small one- and two-dimensional search routines shared by the bound
//! evaluators: bisection, golden-section search and grid-seeded coordinate
//! refinement. All searches are deterministic for a given grid.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Root of a monotone function on `[lo, hi]`. The caller guarantees a sign
/// change; the returned point brackets the root to `tol`.
pub fn bisect(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        if (hi - lo).abs() <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization on `[lo, hi]`. Returns the best point seen,
/// endpoints included. Non-finite values compare as `+∞`.
pub fn golden_min(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let mut eval = |x: f64| {
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let (mut a, mut b) = (lo.min(hi), lo.max(hi));
    let mut best = (a, eval(a));
    let fb = eval(b);
    if fb < best.1 {
        best = (b, fb);
    }
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = eval(c);
    let mut fd = eval(d);
    for _ in 0..200 {
        if fc < best.1 {
            best = (c, fc);
        }
        if fd < best.1 {
            best = (d, fd);
        }
        if (b - a).abs() <= tol * (1.0 + c.abs()) {
            break;
        }
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = eval(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = eval(d);
        }
    }
    best
}

/// Golden-section maximization; see [`golden_min`].
pub fn golden_max(mut f: impl FnMut(f64) -> f64, lo: f64, hi: f64, tol: f64) -> (f64, f64) {
    let (x, v) = golden_min(|x| -f(x), lo, hi, tol);
    (x, -v)
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..points)
            .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
            .collect(),
    }
}

/// `points` values spaced evenly in `log10` between `10^lo_exp` and `10^hi_exp`.
pub fn log_grid(lo_exp: f64, hi_exp: f64, points: usize) -> Vec<f64> {
    linspace(lo_exp, hi_exp, points)
        .into_iter()
        .map(|e| 10f64.powf(e))
        .collect()
}

/// Grid scan followed by golden-section refinement between the neighbours
/// of the best grid point. `grid` must be sorted ascending.
pub fn grid_max_1d(mut f: impl FnMut(f64) -> f64, grid: &[f64], tol: f64) -> Option<(f64, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &x) in grid.iter().enumerate() {
        let v = f(x);
        if v.is_finite() && best.is_none_or(|b| v > b.1) {
            best = Some((i, v));
        }
    }
    let (k, v) = best?;
    let lo = grid[k.saturating_sub(1)];
    let hi = grid[(k + 1).min(grid.len() - 1)];
    let (x, w) = golden_max(&mut f, lo, hi, tol);
    Some(if w > v { (x, w) } else { (grid[k], v) })
}

/// Location and value of a two-dimensional minimum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Min2 {
    pub x: f64,
    pub y: f64,
    pub value: f64,
}

/// Exhaustive grid scan followed by `rounds` of coordinate-wise golden
/// refinement around the best grid point. Returns `None` when every grid
/// value is non-finite. Both grids must be sorted ascending.
pub fn grid_min_2d(
    mut f: impl FnMut(f64, f64) -> f64,
    xs: &[f64],
    ys: &[f64],
    rounds: usize,
) -> Option<Min2> {
    let mut best: Option<(usize, usize, f64)> = None;
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            let v = f(x, y);
            if v.is_finite() && best.is_none_or(|b| v < b.2) {
                best = Some((i, j, v));
            }
        }
    }
    let (i, j, value) = best?;
    let spacing = |g: &[f64], k: usize| {
        let left = if k > 0 { g[k] - g[k - 1] } else { 0.0 };
        let right = if k + 1 < g.len() { g[k + 1] - g[k] } else { 0.0 };
        left.max(right)
    };
    let mut hx = spacing(xs, i);
    let mut hy = spacing(ys, j);
    let mut cur = Min2 {
        x: xs[i],
        y: ys[j],
        value,
    };
    let (xlo, xhi) = (xs[0], xs[xs.len() - 1]);
    let (ylo, yhi) = (ys[0], ys[ys.len() - 1]);
    for _ in 0..rounds {
        if hx > 0.0 {
            let y = cur.y;
            let (x, v) = golden_min(
                |x| f(x, y),
                (cur.x - hx).max(xlo),
                (cur.x + hx).min(xhi),
                1e-12,
            );
            if v < cur.value {
                cur.x = x;
                cur.value = v;
            }
        }
        if hy > 0.0 {
            let x = cur.x;
            let (y, v) = golden_min(
                |y| f(x, y),
                (cur.y - hy).max(ylo),
                (cur.y + hy).min(yhi),
                1e-12,
            );
            if v < cur.value {
                cur.y = y;
                cur.value = v;
            }
        }
        hx *= 0.5;
        hy *= 0.5;
    }
    Some(cur)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bisect_finds_sqrt2() {
        let r = bisect(|x| x * x - 2.0, 0.0, 2.0, 1e-14);
        assert!((r - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn golden_finds_parabola_min() {
        let (x, v) = golden_min(|x| (x - 0.3).powi(2) + 1.0, -2.0, 5.0, 1e-12);
        assert!((x - 0.3).abs() < 1e-6);
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn golden_handles_infinite_regions() {
        let (x, v) = golden_min(
            |x| if x < 1.0 { f64::INFINITY } else { x },
            0.0,
            3.0,
            1e-12,
        );
        assert!((x - 1.0).abs() < 1e-9 && (v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn grid_min_2d_refines() {
        let f = |x: f64, y: f64| (x - 0.123).powi(2) + 2.0 * (y + 0.456).powi(2) + 0.5 * x * y;
        let m = grid_min_2d(f, &linspace(-1.0, 1.0, 11), &linspace(-1.0, 1.0, 11), 6).unwrap();
        // Stationary point of the quadratic, solved by hand.
        let det = 2.0 * 4.0 - 0.25;
        let x = (2.0 * 0.123 * 4.0 - 0.5 * (-4.0 * 0.456)) / det;
        let y = (2.0 * (-4.0 * 0.456) - 0.5 * 2.0 * 0.123) / det;
        assert!((m.x - x).abs() < 1e-4 && (m.y - y).abs() < 1e-4, "{m:?} vs ({x},{y})");
    }

    #[test]
    fn grid_min_2d_all_infinite() {
        assert!(grid_min_2d(|_, _| f64::INFINITY, &[0.0, 1.0], &[0.0], 3).is_none());
    }

    #[test]
    fn grid_max_1d_refines() {
        let (x, v) = grid_max_1d(|x| -(x - 0.337).powi(2), &linspace(0.0, 1.0, 11), 1e-12).unwrap();
        assert!((x - 0.337).abs() < 1e-6 && v.abs() < 1e-12);
    }

    #[test]
    fn grids() {
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
        let g = log_grid(-3.0, 3.0, 61);
        assert_eq!(g.len(), 61);
        assert!((g[0] - 1e-3).abs() < 1e-18 && (g[60] - 1e3).abs() < 1e-9);
    }
}
