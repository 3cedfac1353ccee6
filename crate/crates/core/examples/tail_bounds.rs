//! Two-sided finite-length bounds on the tail `P(g̃ⁿ ≥ na)`, compared with
//! the exact value from path enumeration.

use markov_bounds::oracle::{enumerate_family, exact_tail, DEFAULT_BUDGET};
use markov_bounds::tail::{ld_rate, tail_bounds};
use markov_bounds::{fixtures, Error, Side, TailOptions};

fn main() -> Result<(), Error> {
    let fam = fixtures::family_a()?;
    let opts = TailOptions::default();
    println!("{:>4} {:>5} {:>6} {:>10} {:>10} {:>10}", "n", "a", "side", "lower", "exact", "upper");
    for (a, side) in [(0.6, Side::Upper), (0.8, Side::Upper), (0.25, Side::Lower)] {
        for n in [5, 10, 16] {
            let r = tail_bounds(&fam, n, a, side, &opts)?;
            let d = enumerate_family(&fam, n, DEFAULT_BUDGET)?;
            let exact = -exact_tail(&d, a, side).ln();
            println!(
                "{n:>4} {a:>5} {side:>6} {:>10.5} {exact:>10.5} {:>10.5}",
                r.lower_bound_on_neg_log, r.upper_bound_on_neg_log
            );
        }
    }
    // Per-step rates approach the large-deviation rate.
    let eta = fam.eta(0.0)?;
    println!("LD rate at a = 0.6: {:.6}", ld_rate(&fam, 0.6 - eta, Side::Upper)?);
    for n in [100, 1000, 10_000] {
        let r = tail_bounds(&fam, n, 0.6, Side::Upper, &opts)?;
        println!(
            "n = {n:>6}: lower/n = {:.6}, upper/n = {:.6}",
            r.lower_bound_on_neg_log / n as f64,
            r.upper_bound_on_neg_log / n as f64
        );
    }
    Ok(())
}
