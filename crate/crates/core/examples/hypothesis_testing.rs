//! Testing chain A (null) against chain B (alternative): finite-length
//! bounds on the optimal second-kind error, the Hoeffding exponent and the
//! exact Neyman–Pearson value.

use markov_bounds::divergence::hoeffding_exponent;
use markov_bounds::oracle::DEFAULT_BUDGET;
use markov_bounds::testing::{exact_beta, ht_bounds, stein_strassen, Constraint};
use markov_bounds::{fixtures, Error, TailOptions};

fn main() -> Result<(), Error> {
    let ht = fixtures::ht_ab()?;
    println!("D(W0‖W1) = {:.12}, D(W1‖W0) = {:.12}", ht.d01, ht.d10);

    let r = ht.d01 / 2.0;
    let h = hoeffding_exponent(&ht.fam, r)?;
    println!("Hoeffding exponent at r = {r:.6}: {:.10} (θ̂ = {:.6}, spread {:.1e})", h.value, h.theta_hat, h.spread());

    let opts = TailOptions::default();
    for n in [200, 1000, 10_000] {
        let b = ht_bounds(&ht, n, Constraint::Exponent(r), &opts)?;
        println!(
            "n = {n:>6}: {:.4} ≤ −log β ≤ {:.4}   (n·exponent = {:.4})",
            b.lower_neg_log_beta,
            b.upper_neg_log_beta,
            n as f64 * h.value
        );
    }

    println!("exact optimal test at level ε = 0.5:");
    for n in [6, 8, 10, 12] {
        let e = exact_beta(&ht, n, 0.5, DEFAULT_BUDGET, true)?;
        println!(
            "  n = {n:>2}: −log β / n = {:.6}   second-order expansion / n = {:.6}",
            -e.beta.ln() / n as f64,
            stein_strassen(&ht, n, 0.5)? / n as f64
        );
    }
    Ok(())
}
