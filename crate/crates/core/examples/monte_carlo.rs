//! Exact law by enumeration next to a seeded Monte Carlo run.

use markov_bounds::oracle::{enumerate_family, sample, DEFAULT_BUDGET};
use markov_bounds::{fixtures, Error, Side};

fn main() -> Result<(), Error> {
    let fam = fixtures::family_a()?;
    let n = 14;
    let exact = enumerate_family(&fam, n, DEFAULT_BUDGET)?;
    println!("n = {n}: {} atoms, mean {:.6}, variance {:.6}", exact.atoms.len(), exact.mean(), exact.variance());

    let mc = sample(&fam, n, 100_000, 42, &[(0.6, Side::Upper), (0.25, Side::Lower)])?;
    println!("Monte Carlo (seed {}): mean {:.6}, variance {:.6}", mc.seed, mc.mean, mc.variance);
    for t in &mc.tail_estimates {
        println!("  P({} {}) ≈ {:.5}  95% [{:.5}, {:.5}]", t.side, t.threshold, t.frequency, t.interval.0, t.interval.1);
    }

    let big = sample(&fam, 5000, 20_000, 7, &[])?;
    println!("n = 5000: KS distance to the Gaussian limit = {:.4}", big.ks_vs_gaussian);

    let mut buf = Vec::new();
    exact.write_csv(&mut buf)?;
    print!("first rows of the exact law:\n{}", String::from_utf8_lossy(&buf).lines().take(4).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
