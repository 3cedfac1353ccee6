//! The tilted family of a chain and the finite-length CGF sandwich
//! `nφ(θ) + δ̲(θ) ≤ log E e^{θ g̃ⁿ} ≤ nφ(θ) + δ̄(θ)`.

use markov_bounds::expfamily::asymptotic_variance;
use markov_bounds::{fixtures, Error};

fn main() -> Result<(), Error> {
    let fam = fixtures::family_a()?;
    println!("η(0) = {:.6}, φ″(0) = {:.6}", fam.eta(0.0)?, asymptotic_variance(fam.base(), fam.generator())?);

    println!("{:>4} {:>6} {:>12} {:>12} {:>12}", "n", "θ", "lower", "exact", "upper");
    for n in [1, 5, 20] {
        for theta in [-1.0, 0.5, 2.0] {
            let b = fam.cgf_bounds(n, theta)?;
            let exact = fam.cgf_exact(n, theta)?;
            println!("{n:>4} {theta:>6} {:>12.6} {exact:>12.6} {:>12.6}", b.lower, b.upper);
        }
    }

    // One step from stationarity with θ = ln 2: E 2^{1{X₁=1}} = 1 + 3/7.
    println!("cgf(1, ln 2) = {} vs ln(10/7) = {}", fam.cgf_exact(1, std::f64::consts::LN_2)?, (10.0f64 / 7.0).ln());

    let p = fam.point(1.0)?;
    println!("W_1 =\n{}  π_1 = {:?}", p.w_theta.matrix(), p.pi_theta);
    Ok(())
}
