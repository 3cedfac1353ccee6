//! Relative entropy and Rényi divergence rates between two chains, and the
//! Legendre transform of the potential.

use markov_bounds::divergence::{legendre, legendre_inf_form, DivergencePair};
use markov_bounds::{fixtures, Error};

fn main() -> Result<(), Error> {
    let pair = DivergencePair::new(fixtures::chain_a(), fixtures::chain_b())?;
    println!("D(A‖B) = {:.12}", pair.relative_entropy()?);
    for s in [-0.5, -0.1, 0.1, 0.5, 1.0, 2.0] {
        println!("  D_{{1+{s}}}(A‖B) = {:.12}", pair.renyi(s)?);
    }

    let fam = fixtures::family_a()?;
    for a in [0.2, 0.6, 0.8] {
        let l = legendre(&fam, a)?;
        println!(
            "a = {a}: sup θa − φ(θ) = {:.10} at θ* = {:.6}; inf-over-Rényi form = {:.10}",
            l.value,
            l.theta_star,
            legendre_inf_form(&fam, a)?
        );
    }
    Ok(())
}
