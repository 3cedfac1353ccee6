//! Projection onto a mean set, and data processing for a chain whose first
//! coordinate is itself Markov.

use markov_bounds::divergence::{ipi_check, m_projection, tilt_to_mean};
use markov_bounds::{fixtures, Error, GeneratorSpec, TransitionMatrix};

fn main() -> Result<(), Error> {
    let fam = fixtures::family_a()?;
    // Any chain with stationary mean 0.6 satisfies the Pythagorean identity.
    let other = fixtures::chain_b();
    let gen = GeneratorSpec::indicator(2, 1);
    let test = tilt_to_mean(&other, &gen, 0.6)?;
    let proj = m_projection(&fam, 0.6, &test)?;
    println!("θ* = {:.8}, Pythagorean residual = {:.2e}", proj.theta_star, proj.pythagorean_residual);

    // Joint chains on {0,1}×{0,1}: X follows A (resp. B), Y copies a noisy X.
    let joint = |wx: &TransitionMatrix, noise: f64| {
        let mut rows = vec![vec![0.0; 4]; 4];
        for xp in 0..2 {
            for yp in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        let py = if y == x { 1.0 - noise } else { noise };
                        rows[x * 2 + y][xp * 2 + yp] = wx.get(x, xp) * py;
                    }
                }
            }
        }
        TransitionMatrix::new(&rows)
    };
    let w = joint(&fixtures::chain_a(), 0.1)?;
    let v = joint(&fixtures::chain_b(), 0.3)?;
    let report = ipi_check(&w, &v, 2, 2, &[-0.5, 0.5, 1.0, 2.0])?;
    println!("D joint = {:.8} ≥ D marginal = {:.8}", report.joint, report.marginal);
    for r in &report.renyi {
        println!("  s = {:>4}: margin {:.3e}", r.s, r.margin);
    }

    Ok(())
}
