//! Validate a transition matrix, classify it and compute its stationary law.

use markov_bounds::chain::{classify, fundamental, perron, stationary};
use markov_bounds::{Error, TransitionMatrix};

fn main() -> Result<(), Error> {
    // Column j is the law of the next state given current state j.
    let w = TransitionMatrix::new(&[vec![0.7, 0.4], vec![0.3, 0.6]])?;
    let class = classify(&w);
    println!("irreducible={} ergodic={} period={}", class.irreducible, class.ergodic, class.period);

    let pi = stationary(&w)?;
    println!("stationary = {pi:?}  (4/7, 3/7)");

    let p = perron(w.matrix())?;
    println!("perron eigenvalue = {:.3e}, residual = {:.1e}", p.eigenvalue, p.residual);

    let z = fundamental(&w)?;
    println!("fundamental matrix Z =\n{}", z.z);

    // A periodic chain is irreducible but not ergodic.
    let flip = TransitionMatrix::new(&[vec![0.0, 1.0], vec![1.0, 0.0]])?;
    println!("flip: {:?}", classify(&flip));

    // Rows that don't sum to one per column are rejected.
    match TransitionMatrix::new(&[vec![0.7, 0.4], vec![0.2, 0.6]]) {
        Err(e) => println!("rejected: {} ({e})", e.code()),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
