//! Small reference instances used by the examples, tests and docs.

use crate::chain::{stationary, TransitionMatrix};
use crate::error::Result;
use crate::expfamily::{GeneratorSpec, TiltedFamily};
use crate::testing::{build_ht, HTFamily};

/// `[[0.7, 0.4], [0.3, 0.6]]`, stationary law `(4/7, 3/7)`.
pub fn chain_a() -> TransitionMatrix {
    TransitionMatrix::new(&[vec![0.7, 0.4], vec![0.3, 0.6]]).expect("valid fixture")
}

/// `[[0.6, 0.3], [0.4, 0.7]]`, stationary law `(3/7, 4/7)`.
pub fn chain_b() -> TransitionMatrix {
    TransitionMatrix::new(&[vec![0.6, 0.3], vec![0.4, 0.7]]).expect("valid fixture")
}

/// A three-state chain with a zero entry.
pub fn chain_c() -> TransitionMatrix {
    TransitionMatrix::new(&[
        vec![0.5, 0.2, 0.0],
        vec![0.3, 0.5, 0.6],
        vec![0.2, 0.3, 0.4],
    ])
    .expect("valid fixture")
}

/// Chain A with `g(x, x̄) = 1{x = 1}`, started from stationarity.
pub fn family_a() -> Result<TiltedFamily> {
    let w = chain_a();
    let pi = stationary(&w)?;
    TiltedFamily::new(w, GeneratorSpec::indicator(2, 1), pi)
}

/// Chain A against chain B, each started from its stationary law.
pub fn ht_ab() -> Result<HTFamily> {
    let (w0, w1) = (chain_a(), chain_b());
    let p0 = stationary(&w0)?;
    let p1 = stationary(&w1)?;
    build_ht(&w0, &p0, &w1, &p1)
}

/// Chain file for chain A with the indicator generator and chain B as the
/// alternative hypothesis.
pub const CHAIN_A_SPEC: &str = r#"{
  "states": ["a", "b"],
  "matrix": [[0.7, 0.4], [0.3, 0.6]],
  "initial": [0.5714285714285714, 0.42857142857142855],
  "generator": { "g": [[0.0, 0.0], [1.0, 1.0]] },
  "second_chain": {
    "matrix": [[0.6, 0.3], [0.4, 0.7]],
    "initial": [0.42857142857142855, 0.5714285714285714]
  }
}
"#;
