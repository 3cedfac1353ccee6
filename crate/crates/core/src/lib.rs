//! Finite-length bounds for additive functionals of finite-state ergodic
//! Markov chains.
//!
//! Matrices are column-stochastic throughout: `W(x|x̄)` sits at row `x`,
//! column `x̄`. The pieces, bottom up:
//!
//! - [`chain`]: validation, classification, Perron data, stationary law,
//!   fundamental matrix.
//! - [`expfamily`]: the tilted family `W_θ`, potential `φ(θ)`, finite-`n`
//!   CGF and its two-sided bounds, asymptotic variance.
//! - [`divergence`]: relative entropy and Rényi divergence rates, Legendre
//!   transforms, Hoeffding exponent, projections, data processing.
//! - [`tail`]: lower and upper bounds on `−log P(g̃ⁿ ≥ na)` (or `≤`).
//! - [`testing`]: bounds on the optimal second-kind error of a test between
//!   two chains.
//! - [`oracle`]: exact path enumeration and a seeded sampler, used to check
//!   everything above.
//! - [`cli`]: the `markov-bounds` command-line front end.

pub mod chain;
pub mod cli;
pub mod divergence;
pub mod error;
pub mod expfamily;
pub mod fixtures;
pub mod optimize;
pub mod oracle;
pub mod tail;
pub mod testing;

pub use chain::TransitionMatrix;
pub use error::{Error, Result};
pub use expfamily::{GeneratorSpec, TiltedFamily};
pub use tail::{Side, TailOptions};
