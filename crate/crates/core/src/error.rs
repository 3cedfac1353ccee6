use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square ({rows} rows, row {row} has {cols} entries)")]
    NotSquare { rows: usize, row: usize, cols: usize },

    #[error("matrix is empty")]
    Empty,

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("negative entry {value} at ({row}, {col})")]
    NegativeEntry { row: usize, col: usize, value: f64 },

    #[error("column {col} sums to {sum}, expected 1")]
    ColumnNotStochastic { col: usize, sum: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not irreducible")]
    NotIrreducible,

    #[error("chain is not ergodic (period {period})")]
    NotErgodic { period: usize },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("linear system is singular")]
    SingularSystem,

    #[error("|theta * g| = {value} exceeds the exponent guard")]
    Overflow { value: f64 },

    #[error("generator is degenerate (g = f(x) - f(x') + c on the support)")]
    DegenerateGenerator,

    #[error("{what}: value {value} outside [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("transition matrices have different supports")]
    SupportMismatch,

    #[error("relative entropy routes disagree: {first} vs {second}")]
    ConsistencyFailure { first: f64, second: f64 },

    #[error("joint chain is hidden for the first component (column {col} deviates by {deviation:e})")]
    HiddenChain { col: usize, deviation: f64 },

    #[error("threshold {a} is on the wrong side of the mean {mean}")]
    WrongSide { a: f64, mean: f64 },

    #[error("enumeration needs {required} paths, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Stable machine-readable code, used by the command line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::Empty => "Empty",
            Error::NonFinite { .. } => "NonFinite",
            Error::NegativeEntry { .. } => "NegativeEntry",
            Error::ColumnNotStochastic { .. } => "ColumnNotStochastic",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotIrreducible => "NotIrreducible",
            Error::NotErgodic { .. } => "NotErgodic",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::SingularSystem => "SingularSystem",
            Error::Overflow { .. } => "Overflow",
            Error::DegenerateGenerator => "DegenerateGenerator",
            Error::OutOfRange { .. } => "OutOfRange",
            Error::SupportMismatch => "SupportMismatch",
            Error::ConsistencyFailure { .. } => "ConsistencyFailure",
            Error::HiddenChain { .. } => "HiddenChain",
            Error::WrongSide { .. } => "WrongSide",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }
}
