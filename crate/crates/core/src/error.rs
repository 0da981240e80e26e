use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian: max |M - M^dagger| = {residual:e}")]
    NotHermitian { residual: f64 },
    #[error("matrix is not positive semidefinite: smallest eigenvalue {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },
    #[error("trace differs from one by {residual:e}")]
    TraceNotOne { residual: f64 },
    #[error("row {row}: entry {col} = {value} is negative")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {row} sums to 1 {residual:+e}")]
    RowNotStochastic { row: usize, residual: f64 },
    #[error("probability vector sums to 1 {residual:+e}")]
    NotDistribution { residual: f64 },
    #[error("{what} must be nonempty")]
    Empty { what: &'static str },
    #[error("dimension mismatch: {what} (expected {expected}, found {found})")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("negative power {exponent} of a rank-deficient operator")]
    NegativePowerOfSingular { exponent: f64 },
    #[error("operators have disjoint supports")]
    DisjointSupports,
    #[error("optimizer stopped after {iterations} iterations with KKT residual {residual:e}")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        value: f64,
        best: Vec<f64>,
    },
    #[error("semidefinite program is infeasible")]
    Infeasible,
    #[error("interior-point solver failed: {reason} (gap {gap:e})")]
    NumericalFailure { reason: &'static str, gap: f64 },
    #[error("program order {order} exceeds the cap {cap}")]
    TooLargeProgram { order: usize, cap: usize },
    #[error("information-radius certificate residual {residual:e} exceeds tolerance")]
    CertificateFailure { residual: f64 },
    #[error("inner product <{a}|{b}> = {value:e} is negative")]
    NonNegativityViolated { a: usize, b: usize, value: f64 },
    #[error("product expansion has {outcomes} outcomes, above the cap {cap}")]
    TooLarge { outcomes: u128, cap: usize },
    #[error("state {index}: {source}")]
    InState { index: usize, source: Box<Error> },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;
