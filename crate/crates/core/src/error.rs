use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid region: {0}")]
    InvalidRegion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("query point {point:?} lies outside the oracle region [-{radius}, {radius}]^d")]
    OutOfRegion { point: Vec<f64>, radius: f64 },

    #[error("query budget exhausted: {used} used, {requested} requested, budget {budget}")]
    BudgetExhausted { used: u64, requested: u64, budget: u64 },

    #[error(
        "budget {total} is not a multiple of the node count {nodes}; nearest valid budgets are {below} and {above}"
    )]
    IndivisibleBudget { total: u64, nodes: u64, below: u64, above: u64 },

    #[error("budget {total} is smaller than the node count {nodes}")]
    BudgetTooSmall { total: u64, nodes: u64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("packing construction reached {achieved} of {target} members after {attempts} attempts")]
    PackingConstruction { achieved: usize, target: usize, attempts: u64 },

    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::InvalidRegion(_) => "invalid_region",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::OutOfRegion { .. } => "out_of_region",
            Error::BudgetExhausted { .. } => "budget_exhausted",
            Error::IndivisibleBudget { .. } => "indivisible_budget",
            Error::BudgetTooSmall { .. } => "budget_too_small",
            Error::Parse { .. } => "parse",
            Error::PackingConstruction { .. } => "packing_construction",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
