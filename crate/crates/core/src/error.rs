use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed Cantor spec: {0}")]
    InvalidSpec(String),

    #[error("partition intervals {first} and {second} overlap")]
    OverlappingIntervals { first: usize, second: usize },

    #[error("branch on interval {index} is not expanding (inf |psi'| = {min_derivative})")]
    NonExpandingBranch { index: usize, min_derivative: f64 },

    #[error("symbol {index} has no admissible successor (all-zero transition row)")]
    DeadSymbol { index: usize },

    #[error("image of interval {index} does not match its transition row: {detail}")]
    MarkovImageMismatch { index: usize, detail: String },

    #[error("depth {depth} has {count} admissible words, above the cap of {cap}")]
    DepthOverflow { depth: usize, count: u128, cap: u128 },

    #[error("operation requires every branch to be affine")]
    NonAffineSpec,

    #[error("no dimension root in [0, 1]: spectral radius at d = 1 is {radius_at_one}")]
    NoRootInUnitInterval { radius_at_one: f64 },

    #[error("dimension solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    DimensionNotConverged { residual: f64, tolerance: f64 },

    #[error("rho = {rho} is too large: level-1 interval {index} has length {length} < rho")]
    RhoTooLarge { rho: f64, index: usize, length: f64 },

    #[error("invalid scale rho = {0}")]
    InvalidRho(f64),

    #[error("budget exceeded: {what} = {actual} > cap {cap}")]
    BudgetExceeded { what: &'static str, actual: u128, cap: u128 },

    #[error("projection {value} of a square lies outside [-2, 2] at theta = {theta}")]
    ProjectionOutOfRange { theta: f64, value: f64 },

    #[error("angle {0} outside [-pi/2, pi/2]")]
    AngleOutOfRange(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by a resource cap rather than bad input.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. } | Error::DepthOverflow { .. })
    }
}
