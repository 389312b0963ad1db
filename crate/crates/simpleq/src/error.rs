use thiserror::Error;

/// Errors produced by grid construction, quadrature, solvers and file I/O.
#[derive(Debug, Error)]
pub enum SimpleqError {
    #[error("field contains non-finite values (first bad index {index})")]
    NonFiniteField { index: usize },

    #[error("grid mismatch: {left} vs {right} nodes (or differing spacing)")]
    GridMismatch { left: usize, right: usize },

    #[error("invalid grid: {reason}")]
    InvalidGrid { reason: String },

    #[error("invalid potential: {reason}")]
    InvalidPotential { reason: String },

    #[error("operator requires e > 0, got {e}")]
    NonPositiveEnergy { e: f64 },

    #[error("potential has not decayed at r_max = {r_max}: V(r_max)/max V = {ratio:.3e}; enlarge the grid")]
    PotentialNotDecayed { r_max: f64, ratio: f64 },

    #[error("tridiagonal system is singular at row {row}")]
    SingularSystem { row: usize },

    #[error("invalid solve parameters: {reason}")]
    InvalidParams { reason: String },

    #[error("degenerate potential: Int V dx = {int_v} (must be positive)")]
    DegeneratePotential { int_v: f64 },

    #[error("iteration breakdown at step {step}: Int (1-u)V = {value} is not positive")]
    IterationBreakdown { step: usize, value: f64 },

    #[error("solver did not converge: bracket width {gap:.3e} after {iterations} iterations (tolerance {tol:.3e})")]
    NotConverged { gap: f64, iterations: usize, tol: f64 },

    #[error("energy curve is not monotone in rho near row {row}; e(rho) inversion aborted (monotonicity of rho(e) is conjectural)")]
    NonMonotoneCurve { row: usize },

    #[error("target {value} outside sampled range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("{context}: need at least {needed} rows/points, got {got}")]
    TooFewPoints { context: String, needed: usize, got: usize },

    #[error("decay-fit window is empty or below the resolution floor: {reason}")]
    EmptyFitWindow { reason: String },

    #[error("beta = {beta} is not positive; structure factor expansion is invalid here")]
    NonPositiveBeta { beta: f64 },

    #[error("malformed {what} at line {line}: {reason}")]
    MalformedInput { what: String, line: usize, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, SimpleqError>;
