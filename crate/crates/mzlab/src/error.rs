use thiserror::Error;

/// Errors surfaced by grid, kernel, frame and operator construction or
/// evaluation. Quadrature failures are always reported, never silently
/// absorbed into an inaccurate value.
#[derive(Debug, Error)]
pub enum MzError {
    #[error("grid size {0} is not a power of two >= 16")]
    BadGridSize(usize),
    #[error("grid half-width must be positive, got {0}")]
    BadGridLength(f64),
    #[error("expected a {expected} field, got a {got} field")]
    DomainTagMismatch { expected: &'static str, got: &'static str },
    #[error("field length {got} does not match grid size {want}")]
    BadFieldLength { got: usize, want: usize },
    #[error("multiplier symbol returned a non-finite value at frequency ({0}, {1})")]
    NonFiniteSymbol(f64, f64),
    #[error("annulus must satisfy 0 < inner < outer, got [{0}, {1}]")]
    BadAnnulus(f64, f64),
    #[error("annulus outer radius {outer} is not below the Nyquist bound {nyquist}")]
    BandExceedsNyquist { outer: f64, nyquist: f64 },
    #[error("dilation would alias: field has support at |k| = {0}, limit is {1}")]
    DilationAliases(f64, f64),
    #[error("L^p norm requires p > 1, got {0}")]
    BadExponent(f64),
    #[error("kernel needs at least 64 angular samples, got {0}")]
    TooFewSamples(usize),
    #[error("non-finite kernel value at angle {0}")]
    NonFiniteKernel(f64),
    #[error("non-finite radial weight at r = {0}")]
    NonFiniteWeight(f64),
    #[error("beta must lie in (0, 1], got {0}")]
    BadBeta(f64),
    #[error("gamma must be >= 1, got {0}")]
    BadGamma(f64),
    #[error("profile rejected: {0}")]
    ProfileRejected(String),
    #[error("lacunarity parameter must exceed 1, got {0}")]
    BadLacunarity(f64),
    #[error("sequence does not cover the requested band [{lo}, {hi}]; covered [{cov_lo}, {cov_hi}]")]
    BandNotCovered { lo: f64, hi: f64, cov_lo: f64, cov_hi: f64 },
    #[error("field is not zero-mean: |c(0)| = {0}")]
    NotZeroMean(f64),
    #[error("zero field rejected (ratio denominator)")]
    ZeroField,
    #[error("quadrature did not converge: {0}")]
    QuadratureNonConvergence(String),
    #[error("quadrature node budget exceeded: needed {needed}, cap {cap}")]
    QuadratureBudget { needed: usize, cap: usize },
    #[error("shell telescoping not converged: residual bound {residual:.3e} exceeds {tol:.3e} after {depth} shells")]
    TelescopingNotConverged { residual: f64, tol: f64, depth: usize },
    #[error("invalid parameter domain: {0}")]
    InvalidDomain(String),
    #[error("decay table is degenerate: {0}")]
    DegenerateTable(String),
    #[error("t-grid must satisfy 0 < t_min < t_max and >= 4 points per octave")]
    BadTGrid,
    #[error("config error: {0}")]
    Config(String),
    #[error("symbol table codec: {0}")]
    SymbolTable(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, MzError>;
