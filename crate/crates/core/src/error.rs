use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("cannot parse number {text:?}: {reason}")]
    Number { text: String, reason: String },
    #[error("config: {0}")]
    Config(String),
    #[error("line {line}: {reason}")]
    Line { line: usize, reason: String },
}

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("unknown catalog domain {0:?}")]
    UnknownDomain(String),
    #[error("invalid parameters for {name}: {reason}")]
    InvalidParams { name: String, reason: String },
    #[error("invalid polygon: {0}")]
    InvalidPolygon(String),
    #[error("invalid exterior map: {0}")]
    InvalidMap(String),
    #[error("area formula is non-positive ({value}); series not univalent or under-truncated")]
    NonPositiveArea { value: f64 },
}

#[derive(Debug, Error)]
pub enum SeriesError {
    #[error("precision mismatch: {left} vs {right} digits")]
    PrecisionMismatch { left: u32, right: u32 },
    #[error("leading coefficient is zero")]
    ZeroLeading,
    #[error("reversion needs top power 1, got {0}")]
    TopPower(i64),
    #[error("coefficient index {index} beyond truncation depth {depth}")]
    BeyondDepth { index: i64, depth: i64 },
    #[error("reversion did not converge (residual {residual:e})")]
    ReversionFailed { residual: f64 },
}

#[derive(Debug, Error)]
pub enum MomentError {
    #[error("degenerate (zero-length) edge at vertex {0}")]
    DegenerateEdge(usize),
    #[error("boundary quadrature did not converge after {levels} refinements (last change {change:e})")]
    NotConverged { levels: usize, change: f64 },
    #[error("moment cache corrupt: {0}")]
    CacheCorrupt(String),
    #[error("cache i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Error)]
pub enum BergmanError {
    #[error("Cholesky breakdown at index {index}; roughly {required_digits} digits needed")]
    CholeskyBreakdown { index: usize, required_digits: u32 },
    #[error("degree {n} exceeds basis degree {max}")]
    DegreeOutOfRange { n: usize, max: usize },
    #[error("root finder did not converge for root {index} (residual {residual:e})")]
    RootsNotConverged { index: usize, residual: f64 },
}

#[derive(Debug, Error)]
pub enum ConformalError {
    #[error("Newton inversion of the exterior map did not converge at z = {z}")]
    NotConverged { z: String },
    #[error(
        "inverse image |w| = {modulus} lies in the closed unit disk; z is not exterior or too close to the boundary"
    )]
    NotExterior { modulus: f64 },
    #[error("|p_n(z)| below underflow guard at z = {z}")]
    NearZero { z: String },
    #[error("point {z} is not interior to the domain")]
    NotInterior { z: String },
    #[error("segment leaves the domain and no interior polyline was found")]
    SegmentExits,
    #[error("domain has no exterior map")]
    NoExteriorMap,
}

#[derive(Debug, Error)]
pub enum DiagnosticsError {
    #[error("capacity unknown for this domain; refusing to use the ratio estimate")]
    CapacityUnavailable,
    #[error("reflection factor k not supplied; check skipped")]
    ReflectionFactorMissing,
    #[error("non-positive value {value:e} at n = {n} in rate fit")]
    NonPositive { n: usize, value: f64 },
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("tail remainder uncertainty {uncertainty:e} exceeds tolerance {tolerance:e} of the sum")]
    TailNotConverged { uncertainty: f64, tolerance: f64 },
    #[error("operation needs a map-defined domain")]
    NeedsMap,
    #[error("fit needs at least two points")]
    TooFewPoints,
}

/// Crate-level error with module provenance.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse: {0}")]
    Parse(#[from] ParseError),
    #[error("geometry: {0}")]
    Geometry(#[from] GeometryError),
    #[error("series: {0}")]
    Series(#[from] SeriesError),
    #[error("moments: {0}")]
    Moments(#[from] MomentError),
    #[error("bergman: {0}")]
    Bergman(#[from] BergmanError),
    #[error("conformal: {0}")]
    Conformal(#[from] ConformalError),
    #[error("diagnostics: {0}")]
    Diagnostics(#[from] DiagnosticsError),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
