use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("degree error: {0}")]
    Degree(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("non-finite values in {0}")]
    NonFinite(String),
    #[error("chirality mismatch: {0}")]
    Chirality(String),
    #[error("invalid bundle data: {0}")]
    Bundle(String),
    #[error("configuration is not reducible: |phi| = {0:e}")]
    NotReducible(f64),
    #[error("configuration is not critical: |grad| = {0:e}")]
    NotCritical(f64),
    #[error(
        "conjugate gradient did not converge after {iterations} iterations (residual {residual:e})"
    )]
    CgNonConvergence { iterations: usize, residual: f64 },
    #[error("Lanczos did not converge: {0}")]
    LanczosNonConvergence(String),
    #[error("dimension {dim} exceeds the dense cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("operator is not symmetric: defect {0:e}")]
    Asymmetric(f64),
    #[error("ambiguous index: eigenvalue {eigenvalue:e} lies within the threshold band of tau = {tau:e}")]
    AmbiguousIndex { eigenvalue: f64, tau: f64 },
    #[error("spectral bound violated: eigenvalue {eigenvalue:e} below certified bound {bound:e}")]
    BoundViolated { eigenvalue: f64, bound: f64 },
    #[error("flow diverged at iteration {0}: no decrease after maximal backtracking")]
    FlowDiverged(usize),
    #[error("snapshot format version {found} is not supported (expected {expected})")]
    SnapshotVersion { found: u32, expected: u32 },
    #[error("snapshot checksum mismatch for payload {0}")]
    Checksum(String),
    #[error("snapshot manifest: {0}")]
    Manifest(String),
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
