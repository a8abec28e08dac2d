use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian: ‖A − A†‖ = {residual:.3e} > {tol:.3e}")]
    NotHermitian { residual: f64, tol: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps")]
    NoConvergence { sweeps: usize },

    #[error("matrix contains NaN or infinite entries")]
    NonFinite,

    #[error("singular matrix in linear solve")]
    SingularMatrix,

    #[error("matrix is not positive semidefinite: min eigenvalue {min_eigenvalue:.3e} < −{tol:.3e}")]
    NotPsd { min_eigenvalue: f64, tol: f64 },

    #[error("number of eigenspaces changed from {expected} to {found} at s = {s}")]
    DegeneracyChange { expected: usize, found: usize, s: f64 },

    #[error("ambiguous eigenvalue clustering at s = {s}: gap {gap:.3e} is within an order of magnitude of the degeneracy tolerance")]
    AmbiguousClustering { s: f64, gap: f64 },

    #[error("transport frame jumps by {jump:.3e} between s = {from} and s = {to}")]
    FrameDiscontinuity { from: f64, to: f64, jump: f64 },

    #[error("gap functions ({k},{l}) and ({kp},{lp}) meet tangentially near s = {s}: slope {slope:.3e}")]
    TangentialCrossing { k: usize, l: usize, kp: usize, lp: usize, s: f64, slope: f64 },

    #[error("block set is not closed: block ({k},{l}) is coupled to ({kp},{lp}) which is missing")]
    BlockNotClosed { k: usize, l: usize, kp: usize, lp: usize },

    #[error("resonance matrix has negative eigenvalue {value:.3e}")]
    NegativeGSpectrum { value: f64 },

    #[error("invalid initial state: {reason}")]
    InvalidInitialState { reason: String },

    #[error("step too large: Δs·‖M‖ = {product:.3} exceeds {limit}")]
    StepTooLarge { product: f64, limit: f64 },

    #[error("projected state has trace {trace:.3e}, below the normalization floor")]
    EmptySubspace { trace: f64 },

    #[error("trajectory grids differ")]
    GridMismatch,

    #[error("gauge is singular at θ = {theta}, φ = {phi}")]
    GaugeSingularity { theta: f64, phi: f64 },

    #[error("invalid path split: {reason}")]
    BadSplit { reason: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
