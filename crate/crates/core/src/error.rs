use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("system of {n_sites} sites exceeds the dense limit of {max} sites")]
    DimensionOverflow { n_sites: usize, max: usize },

    #[error("operators do not commute (max |[A, B]| = {norm:.3e})")]
    NonCommutingOperators { norm: f64 },

    #[error("polynomial root residual {residual:.3e} exceeds tolerance")]
    IllConditionedPolynomial { residual: f64 },

    #[error("mode k = {k} has vanishing dispersion cos(2πk/N) for N = {n_sites}")]
    SingularMode { k: i64, n_sites: usize },

    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    IndexOutOfRange { index: usize, n_qubits: usize },

    #[error("two-qubit gate needs distinct targets, got {0} twice")]
    RepeatedTarget(usize),

    #[error("partial trace needs a nonempty keep set")]
    EmptyKeepSet,

    #[error("expected {expected} ansatz angles, got {got}")]
    AngleCountMismatch { expected: usize, got: usize },

    #[error("optimizer stopped after {iterations} iterations without meeting tolerance")]
    DidNotConverge { iterations: usize },

    #[error("unsupported Hamiltonian term: {0}")]
    UnsupportedTerm(String),

    #[error("zero set lives in the {found} plane, expected {expected}")]
    PlaneMismatch { expected: String, found: String },

    #[error("reconstructed partition function is not real positive: {0}")]
    NonPositivePartition(String),

    #[error("record layout mismatch: {0}")]
    LayoutMismatch(String),

    #[error("no shots left after filtering")]
    EmptyAfterFiltering,

    #[error("zero set has {got} zeros, expected {expected}")]
    ZeroCountMismatch { expected: usize, got: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
