use thiserror::Error;

/// Errors raised by the simulator, the model builders and the oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("basis index {index} out of range for {n_qubits} qubits")]
    BasisIndexOutOfRange { index: usize, n_qubits: usize },
    #[error("qubit {qubit} out of range for {n_qubits} qubits")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("amplitude vector has length {got}, expected {expected}")]
    WrongLength { expected: usize, got: usize },
    #[error("amplitude vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },
    #[error("cannot load the zero vector as a quantum state")]
    ZeroVector,
    #[error("gate targets clash: qubits {0} and {1}")]
    TargetClash(usize, usize),
    #[error("control qubit {control} collides with gate targets")]
    ControlClash { control: usize },
    #[error("matrix is not unitary (max deviation {deviation:e})")]
    NotUnitary { deviation: f64 },
    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },
    #[error("register size mismatch: {0} vs {1} qubits")]
    DimensionMismatch(usize, usize),
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("shot count must be at least 1")]
    ZeroShots,

    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("invalid plaquette: {0}")]
    InvalidPlaquette(String),
    #[error("group {label} is not a matching: site {site} appears twice")]
    NotAMatching { label: String, site: usize },
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid Trotter plan: {0}")]
    InvalidPlan(String),

    #[error(
        "spectral gap closed: gap {gap:e} < {threshold:e} at t = {t:.6} (twist sum {twist_sum:.6}); \
         no Berry phase can be defined"
    )]
    GapClosed {
        gap: f64,
        threshold: f64,
        t: f64,
        twist_sum: f64,
        /// Evolution time reached when the guard tripped, if it fired during an evolution.
        reached_t: Option<f64>,
    },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("Wilson loop needs at least 16 points, got {0}")]
    TooFewPoints(usize),
    #[error("system too large for exact diagonalization: {0} sites")]
    TooLarge(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
