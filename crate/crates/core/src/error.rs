use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register width {width} outside the supported range 1..={max}")]
    WidthOutOfRange { width: usize, max: usize },

    #[error("qubit {qubit} out of range for a register of width {width}")]
    QubitOutOfRange { qubit: usize, width: usize },

    #[error("qubit {qubit} listed more than once")]
    DuplicateQubit { qubit: usize },

    #[error("expected {expected} target(s), found {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("gate matrix has {len} entries; expected 4 or 16")]
    MatrixShape { len: usize },

    #[error("gate `{label}` is not unitary (max |U^dag U - I| = {deviation:e})")]
    NotUnitary { label: String, deviation: f64 },

    #[error("amplitudes are not normalized (norm^2 = {norm_sqr})")]
    NotNormalized { norm_sqr: f64 },

    #[error("width mismatch: expected {expected}, found {found}")]
    WidthMismatch { expected: usize, found: usize },

    #[error("conditioning on a zero-probability event: {context}")]
    ZeroProbability { context: String },

    #[error("layer {layer}: qubit {qubit} is targeted by more than one gate")]
    OverlappingGates { layer: usize, qubit: usize },

    #[error("stage {stage}: qubit {qubit} was already measured")]
    ConsumedQubit { stage: usize, qubit: usize },

    #[error("stage {stage}: continuation rule `{rule}` failed: {message}")]
    Rule {
        stage: usize,
        rule: String,
        message: String,
    },

    #[error("{bits} outcome bits exceed the enumeration cap of {cap}")]
    EnumerationCap { bits: usize, cap: usize },

    #[error("source circuit layer {layer}: gate `{label}` is neither CNOT nor a one-qubit gate")]
    UnsupportedSourceGate { layer: usize, label: String },

    #[error("no Pauli correction reproduces CNOT for Bell outcomes {outcome}")]
    NoPauliCorrection { outcome: String },

    #[error("guess has {found} bits; expected {expected}")]
    GuessLength { expected: usize, found: usize },

    #[error("circuit depth {depth} exceeds the supported maximum {max}")]
    DepthExceeded { depth: usize, max: usize },

    #[error("circuit structure cannot be simulated blockwise: {0}")]
    NonMergeable(String),

    #[error("final-output distribution depends on intermediate outcomes (deviation {deviation:e})")]
    FixViolation { deviation: f64 },

    #[error("coin width {coin_width} leaves outcome {outcome} with no coin strings")]
    CoinWidthTooSmall { outcome: String, coin_width: u32 },

    #[error("invalid partition: {0}")]
    Partition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("exhaustive search over {bits} bits exceeds the cap of {cap} bits")]
    SearchCap { bits: u32, cap: u32 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
