use thiserror::Error;

/// Crate-wide error type. Variants mirror the failure modes of the
/// individual subsystems so callers can match on them directly.
#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NonPrime(u64),
    #[error("modulus polynomial is reducible over F_{0}")]
    ReducibleModulus(u64),
    #[error("field cardinality p^m = {p}^{m} exceeds the machine-word budget")]
    CardinalityOverflow { p: u64, m: usize },
    #[error("division by zero in field arithmetic")]
    DivisionByZero,
    #[error("element does not belong to this field context")]
    CtxMismatch,
    #[error("multiplicative order of zero is undefined")]
    ZeroElement,
    #[error("distributions live on different carriers")]
    CarrierMismatch,
    #[error("distribution has empty support")]
    EmptySupport,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("point arity {got} does not match polynomial arity {want}")]
    ArityMismatch { want: usize, got: usize },
    #[error("variety has no rational points")]
    EmptyVariety,
    #[error("all extension point counts are zero; no dimension estimate")]
    AllCountsZero,
    #[error("field too small: {0}")]
    FieldTooSmall(String),
    #[error("matrix shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("degree count does not match matrix column count")]
    DegreeCountMismatch,
    #[error("basis matrix is rank deficient")]
    RankDeficientInput,
    #[error("Gabidulin basis elements are linearly dependent over F_p")]
    BasisDependent,
    #[error("parameter bound violated: {0}")]
    BoundViolation(String),
    #[error("input length mismatch: {0}")]
    LengthMismatch(String),
    #[error("residue out of range for the declared modulus")]
    OutOfRange,
    #[error("parameters infeasible: {0}")]
    ParamsInfeasible(String),
    #[error("seed length mismatch: expected {want} bits, got {got}")]
    SeedLengthMismatch { want: u32, got: u32 },
    #[error("requested subspace dimension {k} exceeds ambient dimension {n}")]
    KTooLarge { k: usize, n: usize },
    #[error("LCM of the degree set exceeds q^epsilon and relax mode is off")]
    LcmTooLarge,
    #[error("config error: {0}")]
    ConfigError(String),
    #[error("artifact version mismatch or corrupt artifact: {0}")]
    ArtifactVersionMismatch(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
