use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("mode {mode} out of range for a {modes}-mode basis")]
    ModeOutOfRange { mode: usize, modes: usize },

    #[error("expected a {expected}-mode basis, found {found} modes")]
    WrongModeCount { expected: usize, found: usize },

    #[error("cutoff mismatch: {left} vs {right}")]
    CutoffMismatch { left: usize, right: usize },

    #[error("operands live on different bases")]
    BasisMismatch,

    #[error("operation requires a full (unrestricted) Fock basis")]
    SectorBasis,

    #[error("truncation tail weight {weight:e} exceeds threshold {threshold:e}")]
    TruncationTail { weight: f64, threshold: f64 },

    #[error("operator is not Hermitian (max |H - H^dagger| = {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("detunings must be equal for the effective reduction ({delta1} vs {delta2})")]
    UnequalDetunings { delta1: f64, delta2: f64 },

    #[error("detuning must be nonzero")]
    ZeroDetuning,

    #[error("symmetric reduction requires {0}")]
    Asymmetric(&'static str),

    #[error("resonance conditions need a nonzero self-interaction q")]
    ZeroNonlinearity,

    #[error("N = {n} and M = {m} are not coprime")]
    NotCoprime { n: u64, m: u64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("state carries weight {weight:e} off the |n,n) ladder")]
    OffLadder { weight: f64 },

    #[error("candidate set is numerically degenerate (condition number {condition:e})")]
    IllConditioned { condition: f64 },

    #[error("state norm {norm} is not 1")]
    Unnormalized { norm: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(&'static str),

    #[error("sector dimension {required} exceeds the configured limit {limit}")]
    DimensionLimit { required: usize, limit: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
