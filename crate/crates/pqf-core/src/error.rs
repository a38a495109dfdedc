use thiserror::Error;

/// Pipeline stage, used to attribute failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Relation,
    Modifier,
    NormEquation,
    ExactSynthesis,
    Fallback,
    Protocol,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Stage::Relation => "relation",
            Stage::Modifier => "modifier",
            Stage::NormEquation => "norm equation",
            Stage::ExactSynthesis => "exact synthesis",
            Stage::Fallback => "fallback",
            Stage::Protocol => "protocol",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PqfError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("operands live in different rings (m={0} and m={1})")]
    MixedRing(u32, u32),
    #[error("{stage}: candidate budget exhausted after {tried} candidates")]
    AssumptionFailure { stage: Stage, tried: usize },
    #[error("{stage}: precision exhausted at {bits} bits")]
    PrecisionExhausted { stage: Stage, bits: u32 },
    #[error("{stage}: iteration cap {cap} reached")]
    IterationCap { stage: Stage, cap: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("internal reduction failure: {0}")]
    InternalReductionFailure(String),
    #[error("unit adjustment impossible")]
    NotAdjustable,
    #[error("verification failed: {0}")]
    Verification(String),
    #[error("grid point search failed: {0}")]
    GridFailure(String),
}

pub type Result<T> = std::result::Result<T, PqfError>;
