use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{value} is not a unit modulo {modulus}")]
    NonUnit { value: u64, modulus: u64 },

    #[error("invalid group parameters: {0}")]
    InvalidParams(String),

    #[error("alpha^(q^{j}) - 1 is not a unit because j = {j} >= t = {t}")]
    NonUnitDenominator { j: u32, t: u32 },

    #[error("group order {order} exceeds the brute-force cap {cap}")]
    CapExceeded { order: u64, cap: u64 },

    #[error("element set is not a subgroup")]
    NotASubgroup,

    #[error("subgroup of order {order} matches no canonical descriptor")]
    UnclassifiableSet { order: usize },

    #[error("invalid hidden subgroup: {0}")]
    InvalidHidden(String),

    #[error("S is not injective on the register: n = {n1} and n = {n2} both land on {value}")]
    NonInjectiveS { n1: u64, n2: u64, value: u64 },

    #[error("class-ii hidden subgroup with t = {t}: no efficient quantum recovery for t > 1")]
    UnsupportedT { t: u32 },

    #[error("no verified candidate after {runs} runs")]
    Exhausted { runs: u64 },

    #[error("oracle is injective: no collision after {queries} queries")]
    NoCollision { queries: u64 },

    #[error("collision exponent v = {v} is a multiple of q^t")]
    DegenerateV { v: u64 },

    #[error("degenerate collisions on all {attempts} attempts")]
    CollisionRetriesExhausted { attempts: u32 },

    #[error("recovered subgroup failed validation: {0}")]
    Validation(String),
}

impl Error {
    /// Variant name, stable for machine-readable reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NonUnit { .. } => "NonUnit",
            Error::InvalidParams(_) => "InvalidParams",
            Error::NonUnitDenominator { .. } => "NonUnitDenominator",
            Error::CapExceeded { .. } => "CapExceeded",
            Error::NotASubgroup => "NotASubgroup",
            Error::UnclassifiableSet { .. } => "UnclassifiableSet",
            Error::InvalidHidden(_) => "InvalidHidden",
            Error::NonInjectiveS { .. } => "NonInjectiveS",
            Error::UnsupportedT { .. } => "UnsupportedT",
            Error::Exhausted { .. } => "Exhausted",
            Error::NoCollision { .. } => "NoCollision",
            Error::DegenerateV { .. } => "DegenerateV",
            Error::CollisionRetriesExhausted { .. } => "CollisionRetriesExhausted",
            Error::Validation(_) => "Validation",
        }
    }
}
