use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("incompatible shapes: {0}")]
    Shape(String),

    #[error("block-size exponent q={0} is outside 1..=16")]
    ExponentOutOfRange(u32),

    #[error("generator matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error(
        "generator column {0} is zero: the main effect of that factor is confounded with blocks"
    )]
    ZeroColumn(usize),

    #[error("defining words are dependent: {0}")]
    DependentWords(String),

    #[error("effect {0} lies in the defining contrast subgroup (aliased with the mean)")]
    EffectInSubgroup(String),

    #[error("invalid fraction: {0}")]
    InvalidFraction(String),

    #[error("invalid factor grouping: {0}")]
    InvalidGrouping(String),

    #[error("invalid profile set: {0}")]
    InvalidProfile(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("exact search supports at most {limit} factors, got {n}; use the sufficient-condition checks instead")]
    SearchTooLarge { n: usize, limit: usize },

    #[error("scan would visit {candidates} assignments, above the budget of {budget}; search a single profile instead")]
    BudgetExceeded { candidates: u128, budget: u128 },

    #[error("all colour classes are singletons; nothing to split")]
    NothingToSplit,

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("integer overflow in exact rank computation")]
    Overflow,

    #[error("catalog: {0}")]
    Catalog(String),
}
