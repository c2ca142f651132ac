use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("interval has lo > hi: [{lo}, {hi}]")]
    InvertedInterval { lo: String, hi: String },

    #[error("profile must span [0, 1] with strictly increasing heights: {0}")]
    InvalidProfile(String),

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("{what} = {value} is outside {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: &'static str,
    },

    #[error("depth {depth} exceeds the cap of {cap}")]
    DepthCap { depth: u32, cap: u32 },

    #[error("n = {n} exceeds the exhaustive search guard of {guard} (use the override)")]
    SearchGuard { n: usize, guard: usize },

    #[error("{0} is too large for the index type")]
    Overflow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
