use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("{op}: dimension mismatch (expected {expected}, found {found})")]
    DimensionMismatch {
        op: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{0}: non-finite value")]
    NonFinite(&'static str),
    #[error("masked softmax: every entry is blocked")]
    AllBlocked,
    #[error("token id {id} is outside a vocabulary of {vocab}")]
    TokenOutOfVocab { id: usize, vocab: usize },
    #[error("position {index} is outside a sequence of length {len}")]
    PositionOutOfRange { index: usize, len: usize },
    #[error("{0}: empty input")]
    Empty(&'static str),
    #[error("swap of {n} rows exceeds cache length (dst {dst_len}, src {src_len})")]
    SwapOutOfRange {
        n: usize,
        dst_len: usize,
        src_len: usize,
    },
    #[error("position {position} would exceed max_len {max_len}")]
    MaxLenExceeded { position: usize, max_len: usize },
    #[error("invalid plan: {0}")]
    InvalidPlan(String),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
}
