//! Exact dyadic rationals and finite binary strings.

mod bitstring;
mod dyadic;

pub use bitstring::{bs, BitString};
pub use dyadic::Dyadic;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArithError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
}

/// `⌊log2 n⌋` for `n ≥ 1`; 0 for `n = 0`.
pub fn floor_log2(n: u64) -> u32 {
    if n == 0 {
        0
    } else {
        63 - n.leading_zeros()
    }
}

/// `⌈log2 n⌉` for `n ≥ 1`; 0 for `n ≤ 1`.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
