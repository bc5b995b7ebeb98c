//! Measures on Cantor space: exact finite-depth trees, approximation
//! oracles, granularity, atom removal, and test-set arithmetic.

mod atoms;
mod granularity;
mod mltest;
mod nongran;
mod oracles;
mod tree;

use std::sync::Arc;

use thiserror::Error;

use crate::arith::{ArithError, BitString, Dyadic};
use crate::orders::OrderError;

pub use atoms::{remove_atoms, triviality_mass, validate_tree_predicate, AtomsRemoved, TreePredicate};
pub use granularity::{
    global_complexity_bound, granularity_exact, granularity_exact_oracle, granularity_sandwich,
    local_granularity, local_granularity_bound_check, SandwichWitness,
};
pub use mltest::{ml_test_margin, StagedOpenSet};
pub use nongran::{noncomputable_granularity_measure, HaltStub, NoncomputableGranularity};
pub use oracles::{FnOracle, Lebesgue, PointMass, RoundedOracle};
pub use tree::{ExtensionRule, MeasureTree, TreeViolation};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MeasureError {
    #[error("depth exceeded: {sigma} is deeper than stored depth {depth}")]
    DepthExceeded { sigma: BitString, depth: usize },
    #[error("not found within depth {0}")]
    NotFound(usize),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("prefix too short: no answer within the first {0} bits")]
    PrefixTooShort(usize),
    #[error("set is not prefix-free: {0} is a prefix of {1}")]
    NotPrefixFree(BitString, BitString),
    #[error("tree predicate is not downward closed at {0}")]
    NotDownwardClosed(BitString),
    #[error("invalid measure: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

impl From<MeasureError> for OrderError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Budget(m) => OrderError::Budget(m),
            other => OrderError::Eval(other.to_string()),
        }
    }
}

/// A measure given by approximations: `|μ(σ) − approx(σ, i)| ≤ 2^{-i}`.
pub trait MeasureOracle: Send + Sync {
    fn approx(&self, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError>;

    /// True when `approx` ignores the precision and returns `μ(σ)` itself.
    fn is_exact(&self) -> bool {
        false
    }
}

pub type SharedOracle = Arc<dyn MeasureOracle>;

impl<T: MeasureOracle + ?Sized> MeasureOracle for &T {
    fn approx(&self, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError> {
        (**self).approx(sigma, precision)
    }
    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }
}

impl<T: MeasureOracle + ?Sized> MeasureOracle for Arc<T> {
    fn approx(&self, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError> {
        (**self).approx(sigma, precision)
    }
    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }
}

impl<T: MeasureOracle + ?Sized> MeasureOracle for Box<T> {
    fn approx(&self, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError> {
        (**self).approx(sigma, precision)
    }
    fn is_exact(&self) -> bool {
        (**self).is_exact()
    }
}

/// `μ(σ)` to within `2^{-i}`; exact for exact oracles.
pub fn cylinder_measure<O: MeasureOracle + ?Sized>(o: &O, sigma: &BitString, i: u64) -> Result<Dyadic, MeasureError> {
    o.approx(sigma, i)
}

/// Extra bits of precision asked for beyond `n` when deciding `μ(σ) < 2^{-n}`.
pub const DEFAULT_GUARD: u64 = 4;

/// Precision is escalated by at most this many bits beyond the first query.
pub const DEFAULT_ESCALATION: u64 = 256;

/// Decides `μ(σ) < 2^{-n}`. Exact oracles compare directly; otherwise the
/// oracle is queried at precision `i = n + guard`, answering "yes" when
/// `a + 2^{-i} < 2^{-n}` and "no" when `a − 2^{-i} ≥ 2^{-n}`. Undecided
/// queries are retried at doubled guard until the escalation budget runs out.
pub fn mass_below_pow2<O: MeasureOracle + ?Sized>(o: &O, sigma: &BitString, n: u64) -> Result<bool, MeasureError> {
    let bound = Dyadic::pow2_neg(n);
    if o.is_exact() {
        return Ok(o.approx(sigma, n)? < bound);
    }
    let mut guard = DEFAULT_GUARD;
    loop {
        let i = n + guard;
        let a = o.approx(sigma, i)?;
        let eps = Dyadic::pow2_neg(i);
        if &a + &eps < bound {
            return Ok(true);
        }
        if &a - &eps >= bound {
            return Ok(false);
        }
        if guard >= DEFAULT_ESCALATION {
            return Err(MeasureError::Budget(format!(
                "cannot decide whether mu({sigma}) < 2^-{n} at precision {i}"
            )));
        }
        guard *= 2;
    }
}
