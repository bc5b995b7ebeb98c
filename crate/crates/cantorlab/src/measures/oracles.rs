use std::sync::Arc;

use num_traits::{One, Zero};

use super::{MeasureError, MeasureOracle, SharedOracle};
use crate::arith::{BitString, Dyadic};

/// The uniform measure `λ(σ) = 2^{-|σ|}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lebesgue;

impl MeasureOracle for Lebesgue {
    fn approx(&self, sigma: &BitString, _precision: u64) -> Result<Dyadic, MeasureError> {
        Ok(Dyadic::pow2_neg(sigma.len() as u64))
    }
    fn is_exact(&self) -> bool {
        true
    }
}

/// Point mass on the sequence `prefix` followed by `tail^ω`.
#[derive(Debug, Clone)]
pub struct PointMass {
    prefix: BitString,
    tail: u8,
}

impl PointMass {
    pub fn new(prefix: BitString, tail: u8) -> Self {
        PointMass { prefix, tail: tail & 1 }
    }

    pub fn zeros() -> Self {
        PointMass::new(BitString::empty(), 0)
    }

    pub fn bit(&self, k: usize) -> u8 {
        self.prefix.get(k).unwrap_or(self.tail)
    }

    /// The first `n` bits of the carrier sequence.
    pub fn path(&self, n: usize) -> BitString {
        BitString::from_bools((0..n).map(|k| self.bit(k) == 1))
    }
}

impl MeasureOracle for PointMass {
    fn approx(&self, sigma: &BitString, _precision: u64) -> Result<Dyadic, MeasureError> {
        let on_path = sigma.bits().iter().enumerate().all(|(k, &b)| b == self.bit(k));
        Ok(if on_path { Dyadic::one() } else { Dyadic::zero() })
    }
    fn is_exact(&self) -> bool {
        true
    }
}

type CylinderFn = Arc<dyn Fn(&BitString) -> Result<Dyadic, MeasureError> + Send + Sync>;

/// An exact measure given by a closure.
#[derive(Clone)]
pub struct FnOracle {
    f: CylinderFn,
}

impl FnOracle {
    pub fn new<F>(f: F) -> Self
    where
        F: Fn(&BitString) -> Result<Dyadic, MeasureError> + Send + Sync + 'static,
    {
        FnOracle { f: Arc::new(f) }
    }
}

impl MeasureOracle for FnOracle {
    fn approx(&self, sigma: &BitString, _precision: u64) -> Result<Dyadic, MeasureError> {
        (self.f)(sigma)
    }
    fn is_exact(&self) -> bool {
        true
    }
}

/// Rounds another oracle down to a multiple of `2^{-i}`. The result is a
/// genuinely inexact oracle honouring the `2^{-i}` contract.
#[derive(Clone)]
pub struct RoundedOracle {
    inner: SharedOracle,
}

impl RoundedOracle {
    pub fn new(inner: SharedOracle) -> Self {
        RoundedOracle { inner }
    }
}

impl MeasureOracle for RoundedOracle {
    fn approx(&self, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError> {
        // Ask the inner oracle one bit finer so the total error stays within 2^{-i}.
        let a = self.inner.approx(sigma, precision + 1)?;
        if self.inner.is_exact() {
            Ok(a.floor_to(precision))
        } else {
            Ok(a.floor_to(precision + 1))
        }
    }
}
