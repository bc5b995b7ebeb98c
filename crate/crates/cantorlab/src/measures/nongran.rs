use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};

use super::{MeasureError, MeasureOracle};
use crate::arith::{BitString, Dyadic};

/// Finite stand-in for the halting predicate: `n ↦ Some(t)` when the
/// computation on `n` halts at stage `t`, `None` when it never halts.
#[derive(Clone)]
pub struct HaltStub {
    f: Arc<dyn Fn(u64) -> Option<u64> + Send + Sync>,
}

impl HaltStub {
    pub fn never() -> Self {
        HaltStub { f: Arc::new(|_| None) }
    }

    pub fn from_fn<F: Fn(u64) -> Option<u64> + Send + Sync + 'static>(f: F) -> Self {
        HaltStub { f: Arc::new(f) }
    }

    pub fn from_map(m: BTreeMap<u64, u64>) -> Self {
        HaltStub { f: Arc::new(move |n| m.get(&n).copied()) }
    }

    pub fn halts_at(&self, n: u64) -> Option<u64> {
        (self.f)(n)
    }
}

/// Measure whose granularity is `2n` or `2n + 1` according to whether the
/// stubbed computation on `n` halts.
///
/// Everything hangs off the rightmost path `1^ω`. Writing `a_m = μ(1^m)`:
/// odd levels set `μ(1^{2n+1}) = 2^{-(n+1)}`; at even level `2n` the left
/// sibling `1^{2n-1}0` gets 0 (never halts) or `2^{-e}` with `e = max(t, n+1)`
/// (halts at `t`). Off the path every string splits its mass evenly.
///
/// When `staged` is set, `approx(σ, i)` only counts halting stages `t ≤ i`;
/// the error is below `2^{-i}` because an uncounted split has size `≤ 2^{-t}`.
#[derive(Clone)]
pub struct NoncomputableGranularity {
    stub: HaltStub,
    staged: bool,
}

impl NoncomputableGranularity {
    pub fn staged(mut self) -> Self {
        self.staged = true;
        self
    }

    fn split_exponent(&self, n: u64, precision: Option<u64>) -> Result<Option<u64>, MeasureError> {
        match self.stub.halts_at(n) {
            None => Ok(None),
            Some(0) => Err(MeasureError::Invalid(format!("halting stage 0 for n = {n}"))),
            Some(t) => match precision {
                Some(i) if t > i => Ok(None),
                _ => Ok(Some(t.max(n + 1))),
            },
        }
    }

    /// `(μ(1^m), μ(1^{m-1}0))` for `m ≥ 1`.
    fn path_pair(&self, m: u64, precision: Option<u64>) -> Result<(Dyadic, Dyadic), MeasureError> {
        if m % 2 == 1 {
            let n = (m - 1) / 2;
            let right = Dyadic::pow2_neg(n + 1);
            let parent = self.path_value(m - 1, precision)?;
            let left = &parent - &right;
            Ok((right, left))
        } else {
            let n = m / 2;
            let parent = Dyadic::pow2_neg(n);
            match self.split_exponent(n, precision)? {
                None => Ok((parent, Dyadic::zero())),
                Some(e) => {
                    let left = Dyadic::pow2_neg(e);
                    Ok((&parent - &left, left))
                }
            }
        }
    }

    fn path_value(&self, m: u64, precision: Option<u64>) -> Result<Dyadic, MeasureError> {
        if m == 0 {
            Ok(Dyadic::one())
        } else {
            Ok(self.path_pair(m, precision)?.0)
        }
    }

    fn value(&self, sigma: &BitString, precision: Option<u64>) -> Result<Dyadic, MeasureError> {
        match sigma.bits().iter().position(|&b| b == 0) {
            None => self.path_value(sigma.len() as u64, precision),
            Some(j) => {
                let left = self.path_pair(j as u64 + 1, precision)?.1;
                Ok(left.scale_pow2(-((sigma.len() - j - 1) as i64)))
            }
        }
    }
}

pub fn noncomputable_granularity_measure(stub: HaltStub) -> NoncomputableGranularity {
    NoncomputableGranularity { stub, staged: false }
}

impl MeasureOracle for NoncomputableGranularity {
    fn approx(&self, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError> {
        self.value(sigma, if self.staged { Some(precision) } else { None })
    }

    fn is_exact(&self) -> bool {
        !self.staged
    }
}
