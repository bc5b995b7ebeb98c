//! Stage constructions driven by step-indexed partial functions: the
//! uniform-atoms measure, the block encoders, the decoding pipeline, and
//! perfect-subtree checks on finite trees.

mod atoms;
mod config;
mod encoders;
mod pipeline;
mod trees;

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::measures::MeasureError;
use crate::orders::OrderError;

pub use atoms::{
    atoms4_path, build_uniform_atoms_measure, claim4_check, Atoms4Oracle, Claim4Report, Claim4Row, ConstructionState4,
    Trace, TraceEvent, TraceKind,
};
pub use config::{ConstructConfig, ConstructKind};
pub use encoders::{
    claim_sigma_tau_check, gamma_decode, gamma_encode, halfweight_check, lemma_orders_check, xi_decode_ioc,
    xi_encode_ioc, Block, BlockEncoding, BlockKind,
};
pub use pipeline::{
    lambda_decode, pipeline_tree, xi_dim_tree, xi_encode_dim, LambdaOutput, Tail, TreeStages,
};
pub use trees::{diminutive_scan, perfectness_check, DiminutiveReport, FiniteTree};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("convention {convention} violated at index {i}, argument {n}")]
    Pcf { convention: Convention, i: u64, n: u64 },
    #[error("source prefix too short: need {needed} bits, have {len}")]
    SourceTooShort { needed: usize, len: usize },
    #[error("input exhausted after {0} bits")]
    InputExhausted(usize),
    #[error("depth insufficient: {0}")]
    Depth(String),
    #[error("budget exhausted: {0}")]
    Budget(String),
    #[error("order is not strictly increasing at {0}")]
    NotStrictlyIncreasing(u64),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Order(#[from] OrderError),
}

/// Result of running a computation for a bounded number of steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Halted(u64),
    Running,
}

/// Step-indexed simulation of a family of partial functions `φ_i`.
pub trait StepPcf: Send + Sync {
    /// `φ_i(n)` run for `s` steps.
    fn eval(&self, i: u64, n: u64, s: u64) -> Step;

    /// Least `s ≤ limit` with `φ_i(n)[s]↓`, by binary search (halting is
    /// monotone in `s`).
    fn halting_time(&self, i: u64, n: u64, limit: u64) -> Option<u64> {
        if self.eval(i, n, limit) == Step::Running {
            return None;
        }
        let (mut lo, mut hi) = (0u64, limit);
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if self.eval(i, n, mid) == Step::Running {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    fn describe(&self) -> String {
        "pcf".into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScheduleKind {
    /// `t(i, n) = (n + 1)(i + 2)`.
    Linear,
    /// `t(i, n) = 2^n + i`.
    Exp,
}

/// Closed-form halting schedules. Values equal halting times. Indices at or
/// beyond `indices`, and those listed in `never`, do not halt.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    pub kind: ScheduleKind,
    pub never: BTreeSet<u64>,
    pub indices: u64,
}

impl Schedule {
    /// Three indices, index 0 never halting.
    pub fn new(kind: ScheduleKind) -> Self {
        Schedule { kind, never: BTreeSet::from([0]), indices: 3 }
    }

    pub fn time(&self, i: u64, n: u64) -> Option<u64> {
        if i >= self.indices || self.never.contains(&i) {
            return None;
        }
        match self.kind {
            ScheduleKind::Linear => (n + 1).checked_mul(i + 2),
            ScheduleKind::Exp => 1u64.checked_shl(n as u32).filter(|_| n < 63).and_then(|p| p.checked_add(i)),
        }
    }

    /// `sched:<linear|exp>[;never=a,b][;indices=N]`.
    pub fn parse(spec: &str) -> Result<Self, ConstructionError> {
        let err = |m: &str| ConstructionError::Parse(format!("{m} in schedule spec {spec:?}"));
        let mut parts = spec.split(';');
        let head = parts.next().unwrap_or_default();
        let kind = match head.strip_prefix("sched:") {
            Some("linear") => ScheduleKind::Linear,
            Some("exp") => ScheduleKind::Exp,
            _ => return Err(err("unknown schedule")),
        };
        let mut s = Schedule::new(kind);
        for part in parts {
            let (k, v) = part.split_once('=').ok_or_else(|| err("expected key=value"))?;
            match k {
                "never" => {
                    s.never = v
                        .split(',')
                        .filter(|x| !x.is_empty())
                        .map(|x| x.parse().map_err(|_| err("bad index")))
                        .collect::<Result<_, _>>()?;
                }
                "indices" => s.indices = v.parse().map_err(|_| err("bad index count"))?,
                _ => return Err(err("unknown key")),
            }
        }
        Ok(s)
    }

    pub fn to_spec(&self) -> String {
        let kind = match self.kind {
            ScheduleKind::Linear => "linear",
            ScheduleKind::Exp => "exp",
        };
        let never: Vec<String> = self.never.iter().map(|i| i.to_string()).collect();
        format!("sched:{kind};never={};indices={}", never.join(","), self.indices)
    }
}

impl StepPcf for Schedule {
    fn eval(&self, i: u64, n: u64, s: u64) -> Step {
        match self.time(i, n) {
            Some(t) if t <= s => Step::Halted(t),
            _ => Step::Running,
        }
    }

    fn halting_time(&self, i: u64, n: u64, limit: u64) -> Option<u64> {
        self.time(i, n).filter(|&t| t <= limit)
    }

    fn describe(&self) -> String {
        self.to_spec()
    }
}

/// A family given by an arbitrary closure; used for fault injection.
#[derive(Clone)]
pub struct FnPcf {
    f: Arc<dyn Fn(u64, u64, u64) -> Step + Send + Sync>,
}

impl FnPcf {
    pub fn new<F: Fn(u64, u64, u64) -> Step + Send + Sync + 'static>(f: F) -> Self {
        FnPcf { f: Arc::new(f) }
    }
}

impl StepPcf for FnPcf {
    fn eval(&self, i: u64, n: u64, s: u64) -> Step {
        (self.f)(i, n, s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Convention {
    /// Halted stays halted with the same value.
    Monotone,
    /// Value at most the halting time.
    A,
    /// Halting times strictly increase in the argument.
    B,
    /// Argument at most the halting time.
    C,
    /// Convergence is downward closed in the argument.
    D,
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Convention::Monotone => "monotone",
            Convention::A => "A",
            Convention::B => "B",
            Convention::C => "C",
            Convention::D => "D",
        };
        f.write_str(s)
    }
}

/// Checks the conventions over `i ≤ big_i`, `n ≤ big_n`, `s ≤ big_s`,
/// stepping through every `s` so that monotonicity is checked too.
pub fn pcf_validate(p: &dyn StepPcf, big_i: u64, big_n: u64, big_s: u64) -> Result<(), ConstructionError> {
    let violation = |convention, i, n| Err(ConstructionError::Pcf { convention, i, n });
    for i in 0..=big_i {
        let mut prev: Option<u64> = None;
        let mut prev_halted = true;
        for n in 0..=big_n {
            let mut halt: Option<(u64, u64)> = None;
            for s in 0..=big_s {
                match (p.eval(i, n, s), halt) {
                    (Step::Halted(v), None) => halt = Some((s, v)),
                    (Step::Halted(v), Some((_, v0))) if v != v0 => return violation(Convention::Monotone, i, n),
                    (Step::Running, Some(_)) => return violation(Convention::Monotone, i, n),
                    _ => {}
                }
            }
            if let Some((t, v)) = halt {
                if v > t {
                    return violation(Convention::A, i, n);
                }
                if n > t {
                    return violation(Convention::C, i, n);
                }
                if !prev_halted {
                    return violation(Convention::D, i, n);
                }
                if prev.is_some_and(|pt| t <= pt) {
                    return violation(Convention::B, i, n);
                }
            }
            prev_halted = halt.is_some();
            prev = halt.map(|(t, _)| t);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_specs() {
        let s = Schedule::parse("sched:linear").unwrap();
        assert_eq!(s.time(0, 5), None);
        assert_eq!(s.time(1, 2), Some(9));
        assert_eq!(s.time(3, 0), None);
        let all = Schedule::parse("sched:linear;never=;indices=5").unwrap();
        assert_eq!(all.time(0, 0), Some(2));
        assert_eq!(all.time(4, 1), Some(12));
        assert_eq!(Schedule::parse(&all.to_spec()).unwrap(), all);
        let e = Schedule::parse("sched:exp;never=2").unwrap();
        assert_eq!(e.time(1, 3), Some(9));
        assert_eq!(e.time(2, 3), None);
        assert!(Schedule::parse("sched:cubic").is_err());
        assert!(Schedule::parse("sched:linear;foo=1").is_err());
        assert_eq!(all.halting_time(2, 3, 100), Some(16));
        assert_eq!(FnPcf::new(move |i, n, s| all.eval(i, n, s)).halting_time(2, 3, 100), Some(16));
    }

    #[test]
    fn validate_examples() {
        let lin = Schedule::parse("sched:linear;never=;indices=6").unwrap();
        pcf_validate(&lin, 5, 10, 80).unwrap();
        pcf_validate(&Schedule::parse("sched:exp").unwrap(), 4, 6, 80).unwrap();
        pcf_validate(&FnPcf::new(|_, _, _| Step::Running), 5, 5, 20).unwrap();

        let equal_times = FnPcf::new(|i, _, s| if s >= 5 + i { Step::Halted(1) } else { Step::Running });
        assert_eq!(
            pcf_validate(&equal_times, 2, 3, 30),
            Err(ConstructionError::Pcf { convention: Convention::B, i: 0, n: 1 })
        );
        let big_value = FnPcf::new(|_, n, s| if s >= n + 1 { Step::Halted(n + 2) } else { Step::Running });
        assert!(matches!(pcf_validate(&big_value, 0, 3, 10), Err(ConstructionError::Pcf { convention: Convention::A, .. })));
        let gap = FnPcf::new(|_, n, s| if n != 1 && s >= 2 * n + 1 { Step::Halted(0) } else { Step::Running });
        assert!(matches!(pcf_validate(&gap, 0, 3, 10), Err(ConstructionError::Pcf { convention: Convention::D, n: 2, .. })));
        let early = FnPcf::new(|_, _, s| if s >= 1 { Step::Halted(0) } else { Step::Running });
        assert!(matches!(pcf_validate(&early, 0, 3, 10), Err(ConstructionError::Pcf { convention: Convention::B, .. })));
        let flicker = FnPcf::new(|_, _, s| if s == 3 { Step::Halted(0) } else { Step::Running });
        assert!(matches!(pcf_validate(&flicker, 0, 0, 10), Err(ConstructionError::Pcf { convention: Convention::Monotone, .. })));
    }
}
