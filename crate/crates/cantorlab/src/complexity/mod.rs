//! Stage-bounded prefix-free complexity `k_t` and a-priori complexity
//! `ka_t`, deficiency estimates, finite witness scans and order-level
//! transforms between the bound formulations.

mod constants;
mod reference;
mod witness;

use std::fmt;
use std::io::Write;

use thiserror::Error;

use crate::arith::{BitString, Dyadic};
use crate::functionals::{MonotonePairSet, PrefixMachineTable};
use crate::measures::{MeasureError, MeasureOracle, DEFAULT_ESCALATION, DEFAULT_GUARD};
use crate::orders::OrderError;

pub use constants::{measure_constants, MachineConstants};
pub use reference::{parse_sd, sd, ReferenceMachine, BLOCK_ENCODER_INDEX};
pub use witness::{
    inverse_bound_transform, ka_upper_scan, noncomplexity_reformulation_check, transform_k_to_ka_witness,
    witness_scan, InverseKind, KaForm, ScanMode, Semantics, Verdict, WitnessReport,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComplexityError {
    #[error("range exceeds prefix: needs {needed} bits, have {len}")]
    Range { needed: u64, len: usize },
    #[error("zero-measure prefix {0}")]
    ZeroMass(BitString),
    #[error("no program yet for {0}")]
    NoProgram(BitString),
    #[error("missing argument: {0}")]
    MissingArgument(&'static str),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A stage-`t` complexity value. `Unbounded` sits above every natural: no
/// program, or no mass, has appeared yet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(u64),
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<u64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }

    pub fn plus(self, c: u64) -> Bound {
        match self {
            Bound::Finite(v) => Bound::Finite(v + c),
            Bound::Unbounded => Bound::Unbounded,
        }
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Unbounded => f.write_str("inf"),
        }
    }
}

/// `⌈−log2 m⌉`, or `Unbounded` when `m = 0`.
pub fn bound_from_mass(m: &Dyadic) -> Bound {
    match m.ceil_neg_log2() {
        Ok(v) => Bound::Finite(v),
        Err(_) => Bound::Unbounded,
    }
}

/// A universal machine observed at finite stages: a prefix-free part for
/// `k_t` and a monotone part whose stage-`t` semimeasure is `M_t`.
pub trait UniversalMachine: Send + Sync {
    fn name(&self) -> &str;

    fn k_t(&self, sigma: &BitString, t: u64) -> Bound;

    fn m_t(&self, sigma: &BitString, t: u64) -> Dyadic;

    fn ka_t(&self, sigma: &BitString, t: u64) -> Bound {
        bound_from_mass(&self.m_t(sigma, t))
    }
}

/// Shortest program for `σ` in a fixed table.
pub fn k_from_table(table: &PrefixMachineTable, sigma: &BitString) -> Bound {
    table.shortest_program(sigma).map(|p| Bound::Finite(p.len() as u64)).unwrap_or(Bound::Unbounded)
}

/// `⌈−log2 λ_S(σ)⌉` for a fixed pair table.
pub fn ka_from_table(table: &MonotonePairSet, sigma: &BitString) -> Bound {
    bound_from_mass(&table.lambda(sigma))
}

/// A machine given by explicit rules, each tagged with the stage at which it
/// is enumerated.
#[derive(Debug, Clone, Default)]
pub struct TableMachine {
    prefix: Vec<(u64, BitString, BitString)>,
    monotone: Vec<(u64, BitString, BitString)>,
}

impl TableMachine {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_program(&mut self, stage: u64, program: BitString, output: BitString) {
        self.prefix.push((stage, program, output));
    }

    pub fn add_pair(&mut self, stage: u64, input: BitString, output: BitString) {
        self.monotone.push((stage, input, output));
    }

    /// Adds every rule of sub-machine `e` under the `1^e 0` coding.
    pub fn add_family_member(&mut self, e: usize, stage: u64, table: &PrefixMachineTable, pairs: &MonotonePairSet) {
        let mut code = BitString::ones(e);
        code.push(0);
        for (p, o) in table.rules() {
            self.add_program(stage, code.concat(p), o.clone());
        }
        for (i, o) in pairs.pairs() {
            self.add_pair(stage, code.concat(i), o.clone());
        }
    }

    pub fn prefix_stage(&self, t: u64) -> PrefixMachineTable {
        let mut table = PrefixMachineTable::new();
        for (s, p, o) in &self.prefix {
            if *s <= t {
                table.insert(p.clone(), o.clone());
            }
        }
        table
    }

    pub fn monotone_stage(&self, t: u64) -> MonotonePairSet {
        let pairs = self.monotone.iter().filter(|(s, _, _)| *s <= t).map(|(_, i, o)| (i.clone(), o.clone()));
        MonotonePairSet::from_pairs(t, pairs)
    }
}

impl UniversalMachine for TableMachine {
    fn name(&self) -> &str {
        "table"
    }

    fn k_t(&self, sigma: &BitString, t: u64) -> Bound {
        self.prefix
            .iter()
            .filter(|(s, _, o)| *s <= t && o == sigma)
            .map(|(_, p, _)| Bound::Finite(p.len() as u64))
            .min()
            .unwrap_or(Bound::Unbounded)
    }

    fn m_t(&self, sigma: &BitString, t: u64) -> Dyadic {
        self.monotone_stage(t).lambda(sigma)
    }
}

/// `⌈−log2 μ(σ)⌉`, querying an inexact oracle until both ends of the error
/// interval give the same answer.
pub fn neglog_measure<O: MeasureOracle + ?Sized>(mu: &O, sigma: &BitString) -> Result<u64, ComplexityError> {
    if mu.is_exact() {
        let v = mu.approx(sigma, 0)?;
        return v.ceil_neg_log2().map_err(|_| ComplexityError::ZeroMass(sigma.clone()));
    }
    let mut i = sigma.len() as u64 + DEFAULT_GUARD;
    let last = i + DEFAULT_ESCALATION;
    loop {
        let a = mu.approx(sigma, i)?;
        let eps = Dyadic::pow2_neg(i);
        let lo = &a - &eps;
        let hi = (&a + &eps).min(Dyadic::from_int(1));
        if !hi.is_positive() {
            return Err(ComplexityError::ZeroMass(sigma.clone()));
        }
        if lo.is_positive() {
            let (l, h) = (lo.ceil_neg_log2().expect("positive"), hi.ceil_neg_log2().expect("positive"));
            if l == h {
                return Ok(l);
            }
        }
        if i >= last {
            return Err(MeasureError::Budget(format!("cannot bracket -log2 mu({sigma}) at precision {i}")).into());
        }
        i = (2 * i).min(last);
    }
}

/// `⌈−log2 μ(X↾n)⌉ − k_t(X↾n)`. Since `k_t ≥ K` this only bounds the true
/// deficiency from below.
pub fn deficiency_estimate<O: MeasureOracle + ?Sized>(
    mu: &O,
    x: &BitString,
    n: usize,
    m: &dyn UniversalMachine,
    t: u64,
) -> Result<i64, ComplexityError> {
    if n > x.len() {
        return Err(ComplexityError::Range { needed: n as u64, len: x.len() });
    }
    let sigma = x.prefix(n);
    let neglog = neglog_measure(mu, &sigma)?;
    match m.k_t(&sigma, t) {
        Bound::Finite(k) => Ok(neglog as i64 - k as i64),
        Bound::Unbounded => Err(ComplexityError::NoProgram(sigma)),
    }
}

/// One row of a complexity profile.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProfileRow {
    pub n: usize,
    pub k_t: Bound,
    pub ka_t: Bound,
    pub neglog_mu: Option<u64>,
    pub deficiency: Option<i64>,
}

/// Profile of `X↾n` for `n ≤ n_max`. Zero-mass prefixes and missing
/// programs leave the affected columns empty.
pub fn complexity_profile<O: MeasureOracle + ?Sized>(
    mu: &O,
    x: &BitString,
    m: &dyn UniversalMachine,
    t: u64,
    n_max: usize,
) -> Result<Vec<ProfileRow>, ComplexityError> {
    if n_max > x.len() {
        return Err(ComplexityError::Range { needed: n_max as u64, len: x.len() });
    }
    let mut rows = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let sigma = x.prefix(n);
        let k = m.k_t(&sigma, t);
        let neglog = match neglog_measure(mu, &sigma) {
            Ok(v) => Some(v),
            Err(ComplexityError::ZeroMass(_)) => None,
            Err(e) => return Err(e),
        };
        let deficiency = match (neglog, k) {
            (Some(v), Bound::Finite(k)) => Some(v as i64 - k as i64),
            _ => None,
        };
        rows.push(ProfileRow { n, k_t: k, ka_t: m.ka_t(&sigma, t), neglog_mu: neglog, deficiency });
    }
    Ok(rows)
}

pub fn write_profile_csv<W: Write>(rows: &[ProfileRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "n,k_t,ka_t,neglog_mu,deficiency")?;
    for r in rows {
        let neglog = r.neglog_mu.map(|v| v.to_string()).unwrap_or_default();
        let def = r.deficiency.map(|v| v.to_string()).unwrap_or_default();
        writeln!(w, "{},{},{},{},{}", r.n, r.k_t, r.ka_t, neglog, def)?;
    }
    Ok(())
}
