//! Monotone Turing functionals as finite pair tables, the semi-measures they
//! induce, composition, and prefix-free machine tables.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::Zero;
use thiserror::Error;

use crate::arith::{ceil_log2, BitString, Dyadic};
use crate::measures::{Lebesgue, MeasureError, MeasureOracle, DEFAULT_GUARD};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FunctionalError {
    #[error("inconsistent pairs ({}, {}) and ({}, {}): comparable inputs, incomparable outputs", .a.0, .a.1, .b.0, .b.1)]
    Inconsistent { a: (BitString, BitString), b: (BitString, BitString) },
    #[error("machine domain is not prefix-free: {0} is a prefix of {1}")]
    NotPrefixFree(BitString, BitString),
    #[error("semi-measure inequality fails at {sigma}: {value} < {children}")]
    NotSemimeasure { sigma: BitString, value: Dyadic, children: Dyadic },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// A finite stage of a monotone functional: pairs `(σ, τ)` meaning "input
/// `σ` yields at least output `τ`".
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MonotonePairSet {
    pairs: BTreeSet<(BitString, BitString)>,
    stage: u64,
}

impl MonotonePairSet {
    pub fn new(stage: u64) -> Self {
        MonotonePairSet { pairs: BTreeSet::new(), stage }
    }

    pub fn from_pairs<I: IntoIterator<Item = (BitString, BitString)>>(stage: u64, pairs: I) -> Self {
        MonotonePairSet { pairs: pairs.into_iter().collect(), stage }
    }

    /// `(σ, σ)` for every `|σ| ≤ depth`, ε included.
    pub fn identity(depth: usize) -> Self {
        Self::from_pairs(0, BitString::all_up_to(depth).map(|s| (s.clone(), s)))
    }

    pub fn insert(&mut self, input: BitString, output: BitString) {
        self.pairs.insert((input, output));
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(BitString, BitString)> {
        self.pairs.iter()
    }

    pub fn inputs(&self) -> BTreeSet<BitString> {
        self.pairs.iter().map(|(s, _)| s.clone()).collect()
    }

    /// Consistency: comparable inputs have comparable outputs.
    pub fn validate(&self) -> Result<(), FunctionalError> {
        let v: Vec<_> = self.pairs.iter().collect();
        for (k, a) in v.iter().enumerate() {
            for b in &v[k + 1..] {
                if a.0.comparable(&b.0) && !a.1.comparable(&b.1) {
                    return Err(FunctionalError::Inconsistent { a: (*a).clone(), b: (*b).clone() });
                }
            }
        }
        Ok(())
    }

    /// `Φ^σ`: the longest output among pairs whose input is a prefix of `σ`.
    pub fn apply_prefix(&self, sigma: &BitString) -> BitString {
        let mut best = BitString::empty();
        for (i, o) in &self.pairs {
            if i.is_prefix_of(sigma) && o.len() > best.len() {
                best = o.clone();
            }
        }
        best
    }

    /// Minimal antichain generating `⟦Φ^{-1}(τ)⟧`.
    pub fn preimage_antichain(&self, tau: &BitString) -> Vec<BitString> {
        let mut inputs: Vec<BitString> = self
            .pairs
            .iter()
            .filter(|(_, o)| tau.is_prefix_of(o))
            .map(|(i, _)| i.clone())
            .collect();
        minimal_antichain(&mut inputs)
    }

    /// `λ_Φ(τ) = λ(⟦Φ^{-1}(τ)⟧)`, exact.
    pub fn lambda(&self, tau: &BitString) -> Dyadic {
        self.preimage_antichain(tau).iter().map(|s| Dyadic::pow2_neg(s.len() as u64)).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("functional v1 stage={}\n", self.stage);
        for (i, o) in &self.pairs {
            out.push_str(&format!("{i} {o}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FunctionalError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| FunctionalError::Parse("empty functional file".into()))?;
        let stage = header
            .trim()
            .strip_prefix("functional v1 stage=")
            .and_then(|s| s.parse::<u64>().ok())
            .ok_or_else(|| FunctionalError::Parse(format!("bad header {header:?}")))?;
        let mut set = MonotonePairSet::new(stage);
        for line in lines {
            let (i, o) = parse_pair(line)?;
            set.insert(i, o);
        }
        Ok(set)
    }
}

impl fmt::Display for MonotonePairSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

fn parse_pair(line: &str) -> Result<(BitString, BitString), FunctionalError> {
    let mut it = line.split_whitespace();
    match (it.next(), it.next(), it.next()) {
        (Some(a), Some(b), None) => Ok((
            a.parse().map_err(|e| FunctionalError::Parse(format!("{e}")))?,
            b.parse().map_err(|e| FunctionalError::Parse(format!("{e}")))?,
        )),
        _ => Err(FunctionalError::Parse(format!("expected '<input> <output>', got {line:?}"))),
    }
}

/// Reduces a set of strings to the prefix-minimal members, in lexicographic order.
pub fn minimal_antichain(strings: &mut [BitString]) -> Vec<BitString> {
    strings.sort_by(|a, b| a.lex_cmp(b));
    let mut out: Vec<BitString> = Vec::new();
    for s in strings.iter() {
        // Extensions of a kept string sort directly after it.
        if out.last().is_some_and(|k| k.is_prefix_of(s)) {
            continue;
        }
        out.push(s.clone());
    }
    out
}

/// `μ(⟦Φ^{-1}(τ)⟧)`. Exact for exact oracles; otherwise within `2^{-guard}`.
pub fn preimage_measure<O: MeasureOracle + ?Sized>(
    s: &MonotonePairSet,
    tau: &BitString,
    mu: &O,
) -> Result<Dyadic, FunctionalError> {
    let anti = s.preimage_antichain(tau);
    let precision = ceil_log2(anti.len().max(1) as u64) as u64 + DEFAULT_GUARD;
    let mut total = Dyadic::zero();
    for sigma in &anti {
        total = &total + &mu.approx(sigma, precision)?;
    }
    Ok(total)
}

/// `λ_Φ(σ) ≥ λ_Φ(σ0) + λ_Φ(σ1)` for every `|σ| < depth`. The table must be
/// consistent; an inconsistent table is reported as such.
pub fn semimeasure_check(s: &MonotonePairSet, depth: usize) -> Result<(), FunctionalError> {
    s.validate()?;
    if s.lambda(&BitString::empty()) > Dyadic::from_int(1) {
        return Err(FunctionalError::NotSemimeasure {
            sigma: BitString::empty(),
            value: Dyadic::from_int(1),
            children: s.lambda(&BitString::empty()),
        });
    }
    for sigma in BitString::all_up_to(depth.saturating_sub(1)) {
        if depth == 0 {
            break;
        }
        let value = s.lambda(&sigma);
        let children = &s.lambda(&sigma.child(0)) + &s.lambda(&sigma.child(1));
        if value < children {
            return Err(FunctionalError::NotSemimeasure { sigma, value, children });
        }
    }
    Ok(())
}

/// `outer ∘ inner` on the inputs `inner` mentions. The stage tag is the
/// smaller of the two stages.
pub fn compose(outer: &MonotonePairSet, inner: &MonotonePairSet) -> MonotonePairSet {
    let mut out = MonotonePairSet::new(outer.stage.min(inner.stage));
    for sigma in inner.inputs() {
        let mid = inner.apply_prefix(&sigma);
        let tau = outer.apply_prefix(&mid);
        out.insert(sigma, tau);
    }
    out
}

/// Finite stage of a prefix-free machine: program ↦ output.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PrefixMachineTable {
    rules: BTreeMap<BitString, BitString>,
}

impl PrefixMachineTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, program: BitString, output: BitString) {
        self.rules.insert(program, output);
    }

    pub fn rules(&self) -> impl Iterator<Item = (&BitString, &BitString)> {
        self.rules.iter()
    }

    pub fn len(&self) -> usize {
        self.rules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    pub fn run(&self, program: &BitString) -> Option<&BitString> {
        self.rules.get(program)
    }

    pub fn validate(&self) -> Result<(), FunctionalError> {
        let mut progs: Vec<BitString> = self.rules.keys().cloned().collect();
        progs.sort_by(|a, b| a.lex_cmp(b));
        for w in progs.windows(2) {
            if w[0].is_prefix_of(&w[1]) {
                return Err(FunctionalError::NotPrefixFree(w[0].clone(), w[1].clone()));
            }
        }
        Ok(())
    }

    /// A shortest program for `σ`, if any (ties broken by length-lex order).
    pub fn shortest_program(&self, sigma: &BitString) -> Option<&BitString> {
        self.rules.iter().filter(|(_, o)| *o == sigma).map(|(p, _)| p).min()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("pfm v1\n");
        for (p, o) in &self.rules {
            out.push_str(&format!("{p} {o}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FunctionalError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("pfm v1") {
            return Err(FunctionalError::Parse("expected header 'pfm v1'".into()));
        }
        let mut t = PrefixMachineTable::new();
        for line in lines {
            let (p, o) = parse_pair(line)?;
            t.insert(p, o);
        }
        Ok(t)
    }
}

/// `Ψ = {(ρ₀ρ₁, στ) : U(ρ₀) = σ, (ρ₁, τ) ∈ S}`.
pub fn psi_combinator(u: &PrefixMachineTable, s: &MonotonePairSet) -> MonotonePairSet {
    let mut out = MonotonePairSet::new(s.stage());
    for (rho0, sigma) in u.rules() {
        for (rho1, tau) in s.pairs() {
            out.insert(rho0.concat(rho1), sigma.concat(tau));
        }
    }
    out
}

/// `λ_Φ` as an exact oracle.
pub fn lambda_oracle(s: &MonotonePairSet) -> impl MeasureOracle + '_ {
    struct L<'a>(&'a MonotonePairSet);
    impl MeasureOracle for L<'_> {
        fn approx(&self, sigma: &BitString, _precision: u64) -> Result<Dyadic, MeasureError> {
            Ok(self.0.lambda(sigma))
        }
        fn is_exact(&self) -> bool {
            true
        }
    }
    L(s)
}

/// `λ(⟦Φ^{-1}(τ)⟧)` with the uniform measure; same as [`MonotonePairSet::lambda`].
pub fn lambda_preimage(s: &MonotonePairSet, tau: &BitString) -> Dyadic {
    preimage_measure(s, tau, &Lebesgue).expect("uniform measure is exact")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::bs;
    use proptest::prelude::*;

    fn table(pairs: &[(&str, &str)]) -> MonotonePairSet {
        MonotonePairSet::from_pairs(0, pairs.iter().map(|(a, b)| (bs(a), bs(b))))
    }

    #[test]
    fn validate_examples() {
        assert!(table(&[("0", "0"), ("1", "1")]).validate().is_ok());
        assert!(table(&[("0", "00"), ("01", "01")]).validate().is_err());
        assert!(MonotonePairSet::identity(6).validate().is_ok());
    }

    #[test]
    fn apply_examples() {
        assert_eq!(MonotonePairSet::identity(6).apply_prefix(&bs("0110")), bs("0110"));
        assert_eq!(MonotonePairSet::new(0).apply_prefix(&bs("0110")), bs("-"));
        assert_eq!(table(&[("0", "1"), ("00", "11")]).apply_prefix(&bs("001")), bs("11"));
    }

    #[test]
    fn preimage_examples() {
        let id = MonotonePairSet::identity(6);
        assert_eq!(preimage_measure(&id, &bs("0"), &Lebesgue).unwrap(), Dyadic::pow2_neg(1));
        let shift = MonotonePairSet::from_pairs(0, BitString::all_up_to(6).map(|s| (s.clone(), bs("1").concat(&s))));
        assert_eq!(shift.preimage_antichain(&bs("10")), vec![bs("0")]);
        assert_eq!(preimage_measure(&shift, &bs("10"), &Lebesgue).unwrap(), Dyadic::pow2_neg(1));
        assert!(preimage_measure(&MonotonePairSet::new(0), &bs("0"), &Lebesgue).unwrap().is_zero());
    }

    #[test]
    fn semimeasure_examples() {
        assert!(semimeasure_check(&MonotonePairSet::identity(6), 6).is_ok());
        let bad = table(&[("0", "00"), ("01", "01")]);
        assert!(matches!(semimeasure_check(&bad, 4), Err(FunctionalError::Inconsistent { .. })));
    }

    #[test]
    fn compose_examples() {
        let id = MonotonePairSet::identity(4);
        assert_eq!(compose(&id, &id), id);
        let shift = MonotonePairSet::from_pairs(0, BitString::all_up_to(4).map(|s| (s.clone(), bs("1").concat(&s))));
        assert_eq!(compose(&shift, &id), shift);
    }

    #[test]
    fn psi_examples() {
        let mut u = PrefixMachineTable::new();
        u.insert(bs("00"), bs("0"));
        let s = MonotonePairSet::identity(4);
        let psi = psi_combinator(&u, &s);
        psi.validate().unwrap();
        for tau in BitString::all_up_to(4) {
            let lhs = psi.lambda(&bs("0").concat(&tau));
            let rhs = Dyadic::pow2_neg(2) * s.lambda(&tau);
            assert!(lhs >= rhs);
        }
        let empty = psi_combinator(&PrefixMachineTable::new(), &s);
        assert!(empty.is_empty());
        assert!(empty.lambda(&bs("-")).is_zero());
    }

    #[test]
    fn text_round_trips() {
        let t = table(&[("-", "-"), ("0", "1"), ("00", "11")]);
        assert_eq!(MonotonePairSet::parse(&t.to_text()).unwrap(), t);
        let mut u = PrefixMachineTable::new();
        u.insert(bs("00"), bs("0"));
        u.insert(bs("01"), bs("-"));
        assert_eq!(PrefixMachineTable::parse(&u.to_text()).unwrap(), u);
        u.insert(bs("0"), bs("1"));
        assert!(u.validate().is_err());
    }

    /// Random valid tables: a random monotone map on strings of length
    /// `≤ depth`, restricted to a random subset of inputs, with outputs
    /// possibly truncated.
    fn arb_table(depth: usize) -> impl Strategy<Value = MonotonePairSet> {
        let n = (1usize << (depth + 1)) - 1;
        (
            prop::collection::vec((0u8..3, 0u8..4), n),
            prop::collection::vec((any::<bool>(), 0u8..3), n),
        )
            .prop_map(move |(grow, pick)| {
                let all: Vec<BitString> = BitString::all_up_to(depth).collect();
                let mut image: BTreeMap<BitString, BitString> = BTreeMap::new();
                for (k, s) in all.iter().enumerate() {
                    let mut out = s.parent().map(|p| image[&p].clone()).unwrap_or_default();
                    let (len, bits) = grow[k];
                    for b in 0..len {
                        out.push((bits >> b) & 1);
                    }
                    image.insert(s.clone(), out);
                }
                let mut t = MonotonePairSet::new(0);
                for (k, s) in all.iter().enumerate() {
                    let (keep, cut) = pick[k];
                    if keep {
                        let o = &image[s];
                        t.insert(s.clone(), o.prefix(o.len().saturating_sub(cut as usize)));
                    }
                }
                t
            })
    }

    proptest! {
        #[test]
        fn random_tables_are_semimeasures(t in arb_table(5)) {
            prop_assert!(t.validate().is_ok());
            prop_assert!(semimeasure_check(&t, 5).is_ok());
        }

        #[test]
        fn antichain_sum_matches_brute_force(t in arb_table(5), tau in "[01]{0,3}") {
            let tau: BitString = tau.parse().unwrap();
            let brute: Dyadic = BitString::all_of_length(8)
                .filter(|x| t.pairs().any(|(i, _)| i.is_prefix_of(x)) && tau.is_prefix_of(&t.apply_prefix(x)))
                .map(|_| Dyadic::pow2_neg(8))
                .sum();
            prop_assert_eq!(t.lambda(&tau), brute);
        }

        #[test]
        fn adding_pairs_never_lowers_lambda(t in arb_table(4), extra in arb_table(4)) {
            let mut bigger = t.clone();
            for (i, o) in extra.pairs() {
                let mut trial = bigger.clone();
                trial.insert(i.clone(), o.clone());
                if trial.validate().is_ok() {
                    bigger = trial;
                }
            }
            for tau in BitString::all_up_to(3) {
                prop_assert!(bigger.lambda(&tau) >= t.lambda(&tau));
            }
        }

        #[test]
        fn composition_is_pushforward(a in arb_table(4), b in arb_table(4)) {
            let c = compose(&a, &b);
            prop_assert!(c.validate().is_ok());
            for tau in BitString::all_up_to(3) {
                let brute: Dyadic = BitString::all_of_length(8)
                    .filter(|x| b.pairs().any(|(i, _)| i.is_prefix_of(x)))
                    .filter(|x| tau.is_prefix_of(&a.apply_prefix(&b.apply_prefix(x))))
                    .map(|_| Dyadic::pow2_neg(8))
                    .sum();
                prop_assert_eq!(c.lambda(&tau), brute);
            }
        }
    }
}
