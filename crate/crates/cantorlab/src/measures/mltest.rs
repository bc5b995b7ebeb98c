use std::collections::BTreeSet;

use num_traits::Zero;

use super::{MeasureError, MeasureOracle, DEFAULT_GUARD};
use crate::arith::{ceil_log2, BitString, Dyadic};

/// Uniformly enumerated open sets `U_i`, listed as `(i, s, σ)` entries:
/// `σ` is enumerated into `U_i` at stage `s`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct StagedOpenSet {
    entries: BTreeSet<(u64, u64, BitString)>,
}

impl StagedOpenSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, i: u64, s: u64, sigma: BitString) {
        self.entries.insert((i, s, sigma));
    }

    /// Strings enumerated into `U_i` by stage `s`.
    pub fn stage(&self, i: u64, s: u64) -> Vec<BitString> {
        let set: BTreeSet<BitString> = self
            .entries
            .iter()
            .filter(|(ei, es, _)| *ei == i && *es <= s)
            .map(|(_, _, sigma)| sigma.clone())
            .collect();
        set.into_iter().collect()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("mltest v1\n");
        for (i, s, sigma) in &self.entries {
            out.push_str(&format!("i={i} s={s} {sigma}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, MeasureError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        if lines.next().map(str::trim) != Some("mltest v1") {
            return Err(MeasureError::Parse("expected header 'mltest v1'".into()));
        }
        let mut set = StagedOpenSet::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            let field = |p: &str, key: &str| -> Result<u64, MeasureError> {
                p.strip_prefix(key)
                    .and_then(|v| v.parse().ok())
                    .ok_or_else(|| MeasureError::Parse(format!("bad field {p:?} in {line:?}")))
            };
            if parts.len() != 3 {
                return Err(MeasureError::Parse(format!("expected 'i=<i> s=<s> <bits>', got {line:?}")));
            }
            set.insert(field(parts[0], "i=")?, field(parts[1], "s=")?, parts[2].parse()?);
        }
        Ok(set)
    }
}

fn check_prefix_free(set: &[BitString]) -> Result<(), MeasureError> {
    // Sorted lexicographically, any prefix pair has the prefix immediately
    // before some extension of it, so adjacent checks suffice.
    let mut v: Vec<&BitString> = set.iter().collect();
    v.sort_by(|a, b| a.lex_cmp(b));
    for w in v.windows(2) {
        if w[0].is_prefix_of(w[1]) {
            return Err(MeasureError::NotPrefixFree(w[0].clone(), w[1].clone()));
        }
    }
    Ok(())
}

/// `μ(U_i[s])`, exact for exact oracles. Otherwise each of the `m` strings
/// is queried at precision `i + ⌈log2 m⌉ + guard`, so the total is within
/// `2^{-(i + guard)}`.
pub fn ml_test_margin<O: MeasureOracle + ?Sized>(u: &StagedOpenSet, mu: &O, i: u64, s: u64) -> Result<Dyadic, MeasureError> {
    let set = u.stage(i, s);
    check_prefix_free(&set)?;
    let precision = i + ceil_log2(set.len().max(1) as u64) as u64 + DEFAULT_GUARD;
    let mut total = Dyadic::zero();
    for sigma in &set {
        total = &total + &mu.approx(sigma, precision)?;
    }
    Ok(total)
}
