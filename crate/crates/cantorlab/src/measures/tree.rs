use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};

use super::{MeasureError, MeasureOracle};
use crate::arith::{BitString, Dyadic};

/// How a tree answers queries deeper than its stored depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ExtensionRule {
    /// Mass below depth halves at every level.
    UniformSplit,
    /// Mass below depth follows the all-zeros extension.
    FollowZeros,
    #[default]
    Error,
}

impl ExtensionRule {
    pub fn as_str(&self) -> &'static str {
        match self {
            ExtensionRule::UniformSplit => "uniform-split",
            ExtensionRule::FollowZeros => "follow-zeros",
            ExtensionRule::Error => "error",
        }
    }
}

impl FromStr for ExtensionRule {
    type Err = MeasureError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform-split" => Ok(ExtensionRule::UniformSplit),
            "follow-zeros" => Ok(ExtensionRule::FollowZeros),
            "error" => Ok(ExtensionRule::Error),
            _ => Err(MeasureError::Parse(format!("unknown extension rule {s:?}"))),
        }
    }
}

/// Exact restriction of a measure to strings of length at most `depth`.
///
/// Storage is sparse: strings that are not stored have mass 0.
#[derive(Clone, PartialEq, Eq)]
pub struct MeasureTree {
    depth: usize,
    rule: ExtensionRule,
    values: BTreeMap<BitString, Dyadic>,
}

impl fmt::Debug for MeasureTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MeasureTree")
            .field("depth", &self.depth)
            .field("rule", &self.rule)
            .field("stored", &self.values.len())
            .finish()
    }
}

/// First failure found by [`MeasureTree::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeViolation {
    RootMass { value: Dyadic },
    Negative { sigma: BitString, value: Dyadic },
    Additivity { sigma: BitString, value: Dyadic, children: Dyadic },
    TooDeep { sigma: BitString },
}

impl TreeViolation {
    pub fn sigma(&self) -> BitString {
        match self {
            TreeViolation::RootMass { .. } => BitString::empty(),
            TreeViolation::Negative { sigma, .. }
            | TreeViolation::Additivity { sigma, .. }
            | TreeViolation::TooDeep { sigma } => sigma.clone(),
        }
    }
}

impl fmt::Display for TreeViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TreeViolation::RootMass { value } => write!(f, "root mass is {value}, expected 1"),
            TreeViolation::Negative { sigma, value } => write!(f, "negative mass {value} at {sigma}"),
            TreeViolation::Additivity { sigma, value, children } => {
                write!(f, "additivity fails at {sigma}: {value} != {children}")
            }
            TreeViolation::TooDeep { sigma } => write!(f, "{sigma} is deeper than the tree"),
        }
    }
}

impl std::error::Error for TreeViolation {}

impl MeasureTree {
    /// An empty tree (every value 0, including the root).
    pub fn new(depth: usize, rule: ExtensionRule) -> Self {
        MeasureTree { depth, rule, values: BTreeMap::new() }
    }

    /// Builds a tree in one go; later entries win, zeros are dropped.
    pub fn from_entries<I>(depth: usize, rule: ExtensionRule, entries: I) -> Result<Self, MeasureError>
    where
        I: IntoIterator<Item = (BitString, Dyadic)>,
    {
        let mut values = Vec::new();
        for (sigma, value) in entries {
            if sigma.len() > depth {
                return Err(MeasureError::DepthExceeded { sigma, depth });
            }
            values.push((sigma, value));
        }
        let mut values: BTreeMap<_, _> = values.into_iter().collect();
        values.retain(|_, v| !v.is_zero());
        Ok(MeasureTree { depth, rule, values })
    }

    pub fn lebesgue(depth: usize) -> Self {
        let mut t = MeasureTree::new(depth, ExtensionRule::UniformSplit);
        for s in BitString::all_up_to(depth) {
            let v = Dyadic::pow2_neg(s.len() as u64);
            t.values.insert(s, v);
        }
        t
    }

    /// Point mass on `prefix` followed by all zeros.
    pub fn point_mass_zeros(prefix: &BitString, depth: usize) -> Self {
        let mut t = MeasureTree::new(depth, ExtensionRule::FollowZeros);
        let mut x = prefix.prefix(depth);
        x.push_run(0, depth - x.len());
        for p in x.prefixes() {
            t.values.insert(p, Dyadic::one());
        }
        t
    }

    /// Materializes an exact oracle, skipping zero-mass subtrees.
    pub fn from_oracle<O: MeasureOracle + ?Sized>(o: &O, depth: usize, rule: ExtensionRule) -> Result<Self, MeasureError> {
        if !o.is_exact() {
            return Err(MeasureError::Invalid("materializing a tree needs an exact oracle".into()));
        }
        let mut t = MeasureTree::new(depth, rule);
        let mut stack = vec![BitString::empty()];
        while let Some(s) = stack.pop() {
            let v = o.approx(&s, 0)?;
            if v.is_zero() {
                continue;
            }
            if s.len() < depth {
                stack.push(s.child(1));
                stack.push(s.child(0));
            }
            t.values.insert(s, v);
        }
        Ok(t)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn rule(&self) -> ExtensionRule {
        self.rule
    }

    pub fn with_rule(mut self, rule: ExtensionRule) -> Self {
        self.rule = rule;
        self
    }

    /// Number of stored (non-zero) entries.
    pub fn stored_len(&self) -> usize {
        self.values.len()
    }

    pub fn set(&mut self, sigma: BitString, value: Dyadic) -> Result<(), MeasureError> {
        if sigma.len() > self.depth {
            return Err(MeasureError::DepthExceeded { sigma, depth: self.depth });
        }
        if value.is_zero() {
            self.values.remove(&sigma);
        } else {
            self.values.insert(sigma, value);
        }
        Ok(())
    }

    /// Stored value for `|σ| ≤ depth`.
    pub fn stored(&self, sigma: &BitString) -> Dyadic {
        self.values.get(sigma).cloned().unwrap_or_else(Dyadic::zero)
    }

    /// `μ(σ)`, applying the extension rule below the stored depth.
    pub fn value(&self, sigma: &BitString) -> Result<Dyadic, MeasureError> {
        if sigma.len() <= self.depth {
            return Ok(self.stored(sigma));
        }
        let base = self.stored(&sigma.prefix(self.depth));
        let extra = sigma.len() - self.depth;
        match self.rule {
            ExtensionRule::Error => Err(MeasureError::DepthExceeded { sigma: sigma.clone(), depth: self.depth }),
            ExtensionRule::UniformSplit => Ok(base.scale_pow2(-(extra as i64))),
            ExtensionRule::FollowZeros => {
                if sigma.bits()[self.depth..].iter().all(|&b| b == 0) {
                    Ok(base)
                } else {
                    Ok(Dyadic::zero())
                }
            }
        }
    }

    /// Non-zero entries in length-lex order.
    pub fn iter(&self) -> impl Iterator<Item = (&BitString, &Dyadic)> {
        self.values.iter()
    }

    /// Non-zero entries of length exactly `level`.
    pub fn level(&self, level: usize) -> impl Iterator<Item = (&BitString, &Dyadic)> {
        self.values.range(BitString::zeros(level)..=BitString::ones(level))
    }

    /// Checks root mass 1, non-negativity and exact additivity above depth.
    /// Reports the first offending string in length-lex order.
    pub fn validate(&self) -> Result<(), TreeViolation> {
        if self.quick_check() {
            return Ok(());
        }
        self.first_violation()
    }

    /// Merge of each level with the next; false means something is wrong.
    fn quick_check(&self) -> bool {
        if self.stored(&BitString::empty()) != Dyadic::one() {
            return false;
        }
        if self.values.keys().next_back().is_some_and(|s| s.len() > self.depth) {
            return false;
        }
        if self.values.values().any(Dyadic::is_negative) {
            return false;
        }
        for level in 0..self.depth {
            let mut kids = self.level(level + 1).peekable();
            for (s, v) in self.level(level) {
                let mut sum = Dyadic::zero();
                while let Some((c, cv)) = kids.next_if(|(c, _)| c.bits()[..level] == *s.bits()) {
                    debug_assert_eq!(c.len(), level + 1);
                    sum = &sum + cv;
                }
                if sum != *v {
                    return false;
                }
            }
            if kids.next().is_some() {
                return false;
            }
        }
        true
    }

    fn first_violation(&self) -> Result<(), TreeViolation> {
        let root = self.stored(&BitString::empty());
        if root != Dyadic::one() {
            return Err(TreeViolation::RootMass { value: root });
        }
        // Only stored strings and parents of stored strings can fail.
        let mut candidates: BTreeSet<BitString> = BTreeSet::new();
        for s in self.values.keys() {
            if s.len() > self.depth {
                return Err(TreeViolation::TooDeep { sigma: s.clone() });
            }
            candidates.insert(s.clone());
            if let Some(p) = s.parent() {
                candidates.insert(p);
            }
        }
        for s in candidates {
            let v = self.stored(&s);
            if v.is_negative() {
                return Err(TreeViolation::Negative { sigma: s, value: v });
            }
            if s.len() < self.depth {
                let children = &self.stored(&s.child(0)) + &self.stored(&s.child(1));
                if children != v {
                    return Err(TreeViolation::Additivity { sigma: s, value: v, children });
                }
            }
        }
        Ok(())
    }

    /// Line-oriented text form, non-zero entries only, sorted by length then
    /// lexicographically.
    pub fn to_text(&self) -> String {
        let mut out = format!("measuretree v1 depth={}", self.depth);
        if self.rule != ExtensionRule::Error {
            out.push_str(&format!(" extend={}", self.rule.as_str()));
        }
        out.push('\n');
        for (s, v) in &self.values {
            out.push_str(&format!("{s} {v}\n"));
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, MeasureError> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or_else(|| MeasureError::Parse("empty measure tree file".into()))?;
        let mut parts = header.split_whitespace();
        if parts.next() != Some("measuretree") || parts.next() != Some("v1") {
            return Err(MeasureError::Parse(format!("bad header {header:?}")));
        }
        let mut depth = None;
        let mut rule = ExtensionRule::Error;
        for p in parts {
            match p.split_once('=') {
                Some(("depth", d)) => {
                    depth = Some(d.parse::<usize>().map_err(|_| MeasureError::Parse(format!("bad depth {d:?}")))?)
                }
                Some(("extend", r)) => rule = r.parse()?,
                _ => return Err(MeasureError::Parse(format!("unknown header field {p:?}"))),
            }
        }
        let depth = depth.ok_or_else(|| MeasureError::Parse("header lacks depth=".into()))?;
        let mut t = MeasureTree::new(depth, rule);
        let mut prev: Option<BitString> = None;
        for (ln, line) in lines {
            let (s, v) = line
                .trim()
                .split_once(' ')
                .ok_or_else(|| MeasureError::Parse(format!("line {}: expected '<string> <value>'", ln + 1)))?;
            let s: BitString = s.parse()?;
            let v: Dyadic = v.trim().parse()?;
            if let Some(p) = &prev {
                if *p >= s {
                    return Err(MeasureError::Parse(format!("line {}: strings out of order", ln + 1)));
                }
            }
            prev = Some(s.clone());
            t.set(s, v)?;
        }
        Ok(t)
    }
}

impl MeasureOracle for MeasureTree {
    fn approx(&self, sigma: &BitString, _precision: u64) -> Result<Dyadic, MeasureError> {
        self.value(sigma)
    }
    fn is_exact(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::bs;

    #[test]
    fn lebesgue_validates() {
        assert!(MeasureTree::lebesgue(8).validate().is_ok());
    }

    #[test]
    fn from_entries_matches_set() {
        let h = Dyadic::pow2_neg(1);
        let e = vec![(bs(""), Dyadic::one()), (bs("0"), h.clone()), (bs("1"), h.clone()), (bs("11"), Dyadic::zero())];
        let t = MeasureTree::from_entries(2, ExtensionRule::UniformSplit, e).unwrap();
        let mut u = MeasureTree::new(2, ExtensionRule::UniformSplit);
        u.set(bs(""), Dyadic::one()).unwrap();
        u.set(bs("0"), h.clone()).unwrap();
        u.set(bs("1"), h.clone()).unwrap();
        assert_eq!(t, u);
        assert!(t.validate().is_err());
        assert!(MeasureTree::from_entries(1, ExtensionRule::Error, [(bs("01"), h)]).is_err());
    }

    #[test]
    fn bad_split_reported_at_root() {
        let mut t = MeasureTree::new(1, ExtensionRule::Error);
        t.set(bs("-"), Dyadic::one()).unwrap();
        t.set(bs("0"), Dyadic::pow2_neg(1)).unwrap();
        t.set(bs("1"), Dyadic::pow2_neg(2)).unwrap();
        let v = t.validate().unwrap_err();
        assert_eq!(v.sigma(), bs("-"));
        assert!(matches!(v, TreeViolation::Additivity { .. }));
    }

    #[test]
    fn first_violation_is_length_lex_least() {
        let mut t = MeasureTree::lebesgue(4);
        t.set(bs("1011"), Dyadic::pow2_neg(3)).unwrap();
        t.set(bs("0111"), Dyadic::zero()).unwrap();
        assert_eq!(t.validate().unwrap_err().sigma(), bs("011"));
    }

    #[test]
    fn extension_rules() {
        let t = MeasureTree::lebesgue(3);
        assert_eq!(t.value(&bs("010110")).unwrap(), Dyadic::pow2_neg(6));
        let p = MeasureTree::point_mass_zeros(&bs("-"), 3);
        assert_eq!(p.value(&bs("000000")).unwrap(), Dyadic::one());
        assert!(p.value(&bs("000001")).unwrap().is_zero());
        let e = MeasureTree::lebesgue(3).with_rule(ExtensionRule::Error);
        assert!(matches!(e.value(&bs("0000")), Err(MeasureError::DepthExceeded { .. })));
    }

    #[test]
    fn text_round_trip_is_bit_exact() {
        for t in [MeasureTree::lebesgue(5), MeasureTree::point_mass_zeros(&bs("01"), 6)] {
            let text = t.to_text();
            let back = MeasureTree::parse(&text).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.to_text(), text);
        }
        assert!(MeasureTree::parse("measuretree v1 depth=2\n1 1/2^1\n0 1/2^1\n").is_err());
        assert!(MeasureTree::parse("measuretree v2 depth=2\n").is_err());
    }
}
