use std::fmt;

use super::{Bound, ComplexityError, UniversalMachine};
use crate::arith::{floor_log2, BitString};
use crate::orders::{Order, OrderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanMode {
    /// `K(X↾f(n)) ≥ n` for all `n`.
    Complex,
    /// `K(X↾f(n)) ≥ n` for infinitely many `n`.
    IoComplex,
    /// `K(X↾f(n)) ≤ n` for almost every `n`.
    AntiComplex,
    /// `K(X↾f(n)) ≤ n` for infinitely many `n`.
    IoAntiComplex,
}

impl ScanMode {
    fn upper(self) -> bool {
        matches!(self, ScanMode::AntiComplex | ScanMode::IoAntiComplex)
    }

    fn all(self) -> bool {
        matches!(self, ScanMode::Complex | ScanMode::AntiComplex)
    }
}

impl fmt::Display for ScanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScanMode::Complex => "complex",
            ScanMode::IoComplex => "io-complex",
            ScanMode::AntiComplex => "anti-complex",
            ScanMode::IoAntiComplex => "io-anti-complex",
        })
    }
}

impl std::str::FromStr for ScanMode {
    type Err = ComplexityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "complex" => Ok(ScanMode::Complex),
            "io-complex" => Ok(ScanMode::IoComplex),
            "anti-complex" => Ok(ScanMode::AntiComplex),
            "io-anti-complex" => Ok(ScanMode::IoAntiComplex),
            _ => Err(ComplexityError::Parse(format!("unknown scan mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Consistent,
    Refuted { n: u64 },
}

/// How far a verdict can be trusted. Stage-`t` values only bound the true
/// complexity from above, so upper-bound scans certify and lower-bound scans
/// can only refute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Semantics {
    Certificate,
    RefutationOnly,
}

impl fmt::Display for Semantics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Semantics::Certificate => "certificate",
            Semantics::RefutationOnly => "refutation-only",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessReport {
    pub mode: ScanMode,
    /// `K_t` or `KA_t`.
    pub quantity: &'static str,
    pub order: String,
    pub from: u64,
    pub to: u64,
    pub verdict: Verdict,
    /// Indices at which the condition held.
    pub witnesses: Vec<u64>,
    pub semantics: Semantics,
}

impl fmt::Display for WitnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = match self.verdict {
            Verdict::Consistent => "consistent".to_string(),
            Verdict::Refuted { n } => format!("refuted at n = {n}"),
        };
        write!(
            f,
            "mode={} quantity={} order={} range={}..={} verdict={} witnesses={} semantics={}",
            self.mode,
            self.quantity,
            self.order,
            self.from,
            self.to,
            verdict,
            self.witnesses.len(),
            self.semantics
        )
    }
}

/// Shared scan: compares `value(X↾f(n))` with `bound(n) + c` on `range`.
#[allow(clippy::too_many_arguments)]
fn scan(
    x: &BitString,
    f: &Order,
    bound: &dyn Fn(u64) -> Result<u64, OrderError>,
    c: u64,
    range: (u64, u64),
    mode: ScanMode,
    quantity: &'static str,
    value: &dyn Fn(&BitString) -> Bound,
) -> Result<WitnessReport, ComplexityError> {
    let (from, to) = range;
    let needed = f.eval(to)?;
    if needed > x.len() as u64 {
        return Err(ComplexityError::Range { needed, len: x.len() });
    }
    let mut witnesses = Vec::new();
    let mut failure = None;
    for n in from..=to {
        let v = value(&x.prefix(f.eval(n)? as usize));
        let b = Bound::Finite(bound(n)?.saturating_add(c));
        let holds = if mode.upper() { v <= b } else { v >= b };
        if holds {
            witnesses.push(n);
        } else if failure.is_none() {
            failure = Some(n);
        }
    }
    let verdict = if mode.all() {
        failure.map_or(Verdict::Consistent, |n| Verdict::Refuted { n })
    } else if witnesses.is_empty() {
        Verdict::Refuted { n: to }
    } else {
        Verdict::Consistent
    };
    Ok(WitnessReport {
        mode,
        quantity,
        order: f.name().to_string(),
        from,
        to,
        verdict,
        witnesses,
        semantics: if mode.upper() { Semantics::Certificate } else { Semantics::RefutationOnly },
    })
}

/// Checks the chosen condition on `K_t(X↾f(n))` for `n` in `from..=to`.
///
/// For the "all" modes the first failing index is reported; for the i.o.
/// modes the verdict is "consistent" when some witness was found.
pub fn witness_scan(
    x: &BitString,
    f: &Order,
    m: &dyn UniversalMachine,
    t: u64,
    from: u64,
    to: u64,
    mode: ScanMode,
) -> Result<WitnessReport, ComplexityError> {
    scan(x, f, &Ok, 0, (from, to), mode, "K_t", &|s| m.k_t(s, t))
}

/// Certifies `KA_t(X↾f(n)) ≤ h(n) + c` on `from..=to`.
#[allow(clippy::too_many_arguments)]
pub fn ka_upper_scan(
    x: &BitString,
    f: &Order,
    h: &Order,
    c: u64,
    m: &dyn UniversalMachine,
    t: u64,
    from: u64,
    to: u64,
) -> Result<WitnessReport, ComplexityError> {
    scan(x, f, &|n| h.eval(n), c, (from, to), ScanMode::AntiComplex, "KA_t", &|s| m.ka_t(s, t))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KaForm {
    /// `KA(X↾f(n)) ≤ n` for almost every `n`.
    FForm,
    /// `KA(X↾n) ≤ f(n)` for almost every `n`.
    NForm,
}

/// The two `KA` formulations of non-complexity, checked with `ka_t` on
/// `from..=to`. Both are upper bounds, so "consistent" certifies the range.
pub fn noncomplexity_reformulation_check(
    x: &BitString,
    f: &Order,
    m: &dyn UniversalMachine,
    t: u64,
    from: u64,
    to: u64,
    which: KaForm,
) -> Result<WitnessReport, ComplexityError> {
    let value = |s: &BitString| m.ka_t(s, t);
    match which {
        KaForm::FForm => scan(x, f, &Ok, 0, (from, to), ScanMode::AntiComplex, "KA_t", &value),
        KaForm::NForm => {
            let mut r = scan(x, &Order::identity(), &|n| f.eval(n), 0, (from, to), ScanMode::AntiComplex, "KA_t", &value)?;
            r.order = f.name().to_string();
            Ok(r)
        }
    }
}

/// Lower bound order for `KA` obtained from `K(X↾h(n)) ≥ n`:
/// `n ↦ max(0, max_{j ≤ m} (j − 2⌊log2 max(j, 2)⌋) − C)` at
/// `m = h^{-1}(n) − 1` (saturating at 0).
///
/// The running maximum over `j ≤ m` keeps the result non-decreasing; the
/// bare expression at `j = m` dips right after each power of two.
pub fn transform_k_to_ka_witness(h: &Order, c: u64) -> Result<Order, ComplexityError> {
    let inv = h.inverse();
    let name = format!("k-to-ka({},C={c})", h.name());
    let out = Order::from_fn(name, move |n| {
        let m = inv.eval(n)?.saturating_sub(1);
        Ok(running_peak(m).saturating_sub(c))
    })?;
    Ok(out)
}

/// `max_{j ≤ m} (j − 2⌊log2 max(j, 2)⌋)` clamped at 0. On each block
/// `[2^k, 2^{k+1})` the expression increases, so the maximum is attained
/// either at `m` or at the top of an earlier block.
fn running_peak(m: u64) -> u64 {
    let val = |j: u64| (j as i128 - 2 * floor_log2(j.max(2)) as i128).max(0) as u64;
    let mut best = val(m);
    let k = floor_log2(m.max(1));
    for b in 1..k {
        best = best.max(val((1u64 << (b + 1)) - 1));
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InverseKind {
    /// `n ↦ h(g^{-1}(n) − 1)`: a `KA` lower bound from a complexity order.
    CiI,
    /// `n ↦ f^{-1}(n)`: the lengths at which `KA ≥ n` holds.
    CiII,
    /// `n ↦ h^{-1}(n)`: a `KA` upper bound from a non-complexity order.
    Ci2I,
    /// `n ↦ h^{-1}(n) − 1`: lengths at which `KA < n`.
    Ci2II,
}

impl std::str::FromStr for InverseKind {
    type Err = ComplexityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ci-i" => Ok(InverseKind::CiI),
            "ci-ii" => Ok(InverseKind::CiII),
            "ci2-i" => Ok(InverseKind::Ci2I),
            "ci2-ii" => Ok(InverseKind::Ci2II),
            _ => Err(ComplexityError::Parse(format!("unknown transform kind {s:?}"))),
        }
    }
}

/// Transformed bound orders, built from composition and inversion only.
/// Subtractions saturate at 0.
pub fn inverse_bound_transform(kind: InverseKind, h: &Order, g: Option<&Order>) -> Result<Order, ComplexityError> {
    let pred = Order::predecessor();
    match kind {
        InverseKind::CiI => {
            let g = g.ok_or(ComplexityError::MissingArgument("g is required for ci-i"))?;
            Ok(h.compose(&pred.compose(&g.inverse())))
        }
        InverseKind::CiII | InverseKind::Ci2I => Ok(h.inverse()),
        InverseKind::Ci2II => Ok(pred.compose(&h.inverse())),
    }
}
