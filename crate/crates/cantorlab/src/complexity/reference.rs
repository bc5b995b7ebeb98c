//! The bundled reference machine.
//!
//! Prefix-free part `U`, on inputs `1^e 0 p`:
//! * `e = 0`, literal: `p = sd(n) y` with `|y| = n` prints `y`;
//! * `e = 1`, repeat: `p = sd(n) b` prints `b^n`.
//!
//! Monotone part, on inputs `1^e 0 p`:
//! * `e = 0`, identity: prints `p`;
//! * `e = 1`, embedding of `U`: prints `U(x)` once a program `x ⪯ p` halts;
//! * `e = 2`, block encoder: `p = sd(a) z` prints `1^{2^{i+a}} 0 z_i` for
//!   each bit of `z`, followed by the next run `1^{2^{|z|+a}} 0`.
//!
//! Stage `t` enumerates sub-machine inputs `p` whose length-lex index is at
//! most `t`.

use num_traits::Zero;

use super::{Bound, UniversalMachine};
use crate::arith::{BitString, Dyadic};
use crate::functionals::{MonotonePairSet, PrefixMachineTable};

#[derive(Debug, Clone, Copy, Default)]
pub struct ReferenceMachine;

/// Monotone sub-machine index of the block encoder.
pub const BLOCK_ENCODER_INDEX: u64 = 2;

/// Self-delimiting code: `1^L 0 b`, where `b` is `n + 1` in binary without
/// its leading 1 and `L = |b|`.
pub fn sd(n: u64) -> BitString {
    let m = n + 1;
    let l = 63 - m.leading_zeros() as usize;
    let mut out = BitString::ones(l);
    out.push(0);
    out.extend_from(&BitString::from_u64(m - (1u64 << l), l));
    out
}

/// Decodes `sd(n)` at the start of `bits`: `Some((n, consumed))`, or `None`
/// if `bits` ends before the code does.
pub fn parse_sd(bits: &[u8]) -> Option<(u64, usize)> {
    let l = bits.iter().position(|&b| b == 0)?;
    if l >= 63 || bits.len() < 2 * l + 1 {
        return None;
    }
    let tail = bits[l + 1..2 * l + 1].iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
    Some(((1u64 << l) + tail - 1, 2 * l + 1))
}

fn sd_len(n: u64) -> usize {
    2 * crate::arith::floor_log2(n + 1) as usize + 1
}

fn idx_le(x: &BitString, t: u64) -> bool {
    x.length_lex_index().is_some_and(|i| i <= t)
}

/// Number of strings `prefix·w` with `|w| = r` whose length-lex index is at most `t`.
fn count_extensions_le(prefix: &BitString, r: usize, t: u64) -> u128 {
    let len = prefix.len() + r;
    if len >= 64 {
        return 0;
    }
    let base = (1u128 << len) - 1;
    if base > t as u128 {
        return 0;
    }
    let budget = t as u128 - base; // bin(x) ≤ budget
    let p = prefix.bits().iter().fold(0u128, |acc, &b| (acc << 1) | b as u128);
    let lo = p << r;
    if budget < lo {
        return 0;
    }
    (budget - lo + 1).min(1u128 << r)
}

/// Longest length whose strings can have index `≤ t`.
fn max_len(t: u64) -> usize {
    crate::arith::floor_log2(t.saturating_add(1)) as usize
}

impl ReferenceMachine {
    /// `U(x)` when `x` is exactly a halting program.
    pub fn run_prefix(x: &BitString) -> Option<BitString> {
        let bits = x.bits();
        let e = bits.iter().position(|&b| b == 0)?;
        let rest = &bits[e + 1..];
        let (n, used) = parse_sd(rest)?;
        let body = &rest[used..];
        match e {
            0 if body.len() as u64 == n => Some(BitString::from_bits(body).expect("bits")),
            1 if body.len() == 1 => Some(BitString::repeat(body[0], n as usize)),
            _ => None,
        }
    }

    pub fn literal_program(y: &BitString) -> BitString {
        let mut p = BitString::zeros(1);
        p.extend_from(&sd(y.len() as u64));
        p.extend_from(y);
        p
    }

    pub fn repeat_program(bit: u8, n: u64) -> BitString {
        let mut p = BitString::from_bits(&[1, 0]).expect("bits");
        p.extend_from(&sd(n));
        p.push(bit);
        p
    }

    /// Every halting program with index `≤ t`.
    pub fn prefix_table(t: u64) -> PrefixMachineTable {
        let mut table = PrefixMachineTable::new();
        for i in 0..=t {
            let x = BitString::from_length_lex_index(i);
            if let Some(out) = Self::run_prefix(&x) {
                table.insert(x, out);
            }
        }
        table
    }

    /// Output of the block encoder on `p`, cut at `cap` bits.
    pub fn block_encoder_output(p: &BitString, cap: usize) -> BitString {
        let mut out = BitString::empty();
        let Some((a, used)) = parse_sd(p.bits()) else {
            return out;
        };
        let z = &p.bits()[used..];
        let run = |k: u64, out: &mut BitString| {
            let len = if k >= 63 { cap } else { (1u64 << k).min(cap as u64) as usize };
            out.push_run(1, len);
            out.truncate(cap);
            if out.len() < cap {
                out.push(0);
            }
        };
        for (i, &bit) in z.iter().enumerate() {
            run(i as u64 + a, &mut out);
            if out.len() >= cap {
                return out;
            }
            out.push(bit);
            if out.len() >= cap {
                return out;
            }
        }
        run(z.len() as u64 + a, &mut out);
        out.truncate(cap);
        out
    }

    /// Output of the universal monotone machine on input `w`, cut at `cap` bits.
    pub fn monotone_output(w: &BitString, cap: usize) -> BitString {
        let bits = w.bits();
        let Some(e) = bits.iter().position(|&b| b == 0) else {
            return BitString::empty();
        };
        let p = w.slice(e + 1, w.len());
        match e {
            0 => p.prefix(cap),
            1 => (0..=p.len())
                .find_map(|k| Self::run_prefix(&p.prefix(k)))
                .map(|o| o.prefix(cap))
                .unwrap_or_default(),
            2 => Self::block_encoder_output(&p, cap),
            _ => BitString::empty(),
        }
    }

    /// Materialized monotone stage `t` as a pair table, outputs cut at `cap`.
    pub fn monotone_table(t: u64, cap: usize) -> MonotonePairSet {
        let mut s = MonotonePairSet::new(t);
        for i in 0..=t {
            let p = BitString::from_length_lex_index(i);
            s.insert(BitString::zeros(1).concat(&p), p.prefix(cap));
            if let Some(out) = Self::run_prefix(&p) {
                s.insert(BitString::from_bits(&[1, 0]).expect("bits").concat(&p), out.prefix(cap));
            }
            let q = Self::block_encoder_output(&p, cap);
            s.insert(BitString::from_bits(&[1, 1, 0]).expect("bits").concat(&p), q);
        }
        s
    }

    /// `λ` of the identity part: `2^{-|σ|}` once `σ` itself is enumerated.
    fn lambda_identity(sigma: &BitString, t: u64) -> Dyadic {
        if idx_le(sigma, t) {
            Dyadic::pow2_neg(sigma.len() as u64)
        } else {
            Dyadic::zero()
        }
    }

    /// `λ` of the embedded prefix machine: `Σ 2^{-|x|}` over enumerated
    /// programs `x` with `U(x) ⪰ σ`.
    fn lambda_embedded(sigma: &BitString, t: u64) -> Dyadic {
        let lmax = max_len(t);
        let mut total = Dyadic::zero();
        // Literal programs 0 sd(n) σ w with |w| = n − |σ|.
        let mut n = sigma.len() as u64;
        while 1 + sd_len(n) + n as usize <= lmax {
            let mut prefix = BitString::zeros(1);
            prefix.extend_from(&sd(n));
            prefix.extend_from(sigma);
            let r = n as usize - sigma.len();
            let count = count_extensions_le(&prefix, r, t);
            if count > 0 {
                let len = prefix.len() + r;
                total = &total + &(Dyadic::new(count.into(), 0).scale_pow2(-(len as i64)));
            }
            n += 1;
        }
        // Repeat programs 10 sd(n) b with σ ⪯ b^n.
        let bits: Vec<u8> = match (sigma.get(0), sigma.count_ones()) {
            (None, _) => vec![0, 1],
            (Some(_), 0) => vec![0],
            (Some(_), k) if k == sigma.len() => vec![1],
            _ => vec![],
        };
        for b in bits {
            let mut n = sigma.len() as u64;
            while 3 + sd_len(n) <= lmax {
                let p = Self::repeat_program(b, n);
                if idx_le(&p, t) {
                    total = &total + &Dyadic::pow2_neg(p.len() as u64);
                }
                n += 1;
            }
        }
        total
    }

    /// `λ` of the block encoder, by search over enumerated inputs that stay
    /// compatible with `σ`.
    fn lambda_block(sigma: &BitString, t: u64) -> Dyadic {
        let cap = sigma.len();
        let mut total = Dyadic::zero();
        let mut stack = vec![BitString::empty()];
        while let Some(p) = stack.pop() {
            let out = Self::block_encoder_output(&p, cap);
            if sigma.is_prefix_of(&out) {
                total = &total + &Dyadic::pow2_neg(p.len() as u64);
                continue;
            }
            if !out.is_prefix_of(sigma) {
                continue;
            }
            for b in [1u8, 0] {
                let c = p.child(b);
                if idx_le(&c, t) {
                    stack.push(c);
                }
            }
        }
        total
    }

    /// `M_t(σ) = ½λ₀ + ¼λ₁ + ⅛λ₂`.
    pub fn m_t(sigma: &BitString, t: u64) -> Dyadic {
        let a = Self::lambda_identity(sigma, t).scale_pow2(-1);
        let b = Self::lambda_embedded(sigma, t).scale_pow2(-2);
        let c = Self::lambda_block(sigma, t).scale_pow2(-3);
        &(&a + &b) + &c
    }
}

impl UniversalMachine for ReferenceMachine {
    fn name(&self) -> &str {
        "reference-v1"
    }

    fn k_t(&self, sigma: &BitString, t: u64) -> Bound {
        let mut best = Bound::Unbounded;
        let lit = Self::literal_program(sigma);
        if idx_le(&lit, t) {
            best = best.min(Bound::Finite(lit.len() as u64));
        }
        let bits: Vec<u8> = match (sigma.get(0), sigma.count_ones()) {
            (None, _) => vec![0, 1],
            (Some(_), 0) => vec![0],
            (Some(_), k) if k == sigma.len() => vec![1],
            _ => vec![],
        };
        for b in bits {
            let p = Self::repeat_program(b, sigma.len() as u64);
            if idx_le(&p, t) {
                best = best.min(Bound::Finite(p.len() as u64));
            }
        }
        best
    }

    fn m_t(&self, sigma: &BitString, t: u64) -> Dyadic {
        ReferenceMachine::m_t(sigma, t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::bs;
    use crate::complexity::ka_from_table;

    #[test]
    fn sd_round_trips() {
        assert_eq!(sd(0), bs("0"));
        assert_eq!(sd(1), bs("100"));
        assert_eq!(sd(4), bs("11001"));
        for n in 0..2000u64 {
            let c = sd(n);
            assert_eq!(c.len(), sd_len(n));
            assert_eq!(parse_sd(c.bits()), Some((n, c.len())));
            assert_eq!(parse_sd(&c.bits()[..c.len() - 1]), None);
        }
    }

    #[test]
    fn prefix_part_is_prefix_free() {
        let table = ReferenceMachine::prefix_table(4000);
        table.validate().unwrap();
        assert_eq!(table.run(&bs("00")), Some(&bs("-")));
    }

    #[test]
    fn analytic_k_matches_table() {
        for t in [0u64, 3, 10, 100, 1000, 4000] {
            let table = ReferenceMachine::prefix_table(t);
            for s in BitString::all_up_to(6) {
                let from_table = table
                    .shortest_program(&s)
                    .map(|p| Bound::Finite(p.len() as u64))
                    .unwrap_or(Bound::Unbounded);
                assert_eq!(ReferenceMachine.k_t(&s, t), from_table, "sigma={s} t={t}");
            }
        }
    }

    #[test]
    fn analytic_m_matches_materialized_table() {
        for t in [0u64, 5, 40, 300, 1500] {
            let table = ReferenceMachine::monotone_table(t, 8);
            table.validate().unwrap();
            for s in BitString::all_up_to(5) {
                assert_eq!(ReferenceMachine::m_t(&s, t), table.lambda(&s), "sigma={s} t={t}");
                assert_eq!(ReferenceMachine.ka_t(&s, t), ka_from_table(&table, &s));
            }
        }
    }

    #[test]
    fn block_encoder_examples() {
        // sd(0) = 0, so blocks are 1^{2^i} 0 z_i.
        assert_eq!(ReferenceMachine::block_encoder_output(&bs("0"), 10), bs("10"));
        assert_eq!(ReferenceMachine::block_encoder_output(&bs("01"), 20), bs("101110"));
        assert_eq!(ReferenceMachine::block_encoder_output(&bs("010"), 20), bs("101110011110"));
        assert_eq!(ReferenceMachine::block_encoder_output(&bs("01"), 4), bs("1011"));
        assert_eq!(ReferenceMachine::block_encoder_output(&bs("1"), 4), bs("-"));
    }
}
