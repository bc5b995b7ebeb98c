use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::ArithError;

/// Finite binary string. Ordered by length first, then lexicographically,
/// which is also the order used in every line-oriented file format.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString {
    bits: Vec<u8>,
}

impl BitString {
    pub fn empty() -> Self {
        BitString { bits: Vec::new() }
    }

    pub fn from_bits(bits: &[u8]) -> Result<Self, ArithError> {
        if let Some(b) = bits.iter().find(|&&b| b > 1) {
            return Err(ArithError::Parse(format!("bit value {b} is not 0 or 1")));
        }
        Ok(BitString { bits: bits.to_vec() })
    }

    pub fn from_bools<I: IntoIterator<Item = bool>>(it: I) -> Self {
        BitString { bits: it.into_iter().map(u8::from).collect() }
    }

    pub fn repeat(bit: u8, n: usize) -> Self {
        debug_assert!(bit <= 1);
        BitString { bits: vec![bit & 1; n] }
    }

    pub fn zeros(n: usize) -> Self {
        Self::repeat(0, n)
    }

    pub fn ones(n: usize) -> Self {
        Self::repeat(1, n)
    }

    /// The `width`-bit big-endian encoding of `value`.
    pub fn from_u64(value: u64, width: usize) -> Self {
        let bits = (0..width)
            .map(|k| {
                let shift = width - 1 - k;
                if shift >= 64 {
                    0
                } else {
                    ((value >> shift) & 1) as u8
                }
            })
            .collect();
        BitString { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn get(&self, i: usize) -> Option<u8> {
        self.bits.get(i).copied()
    }

    pub fn last(&self) -> Option<u8> {
        self.bits.last().copied()
    }

    pub fn push(&mut self, bit: u8) {
        debug_assert!(bit <= 1);
        self.bits.push(bit & 1);
    }

    pub fn extend_from(&mut self, other: &BitString) {
        self.bits.extend_from_slice(&other.bits);
    }

    pub fn push_run(&mut self, bit: u8, n: usize) {
        self.bits.extend(std::iter::repeat_n(bit & 1, n));
    }

    pub fn truncate(&mut self, n: usize) {
        self.bits.truncate(n);
    }

    pub fn child(&self, bit: u8) -> BitString {
        let mut c = self.clone();
        c.push(bit);
        c
    }

    pub fn concat(&self, other: &BitString) -> BitString {
        let mut bits = Vec::with_capacity(self.len() + other.len());
        bits.extend_from_slice(&self.bits);
        bits.extend_from_slice(&other.bits);
        BitString { bits }
    }

    /// `self↾n`; saturates at the full string.
    pub fn prefix(&self, n: usize) -> BitString {
        BitString { bits: self.bits[..n.min(self.len())].to_vec() }
    }

    /// Bits `[from, to)`.
    pub fn slice(&self, from: usize, to: usize) -> BitString {
        BitString { bits: self.bits[from.min(self.len())..to.min(self.len())].to_vec() }
    }

    /// σ⁻, the string with its last bit removed. `None` for ε.
    pub fn parent(&self) -> Option<BitString> {
        if self.is_empty() {
            None
        } else {
            Some(self.prefix(self.len() - 1))
        }
    }

    /// `self ⪯ other`.
    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        self.len() <= other.len() && other.bits[..self.len()] == self.bits[..]
    }

    pub fn is_proper_prefix_of(&self, other: &BitString) -> bool {
        self.len() < other.len() && self.is_prefix_of(other)
    }

    pub fn comparable(&self, other: &BitString) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    /// All prefixes from ε up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.len()).map(move |k| self.prefix(k))
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().filter(|&&b| b == 1).count()
    }

    pub fn lex_cmp(&self, other: &BitString) -> Ordering {
        self.bits.cmp(&other.bits)
    }

    /// Position in the length-lex enumeration ε, 0, 1, 00, 01, … (`2^|σ| − 1 + bin(σ)`).
    pub fn length_lex_index(&self) -> Option<u64> {
        if self.len() >= 63 {
            return None;
        }
        let v = self.bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
        Some((1u64 << self.len()) - 1 + v)
    }

    pub fn from_length_lex_index(idx: u64) -> BitString {
        let m = idx + 1;
        let len = 63 - m.leading_zeros() as usize;
        BitString::from_u64(m - (1u64 << len), len)
    }

    /// Every string of length `n`, in lexicographic order.
    pub fn all_of_length(n: usize) -> impl Iterator<Item = BitString> {
        assert!(n < 63, "length {n} too large to enumerate");
        (0..(1u64 << n)).map(move |v| BitString::from_u64(v, n))
    }

    /// Every string of length at most `n`, in length-lex order.
    pub fn all_up_to(n: usize) -> impl Iterator<Item = BitString> {
        (0..=n).flat_map(BitString::all_of_length)
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.bits.cmp(&other.bits))
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.bits.is_empty() {
            return f.write_str("-");
        }
        let s: String = self.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\"{self}\"")
    }
}

impl FromStr for BitString {
    type Err = ArithError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s == "-" || s.is_empty() {
            return Ok(BitString::empty());
        }
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return Err(ArithError::Parse(format!("bad bit {c:?} in {s:?}"))),
            }
        }
        Ok(BitString { bits })
    }
}

/// Shorthand for literals in tests and examples. Panics on malformed input.
pub fn bs(s: &str) -> BitString {
    s.parse().expect("valid bit string literal")
}
