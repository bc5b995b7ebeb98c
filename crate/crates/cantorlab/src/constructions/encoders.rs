use num_bigint::BigUint;

use super::{ConstructionError, StepPcf};
use crate::arith::BitString;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKind {
    OnesRun,
    Separator,
    Payload,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub kind: BlockKind,
    /// Index `n` of the block `1^{g_n} 0 τ_n` this piece belongs to.
    pub index: usize,
    pub start: usize,
    pub len: usize,
}

/// Output of the Γ and Ξ encoders: `1^{g_0} 0 τ_0 1^{g_1} 0 τ_1 …` with
/// `τ_n` consecutive slices of the source.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockEncoding {
    /// The part of `Z` consumed by the payloads.
    pub source: BitString,
    pub output: BitString,
    pub blocks: Vec<Block>,
    pub g: Vec<u64>,
    /// Payload lengths as given by the defining formula (1 for Γ, `j_n` for Ξ).
    pub tau_len: Vec<u64>,
    /// Bits of `Z` consumed through block `n`.
    pub payload_total: Vec<u64>,
    /// End of block `n` in the output: `ℓ(Z, n)` for Γ, `k_n` for Ξ.
    pub ell: Vec<u64>,
}

impl BlockEncoding {
    fn from_tables(z: &BitString, g: Vec<u64>, tau_len: Vec<u64>) -> Result<Self, ConstructionError> {
        let needed: u64 = tau_len.iter().sum();
        if (z.len() as u64) < needed {
            return Err(ConstructionError::SourceTooShort { needed: needed as usize, len: z.len() });
        }
        let mut out = BitString::empty();
        let mut blocks = Vec::new();
        let mut payload_total = Vec::new();
        let mut ell = Vec::new();
        let mut consumed = 0usize;
        for (n, (&gn, &tn)) in g.iter().zip(&tau_len).enumerate() {
            let mut piece = |kind, len: usize, out: &mut BitString| {
                blocks.push(Block { kind, index: n, start: out.len(), len });
            };
            piece(BlockKind::OnesRun, gn as usize, &mut out);
            out.push_run(1, gn as usize);
            piece(BlockKind::Separator, 1, &mut out);
            out.push(0);
            piece(BlockKind::Payload, tn as usize, &mut out);
            out.extend_from(&z.slice(consumed, consumed + tn as usize));
            consumed += tn as usize;
            payload_total.push(consumed as u64);
            ell.push(out.len() as u64);
        }
        Ok(BlockEncoding { source: z.prefix(consumed), output: out, blocks, g, tau_len, payload_total, ell })
    }

    /// Rebuilds the output from the `g` and `τ` tables alone.
    pub fn rederive(&self) -> BitString {
        let mut out = BitString::empty();
        let mut at = 0usize;
        for (&gn, &tn) in self.g.iter().zip(&self.tau_len) {
            out.push_run(1, gn as usize);
            out.push(0);
            out.extend_from(&self.source.slice(at.min(self.source.len()), (at + tn as usize).min(self.source.len())));
            at += tn as usize;
        }
        out
    }

    /// `|σ_n|` from the block list, where `σ_n` ends at the separator of block `n`.
    pub fn sigma_len(&self, n: usize) -> Option<u64> {
        self.blocks
            .iter()
            .find(|b| b.index == n && b.kind == BlockKind::Separator)
            .map(|b| (b.start + 1) as u64)
    }
}

/// `γ_n = 1^{g(n)} 0 z_n` for `n < n_blocks`.
pub fn gamma_encode(z: &BitString, g: &dyn Fn(u64) -> u64, n_blocks: usize) -> Result<BlockEncoding, ConstructionError> {
    let gs = (0..n_blocks as u64).map(g).collect();
    BlockEncoding::from_tables(z, gs, vec![1; n_blocks])
}

/// Source bits of the complete `γ` blocks in `y`.
pub fn gamma_decode(y: &BitString) -> BitString {
    let mut z = BitString::empty();
    let mut at = 0;
    loop {
        while y.get(at) == Some(1) {
            at += 1;
        }
        match (y.get(at), y.get(at + 1)) {
            (Some(0), Some(b)) => z.push(b),
            _ => return z,
        }
        at += 2;
    }
}

/// `ξ_n = 1^{g_n} 0 τ_n` with `g_0 = f(0)`, `g_{n+1} = f(|τ_n|)` and
/// `|τ_n| = j_n = Σ_{i≤n} 2^{n−i}(g_i + 1)`, where `f(m)` is the halting time
/// of `φ_index(m)`.
pub fn xi_encode_ioc(
    z: &BitString,
    p: &dyn StepPcf,
    index: u64,
    n_blocks: usize,
    budget: u64,
) -> Result<BlockEncoding, ConstructionError> {
    let f = |m: u64| {
        p.halting_time(index, m, budget)
            .ok_or_else(|| ConstructionError::Budget(format!("φ_{index}({m}) does not halt within {budget} steps")))
    };
    let mut g = Vec::with_capacity(n_blocks);
    let mut tau = Vec::with_capacity(n_blocks);
    for n in 0..n_blocks {
        let gn = if n == 0 { f(0)? } else { f(tau[n - 1])? };
        g.push(gn);
        let j = tau.last().map_or(0, |t| 2 * t) + gn + 1;
        if j > 1 << 40 {
            return Err(ConstructionError::Budget(format!("payload {n} would have length {j}")));
        }
        tau.push(j);
    }
    BlockEncoding::from_tables(z, g, tau)
}

/// Source bits of the complete `ξ` blocks in `y`; each payload is as long as
/// everything before it.
pub fn xi_decode_ioc(y: &BitString) -> BitString {
    let mut z = BitString::empty();
    let mut at = 0;
    loop {
        while y.get(at) == Some(1) {
            at += 1;
        }
        if y.get(at) != Some(0) {
            return z;
        }
        at += 1;
        let end = 2 * at;
        if end > y.len() {
            return z;
        }
        z.extend_from(&y.slice(at, end));
        at = end;
    }
}

/// `|τ_k| = |σ_k|` for all `k ≤ big_k`, comparing the `τ` table with `σ`
/// lengths read off the block list. The error is the first failing `k`.
pub fn claim_sigma_tau_check(enc: &BlockEncoding, big_k: usize) -> Result<(), usize> {
    for k in 0..=big_k {
        match (enc.tau_len.get(k), enc.sigma_len(k)) {
            (Some(&t), Some(s)) if t == s => {}
            _ => return Err(k),
        }
    }
    Ok(())
}

/// Consumed source length through block `n` is at least half of `k_n`.
pub fn halfweight_check(enc: &BlockEncoding, n: usize) -> bool {
    match (enc.payload_total.get(n), enc.ell.get(n)) {
        (Some(&j), Some(&k)) => 2 * j >= k,
        _ => false,
    }
}

/// All `n ≤ big_n` with `ℓ(g(n)) < h(g(n+1))`.
pub fn lemma_orders_check(
    g: &dyn Fn(u64) -> BigUint,
    ell: &dyn Fn(&BigUint) -> BigUint,
    h: &dyn Fn(&BigUint) -> BigUint,
    big_n: u64,
) -> Vec<u64> {
    (0..=big_n).filter(|&n| ell(&g(n)) < h(&g(n + 1))).collect()
}
