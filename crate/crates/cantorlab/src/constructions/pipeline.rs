use std::sync::Arc;

use super::{ConstructionError, FiniteTree, Step, StepPcf};
use crate::arith::BitString;

type Membership = Arc<dyn Fn(&BitString, u64) -> bool + Send + Sync>;

/// Stage approximations `T_s` of a tree, as a membership test `σ ∈ T_s`.
#[derive(Clone)]
pub struct TreeStages {
    member: Membership,
}

impl TreeStages {
    pub fn from_fn<F: Fn(&BitString, u64) -> bool + Send + Sync + 'static>(f: F) -> Self {
        TreeStages { member: Arc::new(f) }
    }

    /// `T_s` is everything at every stage.
    pub fn full() -> Self {
        TreeStages::from_fn(|_, _| true)
    }

    /// `σ` enters at the given stage and stays; `None` never enters.
    pub fn entry<F: Fn(&BitString) -> Option<u64> + Send + Sync + 'static>(f: F) -> Self {
        TreeStages::from_fn(move |s, t| f(s).is_some_and(|e| e <= t))
    }

    pub fn contains(&self, sigma: &BitString, stage: u64) -> bool {
        (self.member)(sigma, stage)
    }

    /// `f(σ)`: least `s ≤ limit` with every prefix of `σ` in `T_s`.
    pub fn f(&self, sigma: &BitString, limit: u64) -> Option<u64> {
        (0..=limit).find(|&s| sigma.prefixes().all(|p| self.contains(&p, s)))
    }
}

/// `z_0 1^{f(Z↾1)} 0 z_1 1^{f(Z↾2)} 0 z_2 …`, cut at `n_bits`. When some
/// `f(Z↾n)` exceeds what fits, the output ends in 1s up to `n_bits`.
pub fn xi_encode_dim(z: &BitString, stages: &TreeStages, n_bits: usize) -> BitString {
    let mut out = BitString::empty();
    if z.is_empty() || n_bits == 0 {
        return out;
    }
    out.push(z.bit(0));
    for n in 1..z.len() {
        let room = n_bits.saturating_sub(out.len());
        match stages.f(&z.prefix(n), room as u64) {
            Some(r) => {
                out.push_run(1, r as usize);
                out.push(0);
                out.push(z.bit(n));
            }
            None => {
                out.push_run(1, room);
                break;
            }
        }
        if out.len() >= n_bits {
            break;
        }
    }
    out.truncate(n_bits);
    out
}

/// Membership in the tree of prefixes of the encoder's image. A run of `r`
/// ones after `Z↾n` is allowed while `f(Z↾n) < r` is false, and the 0 that
/// closes it needs `f(Z↾n) = r`; both are decided from stages `≤ r`.
pub fn xi_dim_tree(stages: TreeStages) -> impl Fn(&BitString) -> bool + Send + Sync + Clone {
    move |y: &BitString| {
        if y.is_empty() {
            return true;
        }
        let mut z = BitString::from_bools([y.bit(0) == 1]);
        let mut at = 1;
        loop {
            let mut r = 0;
            while y.get(at) == Some(1) {
                at += 1;
                r += 1;
            }
            if at == y.len() {
                return r == 0 || stages.f(&z, r - 1).is_none();
            }
            if stages.f(&z, r) != Some(r) {
                return false;
            }
            at += 1;
            match y.get(at) {
                Some(b) => z.push(b),
                None => return true,
            }
            at += 1;
        }
    }
}

/// How the output of [`lambda_decode`] ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tail {
    /// `Y↾s` left the tree; the rest is `b_{j−1}` from `from` on.
    Fill { from: usize, bit: u8 },
    /// The budget ran out while waiting for a coding location or a
    /// convergence; the output is `b_{j−1}` from `from` on.
    Waiting { from: usize, bit: u8 },
    /// The budget ran out inside a block appended on convergence.
    Block,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaOutput {
    pub bits: BitString,
    /// `|λ_{−1}|, |λ_0|, |λ_1|, …` as emitted.
    pub lambda_lens: Vec<u64>,
    /// Exponents `Σ_{ℓ<j}|λ_ℓ| + k_j` of the blocks appended on convergence.
    pub exponents: Vec<u64>,
    /// The coded bits `b_0, b_1, …` that were read.
    pub coded: Vec<u8>,
    pub tail: Tail,
}

/// Positions of `b_0, b_1, …` in `y`: `b_0` first, then one after each
/// `1^t 0` separator.
fn coding_locations(y: &BitString) -> Vec<usize> {
    let mut out = Vec::new();
    if y.is_empty() {
        return out;
    }
    out.push(0);
    let mut at = 1;
    loop {
        while y.get(at) == Some(1) {
            at += 1;
        }
        if y.get(at) != Some(0) || at + 1 >= y.len() {
            return out;
        }
        out.push(at + 1);
        at += 2;
    }
}

/// The block decoder run until `budget` output bits exist.
///
/// Line 6's infinite loop becomes a fill of the remaining budget. The
/// guard on `φ(j)` runs `φ_index(j)` for `m_{k_j}` steps; the functional
/// ignores the oracle bits.
pub fn lambda_decode(
    y: &BitString,
    s_tree: &dyn Fn(&BitString) -> bool,
    p: &dyn StepPcf,
    index: u64,
    budget: usize,
) -> Result<LambdaOutput, ConstructionError> {
    let locs = coding_locations(y);
    if locs.is_empty() {
        return Err(ConstructionError::InputExhausted(0));
    }
    let b = |k: usize| y.bit(locs[k]);
    let mut out = BitString::empty();
    let mut lens = vec![0u64];
    let mut exponents = Vec::new();
    let mut j = 0usize;
    let mut k = 1usize;
    let mut s = 0usize;
    let mut waiting_from = 0usize;
    let mut tail = Tail::Block;
    while out.len() < budget {
        let prev = b(j.saturating_sub(1));
        if s > y.len() {
            return Err(ConstructionError::InputExhausted(y.len()));
        }
        if !s_tree(&y.prefix(s)) {
            tail = Tail::Fill { from: out.len(), bit: prev };
            let room = budget - out.len();
            out.push_run(prev, room);
            lens[j] += room as u64;
            break;
        }
        if k > y.len() {
            return Err(ConstructionError::InputExhausted(y.len()));
        }
        let contains = locs.get(j).is_some_and(|&pj| pj < k);
        let converged = contains && {
            let m = locs.iter().take_while(|&&pl| pl < k).count() - 1;
            matches!(p.eval(index, j as u64, m as u64), Step::Halted(_))
        };
        if !converged {
            out.push(prev);
            lens[j] += 1;
            k += 1;
            tail = Tail::Waiting { from: waiting_from, bit: prev };
        } else {
            let e = lens[1..].iter().sum::<u64>() + k as u64;
            let room = (budget - out.len()) as u64;
            out.push_run(b(j), e.min(room) as usize);
            lens.push(e.min(room));
            exponents.push(e);
            j += 1;
            k = 1;
            waiting_from = out.len();
            tail = Tail::Block;
        }
        s += 1;
    }
    let coded = locs.iter().take(j.max(1)).map(|&l| y.bit(l)).collect();
    Ok(LambdaOutput { bits: out, lambda_lens: lens, exponents, coded, tail })
}

/// Outputs `Λ(Ξ(Z))↾depth` over all `Z` of length `z_len`.
pub fn pipeline_tree(
    stages: &TreeStages,
    p: &dyn StepPcf,
    index: u64,
    z_len: usize,
    y_bits: usize,
    depth: usize,
) -> Result<FiniteTree, ConstructionError> {
    let s_tree = xi_dim_tree(stages.clone());
    let mut leaves = Vec::new();
    for z in BitString::all_of_length(z_len) {
        let y = xi_encode_dim(&z, stages, y_bits);
        leaves.push(lambda_decode(&y, &s_tree, p, index, depth)?.bits);
    }
    Ok(FiniteTree::from_nodes(depth, leaves))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::bs;
    use crate::constructions::Schedule;

    fn avoid_111() -> TreeStages {
        TreeStages::entry(|s| {
            let t = s.to_string();
            if t.contains("111") {
                None
            } else {
                Some(1)
            }
        })
    }

    #[test]
    fn encoder_examples() {
        assert_eq!(xi_encode_dim(&bs("0110"), &TreeStages::full(), 20), bs("0010100"));
        assert_eq!(xi_encode_dim(&bs("0110"), &avoid_111(), 9), bs("010110110"));
        assert_eq!(xi_encode_dim(&bs("01110"), &avoid_111(), 14), bs("01011011011111"));
        assert_eq!(xi_encode_dim(&bs("0110"), &TreeStages::full(), 4), bs("0010"));
        assert_eq!(xi_encode_dim(&BitString::empty(), &TreeStages::full(), 4), BitString::empty());
    }

    #[test]
    fn image_tree_matches_encoder_prefixes() {
        // Brute force: the prefixes of encodings of long sources.
        for stages in [TreeStages::full(), avoid_111()] {
            let s = xi_dim_tree(stages.clone());
            let mut image = std::collections::BTreeSet::new();
            for z in BitString::all_of_length(12) {
                let y = xi_encode_dim(&z, &stages, 60);
                for n in 0..=10 {
                    image.insert(y.prefix(n));
                }
            }
            for y in BitString::all_up_to(10) {
                assert_eq!(s(&y), image.contains(&y), "{y}");
            }
        }
    }

    fn linear1() -> Schedule {
        Schedule::parse("sched:linear").unwrap()
    }

    #[test]
    fn case_one_fills_after_leaving_the_tree() {
        let stages = TreeStages::entry(|s| if s.is_empty() { Some(0) } else { Some(1) });
        let s = xi_dim_tree(stages);
        let y = bs("0110101010");
        assert!(s(&y.prefix(2)) && !s(&y.prefix(3)));
        let out = lambda_decode(&y, &s, &linear1(), 1, 16).unwrap();
        assert_eq!(out.tail, Tail::Fill { from: 3, bit: 0 });
        assert_eq!(out.bits, BitString::zeros(16));
    }

    #[test]
    fn case_two_waits_forever() {
        let stages = avoid_111();
        let s = xi_dim_tree(stages.clone());
        let y = xi_encode_dim(&bs("1011100"), &stages, 80);
        let out = lambda_decode(&y, &s, &linear1(), 1, 40).unwrap();
        let Tail::Waiting { from, bit } = out.tail else { panic!("{:?}", out.tail) };
        assert!(out.bits.slice(from, 40).bits().iter().all(|&x| x == bit));
    }

    #[test]
    fn case_three_blocks() {
        let fast = Schedule::parse("sched:linear;never=;indices=2").unwrap();
        let z = BitString::from_bools((0..40).map(|i| (i * 7) % 5 < 2));
        let y = xi_encode_dim(&z, &TreeStages::full(), 200);
        let s = xi_dim_tree(TreeStages::full());
        let out = lambda_decode(&y, &s, &fast, 0, 120).unwrap();
        assert!(out.exponents.len() >= 2);
        assert!(out.exponents.windows(2).all(|w| w[0] <= w[1]));
        for (i, &e) in out.exponents.iter().enumerate() {
            for i2 in 0..=i as u64 {
                assert!(e >= fast.time(0, i2).unwrap());
            }
        }
        assert_eq!(out.coded, z.bits()[..out.coded.len()].to_vec());
        assert_eq!(out.bits.len(), 120);
        assert_eq!(out.lambda_lens.iter().sum::<u64>(), 120);
    }

    #[test]
    fn pipeline_tree_is_thin() {
        let t = pipeline_tree(&avoid_111(), &linear1(), 1, 10, 200, 24).unwrap();
        assert!(t.leaf_count() >= 2);
        for leaf in t.leaves() {
            // λ_{−1}λ_0 alone already covers the depth: every output is constant.
            assert!(leaf.bits().iter().all(|&b| b == leaf.bit(0)));
        }
    }

    #[test]
    fn short_input_is_an_error() {
        let s = xi_dim_tree(TreeStages::full());
        assert_eq!(
            lambda_decode(&bs("0000"), &s, &linear1(), 1, 40),
            Err(ConstructionError::InputExhausted(4))
        );
        assert!(lambda_decode(&BitString::empty(), &s, &linear1(), 1, 4).is_err());
    }
}
