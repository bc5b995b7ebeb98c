//! Seeded generators shared by the integration tests.
#![allow(dead_code)]

use cantorlab::functionals::{MonotonePairSet, PrefixMachineTable};
use cantorlab::measures::{ExtensionRule, MeasureTree};
use cantorlab::orders::Order;
use cantorlab::{BitString, Dyadic};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    rand::SeedableRng::seed_from_u64(seed)
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize) -> BitString {
    BitString::from_bools((0..n).map(|_| rng.gen_bool(0.5)))
}

/// Every node sends a fraction `r/64` to its 0-child, with `r` drawn from `ratios`.
pub fn split_tree(rng: &mut ChaCha8Rng, depth: usize, ratios: &[i64]) -> MeasureTree {
    let mut t = MeasureTree::new(depth, ExtensionRule::UniformSplit);
    t.set(BitString::empty(), Dyadic::from_int(1)).unwrap();
    let mut level = vec![(BitString::empty(), Dyadic::from_int(1))];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(level.len() * 2);
        for (s, m) in level {
            let r = *ratios.choose(rng).unwrap();
            let left = &m * &Dyadic::new(r.into(), 6);
            let right = &m - &left;
            t.set(s.child(0), left.clone()).unwrap();
            t.set(s.child(1), right.clone()).unwrap();
            next.push((s.child(0), left));
            next.push((s.child(1), right));
        }
        level = next;
    }
    t
}

/// Non-decreasing table with `g(0) = 0` that rises at least once in every
/// window of `c` steps, continued with slope 1.
fn staircase(rng: &mut ChaCha8Rng, len: usize, c: u64) -> Vec<u64> {
    let mut v = vec![0u64];
    let mut flat = 0;
    while v.len() < len {
        let mut step = rng.gen_range(0..=3);
        if flat + 1 >= c && step == 0 {
            step = 1;
        }
        flat = if step == 0 { flat + 1 } else { 0 };
        v.push(v[v.len() - 1] + step);
    }
    v
}

/// `(f, g, c)` with `g(n) ≤ f(n) < g(n + c)` everywhere.
pub fn sandwich_pair(rng: &mut ChaCha8Rng, len: usize) -> (Order, Order, u64) {
    let c = rng.gen_range(1..=3);
    let gv = staircase(rng, len, c);
    let g = Order::table(gv, 1).unwrap();
    let mut fv = vec![0u64];
    for n in 1..len as u64 {
        let lo = g.eval(n).unwrap();
        let hi = g.eval(n + c).unwrap() - 1;
        let r = rng.gen_range(lo..=hi);
        fv.push(r.max(fv[fv.len() - 1]));
    }
    (Order::table(fv, 1).unwrap(), g, c)
}

/// `(f, g, c)` with `f(n) ≤ g(n) + c` everywhere.
pub fn shift_pair(rng: &mut ChaCha8Rng, len: usize) -> (Order, Order, u64) {
    let c = rng.gen_range(0..=3);
    let gv = staircase(rng, len, 1);
    let mut fv = vec![0u64];
    for n in 1..len {
        let r = rng.gen_range(0..=gv[n] + c);
        fv.push(r.max(fv[n - 1]));
    }
    (Order::table(fv, 1).unwrap(), Order::table(gv, 1).unwrap(), c)
}

/// Consistent pair set: a random monotone labelling of the full tree to
/// `depth`, restricted to a random set of inputs.
pub fn monotone_pairs(rng: &mut ChaCha8Rng, depth: usize) -> MonotonePairSet {
    let root_len = rng.gen_range(0..2);
    let mut label = vec![(BitString::empty(), random_bits(rng, root_len))];
    let mut frontier = label.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for (s, o) in &frontier {
            for b in [0, 1] {
                let len = rng.gen_range(0..=2);
                let extra = random_bits(rng, len);
                next.push((s.child(b), o.concat(&extra)));
            }
        }
        label.extend(next.iter().cloned());
        frontier = next;
    }
    let keep = rng.gen_range(0.2..0.8);
    MonotonePairSet::from_pairs(1, label.into_iter().filter(|_| rng.gen_bool(keep)))
}

/// Prefix-free table: the leaves of a random split tree of height at most
/// `depth`, each kept with probability 0.7 and given a short output.
pub fn prefix_free_table(rng: &mut ChaCha8Rng, depth: usize) -> PrefixMachineTable {
    let mut t = PrefixMachineTable::new();
    let mut stack = vec![BitString::empty()];
    while let Some(s) = stack.pop() {
        if s.len() < depth && (s.is_empty() || rng.gen_bool(0.5)) {
            stack.push(s.child(0));
            stack.push(s.child(1));
        } else if rng.gen_bool(0.7) {
            let len = rng.gen_range(0..=3);
            let out = random_bits(rng, len);
            t.insert(s, out);
        }
    }
    t
}
