use std::sync::{Arc, Mutex};

use super::{mass_below_pow2, MeasureError, MeasureOracle, MeasureTree, SharedOracle};
use crate::arith::{BitString, Dyadic};
use crate::orders::{Order, OrderError};

/// `g_μ(n)`: the least `ℓ ≤ depth` with `μ(σ) < 2^{-n}` for every `σ ∈ 2^ℓ`.
pub fn granularity_exact(t: &MeasureTree, n: u64) -> Result<u64, MeasureError> {
    let bound = Dyadic::pow2_neg(n);
    for level in 0..=t.depth() {
        if t.level(level).all(|(_, v)| *v < bound) {
            return Ok(level as u64);
        }
    }
    Err(MeasureError::NotFound(t.depth()))
}

/// `g_μ(n)` for an oracle-backed measure, exploring only strings of mass
/// at least `2^{-n}` (a subtree, since mass shrinks along paths).
pub fn granularity_exact_oracle<O: MeasureOracle + ?Sized>(o: &O, n: u64, max_depth: usize) -> Result<u64, MeasureError> {
    let mut deepest = 0usize;
    let mut stack = vec![BitString::empty()];
    let mut heavy_root = false;
    while let Some(s) = stack.pop() {
        if mass_below_pow2(o, &s, n)? {
            continue;
        }
        if s.is_empty() {
            heavy_root = true;
        }
        if s.len() >= max_depth {
            return Err(MeasureError::NotFound(max_depth));
        }
        deepest = deepest.max(s.len());
        stack.push(s.child(1));
        stack.push(s.child(0));
    }
    Ok(if heavy_root { deepest as u64 + 1 } else { 0 })
}

/// The pair found by the sandwich search, with its position in the pairing order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SandwichWitness {
    pub k: u64,
    pub s: u64,
    pub code: u64,
}

/// Cantor pairing, decoded: diagonal `d = k + s`, and within it `s` runs upward.
fn unpair(code: u64) -> (u64, u64) {
    let mut d = ((((8 * code as u128 + 1) as f64).sqrt() as u64).saturating_sub(1)) / 2;
    while (d + 1) * (d + 2) / 2 <= code {
        d += 1;
    }
    while d * (d + 1) / 2 > code {
        d -= 1;
    }
    let s = code - d * (d + 1) / 2;
    (d - s, s)
}

/// Searches pairs `⟨k, s⟩` in code order `0..=budget` for the first with
/// `(∀σ ∈ 2^k) μ_s(σ) + 2^{-s} < 2^{-n}` and `(∃τ ∈ 2^k) μ_s(τ) − 2^{-s} > 2^{-(n+2)}`,
/// where `μ_s` is the oracle at precision `s`.
pub fn granularity_sandwich_witness<O: MeasureOracle + ?Sized>(
    o: &O,
    n: u64,
    budget: u64,
) -> Result<SandwichWitness, MeasureError> {
    let bound = Dyadic::pow2_neg(n);
    let low = Dyadic::pow2_neg(n + 2);
    for code in 0..=budget {
        let (k, s) = unpair(code);
        // 2^{-s} < 2^{-n} is needed for the first condition.
        if s <= n {
            continue;
        }
        let eps = Dyadic::pow2_neg(s);
        if all_level_below(o, k as usize, s, &bound, &eps)? && some_level_above(o, k as usize, s, &low, &eps)? {
            return Ok(SandwichWitness { k, s, code });
        }
    }
    Err(MeasureError::Budget(format!(
        "no pair <k,s> with code <= {budget} brackets the granularity at n = {n}"
    )))
}

/// `f(n)` from the sandwich search; satisfies `g_μ(n) ≤ f(n) < g_μ(n+2)`.
pub fn granularity_sandwich<O: MeasureOracle + ?Sized>(o: &O, n: u64, budget: u64) -> Result<u64, MeasureError> {
    Ok(granularity_sandwich_witness(o, n, budget)?.k)
}

fn all_level_below<O: MeasureOracle + ?Sized>(
    o: &O,
    k: usize,
    s: u64,
    bound: &Dyadic,
    eps: &Dyadic,
) -> Result<bool, MeasureError> {
    let three_eps = eps.scale_pow2(1) + eps.clone();
    let mut stack = vec![BitString::empty()];
    while let Some(rho) = stack.pop() {
        let a = o.approx(&rho, s)?;
        if rho.len() == k {
            if &a + eps >= *bound {
                return Ok(false);
            }
            continue;
        }
        // Every descendant's approximation is at most a + 2·2^{-s}.
        if &a + &three_eps < *bound {
            continue;
        }
        stack.push(rho.child(1));
        stack.push(rho.child(0));
    }
    Ok(true)
}

fn some_level_above<O: MeasureOracle + ?Sized>(
    o: &O,
    k: usize,
    s: u64,
    low: &Dyadic,
    eps: &Dyadic,
) -> Result<bool, MeasureError> {
    let mut stack = vec![BitString::empty()];
    while let Some(rho) = stack.pop() {
        let a = o.approx(&rho, s)?;
        if rho.len() == k {
            if &a - eps > *low {
                return Ok(true);
            }
            continue;
        }
        if &a + eps <= *low {
            continue;
        }
        stack.push(rho.child(1));
        stack.push(rho.child(0));
    }
    Ok(false)
}

/// `g_μ^X(n) = min{k : μ(X↾k) < 2^{-n}}` along the given prefix of `X`.
pub fn local_granularity<O: MeasureOracle + ?Sized>(o: &O, x: &BitString, n: u64) -> Result<u64, MeasureError> {
    for k in 0..=x.len() {
        if mass_below_pow2(o, &x.prefix(k), n)? {
            return Ok(k as u64);
        }
    }
    Err(MeasureError::PrefixTooShort(x.len()))
}

/// `f(n + d) ≥ g_μ^X(n)` for every `n ≤ N`.
pub fn local_granularity_bound_check<O: MeasureOracle + ?Sized>(
    o: &O,
    x: &BitString,
    f: &Order,
    d: u64,
    big_n: u64,
) -> Result<bool, MeasureError> {
    for n in 0..=big_n {
        let g = local_granularity(o, x, n)?;
        let fv = f.eval(n + d).map_err(|e| MeasureError::Invalid(e.to_string()))?;
        if fv < g {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `h = f̂^{-1}`, where `f̂(n) = max_{m ≤ n} f(m)` and `f` is the sandwich
/// search. Taking the running maximum keeps `g_μ(n) ≤ f̂(n) < g_μ(n+2)` and
/// makes `f̂` non-decreasing, so `g_μ^{-1}(n) − 2 ≤ h(n) ≤ g_μ^{-1}(n)`.
///
/// `f(0)` is computed eagerly so an atomic measure fails here rather than on
/// first use.
pub fn global_complexity_bound(o: SharedOracle, budget: u64) -> Result<Order, MeasureError> {
    let first = granularity_sandwich(&*o, 0, budget)?;
    let cache = Arc::new(Mutex::new(vec![first]));
    let f_hat = Order::new_unanchored(
        "sandwich-granularity",
        move |n| {
            let mut c = cache.lock().expect("granularity cache poisoned");
            while c.len() as u64 <= n {
                let m = c.len() as u64;
                let v = granularity_sandwich(&*o, m, budget).map_err(OrderError::from)?;
                let prev = *c.last().expect("cache seeded");
                c.push(v.max(prev));
            }
            Ok(c[n as usize])
        },
        // g_μ(n) ≥ n + 1 for every measure, hence f̂(n) ≥ n.
        Ok,
    );
    Ok(f_hat.inverse())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::bs;
    use crate::measures::{FnOracle, Lebesgue, PointMass};

    #[test]
    fn unpair_enumerates_diagonals() {
        let pairs: Vec<_> = (0..6).map(unpair).collect();
        assert_eq!(pairs, vec![(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]);
        for code in 0..5000u64 {
            let (k, s) = unpair(code);
            let d = k + s;
            assert_eq!(d * (d + 1) / 2 + s, code);
        }
    }

    #[test]
    fn lebesgue_exact_granularity() {
        let t = MeasureTree::lebesgue(10);
        assert_eq!(granularity_exact(&t, 5).unwrap(), 6);
        assert_eq!(granularity_exact(&t, 0).unwrap(), 1);
        assert_eq!(granularity_exact_oracle(&Lebesgue, 5, 30).unwrap(), 6);
        assert!(matches!(granularity_exact(&t, 10), Err(MeasureError::NotFound(10))));
    }

    #[test]
    fn point_mass_has_no_granularity() {
        let t = MeasureTree::point_mass_zeros(&bs("-"), 12);
        for n in 1..5 {
            assert!(matches!(granularity_exact(&t, n), Err(MeasureError::NotFound(_))));
        }
        assert!(matches!(
            granularity_sandwich(&PointMass::zeros(), 1, 10_000),
            Err(MeasureError::Budget(_))
        ));
    }

    #[test]
    fn lebesgue_sandwich_brackets() {
        let f5 = granularity_sandwich(&Lebesgue, 5, 10_000).unwrap();
        assert!(f5 == 6 || f5 == 7);
        for n in 0..=10 {
            let f = granularity_sandwich(&Lebesgue, n, 100_000).unwrap();
            assert!(n + 1 <= f && f < n + 3, "n={n} f={f}");
        }
    }

    #[test]
    fn local_granularity_examples() {
        assert_eq!(local_granularity(&Lebesgue, &bs("0110110011"), 4).unwrap(), 5);
        let steep = FnOracle::new(|s: &BitString| {
            // Mass 2^{-2k} along 0^ω, remainder spread uniformly off the path.
            let k = s.bits().iter().position(|&b| b == 1);
            Ok(match k {
                None => Dyadic::pow2_neg(2 * s.len() as u64),
                Some(j) => {
                    let off = &Dyadic::pow2_neg(2 * j as u64) - &Dyadic::pow2_neg(2 * j as u64 + 2);
                    off.scale_pow2(-((s.len() - j - 1) as i64))
                }
            })
        });
        let t = MeasureTree::from_oracle(&steep, 8, crate::measures::ExtensionRule::Error).unwrap();
        t.validate().unwrap();
        assert_eq!(local_granularity(&steep, &BitString::zeros(20), 6).unwrap(), 4);
        assert!(matches!(
            local_granularity(&PointMass::zeros(), &BitString::zeros(50), 1),
            Err(MeasureError::PrefixTooShort(50))
        ));
    }

    #[test]
    fn bound_check_examples() {
        let x = bs("0110100110010110");
        let plus1 = Order::linear_unanchored(1, 1).unwrap();
        assert!(local_granularity_bound_check(&Lebesgue, &x, &plus1, 0, 10).unwrap());
        assert!(local_granularity_bound_check(&Lebesgue, &x, &Order::identity(), 1, 10).unwrap());
        let half = Order::from_fn("half", |n| Ok(n / 2)).unwrap();
        assert!(!local_granularity_bound_check(&Lebesgue, &x, &half, 0, 10).unwrap());
    }

    #[test]
    fn global_bound_for_lebesgue() {
        let h = global_complexity_bound(Arc::new(Lebesgue), 100_000).unwrap();
        for n in 0..=12u64 {
            let gi = n.saturating_sub(1);
            let v = h.eval(n).unwrap();
            assert!(gi.saturating_sub(2) <= v && v <= gi, "n={n} h={v}");
        }
        assert!(global_complexity_bound(Arc::new(PointMass::zeros()), 2_000).is_err());
    }
}
