use std::sync::Arc;

use num_traits::Zero;

use super::{MeasureError, MeasureOracle, MeasureTree, SharedOracle};
use crate::arith::{BitString, Dyadic};

/// A decidable set of strings, expected to be closed under prefixes.
pub type TreePredicate = Arc<dyn Fn(&BitString) -> bool + Send + Sync>;

/// The measure `ν` that agrees with `μ` on `T` and one level beyond it, and
/// splits mass evenly everywhere further out.
#[derive(Clone)]
pub struct AtomsRemoved {
    mu: SharedOracle,
    tree: TreePredicate,
}

impl AtomsRemoved {
    pub fn new(mu: SharedOracle, tree: TreePredicate) -> Result<Self, MeasureError> {
        if !tree(&BitString::empty()) {
            return Err(MeasureError::NotDownwardClosed(BitString::empty()));
        }
        Ok(AtomsRemoved { mu, tree })
    }

    /// Length of the longest prefix of `σ` in `T`, after checking that the
    /// prefixes of `σ` in `T` form an initial run.
    fn tree_depth_along(&self, sigma: &BitString) -> Result<usize, MeasureError> {
        let mut exit: Option<usize> = None;
        for k in 0..=sigma.len() {
            let inside = (self.tree)(&sigma.prefix(k));
            match (inside, exit) {
                (true, Some(_)) => return Err(MeasureError::NotDownwardClosed(sigma.prefix(k))),
                (false, None) if k == 0 => return Err(MeasureError::NotDownwardClosed(BitString::empty())),
                (false, None) => exit = Some(k - 1),
                _ => {}
            }
        }
        Ok(exit.unwrap_or(sigma.len()))
    }
}

impl MeasureOracle for AtomsRemoved {
    fn approx(&self, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError> {
        let p = self.tree_depth_along(sigma)?;
        if sigma.len() <= p + 1 {
            return self.mu.approx(sigma, precision);
        }
        let halvings = (sigma.len() - p - 1) as u64;
        let a = self.mu.approx(&sigma.prefix(p + 1), precision.saturating_sub(halvings))?;
        Ok(a.scale_pow2(-(halvings as i64)))
    }

    fn is_exact(&self) -> bool {
        self.mu.is_exact()
    }
}

/// `ν(σ)`: `μ(σ)` when `σ ∈ T` or `σ⁻ ∈ T`, and `½ν(σ⁻)` otherwise.
pub fn remove_atoms(mu: SharedOracle, tree: TreePredicate, sigma: &BitString, precision: u64) -> Result<Dyadic, MeasureError> {
    AtomsRemoved::new(mu, tree)?.approx(sigma, precision)
}

/// Exhaustive check that `T` contains ε and is closed under prefixes up to `depth`.
pub fn validate_tree_predicate(tree: &TreePredicate, depth: usize) -> Result<(), MeasureError> {
    if !tree(&BitString::empty()) {
        return Err(MeasureError::NotDownwardClosed(BitString::empty()));
    }
    for s in BitString::all_up_to(depth).skip(1) {
        if tree(&s) && !tree(&s.parent().expect("non-empty")) {
            return Err(MeasureError::NotDownwardClosed(s));
        }
    }
    Ok(())
}

/// Heuristic lower bound on atom mass: the total over depth-`D` strings with
/// mass at least `threshold` whose mass has not changed since level `⌈D/2⌉`.
pub fn triviality_mass(t: &MeasureTree, atom_threshold: &Dyadic) -> (Dyadic, Vec<BitString>) {
    let d = t.depth();
    let half = d.div_ceil(2);
    let mut lower = Dyadic::zero();
    let mut candidates = Vec::new();
    for (s, v) in t.level(d) {
        if v >= atom_threshold && t.stored(&s.prefix(half)) == *v {
            lower = &lower + v;
            candidates.push(s.clone());
        }
    }
    (lower, candidates)
}
