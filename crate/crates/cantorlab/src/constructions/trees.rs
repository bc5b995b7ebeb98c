use std::collections::{BTreeSet, HashMap};
use std::fmt;

use super::ConstructionError;
use crate::arith::BitString;
use crate::measures::MeasureTree;
use crate::orders::Order;

#[derive(Debug, Clone, PartialEq, Eq)]
enum Repr {
    Complete,
    Leaves(BTreeSet<BitString>),
}

/// A finite tree of height `depth`, kept as its extendible part: a node is
/// extendible when it has a descendant at level `depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteTree {
    depth: usize,
    repr: Repr,
}

impl FiniteTree {
    pub fn complete(depth: usize) -> Self {
        FiniteTree { depth, repr: Repr::Complete }
    }

    /// Nodes shorter than `depth` are dead ends and are dropped; longer
    /// nodes are cut to `depth`.
    pub fn from_nodes<I: IntoIterator<Item = BitString>>(depth: usize, nodes: I) -> Self {
        let leaves = nodes.into_iter().filter(|s| s.len() >= depth).map(|s| s.prefix(depth)).collect();
        FiniteTree { depth, repr: Repr::Leaves(leaves) }
    }

    pub fn single_path(path: &BitString) -> Self {
        FiniteTree::from_nodes(path.len(), [path.clone()])
    }

    /// Strings of positive mass.
    pub fn support(t: &MeasureTree) -> Self {
        let depth = t.depth();
        FiniteTree::from_nodes(depth, t.level(depth).filter(|(_, v)| v.is_positive()).map(|(s, _)| s.clone()))
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn leaves(&self) -> Vec<BitString> {
        match &self.repr {
            Repr::Complete => BitString::all_of_length(self.depth).collect(),
            Repr::Leaves(l) => l.iter().cloned().collect(),
        }
    }

    pub fn leaf_count(&self) -> u128 {
        match &self.repr {
            Repr::Complete => 1u128 << self.depth.min(127),
            Repr::Leaves(l) => l.len() as u128,
        }
    }

    pub fn is_extendible(&self, sigma: &BitString) -> bool {
        if sigma.len() > self.depth {
            return false;
        }
        match &self.repr {
            Repr::Complete => true,
            Repr::Leaves(l) => {
                // Leaves all have length `depth`; pad so the range starts in the cone.
                let mut lo = sigma.clone();
                lo.push_run(0, self.depth - sigma.len());
                l.range(lo..).next().is_some_and(|x| sigma.is_prefix_of(x))
            }
        }
    }

    /// Nodes comparable with `prefix`.
    pub fn restrict(&self, prefix: &BitString) -> Self {
        let leaves = match &self.repr {
            Repr::Complete => {
                let rest = self.depth.saturating_sub(prefix.len());
                BitString::all_of_length(rest).map(|t| prefix.concat(&t).prefix(self.depth)).collect()
            }
            Repr::Leaves(l) => l.iter().filter(|x| prefix.comparable(x)).cloned().collect(),
        };
        FiniteTree { depth: self.depth, repr: Repr::Leaves(leaves) }
    }

    /// The extendible part at a smaller height.
    pub fn truncate(&self, depth: usize) -> Self {
        match &self.repr {
            Repr::Complete => FiniteTree::complete(depth.min(self.depth)),
            Repr::Leaves(l) => FiniteTree::from_nodes(depth.min(self.depth), l.iter().cloned()),
        }
    }

    fn dag(&self) -> Dag {
        let mut dag = Dag::default();
        let root = match &self.repr {
            Repr::Complete => {
                let mut id = dag.intern(None, None);
                for _ in 0..self.depth {
                    id = dag.intern(Some(id), Some(id));
                }
                Some(id)
            }
            Repr::Leaves(l) => {
                let leaves: Vec<&BitString> = l.iter().collect();
                dag.build(&leaves, 0, self.depth)
            }
        };
        dag.root = root;
        dag
    }
}

/// Hash-consed extendible part: identical subtrees share one id.
#[derive(Default)]
struct Dag {
    nodes: Vec<[Option<usize>; 2]>,
    ids: HashMap<[Option<usize>; 2], usize>,
    root: Option<usize>,
}

impl Dag {
    fn intern(&mut self, c0: Option<usize>, c1: Option<usize>) -> usize {
        let key = [c0, c1];
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        self.nodes.push(key);
        self.ids.insert(key, self.nodes.len() - 1);
        self.nodes.len() - 1
    }

    /// `leaves` sorted, all sharing their first `level` bits.
    fn build(&mut self, leaves: &[&BitString], level: usize, depth: usize) -> Option<usize> {
        if leaves.is_empty() {
            return None;
        }
        if level == depth {
            return Some(self.intern(None, None));
        }
        let split = leaves.partition_point(|x| x.bit(level) == 0);
        let c0 = self.build(&leaves[..split], level + 1, depth);
        let c1 = self.build(&leaves[split..], level + 1, depth);
        Some(self.intern(c0, c1))
    }

    /// Nodes at relative depth `d` below `id`, capped at 2.
    fn count_at(&self, id: usize, d: u64, memo: &mut HashMap<(usize, u64), u8>) -> u8 {
        if d == 0 {
            return 1;
        }
        if let Some(&c) = memo.get(&(id, d)) {
            return c;
        }
        let c = self.nodes[id].iter().flatten().map(|&c| self.count_at(c, d - 1, memo)).sum::<u8>().min(2);
        memo.insert((id, d), c);
        c
    }

    /// Ids of the nodes at relative depth `d` below `id`.
    fn at_depth(&self, id: usize, d: u64, out: &mut BTreeSet<usize>) {
        let mut cur = BTreeSet::from([id]);
        for _ in 0..d {
            cur = cur.iter().flat_map(|&i| self.nodes[i].iter().flatten().copied()).collect();
        }
        out.extend(cur);
    }
}

/// `f(0), f(1), …` up to the first value past `depth`, checking strict growth.
fn levels(f: &Order, depth: usize) -> Result<Vec<u64>, ConstructionError> {
    let mut out = Vec::new();
    let mut n = 0u64;
    loop {
        let v = f.eval(n)?;
        if let Some(&prev) = out.last() {
            if v <= prev {
                return Err(ConstructionError::NotStrictlyIncreasing(n - 1));
            }
        }
        out.push(v);
        if v > depth as u64 {
            return Ok(out);
        }
        n += 1;
    }
}

/// Every extendible node at level `f(n)` has two extendible extensions at
/// level `f(n+1)`, for all `n` with `f(n+1) ≤ depth`.
pub fn perfectness_check(t: &FiniteTree, f: &Order, depth: usize) -> Result<bool, ConstructionError> {
    if depth > t.depth {
        return Err(ConstructionError::Depth(format!("check depth {depth} exceeds tree depth {}", t.depth)));
    }
    let lv = levels(f, depth)?;
    let dag = t.truncate(depth).dag();
    let Some(root) = dag.root else { return Ok(true) };
    let mut memo = HashMap::new();
    let mut current = BTreeSet::new();
    dag.at_depth(root, lv[0].min(depth as u64 + 1), &mut current);
    for w in lv.windows(2) {
        if w[1] > depth as u64 {
            break;
        }
        let d = w[1] - w[0];
        if current.iter().any(|&id| dag.count_at(id, d, &mut memo) < 2) {
            return Ok(false);
        }
        let mut next = BTreeSet::new();
        for &id in &current {
            dag.at_depth(id, d, &mut next);
        }
        current = next;
    }
    Ok(true)
}

/// Whether some pruning of `t` is `f`-perfect, by exact search: a node at
/// level `f(n)` is good when it has two good descendants at level `f(n+1)`,
/// or when `f(n+1)` is past the depth.
fn has_perfect_pruning(dag: &Dag, lv: &[u64], depth: usize) -> bool {
    struct Search<'a> {
        dag: &'a Dag,
        lv: &'a [u64],
        depth: u64,
        good: HashMap<(usize, usize), bool>,
        count: HashMap<(usize, u64, usize), u8>,
    }
    impl Search<'_> {
        fn good(&mut self, id: usize, n: usize) -> bool {
            if self.lv[n + 1] > self.depth {
                return true;
            }
            if let Some(&g) = self.good.get(&(id, n)) {
                return g;
            }
            let g = self.count(id, self.lv[n + 1] - self.lv[n], n + 1) == 2;
            self.good.insert((id, n), g);
            g
        }

        /// Good nodes for level index `m` at relative depth `d`, counted
        /// with multiplicity and capped at 2.
        fn count(&mut self, id: usize, d: u64, m: usize) -> u8 {
            if d == 0 {
                return self.good(id, m) as u8;
            }
            if let Some(&c) = self.count.get(&(id, d, m)) {
                return c;
            }
            let [c0, c1] = self.dag.nodes[id];
            let mut c = 0;
            for child in [c0, c1].into_iter().flatten() {
                c = (c + self.count(child, d - 1, m)).min(2);
            }
            self.count.insert((id, d, m), c);
            c
        }
    }
    let Some(root) = dag.root else { return false };
    if lv[0] > depth as u64 {
        return true;
    }
    let mut start = BTreeSet::new();
    dag.at_depth(root, lv[0], &mut start);
    let mut search = Search { dag, lv, depth: depth as u64, good: HashMap::new(), count: HashMap::new() };
    start.into_iter().any(|id| search.good(id, 0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiminutiveReport {
    pub depth: usize,
    /// Order name and whether an `f`-perfect pruning exists.
    pub results: Vec<(String, bool)>,
}

impl DiminutiveReport {
    pub fn none_found(&self) -> bool {
        self.results.iter().all(|(_, found)| !found)
    }
}

impl fmt::Display for DiminutiveReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, found) in &self.results {
            let word = if *found { "found" } else { "none" };
            writeln!(f, "order={name} depth={} perfect_subtree={word}", self.depth)?;
        }
        if self.none_found() {
            writeln!(f, "verdict: no f-perfect subtree found in family")
        } else {
            writeln!(f, "verdict: f-perfect subtree found for some f in family")
        }
    }
}

/// Searches each order of the family for a perfect pruning of `t`.
pub fn diminutive_scan(t: &FiniteTree, family: &[Order], depth: usize) -> Result<DiminutiveReport, ConstructionError> {
    if depth > t.depth {
        return Err(ConstructionError::Depth(format!("scan depth {depth} exceeds tree depth {}", t.depth)));
    }
    let dag = t.truncate(depth).dag();
    let mut results = Vec::new();
    for f in family {
        let lv = levels(f, depth)?;
        results.push((f.name().to_string(), has_perfect_pruning(&dag, &lv, depth)));
    }
    Ok(DiminutiveReport { depth, results })
}
