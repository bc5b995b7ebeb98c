use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::One;

use super::{pcf_validate, ConstructionError, Step, StepPcf};
use crate::arith::{BitString, Dyadic};
use crate::measures::{local_granularity, ExtensionRule, MeasureError, MeasureOracle, MeasureTree};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceKind {
    Seed,
    Append,
    Halve,
}

impl fmt::Display for TraceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TraceKind::Seed => "seed",
            TraceKind::Append => "append",
            TraceKind::Halve => "halve",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub stage: u64,
    pub kind: TraceKind,
    pub node: BitString,
    pub value: Dyadic,
}

impl fmt::Display for TraceEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let node = if self.node.is_empty() { "-".to_string() } else { self.node.to_string() };
        write!(f, "stage={} event={} node={} value={}", self.stage, self.kind, node, self.value)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
}

impl Trace {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in &self.events {
            s.push_str(&e.to_string());
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, ConstructionError> {
        let mut events = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let err = || ConstructionError::Parse(format!("bad trace line {line:?}"));
            let mut fields = BTreeMap::new();
            for part in line.split_whitespace() {
                let (k, v) = part.split_once('=').ok_or_else(err)?;
                fields.insert(k, v);
            }
            let get = |k: &str| fields.get(k).copied().ok_or_else(err);
            let kind = match get("event")? {
                "seed" => TraceKind::Seed,
                "append" => TraceKind::Append,
                "halve" => TraceKind::Halve,
                _ => return Err(err()),
            };
            let node = match get("node")? {
                "-" => BitString::empty(),
                s => s.parse().map_err(|_| err())?,
            };
            events.push(TraceEvent {
                stage: get("stage")?.parse().map_err(|_| err())?,
                kind,
                node,
                value: get("value")?.parse().map_err(|_| err())?,
            });
        }
        Ok(Trace { events })
    }

    /// Members appended to `L_i` at `stage` (members of `⟦0^i1⟧` only).
    pub fn appended(&self, i: u64, stage: u64) -> usize {
        self.events
            .iter()
            .filter(|e| e.stage == stage && e.kind == TraceKind::Append && first_one(&e.node) == Some(i as usize))
            .count()
    }
}

/// Bookkeeping after the last simulated stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionState4 {
    pub stage: u64,
    pub l_sets: BTreeMap<u64, BTreeSet<BitString>>,
    pub n_counters: BTreeMap<u64, u64>,
    /// Stages at which `φ_i(n_i + i)` converged and `L_i` grew.
    pub event_stages: BTreeMap<u64, Vec<u64>>,
}

fn first_one(s: &BitString) -> Option<usize> {
    s.bits().iter().position(|&b| b == 1)
}

fn converges_exactly_at(p: &dyn StepPcf, i: u64, n: u64, s: u64) -> bool {
    matches!(p.eval(i, n, s), Step::Halted(_)) && (s == 0 || p.eval(i, n, s - 1) == Step::Running)
}

/// Runs the uniform-atoms construction through stage `depth`.
///
/// The family is validated on indices, arguments and steps up to `depth`
/// first. Only positive-mass nodes are visited; everything else is 0.
pub fn build_uniform_atoms_measure(
    p: &dyn StepPcf,
    depth: usize,
) -> Result<(MeasureTree, ConstructionState4, Trace), ConstructionError> {
    let d = depth as u64;
    pcf_validate(p, d, d, d)?;
    let mut trace = Trace::default();
    let mut state = ConstructionState4 {
        stage: 0,
        l_sets: BTreeMap::new(),
        n_counters: BTreeMap::new(),
        event_stages: BTreeMap::new(),
    };
    trace.events.push(TraceEvent { stage: 0, kind: TraceKind::Seed, node: BitString::empty(), value: Dyadic::one() });
    for i in 0..d {
        let mut root = BitString::zeros(i as usize);
        root.push(1);
        trace.events.push(TraceEvent {
            stage: 0,
            kind: TraceKind::Append,
            node: root.clone(),
            value: Dyadic::pow2_neg(i + 1),
        });
        state.l_sets.insert(i, BTreeSet::from([root]));
        state.n_counters.insert(i, 0);
        state.event_stages.insert(i, Vec::new());
    }

    // Levels are appended in order; `frontier` indexes the last one.
    let mut entries = vec![(BitString::empty(), Dyadic::one())];
    let mut frontier = 0..1;
    for s in 1..=d {
        let mut next = Vec::with_capacity(frontier.len() * 2);
        let mut conv: BTreeMap<u64, bool> = BTreeMap::new();
        let mut added: BTreeMap<u64, Vec<BitString>> = BTreeMap::new();
        for (w, m) in &entries[frontier.clone()] {
            let Some(i) = first_one(w) else {
                let v = Dyadic::pow2_neg(s);
                for b in [0, 1] {
                    let c = w.child(b);
                    trace.events.push(TraceEvent { stage: s, kind: TraceKind::Seed, node: c.clone(), value: v.clone() });
                    next.push((c, v.clone()));
                }
                continue;
            };
            let i = i as u64;
            let n_i = state.n_counters[&i];
            let halts = *conv.entry(i).or_insert_with(|| converges_exactly_at(p, i, n_i + i, s));
            if halts {
                let v = m.half();
                for b in [0, 1] {
                    let c = w.child(b);
                    trace.events.push(TraceEvent { stage: s, kind: TraceKind::Append, node: c.clone(), value: v.clone() });
                    trace.events.push(TraceEvent { stage: s, kind: TraceKind::Halve, node: c.clone(), value: v.clone() });
                    added.entry(i).or_default().push(c.clone());
                    next.push((c, v.clone()));
                }
            } else {
                next.push((w.child(0), m.clone()));
            }
        }
        for (i, halted) in conv {
            if halted {
                *state.n_counters.get_mut(&i).unwrap() += 1;
                state.event_stages.get_mut(&i).unwrap().push(s);
                state.l_sets.get_mut(&i).unwrap().extend(added.remove(&i).unwrap_or_default());
            }
        }
        frontier = entries.len()..entries.len() + next.len();
        entries.extend(next);
        state.stage = s;
    }
    let tree = MeasureTree::from_entries(depth, ExtensionRule::Error, entries)?;
    Ok((tree, state, trace))
}

/// The same measure, evaluated path by path at any length.
#[derive(Clone)]
pub struct Atoms4Oracle {
    p: Arc<dyn StepPcf>,
}

impl Atoms4Oracle {
    pub fn new(p: Arc<dyn StepPcf>) -> Self {
        Atoms4Oracle { p }
    }

    pub fn value(&self, sigma: &BitString) -> Dyadic {
        let Some(i) = first_one(sigma) else {
            return Dyadic::pow2_neg(sigma.len() as u64);
        };
        let mut mass = Dyadic::pow2_neg(i as u64 + 1);
        let mut n = 0u64;
        for s in (i + 2)..=sigma.len() {
            let s = s as u64;
            if converges_exactly_at(self.p.as_ref(), i as u64, n + i as u64, s) {
                mass = mass.half();
                n += 1;
            } else if sigma.bit(s as usize - 1) == 1 {
                return Dyadic::from_int(0);
            }
        }
        mass
    }

    /// Stages `≤ depth` at which mass inside `⟦0^i1⟧` halves.
    pub fn event_stages(&self, i: u64, depth: u64) -> Vec<u64> {
        let mut out = Vec::new();
        for s in (i + 2)..=depth {
            if converges_exactly_at(self.p.as_ref(), i, out.len() as u64 + i, s) {
                out.push(s);
            }
        }
        out
    }
}

impl MeasureOracle for Atoms4Oracle {
    fn approx(&self, sigma: &BitString, _precision: u64) -> Result<Dyadic, MeasureError> {
        Ok(self.value(sigma))
    }

    fn is_exact(&self) -> bool {
        true
    }
}

/// `0^i 1 0^{t_0} b_0 0^{t_1} b_1 …` through length `depth`: zeros except at
/// halving stages, where the next bit of `b` is used (0 once `b` runs out).
pub fn atoms4_path(p: Arc<dyn StepPcf>, i: u64, b: &[u8], depth: usize) -> BitString {
    let o = Atoms4Oracle::new(p);
    let events: BTreeSet<u64> = o.event_stages(i, depth as u64).into_iter().collect();
    let mut x = BitString::zeros(i as usize);
    x.push(1);
    let mut k = 0;
    while x.len() < depth {
        let s = x.len() as u64 + 1;
        if events.contains(&s) {
            x.push(b.get(k).copied().unwrap_or(0));
            k += 1;
        } else {
            x.push(0);
        }
    }
    x.truncate(depth);
    x
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim4Row {
    pub k: u64,
    pub granularity: u64,
    pub phi: u64,
}

impl Claim4Row {
    pub fn holds(&self) -> bool {
        self.granularity > self.phi
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim4Report {
    pub i: u64,
    pub path: BitString,
    pub rows: Vec<Claim4Row>,
}

impl Claim4Report {
    pub fn holds(&self) -> bool {
        self.rows.iter().all(Claim4Row::holds)
    }

    pub fn first_failure(&self) -> Option<&Claim4Row> {
        self.rows.iter().find(|r| !r.holds())
    }
}

/// Compares `g_μ^X(i+k)` with `φ_i(i+k)` for `k ≤ big_k` along the path
/// chosen by `b` through the halving events of `⟦0^i1⟧`.
pub fn claim4_check(
    p: Arc<dyn StepPcf>,
    i: u64,
    big_k: u64,
    depth: usize,
    b: &[u8],
) -> Result<Claim4Report, ConstructionError> {
    let path = atoms4_path(p.clone(), i, b, depth);
    let o = Atoms4Oracle::new(p.clone());
    let mut rows = Vec::new();
    for k in 0..=big_k {
        let granularity = match local_granularity(&o, &path, i + k) {
            Ok(g) => g,
            Err(MeasureError::PrefixTooShort(_)) => {
                return Err(ConstructionError::Depth(format!("g^X({}) is beyond depth {depth}", i + k)))
            }
            Err(e) => return Err(e.into()),
        };
        let phi = match p.eval(i, i + k, 1 << 40) {
            Step::Halted(v) => v,
            Step::Running => return Err(ConstructionError::Budget(format!("φ_{i}({}) does not halt", i + k))),
        };
        rows.push(Claim4Row { k, granularity, phi });
    }
    Ok(Claim4Report { i, path, rows })
}
