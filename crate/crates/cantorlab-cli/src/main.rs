mod error;

use std::fs;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use cantorlab::complexity::{complexity_profile, write_profile_csv, MachineConstants, ReferenceMachine};
use cantorlab::constructions::{
    build_uniform_atoms_measure, gamma_encode, lambda_decode, xi_dim_tree, xi_encode_dim, xi_encode_ioc,
    ConstructConfig, ConstructKind, Schedule, StepPcf, TreeStages,
};
use cantorlab::functionals::{semimeasure_check, MonotonePairSet};
use cantorlab::measures::{
    granularity_exact, granularity_exact_oracle, granularity_sandwich, ExtensionRule, Lebesgue, MeasureOracle,
    MeasureTree, PointMass, SharedOracle,
};
use cantorlab::orders::{check_inverse_sandwich, check_inverse_shift, Order};
use cantorlab::{BitString, Dyadic};
use clap::{Args, Parser, Subcommand, ValueEnum};
use error::CliError;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "cantorlab", version, about = "Exact experiments with measures, orders and complexity on Cantor space")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure trees: granularity, validation, generation.
    #[command(subcommand)]
    Measure(MeasureCmd),
    /// Orders and their inverses.
    #[command(subcommand)]
    Orders(OrdersCmd),
    /// Monotone functional tables.
    #[command(subcommand)]
    Functional(FunctionalCmd),
    /// Stage-bounded complexity estimates.
    #[command(subcommand)]
    Complexity(ComplexityCmd),
    /// Stage constructions.
    Construct(ConstructArgs),
}

#[derive(Args)]
struct MeasureArg {
    /// `lebesgue`, `zeros` (point mass on 0^ω) or a measure tree file.
    #[arg(long)]
    measure: String,
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// CSV of exact granularity `n,g`.
    Gran {
        #[command(flatten)]
        measure: MeasureArg,
        /// Range `a..b`, `a..=b` or a single value.
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<u64>,
        /// Search depth for built-in measures.
        #[arg(long, default_value_t = 64)]
        depth: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// CSV of sandwich estimates `n,f`.
    Sandwich {
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<u64>,
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks root mass, non-negativity and additivity of a tree file.
    Validate {
        #[command(flatten)]
        measure: MeasureArg,
    },
    /// Seeded random measure tree whose splits are drawn from `r/64`.
    Random {
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allowed numerators `r`, comma separated.
        #[arg(long, value_delimiter = ',', default_values_t = [31i64, 32, 33])]
        ratios: Vec<i64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OrdersCmd {
    /// CSV `n,g,g_inv`.
    Eval {
        /// Order spec such as `order:linear:2,0`.
        #[arg(long)]
        order: String,
        #[arg(long, value_parser = parse_range)]
        n: RangeInclusive<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite check of an inverse inequality.
    Check {
        #[arg(long, value_enum)]
        kind: LemmaKind,
        #[arg(long)]
        f: String,
        #[arg(long)]
        g: String,
        #[arg(long, default_value_t = 0)]
        c: u64,
        #[arg(long = "N")]
        big_n: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LemmaKind {
    /// `g(n) ≤ f(n) < g(n+c)`.
    Sandwich,
    /// `f(n) ≤ g(n) + c`.
    Shift,
}

#[derive(Subcommand)]
enum FunctionalCmd {
    /// Consistency and the semi-measure inequality up to `--depth`.
    Check {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, default_value_t = 8)]
        depth: usize,
    },
    /// `λ_Φ(τ)` for each given `τ`.
    Lambda {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, required = true, num_args = 1..)]
        tau: Vec<BitString>,
    },
}

#[derive(Subcommand)]
enum ComplexityCmd {
    /// Profile CSV `n,k_t,ka_t,neglog_mu,deficiency` for prefixes of a sequence.
    Profile {
        /// File holding the sequence as 0/1 text.
        #[arg(long)]
        seq: PathBuf,
        #[command(flatten)]
        measure: MeasureArg,
        #[arg(long)]
        t: u64,
        #[arg(long = "N")]
        big_n: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Prints the recorded machine constants.
    Constants,
}

#[derive(Args)]
struct ConstructArgs {
    /// Construction to run; may come from `--config` instead.
    #[arg(value_parser = parse_kind)]
    kind: Option<ConstructKind>,
    /// `construct v1 ...` config file; flags given alongside override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Schedule spec such as `sched:linear`.
    #[arg(long)]
    pcf: Option<String>,
    /// Stages for atoms4, blocks for the encoders, output bits for the rest.
    #[arg(long)]
    depth: Option<usize>,
    /// Source bits for the encoders, input bits for the decoder.
    #[arg(long)]
    seed: Option<BitString>,
    /// Index of the function used by the encoders and the decoder.
    #[arg(long)]
    index: Option<u64>,
    #[arg(long, default_value_t = 1 << 20)]
    budget: u64,
    /// Event log (atoms4 only).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Tree file for atoms4, output bits otherwise.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_range(s: &str) -> std::result::Result<RangeInclusive<u64>, String> {
    let num = |t: &str| t.trim().parse::<u64>().map_err(|_| format!("bad number {t:?}"));
    if let Some((a, b)) = s.split_once("..=") {
        Ok(num(a)?..=num(b)?)
    } else if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b)?);
        if b <= a {
            return Err(format!("empty range {s:?}"));
        }
        Ok(a..=b - 1)
    } else {
        let n = num(s)?;
        Ok(n..=n)
    }
}

fn parse_kind(s: &str) -> std::result::Result<ConstructKind, String> {
    s.parse().map_err(|e: cantorlab::constructions::ConstructionError| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Invariant(format!("writing {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

enum Measure {
    Tree(MeasureTree),
    Builtin(SharedOracle),
}

impl Measure {
    fn load(spec: &str) -> Result<Self> {
        match spec {
            "lebesgue" => Ok(Measure::Builtin(Arc::new(Lebesgue))),
            "zeros" => Ok(Measure::Builtin(Arc::new(PointMass::zeros()))),
            path => Ok(Measure::Tree(MeasureTree::parse(&read(Path::new(path))?)?)),
        }
    }

    fn oracle(&self) -> &dyn MeasureOracle {
        match self {
            Measure::Tree(t) => t,
            Measure::Builtin(o) => o.as_ref(),
        }
    }
}

fn measure(cmd: MeasureCmd) -> Result<()> {
    match cmd {
        MeasureCmd::Gran { measure, n, depth, out } => {
            let m = Measure::load(&measure.measure)?;
            let mut csv = String::from("n,g\n");
            for k in n {
                let g = match &m {
                    Measure::Tree(t) => granularity_exact(t, k)?,
                    Measure::Builtin(o) => granularity_exact_oracle(o.as_ref(), k, depth)?,
                };
                csv.push_str(&format!("{k},{g}\n"));
            }
            emit(out.as_deref(), &csv)
        }
        MeasureCmd::Sandwich { measure, n, budget, out } => {
            let m = Measure::load(&measure.measure)?;
            let mut csv = String::from("n,f\n");
            for k in n {
                csv.push_str(&format!("{k},{}\n", granularity_sandwich(m.oracle(), k, budget)?));
            }
            emit(out.as_deref(), &csv)
        }
        MeasureCmd::Validate { measure } => match Measure::load(&measure.measure)? {
            Measure::Tree(t) => {
                t.validate()?;
                println!("ok depth={} entries={}", t.depth(), t.stored_len());
                Ok(())
            }
            Measure::Builtin(_) => Err(CliError::parse("validate expects a tree file")),
        },
        MeasureCmd::Random { depth, seed, ratios, out } => {
            if ratios.is_empty() || ratios.iter().any(|&r| !(0..=64).contains(&r)) {
                return Err(CliError::parse("ratios must lie in 0..=64"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut entries = vec![(BitString::empty(), Dyadic::from_int(1))];
            let mut level = 0..1;
            for _ in 0..depth {
                let start = entries.len();
                for idx in level {
                    let (s, m) = entries[idx].clone();
                    let r = ratios[rng.gen_range(0..ratios.len())];
                    let left = &m * &Dyadic::new(r.into(), 6);
                    let right = &m - &left;
                    entries.push((s.child(0), left));
                    entries.push((s.child(1), right));
                }
                level = start..entries.len();
            }
            let t = MeasureTree::from_entries(depth, ExtensionRule::UniformSplit, entries)?;
            t.validate()?;
            emit(out.as_deref(), &t.to_text())
        }
    }
}

fn orders(cmd: OrdersCmd) -> Result<()> {
    match cmd {
        OrdersCmd::Eval { order, n, out } => {
            let o = Order::parse(&order)?;
            let inv = o.inverse();
            let mut csv = String::from("n,g,g_inv\n");
            for k in n {
                csv.push_str(&format!("{k},{},{}\n", o.eval(k)?, inv.eval(k)?));
            }
            emit(out.as_deref(), &csv)
        }
        OrdersCmd::Check { kind, f, g, c, big_n } => {
            let (f, g) = (Order::parse(&f)?, Order::parse(&g)?);
            let r = match kind {
                LemmaKind::Sandwich => check_inverse_sandwich(&f, &g, c, big_n)?,
                LemmaKind::Shift => check_inverse_shift(&f, &g, c, big_n)?,
            };
            match (r.hypothesis_violation, r.conclusion_violation) {
                (Some(n), _) => println!("hypothesis fails at n={n}; nothing to conclude"),
                (None, None) => println!("conclusion holds for k <= {big_n}"),
                (None, Some(k)) => return Err(CliError::Invariant(format!("conclusion fails at k={k}"))),
            }
            Ok(())
        }
    }
}

fn functional(cmd: FunctionalCmd) -> Result<()> {
    match cmd {
        FunctionalCmd::Check { table, depth } => {
            let s = MonotonePairSet::parse(&read(&table)?)?;
            semimeasure_check(&s, depth)?;
            println!("ok pairs={} depth={depth}", s.len());
            Ok(())
        }
        FunctionalCmd::Lambda { table, tau } => {
            let s = MonotonePairSet::parse(&read(&table)?)?;
            s.validate()?;
            for t in tau {
                println!("{} {}", if t.is_empty() { "-".into() } else { t.to_string() }, s.lambda(&t));
            }
            Ok(())
        }
    }
}

fn complexity(cmd: ComplexityCmd) -> Result<()> {
    match cmd {
        ComplexityCmd::Profile { seq, measure, t, big_n, out } => {
            let bits: String = read(&seq)?.chars().filter(|c| !c.is_whitespace()).collect();
            let x: BitString = bits.parse().map_err(|_| CliError::parse(format!("{} is not a bit string", seq.display())))?;
            let m = Measure::load(&measure.measure)?;
            let rows = complexity_profile(m.oracle(), &x, &ReferenceMachine, t, big_n)?;
            let mut buf = Vec::new();
            write_profile_csv(&rows, &mut buf)?;
            emit(out.as_deref(), &String::from_utf8(buf).expect("CSV is ASCII"))
        }
        ComplexityCmd::Constants => {
            print!("{}", MachineConstants::bundled().to_text());
            Ok(())
        }
    }
}

/// Stages for the dimension encoder: `σ` enters once `φ_index(|σ|)` halts.
fn halting_stages(p: Arc<dyn StepPcf>, index: u64, budget: u64) -> TreeStages {
    TreeStages::entry(move |s| p.halting_time(index, s.len() as u64, budget))
}

fn construct(args: ConstructArgs) -> Result<()> {
    let base = match &args.config {
        Some(path) => Some(ConstructConfig::parse(&read(path)?)?),
        None => None,
    };
    let kind = args.kind.or(base.as_ref().map(|c| c.kind)).ok_or_else(|| CliError::parse("no construction kind"))?;
    let depth = args.depth.or(base.as_ref().map(|c| c.depth)).ok_or_else(|| CliError::parse("missing --depth"))?;
    let pcf = args.pcf.clone().or(base.as_ref().map(|c| c.pcf.clone())).unwrap_or_else(|| "sched:linear".into());
    let seed = args.seed.clone().or(base.as_ref().map(|c| c.seed.clone())).unwrap_or_default();
    let index = args.index.or(base.as_ref().map(|c| c.index)).unwrap_or(1);
    let p: Arc<dyn StepPcf> = Arc::new(Schedule::parse(&pcf)?);
    let budget = args.budget;

    if args.trace.is_some() && kind != ConstructKind::Atoms4 {
        return Err(CliError::parse("--trace is only produced by atoms4"));
    }
    let bits = match kind {
        ConstructKind::Atoms4 => {
            let (tree, state, trace) = build_uniform_atoms_measure(p.as_ref(), depth)?;
            tree.validate()?;
            if let Some(path) = &args.trace {
                emit(Some(path), &trace.to_text())?;
            }
            if let Some(path) = &args.out {
                emit(Some(path), &tree.to_text())?;
            }
            println!("validated atoms4 depth={depth} entries={} events={}", tree.stored_len(), trace.events.len());
            for (i, stages) in &state.event_stages {
                if !stages.is_empty() {
                    println!("index {i}: halving stages {stages:?}");
                }
            }
            return Ok(());
        }
        ConstructKind::Gamma => {
            let g = |n: u64| p.halting_time(index, n, budget);
            let blocks = depth.min(seed.len());
            if let Some(n) = (0..blocks as u64).find(|&n| g(n).is_none()) {
                return Err(CliError::Budget(format!("φ_{index}({n}) does not halt within {budget} steps")));
            }
            gamma_encode(&seed, &|n| g(n).unwrap(), blocks)?.output
        }
        ConstructKind::XiIoc => xi_encode_ioc(&seed, p.as_ref(), index, depth, budget)?.output,
        ConstructKind::XiDim => xi_encode_dim(&seed, &halting_stages(p.clone(), index, budget), depth),
        ConstructKind::Lambda => {
            let s_tree = xi_dim_tree(halting_stages(p.clone(), index, budget));
            lambda_decode(&seed, &s_tree, p.as_ref(), index, depth)?.bits
        }
    };
    emit(args.out.as_deref(), &format!("{bits}\n"))
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Measure(c) => measure(c),
        Command::Orders(c) => orders(c),
        Command::Functional(c) => functional(c),
        Command::Complexity(c) => complexity(c),
        Command::Construct(c) => construct(c),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cantorlab: {e}");
            e.exit_code()
        }
    }
}
