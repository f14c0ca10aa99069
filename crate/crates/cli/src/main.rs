use std::fmt::Write as _;
use std::fs;
use std::io::{self, Read};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use serde_json::{json, Value};

use rotor_core::algebra::{arborescence_counts, period_vector, pham_index, picard_summary};
use rotor_core::divisors::{is_w_reduced, Divisor, FiringConvention, PicardGroup};
use rotor_core::graph::{parse_digraph, Digraph};
use rotor_core::rotor::{
    is_unicycle, orbit_partition, run_period, step_mut, to_dot, ChipRotorState, RotorConfig,
};
use rotor_core::verify::{random_corpus, run_all, CheckReport, CorpusSpec, Tally, VerifyOptions};
use rotor_core::DEFAULT_CAP;

/// Rotor-routing orbits, arborescences and the Picard group of a digraph.
#[derive(Parser)]
#[command(name = "rotor", version)]
struct Cli {
    /// Maximum number of states an exhaustive enumeration may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_CAP)]
    cap: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the algebraic invariants of a graph as JSON.
    Invariants { graph: PathBuf },
    /// Run the rotor-router from a chip-and-rotor state.
    Simulate(SimulateArgs),
    /// List every unicycle orbit with its representative and size.
    Orbits { graph: PathBuf },
    /// Run all theorem checks on a graph or a seeded random corpus.
    Verify(VerifyArgs),
    /// Reducedness, class label or equivalence of a divisor.
    Divisor(DivisorArgs),
    /// Write a fixture or generated graph in the graph file format.
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        /// Write to this file instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("mode").required(true).args(["steps", "until_return"])))]
struct SimulateArgs {
    graph: PathBuf,
    #[arg(long)]
    chip: usize,
    /// Comma-separated rotor edge indices, one per vertex.
    #[arg(long)]
    rotors: String,
    #[arg(long)]
    steps: Option<u64>,
    /// Run until the start state recurs; the start must be a unicycle.
    #[arg(long)]
    until_return: bool,
    /// Also write the final state as DOT to this file.
    #[arg(long)]
    dot: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(required_unless_present = "random")]
    graph: Option<PathBuf>,
    /// Random corpus: vertex count, number of graphs, seed.
    #[arg(long, num_args = 3, value_names = ["N", "COUNT", "SEED"], conflicts_with = "graph")]
    random: Option<Vec<u64>>,
    /// Maximum extra edges per random graph.
    #[arg(long, default_value_t = 4)]
    max_extra: usize,
    /// Print a JSON summary instead of report lines.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("query").required(true).multiple(true).args(["reduced", "canonical", "equiv"])))]
struct DivisorArgs {
    graph: PathBuf,
    /// Space-separated chip counts, one per vertex.
    #[arg(long, allow_hyphen_values = true)]
    divisor: String,
    #[arg(long, default_value_t = 0)]
    root: usize,
    /// Test whether the divisor is root-reduced.
    #[arg(long)]
    reduced: bool,
    /// Print the class label in the Picard group.
    #[arg(long)]
    canonical: bool,
    /// Test equivalence with this divisor.
    #[arg(long, allow_hyphen_values = true)]
    equiv: Option<String>,
    #[arg(long, value_enum, default_value_t = Convention::RootFixed)]
    convention: Convention,
}

#[derive(Clone, Copy, ValueEnum)]
enum Convention {
    RootFixed,
    Literal,
    ExcludePeriod,
}

impl From<Convention> for FiringConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::RootFixed => FiringConvention::RootFixed,
            Convention::Literal => FiringConvention::Literal,
            Convention::ExcludePeriod => FiringConvention::ExcludePeriod,
        }
    }
}

#[derive(Subcommand)]
enum GenKind {
    /// One of G1, G2, G3, G4.
    Fixture { name: String },
    /// Directed cycle on n vertices.
    Cycle { n: usize },
    /// Each undirected edge `a-b` becomes two antiparallel edges.
    Bidirected {
        n: usize,
        /// Comma-separated edges, e.g. `0-1,1-2,2-0`.
        edges: String,
    },
    /// Random Hamiltonian cycle plus extra random edges.
    Random { n: usize, extra: usize, seed: u64 },
}

enum Failure {
    /// Bad input: exit code 2.
    Input(String),
    /// A check failed: exit code 1.
    Check,
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Input(e.to_string())
    }
}

type CmdResult = Result<(), Failure>;

fn read_graph(path: &PathBuf) -> Result<Digraph, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
    };
    parse_digraph(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn strings(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(|x| Value::String(x.to_string())).collect())
}

fn print_json(v: &Value) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn invariants(d: &Digraph) -> CmdResult {
    let per = period_vector(d)?;
    let picard = picard_summary(d)?;
    let length: BigInt = (0..d.n()).map(|v| per.get(v) * d.out_degree(v)).sum();
    print_json(&json!({
        "n": d.n().to_string(),
        "m": d.edge_count().to_string(),
        "per": strings(per.as_slice()),
        "arborescences": strings(&arborescence_counts(d)),
        "pham_index": pham_index(d)?.to_string(),
        "picard_invariant_factors": strings(&picard.invariant_factors),
        "picard_order": picard.order.to_string(),
        "orbit_length": length.to_string(),
        "orbit_count": picard.order.to_string(),
    }));
    Ok(())
}

fn simulate(args: &SimulateArgs) -> CmdResult {
    let d = read_graph(&args.graph)?;
    let rotors: RotorConfig = args.rotors.parse()?;
    let start = ChipRotorState {
        chip: args.chip,
        rotors,
    };
    start.validate(&d)?;
    let mut out = String::new();
    let mut cur = start.clone();
    writeln!(out, "0 {} {}", cur.chip, cur.rotors).unwrap();
    if args.until_return {
        if !is_unicycle(&d, &start) {
            return Err(Failure::Input(format!(
                "{start} is not a unicycle; only unicycles are recurrent, so it never returns"
            )));
        }
        let mut t = 0u64;
        loop {
            step_mut(&d, &mut cur);
            t += 1;
            writeln!(out, "{t} {} {}", cur.chip, cur.rotors).unwrap();
            if cur == start {
                break;
            }
        }
        let summary = run_period(&d, &start)?;
        let flows: Vec<String> = summary
            .edge_flow
            .iter()
            .map(|f| f.iter().map(u64::to_string).collect::<Vec<_>>().join(","))
            .collect();
        writeln!(out, "returned after {} steps", summary.length).unwrap();
        writeln!(out, "visits {:?}", summary.visits).unwrap();
        writeln!(out, "turns {:?}", summary.turns).unwrap();
        writeln!(out, "edge_flow [{}]", flows.join("; ")).unwrap();
    } else {
        for t in 1..=args.steps.unwrap_or(0) {
            step_mut(&d, &mut cur);
            writeln!(out, "{t} {} {}", cur.chip, cur.rotors).unwrap();
        }
    }
    print!("{out}");
    if let Some(path) = &args.dot {
        fs::write(path, to_dot(&d, &cur))?;
    }
    Ok(())
}

fn orbits(d: &Digraph, cap: u64) -> CmdResult {
    let orbits = orbit_partition(d, cap)?;
    for (i, o) in orbits.iter().enumerate() {
        println!("orbit {i} {} size={}", o.representative(), o.len());
    }
    let per = period_vector(d)?;
    let ratios: Vec<String> = arborescence_counts(d)
        .iter()
        .enumerate()
        .map(|(w, t)| format!("T({w})/per({w})={t}/{}", per.get(w)))
        .collect();
    let expected = pham_index(d)?;
    let agree = expected == BigInt::from(orbits.len());
    println!(
        "orbits={} expected={expected} {} {}",
        orbits.len(),
        ratios.join(" "),
        if agree { "ok" } else { "MISMATCH" }
    );
    if agree {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn report_json(r: &CheckReport) -> Value {
    json!({
        "check": r.check,
        "graph": r.graph_id,
        "status": r.status.to_string(),
        "details": r.details,
        "counterexamples": r.counterexamples,
        "instance": r.instance,
    })
}

fn verify(args: &VerifyArgs, cap: u64) -> CmdResult {
    let opts = VerifyOptions {
        cap,
        ..VerifyOptions::default()
    };
    let mut reports = Vec::new();
    let mut source = json!({});
    if let Some(r) = &args.random {
        let (n, count, seed) = (r[0] as usize, r[1] as usize, r[2]);
        if n < 2 {
            return Err(Failure::Input(format!("--random needs n ≥ 2, got {n}")));
        }
        let spec = CorpusSpec {
            count,
            seed,
            min_n: n,
            max_n: n,
            max_extra: args.max_extra,
        };
        source = json!({
            "random": {
                "n": n.to_string(),
                "count": count.to_string(),
                "seed": seed.to_string(),
                "max_extra": args.max_extra.to_string(),
            }
        });
        if !args.json {
            println!("# random corpus n={n} count={count} seed={seed} max_extra={}", args.max_extra);
        }
        for e in random_corpus(spec) {
            reports.extend(run_all(&e.graph, &e.id, opts));
        }
    } else if let Some(path) = &args.graph {
        let d = read_graph(path)?;
        source = json!({ "graph": path.display().to_string() });
        reports = run_all(&d, &path.display().to_string(), opts);
    }
    let tally = Tally::of(&reports);
    if args.json {
        print_json(&json!({
            "source": source,
            "passed": tally.passed.to_string(),
            "failed": tally.failed.to_string(),
            "skipped": tally.skipped.to_string(),
            "reports": reports.iter().map(report_json).collect::<Vec<_>>(),
        }));
    } else {
        for r in &reports {
            println!("{r}");
        }
        println!(
            "summary: {} passed, {} failed, {} skipped",
            tally.passed, tally.failed, tally.skipped
        );
    }
    if tally.all_passed() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn divisor(args: &DivisorArgs, cap: u64) -> CmdResult {
    let d = read_graph(&args.graph)?;
    let x: Divisor = args.divisor.parse()?;
    if x.len() != d.n() {
        return Err(Failure::Input(format!(
            "divisor has {} entries, graph has {} vertices",
            x.len(),
            d.n()
        )));
    }
    let mut out = serde_json::Map::new();
    out.insert("divisor".into(), Value::String(x.to_string()));
    if args.reduced {
        if args.root >= d.n() {
            return Err(Failure::Input(format!("root {} out of range", args.root)));
        }
        let reduced = is_w_reduced(&d, &x, args.root, args.convention.into(), cap)?;
        out.insert("root".into(), Value::String(args.root.to_string()));
        out.insert("reduced".into(), Value::Bool(reduced));
    }
    let group = PicardGroup::new(&d)?;
    if args.canonical {
        out.insert("canonical".into(), strings(&group.canonical_form(&x)?));
    }
    if let Some(other) = &args.equiv {
        let y: Divisor = other.parse()?;
        let witness = group.equivalent(&x, &y)?;
        out.insert("other".into(), Value::String(y.to_string()));
        out.insert("equivalent".into(), Value::Bool(witness.is_some()));
        out.insert("witness".into(), witness.as_deref().map_or(Value::Null, strings));
    }
    print_json(&Value::Object(out));
    Ok(())
}

fn parse_edges(s: &str) -> Result<Vec<(usize, usize)>, Failure> {
    s.split(',')
        .map(|e| {
            let (a, b) = e
                .split_once('-')
                .ok_or_else(|| Failure::Input(format!("edge `{e}` is not `a-b`")))?;
            Ok((a.trim().parse()?, b.trim().parse()?))
        })
        .collect()
}

fn gen(kind: &GenKind, output: Option<&PathBuf>) -> CmdResult {
    let d = match kind {
        GenKind::Fixture { name } => Digraph::fixture(name)
            .ok_or_else(|| Failure::Input(format!("unknown fixture `{name}`")))?,
        GenKind::Cycle { n } => Digraph::directed_cycle(*n)?,
        GenKind::Bidirected { n, edges } => Digraph::bidirected(*n, &parse_edges(edges)?)?,
        GenKind::Random { n, extra, seed } => Digraph::random(*n, *extra, *seed)?,
    };
    let mut text = String::new();
    if let GenKind::Random { n, extra, seed } = kind {
        writeln!(text, "# random n={n} extra={extra} seed={seed}").unwrap();
    }
    text.push_str(&d.to_string());
    match output {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Invariants { graph } => invariants(&read_graph(graph)?),
        Command::Simulate(args) => simulate(args),
        Command::Orbits { graph } => orbits(&read_graph(graph)?, cli.cap),
        Command::Verify(args) => verify(args, cli.cap),
        Command::Divisor(args) => divisor(args, cli.cap),
        Command::Gen { kind, output } => gen(kind, output.as_ref()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
