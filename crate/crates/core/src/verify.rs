//! Executable checks of the rotor-routing theorems.
//!
//! Each check computes the combinatorial side by brute-force simulation or
//! enumeration, and the algebraic side from determinants and Smith forms, and
//! compares them exactly. The two sides share no intermediate results.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{arborescence_count, period_vector, pham_index, picard_summary, PeriodVector};
use crate::divisors::{apply_firing_exact, reduced_census, Divisor, FiringConvention, PicardGroup};
use crate::graph::Digraph;
use crate::rotor::{
    classify_by_simulation, enumerate_unicycles, is_unicycle, orbit_partition, run_period, Orbit,
    Recurrence, RotorError, StateSpace,
};
use crate::{Error, DEFAULT_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Not run: the instance is too large for exhaustive enumeration.
    Skip,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
        })
    }
}

/// Outcome of one check on one graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub check: &'static str,
    pub graph_id: String,
    pub status: Status,
    pub details: String,
    pub counterexamples: Vec<String>,
    /// The offending graph in file format, attached on failure for replay.
    pub instance: Option<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// `PASS|FAIL|SKIP <check-name> <graph-id> <details>`; failures append the
/// counterexamples and the instance with newlines shown as `;`.
impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} {}", self.status, self.check, self.graph_id, self.details)?;
        if !self.counterexamples.is_empty() {
            write!(f, " counterexamples=[{}]", self.counterexamples.join("; "))?;
        }
        if let Some(instance) = &self.instance {
            write!(f, " instance={}", instance.trim_end().replace('\n', ";"))?;
        }
        Ok(())
    }
}

struct Builder<'a> {
    check: &'static str,
    graph_id: &'a str,
    graph: &'a Digraph,
}

impl Builder<'_> {
    fn finish(&self, details: String, counterexamples: Vec<String>) -> CheckReport {
        let failed = !counterexamples.is_empty();
        CheckReport {
            check: self.check,
            graph_id: self.graph_id.to_string(),
            status: if failed { Status::Fail } else { Status::Pass },
            details,
            counterexamples,
            instance: failed.then(|| self.graph.to_string()),
        }
    }

    /// Cap overruns become skips; anything else is a failure.
    fn error(&self, err: impl Into<Error>) -> CheckReport {
        let err = err.into();
        let skip = matches!(
            err,
            Error::Rotor(RotorError::CapExceeded { .. })
                | Error::Divisor(crate::divisors::DivisorError::CapExceeded { .. })
        );
        CheckReport {
            check: self.check,
            graph_id: self.graph_id.to_string(),
            status: if skip { Status::Skip } else { Status::Fail },
            details: err.to_string(),
            counterexamples: Vec::new(),
            instance: (!skip).then(|| self.graph.to_string()),
        }
    }
}

fn builder<'a>(check: &'static str, graph_id: &'a str, graph: &'a Digraph) -> Builder<'a> {
    Builder {
        check,
        graph_id,
        graph,
    }
}

fn fmt_ints(xs: &[BigInt]) -> String {
    let parts: Vec<String> = xs.iter().map(BigInt::to_string).collect();
    format!("({})", parts.join(","))
}

/// Every state is recurrent under simulation iff it is a unicycle.
pub fn check_recurrence_theorem(d: &Digraph, graph_id: &str, cap: u64) -> CheckReport {
    let b = builder("recurrence", graph_id, d);
    let space = match StateSpace::new(d, cap) {
        Ok(s) => s,
        Err(e) => return b.error(e),
    };
    let mut bad = Vec::new();
    let mut recurrent = 0u64;
    for s in space.states() {
        let (class, _) = classify_by_simulation(d, &s);
        let sim = class == Recurrence::Recurrent;
        recurrent += u64::from(sim);
        if sim != is_unicycle(d, &s) {
            bad.push(format!("{s} simulated {class:?}"));
        }
    }
    b.finish(
        format!("states={} recurrent={recurrent}", space.size()),
        bad,
    )
}

fn expected_period_length(d: &Digraph, per: &PeriodVector) -> BigInt {
    (0..d.n()).map(|v| per.get(v) * d.out_degree(v)).sum()
}

/// For every unicycle, one simulated period visits `v` exactly
/// `per(v)·d⁺(v)` times, turns each rotor `per(v)` times, traverses each edge
/// `per(tail)` times, and lasts `Σ per(v)·d⁺(v)` steps.
pub fn check_period_theorem(d: &Digraph, graph_id: &str, cap: u64) -> CheckReport {
    let b = builder("period", graph_id, d);
    let per = match period_vector(d) {
        Ok(p) => p,
        Err(e) => return b.error(e),
    };
    let expected_len = expected_period_length(d, &per);
    let unicycles = match enumerate_unicycles(d, cap) {
        Ok(u) => u,
        Err(e) => return b.error(e),
    };
    let mut bad = Vec::new();
    let mut checked = 0u64;
    for s in unicycles {
        checked += 1;
        let summary = match run_period(d, &s) {
            Ok(p) => p,
            Err(e) => return b.error(e),
        };
        if BigInt::from(summary.length) != expected_len {
            bad.push(format!("{s}: length {} ≠ {expected_len}", summary.length));
        }
        for v in 0..d.n() {
            let turns = per.get(v);
            if BigInt::from(summary.visits[v]) != turns * d.out_degree(v) {
                bad.push(format!("{s}: vertex {v} visited {} times", summary.visits[v]));
            }
            if BigInt::from(summary.turns[v]) != *turns {
                bad.push(format!("{s}: rotor {v} turned {} times", summary.turns[v]));
            }
            for (k, &flow) in summary.edge_flow[v].iter().enumerate() {
                if BigInt::from(flow) != *turns {
                    bad.push(format!("{s}: edge ({v},{k}) traversed {flow} times"));
                }
            }
        }
    }
    b.finish(
        format!("unicycles={checked} length={expected_len} per={}", fmt_ints(per.as_slice())),
        bad,
    )
}

/// The brute-force orbit count equals `T(D,w)/per(w)` for every `w`, and the
/// Pham index; all orbits have the same size.
pub fn check_orbit_count(d: &Digraph, graph_id: &str, cap: u64) -> CheckReport {
    let b = builder("orbit-count", graph_id, d);
    let orbits = match orbit_partition(d, cap) {
        Ok(o) => o,
        Err(e) => return b.error(e),
    };
    let (per, pham) = match (period_vector(d), pham_index(d)) {
        (Ok(p), Ok(g)) => (p, g),
        (Err(e), _) | (_, Err(e)) => return b.error(e),
    };
    let count = BigInt::from(orbits.len());
    let mut bad = Vec::new();
    let mut ratios = Vec::new();
    for w in 0..d.n() {
        let t = arborescence_count(d, w);
        let (q, r) = t.div_rem(per.get(w));
        if !r.is_zero() {
            bad.push(format!("per({w}) = {} does not divide T = {t}", per.get(w)));
        }
        if q != count {
            bad.push(format!("T(D,{w})/per({w}) = {q} ≠ {count} orbits"));
        }
        ratios.push(format!("{t}/{}", per.get(w)));
    }
    if pham != count {
        bad.push(format!("Pham index {pham} ≠ {count} orbits"));
    }
    let sizes: Vec<usize> = orbits.iter().map(Orbit::len).collect();
    if sizes.windows(2).any(|w| w[0] != w[1]) {
        bad.push(format!("orbit sizes differ: {sizes:?}"));
    }
    b.finish(
        format!("orbits={count} ratios=[{}] pham={pham}", ratios.join(",")),
        bad,
    )
}

/// Unicycles with the chip at `w` number `T(D,w)·d⁺(w)`, and each orbit holds
/// `per(w)·d⁺(w)` of them.
pub fn check_unicycle_census(d: &Digraph, graph_id: &str, cap: u64) -> CheckReport {
    let b = builder("unicycle-census", graph_id, d);
    let orbits = match orbit_partition(d, cap) {
        Ok(o) => o,
        Err(e) => return b.error(e),
    };
    let per = match period_vector(d) {
        Ok(p) => p,
        Err(e) => return b.error(e),
    };
    let n = d.n();
    let mut per_root = vec![0u64; n];
    match enumerate_unicycles(d, cap) {
        Ok(u) => u.for_each(|s| per_root[s.chip] += 1),
        Err(e) => return b.error(e),
    }
    let mut bad = Vec::new();
    for (w, &found) in per_root.iter().enumerate() {
        let expected = arborescence_count(d, w) * d.out_degree(w);
        if BigInt::from(found) != expected {
            bad.push(format!("chip at {w}: {found} unicycles, expected {expected}"));
        }
        let in_orbit = per.get(w) * d.out_degree(w);
        for orbit in &orbits {
            let c = orbit.states.iter().filter(|s| s.chip == w).count();
            if BigInt::from(c) != in_orbit {
                bad.push(format!(
                    "orbit of {} has {c} states with chip at {w}, expected {in_orbit}",
                    orbit.representative()
                ));
            }
        }
    }
    let total: u64 = per_root.iter().sum();
    b.finish(format!("unicycles={total} by_chip={per_root:?}"), bad)
}

/// `|Pic⁰(D)|` from the Smith form equals the brute-force orbit count.
pub fn check_picard_match(d: &Digraph, graph_id: &str, cap: u64) -> CheckReport {
    let b = builder("picard", graph_id, d);
    let summary = match picard_summary(d) {
        Ok(s) => s,
        Err(e) => return b.error(e),
    };
    let orbits = match orbit_partition(d, cap) {
        Ok(o) => o.len(),
        Err(e) => return b.error(e),
    };
    let mut bad = Vec::new();
    if summary.order != BigInt::from(orbits) {
        bad.push(format!("Picard order {} ≠ {orbits} orbits", summary.order));
    }
    b.finish(
        format!(
            "order={} factors={} orbits={orbits}",
            summary.order,
            fmt_ints(&summary.invariant_factors)
        ),
        bad,
    )
}

/// The `w`-reduced divisors number `T(D,w)` and fall into `|Pic⁰|` classes of
/// exactly `per(w)` each. Class labels from the canonical form must agree with
/// the grouping by equivalence witnesses.
pub fn check_reduced_census(d: &Digraph, graph_id: &str, w: usize, cap: u64) -> CheckReport {
    let b = builder("reduced-census", graph_id, d);
    let census = match reduced_census(d, w, FiringConvention::RootFixed, cap) {
        Ok(c) => c,
        Err(e) => return b.error(e),
    };
    let (per, summary) = match (period_vector(d), picard_summary(d)) {
        (Ok(p), Ok(s)) => (p, s),
        (Err(e), _) | (_, Err(e)) => return b.error(e),
    };
    let group = match PicardGroup::new(d) {
        Ok(g) => g,
        Err(e) => return b.error(e),
    };
    let t = arborescence_count(d, w);
    let mut bad = Vec::new();
    if BigInt::from(census.divisors.len()) != t {
        bad.push(format!("{} reduced divisors, T(D,{w}) = {t}", census.divisors.len()));
    }
    if BigInt::from(census.classes.len()) != summary.order {
        bad.push(format!(
            "{} classes, Picard order {}",
            census.classes.len(),
            summary.order
        ));
    }
    let mut labels = Vec::new();
    for class in &census.classes {
        if BigInt::from(class.len()) != *per.get(w) {
            bad.push(format!("class of {} has {} elements, per({w}) = {}", class[0], class.len(), per.get(w)));
        }
        let class_labels: Vec<_> = class
            .iter()
            .map(|x| group.canonical_form(x))
            .collect::<Result<_, _>>()
            .unwrap_or_default();
        if class_labels.windows(2).any(|p| p[0] != p[1]) {
            bad.push(format!("class of {} has several canonical labels", class[0]));
        }
        if let Some(label) = class_labels.first() {
            if labels.contains(label) {
                bad.push(format!("class of {} shares a canonical label", class[0]));
            }
            labels.push(label.clone());
        }
    }
    let sizes: Vec<usize> = census.classes.iter().map(Vec::len).collect();
    b.finish(
        format!("w={w} reduced={} classes={} sizes={sizes:?}", census.divisors.len(), census.classes.len()),
        bad,
    )
}

/// Over one period from each orbit the chip moves along `(u, v)` exactly
/// `per(u)·d(u,v)` times, which is the flow of firing `per`; firing `per`
/// leaves every divisor unchanged.
pub fn check_chip_firing_correspondence(d: &Digraph, graph_id: &str, cap: u64) -> CheckReport {
    let b = builder("chip-firing", graph_id, d);
    let per = match period_vector(d) {
        Ok(p) => p,
        Err(e) => return b.error(e),
    };
    let orbits = match orbit_partition(d, cap) {
        Ok(o) => o,
        Err(e) => return b.error(e),
    };
    let mut bad = Vec::new();
    for orbit in &orbits {
        let rep = orbit.representative();
        let summary = match run_period(d, rep) {
            Ok(s) => s,
            Err(e) => return b.error(e),
        };
        for ((u, v), flow) in summary.flow_by_endpoints(d) {
            let expected = per.get(u) * d.multiplicity(u, v);
            if BigInt::from(flow) != expected {
                bad.push(format!("{rep}: {u}→{v} carries {flow}, firing gives {expected}"));
            }
        }
    }
    let n = d.n() as i64;
    let probes = [
        Divisor::zeros(d.n()),
        Divisor((0..n).collect()),
        Divisor((0..n).map(|i| if i % 2 == 0 { 3 - i } else { -i * i }).collect()),
    ];
    for x in &probes {
        let xb: Vec<BigInt> = x.values().iter().map(|&c| BigInt::from(c)).collect();
        if apply_firing_exact(d, &xb, per.as_slice()) != xb {
            bad.push(format!("firing per changes ({x})"));
        }
    }
    b.finish(format!("orbits={} per={}", orbits.len(), fmt_ints(per.as_slice())), bad)
}

#[derive(Debug, Clone, Copy)]
pub struct VerifyOptions {
    /// Cap on rotor state-space enumeration.
    pub cap: u64,
    /// Cap on the candidate box and firing box of the reduced-divisor census.
    pub reduced_cap: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            cap: DEFAULT_CAP,
            reduced_cap: 100_000,
        }
    }
}

/// All checks on one graph, in a fixed order; the reduced census runs once
/// per root.
pub fn run_all(d: &Digraph, graph_id: &str, opts: VerifyOptions) -> Vec<CheckReport> {
    let mut reports = vec![
        check_recurrence_theorem(d, graph_id, opts.cap),
        check_period_theorem(d, graph_id, opts.cap),
        check_orbit_count(d, graph_id, opts.cap),
        check_unicycle_census(d, graph_id, opts.cap),
        check_picard_match(d, graph_id, opts.cap),
    ];
    for w in 0..d.n() {
        reports.push(check_reduced_census(d, graph_id, w, opts.reduced_cap));
    }
    reports.push(check_chip_firing_correspondence(d, graph_id, opts.cap));
    reports
}

/// Parameters of a seeded random corpus.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CorpusSpec {
    pub count: usize,
    pub seed: u64,
    pub min_n: usize,
    pub max_n: usize,
    pub max_extra: usize,
}

impl Default for CorpusSpec {
    fn default() -> Self {
        CorpusSpec {
            count: 200,
            seed: 2016,
            min_n: 2,
            max_n: 5,
            max_extra: 4,
        }
    }
}

/// A random instance together with the parameters that rebuild it.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: String,
    pub n: usize,
    pub extra_edges: usize,
    pub seed: u64,
    pub graph: Digraph,
}

/// Deterministic schedule of random strongly connected digraphs. Instance `i`
/// is `Digraph::random(n, extra_edges, seed)` with the parameters recorded in
/// its entry.
pub fn random_corpus(spec: CorpusSpec) -> Vec<CorpusEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count)
        .map(|i| {
            let n = rng.gen_range(spec.min_n.max(2)..=spec.max_n.max(spec.min_n).max(2));
            let extra_edges = rng.gen_range(0..=spec.max_extra);
            let seed: u64 = rng.gen();
            let graph = Digraph::random(n, extra_edges, seed).expect("n ≥ 2");
            CorpusEntry {
                id: format!("random/{}/{i}", spec.seed),
                n,
                extra_edges,
                seed,
                graph,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub passed: usize,
    pub failed: usize,
    pub skipped: usize,
}

impl Tally {
    pub fn of(reports: &[CheckReport]) -> Self {
        let mut t = Tally::default();
        for r in reports {
            match r.status {
                Status::Pass => t.passed += 1,
                Status::Fail => t.failed += 1,
                Status::Skip => t.skipped += 1,
            }
        }
        t
    }

    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }
}
