//! The rotor-router engine.
//!
//! A [`ChipRotorState`] is a chip position plus one rotor index per vertex.
//! One [`step`] advances the rotor at the chip's vertex to the next edge in
//! cyclic order and moves the chip along that new edge. On a strongly
//! connected digraph the states that recur are exactly the unicycles, and
//! `step` permutes them; this module enumerates them, partitions them into
//! orbits and measures one full period.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::graph::Digraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RotorError {
    #[error("state {0} is not a unicycle, so it is transient and never returns")]
    NotUnicycle(String),
    #[error("state space of {size} states exceeds the cap of {cap}")]
    CapExceeded { size: String, cap: u64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("cannot parse `{input}`: {reason}")]
    Parse { input: String, reason: String },
    #[error("not an arborescence rooted at {root}: {reason}")]
    NotArborescence { root: usize, reason: String },
    #[error("chip is at {chip}, expected it at the root {root}")]
    ChipNotAtRoot { chip: usize, root: usize },
}

/// One edge index per vertex: the rotor at `v` points along `(v, idx[v])`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RotorConfig(pub Vec<usize>);

impl RotorConfig {
    pub fn zeros(n: usize) -> Self {
        RotorConfig(vec![0; n])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Head of the rotor edge at every vertex.
    pub fn targets(&self, d: &Digraph) -> Vec<usize> {
        self.0.iter().enumerate().map(|(v, &k)| d.head(v, k)).collect()
    }
}

impl fmt::Display for RotorConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, k) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for RotorConfig {
    type Err = RotorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.trim()
            .split(',')
            .map(|t| {
                t.trim().parse::<usize>().map_err(|_| RotorError::Parse {
                    input: s.to_string(),
                    reason: format!("`{}` is not an edge index", t.trim()),
                })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(RotorConfig)
    }
}

/// Chip position and rotor configuration. Orders lexicographically by
/// `(chip, rotors)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChipRotorState {
    pub chip: usize,
    pub rotors: RotorConfig,
}

impl ChipRotorState {
    pub fn new(chip: usize, rotors: Vec<usize>) -> Self {
        ChipRotorState {
            chip,
            rotors: RotorConfig(rotors),
        }
    }

    pub fn validate(&self, d: &Digraph) -> Result<(), RotorError> {
        let n = d.n();
        if self.chip >= n {
            return Err(RotorError::InvalidState(format!(
                "chip at {} but n = {n}",
                self.chip
            )));
        }
        if self.rotors.0.len() != n {
            return Err(RotorError::InvalidState(format!(
                "{} rotor indices for {n} vertices",
                self.rotors.0.len()
            )));
        }
        for (v, &k) in self.rotors.0.iter().enumerate() {
            if k >= d.out_degree(v) {
                return Err(RotorError::InvalidState(format!(
                    "rotor index {k} at vertex {v} exceeds out-degree {}",
                    d.out_degree(v)
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for ChipRotorState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chip@{} rotors={}", self.chip, self.rotors)
    }
}

impl FromStr for ChipRotorState {
    type Err = RotorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = |reason: &str| RotorError::Parse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let mut parts = s.split_whitespace();
        let chip = parts
            .next()
            .and_then(|p| p.strip_prefix("chip@"))
            .ok_or_else(|| err("expected `chip@<v>`"))?
            .parse()
            .map_err(|_| err("chip is not a vertex index"))?;
        let rotors = parts
            .next()
            .and_then(|p| p.strip_prefix("rotors="))
            .ok_or_else(|| err("expected `rotors=<i0,...>`"))?
            .parse()?;
        if parts.next().is_some() {
            return Err(err("trailing input"));
        }
        Ok(ChipRotorState { chip, rotors })
    }
}

/// Advance `s` by one rotor-router step in place.
pub fn step_mut(d: &Digraph, s: &mut ChipRotorState) {
    let w = s.chip;
    let k = (s.rotors.0[w] + 1) % d.out_degree(w);
    s.rotors.0[w] = k;
    s.chip = d.head(w, k);
}

/// The rotor-router operation: rotate the rotor at the chip, then move the
/// chip to the head of the new rotor edge.
pub fn step(d: &Digraph, s: &ChipRotorState) -> ChipRotorState {
    let mut next = s.clone();
    step_mut(d, &mut next);
    next
}

/// True iff the rotor edges contain exactly one directed cycle and the chip
/// lies on it.
///
/// The rotor edges form a functional graph (out-degree one everywhere), so the
/// number of cycles equals the number of weakly connected components.
pub fn is_unicycle(d: &Digraph, s: &ChipRotorState) -> bool {
    let n = d.n();
    let next = s.rotors.targets(d);

    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut components = n;
    for (v, &h) in next.iter().enumerate() {
        let (a, b) = (find(&mut parent, v), find(&mut parent, h));
        if a != b {
            parent[a] = b;
            components -= 1;
        }
    }
    if components != 1 {
        return false;
    }

    let mut x = next[s.chip];
    for _ in 0..n {
        if x == s.chip {
            return true;
        }
        x = next[x];
    }
    false
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recurrence {
    Recurrent,
    Transient,
}

/// Simulates from `s` until some state repeats. Returns whether that state is
/// `s` itself, and the number of steps taken to produce the repeat.
pub fn classify_by_simulation(d: &Digraph, s: &ChipRotorState) -> (Recurrence, u64) {
    let mut seen = HashSet::from([s.clone()]);
    let mut cur = s.clone();
    let mut steps = 0u64;
    loop {
        step_mut(d, &mut cur);
        steps += 1;
        if cur == *s {
            return (Recurrence::Recurrent, steps);
        }
        if !seen.insert(cur.clone()) {
            return (Recurrence::Transient, steps);
        }
    }
}

/// Counts gathered over one full period of a unicycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitSummary {
    pub length: u64,
    /// Times the chip left each vertex.
    pub visits: Vec<u64>,
    /// Full turns made by each rotor.
    pub turns: Vec<u64>,
    /// Traversals of each edge, indexed `[tail][index]`.
    pub edge_flow: Vec<Vec<u64>>,
}

impl OrbitSummary {
    /// Traversals summed over parallel edges, keyed by `(tail, head)`.
    pub fn flow_by_endpoints(&self, d: &Digraph) -> BTreeMap<(usize, usize), u64> {
        let mut flows = BTreeMap::new();
        for (tail, k, head) in d.edges() {
            *flows.entry((tail, head)).or_insert(0) += self.edge_flow[tail][k];
        }
        flows
    }
}

/// Runs the rotor-router from a unicycle until it returns.
pub fn run_period(d: &Digraph, s: &ChipRotorState) -> Result<OrbitSummary, RotorError> {
    s.validate(d)?;
    if !is_unicycle(d, s) {
        return Err(RotorError::NotUnicycle(s.to_string()));
    }
    let n = d.n();
    let mut visits = vec![0u64; n];
    let mut edge_flow: Vec<Vec<u64>> = (0..n).map(|v| vec![0; d.out_degree(v)]).collect();
    let mut cur = s.clone();
    let mut length = 0u64;
    loop {
        let w = cur.chip;
        step_mut(d, &mut cur);
        visits[w] += 1;
        edge_flow[w][cur.rotors.0[w]] += 1;
        length += 1;
        if cur == *s {
            break;
        }
    }
    let turns: Vec<u64> = (0..n).map(|v| visits[v] / d.out_degree(v) as u64).collect();
    debug_assert!((0..n).all(|v| visits[v] == turns[v] * d.out_degree(v) as u64));
    debug_assert!(edge_flow
        .iter()
        .enumerate()
        .all(|(v, flows)| flows.iter().all(|&f| f == turns[v])));
    Ok(OrbitSummary {
        length,
        visits,
        turns,
        edge_flow,
    })
}

/// Mixed-radix indexing of all `n · Π d⁺(v)` states; index order is the
/// lexicographic order of `(chip, rotors)`.
#[derive(Debug, Clone)]
pub struct StateSpace {
    degrees: Vec<usize>,
    size: u64,
}

impl StateSpace {
    pub fn new(d: &Digraph, cap: u64) -> Result<Self, RotorError> {
        let degrees: Vec<usize> = (0..d.n()).map(|v| d.out_degree(v)).collect();
        let size = degrees
            .iter()
            .try_fold(d.n() as u64, |acc, &k| acc.checked_mul(k as u64));
        match size {
            Some(size) if size <= cap => Ok(StateSpace { degrees, size }),
            _ => Err(RotorError::CapExceeded {
                size: state_count_string(&degrees),
                cap,
            }),
        }
    }

    pub fn size(&self) -> u64 {
        self.size
    }

    pub fn decode(&self, mut index: u64) -> ChipRotorState {
        let n = self.degrees.len();
        let mut rotors = vec![0; n];
        for v in (0..n).rev() {
            let k = self.degrees[v] as u64;
            rotors[v] = (index % k) as usize;
            index /= k;
        }
        ChipRotorState::new(index as usize, rotors)
    }

    pub fn states(&self) -> impl Iterator<Item = ChipRotorState> + '_ {
        (0..self.size).map(|i| self.decode(i))
    }
}

fn state_count_string(degrees: &[usize]) -> String {
    let size = degrees
        .iter()
        .fold(num_bigint::BigUint::from(degrees.len()), |acc, &k| acc * k);
    size.to_string()
}

/// Every unicycle, each once, in lexicographic order of `(chip, rotors)`.
pub fn enumerate_unicycles(
    d: &Digraph,
    cap: u64,
) -> Result<impl Iterator<Item = ChipRotorState> + '_, RotorError> {
    let space = StateSpace::new(d, cap)?;
    Ok((0..space.size())
        .map(move |i| space.decode(i))
        .filter(move |s| is_unicycle(d, s)))
}

/// One rotor-router orbit, starting at its lexicographically smallest state
/// and listed in step order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Orbit {
    pub states: Vec<ChipRotorState>,
}

impl Orbit {
    pub fn representative(&self) -> &ChipRotorState {
        &self.states[0]
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// Partitions all unicycles into orbits, sorted by representative.
pub fn orbit_partition(d: &Digraph, cap: u64) -> Result<Vec<Orbit>, RotorError> {
    let mut assigned = HashSet::new();
    let mut orbits = Vec::new();
    for start in enumerate_unicycles(d, cap)? {
        if assigned.contains(&start) {
            continue;
        }
        // Scanning in lexicographic order, the first unassigned state of an
        // orbit is its minimum.
        let mut states = vec![start.clone()];
        let mut cur = step(d, &start);
        while cur != start {
            states.push(cur.clone());
            step_mut(d, &mut cur);
        }
        assigned.extend(states.iter().cloned());
        orbits.push(Orbit { states });
    }
    Ok(orbits)
}

/// A spanning in-arborescence: one out-edge index for each vertex except the
/// root, and every vertex has a directed path to the root.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Arborescence {
    pub root: usize,
    /// `edges[v]` is the chosen edge index at `v`; `None` exactly at the root.
    pub edges: Vec<Option<usize>>,
}

impl Arborescence {
    /// Checks shape, index bounds, and that every path ends at the root.
    pub fn validate(&self, d: &Digraph) -> Result<(), RotorError> {
        let n = d.n();
        let bad = |reason: String| RotorError::NotArborescence {
            root: self.root,
            reason,
        };
        if self.root >= n || self.edges.len() != n {
            return Err(bad("wrong number of vertices".into()));
        }
        for (v, e) in self.edges.iter().enumerate() {
            match (v == self.root, e) {
                (true, Some(_)) => return Err(bad("root has an out-edge".into())),
                (false, None) => return Err(bad(format!("vertex {v} has no edge"))),
                (false, Some(k)) if *k >= d.out_degree(v) => {
                    return Err(bad(format!("edge index {k} out of range at {v}")))
                }
                _ => {}
            }
        }
        for start in 0..n {
            let mut x = start;
            let mut hops = 0;
            while let Some(k) = self.edges[x] {
                x = d.head(x, k);
                hops += 1;
                if hops > n {
                    return Err(bad(format!("cycle reachable from {start}")));
                }
            }
        }
        Ok(())
    }

    /// Edges as `(tail, head)` pairs.
    pub fn arcs(&self, d: &Digraph) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(v, e)| e.map(|k| (v, d.head(v, k))))
            .collect()
    }
}

/// All spanning in-arborescences rooted at `w`, by backtracking over one
/// out-edge choice per vertex. Parallel edges give distinct arborescences.
pub fn enumerate_arborescences(d: &Digraph, w: usize) -> Vec<Arborescence> {
    fn extend(
        d: &Digraph,
        w: usize,
        v: usize,
        edges: &mut Vec<Option<usize>>,
        out: &mut Vec<Arborescence>,
    ) {
        if v == d.n() {
            out.push(Arborescence {
                root: w,
                edges: edges.clone(),
            });
            return;
        }
        if v == w {
            return extend(d, w, v + 1, edges, out);
        }
        for k in 0..d.out_degree(v) {
            // Chosen edges are acyclic, so this walk ends at the root, at an
            // undecided vertex, or back at `v` (a cycle).
            let mut x = d.head(v, k);
            let closes_cycle = loop {
                if x == v {
                    break true;
                }
                match edges[x] {
                    Some(j) => x = d.head(x, j),
                    None => break false,
                }
            };
            if !closes_cycle {
                edges[v] = Some(k);
                extend(d, w, v + 1, edges, out);
                edges[v] = None;
            }
        }
    }

    let mut out = Vec::new();
    extend(d, w, 0, &mut vec![None; d.n()], &mut out);
    out
}

/// Adds the out-edge `(w, k)` to an arborescence rooted at `w` and puts the
/// chip on `w`. The result is a unicycle.
pub fn arborescence_to_unicycle(
    d: &Digraph,
    t: &Arborescence,
    k: usize,
) -> Result<ChipRotorState, RotorError> {
    t.validate(d)?;
    let w = t.root;
    if k >= d.out_degree(w) {
        return Err(RotorError::InvalidState(format!(
            "edge index {k} out of range at root {w}"
        )));
    }
    let rotors = t
        .edges
        .iter()
        .map(|e| e.unwrap_or(k))
        .collect::<Vec<_>>();
    Ok(ChipRotorState::new(w, rotors))
}

/// Inverse of [`arborescence_to_unicycle`]: strips the rotor at the chip.
pub fn unicycle_to_arborescence(
    d: &Digraph,
    s: &ChipRotorState,
    root: usize,
) -> Result<(Arborescence, usize), RotorError> {
    s.validate(d)?;
    if s.chip != root {
        return Err(RotorError::ChipNotAtRoot {
            chip: s.chip,
            root,
        });
    }
    if !is_unicycle(d, s) {
        return Err(RotorError::NotUnicycle(s.to_string()));
    }
    let mut edges: Vec<Option<usize>> = s.rotors.0.iter().copied().map(Some).collect();
    let k = edges[root].take().expect("root has a rotor");
    let t = Arborescence { root, edges };
    t.validate(d)?;
    Ok((t, k))
}

/// DOT rendering of a state: rotor edges solid black, the other edges gray,
/// the chip's vertex double-circled.
pub fn to_dot(d: &Digraph, s: &ChipRotorState) -> String {
    let mut out = String::from("digraph rotor {\n  node [shape=circle];\n");
    for v in 0..d.n() {
        let shape = if v == s.chip { "doublecircle" } else { "circle" };
        out.push_str(&format!("  {v} [shape={shape}];\n"));
    }
    for (tail, k, head) in d.edges() {
        let style = if s.rotors.0[tail] == k {
            "color=black, style=solid"
        } else {
            "color=gray"
        };
        out.push_str(&format!("  {tail} -> {head} [{style}];\n"));
    }
    out.push_str("}\n");
    out
}
