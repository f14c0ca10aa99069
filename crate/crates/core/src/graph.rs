//! Multidigraphs with a fixed cyclic rotor order at every vertex.
//!
//! Vertices are `0..n`. The out-edges of `v` are stored as the ordered list of
//! their heads; the list order is the rotor order, and parallel edges are
//! repeated entries. An edge is identified by `(tail, index)`, never by its
//! endpoints, so parallel edges stay distinct rotor positions.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("vertex {0} has no out-edge line")]
    MissingVertex(usize),
    #[error("vertex {0} has no out-edges")]
    NoOutEdges(usize),
    #[error("digraph is not strongly connected (vertex {0} unreachable in one direction)")]
    NotStronglyConnected(usize),
    #[error("need at least 2 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("edge index {index} out of range at vertex {vertex} (out-degree {degree})")]
    EdgeIndexOutOfRange {
        vertex: usize,
        index: usize,
        degree: usize,
    },
}

/// A validated strongly connected loopless multidigraph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Digraph {
    out: Vec<Vec<usize>>,
}

impl Digraph {
    /// Builds a digraph from per-vertex head lists (in rotor order) and
    /// validates it.
    pub fn from_out_lists(out: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let n = out.len();
        if n < 2 {
            return Err(GraphError::TooFewVertices(n));
        }
        for (v, heads) in out.iter().enumerate() {
            if heads.is_empty() {
                return Err(GraphError::NoOutEdges(v));
            }
            for &h in heads {
                if h >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: h, n });
                }
                if h == v {
                    return Err(GraphError::SelfLoop(v));
                }
            }
        }
        let d = Digraph { out };
        if let Some(v) = d.first_unreachable() {
            return Err(GraphError::NotStronglyConnected(v));
        }
        Ok(d)
    }

    pub fn n(&self) -> usize {
        self.out.len()
    }

    /// Total number of edges, counting multiplicity.
    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Heads of the out-edges of `v`, in rotor order.
    pub fn heads(&self, v: usize) -> &[usize] {
        &self.out[v]
    }

    /// Head of the edge `(v, k)`.
    pub fn head(&self, v: usize, k: usize) -> usize {
        self.out[v][k]
    }

    pub fn out_degree(&self, v: usize) -> usize {
        self.out[v].len()
    }

    pub fn in_degree(&self, v: usize) -> usize {
        self.out.iter().flatten().filter(|&&h| h == v).count()
    }

    /// Number of parallel edges from `u` to `v`.
    pub fn multiplicity(&self, u: usize, v: usize) -> usize {
        self.out[u].iter().filter(|&&h| h == v).count()
    }

    pub fn out_neighbors(&self, v: usize) -> BTreeSet<usize> {
        self.out[v].iter().copied().collect()
    }

    pub fn in_neighbors(&self, v: usize) -> BTreeSet<usize> {
        (0..self.n()).filter(|&u| self.out[u].contains(&v)).collect()
    }

    /// All edges as `(tail, index, head)` triples, ordered by tail then index.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(v, hs)| hs.iter().enumerate().map(move |(k, &h)| (v, k, h)))
    }

    /// The cyclic successor of edge index `k` at `v`.
    pub fn rotate(&self, v: usize, k: usize) -> Result<usize, GraphError> {
        let degree = self.out_degree(v);
        if k >= degree {
            return Err(GraphError::EdgeIndexOutOfRange {
                vertex: v,
                index: k,
                degree,
            });
        }
        Ok((k + 1) % degree)
    }

    /// The Laplacian: `-d⁺(i)` on the diagonal, `d(j, i)` at `(i, j)`.
    /// Columns sum to zero.
    pub fn laplacian(&self) -> IntMatrix {
        let n = self.n();
        let mut l = IntMatrix::zeros(n, n);
        for (tail, _, head) in self.edges() {
            l[(head, tail)] += 1;
            l[(tail, tail)] -= 1;
        }
        l
    }

    /// The Laplacian as plain machine integers, for enumeration-heavy loops.
    pub(crate) fn laplacian_i64(&self) -> Vec<Vec<i64>> {
        let n = self.n();
        let mut l = vec![vec![0i64; n]; n];
        for (tail, _, head) in self.edges() {
            l[head][tail] += 1;
            l[tail][tail] -= 1;
        }
        l
    }

    /// Returns a vertex that is not mutually reachable with vertex 0, if any.
    fn first_unreachable(&self) -> Option<usize> {
        let n = self.n();
        let mut reverse = vec![Vec::new(); n];
        for (tail, _, head) in self.edges() {
            reverse[head].push(tail);
        }
        let fwd = sweep(&self.out, 0);
        let bwd = sweep(&reverse, 0);
        (0..n).find(|&v| !fwd[v] || !bwd[v])
    }

    /// The directed cycle `0 → 1 → … → n-1 → 0`.
    pub fn directed_cycle(n: usize) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices(n));
        }
        Self::from_out_lists((0..n).map(|i| vec![(i + 1) % n]).collect())
    }

    /// Replaces each undirected edge by two antiparallel edges. The rotor order
    /// at each vertex follows the listing order of `edges`.
    pub fn bidirected(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices(n));
        }
        let mut out = vec![Vec::new(); n];
        for &(a, b) in edges {
            for v in [a, b] {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
            }
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            out[a].push(b);
            out[b].push(a);
        }
        Self::from_out_lists(out)
    }

    /// A random Hamiltonian cycle plus `extra_edges` uniformly random non-loop
    /// edges. Strongly connected by construction; deterministic in `seed`.
    pub fn random(n: usize, extra_edges: usize, seed: u64) -> Result<Self, GraphError> {
        if n < 2 {
            return Err(GraphError::TooFewVertices(n));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut rng);
        let mut out = vec![Vec::new(); n];
        for i in 0..n {
            out[perm[i]].push(perm[(i + 1) % n]);
        }
        for _ in 0..extra_edges {
            let u = rng.gen_range(0..n);
            let mut v = rng.gen_range(0..n - 1);
            if v >= u {
                v += 1;
            }
            out[u].push(v);
        }
        Self::from_out_lists(out)
    }

    /// Looks up one of the built-in fixtures `G1`..`G4` (case-insensitive).
    pub fn fixture(name: &str) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "g1" => Some(fixtures::g1()),
            "g2" => Some(fixtures::g2()),
            "g3" => Some(fixtures::g3()),
            "g4" => Some(fixtures::g4()),
            _ => None,
        }
    }
}

fn sweep(adj: &[Vec<usize>], start: usize) -> Vec<bool> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(v) = queue.pop_front() {
        for &h in &adj[v] {
            if !seen[h] {
                seen[h] = true;
                queue.push_back(h);
            }
        }
    }
    seen
}

/// Named fixture graphs used throughout the tests and the CLI.
pub mod fixtures {
    use super::Digraph;

    /// Directed 2-cycle.
    pub fn g1() -> Digraph {
        Digraph::from_out_lists(vec![vec![1], vec![0]]).unwrap()
    }

    /// Directed 3-cycle.
    pub fn g2() -> Digraph {
        Digraph::directed_cycle(3).unwrap()
    }

    /// Edges 0→1, 1→0, 1→2, 2→0, with rotor order (→0, →2) at vertex 1.
    pub fn g3() -> Digraph {
        Digraph::from_out_lists(vec![vec![1], vec![0, 2], vec![0]]).unwrap()
    }

    /// Bidirected triangle.
    pub fn g4() -> Digraph {
        Digraph::bidirected(3, &[(0, 1), (1, 2), (2, 0)]).unwrap()
    }

    pub fn all() -> Vec<(&'static str, Digraph)> {
        vec![("G1", g1()), ("G2", g2()), ("G3", g3()), ("G4", g4())]
    }
}

/// Serializes in the graph file format; `parse` reads it back unchanged.
impl fmt::Display for Digraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "n {}", self.n())?;
        for (v, heads) in self.out.iter().enumerate() {
            write!(f, "{v}:")?;
            for h in heads {
                write!(f, " {h}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

impl FromStr for Digraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_digraph(s)
    }
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GraphError {
    GraphError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

/// Byte-offset tokens of a line, with 1-based columns.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    line.split_ascii_whitespace().map(move |tok| {
        let offset = tok.as_ptr() as usize - line.as_ptr() as usize;
        (line[..offset].chars().count() + 1, tok)
    })
}

/// Parses the text graph format:
///
/// ```text
/// # comment
/// n 3
/// 0: 1
/// 1: 0 2
/// 2: 0
/// ```
///
/// Blank lines and `#` lines are ignored. Every vertex needs exactly one
/// line listing its out-edge heads in rotor order.
pub fn parse_digraph(text: &str) -> Result<Digraph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        });

    let (lineno, header) = lines
        .next()
        .ok_or_else(|| syntax(1, 1, "missing `n <count>` header"))?;
    let mut toks = tokens(header);
    match toks.next() {
        Some((_, "n")) => {}
        Some((col, _)) => return Err(syntax(lineno, col, "expected `n <count>` header")),
        None => unreachable!("blank lines are filtered"),
    }
    let (col, count) = toks
        .next()
        .ok_or_else(|| syntax(lineno, header.len() + 1, "missing vertex count"))?;
    let n: usize = count
        .parse()
        .map_err(|_| syntax(lineno, col, format!("invalid vertex count `{count}`")))?;
    if let Some((col, _)) = toks.next() {
        return Err(syntax(lineno, col, "unexpected token after vertex count"));
    }

    let mut out: Vec<Option<Vec<usize>>> = vec![None; n];
    for (lineno, line) in lines {
        let Some(colon) = line.find(':') else {
            let col = tokens(line).next().map_or(1, |(c, _)| c);
            return Err(syntax(lineno, col, "expected `<vertex>: <heads...>`"));
        };
        let label = &line[..colon];
        let label_col = tokens(label).next().map_or(colon + 1, |(c, _)| c);
        let v: usize = label
            .trim()
            .parse()
            .map_err(|_| syntax(lineno, label_col, format!("invalid vertex `{}`", label.trim())))?;
        if v >= n {
            return Err(GraphError::VertexOutOfRange { vertex: v, n });
        }
        if out[v].is_some() {
            return Err(syntax(lineno, label_col, format!("duplicate line for vertex {v}")));
        }
        let rest = &line[colon + 1..];
        let base = line[..colon + 1].chars().count();
        let mut heads = Vec::new();
        for (col, tok) in tokens(rest) {
            let h: usize = tok
                .parse()
                .map_err(|_| syntax(lineno, base + col, format!("invalid vertex `{tok}`")))?;
            heads.push(h);
        }
        out[v] = Some(heads);
    }

    let out = out
        .into_iter()
        .enumerate()
        .map(|(v, heads)| heads.ok_or(GraphError::MissingVertex(v)))
        .collect::<Result<Vec<_>, _>>()?;
    Digraph::from_out_lists(out)
}

/// Column sums of an integer matrix; zero for every Laplacian.
pub fn column_sums(m: &IntMatrix) -> Vec<BigInt> {
    (0..m.cols())
        .map(|j| (0..m.rows()).map(|i| &m[(i, j)]).sum())
        .collect()
}
