//! Divisors, chip-firing, and the Picard group `Pic⁰(D)`.
//!
//! Two divisors are equivalent when their difference is `L · z` for some
//! integer `z`. Equivalence and class labels are decided through the Smith
//! form of the class lattice (see [`crate::algebra::ClassLattice`]).
//!
//! A degree-zero divisor `x` is `w`-reduced when it is nonnegative off `w` and
//! every admissible nonzero firing vector `0 ≤ f ≤ per` drives some vertex
//! other than `w` negative. Which firing vectors are admissible is the
//! [`FiringConvention`]; with `f = per` allowed the condition can never hold,
//! so the default only fires vertices other than `w`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::algebra::{period_vector, AlgebraError, ClassLattice, PeriodVector};
use crate::graph::Digraph;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DivisorError {
    #[error("divisor has {got} entries, expected {expected}")]
    Length { expected: usize, got: usize },
    #[error("degrees differ: {0} vs {1}")]
    DegreeMismatch(i64, i64),
    #[error("divisor has degree {0}, expected 0")]
    NonzeroDegree(i64),
    #[error("enumeration box of {size} candidates exceeds the cap of {cap}")]
    CapExceeded { size: String, cap: u64 },
    #[error("chip count overflow")]
    Overflow,
    #[error("cannot parse divisor `{0}`")]
    Parse(String),
    #[error("vertex {vertex} out of range (n = {n})")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Integer chip assignment on the vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Divisor(pub Vec<i64>);

impl Divisor {
    pub fn zeros(n: usize) -> Self {
        Divisor(vec![0; n])
    }

    pub fn values(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().sum()
    }

    fn to_big(&self) -> Vec<BigInt> {
        self.0.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn check_len(&self, d: &Digraph) -> Result<(), DivisorError> {
        if self.0.len() != d.n() {
            return Err(DivisorError::Length {
                expected: d.n(),
                got: self.0.len(),
            });
        }
        Ok(())
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for Divisor {
    type Err = DivisorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.split_whitespace()
            .map(|t| t.parse::<i64>().map_err(|_| DivisorError::Parse(s.to_string())))
            .collect::<Result<Vec<_>, _>>()
            .map(Divisor)
    }
}

/// `x + L · f`: firing `v` once sends one chip along each out-edge of `v`.
pub fn apply_firing(d: &Digraph, x: &Divisor, f: &[i64]) -> Result<Divisor, DivisorError> {
    x.check_len(d)?;
    if f.len() != d.n() {
        return Err(DivisorError::Length {
            expected: d.n(),
            got: f.len(),
        });
    }
    let mut out = x.0.clone();
    for (tail, _, head) in d.edges() {
        let fv = f[tail];
        out[tail] = out[tail].checked_sub(fv).ok_or(DivisorError::Overflow)?;
        out[head] = out[head].checked_add(fv).ok_or(DivisorError::Overflow)?;
    }
    Ok(Divisor(out))
}

/// `x + L · f` in exact arithmetic.
pub fn apply_firing_exact(d: &Digraph, x: &[BigInt], f: &[BigInt]) -> Vec<BigInt> {
    let mut out = x.to_vec();
    for (tail, _, head) in d.edges() {
        out[tail] -= &f[tail];
        out[head] += &f[tail];
    }
    out
}

/// The Picard group of a digraph, for equivalence tests and class labels.
#[derive(Debug, Clone)]
pub struct PicardGroup<'a> {
    graph: &'a Digraph,
    lattice: ClassLattice,
}

impl<'a> PicardGroup<'a> {
    pub fn new(graph: &'a Digraph) -> Result<Self, DivisorError> {
        Ok(PicardGroup {
            graph,
            lattice: ClassLattice::new(graph)?,
        })
    }

    pub fn lattice(&self) -> &ClassLattice {
        &self.lattice
    }

    /// A witness `z` with `x = y + L · z`, or `None` if `x` and `y` lie in
    /// different classes. Returned witnesses are checked by substitution.
    pub fn equivalent(&self, x: &Divisor, y: &Divisor) -> Result<Option<Vec<BigInt>>, DivisorError> {
        let d = self.graph;
        x.check_len(d)?;
        y.check_len(d)?;
        if x.degree() != y.degree() {
            return Err(DivisorError::DegreeMismatch(x.degree(), y.degree()));
        }
        let n = d.n();
        let diff: Vec<BigInt> = x.0[..n - 1]
            .iter()
            .zip(&y.0[..n - 1])
            .map(|(a, b)| BigInt::from(*a) - b)
            .collect();
        let Some(z) = self.lattice.solve(&diff) else {
            return Ok(None);
        };
        if apply_firing_exact(d, &y.to_big(), &z) != x.to_big() {
            return Err(AlgebraError::Inconsistent(format!(
                "witness {z:?} does not map {y} to {x}"
            ))
            .into());
        }
        Ok(Some(z))
    }

    /// Unique label of the class of a degree-zero divisor: its coordinates in
    /// the basis `{e_i - e_{n-1}}`, transformed by the Smith row transform and
    /// reduced modulo the invariant factors.
    pub fn canonical_form(&self, x: &Divisor) -> Result<Vec<BigInt>, DivisorError> {
        x.check_len(self.graph)?;
        if x.degree() != 0 {
            return Err(DivisorError::NonzeroDegree(x.degree()));
        }
        let n = self.graph.n();
        Ok(self.lattice.residue(&x.to_big()[..n - 1]))
    }

    /// Groups divisors into equivalence classes, preserving first-seen order.
    pub fn classes(&self, divisors: &[Divisor]) -> Result<Vec<Vec<Divisor>>, DivisorError> {
        let mut classes: Vec<Vec<Divisor>> = Vec::new();
        'next: for x in divisors {
            for class in &mut classes {
                if self.equivalent(x, &class[0])?.is_some() {
                    class.push(x.clone());
                    continue 'next;
                }
            }
            classes.push(vec![x.clone()]);
        }
        Ok(classes)
    }
}

pub fn equivalent(d: &Digraph, x: &Divisor, y: &Divisor) -> Result<Option<Vec<BigInt>>, DivisorError> {
    PicardGroup::new(d)?.equivalent(x, y)
}

pub fn canonical_form(d: &Digraph, x: &Divisor) -> Result<Vec<BigInt>, DivisorError> {
    PicardGroup::new(d)?.canonical_form(x)
}

/// Which firing vectors `f` with `0 ≤ f ≤ per`, `f ≠ 0` the reducedness test
/// quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FiringConvention {
    /// Only vectors with `f(w) = 0`.
    #[default]
    RootFixed,
    /// Every vector, including `f = per`. Nothing is reduced under this one.
    Literal,
    /// Every vector except `f = per`.
    ExcludePeriod,
}

/// Precomputed reducedness test for one root and convention.
#[derive(Debug, Clone)]
pub struct ReducedTest {
    n: usize,
    root: usize,
    /// `L · f` for every admissible firing vector.
    moves: Vec<Vec<i64>>,
}

impl ReducedTest {
    pub fn new(
        d: &Digraph,
        per: &PeriodVector,
        root: usize,
        convention: FiringConvention,
        cap: u64,
    ) -> Result<Self, DivisorError> {
        let n = d.n();
        if root >= n {
            return Err(DivisorError::VertexOutOfRange { vertex: root, n });
        }
        let bounds: Vec<u64> = (0..n)
            .map(|v| {
                if v == root && convention == FiringConvention::RootFixed {
                    Ok(0)
                } else {
                    u64::try_from(per.get(v)).map_err(|_| DivisorError::Overflow)
                }
            })
            .collect::<Result<_, _>>()?;
        let size = bounds
            .iter()
            .try_fold(1u64, |acc, &b| acc.checked_mul(b.checked_add(1)?));
        let size = match size {
            Some(s) if s <= cap => s,
            _ => {
                return Err(DivisorError::CapExceeded {
                    size: bounds
                        .iter()
                        .fold(BigInt::from(1), |acc, &b| acc * (b + 1))
                        .to_string(),
                    cap,
                })
            }
        };

        let laplacian = d.laplacian_i64();
        let per_u64 = per.to_u64().ok_or(DivisorError::Overflow)?;
        let mut moves = Vec::with_capacity(size as usize);
        let mut f = vec![0u64; n];
        // odometer over the box, skipping f = 0
        loop {
            let mut v = n;
            loop {
                if v == 0 {
                    return Ok(ReducedTest { n, root, moves });
                }
                v -= 1;
                if f[v] < bounds[v] {
                    f[v] += 1;
                    break;
                }
                f[v] = 0;
            }
            if convention == FiringConvention::ExcludePeriod && f == per_u64 {
                continue;
            }
            let lf: Vec<i64> = laplacian
                .iter()
                .map(|row| row.iter().zip(&f).map(|(a, &b)| a * b as i64).sum())
                .collect();
            moves.push(lf);
        }
    }

    /// Number of admissible nonzero firing vectors.
    pub fn move_count(&self) -> usize {
        self.moves.len()
    }

    pub fn is_reduced(&self, x: &Divisor) -> bool {
        let w = self.root;
        if x.0.len() != self.n || x.degree() != 0 {
            return false;
        }
        if x.0.iter().enumerate().any(|(v, &c)| v != w && c < 0) {
            return false;
        }
        self.moves.iter().all(|lf| {
            x.0.iter()
                .zip(lf)
                .enumerate()
                .any(|(v, (&c, &m))| v != w && c + m < 0)
        })
    }
}

/// Whether `x` is `w`-reduced. Divisors of nonzero degree are never reduced.
pub fn is_w_reduced(
    d: &Digraph,
    x: &Divisor,
    w: usize,
    convention: FiringConvention,
    cap: u64,
) -> Result<bool, DivisorError> {
    x.check_len(d)?;
    let per = period_vector(d)?;
    Ok(ReducedTest::new(d, &per, w, convention, cap)?.is_reduced(x))
}

/// All `w`-reduced divisors, sorted. Candidates range over the box
/// `0 ≤ x(v) < d⁺(v)` for `v ≠ w`: firing `v` alone must drive `v` negative,
/// since it only adds chips elsewhere.
pub fn enumerate_w_reduced(
    d: &Digraph,
    w: usize,
    convention: FiringConvention,
    cap: u64,
) -> Result<Vec<Divisor>, DivisorError> {
    let n = d.n();
    if w >= n {
        return Err(DivisorError::VertexOutOfRange { vertex: w, n });
    }
    let bounds: Vec<i64> = (0..n)
        .map(|v| if v == w { 1 } else { d.out_degree(v) as i64 })
        .collect();
    let size = bounds
        .iter()
        .try_fold(1u64, |acc, &b| acc.checked_mul(b as u64));
    if size.is_none_or(|s| s > cap) {
        return Err(DivisorError::CapExceeded {
            size: bounds
                .iter()
                .fold(BigInt::from(1), |acc, &b| acc * b)
                .to_string(),
            cap,
        });
    }

    let per = period_vector(d)?;
    let test = ReducedTest::new(d, &per, w, convention, cap)?;
    let mut found = Vec::new();
    let mut x = vec![0i64; n];
    loop {
        x[w] = 0;
        x[w] = -x.iter().sum::<i64>();
        let candidate = Divisor(x.clone());
        if test.is_reduced(&candidate) {
            found.push(candidate);
        }
        let mut v = n;
        loop {
            if v == 0 {
                found.sort();
                return Ok(found);
            }
            v -= 1;
            if v == w {
                continue;
            }
            if x[v] + 1 < bounds[v] {
                x[v] += 1;
                break;
            }
            x[v] = 0;
        }
    }
}

/// The `w`-reduced divisors grouped into Picard classes.
#[derive(Debug, Clone)]
pub struct ReducedCensus {
    pub root: usize,
    pub divisors: Vec<Divisor>,
    pub classes: Vec<Vec<Divisor>>,
}

pub fn reduced_census(
    d: &Digraph,
    w: usize,
    convention: FiringConvention,
    cap: u64,
) -> Result<ReducedCensus, DivisorError> {
    let divisors = enumerate_w_reduced(d, w, convention, cap)?;
    let classes = PicardGroup::new(d)?.classes(&divisors)?;
    Ok(ReducedCensus {
        root: w,
        divisors,
        classes,
    })
}

/// `true` if no entry of `z` is nonzero.
pub fn is_zero_vector(z: &[BigInt]) -> bool {
    z.iter().all(Zero::is_zero)
}
