//! Exact integer linear algebra over the digraph Laplacian.
//!
//! Arborescence counts come from the directed matrix-tree theorem; the period
//! vector is obtained from those counts; the Picard group is read off the
//! Smith normal form of the class lattice, which is the Laplacian with its last
//! row deleted. Expressed in the basis `{e_i - e_{n-1}}` of the degree-zero
//! lattice, every Laplacian column has its first `n - 1` entries as
//! coordinates, so that matrix generates `Im(L)` inside `Z^{n-1}`.

mod det;
mod matrix;
mod snf;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::graph::Digraph;

pub use det::det_exact;
pub use matrix::IntMatrix;
pub use snf::{smith_normal_form, SmithDecomposition};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AlgebraError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    /// An identity that holds for every strongly connected digraph failed.
    /// This is a bug, not a property of the input.
    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

/// Number of spanning in-arborescences rooted at `w`: the determinant of the
/// out-degree Laplacian `-Lᵀ` with row and column `w` deleted.
pub fn arborescence_count(d: &Digraph, w: usize) -> BigInt {
    let q = d.laplacian().transpose().neg();
    det_exact(&q.minor(w, w)).expect("minor of a square matrix is square")
}

pub fn arborescence_counts(d: &Digraph) -> Vec<BigInt> {
    (0..d.n()).map(|w| arborescence_count(d, w)).collect()
}

/// The primitive positive integer kernel vector of the Laplacian.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PeriodVector(Vec<BigInt>);

impl PeriodVector {
    pub fn as_slice(&self) -> &[BigInt] {
        &self.0
    }

    pub fn get(&self, v: usize) -> &BigInt {
        &self.0[v]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entries as `u64`, or `None` if any does not fit.
    pub fn to_u64(&self) -> Option<Vec<u64>> {
        self.0.iter().map(|x| u64::try_from(x).ok()).collect()
    }
}

fn gcd_all<'a>(xs: impl IntoIterator<Item = &'a BigInt>) -> BigInt {
    xs.into_iter().fold(BigInt::zero(), |g, x| g.gcd(x))
}

fn check_period(d: &Digraph, per: &[BigInt]) -> Result<(), AlgebraError> {
    if per.iter().any(|x| !x.is_positive()) {
        return Err(AlgebraError::Inconsistent(format!(
            "period vector has a non-positive entry: {per:?}"
        )));
    }
    if !gcd_all(per).is_one() {
        return Err(AlgebraError::Inconsistent("period vector is not primitive".into()));
    }
    if d.laplacian().mul_vec(per).iter().any(|x| !x.is_zero()) {
        return Err(AlgebraError::Inconsistent(format!(
            "L·per ≠ 0 for per = {per:?}"
        )));
    }
    Ok(())
}

/// `per(v) = T(D, v) / gcd_u T(D, u)`, checked against `L · per = 0`.
pub fn period_vector(d: &Digraph) -> Result<PeriodVector, AlgebraError> {
    let counts = arborescence_counts(d);
    let g = gcd_all(&counts);
    if g.is_zero() {
        return Err(AlgebraError::Inconsistent("all arborescence counts vanish".into()));
    }
    let per: Vec<BigInt> = counts.iter().map(|t| t / &g).collect();
    check_period(d, &per)?;
    Ok(PeriodVector(per))
}

/// `gcd_v T(D, v)`, which also equals `T(D, w) / per(w)` for every `w`.
pub fn pham_index(d: &Digraph) -> Result<BigInt, AlgebraError> {
    let counts = arborescence_counts(d);
    let g = gcd_all(&counts);
    let per = period_vector(d)?;
    for (w, t) in counts.iter().enumerate() {
        let (q, r) = t.div_rem(per.get(w));
        if !r.is_zero() || q != g {
            return Err(AlgebraError::Inconsistent(format!(
                "T(D,{w})/per({w}) = {t}/{} differs from gcd {g}",
                per.get(w)
            )));
        }
    }
    Ok(g)
}

/// Order and invariant factors of `Pic⁰(D)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PicardSummary {
    /// Invariant factors greater than one, in divisibility order.
    pub invariant_factors: Vec<BigInt>,
    pub order: BigInt,
}

/// The Laplacian without its last row, with its Smith decomposition. This is
/// the relation matrix of `Pic⁰(D)` in the basis `{e_i - e_{n-1}}`.
#[derive(Debug, Clone)]
pub struct ClassLattice {
    relations: IntMatrix,
    snf: SmithDecomposition,
    factors: Vec<BigInt>,
}

impl ClassLattice {
    pub fn new(d: &Digraph) -> Result<Self, AlgebraError> {
        let n = d.n();
        let relations = d.laplacian().without_row(n - 1);
        let snf = smith_normal_form(&relations);
        let factors = snf.diagonal();
        if factors.len() != n - 1 || factors.iter().any(Zero::is_zero) {
            return Err(AlgebraError::Inconsistent(format!(
                "class lattice has rank {} < {}",
                snf.rank(),
                n - 1
            )));
        }
        Ok(ClassLattice {
            relations,
            snf,
            factors,
        })
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    pub fn decomposition(&self) -> &SmithDecomposition {
        &self.snf
    }

    /// All `n - 1` diagonal entries of the Smith form, including ones.
    pub fn diagonal(&self) -> &[BigInt] {
        &self.factors
    }

    pub fn summary(&self) -> PicardSummary {
        PicardSummary {
            invariant_factors: self.factors.iter().filter(|s| !s.is_one()).cloned().collect(),
            order: self.factors.iter().product(),
        }
    }

    /// Class label of the lattice point with coordinates `b` (length `n - 1`):
    /// `U · b` reduced modulo the invariant factors.
    pub fn residue(&self, b: &[BigInt]) -> Vec<BigInt> {
        self.snf
            .u
            .mul_vec(b)
            .iter()
            .zip(&self.factors)
            .map(|(c, s)| c.mod_floor(s))
            .collect()
    }

    /// Some `z ∈ Z^n` with `relations · z = b`, if one exists.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        let c = self.snf.u.mul_vec(b);
        let mut y = vec![BigInt::zero(); self.relations.cols()];
        for (i, (ci, si)) in c.iter().zip(&self.factors).enumerate() {
            let (q, r) = ci.div_rem(si);
            if !r.is_zero() {
                return None;
            }
            y[i] = q;
        }
        Some(self.snf.v.mul_vec(&y))
    }
}

/// `|Pic⁰(D)|` from the Smith form of the class lattice, cross-checked
/// against the Pham index.
pub fn picard_summary(d: &Digraph) -> Result<PicardSummary, AlgebraError> {
    let summary = ClassLattice::new(d)?.summary();
    let pham = pham_index(d)?;
    if summary.order != pham {
        return Err(AlgebraError::Inconsistent(format!(
            "Picard order {} differs from Pham index {pham}",
            summary.order
        )));
    }
    Ok(summary)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn reduced_matrix_determinant_g3() {
        let q = g3().laplacian().transpose().neg();
        let reduced = q.minor(0, 0);
        assert_eq!(reduced, IntMatrix::from_rows(&[[2, -1], [0, 1]]));
        assert_eq!(det_exact(&reduced).unwrap(), BigInt::from(2));
    }

    #[test]
    fn arborescence_counts_fixtures() {
        assert_eq!(arborescence_counts(&g1()), ints(&[1, 1]));
        assert_eq!(arborescence_counts(&g2()), ints(&[1, 1, 1]));
        assert_eq!(arborescence_counts(&g3()), ints(&[2, 1, 1]));
        assert_eq!(arborescence_counts(&g4()), ints(&[3, 3, 3]));
    }

    #[test]
    fn period_vectors() {
        assert_eq!(period_vector(&g2()).unwrap().as_slice(), ints(&[1, 1, 1]));
        assert_eq!(period_vector(&g3()).unwrap().as_slice(), ints(&[2, 1, 1]));
        assert_eq!(period_vector(&g4()).unwrap().as_slice(), ints(&[1, 1, 1]));
    }

    #[test]
    fn pham_indices() {
        assert_eq!(pham_index(&g1()).unwrap(), BigInt::from(1));
        assert_eq!(pham_index(&g3()).unwrap(), BigInt::from(1));
        assert_eq!(pham_index(&g4()).unwrap(), BigInt::from(3));
    }

    #[test]
    fn picard_fixtures() {
        let p = picard_summary(&g2()).unwrap();
        assert_eq!(p.order, BigInt::from(1));
        assert!(p.invariant_factors.is_empty());
        assert_eq!(picard_summary(&g3()).unwrap().order, BigInt::from(1));
        let p = picard_summary(&g4()).unwrap();
        assert_eq!(p.order, BigInt::from(3));
        assert_eq!(p.invariant_factors, ints(&[3]));
    }

    #[test]
    fn check_period_rejects_bad_vectors() {
        assert!(check_period(&g3(), &ints(&[1, 1, 1])).is_err());
        assert!(check_period(&g3(), &ints(&[4, 2, 2])).is_err());
        assert!(check_period(&g3(), &ints(&[2, 1, 1])).is_ok());
    }

    #[test]
    fn solve_round_trips() {
        let lattice = ClassLattice::new(&g4()).unwrap();
        let z = ints(&[3, -1, 4]);
        let b = lattice.relations().mul_vec(&z);
        let found = lattice.solve(&b).unwrap();
        assert_eq!(lattice.relations().mul_vec(&found), b);
        assert!(lattice.solve(&ints(&[1, -1])).is_none());
    }

    #[test]
    fn multigraph_counts_parallel_edges() {
        // 0 ⇉ 1 (twice), 1 → 0
        let d = Digraph::from_out_lists(vec![vec![1, 1], vec![0]]).unwrap();
        assert_eq!(arborescence_counts(&d), ints(&[1, 2]));
        assert_eq!(period_vector(&d).unwrap().as_slice(), ints(&[1, 2]));
        assert_eq!(pham_index(&d).unwrap(), BigInt::from(1));
    }
}
