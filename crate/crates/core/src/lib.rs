//! Rotor-routing on strongly connected multidigraphs, together with the exact
//! integer algebra around it: Laplacians, period vectors, arborescence counts,
//! Smith normal form, the Picard group and reduced divisors.
//!
//! The [`verify`] module turns the orbit-length, orbit-count and Picard-group
//! statements into executable checks that compare a brute-force combinatorial
//! computation against an independent algebraic one.

pub mod algebra;
pub mod divisors;
pub mod graph;
pub mod rotor;
pub mod verify;

pub use algebra::{IntMatrix, PeriodVector, PicardSummary, SmithDecomposition};
pub use divisors::{Divisor, FiringConvention};
pub use graph::Digraph;
pub use rotor::{ChipRotorState, OrbitSummary, RotorConfig};

/// Default bound on the number of states any exhaustive enumeration may visit.
pub const DEFAULT_CAP: u64 = 10_000_000;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Rotor(#[from] rotor::RotorError),
    #[error(transparent)]
    Algebra(#[from] algebra::AlgebraError),
    #[error(transparent)]
    Divisor(#[from] divisors::DivisorError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
