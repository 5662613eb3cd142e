//! Numerical toolkit for testing unitarily invariant properties of bipartite
//! quantum states on a small number of copies.
//!
//! The library is organized bottom-up:
//!
//! * [`hilbert`] — dense operators and states on tensor-product spaces,
//!   partial traces, distances, vectorization.
//! * [`young`] — integer partition/tableau combinatorics and irrep dimensions.
//! * [`symrep`] — symmetric-group representations: permutation actions on
//!   `(C^d)^{⊗N}` and Young's orthogonal irrep matrices.
//! * [`schur`] — Schur bases: unitary changes of basis realizing the
//!   decomposition `(C^d)^{⊗N} ≅ ⊕_λ V_λ ⊗ W_λ`, single-sided and bipartite.
//! * [`twirl`] — exact group averages (collective Haar twirls, twirls over the
//!   stabilizer of a basis vector) plus two independent cross-checks: a
//!   commutant-projection route and a seeded Monte-Carlo route.
//! * [`testers`] — transformations of two-outcome tests on `N` copies of a
//!   bipartite state: the one-sided twirl, localization to Alice's side, and
//!   the purity projector.
//! * [`locc`] — the one-way LOCC measurement protocol, its simulation, and
//!   exact amplification-error tails.
//! * [`properties`] — Schmidt-rank distances, Rényi entropies, weak Schur
//!   sampling distributions, bond-dimension profiles.
//! * [`hardness`] — hard instance pairs for sample-complexity lower bounds and
//!   their twirled `N`-copy states.
//! * [`blockenc`] — exact block-encoding arithmetic (LCU, scaling,
//!   reflections and projectors).
//! * [`harness`] — configuration-driven experiment suites with JSON/CSV
//!   reports; the CLI crate is a thin wrapper around this module.
//!
//! The core is generic over the real scalar via [`Scalar`]; the aliases below
//! fix `f64` for everyday use.

pub mod blockenc;
pub mod harness;
pub mod hardness;
pub mod hilbert;
pub mod locc;
pub mod properties;
pub mod schur;
pub mod symrep;
pub mod testers;
pub mod twirl;
pub mod young;

mod scalar;

pub use scalar::{CMatrix, CVector, RMatrix, Scalar};

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A dimension or layout argument is inconsistent with the data.
    #[error("shape error: {0}")]
    Shape(String),
    /// An argument violates a documented precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A matrix fails a required structural property (unitarity,
    /// positivity, normalization, ...) beyond tolerance.
    #[error("numerical validation failed: {0}")]
    Validation(String),
    /// A requested problem size exceeds the dense-numerics guard.
    #[error("size guard exceeded: {0}")]
    TooLarge(String),
    /// Configuration file problems (parse errors, bad field values).
    #[error("config error: {0}")]
    Config(String),
    /// I/O while reading configs or writing reports.
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

// Everyday concrete types: `f64` scalars.
pub type Operator = hilbert::Operator<f64>;
pub type StateVector = hilbert::StateVector<f64>;
pub type SchurBasis = schur::SchurBasis<f64>;
pub type BipartiteSchurBasis = schur::BipartiteSchurBasis<f64>;
pub type Tester = testers::Tester<f64>;
pub type LocalTester = testers::LocalTester<f64>;
pub type BipartitePureState = properties::BipartitePureState<f64>;
pub type HardInstance = hardness::HardInstance<f64>;
pub type TwirledPair = hardness::TwirledPair<f64>;
pub type BlockEncoding = blockenc::BlockEncoding<f64>;
pub type StatePrepPair = blockenc::StatePrepPair<f64>;
