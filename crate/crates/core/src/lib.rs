//! Static quantum games over chi-matrix strategy sets.
//!
//! A static quantum game hands each player a share of a joint state; the
//! players apply trace-preserving completely positive maps to their shares
//! and a referee measures the result to assign payoffs. Expressed in the
//! chi (process) representation, the payoff becomes a multilinear form in
//! the players' chi matrices, and the strategy sets become compact convex
//! spectrahedra. This crate provides:
//!
//! - dense complex linear algebra primitives ([`matrix`]),
//! - channel representations and the trace-preservation constraint that
//!   carves out the strategy sets ([`channels`]),
//! - game definitions, payoff tensors, and payoff evaluation ([`game`]),
//! - concrete game families: the diagonal construction, the Bell-state
//!   example, and classical embeddings ([`constructors`]),
//! - best-response, zero-sum saddle, and Nash solvers with numerical
//!   certificates ([`solvers`]),
//! - randomized/exhaustive property suites used by the CLI ([`verify`]).
//!
//! With the `parallel` feature (on by default) the payoff-tensor build and
//! the bulk property sweeps fan out over rayon; without it they run
//! sequentially with identical results.

pub mod channels;
pub mod constructors;
mod exec;
pub mod game;
pub mod matrix;
pub mod solvers;
pub mod verify;

pub use channels::{ChannelError, ChiMatrix, KrausChannel, OperatorBasis, TracePreservation};
pub use game::{GameError, PayoffTensor, PovmPayoffScheme, StaticQuantumGame};
pub use matrix::{ComplexMatrix, HermitianEigenDecomposition, MatrixError};
pub use solvers::{
    BestResponse, ClassicalSolution, NashResult, RedundancyOutcome, SaddleResult, SolverError,
    StrategyProfile,
};

/// Default cap on the joint Hilbert-space dimension n^N accepted by the
/// payoff-tensor builder. The tensor holds (n^N)^4 complex entries per
/// player, so 16 keeps the footprint at or below ~1 MiB per player.
pub const DEFAULT_MAX_JOINT_DIM: usize = 16;
