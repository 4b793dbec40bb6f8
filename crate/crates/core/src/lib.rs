//! Permutation-uniform Markov chains and Markovian exponential families on
//! finite state spaces, with exponential random graph and multigraph models
//! built on top of them.
//!
//! The modules follow the layers of the theory:
//!
//! * [`space`], [`perm`], [`matrix`]: state spaces, permutation families,
//!   probability vectors and transition matrices;
//! * [`puniform`]: detecting p-uniformity and moving between a chain and
//!   its iid companion sequence;
//! * [`expfam`]: exponential families of pmfs and of transition matrices;
//! * [`netstat`]: graph statistics, dyadic factorizations, isomorphism
//!   classes and exchangeability;
//! * [`ermgm`]: dyadically independent multigraph models and closed-form
//!   estimation;
//! * [`simulate`]: chain sampling and convergence diagnostics;
//! * [`oracle`]: exhaustive reference computations used by the tests.

pub mod ermgm;
pub mod error;
pub mod expfam;
pub mod io;
pub mod matrix;
pub mod models;
pub mod netstat;
pub mod oracle;
pub mod perm;
pub mod puniform;
pub mod rng;
pub mod simulate;
pub mod space;

mod numeric;

pub use error::{Error, Result};
pub use expfam::{CefSpec, ExpFamilySpec, MefSpec, ParameterMap};
pub use matrix::{PairTable, Pmf, StochasticMatrix};
pub use perm::{FamilyKind, PermutationFamily};
pub use puniform::{PuniformWitness, Trajectory};
pub use space::{Multigraph, SpaceKind, StateSpace};
