//! Decentralized joint sparsity-pattern recovery.
//!
//! A network of `L` nodes each observes `y_l = A_l x_l`, where every `x_l` is
//! `K`-sparse on one shared support. This crate simulates two decentralized
//! greedy solvers on such networks, counting every scalar they transmit:
//!
//! * [`pursuit::ssp_run`]: simultaneous subspace pursuit with every node
//!   exchanging full-length vectors with every other node;
//! * [`pursuit::dcsp_run`]: the collaborative variant where full-length vectors
//!   only travel inside small neighborhoods and the network agrees on a
//!   support by majority vote over `K`-index local estimates.
//!
//! [`cost`] holds the matching closed-form costs, and [`experiment`] the
//! Monte Carlo sweeps exposed by the `dcsp` binary.

pub mod cost;
pub mod experiment;
pub mod linalg;
pub mod network;
pub mod problem;
pub mod pursuit;

pub use cost::{cost_dcsp, cost_ssp, cost_table1, CostParams, TableAlgorithm};
pub use linalg::{IndexMultiset, IndexSet, Matrix};
pub use network::{Network, Topology, WireCounter};
pub use problem::{generate, success, ProblemConfig, ProblemInstance};
pub use pursuit::{dcsp_run, exhaustive_decoder, ssp_run, Algorithm, RunResult};
