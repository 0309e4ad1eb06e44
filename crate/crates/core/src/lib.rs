//! QUBO local search.
//!
//! Large combinatorial problems are improved by repeatedly extracting a small
//! sub-problem around the incumbent, writing it as a QUBO that fits a
//! capacity-limited annealer, solving it, and accepting strict improvements.
//! Two modeling strategies are compared: penalized block reassignments
//! (C-QUBO-LS, QLS) and unconstrained move QUBOs whose every assignment is
//! feasible (U-QUBO-LS).
//!
//! Problems: quadratic assignment ([`qap`]), minimum 2-sum ([`m2sp`]),
//! symmetric TSP ([`tsp`]) and balanced graph partitioning ([`partition`]).

pub mod annealer;
pub mod driver;
pub mod error;
pub mod generate;
pub mod graph;
pub mod m2sp;
pub mod partition;
pub mod qap;
pub mod qubo;
pub mod rational;
pub mod tsp;

pub use error::{Error, Result};
pub use qubo::{BitString, PenaltyConfig, QuboBuilder, QuboModel};
pub use rational::Rational;
