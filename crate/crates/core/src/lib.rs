//! Simulation of privacy-preserving distributed average consensus.
//!
//! Graphs and solvers ([`graph`], [`linear`], [`pdmm`]), noise-insertion
//! mechanisms ([`perturbation`]), the passive adversary's view
//! ([`adversary`]), mutual-information metrics ([`info`]) and the
//! Monte-Carlo experiments built from them ([`experiment`]).

pub mod adversary;
pub mod error;
pub mod experiment;
pub mod graph;
pub mod info;
pub mod linalg;
pub mod linear;
pub mod pdmm;
pub mod perturbation;
pub mod rng;
pub mod run;

pub use error::{Error, Result};
pub use graph::{CorruptionModel, Graph};
pub use perturbation::{MechanismConfig, MechanismKind, Network, SolverKind};
pub use run::ConsensusRun;
