//! Qubit routing for CNOT-skeleton circuits by Monte Carlo tree search.

pub mod arch;
pub mod circuit;
pub mod mcts;
pub mod qasm;
pub mod report;
pub mod state;
pub mod verify;

pub use arch::{ArchGraph, DistanceMatrix};
pub use circuit::{Circuit, Gate};
pub use mcts::{transform, MctsParams, Objective, TransformResult};
pub use state::{QubitMapping, RoutingContext, RoutingState};
