//! Average consensus and distributed dual averaging over directed networks
//! whose links drop packets.
//!
//! The state machines in [`consensus`] and [`dual_averaging`] run
//! synchronous rounds against a materialized [`failure::FailureSchedule`].
//! [`matrix`] rebuilds the same dynamics as products of row-stochastic
//! matrices on the augmented graph, where every link gets a buffer agent
//! holding its undelivered mass, and checks the contraction bounds on them.

pub mod bounds;
pub mod consensus;
pub mod dual_averaging;
pub mod error;
pub mod failure;
pub mod graph;
pub mod harness;
pub mod matrix;
mod numeric;

pub use error::{Error, Result};
pub use graph::{augment, AugmentedGraph, DirectedGraph, GraphSpec, NodeKind};
pub use failure::{verify_b_bounded, FailureSchedule};
pub use numeric::fmt_f64;
