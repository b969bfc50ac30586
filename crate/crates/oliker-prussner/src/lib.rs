//! Alexandrov-style solver for the Monge-Ampere equation in 2D.
//!
//! The discrete problem prescribes the Lebesgue measure of the
//! subdifferential of a convex nodal function at every interior node of a
//! lattice-based nodal set, with Dirichlet data on boundary nodes. The crate
//! provides the geometric machinery (convex envelopes as lifted lower hulls,
//! subdifferential cells), a monotone Gauss-Seidel solver, the discrete
//! second-difference norm suite used to measure convergence, and stability
//! diagnostics built on contact sets.
//!
//! See the `examples/` directory for runnable entry points per capability;
//! the `op-ma` binary drives convergence studies and diagnostics sweeps.

pub mod assembly;
pub mod cli;
pub mod diagnostics;
pub mod domain_nodes;
pub mod envelope;
pub mod error;
pub mod geom;
pub mod norms;
pub mod problems;
pub mod report;
pub mod solver;
pub mod subdifferential;

pub use domain_nodes::{Domain, NodalFunction, NodalSet, NodeId};
pub use envelope::LowerEnvelope;
pub use error::{Error, Result};
pub use geom::Point2;
