//! Planning minimum-length observation tours for a single camera-carrying
//! observer that must view `n` directed objects.
//!
//! An object is observed from anywhere inside its *effective region*, an
//! annular sector in front of the object, and the quality of an observation
//! decays with distance and viewing deviation. A tour is feasible when the
//! summed quality over all objects reaches a threshold `q*`. The pipeline is:
//!
//! 1. [`discretize`] meshes each effective region into candidate observation
//!    points whose induced error is bounded by a user-chosen `epsilon`.
//! 2. [`orders`] proposes visiting orders (randomized, greedy, TSP-flavoured,
//!    or exhaustive for small `n`).
//! 3. [`pareto`] runs a label-correcting dynamic program over a fixed order,
//!    trading path length against accumulated quality, and reconstructs the
//!    shortest feasible closed tour. One stop may cover a run of consecutive
//!    objects when it sits inside all of their regions.
//! 4. [`lower_bound`] bounds any feasible tour from below via a spanning tree
//!    over region-to-region clearances, and [`ilp_export`] emits the exact
//!    integer model in LP format for external solvers.
//!
//! [`harness`] wraps the pieces into reproducible experiment sweeps, and the
//! `obsplan` binary exposes everything on the command line.

pub mod discretize;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod ilp_export;
pub mod lower_bound;
pub mod orders;
pub mod pareto;
pub mod tsp;

pub use error::{Error, Result};
pub use geometry::{Object, Point2, SensingSpec};
pub use harness::Instance;
