//! Joint scheduling and power control for V2V multihop multicast under
//! co-channel and adjacent-channel interference.
//!
//! The crate is organized around a mixed-Boolean linear programming (MBLP)
//! pipeline:
//!
//! - [`model`]: network, channel, and radio-grid domain types plus an
//!   independent allocation auditor.
//! - [`milp`]: a language-neutral MBLP modeling layer with Boolean-logic
//!   encoders, big-M helpers, and LP-file interchange.
//! - [`solver`]: branch-and-bound over Boolean variables on top of a
//!   bounded-variable primal simplex, plus an exhaustive oracle for tiny
//!   instances.
//! - [`formulations`]: builders for the throughput / worst-throughput /
//!   connectivity / AoI / latency objectives and their variants.
//! - [`clustering`]: reuse-distance based partitioning of a convoy into
//!   clusters and groups with reduced per-group problems.
//! - [`cds`]: the fully distributed, CSI-free scheduling algorithm.
//! - [`harness`]: scenario generation, Monte Carlo experiment runner, and
//!   CSV emission.

pub mod cds;
pub mod clustering;
pub mod dense;
pub mod formulations;
pub mod harness;
pub mod milp;
pub mod model;
pub mod solver;

pub use model::{Allocation, RadioGrid, Scenario, ScenarioBuilder};
pub use solver::{SolveOptions, Solution, SolveStatus};
