//! Joint RIS placement and task offloading for multi-server vehicular edge
//! computing.
//!
//! The crate is `no_std` with `alloc`. It holds the whole numerical pipeline:
//!
//! * [`scenario`]: configuration types, validation and seeded snapshot generation.
//! * [`channel`]: LoS probabilities, element radiation pattern, cascaded
//!   vehicle–RIS–server received power and link rates.
//! * [`mobility`]: discretisation of each vehicle's trajectory into grid cells.
//! * [`feasibility`]: latency budgets and the probabilistic completion mask.
//! * [`assignment`]: exact capacitated task assignment, greedy baseline and a
//!   brute-force oracle.
//! * [`placement`]: placement evaluation, grid search, adaptive hill climbing
//!   and the baseline placement schemes.
//!
//! File formats, the CLI and multi-threaded evaluation live in the `risvec`
//! companion crate.

#![no_std]
#![deny(missing_docs)]

extern crate alloc;

pub mod assignment;
pub mod channel;
pub mod error;
pub mod feasibility;
pub mod mobility;
pub mod placement;
pub mod rng;
pub mod scenario;

pub use assignment::{Assignment, AssignmentProblem};
pub use error::Error;
pub use placement::{Evaluator, Metric, Objective, PlacementResult};
pub use scenario::{Instance, Placement, ScenarioConfig, Server, SystemParams, TaskSpec, Vehicle};
