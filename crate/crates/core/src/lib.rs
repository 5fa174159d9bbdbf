//! Pickup and delivery with transfers (PDP-T).
//!
//! The crate holds the domain model, the evaluation kernel (schedule
//! propagation, constraint checking, cost) and every solver: constructive
//! heuristics, GRASP, the local searches, both hybrid genetic algorithms and
//! an exhaustive oracle for micro instances.
//!
//! Everything here is `no_std` + `alloc`. Enable the `parallel` feature to
//! evaluate independent starts and GA populations on a rayon pool; results do
//! not depend on it.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod constructive;
pub mod cost;
mod error;
pub mod feasibility;
pub mod genetic;
pub mod grasp;
pub mod insertion;
pub mod local_search;
pub mod model;
pub mod oracle;
mod par;
pub mod rng;
pub mod schedule;
pub mod solution;

pub use cost::{route_cost, solution_cost};
pub use error::{Error, Result};
pub use feasibility::{check_feasibility, Constraint, FeasibilityReport, Violation};
pub use model::{Instance, Node, NodeId, NodeKind, Request, RequestId, Vehicle, VehicleId};
pub use schedule::{propagate_schedule, Schedule};
pub use solution::{Action, Assignment, Route, Solution, Stop};

/// A search result together with the cost trace that produced it.
///
/// What one trace entry stands for (an applied move, an iteration, a pass)
/// is documented by each search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub solution: Solution,
    pub trace: alloc::vec::Vec<f64>,
}

/// Absolute tolerance used wherever two costs are compared.
pub const COST_EPS: f64 = 1e-6;

/// Tolerance for "strictly better" decisions inside the search loops.
pub(crate) const IMPROVE_EPS: f64 = 1e-9;
