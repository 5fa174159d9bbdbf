use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::model::{NodeId, RequestId};

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("node {node} is out of range (instance has {len} nodes)")]
    NodeOutOfRange { node: NodeId, len: usize },
    #[error("cyclic transfer dependency between routes")]
    CyclicTransfer,
    #[error("request {request} fits no vehicle")]
    NoFeasibleInsertion { request: RequestId },
    #[error("insufficient fleet: {routes} routes for {vehicles} vehicles")]
    InsufficientFleet { routes: usize, vehicles: usize },
    #[error("domain error: {0} is outside the function domain")]
    Domain(f64),
    #[error("selection error: no member has finite fitness")]
    Selection,
    #[error("genetic search found no feasible member in {} generations", .trace.len())]
    GaNoFeasible { trace: Vec<crate::genetic::GenerationStats> },
    #[error("instance exceeds oracle limits: {0}")]
    TooLarge(String),
    #[error("no feasible solution exists")]
    NoFeasible,
}
