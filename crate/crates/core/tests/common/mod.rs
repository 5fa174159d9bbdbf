#![allow(dead_code)]

use pdpt_core::{Instance, Node, NodeKind, Request, Vehicle};
use proptest::prelude::*;

pub type Xy = (f64, f64);

/// Nodes in order: pickup and delivery per request, start and end per
/// vehicle, then transfer points.
pub fn build(requests: &[(Xy, Xy, u32)], vehicles: &[(Xy, Xy, u32)], transfers: &[Xy]) -> Instance {
    let mut nodes = Vec::new();
    let mut push = |(x, y): Xy, kind| {
        nodes.push(Node::new(nodes.len(), x, y, kind));
        nodes.len() - 1
    };
    let reqs: Vec<Request> = requests
        .iter()
        .enumerate()
        .map(|(id, &(p, d, quantity))| Request { id, pickup: push(p, NodeKind::Pickup), delivery: push(d, NodeKind::Delivery), quantity })
        .collect();
    let vehs: Vec<Vehicle> = vehicles
        .iter()
        .enumerate()
        .map(|(id, &(s, e, capacity))| Vehicle {
            id,
            capacity,
            start_depot: push(s, NodeKind::Depot),
            end_depot: push(e, NodeKind::Depot),
        })
        .collect();
    let tps = transfers.iter().map(|&t| push(t, NodeKind::Transfer)).collect();
    Instance::new(nodes, reqs, vehs, tps).unwrap()
}

fn xy() -> impl Strategy<Value = Xy> {
    (0..60i32, 0..60i32).prop_map(|(x, y)| (f64::from(x), f64::from(y)))
}

/// Random instance with every request fitting every vehicle.
pub fn instance(max_requests: usize, max_vehicles: usize, max_transfers: usize) -> impl Strategy<Value = Instance> {
    (
        prop::collection::vec((xy(), xy(), 1..=4u32), 1..=max_requests),
        prop::collection::vec((xy(), xy(), 4..=9u32), 1..=max_vehicles),
        prop::collection::vec(xy(), 0..=max_transfers),
    )
        .prop_map(|(r, v, t)| build(&r, &v, &t))
}
