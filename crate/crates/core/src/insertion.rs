//! Cheapest insertion of request legs into routes.
//!
//! A leg is an ordered pair of stops carried by one vehicle: the whole
//! request (pickup to delivery), or one half of a transferred request
//! (pickup to transfer drop, transfer pick to delivery). Positions are
//! final indices in the route after both stops are inserted.

use alloc::vec::Vec;

use crate::model::{Instance, NodeId, RequestId, VehicleId};
use crate::schedule::transfers_acyclic;
use crate::solution::{Action, Assignment, Route, Solution, Stop};
use crate::IMPROVE_EPS;

/// A direct insertion of one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InsertionCandidate {
    pub request: RequestId,
    pub vehicle: VehicleId,
    pub pickup_pos: usize,
    pub delivery_pos: usize,
    pub delta_cost: f64,
}

/// The two stops of a leg.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Leg {
    pub first: Stop,
    pub second: Stop,
    pub quantity: u32,
}

impl Leg {
    pub fn direct(instance: &Instance, r: RequestId) -> Self {
        let req = instance.request(r);
        Self {
            first: Stop::new(req.pickup, Action::Pickup(r)),
            second: Stop::new(req.delivery, Action::Delivery(r)),
            quantity: req.quantity,
        }
    }

    /// Pickup to the drop at `transfer`.
    pub fn inbound(instance: &Instance, r: RequestId, transfer: NodeId) -> Self {
        let req = instance.request(r);
        Self {
            first: Stop::new(req.pickup, Action::Pickup(r)),
            second: Stop::new(transfer, Action::TransferDrop { request: r, transfer }),
            quantity: req.quantity,
        }
    }

    /// Pick at `transfer` to the delivery.
    pub fn outbound(instance: &Instance, r: RequestId, transfer: NodeId) -> Self {
        let req = instance.request(r);
        Self {
            first: Stop::new(transfer, Action::TransferPick { request: r, transfer }),
            second: Stop::new(req.delivery, Action::Delivery(r)),
            quantity: req.quantity,
        }
    }
}

/// Where a leg goes: vehicle plus final positions of its two stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Placement {
    pub vehicle: VehicleId,
    pub first_pos: usize,
    pub second_pos: usize,
    pub delta: f64,
}

/// Visits every capacity-feasible placement of `leg` in `route`, in
/// lexicographic (first_pos, second_pos) order. The callback receives
/// `(first_pos, second_pos, delta)`.
pub fn for_each_placement(
    instance: &Instance,
    route: &Route,
    loads: &[i64],
    leg: &Leg,
    mut visit: impl FnMut(usize, usize, f64),
) {
    let stops = &route.stops;
    let m = stops.len();
    if m < 2 {
        return;
    }
    let cap = i64::from(instance.vehicle(route.vehicle).capacity);
    let q = i64::from(leg.quantity);
    let (u, w) = (leg.first.node, leg.second.node);
    let uw = instance.dist(u, w);
    for a in 1..m {
        let prev = stops[a - 1].node;
        let next = stops[a].node;
        let base = instance.dist(prev, next);
        let mut max_load = loads[a - 1];
        if max_load + q > cap {
            continue;
        }
        // Adjacent: prev -> u -> w -> next.
        visit(a, a + 1, instance.dist(prev, u) + uw + instance.dist(w, next) - base);
        let first_delta = instance.dist(prev, u) + instance.dist(u, next) - base;
        for b in (a + 1)..m {
            max_load = max_load.max(loads[b - 1]);
            if max_load + q > cap {
                break;
            }
            let (x, y) = (stops[b - 1].node, stops[b].node);
            let second_delta = instance.dist(x, w) + instance.dist(w, y) - instance.dist(x, y);
            visit(a, b + 1, first_delta + second_delta);
        }
    }
}

/// Cheapest placement of `leg` in `route`; ties go to the smallest positions.
pub fn best_placement(instance: &Instance, route: &Route, loads: &[i64], leg: &Leg) -> Option<Placement> {
    let mut best: Option<Placement> = None;
    for_each_placement(instance, route, loads, leg, |a, b, delta| {
        if best.is_none_or(|p| delta < p.delta - IMPROVE_EPS) {
            best = Some(Placement { vehicle: route.vehicle, first_pos: a, second_pos: b, delta });
        }
    });
    best
}

/// All feasible placements in one route, sorted by delta then positions.
pub fn sorted_placements(instance: &Instance, route: &Route, loads: &[i64], leg: &Leg) -> Vec<Placement> {
    let mut all = Vec::new();
    for_each_placement(instance, route, loads, leg, |a, b, delta| {
        all.push(Placement { vehicle: route.vehicle, first_pos: a, second_pos: b, delta });
    });
    all.sort_by(|x, y| x.delta.total_cmp(&y.delta));
    all
}

pub fn insert_leg(route: &mut Route, leg: &Leg, first_pos: usize, second_pos: usize) {
    route.stops.insert(first_pos, leg.first);
    route.stops.insert(second_pos, leg.second);
}

/// Route loads for every vehicle.
pub fn all_loads(instance: &Instance, solution: &Solution) -> Vec<Vec<i64>> {
    solution.routes.iter().map(|r| r.loads(instance)).collect()
}

/// Cheapest direct insertion of `r` over all vehicles.
pub fn best_direct(
    instance: &Instance,
    solution: &Solution,
    loads: &[Vec<i64>],
    r: RequestId,
) -> Option<InsertionCandidate> {
    let leg = Leg::direct(instance, r);
    let mut best: Option<InsertionCandidate> = None;
    for (k, route) in solution.routes.iter().enumerate() {
        if let Some(p) = best_placement(instance, route, &loads[k], &leg) {
            if best.is_none_or(|b| p.delta < b.delta_cost - IMPROVE_EPS) {
                best = Some(InsertionCandidate {
                    request: r,
                    vehicle: k,
                    pickup_pos: p.first_pos,
                    delivery_pos: p.second_pos,
                    delta_cost: p.delta,
                });
            }
        }
    }
    best
}

/// Applies a direct insertion candidate.
pub fn apply_direct(instance: &Instance, solution: &mut Solution, c: &InsertionCandidate) {
    solution.insert_direct(instance, c.request, c.vehicle, c.pickup_pos, c.delivery_pos);
}

/// A complete way of (re)inserting one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plan {
    Direct(InsertionCandidate),
    Split { request: RequestId, transfer: NodeId, inbound: Placement, outbound: Placement, delta: f64 },
}

impl Plan {
    pub fn delta(&self) -> f64 {
        match self {
            Plan::Direct(c) => c.delta_cost,
            Plan::Split { delta, .. } => *delta,
        }
    }
}

pub fn apply_plan(instance: &Instance, solution: &mut Solution, plan: &Plan) {
    match *plan {
        Plan::Direct(c) => apply_direct(instance, solution, &c),
        Plan::Split { request, transfer, inbound, outbound, .. } => {
            let leg_in = Leg::inbound(instance, request, transfer);
            let leg_out = Leg::outbound(instance, request, transfer);
            insert_leg(&mut solution.routes[inbound.vehicle], &leg_in, inbound.first_pos, inbound.second_pos);
            insert_leg(&mut solution.routes[outbound.vehicle], &leg_out, outbound.first_pos, outbound.second_pos);
            solution.assignment[request] =
                Some(Assignment::Transferred { first: inbound.vehicle, transfer, second: outbound.vehicle });
        }
    }
}

fn split_is_acyclic(instance: &Instance, solution: &Solution, plan: &Plan) -> bool {
    let mut trial = solution.clone();
    apply_plan(instance, &mut trial, plan);
    transfers_acyclic(&trial)
}

/// Cheapest acyclic placement of `leg` on a vehicle other than `exclude`,
/// given that the other half is already fixed by `make_plan`.
fn best_second_leg(
    instance: &Instance,
    solution: &Solution,
    loads: &[Vec<i64>],
    leg: &Leg,
    exclude: VehicleId,
    make_plan: impl Fn(Placement) -> Plan,
) -> Option<Plan> {
    let mut per_vehicle: Vec<Placement> = solution
        .routes
        .iter()
        .enumerate()
        .filter(|(k, _)| *k != exclude)
        .filter_map(|(k, route)| best_placement(instance, route, &loads[k], leg))
        .collect();
    per_vehicle.sort_by(|a, b| a.delta.total_cmp(&b.delta));
    let mut fallback: Option<Plan> = None;
    for p in per_vehicle {
        let plan = make_plan(p);
        if let Some(f) = fallback {
            if f.delta() <= plan.delta() {
                return Some(f);
            }
        }
        if split_is_acyclic(instance, solution, &plan) {
            return Some(plan);
        }
        // The cheapest spot closes a wait cycle; look further down this route.
        let route = &solution.routes[p.vehicle];
        for q in sorted_placements(instance, route, &loads[p.vehicle], leg) {
            let plan = make_plan(q);
            if fallback.is_some_and(|f| f.delta() <= plan.delta()) {
                break;
            }
            if split_is_acyclic(instance, solution, &plan) {
                fallback = Some(plan);
                break;
            }
        }
    }
    fallback
}

/// Best split of `r` through `transfer`, inserting the inbound leg first
/// (`inbound_first`) or the outbound leg first, each at its cheapest spot.
pub fn best_split(
    instance: &Instance,
    solution: &Solution,
    loads: &[Vec<i64>],
    r: RequestId,
    transfer: NodeId,
    inbound_first: bool,
) -> Option<Plan> {
    if solution.routes.len() < 2 {
        return None;
    }
    let leg_in = Leg::inbound(instance, r, transfer);
    let leg_out = Leg::outbound(instance, r, transfer);
    let (first_leg, second_leg) = if inbound_first { (&leg_in, &leg_out) } else { (&leg_out, &leg_in) };

    let mut first: Option<Placement> = None;
    for (k, route) in solution.routes.iter().enumerate() {
        if let Some(p) = best_placement(instance, route, &loads[k], first_leg) {
            if first.is_none_or(|b| p.delta < b.delta - IMPROVE_EPS) {
                first = Some(p);
            }
        }
    }
    let first = first?;
    best_second_leg(instance, solution, loads, second_leg, first.vehicle, |second| {
        let (inbound, outbound) = if inbound_first { (first, second) } else { (second, first) };
        Plan::Split { request: r, transfer, inbound, outbound, delta: first.delta + second.delta }
    })
}

/// Cheapest of: direct reinsertion, inbound-then-outbound split, and
/// outbound-then-inbound split, over every transfer point. `r` must not be
/// in the solution.
pub fn best_plan(instance: &Instance, solution: &Solution, loads: &[Vec<i64>], r: RequestId, transfers: bool) -> Option<Plan> {
    let mut best = best_direct(instance, solution, loads, r).map(Plan::Direct);
    if transfers {
        for &t in instance.transfer_points() {
            for inbound_first in [true, false] {
                if let Some(plan) = best_split(instance, solution, loads, r, t, inbound_first) {
                    if best.is_none_or(|b| plan.delta() < b.delta() - IMPROVE_EPS) {
                        best = Some(plan);
                    }
                }
            }
        }
    }
    best
}
