//! Exhaustive solver for micro instances, used as ground truth in tests.
//!
//! Every request is either served directly by one vehicle or relayed
//! through one transfer point by two distinct vehicles. For each such
//! assignment every precedence- and capacity-respecting stop order of every
//! route is enumerated, the full feasibility check is applied, and the
//! cheapest solution wins. Equal costs are broken by [`Solution::signature`].

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cost::solution_cost;
use crate::error::{Error, Result};
use crate::feasibility::check_feasibility;
use crate::model::Instance;
use crate::solution::{Action, Assignment, Route, Solution, Stop};
use crate::COST_EPS;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_requests: usize,
    pub max_vehicles: usize,
    pub max_transfers: usize,
    /// Stops per route, depots included.
    pub max_stops: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_requests: 3, max_vehicles: 2, max_transfers: 1, max_stops: 8 }
    }
}

/// Optimal solution and its cost.
pub fn solve_exact(instance: &Instance, limits: &OracleLimits) -> Result<(Solution, f64)> {
    let checks = [
        ("requests", instance.num_requests(), limits.max_requests),
        ("vehicles", instance.num_vehicles(), limits.max_vehicles),
        ("transfer points", instance.transfer_points().len(), limits.max_transfers),
    ];
    for (what, have, max) in checks {
        if have > max {
            return Err(Error::TooLarge(format!("{have} {what}, limit {max}")));
        }
    }

    let options = assignment_options(instance);
    let n = instance.num_requests();
    let mut best: Option<(f64, Solution)> = None;
    let mut choice = vec![0usize; n];
    loop {
        let assignment: Vec<Assignment> = choice.iter().map(|&c| options[c]).collect();
        solve_assignment(instance, limits, &assignment, &mut best);
        // Odometer over option indices.
        let mut i = 0;
        while i < n {
            choice[i] += 1;
            if choice[i] < options.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    best.map(|(c, s)| (s, c)).ok_or(Error::NoFeasible)
}

fn assignment_options(instance: &Instance) -> Vec<Assignment> {
    let nv = instance.num_vehicles();
    let mut options: Vec<Assignment> = (0..nv).map(|vehicle| Assignment::Direct { vehicle }).collect();
    for &transfer in instance.transfer_points() {
        for first in 0..nv {
            for second in (0..nv).filter(|&s| s != first) {
                options.push(Assignment::Transferred { first, transfer, second });
            }
        }
    }
    options
}

/// Ordered stop pairs each vehicle must visit under `assignment`.
fn legs_per_vehicle(instance: &Instance, assignment: &[Assignment]) -> Vec<Vec<(Stop, Stop, i64)>> {
    let mut legs = vec![Vec::new(); instance.num_vehicles()];
    for (r, a) in assignment.iter().enumerate() {
        let req = instance.request(r);
        let q = i64::from(req.quantity);
        let pickup = Stop::new(req.pickup, Action::Pickup(r));
        let delivery = Stop::new(req.delivery, Action::Delivery(r));
        match *a {
            Assignment::Direct { vehicle } => legs[vehicle].push((pickup, delivery, q)),
            Assignment::Transferred { first, transfer, second } => {
                legs[first].push((pickup, Stop::new(transfer, Action::TransferDrop { request: r, transfer }), q));
                legs[second].push((Stop::new(transfer, Action::TransferPick { request: r, transfer }), delivery, q));
            }
        }
    }
    legs
}

fn solve_assignment(
    instance: &Instance,
    limits: &OracleLimits,
    assignment: &[Assignment],
    best: &mut Option<(f64, Solution)>,
) {
    let legs = legs_per_vehicle(instance, assignment);
    let mut per_vehicle: Vec<Vec<Vec<Stop>>> = Vec::with_capacity(legs.len());
    for (k, vlegs) in legs.iter().enumerate() {
        if 2 * vlegs.len() + 2 > limits.max_stops {
            return;
        }
        let cap = i64::from(instance.vehicle(k).capacity);
        let mut orders = Vec::new();
        let mut state = vec![0u8; vlegs.len()];
        let mut seq = Vec::with_capacity(2 * vlegs.len());
        interleavings(vlegs, cap, 0, &mut state, &mut seq, &mut orders);
        if orders.is_empty() {
            return;
        }
        per_vehicle.push(orders);
    }

    let nv = per_vehicle.len();
    let mut pick = vec![0usize; nv];
    loop {
        let routes: Vec<Route> = (0..nv)
            .map(|k| {
                let mut route = Route::empty(instance, k);
                route.stops.splice(1..1, per_vehicle[k][pick[k]].iter().copied());
                route
            })
            .collect();
        let solution = Solution { routes, assignment: assignment.iter().copied().map(Some).collect() };
        if check_feasibility(instance, &solution).feasible {
            let cost = solution_cost(instance, &solution);
            let better = match best {
                None => true,
                Some((c, s)) => {
                    cost < *c - COST_EPS || (cost <= *c + COST_EPS && solution.signature() < s.signature())
                }
            };
            if better {
                *best = Some((cost, solution));
            }
        }
        let mut i = 0;
        while i < nv {
            pick[i] += 1;
            if pick[i] < per_vehicle[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == nv {
            break;
        }
    }
}

/// All stop sequences visiting each leg's first stop before its second and
/// never carrying more than `cap`. `state[l]` counts stops of leg `l` placed.
fn interleavings(
    legs: &[(Stop, Stop, i64)],
    cap: i64,
    load: i64,
    state: &mut [u8],
    seq: &mut Vec<Stop>,
    out: &mut Vec<Vec<Stop>>,
) {
    if seq.len() == 2 * legs.len() {
        out.push(seq.clone());
        return;
    }
    for l in 0..legs.len() {
        let (first, second, q) = legs[l];
        match state[l] {
            0 if load + q <= cap => {
                state[l] = 1;
                seq.push(first);
                interleavings(legs, cap, load + q, state, seq, out);
                seq.pop();
                state[l] = 0;
            }
            1 => {
                state[l] = 2;
                seq.push(second);
                interleavings(legs, cap, load - q, state, seq, out);
                seq.pop();
                state[l] = 1;
            }
            _ => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{build, relay};

    #[test]
    fn collinear_single_request() {
        let inst = build(&[((2.0, 0.0), (5.0, 0.0), 1)], &[((0.0, 0.0), (0.0, 0.0), 3)], &[]);
        let (s, c) = solve_exact(&inst, &OracleLimits::default()).unwrap();
        assert_eq!(c, 10.0);
        let nodes: Vec<_> = s.routes[0].stops.iter().map(|s| s.node).collect();
        assert_eq!(nodes, vec![2, 0, 1, 3]);
    }

    #[test]
    fn relay_uses_transfer() {
        let inst = relay();
        let (s, c) = solve_exact(&inst, &OracleLimits::default()).unwrap();
        assert!((c - 40.0).abs() < 1e-9);
        assert!(matches!(s.assignment[0], Some(Assignment::Transferred { .. })));
        assert!(check_feasibility(&inst, &s).feasible);
    }

    #[test]
    fn heavy_request_has_no_solution() {
        let inst = build(&[((2.0, 0.0), (5.0, 0.0), 4)], &[((0.0, 0.0), (0.0, 0.0), 3)], &[]);
        assert_eq!(solve_exact(&inst, &OracleLimits::default()).unwrap_err(), Error::NoFeasible);
    }

    #[test]
    fn refuses_large_instances() {
        let reqs = [((1.0, 0.0), (2.0, 0.0), 1); 4];
        let inst = build(&reqs, &[((0.0, 0.0), (0.0, 0.0), 3)], &[]);
        assert!(matches!(solve_exact(&inst, &OracleLimits::default()), Err(Error::TooLarge(_))));
    }

    #[test]
    fn interleaving_count() {
        // Three unit legs on an ample vehicle: 6! / 2^3 orders.
        let inst = build(
            &[((1.0, 0.0), (2.0, 0.0), 1), ((3.0, 0.0), (4.0, 0.0), 1), ((5.0, 0.0), (6.0, 0.0), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 9)],
            &[],
        );
        let a = vec![Assignment::Direct { vehicle: 0 }; 3];
        let legs = legs_per_vehicle(&inst, &a);
        let mut out = Vec::new();
        interleavings(&legs[0], 9, 0, &mut [0; 3], &mut Vec::new(), &mut out);
        assert_eq!(out.len(), 90);
        let mut tight = Vec::new();
        interleavings(&legs[0], 1, 0, &mut [0; 3], &mut Vec::new(), &mut tight);
        assert_eq!(tight.len(), 6);
    }
}
