//! Constraint checker for arbitrary solutions.
//!
//! Every failed constraint instance is reported, nothing is thrown. The
//! tags follow the numbering of the mixed-integer model: assignment (2),
//! visits consistent with assignment (3), depot endpoints (4, 5), clock
//! start (6), precedence (7), time propagation (8), initial load (9),
//! capacity (10), non-negative times (11) and loads (12), plus transfer
//! synchronization.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::model::{Instance, RequestId, VehicleId};
use crate::schedule::propagate_schedule;
use crate::solution::{Action, Assignment, Solution};

const TIME_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Constraint {
    Assign,
    Visit,
    DepotStart,
    DepotEnd,
    ClockZero,
    Precedence,
    TimeProp,
    LoadZero,
    Capacity,
    NonnegTime,
    NonnegLoad,
    TransferSync,
}

impl Constraint {
    pub fn tag(self) -> &'static str {
        match self {
            Constraint::Assign => "ASSIGN(2)",
            Constraint::Visit => "VISIT(3)",
            Constraint::DepotStart => "DEPOT_START(4)",
            Constraint::DepotEnd => "DEPOT_END(5)",
            Constraint::ClockZero => "CLOCK_ZERO(6)",
            Constraint::Precedence => "PRECEDENCE(7)",
            Constraint::TimeProp => "TIME_PROP(8)",
            Constraint::LoadZero => "LOAD_ZERO(9)",
            Constraint::Capacity => "CAPACITY(10)",
            Constraint::NonnegTime => "NONNEG_TIME(11)",
            Constraint::NonnegLoad => "NONNEG_LOAD(12)",
            Constraint::TransferSync => "TRANSFER_SYNC",
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub constraint: Constraint,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub violations: Vec<Violation>,
}

impl FeasibilityReport {
    pub fn has(&self, c: Constraint) -> bool {
        self.violations.iter().any(|v| v.constraint == c)
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.feasible {
            return f.write_str("feasible");
        }
        for v in &self.violations {
            writeln!(f, "{}: {}", v.constraint, v.detail)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Report(Vec<Violation>);

impl Report {
    fn push(&mut self, constraint: Constraint, detail: String) {
        self.0.push(Violation { constraint, detail });
    }

    fn finish(self) -> FeasibilityReport {
        FeasibilityReport { feasible: self.0.is_empty(), violations: self.0 }
    }
}

/// One occurrence of a request's stop: (route index, vehicle, position, action).
type Occurrence = (usize, VehicleId, usize, Action);

/// Checks every model constraint on `solution`.
pub fn check_feasibility(instance: &Instance, solution: &Solution) -> FeasibilityReport {
    let mut report = Report::default();
    let n_nodes = instance.num_nodes();
    let n_req = instance.num_requests();
    let n_veh = instance.num_vehicles();

    // Structure: one route per vehicle, in-range references.
    let mut fleet_ok = solution.routes.len() == n_veh;
    for (ri, route) in solution.routes.iter().enumerate() {
        if route.vehicle != ri {
            fleet_ok = false;
        }
    }
    if !fleet_ok {
        report.push(Constraint::Visit, format!("route set does not match the fleet of {n_veh} vehicles"));
    }
    let mut references_ok = true;
    for route in &solution.routes {
        for stop in &route.stops {
            let bad_request = stop.action.request().is_some_and(|r| r >= n_req);
            let bad_transfer = matches!(
                stop.action,
                Action::TransferDrop { transfer, .. } | Action::TransferPick { transfer, .. } if transfer >= n_nodes
            );
            if stop.node >= n_nodes || bad_request || bad_transfer {
                references_ok = false;
                report.push(
                    Constraint::Visit,
                    format!("route {} references unknown node or request: {:?}", route.vehicle, stop),
                );
            }
        }
    }
    if !fleet_ok || !references_ok {
        return report.finish();
    }

    // Depot endpoints (4), (5) and stop/node consistency.
    for route in &solution.routes {
        let v = instance.vehicle(route.vehicle);
        let k = route.vehicle;
        match route.stops.first() {
            Some(s) if s.action == Action::DepartDepot && s.node == v.start_depot => {}
            _ => report.push(Constraint::DepotStart, format!("vehicle {k} does not start at node {}", v.start_depot)),
        }
        match route.stops.last() {
            Some(s) if route.stops.len() >= 2 && s.action == Action::ArriveDepot && s.node == v.end_depot => {}
            _ => report.push(Constraint::DepotEnd, format!("vehicle {k} does not end at node {}", v.end_depot)),
        }
        let last = route.stops.len().saturating_sub(1);
        for (pos, stop) in route.stops.iter().enumerate() {
            let consistent = match stop.action {
                Action::DepartDepot | Action::ArriveDepot => pos == 0 || pos == last,
                Action::Pickup(r) => stop.node == instance.request(r).pickup,
                Action::Delivery(r) => stop.node == instance.request(r).delivery,
                Action::TransferDrop { transfer, .. } | Action::TransferPick { transfer, .. } => {
                    stop.node == transfer && instance.is_transfer_point(transfer)
                }
            };
            if !consistent {
                report.push(Constraint::Visit, format!("vehicle {k} stop {pos} {:?} is misplaced", stop));
            }
        }
    }

    // Gather per-request occurrences.
    let mut occ: Vec<Vec<Occurrence>> = vec![Vec::new(); n_req];
    for (ri, route) in solution.routes.iter().enumerate() {
        for (pos, stop) in route.stops.iter().enumerate() {
            if let Some(r) = stop.action.request() {
                occ[r].push((ri, route.vehicle, pos, stop.action));
            }
        }
    }

    // Assignment (2) and visit consistency (3).
    if solution.assignment.len() != n_req {
        report.push(
            Constraint::Assign,
            format!("assignment covers {} of {n_req} requests", solution.assignment.len()),
        );
    }
    for r in 0..n_req {
        let assigned = solution.assignment.get(r).copied().flatten();
        if !served_once(&occ[r]) {
            report.push(Constraint::Assign, format!("request {r} is not served exactly once end to end"));
        } else if assigned.is_none() {
            report.push(Constraint::Assign, format!("request {r} has no assignment"));
        }
        check_visits(&mut report, r, assigned, &occ[r]);
    }

    // Precedence (7) by position inside each route.
    for r in 0..n_req {
        check_route_precedence(&mut report, solution, r, &occ[r]);
    }

    // Schedule-based constraints.
    let schedule = match propagate_schedule(instance, solution) {
        Ok(s) => s,
        Err(_) => {
            report.push(Constraint::TimeProp, String::from("no schedule exists: cyclic transfer dependency"));
            return report.finish();
        }
    };
    for (ri, route) in solution.routes.iter().enumerate() {
        let k = route.vehicle;
        let times = &schedule.departure[ri];
        let loads = &schedule.load[ri];
        if times.first().is_some_and(|&t| t != 0.0) {
            report.push(Constraint::ClockZero, format!("vehicle {k} departs at {}", times[0]));
        }
        if loads.first().is_some_and(|&y| y != 0) {
            report.push(Constraint::LoadZero, format!("vehicle {k} starts with load {}", loads[0]));
        }
        for s in 1..route.stops.len() {
            let travel = instance.dist(route.stops[s - 1].node, route.stops[s].node);
            if times[s] + TIME_EPS < times[s - 1] + travel {
                report.push(Constraint::TimeProp, format!("vehicle {k} stop {s} departs too early"));
            }
        }
        let cap = i64::from(instance.vehicle(k).capacity);
        for (s, (&t, &y)) in times.iter().zip(loads).enumerate() {
            if t < 0.0 {
                report.push(Constraint::NonnegTime, format!("vehicle {k} stop {s} at time {t}"));
            }
            if y > cap {
                report.push(Constraint::Capacity, format!("vehicle {k} stop {s} load {y} exceeds {cap}"));
            }
            if y < 0 {
                report.push(Constraint::NonnegLoad, format!("vehicle {k} stop {s} load {y}"));
            }
        }
    }
    let time_of = |ri: usize, pos: usize| schedule.departure[ri][pos];
    for r in 0..n_req {
        let find = |pred: &dyn Fn(Action) -> bool| occ[r].iter().find(|o| pred(o.3)).copied();
        let pickup = find(&|a| matches!(a, Action::Pickup(_)));
        let delivery = find(&|a| matches!(a, Action::Delivery(_)));
        if let (Some(p), Some(d)) = (pickup, delivery) {
            if time_of(p.0, p.2) > time_of(d.0, d.2) + TIME_EPS {
                report.push(Constraint::Precedence, format!("request {r} is delivered before it is picked up"));
            }
        }
        for &(ri, _, pos, action) in &occ[r] {
            if let Action::TransferPick { transfer, .. } = action {
                let drop = occ[r]
                    .iter()
                    .find(|o| o.3 == Action::TransferDrop { request: r, transfer })
                    .copied();
                match drop {
                    None => report.push(
                        Constraint::TransferSync,
                        format!("request {r} is collected at transfer {transfer} but never dropped there"),
                    ),
                    Some(d) if time_of(d.0, d.2) > time_of(ri, pos) + TIME_EPS => report.push(
                        Constraint::TransferSync,
                        format!("request {r} is collected at transfer {transfer} before it is dropped"),
                    ),
                    Some(_) => {}
                }
            }
        }
    }

    report.finish()
}

fn served_once(occ: &[Occurrence]) -> bool {
    let count = |pred: fn(Action) -> bool| occ.iter().filter(|o| pred(o.3)).count();
    let pickups = count(|a| matches!(a, Action::Pickup(_)));
    let deliveries = count(|a| matches!(a, Action::Delivery(_)));
    let drops = count(|a| matches!(a, Action::TransferDrop { .. }));
    let picks = count(|a| matches!(a, Action::TransferPick { .. }));
    if pickups != 1 || deliveries != 1 {
        return false;
    }
    let vehicle_of = |pred: fn(Action) -> bool| occ.iter().find(|o| pred(o.3)).map(|o| o.1);
    let p = vehicle_of(|a| matches!(a, Action::Pickup(_)));
    let d = vehicle_of(|a| matches!(a, Action::Delivery(_)));
    match (drops, picks) {
        (0, 0) => p == d,
        (1, 1) => {
            let drop = occ.iter().find(|o| matches!(o.3, Action::TransferDrop { .. })).unwrap();
            let pick = occ.iter().find(|o| matches!(o.3, Action::TransferPick { .. })).unwrap();
            let same_point = match (drop.3, pick.3) {
                (Action::TransferDrop { transfer: a, .. }, Action::TransferPick { transfer: b, .. }) => a == b,
                _ => false,
            };
            same_point && Some(drop.1) == p && Some(pick.1) == d && p != d
        }
        _ => false,
    }
}

fn check_visits(report: &mut Report, r: RequestId, assigned: Option<Assignment>, occ: &[Occurrence]) {
    // (vehicle, action) pairs implied by the assignment.
    let expected: Vec<(VehicleId, Action)> = match assigned {
        None => Vec::new(),
        Some(Assignment::Direct { vehicle }) => vec![(vehicle, Action::Pickup(r)), (vehicle, Action::Delivery(r))],
        Some(Assignment::Transferred { first, transfer, second }) => {
            if first == second {
                report.push(Constraint::Visit, format!("request {r} transfers onto the vehicle that dropped it"));
            }
            vec![
                (first, Action::Pickup(r)),
                (first, Action::TransferDrop { request: r, transfer }),
                (second, Action::TransferPick { request: r, transfer }),
                (second, Action::Delivery(r)),
            ]
        }
    };
    for &(_, vehicle, pos, action) in occ {
        if !expected.contains(&(vehicle, action)) {
            report.push(
                Constraint::Visit,
                format!("vehicle {vehicle} serves {action:?} at stop {pos} without being assigned to request {r}"),
            );
        }
    }
    for &(vehicle, action) in &expected {
        if !occ.iter().any(|o| o.1 == vehicle && o.3 == action) {
            report.push(Constraint::Visit, format!("vehicle {vehicle} is assigned {action:?} but never performs it"));
        }
    }
}

fn check_route_precedence(report: &mut Report, solution: &Solution, r: RequestId, occ: &[Occurrence]) {
    let pos = |pred: &dyn Fn(Action) -> bool| occ.iter().find(|o| pred(o.3)).map(|o| (o.0, o.2));
    let pickup = pos(&|a| matches!(a, Action::Pickup(_)));
    let delivery = pos(&|a| matches!(a, Action::Delivery(_)));
    let drop = pos(&|a| matches!(a, Action::TransferDrop { .. }));
    let pick = pos(&|a| matches!(a, Action::TransferPick { .. }));
    let before = |a: Option<(usize, usize)>, b: Option<(usize, usize)>| match (a, b) {
        (Some((ra, pa)), Some((rb, pb))) if ra == rb => pa < pb,
        _ => true,
    };
    let ok = before(pickup, delivery) && before(pickup, drop) && before(pick, delivery);
    if !ok {
        let vehicle = pickup.or(delivery).map(|(ri, _)| solution.routes[ri].vehicle).unwrap_or_default();
        report.push(Constraint::Precedence, format!("request {r} is out of order on vehicle {vehicle}"));
    }
}
