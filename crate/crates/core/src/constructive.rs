//! Constructive heuristics and the transshipment improvement.
//!
//! * [`greedy_construct`]: global cheapest insertion, one request at a time.
//! * [`clarke_wright`]: sequential savings merges of depot round trips.
//! * [`transship_improve`]: remove each request and put it back directly or
//!   split through a transfer point, whichever is cheapest.
//! * [`multistart`]: shuffled insertion followed by transshipment passes,
//!   best over several starts.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use crate::cost::solution_cost;
use crate::error::{Error, Result};
use crate::insertion::{all_loads, apply_plan, best_direct, best_placement, best_plan, InsertionCandidate, Leg, Placement};
use crate::model::{Instance, NodeId, NodeKind, RequestId};
use crate::solution::{Action, Route, Solution, Stop};
use crate::{par, rng, COST_EPS, IMPROVE_EPS};

/// Default number of multistart starts.
pub const DEFAULT_STARTS: usize = 16;
/// Upper bound on transshipment passes per improvement run.
pub const MAX_TRANSSHIP_PASSES: usize = 50;

fn check_capacities(instance: &Instance) -> Result<()> {
    let max_cap = instance.max_capacity();
    match instance.requests().iter().find(|r| r.quantity > max_cap) {
        Some(r) => Err(Error::NoFeasibleInsertion { request: r.id }),
        None => Ok(()),
    }
}

/// Repeatedly inserts one unassigned request at the position chosen by
/// `choose` among the per-(request, vehicle) cheapest insertions.
///
/// Candidates are offered in (request, vehicle) order; `choose` returns an
/// index into that slice.
pub(crate) fn build_by_insertion(
    instance: &Instance,
    mut choose: impl FnMut(&[InsertionCandidate]) -> usize,
) -> Result<Solution> {
    check_capacities(instance)?;
    let n = instance.num_requests();
    let nv = instance.num_vehicles();
    let mut solution = Solution::empty(instance);
    let mut loads = all_loads(instance, &solution);
    let mut assigned = vec![false; n];
    let legs: Vec<Leg> = (0..n).map(|r| Leg::direct(instance, r)).collect();
    let mut cache: Vec<Vec<Option<Placement>>> = (0..n)
        .map(|r| {
            (0..nv)
                .map(|k| best_placement(instance, &solution.routes[k], &loads[k], &legs[r]))
                .collect()
        })
        .collect();

    let mut candidates = Vec::with_capacity(n * nv);
    for _ in 0..n {
        candidates.clear();
        for r in (0..n).filter(|&r| !assigned[r]) {
            for (k, p) in cache[r].iter().enumerate() {
                if let Some(p) = p {
                    candidates.push(InsertionCandidate {
                        request: r,
                        vehicle: k,
                        pickup_pos: p.first_pos,
                        delivery_pos: p.second_pos,
                        delta_cost: p.delta,
                    });
                }
            }
        }
        if candidates.is_empty() {
            let request = (0..n).find(|&r| !assigned[r]).unwrap_or_default();
            return Err(Error::NoFeasibleInsertion { request });
        }
        let c = candidates[choose(&candidates)];
        solution.insert_direct(instance, c.request, c.vehicle, c.pickup_pos, c.delivery_pos);
        assigned[c.request] = true;
        let k = c.vehicle;
        loads[k] = solution.routes[k].loads(instance);
        for r in (0..n).filter(|&r| !assigned[r]) {
            cache[r][k] = best_placement(instance, &solution.routes[k], &loads[k], &legs[r]);
        }
    }
    Ok(solution)
}

/// Index of the cheapest candidate; earlier candidates win near-ties.
pub(crate) fn argmin_candidate(candidates: &[InsertionCandidate]) -> usize {
    let mut best = 0;
    for (i, c) in candidates.iter().enumerate().skip(1) {
        if c.delta_cost < candidates[best].delta_cost - IMPROVE_EPS {
            best = i;
        }
    }
    best
}

/// Global cheapest insertion. Every request is served directly.
///
/// Ties go to the lexicographically smallest (request, vehicle, pickup
/// position, delivery position).
pub fn greedy_construct(instance: &Instance) -> Result<Solution> {
    build_by_insertion(instance, argmin_candidate)
}

/// Inserts requests in the given order, each at its cheapest direct spot.
pub fn insert_in_order(instance: &Instance, order: &[RequestId]) -> Result<Solution> {
    check_capacities(instance)?;
    let mut solution = Solution::empty(instance);
    let mut loads = all_loads(instance, &solution);
    for &r in order {
        let c = best_direct(instance, &solution, &loads, r).ok_or(Error::NoFeasibleInsertion { request: r })?;
        solution.insert_direct(instance, r, c.vehicle, c.pickup_pos, c.delivery_pos);
        loads[c.vehicle] = solution.routes[c.vehicle].loads(instance);
    }
    Ok(solution)
}

/// A savings value for appending the route starting at `to` after the route
/// ending at `from`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saving {
    pub from: NodeId,
    pub to: NodeId,
    pub value: f64,
}

/// `c(i,0) + c(0,j) - c(i,j)` around the hub `depot`.
pub fn saving(instance: &Instance, depot: NodeId, i: NodeId, j: NodeId) -> f64 {
    instance.dist(i, depot) + instance.dist(depot, j) - instance.dist(i, j)
}

/// Depot node used as the savings hub: the shared depot when every vehicle
/// starts and ends at one node, otherwise the vehicle depot closest to the
/// centroid of the request nodes.
pub fn savings_hub(instance: &Instance) -> Option<NodeId> {
    let vehicles = instance.vehicles();
    let first = vehicles.first()?;
    if vehicles.iter().all(|v| v.start_depot == first.start_depot && v.end_depot == first.start_depot) {
        return Some(first.start_depot);
    }
    let nodes = instance.nodes();
    let service: Vec<_> = nodes.iter().filter(|n| matches!(n.kind, NodeKind::Pickup | NodeKind::Delivery)).collect();
    let count = service.len().max(1) as f64;
    let cx = service.iter().map(|n| n.x).sum::<f64>() / count;
    let cy = service.iter().map(|n| n.y).sum::<f64>() / count;
    vehicles
        .iter()
        .flat_map(|v| [v.start_depot, v.end_depot])
        .min_by(|&a, &b| {
            let da = libm::hypot(nodes[a].x - cx, nodes[a].y - cy);
            let db = libm::hypot(nodes[b].x - cx, nodes[b].y - cy);
            da.total_cmp(&db).then(a.cmp(&b))
        })
}

/// Savings for every ordered pair of requests (delivery of the first, pickup
/// of the second), sorted non-increasing; equal values keep pair order.
pub fn savings_list(instance: &Instance, hub: NodeId) -> Vec<Saving> {
    let reqs = instance.requests();
    let mut list = Vec::with_capacity(reqs.len() * reqs.len().saturating_sub(1));
    for a in reqs {
        for b in reqs {
            if a.id != b.id {
                list.push(Saving { from: a.delivery, to: b.pickup, value: saving(instance, hub, a.delivery, b.pickup) });
            }
        }
    }
    list.sort_by(|x, y| y.value.total_cmp(&x.value));
    list
}

struct Segment {
    stops: Vec<Stop>,
    peak: u32,
}

/// Sequential Clarke–Wright savings.
///
/// Every request starts on its own round trip. Each route in turn absorbs
/// the route offering the first usable saving at either of its ends until
/// no merge is possible; the merged routes are then given to vehicles.
pub fn clarke_wright(instance: &Instance) -> Result<Solution> {
    let Some(hub) = savings_hub(instance) else {
        return match instance.num_requests() {
            0 => Ok(Solution::empty(instance)),
            routes => Err(Error::InsufficientFleet { routes, vehicles: 0 }),
        };
    };
    check_capacities(instance)?;
    let max_cap = instance.max_capacity();
    let savings = savings_list(instance, hub);

    let mut segments: Vec<Option<Segment>> = instance
        .requests()
        .iter()
        .map(|r| {
            Some(Segment {
                stops: vec![Stop::new(r.pickup, Action::Pickup(r.id)), Stop::new(r.delivery, Action::Delivery(r.id))],
                peak: r.quantity,
            })
        })
        .collect();
    // Segment index whose first (last) stop is at the given node.
    let n_nodes = instance.num_nodes();
    let mut starts_at: Vec<Option<usize>> = vec![None; n_nodes];
    let mut ends_at: Vec<Option<usize>> = vec![None; n_nodes];
    for (i, r) in instance.requests().iter().enumerate() {
        starts_at[r.pickup] = Some(i);
        ends_at[r.delivery] = Some(i);
    }

    for current in 0..segments.len() {
        if segments[current].is_none() {
            continue;
        }
        loop {
            let cur = segments[current].as_ref().unwrap();
            let head = cur.stops.first().unwrap().node;
            let tail = cur.stops.last().unwrap().node;
            let merge = savings.iter().find_map(|s| {
                // Another route ending at `from` goes before the current one.
                if s.to == head {
                    if let Some(other) = ends_at[s.from].filter(|&o| o != current) {
                        let peak = segments[other].as_ref()?.peak.max(cur.peak);
                        return (peak <= max_cap).then_some((other, true));
                    }
                }
                // Another route starting at `to` goes after the current one.
                if s.from == tail {
                    if let Some(other) = starts_at[s.to].filter(|&o| o != current) {
                        let peak = segments[other].as_ref()?.peak.max(cur.peak);
                        return (peak <= max_cap).then_some((other, false));
                    }
                }
                None
            });
            let Some((other, before)) = merge else { break };
            let absorbed = segments[other].take().unwrap();
            let cur = segments[current].as_mut().unwrap();
            let old_head = cur.stops.first().unwrap().node;
            let old_tail = cur.stops.last().unwrap().node;
            starts_at[old_head] = None;
            ends_at[old_tail] = None;
            starts_at[absorbed.stops.first().unwrap().node] = None;
            ends_at[absorbed.stops.last().unwrap().node] = None;
            cur.peak = cur.peak.max(absorbed.peak);
            if before {
                let mut stops = absorbed.stops;
                stops.append(&mut cur.stops);
                cur.stops = stops;
            } else {
                cur.stops.extend(absorbed.stops);
            }
            starts_at[cur.stops.first().unwrap().node] = Some(current);
            ends_at[cur.stops.last().unwrap().node] = Some(current);
        }
    }

    assign_segments(instance, segments.into_iter().flatten().collect())
}

/// Gives each merged route to a distinct vehicle: largest peak load first,
/// each to the free vehicle with room whose depots add the least distance.
fn assign_segments(instance: &Instance, mut segments: Vec<Segment>) -> Result<Solution> {
    let nv = instance.num_vehicles();
    if segments.len() > nv {
        return Err(Error::InsufficientFleet { routes: segments.len(), vehicles: nv });
    }
    segments.sort_by(|a, b| b.peak.cmp(&a.peak));
    let mut solution = Solution::empty(instance);
    let mut used = vec![false; nv];
    let n_segments = segments.len();
    for seg in segments {
        let head = seg.stops.first().unwrap().node;
        let tail = seg.stops.last().unwrap().node;
        let choice = instance
            .vehicles()
            .iter()
            .filter(|v| !used[v.id] && v.capacity >= seg.peak)
            .min_by(|a, b| {
                let ca = instance.dist(a.start_depot, head) + instance.dist(tail, a.end_depot);
                let cb = instance.dist(b.start_depot, head) + instance.dist(tail, b.end_depot);
                ca.total_cmp(&cb).then(a.id.cmp(&b.id))
            })
            .ok_or(Error::InsufficientFleet { routes: n_segments, vehicles: nv })?;
        used[choice.id] = true;
        let route: &mut Route = &mut solution.routes[choice.id];
        route.stops.splice(1..1, seg.stops);
    }
    solution.infer_assignment(instance);
    Ok(solution)
}

/// One transshipment pass: every request in id order is removed and put
/// back at the cheapest of (a) its best direct position, (b) its best
/// pickup-to-transfer leg followed by the best transfer-to-delivery leg,
/// (c) the same legs in the opposite order, over every transfer point. The
/// request stays where it was unless the move is strictly cheaper, so the
/// cost never increases.
pub fn transship_improve(instance: &Instance, solution: &Solution) -> Solution {
    let mut sol = solution.clone();
    let mut cost = solution_cost(instance, &sol);
    for r in 0..instance.num_requests() {
        let assignment = sol.assignment[r];
        let removed = sol.remove_request(r);
        let cost_without = solution_cost(instance, &sol);
        let loads = all_loads(instance, &sol);
        match best_plan(instance, &sol, &loads, r, true) {
            Some(plan) if cost_without + plan.delta() < cost - IMPROVE_EPS => {
                apply_plan(instance, &mut sol, &plan);
                cost = solution_cost(instance, &sol);
            }
            _ => sol.restore_request(r, &removed, assignment),
        }
    }
    debug_assert!(solution_cost(instance, &sol) <= solution_cost(instance, solution) + IMPROVE_EPS);
    sol
}

/// Runs transshipment passes until one improves by less than `COST_EPS`
/// or `max_passes` is reached. Returns the solution and the cost after
/// each pass, starting with the input cost.
pub fn transship_until_stable(instance: &Instance, solution: &Solution, max_passes: usize) -> (Solution, Vec<f64>) {
    let mut current = solution.clone();
    let mut trace = vec![solution_cost(instance, &current)];
    for _ in 0..max_passes {
        let next = transship_improve(instance, &current);
        let cost = solution_cost(instance, &next);
        let before = *trace.last().unwrap();
        trace.push(cost);
        current = next;
        if before - cost < COST_EPS {
            break;
        }
    }
    (current, trace)
}

/// Best of `starts` runs of shuffled cheapest insertion followed by
/// transshipment to a fixed point. Start `i` draws from stream `i` of
/// `seed`; ties go to the lower start index.
pub fn multistart(instance: &Instance, starts: usize, seed: u64) -> Result<Solution> {
    if starts == 0 {
        return Err(Error::InvalidInput("multistart needs at least one start".into()));
    }
    let results = par::map_indexed(starts, |i| {
        let mut rng = rng::stream(seed, i as u64);
        let mut order: Vec<RequestId> = (0..instance.num_requests()).collect();
        order.shuffle(&mut rng);
        let initial = insert_in_order(instance, &order)?;
        let (improved, _) = transship_until_stable(instance, &initial, MAX_TRANSSHIP_PASSES);
        let cost = solution_cost(instance, &improved);
        Ok((cost, improved))
    });
    best_of(results)
}

/// Lowest-cost success, earlier entries winning ties; the first error if
/// nothing succeeded.
pub(crate) fn best_of(results: Vec<Result<(f64, Solution)>>) -> Result<Solution> {
    let mut best: Option<(f64, Solution)> = None;
    let mut first_err = None;
    for res in results {
        match res {
            Ok((cost, sol)) => {
                if best.as_ref().is_none_or(|(c, _)| cost < *c - IMPROVE_EPS) {
                    best = Some((cost, sol));
                }
            }
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    match (best, first_err) {
        (Some((_, sol)), _) => Ok(sol),
        (None, Some(e)) => Err(e),
        (None, None) => Err(Error::NoFeasible),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::check_feasibility;
    use crate::model::fixtures::{build, relay};
    use crate::oracle::{solve_exact, OracleLimits};
    use crate::solution::Assignment;

    fn three_requests() -> Instance {
        build(
            &[((2.0, 8.0), (6.0, 9.0), 3), ((-4.0, 3.0), (-7.0, -2.0), 4), ((5.0, -5.0), (1.0, -9.0), 2)],
            &[((0.0, 0.0), (0.0, 0.0), 6), ((1.0, 1.0), (1.0, 1.0), 6)],
            &[],
        )
    }

    #[test]
    fn greedy_picks_nearer_vehicle() {
        let inst = build(
            &[((9.0, 0.0), (10.0, 0.0), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 5), ((8.0, 0.0), (8.0, 0.0), 5)],
            &[],
        );
        let s = greedy_construct(&inst).unwrap();
        assert_eq!(s.assignment[0], Some(Assignment::Direct { vehicle: 1 }));
        assert!(s.routes[0].is_empty());
    }

    #[test]
    fn greedy_without_requests() {
        let inst = build(&[], &[((0.0, 0.0), (3.0, 4.0), 5), ((1.0, 1.0), (1.0, 1.0), 5)], &[]);
        let s = greedy_construct(&inst).unwrap();
        assert_eq!(solution_cost(&inst, &s), 5.0);
    }

    #[test]
    fn greedy_is_feasible_and_above_optimum() {
        let inst = three_requests();
        let s = greedy_construct(&inst).unwrap();
        assert!(check_feasibility(&inst, &s).feasible);
        let (_, opt) = solve_exact(&inst, &OracleLimits::default()).unwrap();
        assert!(solution_cost(&inst, &s) >= opt - 1e-9);
    }

    #[test]
    fn oversized_request_fails_everywhere() {
        let inst = build(&[((1.0, 0.0), (2.0, 0.0), 9)], &[((0.0, 0.0), (0.0, 0.0), 5)], &[]);
        let err = Error::NoFeasibleInsertion { request: 0 };
        assert_eq!(greedy_construct(&inst).unwrap_err(), err);
        assert_eq!(clarke_wright(&inst).unwrap_err(), err);
        assert_eq!(multistart(&inst, 3, 1).unwrap_err(), err);
    }

    #[test]
    fn saving_formula() {
        // Triangle with c(i,0) = c(0,j) = 10 and c(i,j) = 5: 10 + 10 - 5.
        let h = libm::sqrt(100.0 - 6.25);
        let inst = build(&[((-2.5, h), (2.5, h), 1)], &[((0.0, 0.0), (0.0, 0.0), 1)], &[]);
        let s = saving(&inst, 2, 0, 1);
        assert!((s - 15.0).abs() < 1e-12, "{s}");
    }

    #[test]
    fn savings_sorted_non_increasing() {
        let inst = three_requests();
        let list = savings_list(&inst, savings_hub(&inst).unwrap());
        assert!(list.windows(2).all(|w| w[0].value >= w[1].value));
        assert_eq!(list.len(), 6);
    }

    #[test]
    fn colocated_far_requests_merge() {
        let inst = build(
            &[((50.0, 0.0), (51.0, 0.0), 1), ((50.5, 0.5), (51.5, 0.5), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 5), ((0.0, 0.0), (0.0, 0.0), 5)],
            &[],
        );
        let s = clarke_wright(&inst).unwrap();
        assert_eq!(s.routes.iter().filter(|r| !r.is_empty()).count(), 1);
        assert!(check_feasibility(&inst, &s).feasible);
    }

    #[test]
    fn clarke_wright_beats_round_trips() {
        let inst = build(
            &[((2.0, 8.0), (6.0, 9.0), 3), ((-4.0, 3.0), (-7.0, -2.0), 4), ((5.0, -5.0), (1.0, -9.0), 2)],
            &[((0.0, 0.0), (0.0, 0.0), 6), ((0.0, 0.0), (0.0, 0.0), 6)],
            &[],
        );
        let s = clarke_wright(&inst).unwrap();
        assert!(check_feasibility(&inst, &s).feasible);
        // Sum of the three depot -> p -> d -> depot round trips.
        let round_trips: f64 = inst
            .requests()
            .iter()
            .map(|r| inst.dist(4, r.pickup) + inst.dist(r.pickup, r.delivery) + inst.dist(r.delivery, 4))
            .sum();
        assert!(solution_cost(&inst, &s) <= round_trips + 1e-9);
    }

    #[test]
    fn insufficient_fleet() {
        let inst = build(&[((1.0, 0.0), (2.0, 0.0), 1)], &[], &[]);
        assert!(matches!(clarke_wright(&inst), Err(Error::InsufficientFleet { .. })));
    }

    #[test]
    fn transship_adopts_relay() {
        let inst = relay();
        let direct = greedy_construct(&inst).unwrap();
        let before = solution_cost(&inst, &direct);
        let improved = transship_improve(&inst, &direct);
        assert!(matches!(improved.assignment[0], Some(Assignment::Transferred { .. })));
        assert!(check_feasibility(&inst, &improved).feasible);
        let after = solution_cost(&inst, &improved);
        assert!((after - 40.0).abs() < 1e-9);
        // 1 + 9 sqrt 2 + sqrt 181 - 20 extra for the direct service.
        let direct_extra = 1.0 + 9.0 * libm::sqrt(2.0) + libm::sqrt(181.0) - 20.0;
        assert!((before - 40.0 - direct_extra).abs() < 1e-9);
    }

    #[test]
    fn transship_without_transfers_only_reinserts() {
        let inst = three_requests();
        let s = insert_in_order(&inst, &[2, 0, 1]).unwrap();
        let t = transship_improve(&inst, &s);
        assert!(solution_cost(&inst, &t) <= solution_cost(&inst, &s) + 1e-9);
        assert!(t.assignment.iter().all(|a| matches!(a, Some(Assignment::Direct { .. }))));
        assert!(check_feasibility(&inst, &t).feasible);
    }

    #[test]
    fn multistart_is_reproducible_and_monotone_in_starts() {
        let inst = three_requests();
        let a = multistart(&inst, 1, 11).unwrap();
        let b = multistart(&inst, 1, 11).unwrap();
        assert_eq!(a, b);
        // One start equals shuffled insertion plus transshipment.
        let mut order: Vec<RequestId> = (0..3).collect();
        order.shuffle(&mut rng::stream(11, 0));
        let manual = transship_until_stable(&inst, &insert_in_order(&inst, &order).unwrap(), MAX_TRANSSHIP_PASSES).0;
        assert_eq!(a, manual);
        let many = multistart(&inst, 20, 11).unwrap();
        assert!(solution_cost(&inst, &many) <= solution_cost(&inst, &a) + 1e-12);
    }
}
