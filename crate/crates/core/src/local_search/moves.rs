//! Request moves and the three neighborhoods.
//!
//! Only directly served requests move; transferred requests keep their
//! stops. Moving a direct request never reorders transfer stops, so the
//! drop/pick wait graph stays acyclic, and every placement is capacity
//! checked, so every enumerated move keeps the solution feasible.

use alloc::vec::Vec;
use core::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::cost::route_cost;
use crate::insertion::{best_placement, for_each_placement, Leg};
use crate::model::{Instance, RequestId};
use crate::rng::SolverRng;
use crate::solution::{Action, Assignment, Route, Solution, Stop};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MoveKind {
    /// Two requests in different routes trade places.
    Swr,
    /// A request leaves its route for another one.
    Rnr,
    /// A request is advanced or delayed within its own route.
    Adr,
}

pub const MOVE_KINDS: [MoveKind; 3] = [MoveKind::Adr, MoveKind::Rnr, MoveKind::Swr];

/// A route index plus the final positions of a request's pickup and
/// delivery in it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Slot {
    pub route: usize,
    pub pickup_pos: usize,
    pub delivery_pos: usize,
}

/// One request going from `from` (positions in the current route) to `to`
/// (positions in the target route after every moved request is removed).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Relocation {
    pub request: RequestId,
    pub from: Slot,
    pub to: Slot,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Move {
    pub kind: MoveKind,
    pub first: Relocation,
    /// The partner request of a swap.
    pub second: Option<Relocation>,
    pub delta_cost: f64,
}

impl Move {
    fn relocations(&self) -> impl Iterator<Item = Relocation> {
        core::iter::once(self.first).chain(self.second)
    }

    pub fn apply(&self, instance: &Instance, solution: &mut Solution) {
        for rel in self.relocations() {
            solution.remove_request(rel.request);
        }
        for rel in self.relocations() {
            place(instance, solution, rel.request, rel.to);
        }
    }

    /// Undoes [`Move::apply`] on the solution it was applied to.
    pub fn revert(&self, instance: &Instance, solution: &mut Solution) {
        for rel in self.relocations() {
            solution.remove_request(rel.request);
        }
        for rel in self.relocations() {
            place(instance, solution, rel.request, rel.from);
        }
    }
}

fn place(instance: &Instance, solution: &mut Solution, r: RequestId, slot: Slot) {
    let vehicle = solution.routes[slot.route].vehicle;
    let req = instance.request(r);
    let stops = &mut solution.routes[slot.route].stops;
    stops.insert(slot.pickup_pos, Stop::new(req.pickup, Action::Pickup(r)));
    stops.insert(slot.delivery_pos, Stop::new(req.delivery, Action::Delivery(r)));
    solution.assignment[r] = Some(Assignment::Direct { vehicle });
}

/// A direct request taken out of its route.
pub(crate) struct Extracted {
    pub request: RequestId,
    pub from: Slot,
    pub rest: Route,
    pub rest_loads: Vec<i64>,
    /// Route cost drop from taking the request out.
    pub saving: f64,
}

fn extract(instance: &Instance, route: &Route, route_idx: usize, r: RequestId, full_cost: f64) -> Extracted {
    let p = route.position_of(Action::Pickup(r)).unwrap();
    let d = route.position_of(Action::Delivery(r)).unwrap();
    let mut rest = route.clone();
    rest.stops.remove(d);
    rest.stops.remove(p);
    let saving = full_cost - route_cost(instance, &rest);
    Extracted {
        request: r,
        from: Slot { route: route_idx, pickup_pos: p, delivery_pos: d },
        rest_loads: rest.loads(instance),
        rest,
        saving,
    }
}

/// Direct requests of a route, in pickup order.
fn direct_requests(solution: &Solution, route_idx: usize) -> impl Iterator<Item = RequestId> + '_ {
    let route = &solution.routes[route_idx];
    route.stops.iter().filter_map(move |s| match s.action {
        Action::Pickup(r) if matches!(solution.assignment.get(r), Some(Some(Assignment::Direct { vehicle })) if *vehicle == route.vehicle) => {
            Some(r)
        }
        _ => None,
    })
}

/// Every direct request of every route taken out, grouped by route.
pub(crate) fn extract_all(instance: &Instance, solution: &Solution) -> Vec<Vec<Extracted>> {
    (0..solution.routes.len())
        .map(|ri| {
            let route = &solution.routes[ri];
            let cost = route_cost(instance, route);
            direct_requests(solution, ri).map(|r| extract(instance, route, ri, r, cost)).collect()
        })
        .collect()
}

/// Visits every advance/delay move in (route, pickup position, new
/// positions) order. Identity placements are skipped.
pub fn scan_adr(instance: &Instance, solution: &Solution, visit: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
    for group in extract_all(instance, solution) {
        for ex in &group {
            let leg = Leg::direct(instance, ex.request);
            let mut flow = ControlFlow::Continue(());
            for_each_placement(instance, &ex.rest, &ex.rest_loads, &leg, |a, b, delta| {
                if flow.is_break() || (a == ex.from.pickup_pos && b == ex.from.delivery_pos) {
                    return;
                }
                let to = Slot { route: ex.from.route, pickup_pos: a, delivery_pos: b };
                flow = visit(Move {
                    kind: MoveKind::Adr,
                    first: Relocation { request: ex.request, from: ex.from, to },
                    second: None,
                    delta_cost: delta - ex.saving,
                });
            });
            flow?;
        }
    }
    ControlFlow::Continue(())
}

/// Visits every move of one direct request into another route.
pub fn scan_rnr(instance: &Instance, solution: &Solution, visit: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
    let loads: Vec<Vec<i64>> = solution.routes.iter().map(|r| r.loads(instance)).collect();
    for group in extract_all(instance, solution) {
        for ex in &group {
            let leg = Leg::direct(instance, ex.request);
            for (bi, target) in solution.routes.iter().enumerate() {
                if bi == ex.from.route {
                    continue;
                }
                let mut flow = ControlFlow::Continue(());
                for_each_placement(instance, target, &loads[bi], &leg, |a, b, delta| {
                    if flow.is_break() {
                        return;
                    }
                    let to = Slot { route: bi, pickup_pos: a, delivery_pos: b };
                    flow = visit(Move {
                        kind: MoveKind::Rnr,
                        first: Relocation { request: ex.request, from: ex.from, to },
                        second: None,
                        delta_cost: delta - ex.saving,
                    });
                });
                flow?;
            }
        }
    }
    ControlFlow::Continue(())
}

fn swap_move(instance: &Instance, x: &Extracted, y: &Extracted) -> Option<Move> {
    // y goes where x was, x goes where y was.
    let into_x = best_placement(instance, &x.rest, &x.rest_loads, &Leg::direct(instance, y.request))?;
    let into_y = best_placement(instance, &y.rest, &y.rest_loads, &Leg::direct(instance, x.request))?;
    Some(Move {
        kind: MoveKind::Swr,
        first: Relocation {
            request: x.request,
            from: x.from,
            to: Slot { route: y.from.route, pickup_pos: into_y.first_pos, delivery_pos: into_y.second_pos },
        },
        second: Some(Relocation {
            request: y.request,
            from: y.from,
            to: Slot { route: x.from.route, pickup_pos: into_x.first_pos, delivery_pos: into_x.second_pos },
        }),
        delta_cost: into_x.delta + into_y.delta - x.saving - y.saving,
    })
}

/// Visits one swap per pair of direct requests in different routes, each
/// reinserted at its cheapest spot in the other's route.
pub fn scan_swr(instance: &Instance, solution: &Solution, visit: &mut dyn FnMut(Move) -> ControlFlow<()>) -> ControlFlow<()> {
    let groups = extract_all(instance, solution);
    for (ai, ga) in groups.iter().enumerate() {
        for gb in &groups[ai + 1..] {
            for x in ga {
                for y in gb {
                    if let Some(m) = swap_move(instance, x, y) {
                        visit(m)?;
                    }
                }
            }
        }
    }
    ControlFlow::Continue(())
}

pub fn scan(
    kind: MoveKind,
    instance: &Instance,
    solution: &Solution,
    visit: &mut dyn FnMut(Move) -> ControlFlow<()>,
) -> ControlFlow<()> {
    match kind {
        MoveKind::Swr => scan_swr(instance, solution, visit),
        MoveKind::Rnr => scan_rnr(instance, solution, visit),
        MoveKind::Adr => scan_adr(instance, solution, visit),
    }
}

fn collect(kind: MoveKind, instance: &Instance, solution: &Solution) -> Vec<Move> {
    let mut out = Vec::new();
    let _ = scan(kind, instance, solution, &mut |m| {
        out.push(m);
        ControlFlow::Continue(())
    });
    out
}

pub fn neighborhood_swr(instance: &Instance, solution: &Solution) -> Vec<Move> {
    collect(MoveKind::Swr, instance, solution)
}

pub fn neighborhood_rnr(instance: &Instance, solution: &Solution) -> Vec<Move> {
    collect(MoveKind::Rnr, instance, solution)
}

pub fn neighborhood_adr(instance: &Instance, solution: &Solution) -> Vec<Move> {
    collect(MoveKind::Adr, instance, solution)
}

/// Draws one random move: a kind uniformly, then a request, then (for
/// RNR) a target route, then a placement, each uniformly among what is
/// feasible. Kinds that yield nothing after a few draws are dropped and
/// another kind is tried. `None` when no move exists at all.
pub fn sample_move(instance: &Instance, solution: &Solution, rng: &mut SolverRng) -> Option<Move> {
    const DRAWS: usize = 16;
    let groups = extract_all(instance, solution);
    let all: Vec<&Extracted> = groups.iter().flatten().collect();
    if all.is_empty() {
        return None;
    }
    let mut kinds = MOVE_KINDS;
    kinds.shuffle(rng);
    for kind in kinds {
        for _ in 0..DRAWS {
            let x = all[rng.gen_range(0..all.len())];
            let leg = Leg::direct(instance, x.request);
            let found = match kind {
                MoveKind::Adr => {
                    let mut spots = Vec::new();
                    for_each_placement(instance, &x.rest, &x.rest_loads, &leg, |a, b, delta| {
                        if (a, b) != (x.from.pickup_pos, x.from.delivery_pos) {
                            spots.push((a, b, delta));
                        }
                    });
                    spots.choose(rng).map(|&(a, b, delta)| Move {
                        kind,
                        first: Relocation {
                            request: x.request,
                            from: x.from,
                            to: Slot { route: x.from.route, pickup_pos: a, delivery_pos: b },
                        },
                        second: None,
                        delta_cost: delta - x.saving,
                    })
                }
                MoveKind::Rnr => {
                    let others: Vec<usize> = (0..solution.routes.len()).filter(|&b| b != x.from.route).collect();
                    let Some(&bi) = others.choose(rng) else { break };
                    let target = &solution.routes[bi];
                    let loads = target.loads(instance);
                    let mut spots = Vec::new();
                    for_each_placement(instance, target, &loads, &leg, |a, b, delta| spots.push((a, b, delta)));
                    spots.choose(rng).map(|&(a, b, delta)| Move {
                        kind,
                        first: Relocation {
                            request: x.request,
                            from: x.from,
                            to: Slot { route: bi, pickup_pos: a, delivery_pos: b },
                        },
                        second: None,
                        delta_cost: delta - x.saving,
                    })
                }
                MoveKind::Swr => {
                    let partners: Vec<&Extracted> =
                        all.iter().copied().filter(|y| y.from.route != x.from.route).collect();
                    let Some(&y) = partners.choose(rng) else { break };
                    swap_move(instance, x, y)
                }
            };
            if found.is_some() {
                return found;
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::solution_cost;
    use crate::feasibility::check_feasibility;
    use crate::insertion::all_loads;
    use crate::model::fixtures::build;
    use crate::rng;
    use alloc::collections::BTreeSet;

    fn two_routes() -> (Instance, Solution) {
        let inst = build(
            &[
                ((1.0, 1.0), (2.0, 3.0), 2),
                ((3.0, 0.0), (4.0, 2.0), 2),
                ((-1.0, 2.0), (-3.0, 1.0), 3),
                ((-2.0, -2.0), (0.5, -3.0), 1),
            ],
            &[((0.0, 0.0), (0.0, 0.0), 4), ((0.0, 0.5), (0.0, 0.5), 4)],
            &[],
        );
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        s.insert_direct(&inst, 1, 0, 3, 4);
        s.insert_direct(&inst, 2, 1, 1, 2);
        s.insert_direct(&inst, 3, 1, 1, 4);
        (inst, s)
    }

    fn check_moves(inst: &Instance, s: &Solution, moves: &[Move]) {
        let base = solution_cost(inst, s);
        for m in moves {
            let mut t = s.clone();
            m.apply(inst, &mut t);
            assert!(check_feasibility(inst, &t).feasible, "{m:?}");
            assert!((solution_cost(inst, &t) - base - m.delta_cost).abs() < 1e-9, "{m:?}");
            m.revert(inst, &mut t);
            assert_eq!(&t, s);
        }
    }

    #[test]
    fn all_moves_are_feasible_exact_and_reversible() {
        let (inst, s) = two_routes();
        for moves in [neighborhood_adr(&inst, &s), neighborhood_rnr(&inst, &s), neighborhood_swr(&inst, &s)] {
            assert!(!moves.is_empty());
            check_moves(&inst, &s, &moves);
        }
    }

    #[test]
    fn single_route_has_no_inter_route_moves() {
        let inst = build(&[((1.0, 0.0), (2.0, 0.0), 1), ((3.0, 1.0), (4.0, 1.0), 1)], &[((0.0, 0.0), (0.0, 0.0), 5)], &[]);
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        s.insert_direct(&inst, 1, 0, 3, 4);
        assert!(neighborhood_swr(&inst, &s).is_empty());
        assert!(neighborhood_rnr(&inst, &s).is_empty());
    }

    #[test]
    fn lone_request_has_no_adr_move() {
        let inst = build(&[((1.0, 0.0), (2.0, 0.0), 1)], &[((0.0, 0.0), (0.0, 0.0), 5)], &[]);
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        assert!(neighborhood_adr(&inst, &s).is_empty());
    }

    #[test]
    fn mirrored_swap_costs_nothing() {
        // Two vehicles at one depot, two identical-by-reflection requests.
        let inst = build(
            &[((1.0, 1.0), (2.0, 1.0), 1), ((1.0, -1.0), (2.0, -1.0), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 3), ((0.0, 0.0), (0.0, 0.0), 3)],
            &[],
        );
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        s.insert_direct(&inst, 1, 1, 1, 2);
        let swaps = neighborhood_swr(&inst, &s);
        assert_eq!(swaps.len(), 1);
        assert!(swaps[0].delta_cost.abs() < 1e-12);
    }

    #[test]
    fn adr_keeps_route_node_multiset() {
        let (inst, s) = two_routes();
        for m in neighborhood_adr(&inst, &s) {
            let mut t = s.clone();
            m.apply(&inst, &mut t);
            for k in 0..2 {
                let mut a: Vec<_> = s.routes[k].stops.iter().map(|x| x.node).collect();
                let mut b: Vec<_> = t.routes[k].stops.iter().map(|x| x.node).collect();
                a.sort_unstable();
                b.sort_unstable();
                assert_eq!(a, b);
            }
        }
    }

    #[test]
    fn rnr_count_bound() {
        let (inst, s) = two_routes();
        let stops = s.routes.iter().map(|r| r.stops.len()).max().unwrap();
        let bound = inst.num_requests() * inst.num_vehicles() * stops * stops;
        assert!(neighborhood_rnr(&inst, &s).len() <= bound);
    }

    /// Every (request, route, positions) placement tried by hand and kept
    /// when the checker accepts it.
    fn brute_relocations(inst: &Instance, s: &Solution, same_route: bool) -> BTreeSet<(usize, usize, usize, usize)> {
        let mut out = BTreeSet::new();
        for r in 0..inst.num_requests() {
            let from = s.routes.iter().position(|rt| rt.position_of(Action::Pickup(r)).is_some()).unwrap();
            let p0 = s.routes[from].position_of(Action::Pickup(r)).unwrap();
            let d0 = s.routes[from].position_of(Action::Delivery(r)).unwrap();
            let mut base = s.clone();
            base.remove_request(r);
            for k in 0..s.routes.len() {
                if (k == from) != same_route {
                    continue;
                }
                let m = base.routes[k].stops.len();
                for a in 1..m + 1 {
                    for b in a + 1..m + 2 {
                        if same_route && (a, b) == (p0, d0) {
                            continue;
                        }
                        let mut t = base.clone();
                        t.insert_direct(inst, r, k, a, b);
                        if check_feasibility(inst, &t).feasible {
                            out.insert((r, k, a, b));
                        }
                    }
                }
            }
        }
        out
    }

    #[test]
    fn adr_and_rnr_match_brute_force() {
        let (inst, s) = two_routes();
        let key = |m: &Move| (m.first.request, m.first.to.route, m.first.to.pickup_pos, m.first.to.delivery_pos);
        let adr: BTreeSet<_> = neighborhood_adr(&inst, &s).iter().map(key).collect();
        assert_eq!(adr, brute_relocations(&inst, &s, true));
        let rnr: BTreeSet<_> = neighborhood_rnr(&inst, &s).iter().map(key).collect();
        assert_eq!(rnr, brute_relocations(&inst, &s, false));
    }

    #[test]
    fn swr_matches_brute_force() {
        let (inst, s) = two_routes();
        let base = solution_cost(&inst, &s);
        let mut brute = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                let rx = s.routes.iter().position(|rt| rt.position_of(Action::Pickup(x)).is_some()).unwrap();
                let ry = s.routes.iter().position(|rt| rt.position_of(Action::Pickup(y)).is_some()).unwrap();
                if rx >= ry {
                    continue;
                }
                let mut t = s.clone();
                t.remove_request(x);
                t.remove_request(y);
                let mut best: Option<f64> = None;
                let (mx, my) = (t.routes[ry].stops.len(), t.routes[rx].stops.len());
                for a in 1..mx + 1 {
                    for b in a + 1..mx + 2 {
                        for c in 1..my + 1 {
                            for d in c + 1..my + 2 {
                                let mut u = t.clone();
                                u.insert_direct(&inst, x, ry, a, b);
                                u.insert_direct(&inst, y, rx, c, d);
                                if check_feasibility(&inst, &u).feasible {
                                    let delta = solution_cost(&inst, &u) - base;
                                    best = Some(best.map_or(delta, |v: f64| v.min(delta)));
                                }
                            }
                        }
                    }
                }
                if let Some(b) = best {
                    brute.push(((x, y), b));
                }
            }
        }
        let moves = neighborhood_swr(&inst, &s);
        assert_eq!(moves.len(), brute.len());
        for ((x, y), delta) in brute {
            let m = moves.iter().find(|m| m.first.request == x && m.second.unwrap().request == y).unwrap();
            assert!((m.delta_cost - delta).abs() < 1e-9);
        }
    }

    #[test]
    fn transferred_requests_stay_put() {
        let inst = build(
            &[((1.0, 0.0), (10.0, 9.0), 1), ((2.0, 0.0), (3.0, 0.0), 1)],
            &[((0.0, 0.0), (20.0, 0.0), 5), ((10.0, -10.0), (10.0, 10.0), 5)],
            &[(10.0, 0.0)],
        );
        let t = inst.transfer_points()[0];
        let mut s = Solution::empty(&inst);
        s.routes[0].stops.splice(
            1..1,
            [Stop::new(0, Action::Pickup(0)), Stop::new(t, Action::TransferDrop { request: 0, transfer: t })],
        );
        s.routes[1].stops.splice(
            1..1,
            [Stop::new(t, Action::TransferPick { request: 0, transfer: t }), Stop::new(1, Action::Delivery(0))],
        );
        s.infer_assignment(&inst);
        let loads = all_loads(&inst, &s);
        let c = crate::insertion::best_direct(&inst, &s, &loads, 1).unwrap();
        s.insert_direct(&inst, 1, c.vehicle, c.pickup_pos, c.delivery_pos);
        for kind in MOVE_KINDS {
            let moves = collect(kind, &inst, &s);
            assert!(moves.iter().all(|m| m.first.request == 1 && m.second.is_none()));
            check_moves(&inst, &s, &moves);
        }
    }

    #[test]
    fn sampled_moves_belong_to_neighborhoods() {
        let (inst, s) = two_routes();
        let mut all = neighborhood_adr(&inst, &s);
        all.extend(neighborhood_rnr(&inst, &s));
        all.extend(neighborhood_swr(&inst, &s));
        let mut rng = rng::seeded(5);
        let mut seen = BTreeSet::new();
        for _ in 0..300 {
            let m = sample_move(&inst, &s, &mut rng).unwrap();
            let same = |n: &Move| {
                (n.first == m.first && n.second == m.second) || (Some(n.first) == m.second && n.second == Some(m.first))
            };
            assert!(all.iter().any(same), "{m:?}");
            seen.insert(m.kind);
        }
        assert_eq!(seen.len(), 3);
    }
}
