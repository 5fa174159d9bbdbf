//! Earliest-time schedule propagation.
//!
//! Departure times follow each route with zero dwell (`D_j = D_i + t_ij`),
//! except that a transfer pick may not leave before the matching transfer
//! drop. Loads start at zero and change by the request quantity at every
//! service stop.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::Instance;
use crate::solution::{Action, Solution};

/// Departure time and load after service, per route and stop index.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    pub departure: Vec<Vec<f64>>,
    pub load: Vec<Vec<i64>>,
}

/// Flattened stop graph: route successor arcs plus drop-to-pick sync arcs.
struct StopGraph {
    offsets: Vec<usize>,
    /// For each flattened stop, the drop it must wait for.
    sync_pred: Vec<Option<usize>>,
    /// Reverse of `sync_pred`.
    sync_succ: Vec<Vec<usize>>,
}

impl StopGraph {
    fn build(solution: &Solution) -> Self {
        let mut offsets = Vec::with_capacity(solution.routes.len() + 1);
        let mut total = 0;
        for route in &solution.routes {
            offsets.push(total);
            total += route.stops.len();
        }
        offsets.push(total);

        let mut drops = Vec::new();
        for (ri, route) in solution.routes.iter().enumerate() {
            for (si, stop) in route.stops.iter().enumerate() {
                if let Action::TransferDrop { request, transfer } = stop.action {
                    drops.push(((request, transfer), offsets[ri] + si));
                }
            }
        }
        drops.sort_unstable();

        let mut sync_pred = vec![None; total];
        let mut sync_succ = vec![Vec::new(); total];
        for (ri, route) in solution.routes.iter().enumerate() {
            for (si, stop) in route.stops.iter().enumerate() {
                if let Action::TransferPick { request, transfer } = stop.action {
                    let key = (request, transfer);
                    let at = drops.partition_point(|(k, _)| *k < key);
                    if let Some(&(k, flat)) = drops.get(at) {
                        if k == key {
                            let me = offsets[ri] + si;
                            sync_pred[me] = Some(flat);
                            sync_succ[flat].push(me);
                        }
                    }
                }
            }
        }
        Self { offsets, sync_pred, sync_succ }
    }

    fn route_of(&self, flat: usize) -> usize {
        self.offsets.partition_point(|&o| o <= flat) - 1
    }

    /// Topological order of all stops, or `None` on a cycle.
    fn topological_order(&self) -> Option<Vec<usize>> {
        let total = self.sync_pred.len();
        let mut indegree = vec![0usize; total];
        for r in 0..self.offsets.len() - 1 {
            for flat in self.offsets[r] + 1..self.offsets[r + 1] {
                indegree[flat] += 1;
            }
        }
        for (flat, pred) in self.sync_pred.iter().enumerate() {
            if pred.is_some() {
                indegree[flat] += 1;
            }
        }
        let mut queue: VecDeque<usize> = (0..total).filter(|&f| indegree[f] == 0).collect();
        let mut order = Vec::with_capacity(total);
        while let Some(flat) = queue.pop_front() {
            order.push(flat);
            let r = self.route_of(flat);
            let mut release = |f: usize| {
                indegree[f] -= 1;
                if indegree[f] == 0 {
                    queue.push_back(f);
                }
            };
            if flat + 1 < self.offsets[r + 1] {
                release(flat + 1);
            }
            for &succ in &self.sync_succ[flat] {
                release(succ);
            }
        }
        (order.len() == total).then_some(order)
    }
}

/// True when no chain of transfer waits loops back on itself.
pub fn transfers_acyclic(solution: &Solution) -> bool {
    if !solution.routes.iter().any(|r| r.has_transfer_stops()) {
        return true;
    }
    StopGraph::build(solution).topological_order().is_some()
}

/// Computes departure times and loads for every stop.
///
/// Fails with [`Error::CyclicTransfer`] when transfer waits form a cycle.
pub fn propagate_schedule(instance: &Instance, solution: &Solution) -> Result<Schedule> {
    let load = solution.routes.iter().map(|r| r.loads(instance)).collect();
    let graph = StopGraph::build(solution);
    let order = graph.topological_order().ok_or(Error::CyclicTransfer)?;

    let mut flat_time = vec![0.0f64; graph.sync_pred.len()];
    for flat in order {
        let r = graph.route_of(flat);
        let si = flat - graph.offsets[r];
        let mut t = 0.0;
        if si > 0 {
            let stops = &solution.routes[r].stops;
            t = flat_time[flat - 1] + instance.dist(stops[si - 1].node, stops[si].node);
        }
        if let Some(drop) = graph.sync_pred[flat] {
            t = t.max(flat_time[drop]);
        }
        flat_time[flat] = t;
    }

    let departure = (0..solution.routes.len())
        .map(|r| flat_time[graph.offsets[r]..graph.offsets[r + 1]].to_vec())
        .collect();
    Ok(Schedule { departure, load })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::build;
    use crate::solution::Stop;

    #[test]
    fn single_route_chain() {
        // depot (0,0) -> p (1,0) -> d (2,0) -> depot (3,0)
        let inst = build(&[((1.0, 0.0), (2.0, 0.0), 4)], &[((0.0, 0.0), (3.0, 0.0), 10)], &[]);
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        let sched = propagate_schedule(&inst, &s).unwrap();
        assert_eq!(sched.departure, vec![vec![0.0, 1.0, 2.0, 3.0]]);
        assert_eq!(sched.load, vec![vec![0, 4, 0, 0]]);
    }

    #[test]
    fn empty_route() {
        let inst = build(&[], &[((0.0, 0.0), (3.0, 4.0), 10)], &[]);
        let sched = propagate_schedule(&inst, &Solution::empty(&inst)).unwrap();
        assert_eq!(sched.departure, vec![vec![0.0, 5.0]]);
        assert_eq!(sched.load, vec![vec![0, 0]]);
    }

    /// Vehicle 1 reaches the transfer at t = 10 from its depot at x = 20,
    /// vehicle 0 drops there at t = 1 + 9 = 10 as well; moving vehicle 1's
    /// depot to x = 12 makes it arrive at t = 2, so its pick is lifted to
    /// the drop time 10 and everything after shifts by 8.
    #[test]
    fn transfer_pick_waits_for_drop() {
        let inst = build(
            &[((1.0, 0.0), (19.0, 0.0), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 5), ((12.0, 0.0), (12.0, 0.0), 5)],
            &[(10.0, 0.0)],
        );
        let t = inst.transfer_points()[0];
        let mut s = Solution::empty(&inst);
        s.routes[0].stops.insert(1, Stop::new(0, Action::Pickup(0)));
        s.routes[0].stops.insert(2, Stop::new(t, Action::TransferDrop { request: 0, transfer: t }));
        s.routes[1].stops.insert(1, Stop::new(t, Action::TransferPick { request: 0, transfer: t }));
        s.routes[1].stops.insert(2, Stop::new(1, Action::Delivery(0)));
        let sched = propagate_schedule(&inst, &s).unwrap();
        // Hand solution of D_pick >= D_start + 2 and D_pick >= D_drop = 10.
        assert_eq!(sched.departure[0], vec![0.0, 1.0, 10.0, 20.0]);
        assert_eq!(sched.departure[1], vec![0.0, 10.0, 19.0, 26.0]);
        assert_eq!(sched.load[0], vec![0, 1, 0, 0]);
        assert_eq!(sched.load[1], vec![0, 1, 0, 0]);
    }

    #[test]
    fn cyclic_transfer_is_an_error() {
        let inst = build(
            &[((1.0, 0.0), (19.0, 0.0), 1), ((18.0, 0.0), (2.0, 0.0), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 5), ((20.0, 0.0), (20.0, 0.0), 5)],
            &[(10.0, 0.0)],
        );
        let t = inst.transfer_points()[0];
        // Each vehicle picks the other's request before dropping its own.
        let mut s = Solution::empty(&inst);
        s.routes[0].stops.splice(
            1..1,
            [
                Stop::new(0, Action::Pickup(0)),
                Stop::new(t, Action::TransferPick { request: 1, transfer: t }),
                Stop::new(t, Action::TransferDrop { request: 0, transfer: t }),
                Stop::new(3, Action::Delivery(1)),
            ],
        );
        s.routes[1].stops.splice(
            1..1,
            [
                Stop::new(2, Action::Pickup(1)),
                Stop::new(t, Action::TransferPick { request: 0, transfer: t }),
                Stop::new(t, Action::TransferDrop { request: 1, transfer: t }),
                Stop::new(1, Action::Delivery(0)),
            ],
        );
        assert_eq!(propagate_schedule(&inst, &s), Err(Error::CyclicTransfer));
        assert!(!transfers_acyclic(&s));
    }
}
