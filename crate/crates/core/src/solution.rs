//! Routes, stops and the request-to-vehicle assignment.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::model::{Instance, NodeId, RequestId, VehicleId};

/// What a vehicle does at a stop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    DepartDepot,
    Pickup(RequestId),
    Delivery(RequestId),
    /// First leg ends: the request is left at `transfer`.
    TransferDrop { request: RequestId, transfer: NodeId },
    /// Second leg starts: the request is collected at `transfer`.
    TransferPick { request: RequestId, transfer: NodeId },
    ArriveDepot,
}

impl Action {
    pub fn request(self) -> Option<RequestId> {
        match self {
            Action::Pickup(r) | Action::Delivery(r) => Some(r),
            Action::TransferDrop { request, .. } | Action::TransferPick { request, .. } => Some(request),
            Action::DepartDepot | Action::ArriveDepot => None,
        }
    }

    /// Signed load change at this stop for a request of size `quantity`.
    pub fn load_change(self, quantity: u32) -> i64 {
        match self {
            Action::Pickup(_) | Action::TransferPick { .. } => i64::from(quantity),
            Action::Delivery(_) | Action::TransferDrop { .. } => -i64::from(quantity),
            Action::DepartDepot | Action::ArriveDepot => 0,
        }
    }

    pub fn is_depot(self) -> bool {
        matches!(self, Action::DepartDepot | Action::ArriveDepot)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Stop {
    pub node: NodeId,
    pub action: Action,
}

impl Stop {
    pub fn new(node: NodeId, action: Action) -> Self {
        Self { node, action }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Route {
    pub vehicle: VehicleId,
    pub stops: Vec<Stop>,
}

impl Route {
    /// Depot-to-depot route with no service stops.
    pub fn empty(instance: &Instance, vehicle: VehicleId) -> Self {
        let v = instance.vehicle(vehicle);
        Self {
            vehicle,
            stops: vec![
                Stop::new(v.start_depot, Action::DepartDepot),
                Stop::new(v.end_depot, Action::ArriveDepot),
            ],
        }
    }

    /// Stops strictly between the depot endpoints.
    pub fn service_stops(&self) -> &[Stop] {
        let n = self.stops.len();
        if n >= 2 {
            &self.stops[1..n - 1]
        } else {
            &[]
        }
    }

    pub fn is_empty(&self) -> bool {
        self.service_stops().is_empty()
    }

    pub fn position_of(&self, action: Action) -> Option<usize> {
        self.stops.iter().position(|s| s.action == action)
    }

    pub fn has_transfer_stops(&self) -> bool {
        self.stops
            .iter()
            .any(|s| matches!(s.action, Action::TransferDrop { .. } | Action::TransferPick { .. }))
    }

    /// Load on board after each stop, starting from zero.
    pub fn loads(&self, instance: &Instance) -> Vec<i64> {
        let mut load = 0i64;
        self.stops
            .iter()
            .map(|s| {
                if let Some(r) = s.action.request() {
                    if r < instance.num_requests() {
                        load += s.action.load_change(instance.request(r).quantity);
                    }
                }
                load
            })
            .collect()
    }
}

/// How a request is served.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Assignment {
    Direct { vehicle: VehicleId },
    Transferred { first: VehicleId, transfer: NodeId, second: VehicleId },
}

impl Assignment {
    pub fn uses(self, vehicle: VehicleId) -> bool {
        match self {
            Assignment::Direct { vehicle: v } => v == vehicle,
            Assignment::Transferred { first, second, .. } => first == vehicle || second == vehicle,
        }
    }
}

/// One route per vehicle plus the assignment of every request.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    pub routes: Vec<Route>,
    pub assignment: Vec<Option<Assignment>>,
}

impl Solution {
    /// All vehicles idle, nothing assigned.
    pub fn empty(instance: &Instance) -> Self {
        Self {
            routes: (0..instance.num_vehicles()).map(|k| Route::empty(instance, k)).collect(),
            assignment: vec![None; instance.num_requests()],
        }
    }

    /// Builds a solution from routes and infers the assignment from them.
    pub fn from_routes(instance: &Instance, routes: Vec<Route>) -> Self {
        let mut s = Self { routes, assignment: vec![None; instance.num_requests()] };
        s.infer_assignment(instance);
        s
    }

    /// Recomputes every assignment entry from the stops present in the
    /// routes. Requests whose stops do not form one complete service get
    /// `None`.
    pub fn infer_assignment(&mut self, instance: &Instance) {
        let n = instance.num_requests();
        let mut trace = vec![ServiceTrace::default(); n];
        for route in &self.routes {
            for stop in &route.stops {
                let Some(r) = stop.action.request() else { continue };
                if r >= n {
                    continue;
                }
                let t = &mut trace[r];
                let slot = match stop.action {
                    Action::Pickup(_) => &mut t.pickup,
                    Action::Delivery(_) => &mut t.delivery,
                    Action::TransferDrop { transfer, .. } => {
                        t.drop_at.push(transfer);
                        &mut t.drop
                    }
                    Action::TransferPick { transfer, .. } => {
                        t.pick_at.push(transfer);
                        &mut t.pick
                    }
                    _ => unreachable!(),
                };
                slot.push(route.vehicle);
            }
        }
        self.assignment = trace.into_iter().map(|t| t.assignment()).collect();
    }

    /// Removes every stop of `r` and clears its assignment. Returns the
    /// removed stops with their (route, position) for exact reinsertion,
    /// in ascending position order per route.
    pub fn remove_request(&mut self, r: RequestId) -> Vec<(usize, usize, Stop)> {
        let mut removed = Vec::new();
        for (ri, route) in self.routes.iter_mut().enumerate() {
            let mut original = 0;
            route.stops.retain(|s| {
                let keep = s.action.request() != Some(r);
                if !keep {
                    removed.push((ri, original, *s));
                }
                original += 1;
                keep
            });
        }
        if let Some(a) = self.assignment.get_mut(r) {
            *a = None;
        }
        removed
    }

    /// Undoes [`Solution::remove_request`].
    pub fn restore_request(&mut self, r: RequestId, removed: &[(usize, usize, Stop)], assignment: Option<Assignment>) {
        for &(ri, pos, stop) in removed {
            self.routes[ri].stops.insert(pos, stop);
        }
        if let Some(a) = self.assignment.get_mut(r) {
            *a = assignment;
        }
    }

    /// Inserts a direct service of `r` into `vehicle`'s route with the
    /// pickup at final index `pickup_pos` and the delivery at `delivery_pos`.
    pub fn insert_direct(&mut self, instance: &Instance, r: RequestId, vehicle: VehicleId, pickup_pos: usize, delivery_pos: usize) {
        let req = instance.request(r);
        let stops = &mut self.routes[vehicle].stops;
        stops.insert(pickup_pos, Stop::new(req.pickup, Action::Pickup(r)));
        stops.insert(delivery_pos, Stop::new(req.delivery, Action::Delivery(r)));
        self.assignment[r] = Some(Assignment::Direct { vehicle });
    }

    /// Number of stops, depots included, over all routes.
    pub fn total_stops(&self) -> usize {
        self.routes.iter().map(|r| r.stops.len()).sum()
    }

    /// Canonical text used for deterministic tie-breaking.
    pub fn signature(&self) -> String {
        let mut out = String::new();
        for route in &self.routes {
            let _ = write!(out, "r{}:", route.vehicle);
            for s in &route.stops {
                let _ = write!(out, "{:?}@{};", s.action, s.node);
            }
            out.push('|');
        }
        out
    }
}

#[derive(Debug, Clone, Default)]
struct ServiceTrace {
    pickup: Vec<VehicleId>,
    delivery: Vec<VehicleId>,
    drop: Vec<VehicleId>,
    pick: Vec<VehicleId>,
    drop_at: Vec<NodeId>,
    pick_at: Vec<NodeId>,
}

impl ServiceTrace {
    fn assignment(&self) -> Option<Assignment> {
        if self.pickup.len() != 1 || self.delivery.len() != 1 {
            return None;
        }
        let (p, d) = (self.pickup[0], self.delivery[0]);
        match (self.drop.len(), self.pick.len()) {
            (0, 0) if p == d => Some(Assignment::Direct { vehicle: p }),
            (1, 1) if self.drop[0] == p && self.pick[0] == d && p != d && self.drop_at[0] == self.pick_at[0] => {
                Some(Assignment::Transferred { first: p, transfer: self.drop_at[0], second: d })
            }
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{build, relay};

    #[test]
    fn infers_direct_and_transferred() {
        let inst = relay();
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        s.infer_assignment(&inst);
        assert_eq!(s.assignment, vec![Some(Assignment::Direct { vehicle: 0 })]);

        let t = inst.transfer_points()[0];
        let mut s = Solution::empty(&inst);
        s.routes[0].stops.insert(1, Stop::new(0, Action::Pickup(0)));
        s.routes[0].stops.insert(2, Stop::new(t, Action::TransferDrop { request: 0, transfer: t }));
        s.routes[1].stops.insert(1, Stop::new(t, Action::TransferPick { request: 0, transfer: t }));
        s.routes[1].stops.insert(2, Stop::new(1, Action::Delivery(0)));
        s.infer_assignment(&inst);
        assert_eq!(s.assignment, vec![Some(Assignment::Transferred { first: 0, transfer: t, second: 1 })]);
    }

    #[test]
    fn remove_then_restore_is_identity() {
        let inst = build(
            &[((1.0, 0.0), (2.0, 0.0), 1), ((3.0, 0.0), (4.0, 0.0), 1)],
            &[((0.0, 0.0), (0.0, 0.0), 5)],
            &[],
        );
        let mut s = Solution::empty(&inst);
        s.insert_direct(&inst, 0, 0, 1, 2);
        s.insert_direct(&inst, 1, 0, 2, 4);
        let before = s.clone();
        let a = s.assignment[0];
        let removed = s.remove_request(0);
        assert_eq!(removed.iter().map(|x| x.1).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(s.routes[0].stops.len(), 4);
        s.restore_request(0, &removed, a);
        assert_eq!(s, before);
    }
}
