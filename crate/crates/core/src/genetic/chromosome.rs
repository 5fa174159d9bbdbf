//! Route-incidence encoding.
//!
//! Slot `(i, j, k)` holds a positive value when route `k` travels from
//! node `i` straight to node `j`, and zero otherwise. The value is the
//! logistic-derivative transform of the arc length, so short arcs weigh
//! more. Only nonzero slots are stored.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::cost::solution_cost;
use crate::error::{Error, Result};
use crate::feasibility::check_feasibility;
use crate::model::{Instance, NodeId, NodeKind, RequestId, VehicleId};
use crate::solution::{Action, Route, Solution, Stop};

/// `exp(-x) / (1 + exp(-x))^2` for `x > 0`, and 0 at `x = 0`.
pub fn logistic_transform(x: f64) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::Domain(x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let e = libm::exp(-x);
    Ok(e / ((1.0 + e) * (1.0 + e)))
}

/// Value stored for a traveled arc of length `d`.
///
/// The transform is 0 at zero length and underflows for long arcs, either
/// of which would erase the arc. Zero-length arcs store the right limit
/// 1/4 and underflowed ones the smallest positive normal.
pub fn arc_value(d: f64) -> f64 {
    if d == 0.0 {
        return 0.25;
    }
    logistic_transform(d).unwrap_or(0.0).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Chromosome {
    nodes: usize,
    vehicles: usize,
    /// `(slot, value)` sorted by slot, values strictly positive.
    entries: Vec<(usize, f64)>,
}

impl Chromosome {
    pub fn new(nodes: usize, vehicles: usize) -> Self {
        Self { nodes, vehicles, entries: Vec::new() }
    }

    pub(crate) fn from_sorted(nodes: usize, vehicles: usize, entries: Vec<(usize, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|e| e.1 > 0.0));
        Self { nodes, vehicles, entries }
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }

    pub fn vehicles(&self) -> usize {
        self.vehicles
    }

    /// Total number of slots, zero or not.
    pub fn slot_count(&self) -> usize {
        self.nodes * self.nodes * self.vehicles
    }

    pub fn same_shape(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.vehicles == other.vehicles
    }

    pub fn slot(&self, i: NodeId, j: NodeId, k: VehicleId) -> usize {
        (k * self.nodes + i) * self.nodes + j
    }

    /// `(i, j, k)` of a slot index.
    pub fn coords(&self, slot: usize) -> (NodeId, NodeId, VehicleId) {
        let j = slot % self.nodes;
        let rest = slot / self.nodes;
        (rest % self.nodes, j, rest / self.nodes)
    }

    pub fn get_slot(&self, slot: usize) -> f64 {
        match self.entries.binary_search_by_key(&slot, |e| e.0) {
            Ok(at) => self.entries[at].1,
            Err(_) => 0.0,
        }
    }

    pub fn get(&self, i: NodeId, j: NodeId, k: VehicleId) -> f64 {
        self.get_slot(self.slot(i, j, k))
    }

    /// Sets a slot; zero clears it. Negative or non-finite values are
    /// rejected.
    pub fn set_slot(&mut self, slot: usize, value: f64) -> Result<()> {
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidInput(format!("slot value {value} must be finite and non-negative")));
        }
        if slot >= self.slot_count() {
            return Err(Error::InvalidInput(format!("slot {slot} out of range")));
        }
        match (self.entries.binary_search_by_key(&slot, |e| e.0), value > 0.0) {
            (Ok(at), true) => self.entries[at].1 = value,
            (Ok(at), false) => {
                self.entries.remove(at);
            }
            (Err(at), true) => self.entries.insert(at, (slot, value)),
            (Err(_), false) => {}
        }
        Ok(())
    }

    pub fn set(&mut self, i: NodeId, j: NodeId, k: VehicleId, value: f64) -> Result<()> {
        let slot = self.slot(i, j, k);
        self.set_slot(slot, value)
    }

    /// Nonzero slots in slot order.
    pub fn entries(&self) -> &[(usize, f64)] {
        &self.entries
    }

    /// Keeps only the largest-valued out-arc of every node in every slice
    /// (lowest target on ties).
    pub fn repair_out_degree(&mut self) {
        let n = self.nodes;
        let mut kept: Vec<(usize, f64)> = Vec::with_capacity(self.entries.len());
        for &(slot, value) in &self.entries {
            match kept.last_mut() {
                Some(last) if last.0 / n == slot / n => {
                    if value > last.1 {
                        *last = (slot, value);
                    }
                }
                _ => kept.push((slot, value)),
            }
        }
        self.entries = kept;
    }
}

/// Node sequence of a route with consecutive repeats merged.
fn visits(route: &Route) -> Vec<NodeId> {
    let mut out: Vec<NodeId> = Vec::with_capacity(route.stops.len());
    for s in &route.stops {
        if out.last() != Some(&s.node) {
            out.push(s.node);
        }
    }
    out
}

/// True when every route visits each node in one consecutive run of stops.
/// Only such solutions have one out-arc per node in each slice, so only
/// they can survive [`encode`] then [`decode`].
pub fn is_simple(solution: &Solution) -> bool {
    solution.routes.iter().all(|route| {
        let v = visits(route);
        // The end depot may equal the start depot; it is checked separately.
        let (last, body) = v.split_last().expect("a route has depot stops");
        let mut seen = BTreeSet::new();
        body.iter().all(|&n| seen.insert(n)) && (body.len() < 2 || !body[1..].contains(last))
    })
}

/// Writes [`arc_value`] of every traveled arc into its route's slice.
pub fn encode(instance: &Instance, solution: &Solution) -> Chromosome {
    let n = instance.num_nodes();
    let nv = instance.num_vehicles();
    let mut map: BTreeMap<usize, f64> = BTreeMap::new();
    for route in &solution.routes {
        let k = route.vehicle;
        for w in visits(route).windows(2) {
            map.insert((k * n + w[0]) * n + w[1], arc_value(instance.dist(w[0], w[1])));
        }
    }
    Chromosome::from_sorted(n, nv, map.into_iter().collect())
}

/// Rebuilds a solution by walking each slice from the start depot, taking
/// the largest-valued out-arc at every node, until the end depot.
///
/// `None` when a walk dead-ends, revisits a node, passes through a depot,
/// or when the visits cannot be read as one complete service per request
/// (at most one transfer each). Whether the result is feasible is left to
/// the checker.
pub fn decode(instance: &Instance, chromosome: &Chromosome) -> Option<Solution> {
    let n = instance.num_nodes();
    let nv = instance.num_vehicles();
    if chromosome.nodes != n || chromosome.vehicles != nv {
        return None;
    }
    // Out-arc per (vehicle, node).
    let mut next: Vec<Option<(NodeId, f64)>> = vec![None; n * nv];
    for &(slot, value) in &chromosome.entries {
        let (i, j, k) = chromosome.coords(slot);
        let cell = &mut next[k * n + i];
        if cell.is_none_or(|(_, v)| value > v) {
            *cell = Some((j, value));
        }
    }

    let mut walks: Vec<Vec<NodeId>> = Vec::with_capacity(nv);
    let mut seen = vec![usize::MAX; n];
    for (k, v) in instance.vehicles().iter().enumerate() {
        let mut walk = vec![v.start_depot];
        let mut cur = v.start_depot;
        if !(v.start_depot == v.end_depot && next[k * n + cur].is_none()) {
            loop {
                let (nxt, _) = next[k * n + cur]?;
                if nxt == v.end_depot {
                    walk.push(nxt);
                    break;
                }
                if seen[nxt] == k || instance.nodes()[nxt].kind == NodeKind::Depot || walk.len() > n {
                    return None;
                }
                seen[nxt] = k;
                walk.push(nxt);
                cur = nxt;
            }
        }
        walks.push(walk);
    }

    // Where each pickup and delivery node is visited.
    let mut at: Vec<Option<(VehicleId, usize)>> = vec![None; n];
    for (k, walk) in walks.iter().enumerate() {
        for (pos, &node) in walk.iter().enumerate().skip(1) {
            if pos + 1 == walk.len() {
                break;
            }
            if instance.request_at(node).is_some() && at[node].replace((k, pos)).is_some() {
                return None;
            }
        }
    }

    // Requests dropped / picked at (vehicle, walk position).
    let mut drops: BTreeMap<(VehicleId, usize), Vec<RequestId>> = BTreeMap::new();
    let mut picks: BTreeMap<(VehicleId, usize), Vec<RequestId>> = BTreeMap::new();
    for req in instance.requests() {
        let (v1, i1) = at[req.pickup]?;
        let (v2, i2) = at[req.delivery]?;
        if v1 == v2 {
            if i1 > i2 {
                return None;
            }
            continue;
        }
        let (a, b) = walks[v1][i1 + 1..walks[v1].len() - 1].iter().enumerate().find_map(|(off, &t)| {
            if !instance.is_transfer_point(t) {
                return None;
            }
            walks[v2][1..i2].iter().position(|&u| u == t).map(|p| (i1 + 1 + off, 1 + p))
        })?;
        drops.entry((v1, a)).or_default().push(req.id);
        picks.entry((v2, b)).or_default().push(req.id);
    }

    let mut routes = Vec::with_capacity(nv);
    for (k, walk) in walks.iter().enumerate() {
        let v = instance.vehicle(k);
        let mut stops = vec![Stop::new(v.start_depot, Action::DepartDepot)];
        for (pos, &node) in walk.iter().enumerate().take(walk.len().saturating_sub(1)).skip(1) {
            if let Some(r) = instance.request_at(node) {
                let req = instance.request(r);
                let action = if node == req.pickup { Action::Pickup(r) } else { Action::Delivery(r) };
                stops.push(Stop::new(node, action));
                continue;
            }
            let dropped = drops.get(&(k, pos));
            let picked = picks.get(&(k, pos));
            if dropped.is_none() && picked.is_none() {
                return None;
            }
            for &r in dropped.into_iter().flatten() {
                stops.push(Stop::new(node, Action::TransferDrop { request: r, transfer: node }));
            }
            for &r in picked.into_iter().flatten() {
                stops.push(Stop::new(node, Action::TransferPick { request: r, transfer: node }));
            }
        }
        stops.push(Stop::new(v.end_depot, Action::ArriveDepot));
        routes.push(Route { vehicle: k, stops });
    }
    let solution = Solution::from_routes(instance, routes);
    solution.assignment.iter().all(Option::is_some).then_some(solution)
}

/// Route length of the decoded solution, or infinity when decoding fails
/// or the decoded solution violates any constraint.
pub fn fitness(instance: &Instance, chromosome: &Chromosome) -> f64 {
    match decode(instance, chromosome) {
        Some(s) if check_feasibility(instance, &s).feasible => solution_cost(instance, &s),
        _ => f64::INFINITY,
    }
}
