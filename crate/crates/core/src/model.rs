//! Problem data: nodes, requests, vehicles and the distance metric.
//!
//! Travel distance, travel time and travel cost are all read from the same
//! Euclidean matrix.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};

pub type NodeId = usize;
pub type RequestId = usize;
pub type VehicleId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeKind {
    Pickup,
    Delivery,
    /// Start and/or end location of one or more vehicles.
    Depot,
    Transfer,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub x: f64,
    pub y: f64,
    pub kind: NodeKind,
}

impl Node {
    pub fn new(id: NodeId, x: f64, y: f64, kind: NodeKind) -> Self {
        Self { id, x, y, kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Request {
    pub id: RequestId,
    pub pickup: NodeId,
    pub delivery: NodeId,
    pub quantity: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vehicle {
    pub id: VehicleId,
    pub capacity: u32,
    pub start_depot: NodeId,
    pub end_depot: NodeId,
}

/// An immutable PDP-T instance with its precomputed metric.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    nodes: Vec<Node>,
    requests: Vec<Request>,
    vehicles: Vec<Vehicle>,
    transfer_points: Vec<NodeId>,
    metric: Vec<f64>,
    request_of_node: Vec<Option<RequestId>>,
    is_transfer: Vec<bool>,
}

impl Instance {
    /// Validates the parts and computes the L2 metric over all nodes.
    pub fn new(
        nodes: Vec<Node>,
        requests: Vec<Request>,
        vehicles: Vec<Vehicle>,
        transfer_points: Vec<NodeId>,
    ) -> Result<Self> {
        let n = nodes.len();
        for (i, node) in nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::InvalidInput(format!(
                    "node ids must be dense: position {i} holds id {}",
                    node.id
                )));
            }
            if !node.x.is_finite() || !node.y.is_finite() {
                return Err(Error::InvalidInput(format!("node {i} has non-finite coordinates")));
            }
        }
        let check = |node: NodeId| {
            if node < n {
                Ok(())
            } else {
                Err(Error::NodeOutOfRange { node, len: n })
            }
        };

        let mut request_of_node = vec![None; n];
        for (r, req) in requests.iter().enumerate() {
            if req.id != r {
                return Err(Error::InvalidInput(format!("request ids must be dense: {}", req.id)));
            }
            check(req.pickup)?;
            check(req.delivery)?;
            if req.pickup == req.delivery {
                return Err(Error::InvalidInput(format!("request {r} picks and delivers at one node")));
            }
            if req.quantity == 0 {
                return Err(Error::InvalidInput(format!("request {r} has zero quantity")));
            }
            if nodes[req.pickup].kind != NodeKind::Pickup || nodes[req.delivery].kind != NodeKind::Delivery {
                return Err(Error::InvalidInput(format!("request {r} references nodes of the wrong kind")));
            }
            for node in [req.pickup, req.delivery] {
                if request_of_node[node].replace(r).is_some() {
                    return Err(Error::InvalidInput(format!("node {node} belongs to two requests")));
                }
            }
        }
        for (k, v) in vehicles.iter().enumerate() {
            if v.id != k {
                return Err(Error::InvalidInput(format!("vehicle ids must be dense: {}", v.id)));
            }
            check(v.start_depot)?;
            check(v.end_depot)?;
            if nodes[v.start_depot].kind != NodeKind::Depot || nodes[v.end_depot].kind != NodeKind::Depot {
                return Err(Error::InvalidInput(format!("vehicle {k} depots must be depot nodes")));
            }
        }
        let mut is_transfer = vec![false; n];
        for &t in &transfer_points {
            check(t)?;
            if nodes[t].kind != NodeKind::Transfer {
                return Err(Error::InvalidInput(format!("transfer point {t} is not a transfer node")));
            }
            if core::mem::replace(&mut is_transfer[t], true) {
                return Err(Error::InvalidInput(format!("transfer point {t} listed twice")));
            }
        }

        let mut metric = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = libm::hypot(nodes[i].x - nodes[j].x, nodes[i].y - nodes[j].y);
                metric[i * n + j] = d;
                metric[j * n + i] = d;
            }
        }

        Ok(Self {
            nodes,
            requests,
            vehicles,
            transfer_points,
            metric,
            request_of_node,
            is_transfer,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn vehicles(&self) -> &[Vehicle] {
        &self.vehicles
    }

    pub fn transfer_points(&self) -> &[NodeId] {
        &self.transfer_points
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_requests(&self) -> usize {
        self.requests.len()
    }

    pub fn num_vehicles(&self) -> usize {
        self.vehicles.len()
    }

    pub fn request(&self, r: RequestId) -> &Request {
        &self.requests[r]
    }

    pub fn vehicle(&self, k: VehicleId) -> &Vehicle {
        &self.vehicles[k]
    }

    /// Request served at `node`, if `node` is a pickup or delivery node.
    pub fn request_at(&self, node: NodeId) -> Option<RequestId> {
        self.request_of_node.get(node).copied().flatten()
    }

    pub fn is_transfer_point(&self, node: NodeId) -> bool {
        self.is_transfer.get(node).copied().unwrap_or(false)
    }

    /// Largest vehicle capacity, 0 for an empty fleet.
    pub fn max_capacity(&self) -> u32 {
        self.vehicles.iter().map(|v| v.capacity).max().unwrap_or(0)
    }

    /// Euclidean distance between two nodes, range checked.
    pub fn distance(&self, i: NodeId, j: NodeId) -> Result<f64> {
        let n = self.nodes.len();
        for node in [i, j] {
            if node >= n {
                return Err(Error::NodeOutOfRange { node, len: n });
            }
        }
        Ok(self.metric[i * n + j])
    }

    /// Unchecked metric lookup for the hot loops.
    #[inline]
    pub fn dist(&self, i: NodeId, j: NodeId) -> f64 {
        self.metric[i * self.nodes.len() + j]
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::build;
    use super::*;

    #[test]
    fn distance_examples() {
        let inst = build(&[((0.0, 0.0), (3.0, 4.0), 1)], &[((1.0, 1.0), (2.0, 2.0), 1)], &[]);
        assert_eq!(inst.distance(0, 1).unwrap(), 5.0);
        assert_eq!(inst.distance(1, 1).unwrap(), 0.0);
        assert_eq!(inst.distance(1, 0).unwrap(), 5.0);
        // sqrt(2) = 1.4142135623730951
        assert!((inst.distance(2, 3).unwrap() - 1.414_213_562_373_095_1).abs() < 1e-15);
        assert_eq!(inst.distance(0, 9), Err(Error::NodeOutOfRange { node: 9, len: 4 }));
    }

    #[test]
    fn rejects_bad_requests() {
        let nodes = vec![Node::new(0, 0.0, 0.0, NodeKind::Pickup), Node::new(1, 1.0, 0.0, NodeKind::Delivery)];
        let zero = Request { id: 0, pickup: 0, delivery: 1, quantity: 0 };
        assert!(Instance::new(nodes.clone(), vec![zero], vec![], vec![]).is_err());
        let same = Request { id: 0, pickup: 0, delivery: 0, quantity: 1 };
        assert!(Instance::new(nodes.clone(), vec![same], vec![], vec![]).is_err());
        let out = Request { id: 0, pickup: 0, delivery: 7, quantity: 1 };
        assert!(matches!(
            Instance::new(nodes, vec![out], vec![], vec![]),
            Err(Error::NodeOutOfRange { node: 7, .. })
        ));
    }

    #[test]
    fn metric_is_symmetric_with_triangle_inequality() {
        let inst = build(
            &[((0.0, 0.0), (3.0, 4.0), 1), ((7.5, -2.0), (1.0, 9.0), 1)],
            &[((2.0, 2.0), (5.0, 5.0), 3)],
            &[(4.0, 4.0)],
        );
        let n = inst.num_nodes();
        for i in 0..n {
            assert_eq!(inst.dist(i, i), 0.0);
            for j in 0..n {
                assert_eq!(inst.dist(i, j), inst.dist(j, i));
                for k in 0..n {
                    assert!(inst.dist(i, k) <= inst.dist(i, j) + inst.dist(j, k) + 1e-9);
                }
            }
        }
    }
}
