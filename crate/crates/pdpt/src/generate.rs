//! Synthetic instances: clustered Li & Lim style files standing in for
//! the published ones, and micro instances small enough for the oracle.

use pdpt_core::rng::{self, SolverRng};
use pdpt_core::{Instance, Node, NodeKind, Request, Vehicle};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::lilim::{RawPdptwFile, Row};

/// Shape of a generated benchmark file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StandIn {
    pub name: &'static str,
    pub requests: usize,
    pub vehicles: i64,
    pub capacity: i64,
    /// Coordinates fall in `[0, extent]`.
    pub extent: i64,
    pub clusters: usize,
    /// Fixed content seed, so a name always yields the same file.
    pub seed: u64,
}

/// 100 customers in clusters, fleet of 3.
pub const LC204: StandIn =
    StandIn { name: "lc204", requests: 50, vehicles: 3, capacity: 200, extent: 100, clusters: 8, seed: 204 };

/// 800 customers in clusters, fleet of 25.
pub const LC2_8_5: StandIn =
    StandIn { name: "LC2_8_5", requests: 400, vehicles: 25, capacity: 200, extent: 400, clusters: 40, seed: 2085 };

pub const STAND_INS: [StandIn; 2] = [LC204, LC2_8_5];

pub fn stand_in(name: &str) -> Option<StandIn> {
    STAND_INS.iter().copied().find(|s| s.name.eq_ignore_ascii_case(name))
}

/// Clustered customers, demands 10 to 30 in steps of 10, wide time
/// windows and service time 90. Row ids are a random permutation of the
/// customers.
pub fn lilim_like(spec: &StandIn) -> RawPdptwFile {
    let mut rng = rng::seeded(spec.seed);
    let ext = spec.extent;
    let margin = (ext / 20).max(1);
    let spread = (ext / 25).max(2);
    let centers: Vec<(i64, i64)> = (0..spec.clusters.max(1))
        .map(|_| (rng.gen_range(margin..=ext - margin), rng.gen_range(margin..=ext - margin)))
        .collect();
    let horizon = 34 * ext;
    let depot = (ext * 2 / 5, ext / 2);

    let point = |rng: &mut SolverRng| {
        let (cx, cy) = centers[rng.gen_range(0..centers.len())];
        let x = (cx + rng.gen_range(-spread..=spread)).clamp(0, ext);
        let y = (cy + rng.gen_range(-spread..=spread)).clamp(0, ext);
        (x, y)
    };
    let n = 2 * spec.requests;
    let mut ids: Vec<i64> = (1..=n as i64).collect();
    ids.shuffle(&mut rng);

    let mut rows = vec![Row {
        id: 0,
        x: depot.0,
        y: depot.1,
        demand: 0,
        earliest: 0,
        latest: horizon,
        service: 0,
        pickup_sibling: 0,
        delivery_sibling: 0,
    }];
    let window = |rng: &mut SolverRng| {
        let start = rng.gen_range(0..horizon / 2);
        (start, (start + rng.gen_range(horizon / 8..horizon / 3)).min(horizon))
    };
    for r in 0..spec.requests {
        let (p, d) = (ids[2 * r], ids[2 * r + 1]);
        let demand = 10 * rng.gen_range(1..=3);
        let ((px, py), (dx, dy)) = (point(&mut rng), point(&mut rng));
        let (pe, pl) = window(&mut rng);
        let (de, dl) = window(&mut rng);
        rows.push(Row {
            id: p,
            x: px,
            y: py,
            demand,
            earliest: pe,
            latest: pl,
            service: 90,
            pickup_sibling: 0,
            delivery_sibling: d,
        });
        rows.push(Row {
            id: d,
            x: dx,
            y: dy,
            demand: -demand,
            earliest: de,
            latest: dl,
            service: 90,
            pickup_sibling: p,
            delivery_sibling: 0,
        });
    }
    rows[1..].sort_by_key(|r| r.id);
    RawPdptwFile { vehicle_count: spec.vehicles, capacity: spec.capacity, speed: 1, rows }
}

/// Micro instance for the oracle: 1 to 3 requests, 1 or 2 vehicles with
/// their own start and end points, at most one transfer point.
pub fn micro_instance(seed: u64) -> Instance {
    let mut rng = rng::seeded(seed);
    let requests = rng.gen_range(1..=3usize);
    let vehicles = rng.gen_range(1..=2usize);
    let transfers = rng.gen_range(0..=1usize);
    let mut nodes = Vec::new();
    let mut push = |rng: &mut SolverRng, kind| {
        let id = nodes.len();
        nodes.push(Node::new(id, f64::from(rng.gen_range(0..100)), f64::from(rng.gen_range(0..100)), kind));
        id
    };
    let reqs: Vec<Request> = (0..requests)
        .map(|id| {
            let pickup = push(&mut rng, NodeKind::Pickup);
            let delivery = push(&mut rng, NodeKind::Delivery);
            Request { id, pickup, delivery, quantity: rng.gen_range(1..=8) }
        })
        .collect();
    let vehs: Vec<Vehicle> = (0..vehicles)
        .map(|id| {
            let start_depot = push(&mut rng, NodeKind::Depot);
            let end_depot = push(&mut rng, NodeKind::Depot);
            Vehicle { id, capacity: rng.gen_range(8..=15), start_depot, end_depot }
        })
        .collect();
    let tps = (0..transfers).map(|_| push(&mut rng, NodeKind::Transfer)).collect();
    // Quantities never exceed the smallest capacity, so this cannot fail.
    Instance::new(nodes, reqs, vehs, tps).expect("micro instance is valid")
}
