//! Turning a PDPTW file into a PDP-T instance: fleet size, depots and
//! transfer points drawn from one seeded generator.

use std::fmt;
use std::str::FromStr;

use pdpt_core::rng::{self, SolverRng};
use pdpt_core::{Instance, Node, NodeKind, Request, Vehicle};
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lilim::RawPdptwFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TransferCount {
    Fixed(usize),
    /// Uniform in `[1, ceil(0.05 * rows)]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VehicleCount {
    Fixed(usize),
    /// The count in the file header.
    File,
    /// Uniform in `[2, max(2, ceil(requests / 8))]`.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepotMode {
    /// Every vehicle starts and ends at the file depot.
    Shared,
    /// Each vehicle gets its own start and end, uniform in the bounding
    /// box of the file's nodes.
    Scattered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentationConfig {
    pub transfers: TransferCount,
    pub vehicles: VehicleCount,
    pub depots: DepotMode,
    pub seed: u64,
}

impl Default for AugmentationConfig {
    fn default() -> Self {
        Self { transfers: TransferCount::Random, vehicles: VehicleCount::File, depots: DepotMode::Shared, seed: 0 }
    }
}

impl FromStr for TransferCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            n => n.parse().map(Self::Fixed).map_err(|_| Error::Config(format!("transfers: {s:?}"))),
        }
    }
}

impl FromStr for VehicleCount {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Self::Random),
            "file" => Ok(Self::File),
            n => n.parse().map(Self::Fixed).map_err(|_| Error::Config(format!("vehicles: {s:?}"))),
        }
    }
}

impl FromStr for DepotMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared" => Ok(Self::Shared),
            "scattered" => Ok(Self::Scattered),
            _ => Err(Error::Config(format!("depots: {s:?}"))),
        }
    }
}

impl fmt::Display for TransferCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(n) => write!(f, "{n}"),
            Self::Random => f.write_str("random"),
        }
    }
}

impl fmt::Display for VehicleCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Fixed(n) => write!(f, "{n}"),
            Self::File => f.write_str("file"),
            Self::Random => f.write_str("random"),
        }
    }
}

impl fmt::Display for DepotMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Shared => "shared",
            Self::Scattered => "scattered",
        })
    }
}

/// Nodes 0..rows are the file rows in order (row 0 the depot), followed
/// by scattered depots (start, end per vehicle) and then transfer points,
/// each a new node on top of a sampled file row.
///
/// Draw order: vehicle count, transfer count, transfer rows, depots.
pub fn build_instance(raw: &RawPdptwFile, cfg: &AugmentationConfig) -> Result<Instance> {
    let raw_requests = raw.requests()?;
    let mut rng: SolverRng = rng::seeded(cfg.seed);
    let rows = raw.rows.len();

    let vehicles = match cfg.vehicles {
        VehicleCount::Fixed(n) => n,
        VehicleCount::File => usize::try_from(raw.vehicle_count).map_err(|_| Error::Config("vehicle count".into()))?,
        VehicleCount::Random => rng.gen_range(2..=raw_requests.len().div_ceil(8).max(2)),
    };
    if vehicles == 0 {
        return Err(Error::Config("at least one vehicle is required".into()));
    }
    let transfers = match cfg.transfers {
        TransferCount::Fixed(n) => n,
        TransferCount::Random => rng.gen_range(1..=(rows as f64 * 0.05).ceil().max(1.0) as usize),
    };
    if transfers > rows {
        return Err(Error::Config(format!("{transfers} transfer points but only {rows} nodes")));
    }
    let capacity = u32::try_from(raw.capacity).map_err(|_| Error::Config("capacity".into()))?;
    let mut transfer_rows = sample(&mut rng, rows, transfers).into_vec();
    transfer_rows.sort_unstable();

    let mut nodes: Vec<Node> = raw
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let kind = match r.demand {
                0 => NodeKind::Depot,
                d if d > 0 => NodeKind::Pickup,
                _ => NodeKind::Delivery,
            };
            Node::new(i, r.x as f64, r.y as f64, if i == 0 { NodeKind::Depot } else { kind })
        })
        .collect();

    let mut fleet = Vec::with_capacity(vehicles);
    match cfg.depots {
        DepotMode::Shared => {
            for id in 0..vehicles {
                fleet.push(Vehicle { id, capacity, start_depot: 0, end_depot: 0 });
            }
        }
        DepotMode::Scattered => {
            let (x0, x1, y0, y1) = raw.rows.iter().fold(
                (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
                |(a, b, c, d), r| (a.min(r.x as f64), b.max(r.x as f64), c.min(r.y as f64), d.max(r.y as f64)),
            );
            let point = |rng: &mut SolverRng| {
                let x = if x1 > x0 { rng.gen_range(x0..=x1) } else { x0 };
                let y = if y1 > y0 { rng.gen_range(y0..=y1) } else { y0 };
                (x, y)
            };
            for id in 0..vehicles {
                let (sx, sy) = point(&mut rng);
                let (ex, ey) = point(&mut rng);
                let start = nodes.len();
                nodes.push(Node::new(start, sx, sy, NodeKind::Depot));
                nodes.push(Node::new(start + 1, ex, ey, NodeKind::Depot));
                fleet.push(Vehicle { id, capacity, start_depot: start, end_depot: start + 1 });
            }
        }
    }

    let mut transfer_points = Vec::with_capacity(transfers);
    for &row in &transfer_rows {
        let id = nodes.len();
        nodes.push(Node::new(id, raw.rows[row].x as f64, raw.rows[row].y as f64, NodeKind::Transfer));
        transfer_points.push(id);
    }

    let requests = raw_requests
        .iter()
        .enumerate()
        .map(|(id, r)| {
            let quantity = u32::try_from(r.quantity).map_err(|_| Error::Structure(format!("quantity {}", r.quantity)))?;
            Ok(Request { id, pickup: r.pickup, delivery: r.delivery, quantity })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Instance::new(nodes, requests, fleet, transfer_points)?)
}

/// Pickup and delivery node count, the size column of the result tables.
pub fn instance_size(instance: &Instance) -> usize {
    2 * instance.num_requests()
}
