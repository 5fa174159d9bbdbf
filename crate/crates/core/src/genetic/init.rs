//! Initial populations.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::chromosome::{arc_value, encode, fitness, Chromosome};
use crate::constructive::transship_improve;
use crate::error::Result;
use crate::grasp::{grasp_construct, GraspParams};
use crate::insertion::{for_each_placement, Leg};
use crate::model::{Instance, NodeId, NodeKind};
use crate::par;
use crate::rng::{self, SolverRng};
use crate::solution::Solution;

/// Redraws allowed for a constructive member that duplicates an earlier one.
pub const MAX_REDRAWS: usize = 10;

/// Expected number of extra random arcs per random member.
pub const EXTRA_ARCS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub members: Vec<Chromosome>,
    pub fitness: Vec<f64>,
}

impl Population {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Index of the lowest fitness, first on ties.
    pub fn best_index(&self) -> Option<usize> {
        (0..self.fitness.len()).reduce(|b, i| if self.fitness[i] < self.fitness[b] { i } else { b })
    }

    pub fn best_fitness(&self) -> f64 {
        self.fitness.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub(crate) fn evaluate(instance: &Instance, members: Vec<Chromosome>) -> Self {
        let fitness = par::map_indexed(members.len(), |m| fitness(instance, &members[m]));
        Self { members, fitness }
    }
}

/// Member `m` of a population draws from this stream of the seed.
pub(crate) fn member_stream(seed: u64, generation: u64, member: usize) -> SolverRng {
    rng::stream(seed, (generation << 32) | member as u64)
}

/// Nodes a route may pass between its depots.
fn inner_nodes(instance: &Instance) -> Vec<NodeId> {
    instance.nodes().iter().filter(|n| n.kind != NodeKind::Depot).map(|n| n.id).collect()
}

/// Number of `(i, j, k)` slots a route could use: from the start depot or
/// an inner node to an inner node or the end depot.
pub fn admissible_arcs(instance: &Instance) -> usize {
    let inner = inner_nodes(instance).len();
    instance.num_vehicles() * (inner + 1) * (inner + 1)
}

/// Random walk: requests in random order, each inserted directly at a
/// uniformly drawn capacity-feasible position of any vehicle. Requests
/// with no such position are left out.
fn random_walks(instance: &Instance, rng: &mut SolverRng) -> Solution {
    let mut sol = Solution::empty(instance);
    let mut order: Vec<usize> = (0..instance.num_requests()).collect();
    order.shuffle(rng);
    for r in order {
        let leg = Leg::direct(instance, r);
        let mut options = Vec::new();
        for (k, route) in sol.routes.iter().enumerate() {
            let loads = route.loads(instance);
            for_each_placement(instance, route, &loads, &leg, |a, b, _| options.push((k, a, b)));
        }
        if options.is_empty() {
            continue;
        }
        let (k, a, b) = options[rng.gen_range(0..options.len())];
        sol.insert_direct(instance, r, k, a, b);
    }
    sol
}

/// One random multigraph: the arcs of a random walk per vehicle, plus
/// each admissible arc independently with probability `p_edge`, then
/// reduced to one out-arc per node and vehicle (the shortest).
pub fn random_chromosome(instance: &Instance, p_edge: f64, rng: &mut SolverRng) -> Chromosome {
    let mut chrom = encode(instance, &random_walks(instance, rng));
    let inner = inner_nodes(instance);
    let side = inner.len() + 1;
    let total = instance.num_vehicles() * side * side;
    let p = p_edge.clamp(0.0, 1.0);
    let log_q = libm::log(1.0 - p);
    let mut idx = 0usize;
    while p > 0.0 {
        // Geometric gap to the next present slot.
        if p < 1.0 {
            let u: f64 = rng.gen::<f64>();
            let gap = libm::floor(libm::log(1.0 - u) / log_q);
            if gap >= (total - idx) as f64 {
                break;
            }
            idx += gap as usize;
        }
        if idx >= total {
            break;
        }
        let k = idx / (side * side);
        let (a, b) = ((idx / side) % side, idx % side);
        let v = instance.vehicle(k);
        let i = if a == 0 { v.start_depot } else { inner[a - 1] };
        let j = if b == side - 1 { v.end_depot } else { inner[b] };
        if i != j && chrom.get(i, j, k) == 0.0 {
            // Values from arc_value are always valid.
            let _ = chrom.set(i, j, k, arc_value(instance.dist(i, j)));
        }
        idx += 1;
    }
    chrom.repair_out_degree();
    chrom
}

/// `size` random multigraphs with the default edge probability.
pub fn init_random(instance: &Instance, size: usize, seed: u64) -> Population {
    let p_edge = EXTRA_ARCS / admissible_arcs(instance).max(1) as f64;
    init_random_with(instance, size, seed, p_edge)
}

pub fn init_random_with(instance: &Instance, size: usize, seed: u64, p_edge: f64) -> Population {
    let members = par::map_indexed(size, |m| random_chromosome(instance, p_edge, &mut member_stream(seed, 0, m)));
    Population::evaluate(instance, members)
}

fn constructive_member(instance: &Instance, seed: u64, attempt: u64, m: usize) -> Result<Solution> {
    let mut rng = member_stream(seed, attempt, m);
    let sol = grasp_construct(instance, GraspParams::default().alpha, &mut rng)?;
    let improved = transship_improve(instance, &sol);
    if fitness(instance, &encode(instance, &improved)).is_finite() {
        Ok(improved)
    } else {
        Ok(sol)
    }
}

/// `size` randomized greedy constructions, each followed by one
/// transshipment pass. A member equal to an earlier one is redrawn up to
/// [`MAX_REDRAWS`] times and then kept.
///
/// A transshipped member that revisits a node cannot be encoded; the
/// direct-only construction it came from is used instead, so every member
/// has finite fitness.
pub fn init_constructive(instance: &Instance, size: usize, seed: u64) -> Result<Population> {
    let first = par::map_indexed(size, |m| constructive_member(instance, seed, 0, m));
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut solutions = Vec::with_capacity(size);
    for (m, sol) in first.into_iter().enumerate() {
        let mut sol = sol?;
        let mut attempt = 1;
        while seen.contains(&sol.signature()) && attempt <= MAX_REDRAWS as u64 {
            sol = constructive_member(instance, seed, attempt, m)?;
            attempt += 1;
        }
        seen.insert(sol.signature());
        solutions.push(sol);
    }
    let members = solutions.iter().map(|s| encode(instance, s)).collect();
    Ok(Population::evaluate(instance, members))
}
