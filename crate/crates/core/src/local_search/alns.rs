//! Adaptive large neighborhood search.
//!
//! Removal heuristics: random, worst (largest cost drop) and related
//! (Shaw, by pickup and delivery proximity). Insertion heuristics: greedy
//! cheapest direct insertion, regret-2 and transfer-aware insertion that
//! also tries every split through a transfer point. One of each is drawn
//! per iteration by roulette over adaptive weights.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index::sample;
use rand::Rng;

use crate::cost::{route_cost, solution_cost};
use crate::error::{Error, Result};
use crate::insertion::{all_loads, apply_plan, best_placement, best_plan, InsertionCandidate, Leg, Plan};
use crate::model::{Instance, RequestId};
use crate::rng::{self, SolverRng};
use crate::solution::Solution;
use crate::{SearchOutcome, IMPROVE_EPS};

pub const REMOVAL_HEURISTICS: [&str; 3] = ["random", "worst", "shaw"];
pub const INSERTION_HEURISTICS: [&str; 3] = ["greedy", "regret2", "transfer"];

pub const SCORE_BEST: f64 = 3.0;
pub const SCORE_ACCEPTED: f64 = 1.0;
pub const SCORE_REJECTED: f64 = 0.0;

const MIN_WEIGHT: f64 = 1e-6;
/// Randomization exponents of worst and related removal.
const WORST_POWER: i32 = 3;
const SHAW_POWER: i32 = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct AlnsParams {
    pub removal_weights: Vec<f64>,
    pub insertion_weights: Vec<f64>,
    pub iterations: usize,
    pub k_min: usize,
    pub k_max: usize,
    /// Reaction factor: how fast weights follow recent scores.
    pub reaction: f64,
    pub seed: u64,
}

impl AlnsParams {
    /// Unit weights, `k` in `[1, ceil(0.1 * |requests|)]`, reaction 0.1,
    /// 2000 iterations.
    pub fn for_instance(instance: &Instance, seed: u64) -> Self {
        let k_max = instance.num_requests().div_ceil(10).max(1);
        Self {
            removal_weights: vec![1.0; REMOVAL_HEURISTICS.len()],
            insertion_weights: vec![1.0; INSERTION_HEURISTICS.len()],
            iterations: 2000,
            k_min: 1,
            k_max,
            reaction: 0.1,
            seed,
        }
    }

    pub fn validate(&self, instance: &Instance) -> Result<()> {
        selection_probabilities(&self.removal_weights)?;
        selection_probabilities(&self.insertion_weights)?;
        if self.removal_weights.len() != REMOVAL_HEURISTICS.len()
            || self.insertion_weights.len() != INSERTION_HEURISTICS.len()
        {
            return Err(Error::InvalidInput("one weight per heuristic expected".into()));
        }
        if !(0.0..=1.0).contains(&self.reaction) {
            return Err(Error::InvalidInput(format!("reaction factor {} outside [0, 1]", self.reaction)));
        }
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(Error::InvalidInput(format!("bad removal range [{}, {}]", self.k_min, self.k_max)));
        }
        if self.k_max > instance.num_requests().max(1) {
            return Err(Error::InvalidInput(format!("cannot remove {} of {} requests", self.k_max, instance.num_requests())));
        }
        Ok(())
    }
}

/// `w_i / sum(w)`; fails unless weights are finite, non-negative and not
/// all zero.
pub fn selection_probabilities(weights: &[f64]) -> Result<Vec<f64>> {
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(Error::InvalidInput("weights must be finite and non-negative".into()));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::InvalidInput("weights must not all be zero".into()));
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Roulette-wheel draw of an index with probability `w_i / sum(w)`.
pub fn roulette(weights: &[f64], rng: &mut SolverRng) -> Result<usize> {
    let total: f64 = selection_probabilities(weights).map(|_| weights.iter().sum())?;
    let mut u = rng.gen::<f64>() * total;
    let mut last = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last = i;
            if u < w {
                return Ok(i);
            }
            u -= w;
        }
    }
    Ok(last)
}

/// `(1 - rho) * w + rho * score`, kept strictly positive.
pub fn update_weight(w: f64, score: f64, rho: f64) -> f64 {
    ((1.0 - rho) * w + rho * score).max(MIN_WEIGHT)
}

/// Current removal and insertion weights of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct AlnsWeights {
    pub removal: Vec<f64>,
    pub insertion: Vec<f64>,
}

impl AlnsWeights {
    pub fn new(params: &AlnsParams) -> Self {
        Self { removal: params.removal_weights.clone(), insertion: params.insertion_weights.clone() }
    }
}

/// Cost drop from taking each request out of the solution.
fn removal_savings(instance: &Instance, solution: &Solution) -> Vec<(RequestId, f64)> {
    let route_costs: Vec<f64> = solution.routes.iter().map(|r| route_cost(instance, r)).collect();
    (0..instance.num_requests())
        .map(|r| {
            let mut saving = 0.0;
            for (ri, route) in solution.routes.iter().enumerate() {
                if route.stops.iter().any(|s| s.action.request() == Some(r)) {
                    let mut rest = route.clone();
                    rest.stops.retain(|s| s.action.request() != Some(r));
                    saving += route_costs[ri] - route_cost(instance, &rest);
                }
            }
            (r, saving)
        })
        .collect()
}

/// Pops entries from `list` at index `floor(y^power * len)`, `y` uniform.
fn randomized_pick<T>(list: &mut Vec<T>, k: usize, power: i32, rng: &mut SolverRng) -> Vec<T> {
    let mut out = Vec::with_capacity(k);
    while out.len() < k && !list.is_empty() {
        let y: f64 = rng.gen();
        let idx = ((libm::pow(y, f64::from(power)) * list.len() as f64) as usize).min(list.len() - 1);
        out.push(list.remove(idx));
    }
    out
}

fn choose_removals(instance: &Instance, solution: &Solution, heuristic: usize, k: usize, rng: &mut SolverRng) -> Vec<RequestId> {
    let n = instance.num_requests();
    match heuristic {
        0 => sample(rng, n, k).into_vec(),
        1 => {
            let mut savings = removal_savings(instance, solution);
            savings.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            randomized_pick(&mut savings, k, WORST_POWER, rng).into_iter().map(|(r, _)| r).collect()
        }
        _ => {
            let seed = rng.gen_range(0..n);
            let a = instance.request(seed);
            let mut others: Vec<(RequestId, f64)> = (0..n)
                .filter(|&r| r != seed)
                .map(|r| {
                    let b = instance.request(r);
                    (r, instance.dist(a.pickup, b.pickup) + instance.dist(a.delivery, b.delivery))
                })
                .collect();
            others.sort_by(|x, y| x.1.total_cmp(&y.1).then(x.0.cmp(&y.0)));
            let mut out = vec![seed];
            out.extend(randomized_pick(&mut others, k - 1, SHAW_POWER, rng).into_iter().map(|(r, _)| r));
            out
        }
    }
}

/// Inserts `pending` one at a time, always the request whose best plan is
/// cheapest. `None` if some request cannot be placed.
fn cheapest_insertion(instance: &Instance, solution: &mut Solution, pending: &[RequestId], transfers: bool) -> Option<()> {
    let mut left = pending.to_vec();
    left.sort_unstable();
    while !left.is_empty() {
        let loads = all_loads(instance, solution);
        let mut best: Option<(usize, Plan)> = None;
        for (i, &r) in left.iter().enumerate() {
            let plan = best_plan(instance, solution, &loads, r, transfers)?;
            if best.is_none_or(|(_, b)| plan.delta() < b.delta() - IMPROVE_EPS) {
                best = Some((i, plan));
            }
        }
        let (i, plan) = best?;
        apply_plan(instance, solution, &plan);
        left.remove(i);
    }
    Some(())
}

/// Regret-2 insertion: repeatedly inserts the request with the largest gap
/// between its best and second-best vehicle; a request with a single
/// feasible vehicle has infinite regret. Ties go to the cheaper insertion,
/// then the lower request id.
pub fn regret_insertion(instance: &Instance, solution: &mut Solution, pending: &[RequestId]) -> Option<()> {
    let mut left = pending.to_vec();
    left.sort_unstable();
    while !left.is_empty() {
        let loads = all_loads(instance, solution);
        let mut best: Option<(usize, f64, InsertionCandidate)> = None;
        for (i, &r) in left.iter().enumerate() {
            let leg = Leg::direct(instance, r);
            let mut per_vehicle: Vec<InsertionCandidate> = solution
                .routes
                .iter()
                .enumerate()
                .filter_map(|(k, route)| {
                    best_placement(instance, route, &loads[k], &leg).map(|p| InsertionCandidate {
                        request: r,
                        vehicle: k,
                        pickup_pos: p.first_pos,
                        delivery_pos: p.second_pos,
                        delta_cost: p.delta,
                    })
                })
                .collect();
            per_vehicle.sort_by(|a, b| a.delta_cost.total_cmp(&b.delta_cost));
            let first = *per_vehicle.first()?;
            let regret = per_vehicle.get(1).map_or(f64::INFINITY, |c| c.delta_cost - first.delta_cost);
            let better = match best {
                None => true,
                Some((_, br, bc)) => {
                    let tied = regret == br || (regret - br).abs() <= IMPROVE_EPS;
                    regret > br + IMPROVE_EPS || (tied && first.delta_cost < bc.delta_cost - IMPROVE_EPS)
                }
            };
            if better {
                best = Some((i, regret, first));
            }
        }
        let (i, _, c) = best?;
        solution.insert_direct(instance, c.request, c.vehicle, c.pickup_pos, c.delivery_pos);
        left.remove(i);
    }
    Some(())
}

fn reinsert(instance: &Instance, solution: &mut Solution, heuristic: usize, pending: &[RequestId]) -> Option<()> {
    match heuristic {
        0 => cheapest_insertion(instance, solution, pending, false),
        1 => regret_insertion(instance, solution, pending),
        _ => cheapest_insertion(instance, solution, pending, true),
    }
}

/// Core loop shared with the VND/ALNS mix. The trace holds the best cost
/// after each iteration. When `history` is given, the weights after every
/// iteration are appended to it.
pub(crate) fn run(
    instance: &Instance,
    solution: &Solution,
    params: &AlnsParams,
    weights: &mut AlnsWeights,
    rng: &mut SolverRng,
    mut history: Option<&mut Vec<AlnsWeights>>,
) -> SearchOutcome {
    let n = instance.num_requests();
    let mut current = solution.clone();
    let mut current_cost = solution_cost(instance, &current);
    let mut best_cost = current_cost;
    let mut trace = Vec::with_capacity(params.iterations);
    for _ in 0..params.iterations {
        if n == 0 {
            trace.push(best_cost);
            continue;
        }
        let k = rng.gen_range(params.k_min..=params.k_max).min(n);
        let ri = roulette(&weights.removal, rng).unwrap_or(0);
        let ii = roulette(&weights.insertion, rng).unwrap_or(0);
        let removed = choose_removals(instance, &current, ri, k, rng);
        let mut candidate = current.clone();
        for &r in &removed {
            candidate.remove_request(r);
        }
        let score = match reinsert(instance, &mut candidate, ii, &removed) {
            None => SCORE_REJECTED,
            Some(()) => {
                let cost = solution_cost(instance, &candidate);
                if cost < best_cost - IMPROVE_EPS {
                    best_cost = cost;
                    current_cost = cost;
                    current = candidate;
                    SCORE_BEST
                } else if cost <= current_cost {
                    current_cost = cost;
                    best_cost = best_cost.min(cost);
                    current = candidate;
                    SCORE_ACCEPTED
                } else {
                    SCORE_REJECTED
                }
            }
        };
        weights.removal[ri] = update_weight(weights.removal[ri], score, params.reaction);
        weights.insertion[ii] = update_weight(weights.insertion[ii], score, params.reaction);
        if let Some(h) = history.as_deref_mut() {
            h.push(weights.clone());
        }
        trace.push(best_cost);
    }
    SearchOutcome { solution: current, trace }
}

/// Runs `params.iterations` destroy/repair steps. Only candidates no worse
/// than the incumbent are accepted, so the result never costs more than
/// the input. The trace holds the best cost after each iteration.
pub fn alns(instance: &Instance, solution: &Solution, params: &AlnsParams) -> Result<SearchOutcome> {
    alns_with_weights(instance, solution, params).map(|(out, _)| out)
}

/// [`alns`] that also returns the weights after every iteration.
pub fn alns_with_weights(
    instance: &Instance,
    solution: &Solution,
    params: &AlnsParams,
) -> Result<(SearchOutcome, Vec<AlnsWeights>)> {
    params.validate(instance)?;
    let mut weights = AlnsWeights::new(params);
    let mut history = Vec::with_capacity(params.iterations);
    let mut rng = rng::seeded(params.seed);
    let out = run(instance, solution, params, &mut weights, &mut rng, Some(&mut history));
    Ok((out, history))
}
