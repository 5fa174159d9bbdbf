//! Simulated annealing over the union of the three move kinds.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::moves::sample_move;
use crate::cost::solution_cost;
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rng;
use crate::solution::Solution;
use crate::SearchOutcome;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaSchedule {
    pub t0: f64,
    /// Geometric cooling factor, `tau <- gamma * tau` per iteration.
    pub gamma: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl SaSchedule {
    /// `t0 = 0.05 * initial_cost`, `gamma = 0.995`, 2000 iterations.
    pub fn for_cost(initial_cost: f64, seed: u64) -> Self {
        Self { t0: (0.05 * initial_cost).max(1e-9), gamma: 0.995, iterations: 2000, seed }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::InvalidInput(format!("initial temperature {} must be positive", self.t0)));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidInput(format!("cooling factor {} outside (0, 1)", self.gamma)));
        }
        Ok(())
    }
}

/// Acceptance probability `min(1, exp((e - e0) / tau))` of moving from cost
/// `e` to cost `e0`.
pub fn metropolis(e: f64, e0: f64, tau: f64) -> f64 {
    if e0 <= e {
        1.0
    } else if tau <= 0.0 {
        0.0
    } else {
        libm::exp((e - e0) / tau).min(1.0)
    }
}

/// Returns the best solution seen. The trace holds the best cost after
/// each iteration.
pub fn simulated_annealing(instance: &Instance, solution: &Solution, schedule: &SaSchedule) -> Result<SearchOutcome> {
    schedule.validate()?;
    let mut rng = rng::seeded(schedule.seed);
    let mut current = solution.clone();
    let mut cost = solution_cost(instance, &current);
    let mut best = current.clone();
    let mut best_cost = cost;
    let mut trace = Vec::with_capacity(schedule.iterations);
    let mut tau = schedule.t0;
    for _ in 0..schedule.iterations {
        let Some(m) = sample_move(instance, &current, &mut rng) else { break };
        let candidate = cost + m.delta_cost;
        if rng.gen::<f64>() < metropolis(cost, candidate, tau) {
            m.apply(instance, &mut current);
            cost = solution_cost(instance, &current);
            if cost < best_cost {
                best_cost = cost;
                best.clone_from(&current);
            }
        }
        trace.push(best_cost);
        tau *= schedule.gamma;
    }
    Ok(SearchOutcome { solution: best, trace })
}
