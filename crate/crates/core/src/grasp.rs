//! Construction-only GRASP.
//!
//! Each step lists the cheapest insertion of every unassigned request into
//! every vehicle, keeps those whose delta is within `alpha` of the best on
//! the value scale, and picks one uniformly. The run keeps the best of many
//! such constructions, optionally passing each through an improver first.

use alloc::vec::Vec;

use rand::Rng;

use crate::constructive::{argmin_candidate, best_of, build_by_insertion};
use crate::cost::solution_cost;
use crate::error::{Error, Result};
use crate::insertion::InsertionCandidate;
use crate::model::Instance;
use crate::rng::{self, SolverRng};
use crate::solution::Solution;
use crate::{par, SearchOutcome};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraspParams {
    pub alpha: f64,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for GraspParams {
    fn default() -> Self {
        Self { alpha: 0.3, iterations: 32, seed: 0 }
    }
}

impl GraspParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::InvalidInput(alloc::format!("alpha {} outside [0, 1]", self.alpha)));
        }
        if self.iterations == 0 {
            return Err(Error::InvalidInput("GRASP needs at least one iteration".into()));
        }
        Ok(())
    }
}

/// Indices of the restricted candidate list.
pub fn restricted_candidates(candidates: &[InsertionCandidate], alpha: f64) -> Vec<usize> {
    let (lo, hi) = candidates
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c.delta_cost), hi.max(c.delta_cost)));
    let bound = lo + alpha * (hi - lo);
    (0..candidates.len()).filter(|&i| candidates[i].delta_cost <= bound).collect()
}

/// One randomized construction. `alpha = 0` reproduces
/// [`crate::constructive::greedy_construct`] without touching `rng`.
pub fn grasp_construct(instance: &Instance, alpha: f64, rng: &mut SolverRng) -> Result<Solution> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidInput(alloc::format!("alpha {alpha} outside [0, 1]")));
    }
    if alpha == 0.0 {
        return build_by_insertion(instance, argmin_candidate);
    }
    build_by_insertion(instance, |candidates| {
        let rcl = restricted_candidates(candidates, alpha);
        rcl[rng.gen_range(0..rcl.len())]
    })
}

/// Best of `params.iterations` constructions. Iteration `i` draws from
/// stream `i` of the seed; ties go to the lower iteration. The trace holds
/// the best cost after each iteration.
pub fn grasp_run(
    instance: &Instance,
    params: &GraspParams,
    improver: Option<&(dyn Fn(&Instance, &Solution) -> Solution + Sync)>,
) -> Result<SearchOutcome> {
    params.validate()?;
    let results = par::map_indexed(params.iterations, |i| {
        let mut rng = rng::stream(params.seed, i as u64);
        let mut sol = grasp_construct(instance, params.alpha, &mut rng)?;
        if let Some(improve) = improver {
            sol = improve(instance, &sol);
        }
        Ok((solution_cost(instance, &sol), sol))
    });
    let mut trace = Vec::with_capacity(results.len());
    let mut best = f64::INFINITY;
    for (cost, _) in results.iter().flatten() {
        best = best.min(*cost);
        trace.push(best);
    }
    let solution = best_of(results)?;
    Ok(SearchOutcome { solution, trace })
}
