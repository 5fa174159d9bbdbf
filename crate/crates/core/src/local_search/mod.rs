//! Neighborhood search: VND, ALNS, simulated annealing and the VND/ALNS mix.

mod alns;
mod moves;
mod sa;

use alloc::vec::Vec;
use core::ops::ControlFlow;

pub use alns::{
    alns, alns_with_weights, regret_insertion, roulette, selection_probabilities, update_weight, AlnsParams,
    AlnsWeights, INSERTION_HEURISTICS, REMOVAL_HEURISTICS, SCORE_ACCEPTED, SCORE_BEST, SCORE_REJECTED,
};
pub use moves::{
    neighborhood_adr, neighborhood_rnr, neighborhood_swr, sample_move, scan, Move, MoveKind, Relocation, Slot,
    MOVE_KINDS,
};
pub use sa::{metropolis, simulated_annealing, SaSchedule};

use crate::cost::solution_cost;
use crate::error::Result;
use crate::model::Instance;
use crate::rng;
use crate::solution::Solution;
use crate::{SearchOutcome, IMPROVE_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Strategy {
    /// Scan the whole neighborhood and take the best move.
    Best,
    /// Take the first improving move found.
    #[default]
    First,
}

/// Improving move of one kind under `strategy`.
pub fn find_improving(kind: MoveKind, instance: &Instance, solution: &Solution, strategy: Strategy) -> Option<Move> {
    let mut found: Option<Move> = None;
    let _ = scan(kind, instance, solution, &mut |m| {
        if m.delta_cost < -IMPROVE_EPS && found.is_none_or(|f| m.delta_cost < f.delta_cost - IMPROVE_EPS) {
            found = Some(m);
            if strategy == Strategy::First {
                return ControlFlow::Break(());
            }
        }
        ControlFlow::Continue(())
    });
    found
}

/// Variable neighborhood descent over ADR, RNR, SWR in that order,
/// restarting at ADR after every improvement. The trace holds the input
/// cost followed by the cost after each applied move.
pub fn vnd(instance: &Instance, solution: &Solution, strategy: Strategy) -> SearchOutcome {
    let mut current = solution.clone();
    let mut cost = solution_cost(instance, &current);
    let mut trace = alloc::vec![cost];
    let mut k = 0;
    while k < MOVE_KINDS.len() {
        match find_improving(MOVE_KINDS[k], instance, &current, strategy) {
            Some(m) => {
                m.apply(instance, &mut current);
                let next = solution_cost(instance, &current);
                debug_assert!(next < cost);
                cost = next;
                trace.push(cost);
                k = 0;
            }
            None => k += 1,
        }
    }
    SearchOutcome { solution: current, trace }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixParams {
    /// ALNS settings; `alns.iterations` is the total destroy/repair budget.
    pub alns: AlnsParams,
    /// ALNS iterations between two descents.
    pub batch: usize,
    pub strategy: Strategy,
}

impl MixParams {
    pub fn for_instance(instance: &Instance, seed: u64) -> Self {
        Self { alns: AlnsParams::for_instance(instance, seed), batch: 100, strategy: Strategy::First }
    }
}

/// Descends with VND, then alternates one ALNS batch and another descent
/// until the ALNS budget is spent. ALNS weights carry over between
/// batches. The trace holds the best cost after each stage.
pub fn mix_vnd_alns(instance: &Instance, solution: &Solution, params: &MixParams) -> Result<SearchOutcome> {
    params.alns.validate(instance)?;
    let first = vnd(instance, solution, params.strategy);
    let mut current = first.solution;
    let mut trace: Vec<f64> = first.trace;
    let mut weights = AlnsWeights::new(&params.alns);
    let mut rng = rng::seeded(params.alns.seed);
    let batch = params.batch.max(1);
    let mut used = 0;
    while used < params.alns.iterations {
        let n = batch.min(params.alns.iterations - used);
        let step = AlnsParams { iterations: n, ..params.alns.clone() };
        let out = alns::run(instance, &current, &step, &mut weights, &mut rng, None);
        let descended = vnd(instance, &out.solution, params.strategy);
        trace.extend(out.trace);
        trace.extend(descended.trace);
        current = descended.solution;
        used += n;
    }
    // Stage traces restart from each stage's own input; fold to best-so-far.
    let mut best = f64::INFINITY;
    for c in trace.iter_mut() {
        best = best.min(*c);
        *c = best;
    }
    Ok(SearchOutcome { solution: current, trace })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::constructive::greedy_construct;
    use crate::feasibility::check_feasibility;
    use crate::model::fixtures::build;
    use crate::oracle::{solve_exact, OracleLimits};

    pub(crate) fn scattered(n: usize, seed: u64) -> Instance {
        use rand::Rng;
        let mut rng = crate::rng::seeded(seed);
        let mut pt = || (rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0));
        let reqs: Vec<_> = (0..n).map(|i| (pt(), pt(), 1 + (i as u32 % 3))).collect();
        let vehs = [(pt(), pt(), 6), (pt(), pt(), 6), (pt(), pt(), 6)];
        let tps = [pt(), pt()];
        build(&reqs, &vehs, &tps)
    }

    #[test]
    fn vnd_reaches_a_local_optimum() {
        let inst = scattered(12, 1);
        let start = greedy_construct(&inst).unwrap();
        for strategy in [Strategy::First, Strategy::Best] {
            let out = vnd(&inst, &start, strategy);
            assert!(check_feasibility(&inst, &out.solution).feasible);
            assert!(out.trace.windows(2).all(|w| w[1] < w[0]));
            for kind in MOVE_KINDS {
                assert!(find_improving(kind, &inst, &out.solution, Strategy::Best).is_none());
            }
            // A local optimum is a fixed point.
            let again = vnd(&inst, &out.solution, strategy);
            assert_eq!(again.solution, out.solution);
            assert_eq!(again.trace.len(), 1);
        }
    }

    #[test]
    fn vnd_stays_above_optimum() {
        let inst = build(
            &[((2.0, 8.0), (6.0, 9.0), 3), ((-4.0, 3.0), (-7.0, -2.0), 4), ((5.0, -5.0), (1.0, -9.0), 2)],
            &[((0.0, 0.0), (0.0, 0.0), 6), ((1.0, 1.0), (1.0, 1.0), 6)],
            &[],
        );
        let (_, opt) = solve_exact(&inst, &OracleLimits::default()).unwrap();
        let out = vnd(&inst, &greedy_construct(&inst).unwrap(), Strategy::First);
        assert!(solution_cost(&inst, &out.solution) >= opt - 1e-9);
    }

    #[test]
    fn mix_budget_zero_is_vnd() {
        let inst = scattered(10, 2);
        let start = greedy_construct(&inst).unwrap();
        let mut params = MixParams::for_instance(&inst, 4);
        params.alns.iterations = 0;
        let out = mix_vnd_alns(&inst, &start, &params).unwrap();
        assert_eq!(out.solution, vnd(&inst, &start, Strategy::First).solution);
    }

    #[test]
    fn mix_improves_on_vnd() {
        let inst = scattered(14, 3);
        let start = greedy_construct(&inst).unwrap();
        let mut params = MixParams::for_instance(&inst, 4);
        params.alns.iterations = 300;
        let out = mix_vnd_alns(&inst, &start, &params).unwrap();
        let v = vnd(&inst, &start, Strategy::First);
        let cost = solution_cost(&inst, &out.solution);
        assert!(cost <= solution_cost(&inst, &v.solution) + 1e-9);
        assert!(cost <= solution_cost(&inst, &start) + 1e-9);
        assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
        assert!(check_feasibility(&inst, &out.solution).feasible);
        assert_eq!(out, mix_vnd_alns(&inst, &start, &params).unwrap());
    }
}
