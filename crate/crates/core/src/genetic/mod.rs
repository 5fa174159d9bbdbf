//! Hybrid genetic algorithms on a multigraph encoding.
//!
//! A chromosome stores, for every vehicle `k` and traveled arc `i -> j`,
//! a decreasing transform of the arc length in slot `(i, j, k)`. Both
//! methods share SUS selection, uniform crossover and swap mutation. The
//! SA hybrid replaces member by member with a Boltzmann test under a
//! cooling temperature that also drives the mutation rate. The taboo
//! hybrid admits children only when they are far, in Minkowski distance,
//! from the population and from recently admitted children.

mod chromosome;
mod init;
mod operators;

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

pub use chromosome::{arc_value, decode, encode, fitness, is_simple, logistic_transform, Chromosome};
pub use init::{
    admissible_arcs, init_constructive, init_random, init_random_with, random_chromosome, Population, EXTRA_ARCS,
    MAX_REDRAWS,
};
pub use operators::{
    adaptive_mutation_rate, boltzmann_probability, boltzmann_replace, minkowski_distance, selection_weight,
    shift_mutation, shift_mutation_in_place, stop_criterion, sus_select, sus_select_weights, taboo_replace,
    uniform_crossover, AdaptiveMutation, TabooConfig, MUTATION_CEIL, MUTATION_FLOOR,
};

use crate::cost::solution_cost;
use crate::error::{Error, Result};
use crate::model::Instance;
use crate::rng;
use crate::solution::Solution;
use crate::par;
use init::member_stream;

pub const CSV_HEADER: &str = "generation,best,mean_finite,variance_finite,feasible_count,temperature,mutation_rate";

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    /// Lowest fitness in the population (may be infinite).
    pub best: f64,
    /// NaN when no member is feasible.
    pub mean_finite: f64,
    pub variance_finite: f64,
    pub feasible_count: usize,
    /// 0 for the taboo hybrid.
    pub temperature: f64,
    pub mutation_rate: f64,
}

impl GenerationStats {
    fn of(generation: usize, fitness: &[f64], temperature: f64, mutation_rate: f64) -> Self {
        let (mean, variance, count) = finite_moments(fitness);
        Self {
            generation,
            best: fitness.iter().copied().fold(f64::INFINITY, f64::min),
            mean_finite: mean,
            variance_finite: variance,
            feasible_count: count,
            temperature,
            mutation_rate,
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.generation,
            self.best,
            self.mean_finite,
            self.variance_finite,
            self.feasible_count,
            self.temperature,
            self.mutation_rate
        )
    }
}

/// Mean and population variance of the finite values, with their count.
fn finite_moments(values: &[f64]) -> (f64, f64, usize) {
    let finite: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.is_empty() {
        return (f64::NAN, f64::NAN, 0);
    }
    let n = finite.len() as f64;
    let mean = finite.iter().sum::<f64>() / n;
    let var = finite.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var, finite.len())
}

/// Sample standard deviation of the finite values; `None` below two of them.
fn finite_sample_std(values: &[f64]) -> Option<f64> {
    let (_, var, count) = finite_moments(values);
    (count >= 2).then(|| libm::sqrt(var * count as f64 / (count - 1) as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaMethod {
    SaHybrid,
    TabooHybrid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaInit {
    Random,
    Constructive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaParams {
    pub method: GaMethod,
    pub init: GaInit,
    pub population: usize,
    pub max_generations: usize,
    /// Fixed mutation probability of the taboo hybrid and base rate of the
    /// adaptive one.
    pub mutation: f64,
    /// Cooling factor per generation.
    pub gamma: f64,
    /// Minkowski order.
    pub p: f64,
    /// Taboo radius as a fraction of the initial best fitness.
    pub delta_factor: f64,
    pub tenure: usize,
    /// Stop once the last four best values vary less than this times the
    /// squared best.
    pub stop_factor: f64,
    /// Extra-arc probability for random init; `None` picks
    /// [`EXTRA_ARCS`] expected arcs.
    pub p_edge: Option<f64>,
    pub seed: u64,
}

impl GaParams {
    pub fn new(method: GaMethod, init: GaInit, seed: u64) -> Self {
        Self {
            method,
            init,
            population: 256,
            max_generations: 500,
            mutation: 0.05,
            gamma: 0.9,
            p: 2.0,
            delta_factor: 1e-3,
            tenure: 64,
            stop_factor: 1e-6,
            p_edge: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: String| Err(Error::InvalidInput(what));
        if !(0.0..=1.0).contains(&self.mutation) {
            return bad(format!("mutation probability {} outside [0, 1]", self.mutation));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return bad(format!("cooling factor {} outside (0, 1)", self.gamma));
        }
        if !(self.p >= 1.0) {
            return bad(format!("Minkowski order {} below 1", self.p));
        }
        if !(self.delta_factor > 0.0) {
            return bad(format!("taboo radius factor {} must be positive", self.delta_factor));
        }
        if !(self.stop_factor >= 0.0) {
            return bad(format!("stop factor {} must be non-negative", self.stop_factor));
        }
        if let Some(p) = self.p_edge {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("edge probability {p} outside [0, 1]"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub solution: Solution,
    pub cost: f64,
    /// Best-ever fitness after each generation, starting with the initial
    /// population.
    pub trace: Vec<f64>,
    pub stats: Vec<GenerationStats>,
}

/// Runs one of the two hybrids and returns the best decoded member ever
/// seen. Errors with [`Error::GaNoFeasible`] when no member was feasible.
pub fn run_ga(instance: &Instance, params: &GaParams) -> Result<GaOutcome> {
    params.validate()?;
    let mut pop = match params.init {
        GaInit::Random => match params.p_edge {
            Some(p) => init_random_with(instance, params.population, params.seed, p),
            None => init_random(instance, params.population, params.seed),
        },
        GaInit::Constructive => init_constructive(instance, params.population, params.seed)?,
    };

    let initial_best = pop.best_fitness();
    let t0 = match finite_sample_std(&pop.fitness) {
        Some(s) if s > 0.0 => s,
        _ if initial_best.is_finite() && initial_best > 0.0 => 1e-3 * initial_best,
        _ => 1.0,
    };
    let adaptive = AdaptiveMutation { base: params.mutation, t0, sigma_ref: t0 * t0 };
    let mut taboo_cfg = TabooConfig {
        p: params.p,
        delta: params.delta_factor * if initial_best.is_finite() { initial_best } else { 1.0 },
        tenure: params.tenure,
    };
    let mut radius_fixed = initial_best.is_finite();
    let mut taboo: VecDeque<Chromosome> = VecDeque::new();

    let mut temperature = match params.method {
        GaMethod::SaHybrid => t0,
        GaMethod::TabooHybrid => 0.0,
    };
    let rate_for = |fitness: &[f64], temperature: f64| -> f64 {
        match params.method {
            GaMethod::SaHybrid => {
                let (_, var, count) = finite_moments(fitness);
                adaptive_mutation_rate(if count == 0 { 0.0 } else { var }, temperature, &adaptive)
                    .unwrap_or(params.mutation)
            }
            GaMethod::TabooHybrid => params.mutation,
        }
    };

    let mut best: Option<(f64, Chromosome)> = None;
    let note_best = |pop: &Population, best: &mut Option<(f64, Chromosome)>| {
        if let Some(i) = pop.best_index() {
            let f = pop.fitness[i];
            if f.is_finite() && best.as_ref().is_none_or(|(b, _)| f < *b) {
                *best = Some((f, pop.members[i].clone()));
            }
        }
    };
    note_best(&pop, &mut best);

    let mut stats = alloc::vec![GenerationStats::of(0, &pop.fitness, temperature, rate_for(&pop.fitness, temperature))];
    let mut trace = alloc::vec![best.as_ref().map_or(f64::INFINITY, |b| b.0)];
    let mut history = alloc::vec![pop.best_fitness()];
    let size = pop.len();

    for g in 1..=params.max_generations {
        let best_so_far = best.as_ref().map_or(f64::INFINITY, |b| b.0);
        if size == 0 || stop_criterion(&history, params.stop_factor * best_so_far * best_so_far) {
            break;
        }
        let rate = rate_for(&pop.fitness, temperature);
        let mut sel_rng = rng::stream(params.seed, ((g as u64) << 32) | u64::from(u32::MAX));
        let picks = match sus_select(&pop.fitness, size, &mut sel_rng) {
            Ok(p) => p,
            // Nobody feasible yet: every member weighs the same.
            Err(_) => sus_select_weights(&alloc::vec![1.0; size], size, &mut sel_rng)?,
        };
        let parents = &pop.members;
        let children = par::map_indexed(size, |m| {
            let mut rng = member_stream(params.seed, g as u64, m);
            let a = &parents[picks[m & !1]];
            let b = &parents[picks[(m | 1) % size]];
            // Parents always share the instance's shape.
            let mut child = uniform_crossover(a, b, &mut rng).unwrap_or_else(|_| a.clone());
            shift_mutation_in_place(&mut child, rate, &mut rng);
            let f = fitness(instance, &child);
            (child, f)
        });

        match params.method {
            GaMethod::SaHybrid => {
                for (m, (child, f)) in children.into_iter().enumerate() {
                    if boltzmann_replace(pop.fitness[m], f, temperature, &mut sel_rng)? {
                        pop.members[m] = child;
                        pop.fitness[m] = f;
                    }
                }
            }
            GaMethod::TabooHybrid => {
                for (child, f) in children {
                    if !radius_fixed && f.is_finite() {
                        taboo_cfg.delta = params.delta_factor * f;
                        radius_fixed = true;
                    }
                    taboo_replace(&mut pop.members, &mut pop.fitness, &child, f, &mut taboo, &taboo_cfg)?;
                }
            }
        }

        note_best(&pop, &mut best);
        stats.push(GenerationStats::of(g, &pop.fitness, temperature, rate));
        trace.push(best.as_ref().map_or(f64::INFINITY, |b| b.0));
        history.push(pop.best_fitness());
        if params.method == GaMethod::SaHybrid {
            temperature = (temperature * params.gamma).max(f64::MIN_POSITIVE);
        }
    }

    let Some((_, chrom)) = best else {
        return Err(Error::GaNoFeasible { trace: stats });
    };
    // The best chromosome had finite fitness, so it decodes.
    let solution = decode(instance, &chrom).ok_or(Error::NoFeasible)?;
    let cost = solution_cost(instance, &solution);
    Ok(GaOutcome { solution, cost, trace, stats })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feasibility::check_feasibility;
    use crate::local_search::tests::scattered;
    use crate::model::fixtures::build;

    fn small(method: GaMethod, init: GaInit, seed: u64) -> GaParams {
        GaParams { population: 32, max_generations: 30, ..GaParams::new(method, init, seed) }
    }

    #[test]
    fn runs_are_feasible_monotone_and_reproducible() {
        let inst = scattered(6, 11);
        for method in [GaMethod::SaHybrid, GaMethod::TabooHybrid] {
            for init in [GaInit::Random, GaInit::Constructive] {
                let params = small(method, init, 3);
                let out = run_ga(&inst, &params).unwrap();
                assert!(check_feasibility(&inst, &out.solution).feasible);
                assert!((out.cost - out.trace.last().unwrap()).abs() < 1e-9);
                assert!(out.trace.windows(2).all(|w| w[1] <= w[0]));
                assert_eq!(out.trace.len(), out.stats.len());
                assert_eq!(out, run_ga(&inst, &params).unwrap());
            }
        }
    }

    #[test]
    fn zero_generations_is_best_initial_member() {
        let inst = scattered(6, 12);
        let params = GaParams { max_generations: 0, ..small(GaMethod::SaHybrid, GaInit::Constructive, 5) };
        let out = run_ga(&inst, &params).unwrap();
        let pop = init_constructive(&inst, params.population, params.seed).unwrap();
        assert_eq!(out.cost, pop.best_fitness());
        assert_eq!(out.stats.len(), 1);
    }

    #[test]
    fn no_feasible_member_is_an_error() {
        // A request heavier than every vehicle.
        let inst = build(&[((1.0, 0.0), (2.0, 0.0), 9)], &[((0.0, 0.0), (0.0, 0.0), 5)], &[]);
        let params = GaParams { max_generations: 3, ..small(GaMethod::SaHybrid, GaInit::Random, 1) };
        match run_ga(&inst, &params) {
            Err(Error::GaNoFeasible { trace }) => assert!(!trace.is_empty()),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_params() {
        let inst = scattered(3, 1);
        let base = small(GaMethod::TabooHybrid, GaInit::Random, 0);
        for bad in [
            GaParams { mutation: 1.5, ..base.clone() },
            GaParams { p: 0.5, ..base.clone() },
            GaParams { delta_factor: 0.0, ..base.clone() },
            GaParams { gamma: 1.0, ..base.clone() },
        ] {
            assert!(run_ga(&inst, &bad).is_err());
        }
    }

    #[test]
    fn csv_row_has_header_arity() {
        let s = GenerationStats::of(3, &[1.0, 3.0, f64::INFINITY], 2.0, 0.05);
        assert_eq!(s.feasible_count, 2);
        assert_eq!(s.mean_finite, 2.0);
        assert_eq!(s.variance_finite, 1.0);
        assert_eq!(s.csv_row().split(',').count(), CSV_HEADER.split(',').count());
        assert_eq!(s.csv_row(), "3,1,2,1,2,2,0.05");
    }
}
