//! Selection, variation and replacement operators.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use super::chromosome::Chromosome;
use crate::error::{Error, Result};
use crate::rng::SolverRng;

/// Selection weight of a fitness value: its reciprocal, 0 for infinity.
pub fn selection_weight(fitness: f64) -> f64 {
    if fitness.is_finite() {
        1.0 / fitness.max(1e-12)
    } else {
        0.0
    }
}

/// Stochastic universal sampling over explicit weights: one offset drawn
/// in `[0, W / count)`, then `count` pointers spaced `W / count` apart.
pub fn sus_select_weights(weights: &[f64], count: usize, rng: &mut SolverRng) -> Result<Vec<usize>> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) || weights.iter().any(|w| *w < 0.0) {
        return Err(Error::Selection);
    }
    if count == 0 {
        return Ok(Vec::new());
    }
    let step = total / count as f64;
    let start = rng.gen::<f64>() * step;
    let last_positive = weights.iter().rposition(|w| *w > 0.0).unwrap();
    let mut out = Vec::with_capacity(count);
    let mut i = 0;
    let mut cumulative = weights[0];
    for m in 0..count {
        let pointer = start + m as f64 * step;
        while cumulative <= pointer && i < last_positive {
            i += 1;
            cumulative += weights[i];
        }
        out.push(i);
    }
    Ok(out)
}

/// SUS on a minimization population: weight `1 / fitness`, infinite
/// fitness never chosen.
pub fn sus_select(fitness: &[f64], count: usize, rng: &mut SolverRng) -> Result<Vec<usize>> {
    let weights: Vec<f64> = fitness.iter().map(|&f| selection_weight(f)).collect();
    sus_select_weights(&weights, count, rng)
}

/// Child takes `a`'s value in a slot when that slot's draw is below 0.5,
/// otherwise `b`'s. Slots empty in both parents stay empty without a
/// draw.
pub fn uniform_crossover(a: &Chromosome, b: &Chromosome, rng: &mut SolverRng) -> Result<Chromosome> {
    if !a.same_shape(b) {
        return Err(Error::InvalidInput("parents differ in shape".into()));
    }
    let (ea, eb) = (a.entries(), b.entries());
    let mut out = Vec::with_capacity(ea.len().max(eb.len()));
    let (mut x, mut y) = (0, 0);
    while x < ea.len() || y < eb.len() {
        let sa = ea.get(x).map_or(usize::MAX, |e| e.0);
        let sb = eb.get(y).map_or(usize::MAX, |e| e.0);
        let slot = sa.min(sb);
        let va = if sa == slot { x += 1; ea[x - 1].1 } else { 0.0 };
        let vb = if sb == slot { y += 1; eb[y - 1].1 } else { 0.0 };
        let v = if rng.gen::<f64>() < 0.5 { va } else { vb };
        if v > 0.0 {
            out.push((slot, v));
        }
    }
    Ok(Chromosome::from_sorted(a.nodes(), a.vehicles(), out))
}

/// With `probability`, swaps the values of two uniformly drawn slots.
/// Returns whether a swap happened.
pub fn shift_mutation_in_place(chromosome: &mut Chromosome, probability: f64, rng: &mut SolverRng) -> bool {
    let slots = chromosome.slot_count();
    if slots == 0 || rng.gen::<f64>() >= probability {
        return false;
    }
    let s1 = rng.gen_range(0..slots);
    let s2 = rng.gen_range(0..slots);
    let (v1, v2) = (chromosome.get_slot(s1), chromosome.get_slot(s2));
    // Both values are valid slot contents already.
    let _ = chromosome.set_slot(s1, v2);
    let _ = chromosome.set_slot(s2, v1);
    true
}

pub fn shift_mutation(chromosome: &Chromosome, probability: f64, rng: &mut SolverRng) -> Chromosome {
    let mut c = chromosome.clone();
    shift_mutation_in_place(&mut c, probability, rng);
    c
}

/// Settings of the diversity- and temperature-driven mutation rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveMutation {
    pub base: f64,
    /// Initial temperature.
    pub t0: f64,
    /// Fitness variance at which the diversity factor is one half.
    pub sigma_ref: f64,
}

pub const MUTATION_FLOOR: f64 = 0.001;
pub const MUTATION_CEIL: f64 = 0.5;

/// `clamp(base * (1 + T / t0) * sigma_ref / (sigma_ref + variance))`:
/// falls as the population spreads out and rises with temperature.
pub fn adaptive_mutation_rate(variance: f64, temperature: f64, cfg: &AdaptiveMutation) -> Result<f64> {
    if variance.is_nan() || variance < 0.0 {
        return Err(Error::InvalidInput(format!("negative fitness variance {variance}")));
    }
    if !(cfg.t0 > 0.0 && cfg.sigma_ref > 0.0) {
        return Err(Error::InvalidInput("t0 and sigma_ref must be positive".into()));
    }
    let heat = 1.0 + temperature.max(0.0) / cfg.t0;
    let diversity = if variance.is_infinite() { 0.0 } else { cfg.sigma_ref / (cfg.sigma_ref + variance) };
    Ok((cfg.base * heat * diversity).clamp(MUTATION_FLOOR, MUTATION_CEIL))
}

/// Acceptance probability of replacing fitness `e` by `candidate`.
pub fn boltzmann_probability(e: f64, candidate: f64, tau: f64) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::InvalidInput(format!("temperature {tau} must be positive")));
    }
    Ok(if candidate.is_infinite() {
        0.0
    } else if candidate <= e {
        1.0
    } else {
        libm::exp((e - candidate) / tau)
    })
}

/// Boltzmann replacement test: an infinite candidate always loses, a
/// candidate no worse always wins, otherwise it wins with probability
/// `exp((e - candidate) / tau)`.
pub fn boltzmann_replace(e: f64, candidate: f64, tau: f64, rng: &mut SolverRng) -> Result<bool> {
    let p = boltzmann_probability(e, candidate, tau)?;
    Ok(p >= 1.0 || (p > 0.0 && rng.gen::<f64>() < p))
}

/// `(sum |a - b|^p)^(1/p)` over all slots.
pub fn minkowski_distance(a: &Chromosome, b: &Chromosome, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::InvalidInput(format!("Minkowski order {p} below 1")));
    }
    if !a.same_shape(b) {
        return Err(Error::InvalidInput("chromosomes differ in shape".into()));
    }
    let (ea, eb) = (a.entries(), b.entries());
    let (mut x, mut y) = (0, 0);
    let mut sum = 0.0;
    let mut max_diff: f64 = 0.0;
    let mut push = |d: f64| {
        sum += libm::pow(d, p);
        max_diff = max_diff.max(d);
    };
    while x < ea.len() || y < eb.len() {
        let sa = ea.get(x).map_or(usize::MAX, |e| e.0);
        let sb = eb.get(y).map_or(usize::MAX, |e| e.0);
        if sa == sb {
            push((ea[x].1 - eb[y].1).abs());
            x += 1;
            y += 1;
        } else if sa < sb {
            push(ea[x].1);
            x += 1;
        } else {
            push(eb[y].1);
            y += 1;
        }
    }
    if p.is_infinite() {
        return Ok(max_diff);
    }
    Ok(libm::pow(sum, 1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TabooConfig {
    pub p: f64,
    /// Candidates closer than this to a member or taboo entry are refused.
    pub delta: f64,
    pub tenure: usize,
}

/// Diversity-guarded replacement. The candidate is refused when its
/// fitness is infinite or it lies within `delta` of any member or taboo
/// entry. Otherwise it replaces the worst member (highest fitness, last
/// index on ties) and enters the taboo list, whose oldest entry drops out
/// beyond `tenure`.
pub fn taboo_replace(
    members: &mut [Chromosome],
    fitness: &mut [f64],
    candidate: &Chromosome,
    candidate_fitness: f64,
    taboo: &mut VecDeque<Chromosome>,
    cfg: &TabooConfig,
) -> Result<bool> {
    if members.is_empty() || candidate_fitness.is_infinite() {
        return Ok(false);
    }
    for other in members.iter().chain(taboo.iter()) {
        if minkowski_distance(candidate, other, cfg.p)? < cfg.delta {
            return Ok(false);
        }
    }
    let worst = (0..fitness.len()).fold(0, |w, i| if fitness[i] >= fitness[w] { i } else { w });
    members[worst] = candidate.clone();
    fitness[worst] = candidate_fitness;
    if cfg.tenure > 0 {
        taboo.push_back(candidate.clone());
        while taboo.len() > cfg.tenure {
            taboo.pop_front();
        }
    }
    Ok(true)
}

/// True once there are four finite best values and their population
/// variance is below `eps`.
pub fn stop_criterion(history: &[f64], eps: f64) -> bool {
    let finite: Vec<f64> = history.iter().copied().filter(|v| v.is_finite()).collect();
    if finite.len() < 4 {
        return false;
    }
    let last = &finite[finite.len() - 4..];
    let mean = last.iter().sum::<f64>() / 4.0;
    let var = last.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / 4.0;
    var < eps
}
