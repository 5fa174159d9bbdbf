//! The benchmark's method registry.
//!
//! Every constructive method ends with transshipment, and the local
//! searches start from the greedy method's output unless `start=` says
//! otherwise.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use pdpt_core::constructive::{
    clarke_wright, greedy_construct, multistart, transship_improve, transship_until_stable, DEFAULT_STARTS,
    MAX_TRANSSHIP_PASSES,
};
use pdpt_core::genetic::{run_ga, GaInit, GaMethod, GaParams, GenerationStats};
use pdpt_core::grasp::{grasp_run, GraspParams};
use pdpt_core::local_search::{
    alns, mix_vnd_alns, simulated_annealing, vnd, AlnsParams, MixParams, SaSchedule, Strategy,
};
use pdpt_core::{solution_cost, Instance, Solution};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    Greedy,
    ClarkeWright,
    Multistart,
    GraspGreedy,
    GraspMultistart,
    Vnd,
    Alns,
    Sa,
    Mix,
    GaSaRandom,
    GaSaConstructive,
    GaTabooRandom,
    GaTabooConstructive,
}

impl Method {
    pub const ALL: [Method; 13] = [
        Method::Greedy,
        Method::ClarkeWright,
        Method::Multistart,
        Method::GraspGreedy,
        Method::GraspMultistart,
        Method::Vnd,
        Method::Alns,
        Method::Sa,
        Method::Mix,
        Method::GaSaRandom,
        Method::GaSaConstructive,
        Method::GaTabooRandom,
        Method::GaTabooConstructive,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Method::Greedy => "greedy",
            Method::ClarkeWright => "cw",
            Method::Multistart => "multistart",
            Method::GraspGreedy => "grasp-greedy",
            Method::GraspMultistart => "grasp-multistart",
            Method::Vnd => "vnd",
            Method::Alns => "alns",
            Method::Sa => "sa",
            Method::Mix => "mix",
            Method::GaSaRandom => "ga-sa-rand",
            Method::GaSaConstructive => "ga-sa-cons",
            Method::GaTabooRandom => "ga-taboo-rand",
            Method::GaTabooConstructive => "ga-taboo-cons",
        }
    }

    pub fn is_constructive(self) -> bool {
        matches!(
            self,
            Method::Greedy | Method::ClarkeWright | Method::Multistart | Method::GraspGreedy | Method::GraspMultistart
        )
    }

    pub fn is_local_search(self) -> bool {
        matches!(self, Method::Vnd | Method::Alns | Method::Sa | Method::Mix)
    }

    pub fn is_genetic(self) -> bool {
        !self.is_constructive() && !self.is_local_search()
    }

    /// Parameter keys the method reads.
    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Method::Greedy | Method::ClarkeWright => &[],
            Method::Multistart => &["starts"],
            Method::GraspGreedy | Method::GraspMultistart => &["alpha", "iterations"],
            Method::Vnd => &["start", "strategy"],
            Method::Alns => &["start", "iterations"],
            Method::Sa => &["start", "iterations", "gamma"],
            Method::Mix => &["start", "iterations", "batch", "strategy"],
            _ => &["population", "generations", "mutation"],
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| Error::Config(format!("unknown method {s:?}")))
    }
}

/// `KEY=VAL,...` overrides, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MethodParams(BTreeMap<String, String>);

impl FromStr for MethodParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut map = BTreeMap::new();
        for pair in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = pair.split_once('=').ok_or_else(|| Error::Config(format!("expected KEY=VAL, got {pair:?}")))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Self(map))
    }
}

impl MethodParams {
    /// `k=v;k=v`, or `-` when empty. Semicolons keep it one CSV field.
    pub fn digest(&self) -> String {
        if self.0.is_empty() {
            return "-".into();
        }
        self.0.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
    }

    fn get<T: FromStr>(&self, key: &str, default: T) -> Result<T> {
        match self.0.get(key) {
            None => Ok(default),
            Some(v) => v.parse().map_err(|_| Error::Config(format!("bad value for {key}: {v:?}"))),
        }
    }

    fn check_keys(&self, method: Method) -> Result<()> {
        match self.0.keys().find(|k| !method.keys().contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!("{method} takes no parameter {k:?}"))),
            None => Ok(()),
        }
    }
}

/// A method's result together with the cost traces of its stages.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodRun {
    pub solution: Solution,
    pub cost: f64,
    /// `(stage, costs)`; each is non-increasing by construction.
    pub traces: Vec<(&'static str, Vec<f64>)>,
    pub ga_stats: Option<Vec<GenerationStats>>,
}

fn finished(instance: &Instance, solution: Solution, traces: Vec<(&'static str, Vec<f64>)>) -> MethodRun {
    let cost = solution_cost(instance, &solution);
    MethodRun { solution, cost, traces, ga_stats: None }
}

fn to_fixed_point(instance: &Instance, solution: &Solution) -> Solution {
    transship_until_stable(instance, solution, MAX_TRANSSHIP_PASSES).0
}

fn local_search_start(instance: &Instance, params: &MethodParams, seed: u64) -> Result<(Solution, Vec<f64>)> {
    let start: String = params.get("start", "greedy".to_string())?;
    let base = match start.as_str() {
        "greedy" => greedy_construct(instance)?,
        "multistart" => return Ok((multistart(instance, DEFAULT_STARTS, seed)?, Vec::new())),
        other => return Err(Error::Config(format!("unknown start {other:?}"))),
    };
    Ok(transship_until_stable(instance, &base, MAX_TRANSSHIP_PASSES))
}

fn strategy(params: &MethodParams) -> Result<Strategy> {
    match params.get("strategy", "first".to_string())?.as_str() {
        "first" => Ok(Strategy::First),
        "best" => Ok(Strategy::Best),
        other => Err(Error::Config(format!("unknown strategy {other:?}"))),
    }
}

pub fn run_method(instance: &Instance, method: Method, seed: u64, params: &MethodParams) -> Result<MethodRun> {
    params.check_keys(method)?;
    let run = match method {
        Method::Greedy | Method::ClarkeWright => {
            let base = if method == Method::Greedy { greedy_construct(instance)? } else { clarke_wright(instance)? };
            let (sol, trace) = transship_until_stable(instance, &base, MAX_TRANSSHIP_PASSES);
            finished(instance, sol, vec![("transship", trace)])
        }
        Method::Multistart => finished(instance, multistart(instance, params.get("starts", DEFAULT_STARTS)?, seed)?, vec![]),
        Method::GraspGreedy | Method::GraspMultistart => {
            let defaults = GraspParams::default();
            let gp = GraspParams {
                alpha: params.get("alpha", defaults.alpha)?,
                iterations: params.get("iterations", defaults.iterations)?,
                seed,
            };
            let out = if method == Method::GraspGreedy {
                grasp_run(instance, &gp, Some(&transship_improve))?
            } else {
                grasp_run(instance, &gp, Some(&to_fixed_point))?
            };
            finished(instance, out.solution, vec![("grasp", out.trace)])
        }
        Method::Vnd | Method::Alns | Method::Sa | Method::Mix => {
            let (start, pre) = local_search_start(instance, params, seed)?;
            let (out, stage) = match method {
                Method::Vnd => (vnd(instance, &start, strategy(params)?), "vnd"),
                Method::Alns => {
                    let mut ap = AlnsParams::for_instance(instance, seed);
                    ap.iterations = params.get("iterations", ap.iterations)?;
                    (alns(instance, &start, &ap)?, "alns")
                }
                Method::Sa => {
                    let mut sched = SaSchedule::for_cost(solution_cost(instance, &start), seed);
                    sched.iterations = params.get("iterations", sched.iterations)?;
                    sched.gamma = params.get("gamma", sched.gamma)?;
                    (simulated_annealing(instance, &start, &sched)?, "sa")
                }
                _ => {
                    let mut mp = MixParams::for_instance(instance, seed);
                    mp.alns.iterations = params.get("iterations", mp.alns.iterations)?;
                    mp.batch = params.get("batch", mp.batch)?;
                    mp.strategy = strategy(params)?;
                    (mix_vnd_alns(instance, &start, &mp)?, "mix")
                }
            };
            finished(instance, out.solution, vec![("transship", pre), (stage, out.trace)])
        }
        _ => {
            let (ga_method, init) = match method {
                Method::GaSaRandom => (GaMethod::SaHybrid, GaInit::Random),
                Method::GaSaConstructive => (GaMethod::SaHybrid, GaInit::Constructive),
                Method::GaTabooRandom => (GaMethod::TabooHybrid, GaInit::Random),
                _ => (GaMethod::TabooHybrid, GaInit::Constructive),
            };
            let mut gp = GaParams::new(ga_method, init, seed);
            gp.population = params.get("population", gp.population)?;
            gp.max_generations = params.get("generations", gp.max_generations)?;
            gp.mutation = params.get("mutation", gp.mutation)?;
            let out = run_ga(instance, &gp)?;
            MethodRun { solution: out.solution, cost: out.cost, traces: vec![("ga", out.trace)], ga_stats: Some(out.stats) }
        }
    };
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::micro_instance;
    use pdpt_core::check_feasibility;

    #[test]
    fn ids_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.id().parse::<Method>().unwrap(), m);
        }
        assert!("tabu".parse::<Method>().is_err());
        let groups = Method::ALL.iter().map(|m| [m.is_constructive(), m.is_local_search(), m.is_genetic()]);
        assert!(groups.into_iter().all(|g| g.iter().filter(|&&b| b).count() == 1));
    }

    #[test]
    fn params_digest_and_validation() {
        let p: MethodParams = "iterations=5, alpha=0.5".parse().unwrap();
        assert_eq!(p.digest(), "alpha=0.5;iterations=5");
        assert_eq!(MethodParams::default().digest(), "-");
        assert!("alpha".parse::<MethodParams>().is_err());
        let inst = micro_instance(0);
        assert!(run_method(&inst, Method::Greedy, 0, &p).is_err());
        let bad: MethodParams = "alpha=x".parse().unwrap();
        assert!(run_method(&inst, Method::GraspGreedy, 0, &bad).is_err());
    }

    #[test]
    fn every_method_is_feasible_on_micro_instances() {
        let small: MethodParams = "population=16,generations=10".parse().unwrap();
        for seed in 0..5 {
            let inst = micro_instance(seed);
            for m in Method::ALL {
                let params = if m.is_genetic() { small.clone() } else { MethodParams::default() };
                let run = run_method(&inst, m, seed, &params).unwrap();
                assert!(check_feasibility(&inst, &run.solution).feasible, "{m}");
                assert_eq!(run.cost, solution_cost(&inst, &run.solution));
                for (_, t) in &run.traces {
                    assert!(t.windows(2).all(|w| w[1] <= w[0] + 1e-9));
                }
            }
        }
    }
}
