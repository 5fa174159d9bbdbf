//! Benchmark matrix: instances x methods x seeds, one audited record per run.

use std::fmt::Write;
use std::time::Instant;

use pdpt_core::{check_feasibility, solution_cost, Instance};
use rayon::prelude::*;

use crate::augment::{build_instance, instance_size, AugmentationConfig};
use crate::error::{Error, Result};
use crate::lilim::RawPdptwFile;
use crate::methods::{run_method, Method, MethodParams, MethodRun};

pub const CSV_HEADER: &str = "instance,size,vehicles,method,cost,time_s,seed,params,status";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// The instance could not be built from the file and config.
    ConfigError,
    /// No feasible solution was produced.
    NoFeasible,
    /// The solver returned a solution the checker rejects.
    AuditFailed,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::ConfigError => "config_error",
            Status::NoFeasible => "no_feasible",
            Status::AuditFailed => "audit_failed",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub instance: String,
    pub size: usize,
    pub vehicles: usize,
    pub method: Method,
    /// NaN unless the status is `Ok`.
    pub cost: f64,
    pub time_s: f64,
    pub seed: u64,
    pub params: String,
    pub status: Status,
}

impl RunRecord {
    pub fn csv_row(&self) -> String {
        let cost = if self.status == Status::Ok { format!("{:.6}", self.cost) } else { String::new() };
        format!(
            "{},{},{},{},{},{:.6},{},{},{}",
            self.instance,
            self.size,
            self.vehicles,
            self.method,
            cost,
            self.time_s,
            self.seed,
            self.params,
            self.status.as_str()
        )
    }
}

/// Runs `method` and times it, then re-checks the result. A solution the
/// checker rejects, or whose cost does not match, is never reported.
pub fn audited_run(
    instance: &Instance,
    method: Method,
    seed: u64,
    params: &MethodParams,
) -> (Status, Result<MethodRun>, f64) {
    let started = Instant::now();
    let result = run_method(instance, method, seed, params);
    let time_s = started.elapsed().as_secs_f64();
    let status = match &result {
        Ok(run) => {
            let report = check_feasibility(instance, &run.solution);
            let cost_ok = (solution_cost(instance, &run.solution) - run.cost).abs() <= 1e-6;
            if report.feasible && cost_ok {
                Status::Ok
            } else {
                Status::AuditFailed
            }
        }
        Err(Error::Config(_)) => Status::ConfigError,
        Err(_) => Status::NoFeasible,
    };
    (status, result, time_s)
}

#[derive(Debug, Clone)]
pub struct BenchInstance {
    pub name: String,
    pub raw: RawPdptwFile,
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub instances: Vec<BenchInstance>,
    pub methods: Vec<Method>,
    pub seeds: Vec<u64>,
    /// Augmentation; its seed is replaced by each run's seed, so every
    /// method sees the same instance for a given seed.
    pub augmentation: AugmentationConfig,
    pub params: MethodParams,
    pub workers: usize,
}

fn run_cell(inst: &BenchInstance, method: Method, seed: u64, cfg: &BenchConfig) -> RunRecord {
    let aug = AugmentationConfig { seed, ..cfg.augmentation };
    let mut record = RunRecord {
        instance: inst.name.clone(),
        size: 0,
        vehicles: 0,
        method,
        cost: f64::NAN,
        time_s: 0.0,
        seed,
        params: cfg.params.digest(),
        status: Status::ConfigError,
    };
    let Ok(instance) = build_instance(&inst.raw, &aug) else { return record };
    record.size = instance_size(&instance);
    record.vehicles = instance.num_vehicles();
    let (status, run, time_s) = audited_run(&instance, method, seed, &cfg.params);
    record.status = status;
    record.time_s = time_s;
    if status == Status::Ok {
        record.cost = run.map_or(f64::NAN, |r| r.cost);
    }
    record
}

/// Every (instance, method, seed) cell, sorted by that key. Cells run on
/// `workers` threads; the order of the result does not depend on it.
pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<RunRecord>> {
    let mut cells = Vec::new();
    for inst in &cfg.instances {
        for &method in &cfg.methods {
            for &seed in &cfg.seeds {
                cells.push((inst, method, seed));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let mut records: Vec<RunRecord> =
        pool.install(|| cells.par_iter().map(|&(inst, m, seed)| run_cell(inst, m, seed, cfg)).collect());
    records.sort_by(|a, b| (&a.instance, a.method, a.seed).cmp(&(&b.instance, b.method, b.seed)));
    Ok(records)
}

pub fn records_csv(records: &[RunRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        out += &r.csv_row();
        out.push('\n');
    }
    out
}

/// Whitespace-separated `size cost time method`, successful runs only.
pub fn plot_data(records: &[RunRecord]) -> String {
    let mut out = String::from("# size cost time method\n");
    for r in records.iter().filter(|r| r.status == Status::Ok) {
        let _ = writeln!(out, "{} {:.6} {:.6} {}", r.size, r.cost, r.time_s, r.method);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub instance: String,
    pub method: Method,
    pub runs: usize,
    pub failures: usize,
    pub mean_cost: f64,
    /// Sample standard deviation; 0 for a single run.
    pub std_cost: f64,
    pub mean_time: f64,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Mean and standard deviation of cost per (instance, method), in record
/// order.
pub fn summarize(records: &[RunRecord]) -> Vec<Summary> {
    let mut out: Vec<Summary> = Vec::new();
    let mut start = 0;
    while start < records.len() {
        let key = (&records[start].instance, records[start].method);
        let end = start + records[start..].iter().take_while(|r| (&r.instance, r.method) == key).count();
        let group = &records[start..end];
        let ok: Vec<&RunRecord> = group.iter().filter(|r| r.status == Status::Ok).collect();
        let costs: Vec<f64> = ok.iter().map(|r| r.cost).collect();
        let times: Vec<f64> = ok.iter().map(|r| r.time_s).collect();
        let (mean_cost, std_cost) = mean_std(&costs);
        out.push(Summary {
            instance: key.0.clone(),
            method: key.1,
            runs: group.len(),
            failures: group.len() - ok.len(),
            mean_cost,
            std_cost,
            mean_time: mean_std(&times).0,
        });
        start = end;
    }
    out
}

pub fn summary_table(summaries: &[Summary]) -> String {
    let mut out = format!("{:<12} {:<16} {:>5} {:>22} {:>10}\n", "instance", "method", "runs", "cost (mean ± std)", "time_s");
    for s in summaries {
        let fail = if s.failures > 0 { format!(" ({} failed)", s.failures) } else { String::new() };
        let _ = writeln!(
            out,
            "{:<12} {:<16} {:>5} {:>12.2} ± {:<7.2} {:>10.3}{}",
            s.instance, s.method, s.runs, s.mean_cost, s.std_cost, s.mean_time, fail
        );
    }
    out
}
