//! `pdpt solve | bench | generate`.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use pdpt_core::propagate_schedule;

use crate::augment::{build_instance, instance_size, AugmentationConfig, DepotMode, TransferCount, VehicleCount};
use crate::bench::{audited_run, plot_data, records_csv, run_bench, summarize, summary_table, BenchConfig, BenchInstance, RunRecord, Status, CSV_HEADER};
use crate::error::{Error, Result};
use crate::generate::{lilim_like, stand_in};
use crate::lilim::{parse_lilim, print_lilim, RawPdptwFile};
use crate::methods::{Method, MethodParams};
use crate::solution_io::write_solution;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NO_FEASIBLE: i32 = 3;
pub const EXIT_AUDIT: i32 = 4;

/// Env var naming the directory searched for relative instance paths.
pub const DATA_DIR_VAR: &str = "PDPT_DATA_DIR";

#[derive(Debug, Parser)]
#[command(name = "pdpt", version, about = "Pickup and delivery with transfers: solvers and benchmark")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve one instance with one method.
    Solve(SolveArgs),
    /// Run instances x methods x seeds and write CSV and plot data.
    Bench(BenchArgs),
    /// Write a generated stand-in benchmark file (lc204, LC2_8_5).
    Generate(GenerateArgs),
}

#[derive(Debug, Args)]
pub struct InstanceArgs {
    /// Number of transfer points, or `random`.
    #[arg(long, default_value = "random")]
    pub transfers: TransferCount,
    /// Fleet size: a number, `file` or `random`.
    #[arg(long, default_value = "file")]
    pub vehicles: VehicleCount,
    /// `shared` or `scattered`.
    #[arg(long, default_value = "shared")]
    pub depots: DepotMode,
    /// Method parameters, `KEY=VAL,...`.
    #[arg(long, default_value = "")]
    pub params: MethodParams,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Li & Lim file, or the name of a generated stand-in.
    #[arg(long)]
    pub instance: String,
    #[arg(long)]
    pub method: Method,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Where to write the solution file.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub common: InstanceArgs,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Repeatable.
    #[arg(long, required = true)]
    pub instance: Vec<String>,
    /// Repeatable; all methods when omitted.
    #[arg(long)]
    pub method: Vec<Method>,
    /// Inclusive seed range `A..B`.
    #[arg(long, default_value = "0..9")]
    pub seeds: SeedRange,
    /// Output prefix: writes `<out>.csv` and `<out>.plot`.
    #[arg(long, default_value = "bench")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    #[command(flatten)]
    pub common: InstanceArgs,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub name: String,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedRange(pub u64, pub u64);

impl std::str::FromStr for SeedRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("seed range {s:?}, expected A..B"));
        let (a, b) = s.split_once("..").ok_or_else(bad)?;
        let (a, b): (u64, u64) = (a.parse().map_err(|_| bad())?, b.parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        Ok(SeedRange(a, b))
    }
}

impl SeedRange {
    pub fn seeds(self) -> Vec<u64> {
        (self.0..=self.1).collect()
    }
}

/// Reads `spec` as a path, then relative to `$PDPT_DATA_DIR`, then as the
/// name of a generated stand-in. Returns a display name and the file.
pub fn load_instance(spec: &str) -> Result<(String, RawPdptwFile)> {
    let mut candidates = vec![PathBuf::from(spec)];
    if let Some(dir) = std::env::var_os(DATA_DIR_VAR) {
        candidates.push(Path::new(&dir).join(spec));
    }
    for path in candidates {
        if path.is_file() {
            let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
            let name = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
            return Ok((name, parse_lilim(&text)?));
        }
    }
    let stem = spec.trim_end_matches(".txt");
    match stand_in(stem) {
        Some(s) => Ok((s.name.to_string(), lilim_like(&s))),
        None => Err(Error::Config(format!("no instance file or stand-in named {spec:?}"))),
    }
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Core(
            pdpt_core::Error::NoFeasibleInsertion { .. }
            | pdpt_core::Error::NoFeasible
            | pdpt_core::Error::InsufficientFleet { .. }
            | pdpt_core::Error::GaNoFeasible { .. },
        ) => EXIT_NO_FEASIBLE,
        Error::Io { .. } => 1,
        _ => EXIT_CONFIG,
    }
}

fn solve(args: &SolveArgs) -> Result<i32> {
    let (name, raw) = load_instance(&args.instance)?;
    let cfg = AugmentationConfig {
        transfers: args.common.transfers,
        vehicles: args.common.vehicles,
        depots: args.common.depots,
        seed: args.seed,
    };
    let instance = build_instance(&raw, &cfg)?;
    let params = &args.common.params;
    let (status, run, time_s) = audited_run(&instance, args.method, args.seed, params);
    let run = run?;
    if status == Status::AuditFailed {
        eprintln!("error: {} produced a solution that fails the feasibility audit", args.method);
        return Ok(EXIT_AUDIT);
    }
    let record = RunRecord {
        instance: name,
        size: instance_size(&instance),
        vehicles: instance.num_vehicles(),
        method: args.method,
        cost: run.cost,
        time_s,
        seed: args.seed,
        params: params.digest(),
        status,
    };
    if let Some(out) = &args.out {
        let schedule = propagate_schedule(&instance, &run.solution)?;
        write_file(out, &write_solution(&run.solution, Some(&schedule), run.cost))?;
    }
    println!("{CSV_HEADER}\n{}", record.csv_row());
    Ok(0)
}

fn bench(args: &BenchArgs) -> Result<i32> {
    let instances = args
        .instance
        .iter()
        .map(|spec| load_instance(spec).map(|(name, raw)| BenchInstance { name, raw }))
        .collect::<Result<Vec<_>>>()?;
    let methods = if args.method.is_empty() { Method::ALL.to_vec() } else { args.method.clone() };
    let cfg = BenchConfig {
        instances,
        methods,
        seeds: args.seeds.seeds(),
        augmentation: AugmentationConfig {
            transfers: args.common.transfers,
            vehicles: args.common.vehicles,
            depots: args.common.depots,
            seed: 0,
        },
        params: args.common.params.clone(),
        workers: args.workers,
    };
    let records = run_bench(&cfg)?;
    let prefix = args.out.to_string_lossy();
    write_file(Path::new(&format!("{prefix}.csv")), &records_csv(&records))?;
    write_file(Path::new(&format!("{prefix}.plot")), &plot_data(&records))?;
    print!("{}", summary_table(&summarize(&records)));
    Ok(if records.iter().any(|r| r.status == Status::AuditFailed) { EXIT_AUDIT } else { 0 })
}

fn generate(args: &GenerateArgs) -> Result<i32> {
    let spec = stand_in(&args.name).ok_or_else(|| Error::Config(format!("no stand-in named {:?}", args.name)))?;
    write_file(&args.out, &print_lilim(&lilim_like(&spec)))?;
    Ok(0)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { 0 };
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Bench(a) => bench(a),
        Command::Generate(a) => generate(a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
