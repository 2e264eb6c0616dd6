//! Command-line front end: `bound`, `exact`, `sweep`, `export`, `validate`.
//!
//! Exit codes: 0 success, 2 configuration error, 3 solver failure.

pub mod config;
pub mod record;

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::{BudgetConfig, BudgetPreset, Config, ConfigError, ModelConfig, SweepAxis, SweepValue};
pub use record::{sweep_row, ExactRecord, IntervalRecord, RunRecord, SWEEP_COLUMNS};

use crate::oracle::{extrema_over, steady_state_dense, OracleError};
use crate::relax::{assemble, export_sdpa, RelaxError};
use crate::solver::certify_interval;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    Config(ConfigError),
    Solver(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e}"),
            CliError::Solver(m) => write!(f, "solver failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

fn config_error(message: impl Into<String>) -> CliError {
    CliError::Config(ConfigError {
        line: None,
        message: message.into(),
    })
}

impl From<RelaxError> for CliError {
    fn from(e: RelaxError) -> Self {
        config_error(e.to_string())
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge { .. }
            | OracleError::SiteMismatch { .. }
            | OracleError::NonHermitianObservable(_) => config_error(e.to_string()),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(
    name = "ssbound",
    version,
    about = "Certified bounds on steady-state observables of Lindblad models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Certify an interval for the observable.
    Bound(Common),
    /// Exact steady-state extrema from the dense Liouvillian.
    Exact(Common),
    /// Certify intervals along the config's `[sweep]` axis; writes CSV.
    Sweep(Common),
    /// Write the assembled problem as sparse SDPA plus a variable map.
    Export {
        #[command(flatten)]
        common: Common,
        /// Destination `.dat-s` file (default: `<out>/problem.dat-s`).
        path: Option<PathBuf>,
    },
    /// Check a config without solving.
    Validate(Common),
}

#[derive(Args, Debug)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["set1", "set2", "set3"])]
    budget_preset: Option<String>,
    #[arg(long)]
    no_safety_net: bool,
    #[arg(long)]
    solver_tol: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<Config, CliError> {
        let text =
            fs::read_to_string(&self.config).map_err(|e| CliError::Io(format!("{}: {e}", self.config.display())))?;
        let mut cfg = Config::parse(&text).map_err(CliError::Config)?;
        if let Some(name) = &self.budget_preset {
            BudgetPreset::parse(name)
                .expect("validated by clap")
                .apply(&mut cfg.budget);
        }
        if self.no_safety_net {
            cfg.budget.safety_net = false;
        }
        if let Some(tol) = self.solver_tol {
            if !(tol > 0.0 && tol.is_finite()) {
                return Err(config_error("--solver-tol must be positive"));
            }
            cfg.solver.tolerance = tol;
            cfg.solver.near_tolerance = cfg.solver.near_tolerance.max(tol);
        }
        // Overrides are validated like the file itself.
        Config::parse(&cfg.to_toml()).map_err(CliError::Config)
    }
}

/// Certify an interval for the configured observable.
pub fn cmd_bound(cfg: &Config) -> Result<RunRecord, CliError> {
    let model = cfg.build_model().map_err(|e| config_error(e.to_string()))?;
    let observable = cfg.build_observable().map_err(config_error)?;
    let (problem, interval) = certify_interval(&model, &observable, &cfg.assemble_options(), &cfg.solver_settings())?;
    let mut record = RunRecord::new("bound", cfg);
    record.interval = Some(IntervalRecord::new(&problem, &interval, cfg));
    if !interval.is_solved() {
        record.error = Some(format!("lb {}, ub {}", interval.lb.status, interval.ub.status));
    }
    Ok(record)
}

/// Exact extrema over the dense steady-state set.
pub fn cmd_exact(cfg: &Config) -> Result<RunRecord, CliError> {
    let model = cfg.build_model().map_err(|e| config_error(e.to_string()))?;
    let observable = cfg.build_observable().map_err(config_error)?;
    let ss = steady_state_dense(&model)?;
    let (min, max) = extrema_over(&ss, &observable)?;
    let mut record = RunRecord::new("exact", cfg);
    record.exact = Some(ExactRecord {
        min,
        max,
        degeneracy: ss.dimension(),
        residual: ss.residual,
    });
    Ok(record)
}

/// One record per sweep point; failures are recorded and the sweep continues.
pub fn cmd_sweep(cfg: &Config) -> Result<(Vec<RunRecord>, String), CliError> {
    let sweep = cfg
        .sweep
        .clone()
        .ok_or_else(|| config_error("config has no [sweep] table"))?;
    if sweep.values.is_empty() {
        return Err(config_error("sweep axis has no values"));
    }
    let workers = match sweep.workers {
        0 => std::thread::available_parallelism().map_or(1, |n| n.get()),
        w => w,
    }
    .min(sweep.values.len());
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<(RunRecord, f64)>>> = Mutex::new(vec![None; sweep.values.len()]);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(value) = sweep.values.get(k) else { break };
                let mut point = cfg.clone();
                point.sweep = None;
                let start = Instant::now();
                let record = match point.apply_axis(sweep.axis, value) {
                    Ok(()) => cmd_bound(&point).unwrap_or_else(|e| {
                        let mut r = RunRecord::new("bound", &point);
                        r.error = Some(e.to_string());
                        r
                    }),
                    Err(m) => {
                        let mut r = RunRecord::new("bound", &point);
                        r.error = Some(m);
                        r
                    }
                };
                let elapsed = start.elapsed().as_secs_f64();
                results.lock().expect("results lock")[k] = Some((record, elapsed));
            });
        }
    });
    let results: Vec<(RunRecord, f64)> = results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .map(|r| r.expect("every point ran"))
        .collect();
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_COLUMNS).map_err(|e| CliError::Io(e.to_string()))?;
    for ((record, time), value) in results.iter().zip(&sweep.values) {
        w.write_record(sweep_row(sweep.axis.name(), &value.to_string(), record, *time))
            .map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    let csv = String::from_utf8(bytes).expect("csv is utf-8");
    Ok((results.into_iter().map(|(r, _)| r).collect(), csv))
}

/// Assemble and write the SDPA file and its sidecar; returns the sidecar path.
pub fn cmd_export(cfg: &Config, path: &Path) -> Result<PathBuf, CliError> {
    let model = cfg.build_model().map_err(|e| config_error(e.to_string()))?;
    let observable = cfg.build_observable().map_err(config_error)?;
    let problem = assemble(&model, &observable, &cfg.assemble_options())?;
    export_sdpa(&problem, path).map_err(|e| CliError::Io(e.to_string()))
}

fn write_out(out: Option<&Path>, name: &str, text: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            let path = dir.join(name);
            fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn summarize(record: &RunRecord) {
    if let Some(iv) = &record.interval {
        match (iv.lb.value, iv.ub.value, iv.relative_width) {
            (Some(lb), Some(ub), Some(rel)) => eprintln!(
                "interval [{lb:.6}, {ub:.6}] width {:.6} ({:.2}% of trivial range)",
                ub - lb,
                100.0 * rel
            ),
            _ => eprintln!("bounds not certified: lb {}, ub {}", iv.lb.status, iv.ub.status),
        }
    }
    if let Some(ex) = &record.exact {
        eprintln!(
            "exact [{:.9}, {:.9}] steady-state dimension {}",
            ex.min, ex.max, ex.degeneracy
        );
    }
}

fn dispatch(command: Command) -> Result<i32, CliError> {
    match command {
        Command::Bound(c) => {
            let cfg = c.load()?;
            let record = cmd_bound(&cfg)?;
            summarize(&record);
            write_out(c.out.as_deref(), "bound.json", &record.to_json())?;
            Ok(if record.error.is_some() { EXIT_SOLVER } else { EXIT_OK })
        }
        Command::Exact(c) => {
            let cfg = c.load()?;
            let record = cmd_exact(&cfg)?;
            summarize(&record);
            write_out(c.out.as_deref(), "exact.json", &record.to_json())?;
            Ok(EXIT_OK)
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let (records, csv) = cmd_sweep(&cfg)?;
            let failed = records.iter().filter(|r| r.error.is_some()).count();
            let negative = records
                .iter()
                .all(|r| r.interval.as_ref().and_then(|i| i.sign.as_deref()) == Some("negative"));
            if negative {
                eprintln!("sign certified negative at every point");
            }
            if failed > 0 {
                eprintln!("{failed} of {} points failed", records.len());
            }
            if c.out.is_some() {
                let json = serde_json::to_string_pretty(&records).expect("records serialize");
                write_out(c.out.as_deref(), "sweep.json", &json)?;
            }
            write_out(c.out.as_deref(), "sweep.csv", csv.trim_end())?;
            Ok(if failed > 0 { EXIT_SOLVER } else { EXIT_OK })
        }
        Command::Export { common, path } => {
            let cfg = common.load()?;
            let path = match (path, &common.out) {
                (Some(p), _) => p,
                (None, Some(dir)) => {
                    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
                    dir.join("problem.dat-s")
                }
                (None, None) => return Err(config_error("export needs a destination path or --out")),
            };
            let side = cmd_export(&cfg, &path)?;
            eprintln!("wrote {} and {}", path.display(), side.display());
            Ok(EXIT_OK)
        }
        Command::Validate(c) => {
            let cfg = c.load()?;
            eprintln!(
                "ok: {} on {} sites, observable {}",
                cfg.model_name(),
                cfg.num_sites(),
                cfg.observable_text()
            );
            Ok(EXIT_OK)
        }
    }
}

/// Run the command line and return the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{e}");
            e.exit_code()
        }
    }
}
