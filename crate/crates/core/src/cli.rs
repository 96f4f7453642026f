//! The `reconf` command line.
//!
//! Exit codes: 0 success, 1 I/O or other failure, 2 invalid input, 3 no
//! feasible topology or failed power flow, 4 verification mismatch.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::graph::{
    cycle_edges, enumerate_all_cycles, fundamental_cycle_basis, to_dot, GraphError,
};
use crate::network::{baseline_topology, load_network, Network, NetworkError, Topology};
use crate::oracle::{exhaustive_optimum_with, OracleError};
use crate::power_flow::{solve_power_flow_with, PfError, PfOptions};
use crate::reconfiguration::{
    build_instance, report, solve, write_csv, ModelKind, ReconfError, SolveOptions, SolveResult,
};

/// Objective tolerance for `--verify`.
pub const VERIFY_TOL: f64 = 1e-8;

#[derive(Debug, Parser)]
#[command(
    name = "reconf",
    version,
    about = "Loss-minimal radial reconfiguration"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cycle basis, cycle-edges and bridges of a network.
    Cycles(CyclesArgs),
    /// Power flow for one topology (baseline by default).
    Pf(PfArgs),
    /// Optimal radial topology under one or both formulations.
    Solve(SolveArgs),
}

#[derive(Debug, Args)]
pub struct CyclesArgs {
    pub network: PathBuf,
    /// List every cycle, not just the basis.
    #[arg(long)]
    pub all: bool,
    /// Write a Graphviz rendering with cycle-edges highlighted.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PfArgs {
    pub network: PathBuf,
    /// JSON file `{"closed": [line ids]}`.
    #[arg(long)]
    pub topology: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub network: PathBuf,
    /// `cdsr`, `rrdsr` or `cdsr,rrdsr`.
    #[arg(long, value_delimiter = ',', default_value = "cdsr")]
    pub model: Vec<ModelKind>,
    /// Seconds.
    #[arg(long, default_value_t = 900.0)]
    pub time_limit: f64,
    /// CSV report path; printed to stdout when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// JSON dump of the full results.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Cross-check against exhaustive enumeration.
    #[arg(long)]
    pub verify: bool,
    /// Graphviz rendering of the first model's topology, energized lines highlighted.
    #[arg(long)]
    pub dot: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Network(#[from] NetworkError),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    Graph(#[from] GraphError),
    #[error("power flow failed: {0}")]
    PowerFlow(#[from] PfError),
    #[error("{0}")]
    Reconf(ReconfError),
    #[error("oracle: {0}")]
    Oracle(#[from] OracleError),
    #[error("verification failed: {0}")]
    Verify(String),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Csv(#[from] csv::Error),
}

impl From<ReconfError> for CliError {
    fn from(e: ReconfError) -> Self {
        match e {
            ReconfError::Graph(g) => CliError::Graph(g),
            other => CliError::Reconf(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Network(NetworkError::Io { .. }) => 1,
            CliError::Network(_) | CliError::Invalid(_) => 2,
            CliError::PowerFlow(_) | CliError::Reconf(_) => 3,
            CliError::Oracle(OracleError::AllInfeasible) => 3,
            CliError::Verify(_) => 4,
            _ => 1,
        }
    }
}

pub fn main() -> ExitCode {
    let config = RunConfig::parse();
    let stdout = io::stdout();
    match run(&config, &mut stdout.lock()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

pub fn run(config: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    match &config.command {
        Command::Cycles(args) => cmd_cycles(args, out),
        Command::Pf(args) => cmd_pf(args, out),
        Command::Solve(args) => cmd_solve(args, out),
    }
}

/// Newton settings, overridable through `RECONF_TOL` and `RECONF_MAX_ITER`.
pub fn pf_options_from_env() -> Result<PfOptions, CliError> {
    let mut opts = PfOptions::default();
    if let Ok(v) = std::env::var("RECONF_TOL") {
        opts.tol = v
            .parse()
            .ok()
            .filter(|t: &f64| t.is_finite() && *t > 0.0)
            .ok_or_else(|| CliError::Invalid(format!("RECONF_TOL: bad value `{v}`")))?;
    }
    if let Ok(v) = std::env::var("RECONF_MAX_ITER") {
        opts.max_iter = v
            .parse()
            .map_err(|_| CliError::Invalid(format!("RECONF_MAX_ITER: bad value `{v}`")))?;
    }
    Ok(opts)
}

fn check_input(path: &Path) -> Result<(), CliError> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Invalid(format!(
            "{}: no such file",
            path.display()
        )))
    }
}

pub fn cmd_cycles(args: &CyclesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_input(&args.network)?;
    let n = load_network(&args.network)?;
    let g = n.graph();
    let basis = fundamental_cycle_basis(g)?;
    let ce = cycle_edges(&basis);
    let bridges = ce.complement();
    let cycles = enumerate_all_cycles(g)?;

    writeln!(
        out,
        "{}: |V|={}, |E|={}",
        n.name,
        g.vertex_count(),
        g.edge_count()
    )?;
    writeln!(
        out,
        "β={}, cycles: {}, cycle-edges: {}, bridges: {}",
        basis.len(),
        cycles.len(),
        ce.len(),
        bridges.len()
    )?;
    writeln!(out, "basis:")?;
    for (c, chord) in basis.cycles.iter().zip(&basis.chord_of) {
        writeln!(out, "  chord {}: {}", chord.0, c.edges())?;
    }
    if args.all {
        writeln!(out, "cycles:")?;
        for c in &cycles {
            writeln!(out, "  {}", c.edges())?;
        }
    }
    writeln!(out, "cycle-edges: {ce}")?;
    writeln!(out, "bridges: {bridges}")?;
    if let Some(path) = &args.dot {
        fs::write(path, to_dot(g, &n.name, Some(&ce)))?;
    }
    Ok(())
}

pub fn cmd_pf(args: &PfArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_input(&args.network)?;
    let n = load_network(&args.network)?;
    let topology = match &args.topology {
        Some(path) => {
            check_input(path)?;
            Topology::from_json(&n, &fs::read_to_string(path)?)?
        }
        None => baseline_topology(&n),
    };
    let sol = solve_power_flow_with(&n, &topology, &pf_options_from_env()?)?;
    let json = serde_json::to_string_pretty(&sol).expect("solution serializes");
    match &args.out {
        Some(path) => fs::write(path, json + "\n")?,
        None => writeln!(out, "{json}")?,
    }
    Ok(())
}

pub fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    check_input(&args.network)?;
    if !(args.time_limit.is_finite() && args.time_limit >= 0.0) {
        return Err(CliError::Invalid(format!(
            "bad time limit {}",
            args.time_limit
        )));
    }
    let n = load_network(&args.network)?;
    let opts = SolveOptions {
        time_limit: Duration::from_secs_f64(args.time_limit),
        pf: pf_options_from_env()?,
    };
    let base = baseline_topology(&n);
    let baseline = solve_power_flow_with(&n, &base, &opts.pf)?;

    let mut results = Vec::with_capacity(args.model.len());
    for &kind in &args.model {
        let inst = build_instance(&n, kind)?;
        results.push(solve(&inst, &base, &opts)?);
    }
    let rows: Vec<_> = results.iter().map(|r| report(r, &baseline)).collect();

    match &args.report {
        Some(path) => {
            write_csv(&rows, fs::File::create(path)?)?;
            for r in &rows {
                writeln!(
                    out,
                    "{} {}: f={:.10} p_loss={:.10} Δp_loss={:.4}% leaves={} optimal={}",
                    r.case, r.model, r.f, r.p_loss, r.delta_loss_pct, r.leaves, r.proven_optimal
                )?;
            }
        }
        None => write_csv(&rows, &mut *out)?,
    }
    if let Some(path) = &args.json {
        let json = serde_json::to_string_pretty(&results).expect("results serialize");
        fs::write(path, json + "\n")?;
    }
    if let (Some(path), Some(first)) = (&args.dot, results.first()) {
        let (g, active) = n.to_graph(&first.best);
        fs::write(path, to_dot(g, &n.name, Some(&active)))?;
    }
    if args.verify {
        verify(&n, &results, &opts.pf)?;
        writeln!(out, "verify: ok")?;
    }
    Ok(())
}

fn verify(n: &Network, results: &[SolveResult], pf: &PfOptions) -> Result<(), CliError> {
    let oracle = exhaustive_optimum_with(n, pf)?;
    for r in results {
        if !r.proven_optimal {
            return Err(CliError::Verify(format!(
                "{} did not finish within the time limit",
                r.model
            )));
        }
        if (r.f_obj - oracle.optimum_f).abs() > VERIFY_TOL {
            return Err(CliError::Verify(format!(
                "{} objective {} differs from exhaustive optimum {}",
                r.model, r.f_obj, oracle.optimum_f
            )));
        }
        if r.best != oracle.optimum_topology {
            return Err(CliError::Verify(format!(
                "{} topology {} differs from exhaustive optimum {}",
                r.model,
                r.best.closed(),
                oracle.optimum_topology.closed()
            )));
        }
    }
    Ok(())
}
