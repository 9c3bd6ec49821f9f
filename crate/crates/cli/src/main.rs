//! `dermkt`: wholesale market outcomes under DER integration models.
//!
//! Subcommands: `validate` a scenario file, `solve` one dispatch model,
//! `sweep` prosumer capacity over a grid and emit CSV, and `gen-random` for
//! seeded test scenarios. Exit codes: 0 success, 1 input error, 2 solver
//! non-convergence.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use dermkt::output::to_rounded_json;
use dermkt::scenario_io::{load_scenario, to_json_string, ScenarioFile};
use dermkt::sweep::{run_sweep, SweepConfig, SweepModel};
use dermkt::CliError;
use dermkt_core::{
    random_scenario, solve, verify_kkt, welfare_decomposition, DispatchModel, DispatchSolution,
    KktReport, Normalization, SolveOptions, WelfareDecomposition,
};

#[derive(Parser)]
#[command(
    name = "dermkt",
    version,
    about = "Wholesale market simulation with DER aggregation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file against the data-model invariants.
    Validate { scenario: PathBuf },
    /// Solve one dispatch model and emit solution, surplus decomposition,
    /// and optimality report as JSON.
    Solve {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value_t = ModelArg::Benchmark)]
        model: ModelArg,
        /// Residual tolerance of the solver and the optimality report.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Output path; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweep every prosumer's capacity over a grid and emit CSV.
    Sweep {
        scenario: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 100.0)]
        to: f64,
        #[arg(long, default_value_t = 51)]
        steps: usize,
        /// Comma-separated: benchmark, no_der, one_part.
        #[arg(long, default_value = "benchmark,no_der,one_part")]
        models: String,
        /// Worker threads; output bytes do not depend on this.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        /// Efficient-cost normalization for the price-of-aggregation column.
        #[arg(long, value_enum, default_value_t = NormArg::Opportunity)]
        normalization: NormArg,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Generate a seeded random scenario that always validates.
    GenRandom {
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        nodes: usize,
        #[arg(long, default_value_t = 1)]
        prosumers: usize,
        #[arg(long, default_value_t = 1)]
        generators: usize,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    Benchmark,
    Aggregation,
    #[value(name = "no_der")]
    NoDer,
}

impl From<ModelArg> for DispatchModel {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Benchmark => DispatchModel::Benchmark,
            ModelArg::Aggregation => DispatchModel::Aggregation,
            ModelArg::NoDer => DispatchModel::NoDer,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum NormArg {
    Opportunity,
    Literal,
}

impl From<NormArg> for Normalization {
    fn from(n: NormArg) -> Self {
        match n {
            NormArg::Opportunity => Normalization::OpportunityCost,
            NormArg::Literal => Normalization::LiteralNegativeWelfare,
        }
    }
}

#[derive(Serialize)]
struct SolveOutput {
    model: &'static str,
    solution: DispatchSolution,
    welfare_decomposition: WelfareDecomposition,
    kkt: KktReport,
}

fn solve_options(tol: f64) -> Result<SolveOptions, CliError> {
    let mut opts = SolveOptions {
        tol,
        ..SolveOptions::default()
    };
    if let Ok(text) = std::env::var("DERMKT_MAX_ITERS") {
        opts.max_coordinate_solves = text.parse().map_err(|_| {
            CliError::Input(format!(
                "DERMKT_MAX_ITERS must be a positive integer, got '{text}'"
            ))
        })?;
    }
    Ok(opts)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write to stdout: {e}"))),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Validate { scenario } => {
            load_scenario(&scenario)?;
            println!("ok");
            Ok(true)
        }
        Command::Solve {
            scenario,
            model,
            tol,
            output,
        } => {
            let scn = load_scenario(&scenario)?;
            let opts = solve_options(tol)?;
            let dispatch_model: DispatchModel = model.into();
            let solution = solve(&scn, dispatch_model, &opts)?;
            let report = verify_kkt(&solution, &scn, dispatch_model, tol);
            let decomposition = welfare_decomposition(&solution, &scn, dispatch_model, None)
                .map_err(|e| CliError::Solver(e.to_string()))?;
            let text = to_rounded_json(&SolveOutput {
                model: match dispatch_model {
                    DispatchModel::Benchmark => "benchmark",
                    DispatchModel::Aggregation => "aggregation",
                    DispatchModel::NoDer => "no_der",
                },
                solution,
                welfare_decomposition: decomposition,
                kkt: report,
            });
            write_out(output.as_deref(), &text)?;
            Ok(report.is_equilibrium)
        }
        Command::Sweep {
            scenario,
            from,
            to,
            steps,
            models,
            jobs,
            tol,
            normalization,
            output,
        } => {
            let scn = load_scenario(&scenario)?;
            let cfg = SweepConfig {
                from,
                to,
                steps,
                models: SweepModel::parse_list(&models)?,
                jobs: jobs.max(1),
                solve: solve_options(tol)?,
                normalization: normalization.into(),
            };
            let csv = run_sweep(&scn, &cfg)?;
            write_out(output.as_deref(), &csv)?;
            Ok(true)
        }
        Command::GenRandom {
            seed,
            nodes,
            prosumers,
            generators,
            output,
        } => {
            if nodes == 0 {
                return Err(CliError::Input("nodes must be at least 1".to_string()));
            }
            let scenario = random_scenario(seed, nodes, prosumers, generators);
            let file = ScenarioFile::from_scenario(&scenario)?;
            write_out(output.as_deref(), &to_json_string(&file))?;
            Ok(true)
        }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match run(cli) {
        Ok(true) => {}
        Ok(false) => std::process::exit(2),
        Err(CliError::Input(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(1);
        }
        Err(CliError::Solver(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
