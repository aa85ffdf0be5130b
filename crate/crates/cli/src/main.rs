//! `clonebench`: verification, optimization, equator scans and 1→n studies
//! for qubit cloning machines.

mod names;
mod output;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use clonebench::optimize::scan::scan_config;
use clonebench::optimize::{Mode, OptimizationConfig, MAX_N_COPIES};

use names::{MachineSpec, SetSpec};
use output::{to_json, Failure, Run, EXIT_OK, EXIT_SELF_CHECK};

const EXIT_CODES: &str = "\
Exit codes:
  0  success; every check held
  1  I/O or other runtime error
  2  usage error: bad flag, unknown set or machine name, value out of range
  3  self-check failed: an identity, oracle cross-check or expected optimum did not hold
  4  time budget exhausted; partial output and manifest were written";

#[derive(Parser, Debug)]
#[command(name = "clonebench", version, about = "Optimal cloning of finite qubit sets", after_help = EXIT_CODES)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate a known machine on a set and check its closed-form identities.
    #[command(after_help = EXIT_CODES)]
    Verify {
        /// pqcm-economic, pqcm-ancilla[:<|a|>], uqcm or nclone:<n>
        #[arg(long)]
        machine: MachineSpec,
        /// trio, bb84, six-state, tetrahedron, equator:<count>, pair:<degrees>,
        /// inline JSON or a .json file
        #[arg(long)]
        set: SetSpec,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Search for the best cloner of a set.
    #[command(after_help = EXIT_CODES)]
    Optimize {
        #[arg(long)]
        set: SetSpec,
        #[command(flatten)]
        search: SearchArgs,
        /// Restrict to machines on the symmetric subspace of the copies.
        #[arg(long)]
        symmetric: bool,
        /// No ancilla (the default unless --ancilla-dim exceeds 1).
        #[arg(long)]
        economic: bool,
        #[arg(long, default_value_t = 1)]
        ancilla_dim: usize,
        /// Number of copies.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, value_enum, default_value_t = ModeArg::Maxmin)]
        mode: ModeArg,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        /// Iteration cap per restart [default: max(4000, 500 per parameter)]
        #[arg(long)]
        max_iters: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Best trio fidelity over a grid of (φ₂, φ₃) with φ₁ = 0.
    #[command(after_help = EXIT_CODES)]
    Scan {
        #[arg(long, default_value_t = 24)]
        resolution: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, value_enum, default_value_t = ModeArg::Equalfid)]
        mode: ModeArg,
        #[arg(long, default_value_t = 40)]
        restarts: usize,
        /// Iteration cap per restart [default: max(4000, 500 per parameter)]
        #[arg(long)]
        max_iters: Option<usize>,
        /// Stop starting new cells after this many seconds (exit 4).
        #[arg(long)]
        budget_secs: Option<f64>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Best symmetric economic 1→n machine for the 120° trio.
    #[command(after_help = EXIT_CODES)]
    Nclone {
        /// Number of copies, 2..=8.
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        search: SearchArgs,
        #[arg(long, default_value_t = 200)]
        restarts: usize,
        /// Iteration cap per restart [default: max(4000, 500 per parameter)]
        #[arg(long)]
        max_iters: Option<usize>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct SearchArgs {
    /// Seed for all random starts.
    #[arg(long, env = "CLONEBENCH_SEED", default_value_t = 0)]
    seed: u64,
    /// Stop a restart once its simplex stops improving by more than this.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Variance weight for --mode equalfid.
    #[arg(long, default_value_t = 100.0)]
    penalty_weight: f64,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Output file; a manifest is written beside it. Prints to stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    /// Smallest fidelity over states and copies.
    Maxmin,
    /// Mean fidelity minus penalty-weight times variance.
    Equalfid,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Maxmin => Mode::MaxMin,
            ModeArg::Equalfid => Mode::EqualFidelityPenalty,
        }
    }
}

impl SearchArgs {
    fn apply(&self, mut cfg: OptimizationConfig, max_iters: Option<usize>) -> OptimizationConfig {
        cfg.seed = self.seed;
        cfg.tol = self.tol;
        cfg.penalty_weight = self.penalty_weight;
        cfg.max_iters = max_iters.unwrap_or_else(|| cfg.scaled_max_iters());
        cfg
    }
}

fn execute(cli: Cli) -> Result<u8, Failure> {
    match cli.command {
        Command::Verify {
            machine,
            set,
            output,
        } => {
            let mut run = Run::new("verify", output.out);
            let report = verify::verify(&machine, &set);
            let body = match output.format.unwrap_or(Format::Json) {
                Format::Json => to_json(&report),
                Format::Csv => report.to_csv(),
            };
            run.emit_primary(&body)?;
            let code = if report.pass {
                EXIT_OK
            } else {
                EXIT_SELF_CHECK
            };
            eprintln!(
                "{} on {}: {}",
                report.machine,
                report.set,
                if report.pass {
                    "all checks hold"
                } else {
                    "check failed"
                }
            );
            let config = serde_json::json!({ "machine": machine.to_string(), "set": set.text });
            run.finish(config, 0, code)
        }
        Command::Optimize {
            set,
            search,
            symmetric,
            economic,
            ancilla_dim,
            n,
            mode,
            restarts,
            max_iters,
            output,
        } => {
            if economic && ancilla_dim != 1 {
                return Err(Failure::usage(
                    "--economic conflicts with --ancilla-dim > 1",
                ));
            }
            let base = OptimizationConfig {
                restarts,
                mode: mode.into(),
                symmetric,
                copies: n,
                ..Default::default()
            }
            .with_ancilla(ancilla_dim);
            let cfg = search.apply(base, max_iters);
            let run = Run::new("optimize", output.out);
            run::run_optimize(&set.set, &cfg, output.format.unwrap_or(Format::Json), run)
        }
        Command::Scan {
            resolution,
            search,
            mode,
            restarts,
            max_iters,
            budget_secs,
            output,
        } => {
            let budget = match budget_secs {
                Some(s) if !(s >= 0.0 && s.is_finite()) => {
                    return Err(Failure::usage("--budget-secs must be a nonnegative number"))
                }
                Some(s) => Some(Duration::from_secs_f64(s)),
                None => None,
            };
            let base = OptimizationConfig {
                restarts,
                mode: mode.into(),
                ..scan_config()
            };
            let cfg = search.apply(base, max_iters);
            let run = Run::new("scan", output.out);
            run::run_scan(
                resolution,
                &cfg,
                budget,
                output.format.unwrap_or(Format::Csv),
                run,
            )
        }
        Command::Nclone {
            n,
            search,
            restarts,
            max_iters,
            output,
        } => {
            if !(2..=MAX_N_COPIES).contains(&n) {
                return Err(Failure::usage(format!(
                    "--n {n} outside 2..={MAX_N_COPIES}"
                )));
            }
            // the search runs on n symmetric copies without ancilla
            let base = OptimizationConfig {
                restarts,
                copies: n,
                symmetric: true,
                ..Default::default()
            };
            let cfg = search.apply(base, max_iters);
            let run = Run::new("nclone", output.out);
            run::run_nclone(n, &cfg, output.format.unwrap_or(Format::Json), run)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
