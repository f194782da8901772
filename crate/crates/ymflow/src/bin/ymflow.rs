use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ymflow::config::{parse_config, RunConfig};
use ymflow::runner;

#[derive(Parser)]
#[command(name = "ymflow", version, about = "Yang-Mills heat flows on discretized 3D boxes and tori")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Execute a configured run end to end.
    Run { config: PathBuf },
    /// Continue a checkpointed run.
    Resume {
        checkpoint: PathBuf,
        /// New end time; defaults to the configured one.
        #[arg(long)]
        until: Option<f64>,
        /// Resume even if the embedded config fails its hash check.
        #[arg(long)]
        force: bool,
    },
    /// Wilson traces of a loop file against a checkpointed connection.
    Wilson {
        checkpoint: PathBuf,
        #[arg(long)]
        loops: PathBuf,
    },
    /// Compare an abelian run against its exact spectral solution.
    CompareOracle { config: PathBuf },
    /// Integrate the linearized flow along a configured base trajectory.
    Variational {
        config: PathBuf,
        /// `zero`, `smooth:<seed>:<amplitude>`, or a tangent checkpoint.
        #[arg(long)]
        v0: String,
    },
    /// Aggregate the series and verdict lines of a run directory.
    Report { dir: PathBuf },
}

fn load_config(path: &PathBuf) -> ymflow::Result<RunConfig> {
    parse_config(&std::fs::read_to_string(path)?)
}

fn print_outcome(out: &runner::RunOutcome) -> bool {
    for v in &out.verdicts {
        println!("{}", v.line());
    }
    println!(
        "run t = {:.6e} steps {} out {}",
        out.config.stepper.t_end,
        out.record.total_steps,
        out.out_dir.display()
    );
    out.all_pass()
}

fn dispatch(cmd: Cmd) -> ymflow::Result<bool> {
    match cmd {
        Cmd::Run { config } => {
            let cfg = load_config(&config)?;
            Ok(print_outcome(&runner::run_from_config(&cfg)?))
        }
        Cmd::Resume {
            checkpoint,
            until,
            force,
        } => Ok(print_outcome(&runner::resume_run(&checkpoint, until, force)?)),
        Cmd::Wilson { checkpoint, loops } => {
            for (name, re, im) in runner::wilson_report(&checkpoint, &loops)? {
                println!("{name} {re:.16e} {im:.16e}");
            }
            Ok(true)
        }
        Cmd::CompareOracle { config } => {
            let verdict = runner::compare_oracle(&load_config(&config)?)?;
            println!("{}", verdict.line());
            Ok(verdict.pass())
        }
        Cmd::Variational { config, v0 } => {
            let cfg = load_config(&config)?;
            let out = runner::run_variational(&cfg, &v0)?;
            let last = out.record.norm_sq.last().copied().unwrap_or((0.0, 0.0));
            println!(
                "tangent t = {:.6e} norm_sq {:.6e} out {}",
                last.0,
                last.1,
                out.out_dir.display()
            );
            Ok(true)
        }
        Cmd::Report { dir } => {
            let (text, all_pass) = runner::report_dir(&dir)?;
            print!("{text}");
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = runner::init_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match dispatch(cli.cmd) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
