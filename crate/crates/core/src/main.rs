use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hivopt::cli::{self, CommandError, CommandResult, Scenario, EXIT_CONFIG};

#[derive(Parser)]
#[command(
    name = "hivopt",
    version,
    about = "HIV/AIDS compartment model: simulation, threshold analysis and optimal control"
)]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Scenario file (INI).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides the scenario and environment.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the model under a constant condom-use level.
    Simulate(Common),
    /// Report R0, equilibria and their local stability.
    Analyze(Common),
    /// Solve the optimal-control problem by forward-backward sweep.
    Optimize(Common),
    /// Repeat the threshold analysis along one parameter axis.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter key or `u1`.
        #[arg(long)]
        axis: String,
        /// Closed interval `lo:hi`.
        #[arg(long)]
        range: String,
        #[arg(long, default_value_t = 21)]
        count: usize,
    },
}

fn load(common: &Common) -> Result<Scenario, CommandError> {
    Scenario::from_file(&common.config)
        .map_err(|e| CommandError { code: EXIT_CONFIG, message: format!("{}: {e}", common.config.display()) })
}

fn dispatch(command: &Command) -> CommandResult {
    match command {
        Command::Simulate(c) => {
            let sc = load(c)?;
            cli::run_simulate(&sc, &cli::resolve_out_dir(c.out.as_deref(), &sc))
        }
        Command::Analyze(c) => cli::run_analyze(&load(c)?),
        Command::Optimize(c) => {
            let sc = load(c)?;
            cli::run_optimize(&sc, &cli::resolve_out_dir(c.out.as_deref(), &sc))
        }
        Command::Sweep { common, axis, range, count } => {
            let sc = load(common)?;
            let (lo, hi) = cli::parse_range(range)?;
            cli::run_sweep(&sc, axis, lo, hi, *count, &cli::resolve_out_dir(common.out.as_deref(), &sc))
        }
    }
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match dispatch(&args.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            for f in &out.files {
                eprintln!("wrote {}", f.display());
            }
            if out.code == cli::EXIT_NOT_CONVERGED {
                eprintln!("error: sweep did not converge; best iterate written");
            }
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
