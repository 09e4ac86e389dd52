use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nullkink::cli::{self, CliError};
use nullkink::config;

#[derive(Parser)]
#[command(version, about = "Half-kink evolutions, quasinormal modes and critical behaviour")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evolve one initial state and record diagnostics.
    Evolve(Common),
    /// Locate the fundamental quasinormal frequency.
    Qnm(Common),
    /// Bisect for a critical value of `b`.
    Bisect(Common),
    /// Classify the endstate of a list of `b` values.
    Sweep(Common),
    /// Integrate the collective-coordinate model.
    Effective(Common),
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides `output_dir` from the configuration.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Evolve(c) => cli::cmd_evolve(&config::load(&c.config)?, c.output_dir.as_deref()),
        Command::Qnm(c) => cli::cmd_qnm(&config::load(&c.config)?, c.output_dir.as_deref()),
        Command::Bisect(c) => cli::cmd_bisect(&config::load(&c.config)?, c.output_dir.as_deref()),
        Command::Sweep(c) => cli::cmd_sweep(&config::load(&c.config)?, c.output_dir.as_deref()),
        Command::Effective(c) => cli::cmd_effective(&config::load(&c.config)?, c.output_dir.as_deref()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let args = Args::parse();
    match run(args.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
