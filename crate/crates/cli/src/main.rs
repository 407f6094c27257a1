use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use stheat_cli::{commands, Context, RunConfig};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Command {
    Verify,
    Converge,
    Optimize,
    Compare,
}

/// Space-time spectral element topology optimization of 1D transient heat
/// conduction.
#[derive(Debug, Parser)]
#[command(name = "stheat", version)]
struct Args {
    command: Command,
    /// TOML run configuration; every key is optional.
    #[arg(long)]
    config: PathBuf,
    /// Worker threads for sweep points (defaults to the available cores).
    #[arg(long)]
    jobs: Option<usize>,
    /// Overrides the seed from the configuration.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

fn run(args: Args) -> commands::CmdResult<bool> {
    let config = RunConfig::load(&args.config)?;
    let jobs = args
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1);
    std::fs::create_dir_all(&args.out)?;
    let ctx = Context {
        seed: args.seed.unwrap_or_else(|| config.seed()),
        config,
        jobs,
        out: args.out,
    };
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    pool.install(|| match args.command {
        Command::Verify => commands::verify(&ctx),
        Command::Converge => commands::converge(&ctx),
        Command::Optimize => commands::optimize(&ctx),
        Command::Compare => commands::compare(&ctx),
    })
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("stheat: {e}");
            ExitCode::from(2)
        }
    }
}
