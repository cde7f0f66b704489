use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use openbath::{run_scenario, HarnessError, RunOptions, Scenario};

#[derive(Parser, Debug)]
#[command(name = "openbath", version, about = "Open-environment master equation scenarios")]
struct Cli {
    scenario: Scenario,
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("openbath {}: {e}", cli.scenario.name());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli) -> Result<(), HarnessError> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(HarnessError::Config("--threads: must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| HarnessError::Config(format!("--threads: {e}")))?;
    }
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| HarnessError::Io(format!("{}: {e}", cli.config.display())))?;
    let summary = run_scenario(cli.scenario, &text, &RunOptions { out: cli.out.clone(), seed: cli.seed })?;
    println!("{}: wrote {} to {}", cli.scenario.name(), summary.outputs.join(", "), cli.out.display());
    Ok(())
}
