use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qpath_cli::{run_file, verify_file, CliError, Overrides};
use serde_json::json;

#[derive(Parser)]
#[command(name = "qpath", version, about = "Pathway amplitudes of controlled qubit gates")]
struct Cli {
    /// Worker threads for the encoding sweep (all cores by default).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Display floor for class magnitudes, overriding the config.
    #[arg(long, global = true)]
    floor: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode mechanism reports and write all artifacts.
    Run { config: PathBuf },
    /// Compare decoded singleton classes against direct quadrature.
    Verify { config: PathBuf },
}

fn fail(err: CliError) -> ExitCode {
    let record = serde_json::to_string(&err.record()).unwrap_or_else(|_| err.to_string());
    eprintln!("{record}");
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail(CliError::Config(format!("thread pool: {e}")));
        }
    }
    let overrides = Overrides { out: cli.out, floor: cli.floor };
    let line = match cli.command {
        Command::Run { config } => run_file(&config, &overrides).map(|(summary, out)| {
            json!({
                "status": summary.status,
                "name": summary.name,
                "output": out,
                "gate_fidelity": summary.gate_fidelity,
                "max_partition_residual": summary.checks.max_partition_residual,
                "max_unitarity_defect": summary.checks.max_unitarity_defect,
            })
        }),
        Command::Verify { config } => verify_file(&config, &overrides).map(|(outcome, out)| {
            json!({
                "status": "ok",
                "output": out,
                "compared": outcome.coarse.rows.len(),
                "max_gap": outcome.coarse.max_gap,
                "ratio": outcome.ratio,
            })
        }),
    };
    match line {
        Ok(value) => {
            println!("{value}");
            ExitCode::SUCCESS
        }
        Err(err) => fail(err),
    }
}
