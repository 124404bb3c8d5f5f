//! Batch front door for the solvers: one JSON config per run, CSV/JSON
//! artifacts out, deterministic byte-for-byte.

mod config;
mod run;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{RunConfig, TaskBlock};

#[derive(Parser)]
#[command(
    name = "parheom",
    about = "Parity-resolved fermionic open-system solvers: HEOM, generalized Lindblad, \
             and an exact-diagonalization verifier",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Print the summary JSON to stdout as well.
    #[arg(short, long, global = true)]
    verbose: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the task in the config (dynamics, correlation, or spectrum).
    Run {
        config: PathBuf,
        /// Override the output path prefix from the config.
        #[arg(long)]
        output: Option<String>,
    },
    /// Run the verification suite and emit a residual report.
    Verify {
        config: PathBuf,
        #[arg(long)]
        output: Option<String>,
    },
    /// Emit the bath exponent decomposition as JSON.
    Decompose {
        config: PathBuf,
        #[arg(long)]
        output: Option<String>,
    },
}

fn init_thread_pool() {
    if let Ok(value) = std::env::var("PARHEOM_THREADS") {
        if let Ok(n) = value.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn load(path: &std::path::Path, output: Option<String>) -> anyhow::Result<RunConfig> {
    let mut config = RunConfig::from_path(path)?;
    if let Some(out) = output {
        config.output = out;
    }
    if let Some(parent) = std::path::Path::new(&config.output).parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    Ok(config)
}

fn main() -> ExitCode {
    init_thread_pool();
    let cli = Cli::parse();
    let result = dispatch(&cli);
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cli: &Cli) -> anyhow::Result<ExitCode> {
    match &cli.command {
        Command::Run { config, output } => {
            let cfg = load(config, output.clone())?;
            if matches!(cfg.task, TaskBlock::Verify {}) {
                anyhow::bail!("task=verify runs through the verify subcommand");
            }
            let summary = run::execute(&cfg)?;
            for artifact in &summary.artifacts {
                println!("wrote {artifact}");
            }
            println!("wrote {}.summary.json", cfg.output);
            if cli.verbose {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { config, output } => {
            let cfg = load(config, output.clone())?;
            let report = verify::run_verify(&cfg)?;
            let path = format!("{}.verify.json", cfg.output);
            std::fs::write(&path, serde_json::to_string_pretty(&report)?)?;
            for c in &report.checks {
                let status = if c.pass { "pass" } else { "FAIL" };
                match (c.residual, &c.note) {
                    (Some(r), _) => println!(
                        "{status} {name} [{subject}]: residual {r:.3e} (threshold {thr:.1e})",
                        name = c.name,
                        subject = c.subject,
                        thr = c.threshold
                    ),
                    (None, Some(note)) => {
                        println!("{status} {name} [{subject}]: {note}", name = c.name, subject = c.subject)
                    }
                    (None, None) => println!("{status} {name}", name = c.name),
                }
            }
            println!("wrote {path}");
            if cli.verbose {
                println!("{}", serde_json::to_string_pretty(&report)?);
            }
            if report.all_pass {
                Ok(ExitCode::SUCCESS)
            } else {
                eprintln!("verification residuals exceeded thresholds");
                Ok(ExitCode::from(2))
            }
        }
        Command::Decompose { config, output } => {
            let cfg = load(config, output.clone())?;
            let summary = run::decompose(&cfg)?;
            for artifact in &summary.artifacts {
                println!("wrote {artifact}");
            }
            if cli.verbose {
                println!("{}", serde_json::to_string_pretty(&summary)?);
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
