use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use phidim::{execute, write_artifacts, ExperimentConfig, RunError, RunOptions, CATALOG};

#[derive(Parser)]
#[command(name = "phidim", version, about = "Generalized lower Assouad dimension experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and write its reports.
    Run {
        config: PathBuf,
        /// Output directory; overrides the config's `output_dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Maximum number of schedule levels.
        #[arg(long)]
        depth_budget: Option<u64>,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        /// Overrides the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Exit 4 when a tolerance check fails.
        #[arg(long)]
        assert: bool,
    },
    /// Print the experiment catalog.
    List {
        #[arg(long)]
        json: bool,
    },
    /// Parse and validate a config without running it.
    Validate { config: PathBuf },
}

fn fail(e: &RunError) -> ExitCode {
    eprintln!("{}", e.to_json());
    ExitCode::from(e.exit_code() as u8)
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::List { json } => {
            if json {
                println!("{}", serde_json::to_string_pretty(&CATALOG).expect("catalog serializes"));
                return Ok(());
            }
            for e in &CATALOG {
                println!("{}", e.name);
                println!("  reproduces: {}", e.anchor);
                println!("  {}", e.summary);
                println!("  required: {}", if e.required.is_empty() { "-".into() } else { e.required.join(", ") });
                println!("  optional: {}", e.optional.join(", "));
            }
            Ok(())
        }
        Command::Validate { config } => {
            let loaded = ExperimentConfig::load(&config)?;
            println!("{} ok (config-sha256 {})", loaded.config.kind.name(), loaded.sha256);
            Ok(())
        }
        Command::Run { config, out_dir, depth_budget, threads, seed, assert } => {
            let loaded = ExperimentConfig::load(&config)?;
            let opts = RunOptions { depth_budget, threads, seed };
            let art = execute(&loaded.config, &opts)?;
            let dir = out_dir
                .or_else(|| loaded.config.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from(format!("out/{}", loaded.config.kind.name())));
            let files = write_artifacts(&art, &loaded.sha256, &dir)?;
            for f in &files {
                println!("{}", f.display());
            }
            for c in &art.checks {
                println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.observed);
            }
            if let Some(e) = art.failure {
                return Err(e);
            }
            let failed = art.failed_checks();
            if assert && !failed.is_empty() {
                return Err(RunError::Tolerance(failed));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e),
    }
}
