use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use geodrive::experiment::{describe, exit_code, run_path, run_preset, ExperimentConfig, PresetOptions};

#[derive(Parser)]
#[command(name = "geodrive", version, about = "Geometric quantum drive experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config.
    Run { config: PathBuf },
    /// Run a built-in parameter set.
    Preset {
        name: String,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Horizon of the flat-manifold responses.
        #[arg(long, default_value_t = 20000.0)]
        t_max: f64,
    },
    /// Check a config and print the derived plan.
    Validate { config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run_path(&config).map(|m| {
            for f in &m.files {
                println!("{f}");
            }
        }),
        Command::Preset { name, out, jobs, t_max } => {
            run_preset(&name, &out, jobs, &PresetOptions { flat_t_max: t_max }).map(|r| {
                for c in &r.checks {
                    let v = c.value.map_or("none".to_string(), |v| format!("{v:.6}"));
                    println!("{} {}: {v}", if c.pass { "PASS" } else { "FAIL" }, c.name);
                }
                println!("{}", out.join(&name).join("manifest.json").display());
            })
        }
        Command::Validate { config } => ExperimentConfig::load(&config).map(|c| {
            for line in describe(&c) {
                println!("{line}");
            }
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
