use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use hdickman_lab::config::Overrides;
use hdickman_lab::{run, ExperimentConfig, ExperimentName};

#[derive(Parser)]
#[command(name = "hdickman", version, about = "Harmonic-sample limit laws: reproducible experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its JSON report.
    Run {
        /// JSON config file. Optional when --experiment is given.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Experiment name; overrides the file.
        #[arg(long)]
        experiment: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        n: Option<u64>,
        /// Report path; CSV side files go to <PATH>.<artifact>.csv.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Binary prime table to reuse, created if missing or too small.
        #[arg(long)]
        prime_cache: Option<PathBuf>,
    },
    /// List experiments.
    List,
}

fn main() -> ExitCode {
    match real_main() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn real_main() -> anyhow::Result<bool> {
    match Cli::parse().command {
        Command::List => {
            for e in ExperimentName::ALL {
                println!("{:<16} {}", e.as_str(), e.description());
            }
            Ok(true)
        }
        Command::Run { config, experiment, seed, samples, n, out, prime_cache } => {
            let overrides = Overrides {
                experiment: experiment.map(|s| s.parse()).transpose()?,
                n,
                samples,
                seed,
                output_path: out.map(|p| p.display().to_string()),
                prime_cache: prime_cache.map(|p| p.display().to_string()),
            };
            let text = match &config {
                Some(path) => std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?,
                None if overrides.experiment.is_some() => "{}".to_string(),
                None => anyhow::bail!("run needs --config or --experiment"),
            };
            let cfg = ExperimentConfig::from_json(&text, &overrides)?;
            let output = run(&cfg)?;
            let json = output.report.to_json();
            match &cfg.output_path {
                Some(path) => {
                    let path = PathBuf::from(path);
                    std::fs::write(&path, &json).with_context(|| format!("writing {}", path.display()))?;
                    if cfg.write_csv {
                        for a in &output.artifacts {
                            a.write(&path)?;
                        }
                    }
                }
                None => println!("{json}"),
            }
            for (name, ok) in &output.report.pass {
                let (metric, _) = hdickman_lab::report::tolerance_target(name);
                eprintln!(
                    "{} {name}: {} vs {}",
                    if *ok { "PASS" } else { "FAIL" },
                    output.report.metrics[metric],
                    cfg.tolerances[name]
                );
            }
            Ok(output.report.all_pass)
        }
    }
}
