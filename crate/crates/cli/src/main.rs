use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};

use foliage_cli::catalog::{parse_check, run_check, ALL_CHECKS};
use foliage_cli::config::{ScenarioConfig, ToleranceConfig};
use foliage_cli::gallery;
use foliage_cli::runner::run_scenario;

#[derive(Parser)]
#[command(
    name = "foliage",
    about = "Numerical laboratory for metric foliations: run compatibility checks \
             on configured models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML file or a bundled gallery entry.
    Run {
        /// Path to a scenario TOML, or the name of a gallery entry.
        config: String,
        /// Directory for summary.txt, summary.toml, and per-check CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run all bundled gallery scenarios.
    Gallery {
        /// Root directory; each scenario writes into its own subdirectory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a single named check against a configured model.
    Check {
        /// Check name; see `--list`.
        name: String,
        /// Scenario TOML providing the model (its check list is ignored).
        #[arg(long)]
        model: PathBuf,
        /// Override the sampling seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the pass tolerance (the fail tolerance scales with it).
        #[arg(long)]
        tol: Option<f64>,
    },
    /// List all known checks with one-line descriptions.
    List,
}

fn load_config(source: &str) -> Result<ScenarioConfig> {
    let path = PathBuf::from(source);
    if path.exists() {
        let text = fs::read_to_string(&path)
            .with_context(|| format!("could not read {}", path.display()))?;
        return ScenarioConfig::from_toml(&text)
            .with_context(|| format!("in {}", path.display()));
    }
    gallery::entry(source)
}

fn main() -> ExitCode {
    match run() {
        Ok(ok) => {
            if ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::FAILURE
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, out } => {
            let cfg = load_config(&config)?;
            let summary = run_scenario(&cfg)?;
            print!("{}", summary.text());
            if let Some(dir) = out {
                summary.write_into(&dir)?;
            }
            Ok(summary.all_matched())
        }
        Command::Gallery { out } => {
            let mut all_ok = true;
            for name in gallery::names() {
                let cfg = gallery::entry(name)?;
                let summary = run_scenario(&cfg)
                    .with_context(|| format!("gallery entry `{name}`"))?;
                let ok = summary.all_matched();
                all_ok &= ok;
                println!("{name}: {}", if ok { "PASS" } else { "FAIL" });
                if let Some(root) = &out {
                    summary.write_into(&root.join(name))?;
                }
            }
            Ok(all_ok)
        }
        Command::Check { name, model, seed, tol } => {
            let check = parse_check(&name)?;
            let text = fs::read_to_string(&model)
                .with_context(|| format!("could not read {}", model.display()))?;
            let mut cfg = ScenarioConfig::from_toml(&text)
                .with_context(|| format!("in {}", model.display()))?;
            if let Some(seed) = seed {
                cfg.sampling.seed = seed;
            }
            if let Some(pass) = tol {
                cfg.tolerances = ToleranceConfig { pass, fail: pass * 1e4 };
            }
            let runner_model = cfg.build_model()?;
            let report = run_check(
                check,
                &runner_model,
                &cfg.sampling,
                cfg.tolerances.as_tolerance(),
            );
            println!("{}", report.summary_line());
            Ok(report.passed())
        }
        Command::List => {
            for c in ALL_CHECKS {
                println!("{:25} {}", c.id(), c.describe());
            }
            Ok(true)
        }
    }
}
