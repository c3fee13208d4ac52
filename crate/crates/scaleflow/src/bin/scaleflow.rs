//! Command-line experiment runner.
//!
//! Exit codes: 0 every requested check passed, 1 a check failed,
//! 2 usage or configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scaleflow::bundled;
use scaleflow::catalog::Catalog;
use scaleflow::error::Error;
use scaleflow::scenario::{parse_scenario, run_scenario, write_artifacts, Context};

#[derive(Parser)]
#[command(
    name = "scaleflow",
    about = "Spectral toolkit for gradient flows on weighted-l2 scale spaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML file (or a bundled scenario by name).
    Run {
        /// Path to a scenario file, or the name of a bundled scenario.
        config: String,
        /// Output directory for report.json, summary.csv, and plots.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the scenario's random seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads for family members and samples.
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// List the bundled scenarios.
    ListScenarios,
    /// Show what a bundled scenario exercises and which checks it runs.
    Describe { name: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::ListScenarios => {
            for (name, src) in bundled::BUNDLED {
                let scenario = parse_scenario(src)?;
                let kinds: Vec<&str> = scenario.checks.iter().map(|c| c.kind.as_str()).collect();
                println!("{name:28} [{}]", kinds.join(", "));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Describe { name } => {
            let src = bundled::find(&name)
                .ok_or_else(|| Error::Config(format!("unknown bundled scenario `{name}`")))?;
            let scenario = parse_scenario(src)?;
            println!("{}", scenario.name);
            println!("  seed: {}", scenario.seed);
            println!("  runtime budget: {} s", scenario.runtime_budget_secs);
            println!("  exercises:");
            for topic in &scenario.topics {
                println!("    - {topic}");
            }
            println!("  checks:");
            for check in &scenario.checks {
                println!("    - {}", check.kind);
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Run {
            config,
            out,
            seed,
            jobs,
        } => {
            let (name, source) = load_config(&config)?;
            let mut scenario = parse_scenario(&source)?;
            if let Some(seed) = seed {
                scenario.seed = seed;
            }
            if let Some(jobs) = jobs {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build_global()
                    .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            }
            let out_dir =
                out.unwrap_or_else(|| PathBuf::from("scaleflow-out").join(&scenario.name));
            let catalog = Catalog::builtin();
            let ctx = Context::resolve(scenario, &catalog)?;
            let report = run_scenario(&ctx);
            let files = write_artifacts(&report, &out_dir)?;
            for check in &report.checks {
                let verdict = if check.pass { "pass" } else { "FAIL" };
                println!("[{verdict}] {name} :: {}", check.kind);
                if let Some(err) = &check.error {
                    println!("        error: {err}");
                }
                for row in &check.rows {
                    let bound = row
                        .bound
                        .map(|b| format!(" (vs {b:.3e})"))
                        .unwrap_or_default();
                    println!(
                        "        {} {}: {:.6e}{bound}",
                        if row.pass { "ok " } else { "BAD" },
                        row.quantity,
                        row.measured
                    );
                }
            }
            println!(
                "report: {} ({} files, {:.2} s)",
                out_dir.display(),
                files.len(),
                report.meta.duration_secs
            );
            if report.pass {
                println!("{name}: PASS");
                Ok(ExitCode::SUCCESS)
            } else {
                println!("{name}: FAIL");
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn load_config(config: &str) -> Result<(String, String), Error> {
    let path = std::path::Path::new(config);
    if path.exists() {
        let name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
        Ok((
            name.unwrap_or_else(|| config.into()),
            std::fs::read_to_string(path)?,
        ))
    } else if let Some(src) = bundled::find(config) {
        Ok((config.to_string(), src.to_string()))
    } else {
        Err(Error::Config(format!(
            "`{config}` is neither a readable file nor a bundled scenario"
        )))
    }
}
