use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pelks_cli::checks::{explain, known_checks};
use pelks_cli::fixtures::{fixture_text, FIXTURES};
use pelks_cli::{run, ConfigError, PelInstanceConfig};

const EXIT_INVALID: u8 = 2;

#[derive(Parser)]
#[command(name = "pelks", version, about = "Local and archimedean checks for PEL instance data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every applicable check on a config.
    Run {
        /// JSON config file, or `fixture:<name>` for a bundled fixture.
        #[arg(long)]
        config: String,
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        samples: Option<usize>,
        /// Only run checks whose name matches this glob.
        #[arg(long)]
        only: Option<String>,
        /// Omit per-check timings from the JSON report.
        #[arg(long)]
        no_timing: bool,
        /// Print the JSON report instead of the table.
        #[arg(long)]
        json: bool,
    },
    /// Bundled fixtures.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
    /// Print the identity a check verifies.
    Explain { check: String },
}

#[derive(Subcommand)]
enum FixtureAction {
    List,
    /// Print a fixture's JSON.
    Show { name: String },
}

fn load(source: &str) -> Result<PelInstanceConfig, ConfigError> {
    match source.strip_prefix("fixture:") {
        Some(name) => PelInstanceConfig::from_json(fixture_text(name)?),
        None => PelInstanceConfig::load(source),
    }
}

fn invalid(e: impl std::fmt::Display) -> ExitCode {
    eprintln!("config invalid: {e}");
    ExitCode::from(EXIT_INVALID)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { config, report, seed, samples, only, no_timing, json } => {
            let mut cfg = match load(&config) {
                Ok(c) => c,
                Err(e) => return invalid(e),
            };
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(s) = samples {
                cfg.samples = s;
            }
            let pattern = match only.as_deref().map(glob::Pattern::new).transpose() {
                Ok(p) => p,
                Err(e) => return invalid(format!("--only: {e}")),
            };
            let rep = match run(&cfg, pattern.as_ref()) {
                Ok(r) => r,
                Err(e) => return invalid(e),
            };
            let out = if no_timing { rep.body() } else { rep.clone() };
            if let Some(path) = report {
                if let Err(e) = std::fs::write(&path, out.to_json() + "\n") {
                    eprintln!("cannot write {path}: {e}");
                    return ExitCode::from(EXIT_INVALID);
                }
            }
            if json {
                println!("{}", out.to_json());
            } else {
                print!("{}", rep.table());
            }
            ExitCode::from(rep.exit_code() as u8)
        }
        Command::Fixtures { action: FixtureAction::List } => {
            for (name, text) in FIXTURES {
                let desc = PelInstanceConfig::from_json(text).map(|c| c.description).unwrap_or_default();
                println!("{name:<14} {desc}");
            }
            ExitCode::SUCCESS
        }
        Command::Fixtures { action: FixtureAction::Show { name } } => match fixture_text(&name) {
            Ok(t) => {
                print!("{t}");
                ExitCode::SUCCESS
            }
            Err(e) => invalid(e),
        },
        Command::Explain { check } => match explain(&check) {
            Some(text) => {
                println!("{check}: {text}");
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("unknown check `{check}`; known checks:");
                for k in known_checks() {
                    eprintln!("  {k}");
                }
                ExitCode::from(EXIT_INVALID)
            }
        },
    }
}
