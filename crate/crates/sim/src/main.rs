use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use hbdris_sim::figures::Figure;
use hbdris_sim::output::write_outputs;
use hbdris_sim::selftest::{run_selftest, Injection};
use hbdris_sim::{run_scenario, ExperimentResult, RunConfig, SimError};

#[derive(Parser)]
#[command(
    name = "hbdris",
    version,
    about = "Hybrid beyond-diagonal RIS Monte-Carlo simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a sweep described by a JSON configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Also write an SVG plot.
        #[arg(long)]
        plot: bool,
    },
    /// Run one of the standard sweeps (fig2..fig7).
    Figure {
        id: String,
        /// `key=value`, e.g. `runs=200` or `scenario.pt_dbm=10`; repeatable.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        plot: bool,
    },
    /// Run the invariant suite; exits with 2 on any failure.
    Selftest {
        /// Inject a known fault to confirm the suite detects it.
        #[arg(long, value_enum)]
        inject: Option<InjectArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InjectArg {
    Beta,
    Theta,
}

fn finish(
    result: &ExperimentResult,
    cfg: &RunConfig,
    out: &Path,
    name: &str,
    plot: bool,
) -> Result<(), SimError> {
    let config = serde_json::to_value(cfg)?;
    for path in write_outputs(result, &config, out, name, plot)? {
        println!("wrote {}", path.display());
    }
    for s in &result.series {
        for (i, e) in s.errors.iter().enumerate() {
            if let Some(e) = e {
                eprintln!(
                    "warning: {} at {}={}: {e}",
                    s.label, result.sweep_variable, result.sweep[i]
                );
            }
        }
    }
    println!(
        "{:.2} s, config {}",
        result.metadata.wall_time_s,
        &result.metadata.config_hash[..12]
    );
    Ok(())
}

fn execute(command: Command) -> Result<ExitCode, SimError> {
    match command {
        Command::Run {
            config,
            seed,
            runs,
            out,
            plot,
        } => {
            let text = std::fs::read_to_string(&config).map_err(|source| SimError::Io {
                path: config.display().to_string(),
                source,
            })?;
            let mut cfg = RunConfig::from_json(&text)?;
            if let Some(seed) = seed {
                cfg.scenario.seed = seed;
            }
            if let Some(runs) = runs {
                cfg.scenario.mc_runs = runs;
            }
            cfg.validate()?;
            let name = config
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("run")
                .to_string();
            let result = run_scenario(&cfg)?;
            finish(&result, &cfg, &out, &name, plot)?;
        }
        Command::Figure {
            id,
            overrides,
            out,
            plot,
        } => {
            let figure: Figure = id.parse()?;
            let cfg = figure.config_with(&overrides)?;
            let result = run_scenario(&cfg)?;
            finish(&result, &cfg, &out, figure.name(), plot)?;
        }
        Command::Selftest { inject } => {
            let injection = inject.map(|i| match i {
                InjectArg::Beta => Injection::BetaPlusOnePercent,
                InjectArg::Theta => Injection::AsymmetricTheta,
            });
            let report = run_selftest(injection);
            println!("{report}");
            if !report.passed() {
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for self-test failures.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
