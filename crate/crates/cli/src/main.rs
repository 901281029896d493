//! `pdql`: bounds reports, MDP validation, experiment sweeps and plots.
//!
//! Exit codes: 0 on success, 1 on a config or validation error, 2 when
//! every cell of a run or sweep is censored.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use pdql_core::bounds::{comparison_bounds, BoundInputs};
use pdql_core::harness::{
    aggregate, fit_scaling, plot_dir, run_experiment, summary_to_csv, write_outputs,
    ExperimentConfig, ExperimentOutput, RunOptions, SummaryRow,
};
use pdql_core::mdp::validation_report;
use pdql_core::MdpSpec;

#[derive(Parser, Debug)]
#[command(
    name = "pdql",
    version,
    about = "Probabilistic delayed Q-learning laboratory"
)]
struct Cli {
    /// Replaces the configured seeds with this one (run, sweep) or seeds
    /// metric sampling (validate).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Concurrent experiment cells.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample-complexity bounds at one parameter point.
    Bounds {
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        delta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        states: u64,
        #[arg(long)]
        actions: u64,
    },
    /// Structural checks on an MDP in JSON form.
    Validate {
        spec: PathBuf,
        /// Random triples for the metric axioms on large MDPs.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Runs an experiment and writes records, summary, traces and plots.
    Run {
        config: PathBuf,
        /// Output directory; defaults to `experiment.output_dir`, then `results`.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Like `run`, and also fits the scaling models to the summary.
    Sweep {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Regenerates both figures from an output directory.
    Plot { dir: PathBuf },
}

/// An error that maps to exit code 1.
#[derive(Debug)]
struct UserError(anyhow::Error);

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {:#}", e.0);
            ExitCode::from(1)
        }
    }
}

fn user<E: Into<anyhow::Error>>(e: E) -> UserError {
    UserError(e.into())
}

fn dispatch(cli: &Cli) -> Result<u8, UserError> {
    match &cli.command {
        Command::Bounds {
            epsilon,
            delta,
            gamma,
            states,
            actions,
        } => {
            let inputs =
                BoundInputs::new(*epsilon, *delta, *gamma, *states, *actions).map_err(user)?;
            let report = comparison_bounds(&inputs).map_err(user)?;
            match cli.format {
                Format::Text => print!("{}", report.to_text()),
                Format::Csv => print!("{}", report.to_csv()),
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&report).map_err(user)?)
                }
            }
            Ok(0)
        }
        Command::Validate { spec, samples } => {
            let text = fs::read_to_string(spec)
                .with_context(|| format!("reading {}", spec.display()))
                .map_err(user)?;
            let mdp = MdpSpec::from_json(&text)
                .with_context(|| format!("parsing {}", spec.display()))
                .map_err(user)?;
            let report = validation_report(&mdp, *samples, cli.seed.unwrap_or(0)).map_err(user)?;
            match cli.format {
                Format::Json => {
                    println!("{}", serde_json::to_string_pretty(&report).map_err(user)?)
                }
                Format::Csv => {
                    println!("check,passed,detail");
                    for c in &report.checks {
                        println!(
                            "{},{},\"{}\"",
                            c.name,
                            c.passed,
                            c.detail.replace('"', "\"\"")
                        );
                    }
                }
                Format::Text => print!("{report}"),
            }
            if report.passed() {
                Ok(0)
            } else {
                Err(user(anyhow::anyhow!(
                    "validation failed: {}",
                    report.violations().join(", ")
                )))
            }
        }
        Command::Run { config, output } => experiment(cli, config, output.as_deref(), false),
        Command::Sweep { config, output } => experiment(cli, config, output.as_deref(), true),
        Command::Plot { dir } => {
            plot_dir(dir)
                .with_context(|| format!("plotting {}", dir.display()))
                .map_err(user)?;
            if cli.format == Format::Text {
                println!("wrote {}", dir.join("plots").display());
            }
            Ok(0)
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<ExperimentConfig, UserError> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(user)?;
    let mut cfg = ExperimentConfig::from_toml_str(&text)
        .with_context(|| format!("in {}", path.display()))
        .map_err(user)?;
    if let Some(s) = seed {
        cfg.experiment.seeds = vec![s];
    }
    Ok(cfg)
}

fn print_summary(
    format: Format,
    out: &ExperimentOutput,
    summary: &[SummaryRow],
) -> Result<(), UserError> {
    match format {
        Format::Csv => print!("{}", summary_to_csv(summary)),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&out.records).map_err(user)?
        ),
        Format::Text => {
            println!(
                "{:<12} {:>6} {:>16} {:>14} {:>9}",
                "learner", "S", "mean_samples", "std_samples", "censored"
            );
            for r in summary {
                let num = |v: Option<f64>| {
                    v.map_or_else(|| "censored".to_string(), |x| format!("{x:.0}"))
                };
                println!(
                    "{:<12} {:>6} {:>16} {:>14} {:>9}",
                    r.learner,
                    r.states,
                    num(r.mean_samples),
                    num(r.std_samples),
                    r.n_censored
                );
            }
        }
    }
    Ok(())
}

fn experiment(cli: &Cli, config: &Path, output: Option<&Path>, fit: bool) -> Result<u8, UserError> {
    let cfg = load_config(config, cli.seed)?;
    let dir = output
        .map(Path::to_path_buf)
        .or_else(|| cfg.experiment.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    let out = run_experiment(
        &cfg,
        &RunOptions {
            jobs: cli.jobs,
            audit: false,
        },
    )
    .map_err(user)?;
    write_outputs(&cfg, &out, &dir)
        .with_context(|| format!("writing {}", dir.display()))
        .map_err(user)?;
    let summary = aggregate(&out.records);
    print_summary(cli.format, &out, &summary)?;
    if fit {
        let actions = out.records.first().map_or(0, |r| r.actions);
        match fit_scaling(&summary, actions) {
            Ok(report) => {
                let json = serde_json::to_string_pretty(&report).map_err(user)?;
                fs::write(dir.join("fit.json"), &json).map_err(user)?;
                if cli.format == Format::Text {
                    for l in &report.learners {
                        let norms: Vec<String> = l
                            .fits
                            .iter()
                            .map(|f| format!("{}={:.4e}", f.model.as_str(), f.residual_norm))
                            .collect();
                        println!(
                            "fit {:<12} {}  better={}",
                            l.learner,
                            norms.join(" "),
                            l.better.as_str()
                        );
                    }
                }
            }
            Err(e) => eprintln!("warning: scaling fit skipped: {e}"),
        }
    }
    if out.all_censored() {
        eprintln!(
            "every cell is censored; see {}",
            dir.join("records.csv").display()
        );
        return Ok(2);
    }
    Ok(0)
}
