//! Experiment orchestration: sweeps, convergence detection, aggregation,
//! scaling fits and plots.
//!
//! Output directory layout: `records.csv`, `summary.csv`,
//! `traces/<learner>_<S>_<seed>.{csv,json}`, `config.json`,
//! `plots/figure_a.svg`, `plots/figure_b.svg`.

mod aggregate;
mod config;
mod experiment;
mod fit;
mod plot;

use thiserror::Error;

pub use aggregate::{aggregate, read_summary_csv, summary_to_csv, SummaryRow, CENSORED};
pub use config::{
    DqlBatch, EnvSection, ExperimentConfig, ExperimentSection, LearnerConfig, LearnerKind,
    ResolvedLearner,
};
pub use experiment::{
    run_experiment, samples_to_convergence, write_outputs, AuditSummary, CellKey,
    ConvergenceRecord, ExperimentOutput, RunOptions, ORACLE_TOLERANCE,
};
pub use fit::{fit_model, fit_scaling, FitReport, LearnerFit, ModelFit, ScalingModel};
pub use plot::{figure_a, figure_b, plot_dir, CurveSet};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{learner}: need at least 3 converged sizes to fit, have {sizes}")]
    InsufficientData { learner: String, sizes: usize },
    #[error("malformed output file {path}: {message}")]
    Malformed { path: String, message: String },
    #[error(transparent)]
    Mdp(#[from] crate::mdp::MdpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
