//! Seeded Monte Carlo experiments, the Gaussian-limit oracle, figure
//! presets and the command-line interface.

mod cli;
mod config;
mod experiment;
mod figures;
mod oracle;

pub use cli::cli_main;
pub use config::{ExperimentConfig, ModelSpec, PathSource, Pipeline, Statistic, TransformSpec};
pub use experiment::{
    replication_rng, run_experiment, run_replications, thread_pool, EcdfTable, THREADS_ENV,
};
pub use figures::{figure_configs, figure_models, FIGURE_DELTA};
pub use oracle::{
    gaussian_limit_check, quantile_grid, standard_checks, CheckOutcome, CovarianceReport,
    GaussianOracle, IdentityTransform,
};
