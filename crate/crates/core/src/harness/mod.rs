//! Configuration, experiment runs, metrics, CSV and plot output.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod plot;
pub mod trajectory;

pub use config::{load_config, parse_config, ExperimentConfig};
pub use experiment::{run_experiment, RunOutcome};
pub use metrics::{compute_metrics, metrics_from_table, MetricsReport};
pub use plot::render_plot;
pub use trajectory::Table;
