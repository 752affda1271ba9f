//! Multi-epoch simulation against an uncoded reference chain, plus the
//! security-bound and latency calculators and metric export.

mod bounds;
mod config;
mod export;
mod fixtures;
mod latency;
mod run;

pub use bounds::{
    gamma_min, parse_log2, security_bounds, threshold_approx, threshold_exact, tolerable_malicious, GammaMin,
    SecurityBounds,
};
pub use config::SimConfig;
pub use export::{export_metrics, metrics_csv, summary_json, CSV_COLUMNS, SCHEMA_VERSION};
pub use fixtures::write_fixtures;
pub use latency::{default_nodes, latency_table, measure, LatencyRow};
pub use run::{run_simulation, EpochReport, SimOutcome, Simulation, Verdict};
