//! JSON-configured runs, CSV traces and the command-line front end.

mod bench;
mod cli;
mod config;
mod sim;

pub use bench::{loglog_slope, run_bench, ScalingReport, BENCH_SIZES};
pub use cli::{lb_policy, run_cli, EXIT_ASSERTION, EXIT_CONFIG, EXIT_OK};
pub use config::{Instantiation, PolicyKind, RunConfig};
pub use sim::{
    format_real, run_simulation, run_verify_moments, write_csv, CheckSummary, RunOutput, RunRecord,
    CSV_HEADER,
};
