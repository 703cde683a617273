//! Experiment harness for the random projection methods in
//! `multiproj-core`: JSON configs, parallel multi-trial runs with
//! deterministic aggregation, CSV output and the acceptance suite.

pub mod config;
pub mod error;
pub mod output;
pub mod runner;
pub mod suite;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use runner::{run_experiment, AggregateResult};

use multiproj_core::metrics::{estimate_eta, ProbeRegion};
use multiproj_core::{RngStream, DATA_STREAM};

/// Stream index for the linear-regularity probes, disjoint from the trial
/// streams and the data stream.
pub const PROBE_STREAM: u64 = DATA_STREAM - 1;

/// Estimated linear-regularity constant of the configured instance.
pub fn estimate_config_eta(config: &ExperimentConfig) -> Result<f64> {
    let problem = runner::build_problem(config)?;
    let region = ProbeRegion::around(&problem);
    let mut rng = RngStream::new(config.base_seed, PROBE_STREAM);
    Ok(estimate_eta(
        &problem.family,
        &region,
        config.eta_probes,
        &mut rng,
    )?)
}
