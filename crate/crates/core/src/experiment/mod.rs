//! Monte-Carlo experiments: convergence, DP trade-off, topology contrast
//! and estimator calibration.

pub mod calibration;
pub mod convergence;
mod estimate;
pub mod harness;
pub mod spec;
pub mod table;
pub mod topology;
pub mod tradeoff;

pub use calibration::run_calibration;
pub use convergence::run_convergence;
pub use estimate::{Estimates, BATCHES};
pub use harness::{montecarlo, Trial};
pub use spec::{ExperimentKind, ExperimentSpec, GraphSource};
pub use table::{ResultRow, ResultTable, CSV_HEADER};
pub use topology::run_topology;
pub use tradeoff::run_dp_tradeoff;

use crate::error::Result;

/// Runs the experiment named in `spec`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    match spec.experiment {
        ExperimentKind::Convergence => run_convergence(spec),
        ExperimentKind::DpTradeoff => run_dp_tradeoff(spec),
        ExperimentKind::Topology => run_topology(spec),
        ExperimentKind::Calibration => run_calibration(spec),
    }
}
