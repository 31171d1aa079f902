use std::time::{Duration, Instant};

use cfmm_privacy_core::mitigations::PrivacyReport;
use cfmm_privacy_core::scenario::{run_trial, Aggregate, ScenarioConfig, TrialReport};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub generator: String,
    pub config: ScenarioConfig,
    pub aggregate: Aggregate,
    pub privacy: PrivacyReport,
    pub trials: Vec<TrialReport>,
    /// Kept out of the document so reruns are byte-identical.
    #[serde(skip)]
    pub wall_time: Duration,
}

impl ExperimentReport {
    pub fn from_rows(config: ScenarioConfig, rows: Vec<TrialReport>, wall_time: Duration) -> Self {
        let aggregate = Aggregate::from_rows(&rows);
        let privacy = PrivacyReport::from_aggregate(config.mitigation, &aggregate);
        ExperimentReport {
            generator: concat!("cfmm-privacy ", env!("CARGO_PKG_VERSION")).to_string(),
            config,
            aggregate,
            privacy,
            trials: rows,
            wall_time,
        }
    }
}

/// Runs every trial in parallel; rows come back in trial order.
pub fn run_experiment(config: &ScenarioConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let rows = (0..config.trials)
        .into_par_iter()
        .map(|i| run_trial(config, i))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ExperimentReport::from_rows(config.clone(), rows, start.elapsed()))
}
