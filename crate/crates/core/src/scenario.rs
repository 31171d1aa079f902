//! Seeded attack trials: Alice trades on a hidden pool, Eve reconstructs
//! the trade from the pool's public interface before and after.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::attack::{AttackSettings, ProbeSettings, PublicParams, TradeRecovery};
use crate::error::{Error, Result};
use crate::math;
use crate::mitigations::{self, batch_execute, sample_decoys, BatchConfig, NoiseConfig, NoisyOracle};
use crate::oracle::{CfmmOracle, Metered, PoolOracle};
use crate::pool::{PoolState, Trade};

pub const SCHEMA_VERSION: u32 = 1;

/// A recovered trade counts as a successful attack below this relative error.
pub const SUCCESS_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AliceConfig {
    /// Alice withdraws a log-uniform fraction of the output reserve from
    /// this range.
    pub min_fraction: f64,
    pub max_fraction: f64,
}

impl Default for AliceConfig {
    fn default() -> Self {
        AliceConfig { min_fraction: 1e-4, max_fraction: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EveConfig {
    pub query_budget: Option<u64>,
    /// First probe input tried; the probe is rescaled from there.
    pub probe_size: f64,
    /// Accuracy of the constant-sum search, per trade component.
    pub epsilon: f64,
}

impl Default for EveConfig {
    fn default() -> Self {
        EveConfig { query_budget: None, probe_size: 1.0, epsilon: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mitigation {
    #[default]
    None,
    Noise {
        sigma: f64,
    },
    Batch(BatchConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    pub pool: PoolState,
    #[serde(default)]
    pub alice: AliceConfig,
    #[serde(default)]
    pub eve: EveConfig,
    #[serde(default)]
    pub mitigation: Mitigation,
    pub trials: u64,
    pub master_seed: u64,
}

impl ScenarioConfig {
    pub fn new(pool: PoolState, trials: u64, master_seed: u64) -> Self {
        ScenarioConfig {
            schema_version: SCHEMA_VERSION,
            pool,
            alice: AliceConfig::default(),
            eve: EveConfig::default(),
            mitigation: Mitigation::None,
            trials,
            master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(Error::InvalidParameter(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                self.schema_version
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParameter("trials must be at least 1".into()));
        }
        mitigations::check_fraction_range(self.alice.min_fraction, self.alice.max_fraction)?;
        if !(self.eve.probe_size.is_finite() && self.eve.probe_size > 0.0) {
            return Err(Error::InvalidParameter("eve.probe_size must be positive".into()));
        }
        if !(self.eve.epsilon.is_finite() && self.eve.epsilon > 0.0) {
            return Err(Error::InvalidParameter("eve.epsilon must be positive".into()));
        }
        match self.mitigation {
            Mitigation::None => Ok(()),
            Mitigation::Noise { sigma } => NoiseConfig { sigma, seed: 0 }.validate(),
            Mitigation::Batch(cfg) => {
                cfg.validate()?;
                if self.pool.fee() != 1.0 {
                    return Err(Error::InvalidParameter("batching is only modelled for fee-less pools".into()));
                }
                Ok(())
            }
        }
    }

    fn attack_settings(&self) -> AttackSettings {
        AttackSettings {
            probe: ProbeSettings { initial_input: self.eve.probe_size, ..ProbeSettings::default() },
            // both reconstructions contribute to the trade error
            cs_epsilon: self.eve.epsilon / 2.0,
        }
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A stable 64-bit hash of two words.
pub fn mix_seed(a: u64, b: u64) -> u64 {
    splitmix64(splitmix64(a) ^ b)
}

pub fn trial_seed(master_seed: u64, trial: u64) -> u64 {
    mix_seed(master_seed, trial)
}

/// One row of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub trial: u64,
    pub seed: u64,
    pub true_trade: Vec<f64>,
    pub recovered_trade: Option<Vec<f64>>,
    /// `‖Δ̂ − Δ‖ / ‖Δ‖`
    pub relative_error: Option<f64>,
    /// `max |Δ̂ᵢ − Δᵢ|`
    pub absolute_error: Option<f64>,
    pub success: bool,
    pub queries: u64,
    pub residual_price: Option<f64>,
    pub residual_trade: Option<f64>,
    pub failure: Option<String>,
}

impl TrialReport {
    /// The relative error with failed attacks counted as infinitely wrong.
    pub fn error_or_inf(&self) -> f64 {
        self.relative_error.unwrap_or(f64::INFINITY)
    }
}

fn attack<A: CfmmOracle, B: CfmmOracle>(
    before: A,
    after: B,
    public: &PublicParams,
    settings: &AttackSettings,
    budget: Option<u64>,
) -> (Result<TradeRecovery>, u64) {
    let mut before = match budget {
        Some(b) => Metered::with_budget(before, b),
        None => Metered::new(before),
    };
    let first = crate::attack::reconstruct_reserves(&mut before, public, settings);
    let used = before.queries();
    let mut after = match budget {
        Some(b) => Metered::with_budget(after, b.saturating_sub(used)),
        None => Metered::new(after),
    };
    let out = first.and_then(|r0| {
        let r1 = crate::attack::reconstruct_reserves(&mut after, public, settings)?;
        let delta: Vec<f64> = r1.reserves.iter().zip(&r0.reserves).map(|(a, b)| a - b).collect();
        Ok(TradeRecovery { trade: Trade::new(delta)?, before: r0, after: r1 })
    });
    (out, used + after.queries())
}

/// Samples Alice's trade, applies the configured mitigation, and runs the
/// attack. Attack failures are recorded in the row.
pub fn run_trial(config: &ScenarioConfig, trial: u64) -> Result<TrialReport> {
    let seed = trial_seed(config.master_seed, trial);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let before = config.pool.clone();
    let alice = mitigations::random_swap(&before, config.alice.min_fraction, config.alice.max_fraction, &mut rng)?;
    let public = PublicParams::new(before.spec().clone(), before.fee())?;
    let settings = config.attack_settings();
    let budget = config.eve.query_budget;

    let (outcome, queries) = match config.mitigation {
        Mitigation::None => {
            let after = before.execute(&alice)?;
            attack(PoolOracle::new(before), PoolOracle::new(after), &public, &settings, budget)
        }
        Mitigation::Noise { sigma } => {
            let after = before.execute(&alice)?;
            let noise = NoiseConfig { sigma, seed };
            attack(NoisyOracle::new(before, noise, 0)?, NoisyOracle::new(after, noise, 1)?, &public, &settings, budget)
        }
        Mitigation::Batch(cfg) => {
            let mid = before.execute(&alice)?;
            let mut batch = vec![alice.clone()];
            batch.extend(sample_decoys(&mid, &cfg, &mut rng)?);
            let (after, _) = batch_execute(&before, &batch)?;
            attack(PoolOracle::new(before), PoolOracle::new(after), &public, &settings, budget)
        }
    };
    Ok(row(trial, seed, &alice, outcome, queries))
}

fn row(trial: u64, seed: u64, alice: &Trade, outcome: Result<TradeRecovery>, queries: u64) -> TrialReport {
    let true_trade = alice.as_slice().to_vec();
    match outcome {
        Ok(rec) => {
            let diff: Vec<f64> = rec.trade.as_slice().iter().zip(&true_trade).map(|(a, b)| a - b).collect();
            let relative = math::norm(&diff) / alice.norm();
            let absolute = diff.iter().fold(0.0_f64, |m, d| m.max(math::abs(*d)));
            TrialReport {
                trial,
                seed,
                true_trade,
                recovered_trade: Some(rec.trade.into()),
                relative_error: Some(relative),
                absolute_error: Some(absolute),
                success: relative <= SUCCESS_THRESHOLD,
                queries,
                residual_price: Some(rec.before.residual_price.max(rec.after.residual_price)),
                residual_trade: Some(rec.before.residual_trade.max(rec.after.residual_trade)),
                failure: None,
            }
        }
        Err(e) => TrialReport {
            trial,
            seed,
            true_trade,
            recovered_trade: None,
            relative_error: None,
            absolute_error: None,
            success: false,
            queries,
            residual_price: None,
            residual_trade: None,
            failure: Some(e.to_string()),
        },
    }
}

/// Summary statistics over trial rows. Quantiles use the nearest-rank
/// definition, with failed trials ranked last; a quantile that lands on a
/// failure is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub trials: usize,
    pub failures: usize,
    pub median_error: Option<f64>,
    pub p90_error: Option<f64>,
    pub max_error: Option<f64>,
    pub success_rate: f64,
    pub success_threshold: f64,
    pub total_queries: u64,
}

/// The nearest-rank `q`-quantile of an ascending slice.
pub fn nearest_rank(sorted: &[f64], q: f64) -> Option<f64> {
    if sorted.is_empty() {
        return None;
    }
    let rank = math::ceil(q * sorted.len() as f64) as usize;
    let v = sorted[rank.clamp(1, sorted.len()) - 1];
    v.is_finite().then_some(v)
}

impl Aggregate {
    pub fn from_rows(rows: &[TrialReport]) -> Self {
        let mut errors: Vec<f64> = rows.iter().map(TrialReport::error_or_inf).collect();
        errors.sort_by(f64::total_cmp);
        let successes = rows.iter().filter(|r| r.success).count();
        Aggregate {
            trials: rows.len(),
            failures: rows.iter().filter(|r| r.failure.is_some()).count(),
            median_error: nearest_rank(&errors, 0.5),
            p90_error: nearest_rank(&errors, 0.9),
            max_error: nearest_rank(&errors, 1.0),
            success_rate: if rows.is_empty() { 0.0 } else { successes as f64 / rows.len() as f64 },
            success_threshold: SUCCESS_THRESHOLD,
            total_queries: rows.iter().map(|r| r.queries).sum(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trading::TradingFunctionSpec;

    fn cp_config(trials: u64) -> ScenarioConfig {
        let spec = TradingFunctionSpec::constant_product(2).unwrap();
        ScenarioConfig::new(PoolState::new(spec, vec![1000.0, 2500.0], 1.0).unwrap(), trials, 42)
    }

    #[test]
    fn seeds_are_stable_and_distinct() {
        assert_eq!(trial_seed(1, 2), trial_seed(1, 2));
        assert_ne!(trial_seed(1, 2), trial_seed(2, 1));
        assert_ne!(trial_seed(0, 0), trial_seed(0, 1));
    }

    #[test]
    fn exact_attack_without_mitigation() {
        let cfg = cp_config(20);
        for i in 0..cfg.trials {
            let r = run_trial(&cfg, i).unwrap();
            assert!(r.relative_error.unwrap() <= 1e-6, "{r:?}");
            assert!(r.success);
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let cfg = cp_config(1);
        assert_eq!(run_trial(&cfg, 5).unwrap(), run_trial(&cfg, 5).unwrap());
    }

    #[test]
    fn constant_sum_within_epsilon() {
        let spec = TradingFunctionSpec::constant_sum(2).unwrap();
        let mut cfg = ScenarioConfig::new(PoolState::new(spec, vec![10.0, 10.0], 1.0).unwrap(), 5, 3);
        cfg.eve.epsilon = 1e-3;
        for i in 0..cfg.trials {
            let r = run_trial(&cfg, i).unwrap();
            assert!(r.absolute_error.unwrap() <= 1e-3, "{r:?}");
        }
    }

    #[test]
    fn zero_decoys_match_no_mitigation() {
        let plain = cp_config(4);
        let mut batched = plain.clone();
        batched.mitigation = Mitigation::Batch(BatchConfig::new(0));
        for i in 0..4 {
            let a = run_trial(&plain, i).unwrap();
            let b = run_trial(&batched, i).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn query_budget_is_enforced() {
        let mut cfg = cp_config(1);
        cfg.eve.query_budget = Some(10);
        let r = run_trial(&cfg, 0).unwrap();
        assert!(r.failure.unwrap().contains("budget"));
        assert!(r.queries <= 10);
    }

    #[test]
    fn validation() {
        let mut cfg = cp_config(1);
        assert!(cfg.validate().is_ok());
        cfg.trials = 0;
        assert!(cfg.validate().is_err());
        let mut cfg = cp_config(1);
        cfg.schema_version = 2;
        assert!(cfg.validate().is_err());
        let mut cfg = cp_config(1);
        cfg.alice.max_fraction = 0.9;
        assert!(cfg.validate().is_err());
        let spec = TradingFunctionSpec::constant_product(2).unwrap();
        let mut cfg = ScenarioConfig::new(PoolState::new(spec, vec![1.0, 1.0], 0.997).unwrap(), 1, 0);
        cfg.mitigation = Mitigation::Batch(BatchConfig::new(1));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn aggregate_quantiles() {
        let mk = |e: Option<f64>| TrialReport {
            trial: 0,
            seed: 0,
            true_trade: vec![],
            recovered_trade: None,
            relative_error: e,
            absolute_error: None,
            success: e.is_some_and(|x| x <= SUCCESS_THRESHOLD),
            queries: 1,
            residual_price: None,
            residual_trade: None,
            failure: e.is_none().then(|| "x".to_string()),
        };
        let rows: Vec<_> = [Some(0.3), Some(0.001), None, Some(0.002)].into_iter().map(mk).collect();
        let agg = Aggregate::from_rows(&rows);
        assert_eq!(agg.median_error, Some(0.002));
        assert_eq!(agg.p90_error, None);
        assert_eq!(agg.failures, 1);
        assert_eq!(agg.success_rate, 0.5);
        let one = Aggregate::from_rows(&rows[..1]);
        assert_eq!(one.median_error, Some(0.3));
        assert_eq!(one.max_error, Some(0.3));
    }
}
