//! Defences against reconstruction: per-block price noise and batching.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::oracle::CfmmOracle;
use crate::pool::{PoolState, PriceVector, Trade};
use crate::scenario::{self, Aggregate, Mitigation, ScenarioConfig};

/// Log-normal noise on the reported price, fixed within a block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma >= 0.0) {
            return Err(Error::InvalidParameter("noise sigma must be nonnegative".into()));
        }
        Ok(())
    }

    fn block_rng(&self, block: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(scenario::mix_seed(self.seed, block))
    }
}

/// The marginal price with every non-numéraire component multiplied by
/// `exp(σzᵢ)`, where the `zᵢ` depend only on the seed and the block.
pub fn noisy_price(state: &PoolState, cfg: &NoiseConfig, block: u64) -> PriceVector {
    let honest = state.marginal_price();
    if cfg.sigma == 0.0 {
        return honest;
    }
    let mut rng = cfg.block_rng(block);
    let mut c = honest.as_slice().to_vec();
    let n = c.len();
    for ci in &mut c[..n - 1] {
        let z: f64 = rng.sample(StandardNormal);
        *ci *= math::exp(cfg.sigma * z);
    }
    PriceVector::normalize(&c).expect("noise keeps prices positive")
}

/// A pool whose price reports are noisy; trade checks stay exact.
#[derive(Debug, Clone)]
pub struct NoisyOracle {
    state: PoolState,
    noise: NoiseConfig,
    block: u64,
}

impl NoisyOracle {
    pub fn new(state: PoolState, noise: NoiseConfig, block: u64) -> Result<Self> {
        noise.validate()?;
        Ok(NoisyOracle { state, noise, block })
    }

    pub fn advance_block(&mut self) {
        self.block += 1;
    }
}

impl CfmmOracle for NoisyOracle {
    fn n_assets(&self) -> usize {
        self.state.n_assets()
    }

    fn marginal_price(&mut self) -> Result<PriceVector> {
        Ok(noisy_price(&self.state, &self.noise, self.block))
    }

    fn check_trade(&mut self, trade: &Trade) -> Result<bool> {
        Ok(self.state.accepts(trade))
    }

    fn execute(&mut self, trade: &Trade) -> Result<bool> {
        match self.state.execute(trade) {
            Ok(next) => {
                self.state = next;
                Ok(true)
            }
            Err(Error::Rejected) => Ok(false),
            Err(e) => Err(e),
        }
    }
}

/// Random decoy orders executed in one batch with the user's trade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BatchConfig {
    pub decoy_count: usize,
    /// Decoy output sizes are log-uniform in this range, as a fraction of
    /// the output reserve.
    #[serde(default = "default_min_fraction")]
    pub min_fraction: f64,
    #[serde(default = "default_max_fraction")]
    pub max_fraction: f64,
}

fn default_min_fraction() -> f64 {
    1e-4
}

fn default_max_fraction() -> f64 {
    0.5
}

impl BatchConfig {
    pub fn new(decoy_count: usize) -> Self {
        BatchConfig { decoy_count, min_fraction: default_min_fraction(), max_fraction: default_max_fraction() }
    }

    pub fn validate(&self) -> Result<()> {
        check_fraction_range(self.min_fraction, self.max_fraction)
    }
}

pub(crate) fn check_fraction_range(lo: f64, hi: f64) -> Result<()> {
    if !(lo > 0.0 && lo <= hi && hi <= 0.5) {
        return Err(Error::InvalidParameter(alloc::format!(
            "trade fractions must satisfy 0 < min ≤ max ≤ 0.5, got [{lo}, {hi}]"
        )));
    }
    Ok(())
}

/// A single-in single-out swap withdrawing a log-uniform fraction of a
/// random output reserve.
pub fn random_swap<R: Rng>(state: &PoolState, min_fraction: f64, max_fraction: f64, rng: &mut R) -> Result<Trade> {
    let n = state.n_assets();
    let pair = rng.random_range(0..n * (n - 1));
    let input = pair / (n - 1);
    let mut output = pair % (n - 1);
    if output >= input {
        output += 1;
    }
    let (a, b) = (math::ln(min_fraction), math::ln(max_fraction));
    let u: f64 = rng.random();
    let fraction = math::exp(a + (b - a) * u);
    state.quote_input(output, fraction * state.reserves()[output], input)
}

/// Decoys quoted one after another starting from `state`, so that their sum
/// with the trades already applied to `state` stays feasible.
pub fn sample_decoys<R: Rng>(state: &PoolState, cfg: &BatchConfig, rng: &mut R) -> Result<Vec<Trade>> {
    cfg.validate()?;
    let mut scratch = state.clone();
    let mut decoys = Vec::with_capacity(cfg.decoy_count);
    for _ in 0..cfg.decoy_count {
        let d = random_swap(&scratch, cfg.min_fraction, cfg.max_fraction, rng)?;
        scratch = scratch.execute(&d)?;
        decoys.push(d);
    }
    Ok(decoys)
}

/// Executes the net of `trades` atomically; the whole batch is rejected if
/// the net trade is infeasible.
pub fn batch_execute(state: &PoolState, trades: &[Trade]) -> Result<(PoolState, Trade)> {
    if let Some(t) = trades.iter().find(|t| t.len() != state.n_assets()) {
        return Err(Error::Dimension { expected: state.n_assets(), got: t.len() });
    }
    let net = Trade::net(state.n_assets(), trades);
    let next = state.execute(&net)?;
    Ok((next, net))
}

/// How well the attack fares against a mitigation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrivacyReport {
    pub mitigation: Mitigation,
    pub trials: usize,
    /// Relative error of the recovered trade; `None` when at least half the
    /// attacks failed outright.
    pub median_error: Option<f64>,
    pub p90_error: Option<f64>,
    pub success_rate: f64,
    pub success_threshold: f64,
    /// Not modelled yet.
    pub arbitrage_loss: Option<f64>,
}

impl PrivacyReport {
    pub fn from_aggregate(mitigation: Mitigation, agg: &Aggregate) -> Self {
        PrivacyReport {
            mitigation,
            trials: agg.trials,
            median_error: agg.median_error,
            p90_error: agg.p90_error,
            success_rate: agg.success_rate,
            success_threshold: agg.success_threshold,
            arbitrage_loss: None,
        }
    }
}

/// Runs every trial of `scenario` in order and summarizes the attack error.
pub fn evaluate_mitigation(scenario: &ScenarioConfig) -> Result<PrivacyReport> {
    scenario.validate()?;
    let rows: Vec<_> = (0..scenario.trials).map(|i| scenario::run_trial(scenario, i)).collect::<Result<_>>()?;
    Ok(PrivacyReport::from_aggregate(scenario.mitigation, &Aggregate::from_rows(&rows)))
}
