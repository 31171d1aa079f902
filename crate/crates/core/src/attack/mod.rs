//! Eve's side: reconstructing hidden reserves and trades from the public
//! interface of a pool.

mod closed_form;
mod constant_sum;
mod price;
mod probe;
mod solve;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

pub use closed_form::recover_reserves_cp_closed_form;
pub use constant_sum::recover_reserves_constant_sum;
pub use price::{estimate_price_from_trades, price_from_probes};
pub use probe::{acquire_probe, boundary_trade, max_output};
pub use solve::{
    newton_full_system, price_consistent_point, price_consistent_point_newton, recover_reserves, scale_residual,
    solve_scale,
};

use crate::error::{Error, Result};
use crate::math;
use crate::oracle::CfmmOracle;
use crate::pool::{check_fee, PriceVector, Trade};
use crate::trading::{feasibility_tolerance, Family, TradingFunctionSpec};

const PRICE_RESIDUAL_REL: f64 = 1e-8;

/// Reserves recovered from a price and a trade, with the fitted multiplier
/// and how well the pair of equations is satisfied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryResult {
    pub reserves: Vec<f64>,
    pub lambda: f64,
    /// `‖∇ψ(R) − λc‖`
    pub residual_price: f64,
    /// `|ψ(R + Δ′) − ψ(R)|`
    pub residual_trade: f64,
    /// Whether the reconstruction is provably the only one.
    pub unique: bool,
}

impl RecoveryResult {
    /// Measures residuals at `reserves`, fitting `λ` by least squares when it
    /// is `NaN`, and rejects results outside tolerance.
    pub fn assess(
        spec: &TradingFunctionSpec,
        reserves: Vec<f64>,
        lambda: f64,
        price: &PriceVector,
        adjusted: &[f64],
        unique: bool,
    ) -> Result<Self> {
        spec.check_reserves(&reserves)?;
        let g = spec.gradient(&reserves)?;
        let c = price.as_slice();
        let lambda = if lambda.is_nan() { math::dot(&g, c) / math::dot(c, c) } else { lambda };
        let diff: Vec<f64> = g.iter().zip(c).map(|(gi, ci)| gi - lambda * ci).collect();
        let residual_price = math::norm(&diff);
        let residual_trade = math::abs(spec.change(&reserves, adjusted).unwrap_or(f64::INFINITY));
        if !(residual_price <= PRICE_RESIDUAL_REL * math::norm(&g)) {
            return Err(Error::Convergence { iterations: 0, residual: residual_price });
        }
        let psi = spec.eval(&reserves)?;
        if !(residual_trade <= feasibility_tolerance(psi)) {
            return Err(Error::Convergence { iterations: 0, residual: residual_trade });
        }
        Ok(RecoveryResult { reserves, lambda, residual_price, residual_trade, unique })
    }
}

/// How Eve sizes her probe trade.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProbeSettings {
    /// First input amount tried, in units of the input asset.
    pub initial_input: f64,
    pub min_impact: f64,
    pub max_impact: f64,
    pub max_rescales: usize,
}

impl Default for ProbeSettings {
    fn default() -> Self {
        ProbeSettings { initial_input: 1.0, min_impact: 0.02, max_impact: 0.2, max_rescales: 200 }
    }
}

impl ProbeSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_input.is_finite() && self.initial_input > 0.0) {
            return Err(Error::InvalidParameter("probe initial input must be positive".into()));
        }
        // the window must be wider than one rescaling step
        if !(0.0 < self.min_impact && self.min_impact * 4.0 <= self.max_impact && self.max_impact < 0.5) {
            return Err(Error::InvalidParameter("probe impact window must satisfy 0 < 4·min ≤ max < 0.5".into()));
        }
        if self.max_rescales == 0 {
            return Err(Error::InvalidParameter("probe needs at least one rescale".into()));
        }
        Ok(())
    }
}

/// What Eve knows about the pool without querying it.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicParams {
    pub spec: TradingFunctionSpec,
    pub fee: f64,
}

impl PublicParams {
    pub fn new(spec: TradingFunctionSpec, fee: f64) -> Result<Self> {
        check_fee(fee)?;
        Ok(PublicParams { spec, fee })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSettings {
    pub probe: ProbeSettings,
    /// Per-reserve accuracy of the constant-sum search.
    pub cs_epsilon: f64,
}

impl Default for AttackSettings {
    fn default() -> Self {
        AttackSettings { probe: ProbeSettings::default(), cs_epsilon: 1e-9 }
    }
}

/// Reserves of the pool behind `oracle`, from its price and one probe trade
/// (or the withdrawal search for constant-sum pools).
pub fn reconstruct_reserves<O: CfmmOracle>(
    oracle: &mut O,
    public: &PublicParams,
    settings: &AttackSettings,
) -> Result<RecoveryResult> {
    let spec = &public.spec;
    if oracle.n_assets() != spec.n_assets() {
        return Err(Error::Dimension { expected: spec.n_assets(), got: oracle.n_assets() });
    }
    if let Family::ConstantSum = spec.family() {
        let reserves = recover_reserves_constant_sum(oracle, public.fee, settings.cs_epsilon)?;
        let price = PriceVector::normalize(&spec.gradient(&reserves)?)?;
        let no_trade = alloc::vec![0.0; reserves.len()];
        return RecoveryResult::assess(spec, reserves, f64::NAN, &price, &no_trade, false);
    }
    let price = oracle.marginal_price()?;
    let probe = acquire_probe(oracle, 0, spec.n_assets() - 1, Some(&price), &settings.probe)?;
    recover_reserves(spec, &price, &probe, public.fee)
}

/// A hidden trade reconstructed from the pool before and after it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecovery {
    pub trade: Trade,
    pub before: RecoveryResult,
    pub after: RecoveryResult,
}

/// Recovers the trade that moved the pool from `before` to `after` as the
/// difference of the reconstructed reserves.
pub fn recover_trade<A: CfmmOracle, B: CfmmOracle>(
    before: &mut A,
    after: &mut B,
    public: &PublicParams,
    settings: &AttackSettings,
) -> Result<TradeRecovery> {
    let r0 = reconstruct_reserves(before, public, settings)?;
    let r1 = reconstruct_reserves(after, public, settings)?;
    let delta: Vec<f64> = r1.reserves.iter().zip(&r0.reserves).map(|(a, b)| a - b).collect();
    Ok(TradeRecovery { trade: Trade::new(delta)?, before: r0, after: r1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Metered, PoolOracle};
    use crate::pool::PoolState;
    use alloc::vec;

    fn public(spec: &TradingFunctionSpec, fee: f64) -> PublicParams {
        PublicParams::new(spec.clone(), fee).unwrap()
    }

    #[test]
    fn assess_rejects_wrong_reserves() {
        let spec = TradingFunctionSpec::constant_product(2).unwrap();
        let c = PriceVector::normalize(&[2.25, 1.0]).unwrap();
        let ok = RecoveryResult::assess(&spec, vec![4.0, 9.0], f64::NAN, &c, &[2.0, -3.0], true).unwrap();
        assert!(ok.residual_price < 1e-15 && ok.residual_trade < 1e-14);
        assert!((ok.lambda - 1.0 / 3.0).abs() < 1e-15);
        assert!(RecoveryResult::assess(&spec, vec![4.0, 10.0], f64::NAN, &c, &[2.0, -3.0], true).is_err());
        assert!(RecoveryResult::assess(&spec, vec![8.0, 18.0], f64::NAN, &c, &[2.0, -3.0], true).is_err());
    }

    #[test]
    fn probe_settings_validation() {
        assert!(ProbeSettings::default().validate().is_ok());
        let bad = ProbeSettings { min_impact: 0.1, max_impact: 0.2, ..ProbeSettings::default() };
        assert!(bad.validate().is_err());
        let bad = ProbeSettings { initial_input: -1.0, ..ProbeSettings::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn recovers_alice_trade() {
        let spec = TradingFunctionSpec::constant_product(2).unwrap();
        let before = PoolState::new(spec.clone(), vec![100.0, 100.0], 1.0).unwrap();
        let alice = Trade::new(vec![10.0, -100.0 / 11.0]).unwrap();
        let after = before.execute(&alice).unwrap();
        let out = recover_trade(
            &mut PoolOracle::new(before),
            &mut PoolOracle::new(after),
            &public(&spec, 1.0),
            &AttackSettings::default(),
        )
        .unwrap();
        for (a, b) in out.trade.as_slice().iter().zip(alice.as_slice()) {
            assert!((a - b).abs() < 1e-8, "{:?}", out.trade);
        }
    }

    #[test]
    fn zero_trade_is_recovered_as_zero() {
        let spec = TradingFunctionSpec::constant_mean(vec![0.8, 0.2]).unwrap();
        let state = PoolState::new(spec.clone(), vec![3.0, 40.0], 0.997).unwrap();
        let out = recover_trade(
            &mut PoolOracle::new(state.clone()),
            &mut PoolOracle::new(state),
            &public(&spec, 0.997),
            &AttackSettings::default(),
        )
        .unwrap();
        assert!(out.trade.as_slice().iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn constant_sum_dispatches_to_search() {
        let spec = TradingFunctionSpec::constant_sum(2).unwrap();
        let state = PoolState::new(spec.clone(), vec![10.0, 10.0], 1.0).unwrap();
        let mut o = Metered::new(PoolOracle::new(state));
        let settings = AttackSettings { cs_epsilon: 0.01, ..AttackSettings::default() };
        let r = reconstruct_reserves(&mut o, &public(&spec, 1.0), &settings).unwrap();
        assert!(r.reserves.iter().all(|x| (x - 10.0).abs() <= 0.01));
        assert!(!r.unique);
    }

    #[test]
    fn dimension_mismatch() {
        let spec = TradingFunctionSpec::constant_product(3).unwrap();
        let state = PoolState::new(TradingFunctionSpec::constant_product(2).unwrap(), vec![1.0, 1.0], 1.0).unwrap();
        let out = reconstruct_reserves(&mut PoolOracle::new(state), &public(&spec, 1.0), &AttackSettings::default());
        assert!(matches!(out, Err(Error::Dimension { .. })));
    }
}
