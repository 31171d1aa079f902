//! The attacker's view of a pool.
//!
//! An oracle answers price queries and trade checks against hidden reserves;
//! nothing in [`CfmmOracle`] exposes the reserves themselves.

use crate::error::{Error, Result};
use crate::pool::{PoolState, PriceVector, Trade};

pub trait CfmmOracle {
    fn n_assets(&self) -> usize;

    fn marginal_price(&mut self) -> Result<PriceVector>;

    /// Whether the pool would accept `trade` right now: `R + Δ ≥ 0` and the
    /// fee-adjusted trade does not lower ψ.
    fn check_trade(&mut self, trade: &Trade) -> Result<bool>;

    /// Submits `trade`; returns whether it was accepted and applied.
    fn execute(&mut self, trade: &Trade) -> Result<bool>;
}

impl<O: CfmmOracle + ?Sized> CfmmOracle for &mut O {
    fn n_assets(&self) -> usize {
        (**self).n_assets()
    }

    fn marginal_price(&mut self) -> Result<PriceVector> {
        (**self).marginal_price()
    }

    fn check_trade(&mut self, trade: &Trade) -> Result<bool> {
        (**self).check_trade(trade)
    }

    fn execute(&mut self, trade: &Trade) -> Result<bool> {
        (**self).execute(trade)
    }
}

/// Answers truthfully from a hidden [`PoolState`].
#[derive(Debug, Clone)]
pub struct PoolOracle {
    state: PoolState,
}

impl PoolOracle {
    pub fn new(state: PoolState) -> Self {
        Self { state }
    }

    /// Ends the attacker session and hands back the hidden state.
    pub fn into_state(self) -> PoolState {
        self.state
    }
}

impl CfmmOracle for PoolOracle {
    fn n_assets(&self) -> usize {
        self.state.n_assets()
    }

    fn marginal_price(&mut self) -> Result<PriceVector> {
        Ok(self.state.marginal_price())
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

/// Counts queries and enforces an optional budget.
#[derive(Debug, Clone)]
pub struct Metered<O> {
    inner: O,
    queries: u64,
    budget: Option<u64>,
}

impl<O: CfmmOracle> Metered<O> {
    pub fn new(inner: O) -> Self {
        Self { inner, queries: 0, budget: None }
    }

    pub fn with_budget(inner: O, budget: u64) -> Self {
        Self { inner, queries: 0, budget: Some(budget) }
    }

    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn into_inner(self) -> O {
        self.inner
    }

    fn tick(&mut self) -> Result<()> {
        if let Some(b) = self.budget {
            if self.queries >= b {
                return Err(Error::QueryBudget(b));
            }
        }
        self.queries += 1;
        Ok(())
    }
}

impl<O: CfmmOracle> CfmmOracle for Metered<O> {
    fn n_assets(&self) -> usize {
        self.inner.n_assets()
    }

    fn marginal_price(&mut self) -> Result<PriceVector> {
        self.tick()?;
        self.inner.marginal_price()
    }

    fn check_trade(&mut self, trade: &Trade) -> Result<bool> {
        self.tick()?;
        self.inner.check_trade(trade)
    }

    fn execute(&mut self, trade: &Trade) -> Result<bool> {
        self.tick()?;
        self.inner.execute(trade)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trading::TradingFunctionSpec;
    use alloc::vec;

    fn oracle() -> PoolOracle {
        let spec = TradingFunctionSpec::constant_product(2).unwrap();
        PoolOracle::new(PoolState::new(spec, vec![4.0, 9.0], 1.0).unwrap())
    }

    #[test]
    fn answers_consistently() {
        let mut o = oracle();
        let t = Trade::new(vec![2.0, -3.0]).unwrap();
        assert!(o.check_trade(&t).unwrap());
        assert_eq!(o.marginal_price().unwrap(), o.marginal_price().unwrap());
        assert!(o.execute(&t).unwrap());
        assert_eq!(o.clone().into_state().reserves(), &[6.0, 6.0]);
        assert!(!o.execute(&Trade::new(vec![1.0, -5.0]).unwrap()).unwrap());
        assert_eq!(o.into_state().reserves(), &[6.0, 6.0]);
    }

    #[test]
    fn metering_counts_and_limits() {
        let mut m = Metered::with_budget(oracle(), 2);
        m.marginal_price().unwrap();
        m.check_trade(&Trade::zero(2)).unwrap();
        assert_eq!(m.queries(), 2);
        assert_eq!(m.marginal_price(), Err(Error::QueryBudget(2)));
    }
}
