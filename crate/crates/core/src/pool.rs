//! Pool state, trades, marginal prices and the trade acceptance rules.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::roots;
use crate::trading::{feasibility_tolerance, TradingFunctionSpec};

/// A signed trade vector: positive entries are tendered to the pool, negative
/// entries are withdrawn from it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Trade(Vec<f64>);

impl Trade {
    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.iter().any(|d| !d.is_finite()) {
            return Err(Error::InvalidParameter("trade components must be finite".into()));
        }
        Ok(Self(delta))
    }

    pub fn zero(n_assets: usize) -> Self {
        Self(vec![0.0; n_assets])
    }

    /// A single-in/single-out trade.
    pub fn swap(n_assets: usize, input_asset: usize, input: f64, output_asset: usize, output: f64) -> Self {
        let mut d = vec![0.0; n_assets];
        d[input_asset] = input;
        d[output_asset] = -output;
        Self(d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|d| *d == 0.0)
    }

    /// `γΔ₊ − Δ₋`: the trade as seen by the trading function after fees.
    pub fn fee_adjusted(&self, fee: f64) -> Vec<f64> {
        self.0.iter().map(|d| if *d > 0.0 { fee * d } else { *d }).collect()
    }

    pub fn norm(&self) -> f64 {
        math::norm(&self.0)
    }

    /// Componentwise sum of a batch of trades.
    pub fn net<'a, I>(n_assets: usize, trades: I) -> Self
    where
        I: IntoIterator<Item = &'a Trade>,
    {
        let mut net = vec![0.0; n_assets];
        for t in trades {
            for (acc, d) in net.iter_mut().zip(&t.0) {
                *acc += d;
            }
        }
        Self(net)
    }
}

impl TryFrom<Vec<f64>> for Trade {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Trade> for Vec<f64> {
    fn from(t: Trade) -> Self {
        t.0
    }
}

/// A marginal price vector, normalized so the last asset is the numéraire.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    /// Normalizes any strictly positive direction.
    pub fn normalize(raw: &[f64]) -> Result<Self> {
        if raw.len() < 2 {
            return Err(Error::InvalidParameter(format!("price needs at least 2 components, got {}", raw.len())));
        }
        if let Some(i) = raw.iter().position(|c| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::InvalidParameter(format!("price component {i} must be positive, got {}", raw[i])));
        }
        let last = raw[raw.len() - 1];
        let mut v: Vec<f64> = raw.iter().map(|c| c / last).collect();
        *v.last_mut().unwrap() = 1.0;
        Ok(Self(v))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Largest componentwise relative deviation from `other`.
    pub fn max_rel_diff(&self, other: &PriceVector) -> f64 {
        math::max_rel_diff(&self.0, &other.0)
    }
}

impl TryFrom<Vec<f64>> for PriceVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::normalize(&v)
    }
}

impl From<PriceVector> for Vec<f64> {
    fn from(p: PriceVector) -> Self {
        p.0
    }
}

/// Reserves plus fee parameter of a pool with a known trading function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoolRepr", into = "PoolRepr")]
pub struct PoolState {
    spec: TradingFunctionSpec,
    reserves: Vec<f64>,
    fee: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoolRepr {
    spec: TradingFunctionSpec,
    reserves: Vec<f64>,
    #[serde(default = "fee_less")]
    fee: f64,
}

fn fee_less() -> f64 {
    1.0
}

impl TryFrom<PoolRepr> for PoolState {
    type Error = Error;

    fn try_from(r: PoolRepr) -> Result<Self> {
        Self::new(r.spec, r.reserves, r.fee)
    }
}

impl From<PoolState> for PoolRepr {
    fn from(s: PoolState) -> Self {
        PoolRepr { spec: s.spec, reserves: s.reserves, fee: s.fee }
    }
}

pub fn check_fee(fee: f64) -> Result<()> {
    if !(fee > 0.0 && fee <= 1.0) {
        return Err(Error::InvalidParameter(format!("fee parameter must lie in (0, 1], got {fee}")));
    }
    Ok(())
}

impl PoolState {
    pub fn new(spec: TradingFunctionSpec, reserves: Vec<f64>, fee: f64) -> Result<Self> {
        spec.check_reserves(&reserves)?;
        check_fee(fee)?;
        Ok(Self { spec, reserves, fee })
    }

    pub fn spec(&self) -> &TradingFunctionSpec {
        &self.spec
    }

    pub fn reserves(&self) -> &[f64] {
        &self.reserves
    }

    pub fn fee(&self) -> f64 {
        self.fee
    }

    pub fn n_assets(&self) -> usize {
        self.reserves.len()
    }

    pub fn psi(&self) -> f64 {
        self.spec.eval(&self.reserves).expect("pool reserves are validated")
    }

    pub fn tolerance(&self) -> f64 {
        feasibility_tolerance(self.psi())
    }

    /// ∇ψ(R) rescaled so the numéraire component is 1.
    pub fn marginal_price(&self) -> PriceVector {
        let g = self.spec.gradient(&self.reserves).expect("pool reserves are validated");
        PriceVector::normalize(&g).expect("trading functions are increasing")
    }

    /// ψ(R + γΔ₊ − Δ₋) − ψ(R), or `None` when `R + Δ ≱ 0` or the adjusted
    /// point leaves the domain of ψ.
    pub fn residual(&self, trade: &Trade) -> Option<f64> {
        if trade.len() != self.n_assets() {
            return None;
        }
        if self.reserves.iter().zip(trade.as_slice()).any(|(r, d)| !(r + d >= 0.0)) {
            return None;
        }
        self.spec.change(&self.reserves, &trade.fee_adjusted(self.fee)).ok()
    }

    /// The two-sided acceptance check |ψ(R + γΔ₊ − Δ₋) − ψ(R)| ≤ tol.
    pub fn is_feasible(&self, trade: &Trade) -> bool {
        match self.residual(trade) {
            Some(r) => math::abs(r) <= self.tolerance(),
            None => false,
        }
    }

    /// The one-sided rule deployed pools enforce: the trade may not lower ψ.
    /// Agrees with [`is_feasible`](Self::is_feasible) at the boundary, and is
    /// monotone in the requested output, which makes it searchable.
    pub fn accepts(&self, trade: &Trade) -> bool {
        matches!(self.residual(trade), Some(r) if r >= 0.0)
    }

    /// Applies a feasible trade. Tendered amounts are credited in full, so
    /// fees stay in the pool.
    pub fn execute(&self, trade: &Trade) -> Result<PoolState> {
        if !self.is_feasible(trade) {
            return Err(Error::Rejected);
        }
        let reserves: Vec<f64> = self.reserves.iter().zip(trade.as_slice()).map(|(r, d)| r + d).collect();
        if reserves.iter().any(|r| *r <= 0.0) {
            // the domain is the open orthant; draining a reserve is not representable
            return Err(Error::Rejected);
        }
        Ok(PoolState { spec: self.spec.clone(), reserves, fee: self.fee })
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        let n = self.n_assets();
        if a >= n || b >= n || a == b {
            return Err(Error::InvalidParameter(format!("need two distinct asset indices below {n}, got {a} and {b}")));
        }
        Ok(())
    }

    /// The feasible swap paying exactly `input_amount` of `input_asset`,
    /// solved by bisection on the output amount over `[0, R_out)`.
    pub fn quote_output(&self, input_asset: usize, input_amount: f64, output_asset: usize) -> Result<Trade> {
        self.check_pair(input_asset, output_asset)?;
        if !(input_amount.is_finite() && input_amount > 0.0) {
            return Err(Error::InvalidParameter(format!("input amount must be positive, got {input_amount}")));
        }
        let n = self.n_assets();
        let r_out = self.reserves[output_asset];
        let residual = |out: f64| {
            self.residual(&Trade::swap(n, input_asset, input_amount, output_asset, out))
                .filter(|_| out < r_out)
                .unwrap_or(f64::NAN)
        };
        // residual decreases in the output: positive at 0, invalid at R_out
        let root = roots::bisect(residual, r_out, 0.0, 0.0, 2000);
        self.finish_quote(Trade::swap(n, input_asset, input_amount, output_asset, root.x))
    }

    /// The feasible swap withdrawing exactly `output_amount` of
    /// `output_asset`, solved by bisection on the input amount.
    pub fn quote_input(&self, output_asset: usize, output_amount: f64, input_asset: usize) -> Result<Trade> {
        self.check_pair(input_asset, output_asset)?;
        if !(output_amount.is_finite() && output_amount > 0.0) {
            return Err(Error::InvalidParameter(format!("output amount must be positive, got {output_amount}")));
        }
        if output_amount >= self.reserves[output_asset] {
            return Err(Error::NoSolution(format!(
                "output {output_amount} exceeds the reserve of asset {output_asset}"
            )));
        }
        let n = self.n_assets();
        let residual = |inp: f64| {
            self.residual(&Trade::swap(n, input_asset, inp, output_asset, output_amount)).unwrap_or(f64::NAN)
        };
        let mut hi = output_amount;
        let mut doublings = 0;
        while !(residual(hi) >= 0.0) {
            hi *= 2.0;
            doublings += 1;
            if doublings > 2000 || !hi.is_finite() {
                return Err(Error::NoSolution("no finite input reaches the requested output".into()));
            }
        }
        let root = roots::bisect(residual, 0.0, hi, 0.0, 2000);
        self.finish_quote(Trade::swap(n, input_asset, root.x, output_asset, output_amount))
    }

    fn finish_quote(&self, trade: Trade) -> Result<Trade> {
        if self.is_feasible(&trade) {
            Ok(trade)
        } else {
            Err(Error::NoSolution("the requested swap cannot be filled from current reserves".into()))
        }
    }
}
