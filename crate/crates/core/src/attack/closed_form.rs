//! Two-asset constant product: the price and one trade give a linear system.

use alloc::vec;

use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::math;
use crate::pool::{PriceVector, Trade};
use crate::trading::TradingFunctionSpec;

/// Solves
///
/// ```text
/// c₁R₁ − c₂R₂ = 0
/// Δ₂R₁ + Δ₁R₂ = −Δ₁Δ₂
/// ```
///
/// for the reserves of a fee-less `√(R₁R₂)` pool. The determinant is
/// `c₁Δ₁ + c₂Δ₂ = cᵀΔ`, which is strictly positive for every nonzero feasible
/// trade.
pub fn recover_reserves_cp_closed_form(price: &PriceVector, trade: &Trade) -> Result<RecoveryResult> {
    if price.len() != 2 || trade.len() != 2 {
        return Err(Error::Dimension { expected: 2, got: if price.len() != 2 { price.len() } else { trade.len() } });
    }
    if trade.is_zero() {
        return Err(Error::ZeroTrade);
    }
    let [c1, c2] = [price.as_slice()[0], price.as_slice()[1]];
    let [d1, d2] = [trade.as_slice()[0], trade.as_slice()[1]];
    let det = c1 * d1 + c2 * d2;
    if math::abs(det) <= 1e-15 * (math::abs(c1 * d1) + math::abs(c2 * d2)) {
        return Err(Error::Singular);
    }
    let r1 = -d1 * d2 * c2 / det;
    let r2 = c1 * r1 / c2;
    if !(r1 > 0.0 && r2 > 0.0) {
        return Err(Error::NoSolution("price and trade are inconsistent with any positive reserves".into()));
    }
    let spec = TradingFunctionSpec::constant_product(2)?;
    let lambda = 1.0 / (2.0 * math::sqrt(c1 * c2));
    RecoveryResult::assess(&spec, vec![r1, r2], lambda, price, &trade.fee_adjusted(1.0), true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use approx::assert_relative_eq;

    fn price(v: &[f64]) -> PriceVector {
        PriceVector::normalize(v).unwrap()
    }

    fn trade(v: &[f64]) -> Trade {
        Trade::new(v.to_vec()).unwrap()
    }

    #[test]
    fn recovers_textbook_pool() {
        let r = recover_reserves_cp_closed_form(&price(&[2.25, 1.0]), &trade(&[2.0, -3.0])).unwrap();
        assert_relative_eq!(r.reserves[0], 4.0, max_relative = 1e-14);
        assert_relative_eq!(r.reserves[1], 9.0, max_relative = 1e-14);
        assert_relative_eq!(r.lambda, 1.0 / 3.0, max_relative = 1e-14);
        assert!(r.unique);
    }

    #[test]
    fn equal_price_pool() {
        let r = recover_reserves_cp_closed_form(&price(&[1.0, 1.0]), &trade(&[3.0, -2.0])).unwrap();
        assert_relative_eq!(r.reserves[0], 6.0, max_relative = 1e-14);
        assert_relative_eq!(r.reserves[1], 6.0, max_relative = 1e-14);
    }

    #[test]
    fn degenerate_trade_is_singular() {
        for a in [1.0, -2.5, 1e-3] {
            let out = recover_reserves_cp_closed_form(&price(&[1.0, 1.0]), &trade(&[a, -a]));
            assert_eq!(out, Err(Error::Singular));
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let p = price(&[1.0, 1.0]);
        assert_eq!(recover_reserves_cp_closed_form(&p, &Trade::zero(2)), Err(Error::ZeroTrade));
        assert!(recover_reserves_cp_closed_form(&price(&[1.0, 1.0, 1.0]), &trade(&[1.0, -1.0, 0.0])).is_err());
        // a trade that gains value for the trader at this price
        let v: Vec<f64> = vec![-3.0, 2.0];
        assert!(recover_reserves_cp_closed_form(&p, &trade(&v)).is_err());
    }
}
