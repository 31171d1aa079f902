//! Constant-sum pools quote the same price at every reserve level, so the
//! price carries no information. The reserves are found directly: a 1:1 swap
//! withdrawing `a` of asset `j` is accepted exactly when `a ≤ Rⱼ`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::oracle::CfmmOracle;
use crate::pool::{check_fee, Trade};

/// Doubling-then-bisection search for each reserve, to within `epsilon`.
///
/// Uses `⌈log₂ Rⱼ⌉ + ⌈log₂(Rⱼ/ε)⌉ + O(1)` trade checks per asset.
pub fn recover_reserves_constant_sum<O: CfmmOracle>(oracle: &mut O, fee: f64, epsilon: f64) -> Result<Vec<f64>> {
    check_fee(fee)?;
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::InvalidParameter("epsilon must be positive".into()));
    }
    let n = oracle.n_assets();
    (0..n)
        .map(|j| {
            let input_asset = if j == 0 { 1 } else { 0 };
            search_reserve(oracle, fee, epsilon, input_asset, j)
        })
        .collect()
}

fn withdrawal(n: usize, fee: f64, input_asset: usize, output_asset: usize, amount: f64) -> Trade {
    // pay enough that γ·input ≥ amount survives rounding
    let mut input = amount / fee;
    while fee * input < amount {
        input = input.next_up();
    }
    Trade::swap(n, input_asset, input, output_asset, amount)
}

fn search_reserve<O: CfmmOracle>(oracle: &mut O, fee: f64, epsilon: f64, input_asset: usize, j: usize) -> Result<f64> {
    let n = oracle.n_assets();
    let accepted = |o: &mut O, a: f64| o.check_trade(&withdrawal(n, fee, input_asset, j, a));

    let mut lo = 0.0;
    let mut hi = 1.0;
    while accepted(oracle, hi)? {
        lo = hi;
        hi *= 2.0;
        if !hi.is_finite() {
            return Err(Error::NoSolution("pool accepts unbounded withdrawals".into()));
        }
    }
    while hi - lo > 2.0 * epsilon {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if accepted(oracle, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo + (hi - lo) / 2.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Metered, PoolOracle};
    use crate::pool::PoolState;
    use crate::trading::TradingFunctionSpec;
    use alloc::vec;

    fn metered(r: &[f64], fee: f64) -> Metered<PoolOracle> {
        let spec = TradingFunctionSpec::constant_sum(r.len()).unwrap();
        Metered::new(PoolOracle::new(PoolState::new(spec, r.to_vec(), fee).unwrap()))
    }

    #[test]
    fn symmetric_pool() {
        let mut o = metered(&[10.0, 10.0], 1.0);
        let r = recover_reserves_constant_sum(&mut o, 1.0, 0.01).unwrap();
        assert!(r.iter().all(|x| (x - 10.0).abs() <= 0.01), "{r:?}");
        assert!(o.queries() <= 2 * (4 + 10 + 2), "{}", o.queries());
    }

    #[test]
    fn loose_tolerance() {
        let mut o = metered(&[10.0, 10.0], 1.0);
        let r = recover_reserves_constant_sum(&mut o, 1.0, 10.0).unwrap();
        assert!(r.iter().all(|x| (x - 10.0).abs() <= 10.0));
        assert!(o.queries() >= 1);
    }

    #[test]
    fn asymmetric_with_fee() {
        let mut o = metered(&[1e6, 3.0], 0.997);
        let r = recover_reserves_constant_sum(&mut o, 0.997, 1e-3).unwrap();
        assert!((r[0] - 1e6).abs() <= 1e-3 && (r[1] - 3.0).abs() <= 1e-3, "{r:?}");
        let bound = |x: f64| (x / 1e-3).log2().ceil() + x.log2().ceil().max(0.0) + 3.0;
        assert!(o.queries() as f64 <= bound(1e6) + bound(3.0), "{}", o.queries());
    }

    #[test]
    fn tiny_and_multi_asset_reserves() {
        let mut o = metered(&[0.3, 7.0, 2.5], 1.0);
        let r = recover_reserves_constant_sum(&mut o, 1.0, 1e-6).unwrap();
        for (got, want) in r.iter().zip([0.3, 7.0, 2.5]) {
            assert!((got - want).abs() <= 1e-6);
        }
        let _ = vec![0];
    }
}
