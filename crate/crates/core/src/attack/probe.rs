//! Building feasible trades from yes/no answers.
//!
//! The attacker only learns whether a pool would accept a trade. Acceptance
//! is monotone in the requested output for a fixed input, so the largest
//! acceptable output is found by doubling and then bisecting down to
//! adjacent floats. That trade sits on the boundary `ψ(R + Δ′) = ψ(R)`.

use super::ProbeSettings;
use crate::error::{Error, Result};
use crate::oracle::CfmmOracle;
use crate::pool::{PriceVector, Trade};

const MAX_EXPANSIONS: usize = 2200;

/// The largest output of `output_asset` the pool gives for `input` of
/// `input_asset`. `hint` is a starting guess for the upper end.
pub fn max_output<O: CfmmOracle>(
    oracle: &mut O,
    input_asset: usize,
    input: f64,
    output_asset: usize,
    hint: Option<f64>,
) -> Result<f64> {
    let n = oracle.n_assets();
    if !(input.is_finite() && input > 0.0) {
        return Err(Error::InvalidParameter("probe input must be positive".into()));
    }
    let check = |o: &mut O, out: f64| o.check_trade(&Trade::swap(n, input_asset, input, output_asset, out));

    let mut hi = hint.filter(|h| h.is_finite() && *h > 0.0).unwrap_or(input);
    let mut lo = 0.0;
    if check(oracle, hi)? {
        let mut expansions = 0;
        loop {
            lo = hi;
            hi *= 2.0;
            expansions += 1;
            if expansions > MAX_EXPANSIONS || !hi.is_finite() {
                return Err(Error::NoSolution("pool accepts unbounded output".into()));
            }
            if !check(oracle, hi)? {
                break;
            }
        }
    } else {
        let mut shrinks = 0;
        loop {
            let mid = hi / 2.0;
            shrinks += 1;
            if mid == 0.0 || shrinks > MAX_EXPANSIONS {
                break;
            }
            if check(oracle, mid)? {
                lo = mid;
                break;
            }
            hi = mid;
        }
    }
    loop {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        if check(oracle, mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// A boundary trade of exactly `input` of `input_asset` for the largest
/// acceptable amount of `output_asset`.
pub fn boundary_trade<O: CfmmOracle>(
    oracle: &mut O,
    input_asset: usize,
    input: f64,
    output_asset: usize,
    hint: Option<f64>,
) -> Result<Trade> {
    let out = max_output(oracle, input_asset, input, output_asset, hint)?;
    Ok(Trade::swap(oracle.n_assets(), input_asset, input, output_asset, out))
}

/// A boundary trade sized for a well-conditioned scale equation.
///
/// Rounding in the trade feeds into the recovered reserves amplified by
/// roughly `(R / Δ)²`, so tiny probes are useless. The input is rescaled by
/// factors of 4 until the price impact `1 − o(2s) / 2o(s)` lies inside
/// `[min_impact, max_impact]`, which needs no knowledge of the reserves.
pub fn acquire_probe<O: CfmmOracle>(
    oracle: &mut O,
    input_asset: usize,
    output_asset: usize,
    price: Option<&PriceVector>,
    settings: &ProbeSettings,
) -> Result<Trade> {
    settings.validate()?;
    let rate = price.map(|c| c.as_slice()[input_asset] / c.as_slice()[output_asset]);
    let mut s = settings.initial_input;
    let mut last_impact = f64::NAN;
    for _ in 0..settings.max_rescales {
        let o1 = max_output(oracle, input_asset, s, output_asset, rate.map(|r| r * s))?;
        if o1 == 0.0 {
            s *= 4.0;
            continue;
        }
        let o2 = max_output(oracle, input_asset, 2.0 * s, output_asset, Some(2.0 * o1))?;
        let impact = 1.0 - o2 / (2.0 * o1);
        last_impact = impact;
        if impact < settings.min_impact {
            s *= 4.0;
        } else if impact > settings.max_impact {
            s /= 4.0;
        } else {
            return Ok(Trade::swap(oracle.n_assets(), input_asset, s, output_asset, o1));
        }
        if !(s.is_finite() && s > 0.0) {
            break;
        }
    }
    Err(Error::Convergence { iterations: settings.max_rescales, residual: last_impact })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{Metered, PoolOracle};
    use crate::pool::PoolState;
    use crate::trading::TradingFunctionSpec;
    use alloc::vec;
    use approx::assert_relative_eq;

    fn oracle(r: [f64; 2], fee: f64) -> PoolOracle {
        let spec = TradingFunctionSpec::constant_product(2).unwrap();
        PoolOracle::new(PoolState::new(spec, r.to_vec(), fee).unwrap())
    }

    #[test]
    fn max_output_matches_quote() {
        for hint in [None, Some(1e-9), Some(1e9)] {
            let mut o = oracle([4.0, 9.0], 1.0);
            let out = max_output(&mut o, 0, 2.0, 1, hint).unwrap();
            assert_relative_eq!(out, 3.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn boundary_trade_is_feasible() {
        let state = PoolState::new(TradingFunctionSpec::constant_product(2).unwrap(), vec![123.0, 4.5], 0.997).unwrap();
        let mut o = PoolOracle::new(state.clone());
        let d = boundary_trade(&mut o, 1, 0.3, 0, None).unwrap();
        assert!(state.is_feasible(&d));
        assert!(state.residual(&d).unwrap().abs() < 1e-13 * state.psi());
    }

    #[test]
    fn adaptive_probe_lands_in_window() {
        let settings = ProbeSettings::default();
        for r in [[1.0, 1.0], [1e6, 3.0], [2.0, 8e5]] {
            let mut o = Metered::new(oracle(r, 1.0));
            let d = acquire_probe(&mut o, 0, 1, None, &settings).unwrap();
            let frac = d.as_slice()[0] / r[0];
            // for constant product the impact is about s / R_in
            assert!(frac > 0.01 && frac < 0.4, "{frac}");
            assert!(o.queries() < 5000);
        }
    }
}
