//! Estimating the marginal price when only trade checks are available.
//!
//! Every feasible trade `Δⁱ` satisfies `cᵀΔⁱ ≥ 0` by concavity, strictly for
//! strictly concave ψ. The canonical estimate is the solution of
//!
//! ```text
//! minimize Σcᵢ   subject to   cᵀΔⁱ ≥ 1,  c ≥ 0
//! ```
//!
//! which is solved here in the equivalent normalized form
//! `maximize t  s.t.  cᵀΔⁱ ≥ t, Σcᵢ = 1, c ≥ 0`. The two agree (up to
//! scale) whenever the first is feasible; the second stays well posed when
//! the optimal margin is zero, as for constant-sum pools.

use alloc::vec;
use alloc::vec::Vec;

use super::probe::boundary_trade;
use crate::error::{Error, Result};
use crate::linalg;
use crate::lp::{self, Constraint, Relation};
use crate::math;
use crate::oracle::CfmmOracle;
use crate::pool::{PriceVector, Trade};

/// The price direction best supported by a set of feasible probe trades.
pub fn price_from_probes(probes: &[Trade]) -> Result<PriceVector> {
    let Some(first) = probes.first() else {
        return Err(Error::DegenerateProbes { rank: 0, required: 1 });
    };
    let n = first.len();
    if let Some(p) = probes.iter().find(|p| p.len() != n) {
        return Err(Error::Dimension { expected: n, got: p.len() });
    }
    let flat: Vec<f64> = probes.iter().flat_map(|p| p.as_slice().iter().copied()).collect();
    let rank = linalg::rank(&flat, probes.len(), n, 1e-12);
    if rank + 1 < n {
        return Err(Error::DegenerateProbes { rank, required: n - 1 });
    }
    let scale = flat.iter().fold(0.0_f64, |m, v| m.max(math::abs(*v)));

    // variables: c₀..cₙ₋₁ and the shifted margin t + 1, which is nonnegative
    // at the optimum because |Δ/scale| ≤ 1 and Σc = 1
    let mut constraints: Vec<Constraint> = probes
        .iter()
        .map(|p| {
            let mut row: Vec<f64> = p.as_slice().iter().map(|d| d / scale).collect();
            row.push(-1.0);
            Constraint::new(row, Relation::Ge, -1.0)
        })
        .collect();
    let mut simplex = vec![1.0; n];
    simplex.push(0.0);
    constraints.push(Constraint::new(simplex, Relation::Eq, 1.0));
    let mut objective = vec![0.0; n];
    objective.push(-1.0);

    let sol = lp::minimize(&objective, &constraints)?;
    PriceVector::normalize(&sol.x[..n]).map_err(|_| Error::InfeasibleLp)
}

/// Probe directions: asset `i` for the numéraire for every `i < n−1`, and
/// the numéraire for asset 0.
fn probe_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut pairs: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, n - 1)).collect();
    pairs.push((n - 1, 0));
    pairs
}

/// Builds `n` boundary trades with input `probe_size` and solves for the
/// price direction. The error shrinks linearly with `probe_size`.
pub fn estimate_price_from_trades<O: CfmmOracle>(oracle: &mut O, probe_size: f64) -> Result<PriceVector> {
    if !(probe_size.is_finite() && probe_size > 0.0) {
        return Err(Error::InvalidParameter("probe size must be positive".into()));
    }
    let n = oracle.n_assets();
    let probes = probe_pairs(n)
        .into_iter()
        .map(|(i, j)| boundary_trade(oracle, i, probe_size, j, None))
        .collect::<Result<Vec<_>>>()?;
    price_from_probes(&probes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::PoolOracle;
    use crate::pool::PoolState;
    use crate::trading::TradingFunctionSpec;
    use approx::assert_relative_eq;

    fn oracle(spec: TradingFunctionSpec, r: &[f64]) -> PoolOracle {
        PoolOracle::new(PoolState::new(spec, r.to_vec(), 1.0).unwrap())
    }

    #[test]
    fn constant_product_small_probes() {
        let mut o = oracle(TradingFunctionSpec::constant_product(2).unwrap(), &[4.0, 9.0]);
        let c = estimate_price_from_trades(&mut o, 1e-4).unwrap();
        assert_relative_eq!(c.as_slice()[0], 2.25, max_relative = 1e-3);
        assert_eq!(c.as_slice()[1], 1.0);
    }

    #[test]
    fn constant_sum_is_exact() {
        for size in [1e-4, 0.1, 3.0] {
            let mut o = oracle(TradingFunctionSpec::constant_sum(2).unwrap(), &[10.0, 10.0]);
            let c = estimate_price_from_trades(&mut o, size).unwrap();
            assert_relative_eq!(c.as_slice()[0], 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn three_assets() {
        let spec = TradingFunctionSpec::constant_mean(vec![0.5, 0.3, 0.2]).unwrap();
        let state = PoolState::new(spec, vec![10.0, 20.0, 5.0], 1.0).unwrap();
        let truth = state.marginal_price();
        let mut o = PoolOracle::new(state);
        let c = estimate_price_from_trades(&mut o, 1e-5).unwrap();
        assert!(c.max_rel_diff(&truth) < 1e-4, "{c:?} vs {truth:?}");
    }

    #[test]
    fn degenerate_probes() {
        let p = Trade::new(vec![1.0, -1.0, 0.0]).unwrap();
        let out = price_from_probes(&[p.clone(), p.clone(), p]);
        assert_eq!(out, Err(Error::DegenerateProbes { rank: 1, required: 2 }));
        assert!(price_from_probes(&[]).is_err());
    }

    #[test]
    fn rejects_bad_probe_size() {
        let mut o = oracle(TradingFunctionSpec::constant_product(2).unwrap(), &[4.0, 9.0]);
        assert!(estimate_price_from_trades(&mut o, 0.0).is_err());
    }
}
