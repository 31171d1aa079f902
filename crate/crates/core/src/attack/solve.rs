//! Reserve reconstruction from a marginal price and one feasible trade.
//!
//! For homogeneous trading functions the price pins the reserves to a ray
//! `{k·R⁰ : k > 0}` and the trade pins the scale `k`; the scale equation
//! `ψ(kR⁰ + Δ) = ψ(kR⁰)` is negative below its root and positive above it,
//! so a bracketing search finds the only solution. Non-homogeneous functions
//! fall back to Newton on the full system, with no uniqueness guarantee.

use alloc::vec;
use alloc::vec::Vec;

use super::RecoveryResult;
use crate::error::{Error, Result};
use crate::math;
use crate::newton::{self, NewtonOptions};
use crate::pool::{check_fee, PriceVector, Trade};
use crate::roots;
use crate::trading::{feasibility_tolerance, Family, TradingFunctionSpec};

const SCALE_LO: f64 = 1e-12;
const SCALE_HI: f64 = 1e12;
const SCALE_REL_WIDTH: f64 = 1e-14;
const PRICE_POINT_TOL: f64 = 1e-10;

fn check_price(spec: &TradingFunctionSpec, price: &PriceVector) -> Result<()> {
    if price.len() != spec.n_assets() {
        return Err(Error::Dimension { expected: spec.n_assets(), got: price.len() });
    }
    Ok(())
}

/// One point `R⁰` with `∇ψ(R⁰) ∥ c` and `ψ(R⁰) = 1`.
///
/// Geometric-mean families have the closed form `R⁰ᵢ ∝ wᵢ / cᵢ`; any other
/// homogeneous family goes through [`price_consistent_point_newton`].
pub fn price_consistent_point(spec: &TradingFunctionSpec, price: &PriceVector) -> Result<Vec<f64>> {
    check_price(spec, price)?;
    let p = spec.homogeneity_degree().ok_or_else(|| {
        Error::InvalidParameter("price-consistent rays exist only for homogeneous trading functions".into())
    })?;
    let n = spec.n_assets();
    match spec.family() {
        Family::ConstantSum => Err(Error::Inapplicable("constant-sum")),
        Family::ConstantProduct | Family::ConstantMean { .. } => {
            let direction: Vec<f64> = (0..n)
                .map(|i| {
                    let w = match spec.family() {
                        Family::ConstantMean { weights } => weights[i],
                        _ => 1.0 / n as f64,
                    };
                    w / price.as_slice()[i]
                })
                .collect();
            let scale = math::powf(spec.eval(&direction)?, -1.0 / p);
            Ok(direction.iter().map(|x| x * scale).collect())
        }
        Family::CurveLike { .. } => unreachable!("curve-like has no degree"),
    }
}

/// Solves `∇ψ(R) = λc`, `ψ(R) = level` by damped Newton in `(ln R, ln λ)`,
/// starting from `start` (or the all-equal point at that level).
pub fn price_consistent_point_newton(
    spec: &TradingFunctionSpec,
    price: &PriceVector,
    level: f64,
    start: Option<&[f64]>,
) -> Result<Vec<f64>> {
    check_price(spec, price)?;
    if !spec.is_strictly_quasiconcave() {
        return Err(Error::Inapplicable("constant-sum"));
    }
    let n = spec.n_assets();
    let r0: Vec<f64> = match start {
        Some(s) => {
            spec.check_reserves(s)?;
            s.to_vec()
        }
        None => vec![equal_point_at_level(spec, level)?; n],
    };
    let c = price.as_slice();
    let g0 = spec.gradient(&r0)?;
    let lambda0 = math::dot(&g0, c) / math::dot(c, c);
    let level_scale = math::abs(level).max(math::abs(spec.eval(&r0)?)).max(math::dot(&g0, &r0)).max(f64::MIN_POSITIVE);

    let mut system = |x: &[f64]| -> Option<(Vec<f64>, Vec<f64>)> {
        let r: Vec<f64> = x[..n].iter().map(|u| math::exp(*u)).collect();
        let lambda = math::exp(x[n]);
        let psi = spec.eval(&r).ok()?;
        let g = spec.gradient(&r).ok()?;
        let h = spec.hessian(&r).ok()?;
        let m = n + 1;
        let mut f = vec![0.0; m];
        let mut j = vec![0.0; m * m];
        for i in 0..n {
            let denom = lambda * c[i];
            f[i] = g[i] / denom - 1.0;
            for k in 0..n {
                j[i * m + k] = h[i * n + k] * r[k] / denom;
            }
            j[i * m + n] = -g[i] / denom;
        }
        f[n] = (psi - level) / level_scale;
        for k in 0..n {
            j[n * m + k] = g[k] * r[k] / level_scale;
        }
        Some((f, j))
    };
    let mut x0: Vec<f64> = r0.iter().map(|r| math::ln(*r)).collect();
    x0.push(math::ln(lambda0));
    let opts = NewtonOptions { tol: PRICE_POINT_TOL * 1e-2, ..NewtonOptions::default() };
    let out = newton::solve(&mut system, &x0, opts)?;
    if out.residual > PRICE_POINT_TOL {
        return Err(Error::Convergence { iterations: out.iterations, residual: out.residual });
    }
    Ok(out.x[..n].iter().map(|u| math::exp(*u)).collect())
}

/// `t` with `ψ(t·1) = level`, by bracketing along the all-equal ray.
fn equal_point_at_level(spec: &TradingFunctionSpec, level: f64) -> Result<f64> {
    let n = spec.n_assets();
    let f = |t: f64| spec.eval(&vec![t; n]).map(|v| v - level).unwrap_or(f64::NAN);
    let (neg, pos) = roots::bracket_geometric(f, 1.0, 2.0, 1e-150, 1e150)?;
    Ok(roots::bisect(f, neg, pos, 1e-15, 400).x)
}

/// The scale `k > 0` with `ψ(kR⁰ + Δ′) = ψ(kR⁰)`, `Δ′ = γΔ₊ − Δ₋`.
///
/// Brackets from `k = 1` by factors of 2 within `[1e-12, 1e12]` and bisects
/// to a relative width of `1e-14`. Scales where `kR⁰ + Δ′` leaves the
/// orthant count as the negative side.
pub fn solve_scale(spec: &TradingFunctionSpec, ray_point: &[f64], trade: &Trade, fee: f64) -> Result<f64> {
    spec.check_reserves(ray_point)?;
    check_fee(fee)?;
    if trade.len() != spec.n_assets() {
        return Err(Error::Dimension { expected: spec.n_assets(), got: trade.len() });
    }
    if trade.is_zero() {
        return Err(Error::ZeroTrade);
    }
    let adjusted = trade.fee_adjusted(fee);
    let g = |k: f64| scale_residual(spec, ray_point, &adjusted, k);
    if g(1.0) == 0.0 {
        return Ok(1.0);
    }
    let (neg, pos) = roots::bracket_geometric(g, 1.0, 2.0, SCALE_LO, SCALE_HI)?;
    let root = roots::bisect(g, neg, pos, SCALE_REL_WIDTH, 400);
    let k = root.x;
    let scaled: Vec<f64> = ray_point.iter().map(|r| k * r).collect();
    let psi = spec.eval(&scaled)?;
    if !(math::abs(root.fx) <= feasibility_tolerance(psi)) {
        return Err(Error::Convergence { iterations: root.iterations, residual: root.fx });
    }
    Ok(k)
}

/// `g(k) = ψ(kR⁰ + Δ′) − ψ(kR⁰)`, `NaN` outside the domain.
pub fn scale_residual(spec: &TradingFunctionSpec, ray_point: &[f64], adjusted: &[f64], k: f64) -> f64 {
    let scaled: Vec<f64> = ray_point.iter().map(|r| k * r).collect();
    spec.change(&scaled, adjusted).unwrap_or(f64::NAN)
}

/// Reconstructs hidden reserves from the marginal price `c` and one nonzero
/// feasible trade `Δ` on a pool with fee `γ`.
pub fn recover_reserves(spec: &TradingFunctionSpec, price: &PriceVector, trade: &Trade, fee: f64) -> Result<RecoveryResult> {
    check_price(spec, price)?;
    check_fee(fee)?;
    if trade.len() != spec.n_assets() {
        return Err(Error::Dimension { expected: spec.n_assets(), got: trade.len() });
    }
    if trade.is_zero() {
        return Err(Error::ZeroTrade);
    }
    if !spec.is_strictly_quasiconcave() {
        return Err(Error::Inapplicable("constant-sum"));
    }
    let adjusted = trade.fee_adjusted(fee);
    match spec.homogeneity_degree() {
        Some(_) => {
            let ray = price_consistent_point(spec, price)?;
            let k = solve_scale(spec, &ray, trade, fee)?;
            let reserves: Vec<f64> = ray.iter().map(|r| k * r).collect();
            RecoveryResult::assess(spec, reserves, f64::NAN, price, &adjusted, true)
        }
        None => {
            let reserves = newton_full_system(spec, price, &adjusted)?;
            RecoveryResult::assess(spec, reserves, f64::NAN, price, &adjusted, false)
        }
    }
}

/// Newton on `∇ψ(R) = λc, ψ(R + Δ′) = ψ(R)` for trading functions without
/// a degree of homogeneity.
///
/// Start: the price-consistent reserves form a curve parameterized by `λ`,
/// `Rᵢ(λ) = √(β / (λcᵢ − α))` for the curve-like family; the trade equation
/// is bracketed and bisected along it, then the full `(n+1)` system in
/// `(ln R, ln λ)` is polished by Newton.
pub fn newton_full_system(spec: &TradingFunctionSpec, price: &PriceVector, adjusted: &[f64]) -> Result<Vec<f64>> {
    let n = spec.n_assets();
    let start = match spec.family() {
        Family::CurveLike { alpha, beta } => curve_start(spec, *alpha, *beta, price, adjusted)?,
        _ => return Err(Error::InvalidParameter("no starting point for this family".into())),
    };

    let c = price.as_slice();
    let g0 = spec.gradient(&start)?;
    let lambda0 = math::dot(&g0, c) / math::dot(c, c);
    let trade_scale = math::norm(&g0) * math::norm(adjusted);

    let mut system = |x: &[f64]| -> Option<(Vec<f64>, Vec<f64>)> {
        let r: Vec<f64> = x[..n].iter().map(|u| math::exp(*u)).collect();
        let lambda = math::exp(x[n]);
        let shifted: Vec<f64> = r.iter().zip(adjusted).map(|(a, b)| a + b).collect();
        let change = spec.change(&r, adjusted).ok()?;
        let g = spec.gradient(&r).ok()?;
        let gs = spec.gradient(&shifted).ok()?;
        let h = spec.hessian(&r).ok()?;
        let m = n + 1;
        let mut f = vec![0.0; m];
        let mut j = vec![0.0; m * m];
        for i in 0..n {
            let denom = lambda * c[i];
            f[i] = g[i] / denom - 1.0;
            for k in 0..n {
                j[i * m + k] = h[i * n + k] * r[k] / denom;
            }
            j[i * m + n] = -g[i] / denom;
        }
        f[n] = change / trade_scale;
        for k in 0..n {
            j[n * m + k] = (gs[k] - g[k]) * r[k] / trade_scale;
        }
        Some((f, j))
    };
    let mut x0: Vec<f64> = start.iter().map(|r| math::ln(*r)).collect();
    x0.push(math::ln(lambda0));
    let out = newton::solve(&mut system, &x0, NewtonOptions { tol: 1e-13, ..NewtonOptions::default() })?;
    Ok(out.x[..n].iter().map(|u| math::exp(*u)).collect())
}

/// Reserves of a curve-like pool at multiplier `λ = α / min c + u`.
fn curve_price_point(alpha: f64, beta: f64, c: &[f64], u: f64) -> Vec<f64> {
    let c_min = c.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    c.iter().map(|ci| math::sqrt(beta / (alpha * (ci / c_min - 1.0) + u * ci))).collect()
}

fn curve_start(spec: &TradingFunctionSpec, alpha: f64, beta: f64, price: &PriceVector, adjusted: &[f64]) -> Result<Vec<f64>> {
    let c = price.as_slice();
    // large s means small u and deep reserves, where the trade is affordable
    let point = |s: f64| curve_price_point(alpha, beta, c, 1.0 / s);
    let g = |s: f64| spec.change(&point(s), adjusted).unwrap_or(f64::NAN);
    let c_min = c.iter().fold(f64::INFINITY, |m, v| m.min(*v));
    let s0 = c_min / alpha;
    let (neg, pos) = roots::bracket_geometric(g, s0, 2.0, s0 * 1e-12, s0 * 1e12)?;
    Ok(point(roots::bisect(g, neg, pos, 1e-15, 400).x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pool::PoolState;
    use approx::assert_relative_eq;

    fn cp() -> TradingFunctionSpec {
        TradingFunctionSpec::constant_product(2).unwrap()
    }

    fn price(v: &[f64]) -> PriceVector {
        PriceVector::normalize(v).unwrap()
    }

    fn trade(v: &[f64]) -> Trade {
        Trade::new(v.to_vec()).unwrap()
    }

    #[test]
    fn ray_point_examples() {
        let r = price_consistent_point(&cp(), &price(&[2.25, 1.0])).unwrap();
        assert_relative_eq!(r[0], 2.0 / 3.0, max_relative = 1e-14);
        assert_relative_eq!(r[1], 1.5, max_relative = 1e-14);
        let r = price_consistent_point(&cp(), &price(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(r[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(r[1], 1.0, max_relative = 1e-14);
        let cm = TradingFunctionSpec::constant_mean(vec![0.8, 0.2]).unwrap();
        let r = price_consistent_point(&cm, &price(&[1.0, 1.0])).unwrap();
        assert_relative_eq!(r[0] / r[1], 4.0, max_relative = 1e-14);
        assert_relative_eq!(cm.eval(&r).unwrap(), 1.0, max_relative = 1e-14);
    }

    #[test]
    fn ray_point_newton_agrees_with_closed_form() {
        let cm = TradingFunctionSpec::constant_mean(vec![0.2, 0.3, 0.5]).unwrap();
        let c = price(&[3.0, 0.01, 1.0]);
        let closed = price_consistent_point(&cm, &c).unwrap();
        let newton = price_consistent_point_newton(&cm, &c, 1.0, None).unwrap();
        for (a, b) in closed.iter().zip(&newton) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
        let cp2 = cp().with_degree(2.0).unwrap();
        let c = price(&[2.25, 1.0]);
        let closed = price_consistent_point(&cp2, &c).unwrap();
        let newton = price_consistent_point_newton(&cp2, &c, 1.0, None).unwrap();
        for (a, b) in closed.iter().zip(&newton) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn ray_point_rejects_inapplicable() {
        let cs = TradingFunctionSpec::constant_sum(2).unwrap();
        assert_eq!(price_consistent_point(&cs, &price(&[1.0, 1.0])), Err(Error::Inapplicable("constant-sum")));
        let curve = TradingFunctionSpec::curve_like(1.0, 1.0, 2).unwrap();
        assert!(price_consistent_point(&curve, &price(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn scale_examples() {
        let k = solve_scale(&cp(), &[2.0 / 3.0, 1.5], &trade(&[2.0, -3.0]), 1.0).unwrap();
        assert_relative_eq!(k, 6.0, max_relative = 1e-13);
        let k = solve_scale(&cp(), &[1.0, 1.0], &trade(&[3.0, -2.0]), 1.0).unwrap();
        assert_relative_eq!(k, 6.0, max_relative = 1e-13);
        // a trade feasible at the ray point itself
        let d = PoolState::new(cp(), vec![2.0, 5.0], 1.0).unwrap().quote_output(1, 0.7, 0).unwrap();
        let k = solve_scale(&cp(), &[2.0, 5.0], &d, 1.0).unwrap();
        assert_relative_eq!(k, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn scale_bracket_failure() {
        // a trade that lowers ψ at every scale: giving nothing, taking something
        let out = solve_scale(&cp(), &[1.0, 1.0], &trade(&[0.0, -1.0]), 1.0);
        assert!(matches!(out, Err(Error::Bracket { .. })));
    }

    #[test]
    fn recover_examples() {
        let r = recover_reserves(&cp(), &price(&[2.25, 1.0]), &trade(&[2.0, -3.0]), 1.0).unwrap();
        assert_relative_eq!(r.reserves[0], 4.0, max_relative = 1e-13);
        assert_relative_eq!(r.reserves[1], 9.0, max_relative = 1e-13);
        assert_relative_eq!(r.lambda, 1.0 / 3.0, max_relative = 1e-13);
        assert!(r.unique);
        let cs = TradingFunctionSpec::constant_sum(2).unwrap();
        let out = recover_reserves(&cs, &price(&[1.0, 1.0]), &trade(&[1.0, -1.0]), 1.0);
        assert_eq!(out, Err(Error::Inapplicable("constant-sum")));
        assert_eq!(recover_reserves(&cp(), &price(&[1.0, 1.0]), &Trade::zero(2), 1.0), Err(Error::ZeroTrade));
    }

    #[test]
    fn recovers_with_fees() {
        let cm = TradingFunctionSpec::constant_mean(vec![0.8, 0.2]).unwrap();
        let state = PoolState::new(cm.clone(), vec![321.0, 55.5], 0.997).unwrap();
        let d = state.quote_output(0, 17.0, 1).unwrap();
        let r = recover_reserves(&cm, &state.marginal_price(), &d, 0.997).unwrap();
        for (a, b) in r.reserves.iter().zip(state.reserves()) {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn curve_like_newton_recovers() {
        let curve = TradingFunctionSpec::curve_like(1.0, 2.0, 2).unwrap();
        let state = PoolState::new(curve.clone(), vec![3.0, 7.0], 1.0).unwrap();
        let d = state.quote_output(0, 0.5, 1).unwrap();
        let r = recover_reserves(&curve, &state.marginal_price(), &d, 1.0).unwrap();
        assert!(!r.unique);
        for (a, b) in r.reserves.iter().zip(state.reserves()) {
            assert_relative_eq!(a, b, max_relative = 1e-8);
        }
    }
}
