//! Numerical checks of the geometry behind unique reconstruction.
//!
//! For a homogeneous, strictly concave ψ the reserves consistent with a
//! price form a ray, and along that ray the trade equation changes sign
//! exactly once. Both facts are sampled here on grids; a passing report is
//! evidence over the grid, not a proof over the continuum.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::pool::{PriceVector, Trade};
use crate::trading::{feasibility_tolerance, TradingFunctionSpec};

pub const RAY_TOLERANCE: f64 = 1e-9;

/// Grid points closer than this to `k = 1` are checked for `g(k) ≈ 0`
/// instead of for a sign.
pub const UNIT_SCALE_BAND: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryProperty {
    RayInvariance,
    ScaleSignPattern,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub spec_id: String,
    pub property: GeometryProperty,
    pub samples: usize,
    pub max_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl GeometryReport {
    fn new(spec: &TradingFunctionSpec, property: GeometryProperty, samples: usize, max_violation: f64, tolerance: f64) -> Self {
        GeometryReport {
            spec_id: spec.to_string(),
            property,
            samples,
            max_violation,
            tolerance,
            pass: max_violation <= tolerance,
        }
    }
}

/// `count` log-spaced points over `[lo, hi]`, both ends included.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let (a, b) = (math::ln(lo), math::ln(hi));
            (0..count).map(|i| math::exp(a + (b - a) * i as f64 / (count - 1) as f64)).collect()
        }
    }
}

/// Fifty log-spaced scales over `[0.1, 10]`.
pub fn default_grid() -> Vec<f64> {
    log_grid(0.1, 10.0, 50)
}

fn check_scales(scales: &[f64]) -> Result<()> {
    if let Some(k) = scales.iter().find(|k| !(k.is_finite() && **k > 0.0)) {
        return Err(Error::InvalidParameter(alloc::format!("scales must be positive, got {k}")));
    }
    Ok(())
}

fn scaled(reserves: &[f64], k: f64) -> Vec<f64> {
    reserves.iter().map(|r| k * r).collect()
}

/// Largest relative change of the normalized price between `R` and `kR`.
pub fn verify_ray_invariance(spec: &TradingFunctionSpec, reserves: &[f64], scales: &[f64]) -> Result<GeometryReport> {
    check_scales(scales)?;
    let base = PriceVector::normalize(&spec.gradient(reserves)?)?;
    let mut worst = 0.0_f64;
    for &k in scales {
        let p = PriceVector::normalize(&spec.gradient(&scaled(reserves, k))?)?;
        worst = worst.max(p.max_rel_diff(&base));
    }
    Ok(GeometryReport::new(spec, GeometryProperty::RayInvariance, scales.len(), worst, RAY_TOLERANCE))
}

/// Checks that `g(k) = ψ(kR + Δ) − ψ(kR)` is strictly negative for `k < 1`
/// and strictly positive for `k > 1`, with scales that leave the orthant
/// counted as negative.
///
/// Violations are measured in units of the feasibility tolerance at `kR`.
/// Near `k = 1` the score is `|g| / tol`; a wrongly signed (or zero) value
/// elsewhere scores `2 + |g| / tol`. The report passes at a score of 1.
pub fn scan_scale_sign(spec: &TradingFunctionSpec, reserves: &[f64], trade: &Trade, grid: &[f64]) -> Result<GeometryReport> {
    check_scales(grid)?;
    spec.check_reserves(reserves)?;
    if trade.len() != spec.n_assets() {
        return Err(Error::Dimension { expected: spec.n_assets(), got: trade.len() });
    }
    let delta = trade.as_slice();
    let mut worst = 0.0_f64;
    for &k in grid {
        let base = scaled(reserves, k);
        let tol = feasibility_tolerance(spec.eval(&base)?);
        let inside = base.iter().zip(delta).all(|(r, d)| r + d > 0.0);
        let g = if inside { spec.change(&base, delta)? } else { f64::NEG_INFINITY };
        let score = if math::abs(k - 1.0) < UNIT_SCALE_BAND {
            math::abs(g) / tol
        } else {
            let right = if k < 1.0 { g < 0.0 } else { g > 0.0 };
            if right {
                0.0
            } else {
                2.0 + math::abs(g) / tol
            }
        };
        worst = worst.max(score);
    }
    Ok(GeometryReport::new(spec, GeometryProperty::ScaleSignPattern, grid.len(), worst, 1.0))
}
