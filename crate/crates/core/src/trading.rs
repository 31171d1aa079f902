//! Trading-function families.
//!
//! Every family is evaluated in its concave (or monotone-transformed concave)
//! form on the open orthant `R > 0`:
//!
//! | family            | ψ(R)                         | degree |
//! |-------------------|------------------------------|--------|
//! | `ConstantProduct` | `(∏ Rᵢ)^(p/n)`               | `p`    |
//! | `ConstantMean`    | `(∏ Rᵢ^wᵢ)^p`, `Σwᵢ = 1`     | `p`    |
//! | `ConstantSum`     | `(Σ Rᵢ)^p`                   | `p`    |
//! | `CurveLike`       | `α·ΣRᵢ − β·Σ 1/Rᵢ`           | none   |
//!
//! `p` defaults to 1, which gives the concave forms. Other positive degrees
//! only relabel the level sets, so prices and feasible trades are unchanged in
//! direction.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    ConstantProduct,
    ConstantMean { weights: Vec<f64> },
    ConstantSum,
    CurveLike { alpha: f64, beta: f64 },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::ConstantProduct => "constant-product",
            Family::ConstantMean { .. } => "constant-mean",
            Family::ConstantSum => "constant-sum",
            Family::CurveLike { .. } => "curve-like",
        }
    }
}

/// A validated trading function ψ over `n_assets` reserves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpecRepr", into = "SpecRepr")]
pub struct TradingFunctionSpec {
    family: Family,
    n_assets: usize,
    degree: f64,
}

#[derive(Serialize, Deserialize)]
struct SpecRepr {
    #[serde(flatten)]
    family: Family,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    n_assets: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    degree: Option<f64>,
}

impl TryFrom<SpecRepr> for TradingFunctionSpec {
    type Error = Error;

    fn try_from(repr: SpecRepr) -> Result<Self> {
        let spec = match repr.family {
            Family::ConstantProduct => Self::constant_product(repr.n_assets.unwrap_or(2))?,
            Family::ConstantSum => Self::constant_sum(repr.n_assets.unwrap_or(2))?,
            Family::ConstantMean { weights } => {
                if let Some(n) = repr.n_assets {
                    if n != weights.len() {
                        return Err(Error::Dimension { expected: n, got: weights.len() });
                    }
                }
                Self::constant_mean(weights)?
            }
            Family::CurveLike { alpha, beta } => {
                if repr.degree.is_some() {
                    return Err(Error::InvalidSpec("curve-like functions have no homogeneity degree".into()));
                }
                Self::curve_like(alpha, beta, repr.n_assets.unwrap_or(2))?
            }
        };
        match repr.degree {
            Some(p) => spec.with_degree(p),
            None => Ok(spec),
        }
    }
}

impl From<TradingFunctionSpec> for SpecRepr {
    fn from(spec: TradingFunctionSpec) -> Self {
        let n_assets = match spec.family {
            Family::ConstantMean { .. } => None,
            _ => Some(spec.n_assets),
        };
        let degree = match spec.family {
            Family::CurveLike { .. } => None,
            _ if spec.degree == 1.0 => None,
            _ => Some(spec.degree),
        };
        SpecRepr { family: spec.family, n_assets, degree }
    }
}

fn check_assets(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidSpec(format!("need at least 2 assets, got {n}")));
    }
    Ok(())
}

impl TradingFunctionSpec {
    pub fn constant_product(n_assets: usize) -> Result<Self> {
        check_assets(n_assets)?;
        Ok(Self { family: Family::ConstantProduct, n_assets, degree: 1.0 })
    }

    pub fn constant_sum(n_assets: usize) -> Result<Self> {
        check_assets(n_assets)?;
        Ok(Self { family: Family::ConstantSum, n_assets, degree: 1.0 })
    }

    pub fn constant_mean(weights: Vec<f64>) -> Result<Self> {
        check_assets(weights.len())?;
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidSpec("constant-mean weights must be strictly positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if math::abs(total - 1.0) > WEIGHT_SUM_TOL {
            return Err(Error::InvalidSpec(format!("constant-mean weights must sum to 1, got {total}")));
        }
        let n_assets = weights.len();
        Ok(Self { family: Family::ConstantMean { weights }, n_assets, degree: 1.0 })
    }

    pub fn curve_like(alpha: f64, beta: f64, n_assets: usize) -> Result<Self> {
        check_assets(n_assets)?;
        if !(alpha.is_finite() && alpha > 0.0 && beta.is_finite() && beta > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "curve-like parameters must be positive, got alpha={alpha} beta={beta}"
            )));
        }
        Ok(Self { family: Family::CurveLike { alpha, beta }, n_assets, degree: 1.0 })
    }

    /// Raises a homogeneous family to degree `p` (ψ ↦ ψᵖ).
    pub fn with_degree(mut self, p: f64) -> Result<Self> {
        if matches!(self.family, Family::CurveLike { .. }) {
            return Err(Error::InvalidSpec("curve-like functions have no homogeneity degree".into()));
        }
        if !(p.is_finite() && p > 0.0) {
            return Err(Error::InvalidSpec(format!("homogeneity degree must be positive, got {p}")));
        }
        self.degree = p;
        Ok(self)
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn n_assets(&self) -> usize {
        self.n_assets
    }

    /// `Some(p)` when ψ(kR) = kᵖψ(R) for all k > 0.
    pub fn homogeneity_degree(&self) -> Option<f64> {
        match self.family {
            Family::CurveLike { .. } => None,
            _ => Some(self.degree),
        }
    }

    /// False for constant sum, whose level sets are flat.
    pub fn is_strictly_quasiconcave(&self) -> bool {
        !matches!(self.family, Family::ConstantSum)
    }

    /// Log-weights of the geometric-mean families.
    fn weight(&self, i: usize) -> f64 {
        match &self.family {
            Family::ConstantMean { weights } => weights[i],
            _ => 1.0 / self.n_assets as f64,
        }
    }

    pub fn check_reserves(&self, reserves: &[f64]) -> Result<()> {
        if reserves.len() != self.n_assets {
            return Err(Error::Dimension { expected: self.n_assets, got: reserves.len() });
        }
        match reserves.iter().position(|r| !(r.is_finite() && *r > 0.0)) {
            Some(index) => Err(Error::Domain { index, value: reserves[index] }),
            None => Ok(()),
        }
    }

    /// ψ(R).
    pub fn eval(&self, reserves: &[f64]) -> Result<f64> {
        self.check_reserves(reserves)?;
        Ok(self.eval_unchecked(reserves))
    }

    fn eval_unchecked(&self, r: &[f64]) -> f64 {
        match &self.family {
            Family::ConstantProduct | Family::ConstantMean { .. } => {
                let log_mean: f64 = r.iter().enumerate().map(|(i, x)| self.weight(i) * math::ln(*x)).sum();
                math::exp(self.degree * log_mean)
            }
            Family::ConstantSum => {
                let s: f64 = r.iter().sum();
                if self.degree == 1.0 {
                    s
                } else {
                    math::powf(s, self.degree)
                }
            }
            Family::CurveLike { alpha, beta } => {
                alpha * r.iter().sum::<f64>() - beta * r.iter().map(|x| 1.0 / x).sum::<f64>()
            }
        }
    }

    /// ∇ψ(R), analytic.
    pub fn gradient(&self, reserves: &[f64]) -> Result<Vec<f64>> {
        self.check_reserves(reserves)?;
        Ok(self.gradient_unchecked(reserves))
    }

    fn gradient_unchecked(&self, r: &[f64]) -> Vec<f64> {
        match &self.family {
            Family::ConstantProduct | Family::ConstantMean { .. } => {
                let psi = self.eval_unchecked(r);
                r.iter()
                    .enumerate()
                    .map(|(i, x)| self.degree * psi * self.weight(i) / x)
                    .collect()
            }
            Family::ConstantSum => {
                let s: f64 = r.iter().sum();
                let g = if self.degree == 1.0 { 1.0 } else { self.degree * math::powf(s, self.degree - 1.0) };
                vec![g; r.len()]
            }
            Family::CurveLike { alpha, beta } => r.iter().map(|x| alpha + beta / (x * x)).collect(),
        }
    }

    /// ∇²ψ(R), row-major `n × n`.
    pub fn hessian(&self, reserves: &[f64]) -> Result<Vec<f64>> {
        self.check_reserves(reserves)?;
        let n = self.n_assets;
        let mut h = vec![0.0; n * n];
        match &self.family {
            Family::ConstantProduct | Family::ConstantMean { .. } => {
                let psi = self.eval_unchecked(reserves);
                let p = self.degree;
                for i in 0..n {
                    let gi = p * self.weight(i) / reserves[i];
                    for j in 0..n {
                        let gj = p * self.weight(j) / reserves[j];
                        h[i * n + j] = psi * gi * gj;
                    }
                    h[i * n + i] -= psi * gi / reserves[i];
                }
            }
            Family::ConstantSum => {
                let s: f64 = reserves.iter().sum();
                let p = self.degree;
                let v = if p == 1.0 { 0.0 } else { p * (p - 1.0) * math::powf(s, p - 2.0) };
                h.iter_mut().for_each(|x| *x = v);
            }
            Family::CurveLike { beta, .. } => {
                for i in 0..n {
                    let x = reserves[i];
                    h[i * n + i] = -2.0 * beta / (x * x * x);
                }
            }
        }
        Ok(h)
    }

    /// ψ(R + Δ) − ψ(R), evaluated without the cancellation of a plain difference.
    ///
    /// Errors when `R` or `R + Δ` leaves the open orthant.
    pub fn change(&self, reserves: &[f64], delta: &[f64]) -> Result<f64> {
        self.check_reserves(reserves)?;
        if delta.len() != self.n_assets {
            return Err(Error::Dimension { expected: self.n_assets, got: delta.len() });
        }
        if let Some(index) = reserves.iter().zip(delta).position(|(r, d)| !(r + d > 0.0)) {
            return Err(Error::Domain { index, value: reserves[index] + delta[index] });
        }
        Ok(match &self.family {
            Family::ConstantProduct | Family::ConstantMean { .. } => {
                let log_ratio: f64 = reserves
                    .iter()
                    .zip(delta)
                    .enumerate()
                    .map(|(i, (r, d))| self.weight(i) * math::ln_1p(d / r))
                    .sum();
                self.eval_unchecked(reserves) * math::exp_m1(self.degree * log_ratio)
            }
            Family::ConstantSum => {
                let s: f64 = reserves.iter().sum();
                let ds: f64 = delta.iter().sum();
                if self.degree == 1.0 {
                    ds
                } else {
                    math::powf(s, self.degree) * math::exp_m1(self.degree * math::ln_1p(ds / s))
                }
            }
            Family::CurveLike { alpha, beta } => {
                let linear: f64 = delta.iter().sum();
                let reciprocal: f64 = reserves.iter().zip(delta).map(|(r, d)| d / (r * (r + d))).sum();
                alpha * linear + beta * reciprocal
            }
        })
    }
}

/// Feasibility band for the equality ψ(R + Δ) = ψ(R).
pub fn feasibility_tolerance(psi: f64) -> f64 {
    1e-9 * math::abs(psi).max(1.0)
}

impl fmt::Display for TradingFunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            Family::ConstantProduct => write!(f, "cp:{}", self.n_assets)?,
            Family::ConstantSum => write!(f, "cs:{}", self.n_assets)?,
            Family::ConstantMean { weights } => {
                f.write_str("cm:")?;
                for (i, w) in weights.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{w}")?;
                }
            }
            Family::CurveLike { alpha, beta } => write!(f, "curve:{alpha},{beta},{}", self.n_assets)?,
        }
        if self.homogeneity_degree().is_some_and(|p| p != 1.0) {
            write!(f, "^{}", self.degree)?;
        }
        Ok(())
    }
}

/// Parses the compact command-line form.
///
/// ```text
/// cp | cp:<n>            constant product over n assets (default 2)
/// cs | cs:<n>            constant sum
/// cm:<w1>,<w2>,...       constant mean with the given weights
/// curve:<α>,<β>[,<n>]    curve-like
/// ```
///
/// Homogeneous families accept a `^<p>` suffix, e.g. `cp^2` for `R₁R₂`.
impl FromStr for TradingFunctionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (body, degree) = match s.split_once('^') {
            Some((body, p)) => (body, Some(parse_f64(p)?)),
            None => (s, None),
        };
        let (name, args) = match body.split_once(':') {
            Some((name, args)) => (name, Some(args)),
            None => (body, None),
        };
        let numbers = |args: Option<&str>| -> Result<Vec<f64>> {
            args.map(|a| a.split(',').map(parse_f64).collect()).unwrap_or(Ok(Vec::new()))
        };
        let count = |args: Option<&str>| -> Result<usize> {
            match args {
                None => Ok(2),
                Some(a) => a
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidSpec(format!("bad asset count {a:?}"))),
            }
        };
        let spec = match name.trim().to_ascii_lowercase().as_str() {
            "cp" | "constant-product" | "constant_product" => Self::constant_product(count(args)?)?,
            "cs" | "constant-sum" | "constant_sum" => Self::constant_sum(count(args)?)?,
            "cm" | "constant-mean" | "constant_mean" => Self::constant_mean(numbers(args)?)?,
            "curve" | "curve-like" | "curve_like" => {
                let v = numbers(args)?;
                match v.as_slice() {
                    [a, b] => Self::curve_like(*a, *b, 2)?,
                    [a, b, n] if *n >= 2.0 && libm::trunc(*n) == *n => Self::curve_like(*a, *b, *n as usize)?,
                    _ => return Err(Error::InvalidSpec("expected curve:<alpha>,<beta>[,<n>]".into())),
                }
            }
            other => return Err(Error::InvalidSpec(format!("unknown family {other:?}"))),
        };
        match degree {
            Some(p) => spec.with_degree(p),
            None => Ok(spec),
        }
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    let s: &str = s.trim();
    s.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::InvalidParameter(String::from("expected a finite number, got ") + s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use approx::assert_relative_eq;

    fn cp() -> TradingFunctionSpec {
        TradingFunctionSpec::constant_product(2).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_relative_eq!(cp().eval(&[4.0, 9.0]).unwrap(), 6.0, max_relative = 1e-15);
        let cs = TradingFunctionSpec::constant_sum(2).unwrap();
        assert_eq!(cs.eval(&[10.0, 10.0]).unwrap(), 20.0);
        let cm = TradingFunctionSpec::constant_mean(vec![0.5, 0.5]).unwrap();
        assert_relative_eq!(cm.eval(&[4.0, 9.0]).unwrap(), 6.0, max_relative = 1e-15);
    }

    #[test]
    fn gradient_examples() {
        let g = cp().gradient(&[4.0, 9.0]).unwrap();
        assert_relative_eq!(g[0], 0.75, max_relative = 1e-15);
        assert_relative_eq!(g[1], 1.0 / 3.0, max_relative = 1e-15);
        let cs = TradingFunctionSpec::constant_sum(2).unwrap();
        assert_eq!(cs.gradient(&[3.0, 700.0]).unwrap(), vec![1.0, 1.0]);
        for t in [1e-3, 1.0, 5e5] {
            let g = cp().gradient(&[t, t]).unwrap();
            assert_relative_eq!(g[0], 0.5, max_relative = 1e-14);
            assert_relative_eq!(g[1], 0.5, max_relative = 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(cp().eval(&[0.0, 1.0]), Err(Error::Domain { index: 0, .. })));
        assert!(matches!(cp().gradient(&[1.0, -2.0]), Err(Error::Domain { index: 1, .. })));
        assert!(matches!(cp().eval(&[1.0]), Err(Error::Dimension { expected: 2, got: 1 })));
        assert!(matches!(cp().change(&[4.0, 9.0], &[1.0, -9.0]), Err(Error::Domain { index: 1, .. })));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(TradingFunctionSpec::constant_mean(vec![0.5, 0.6]).is_err());
        assert!(TradingFunctionSpec::constant_mean(vec![1.0, 0.0]).is_err());
        assert!(TradingFunctionSpec::constant_mean(vec![0.5, 0.5 + 1e-13]).is_ok());
        assert!(TradingFunctionSpec::curve_like(0.0, 1.0, 2).is_err());
        assert!(TradingFunctionSpec::curve_like(1.0, 1.0, 2).unwrap().with_degree(2.0).is_err());
        assert!(cp().with_degree(0.0).is_err());
        assert!(TradingFunctionSpec::constant_product(1).is_err());
    }

    #[test]
    fn change_matches_difference() {
        let r = [4.0, 9.0];
        let d = [2.0, -3.0];
        assert!(math::abs(cp().change(&r, &d).unwrap()) < 1e-15);
        let curve = TradingFunctionSpec::curve_like(1.0, 2.0, 2).unwrap();
        let direct = curve.eval(&[6.0, 6.0]).unwrap() - curve.eval(&r).unwrap();
        assert_relative_eq!(curve.change(&r, &d).unwrap(), direct, max_relative = 1e-12);
        let cs2 = TradingFunctionSpec::constant_sum(2).unwrap().with_degree(2.0).unwrap();
        assert_relative_eq!(cs2.change(&[1.0, 2.0], &[1.0, 0.0]).unwrap(), 7.0, max_relative = 1e-14);
    }

    #[test]
    fn degree_two_product_is_uniswap_form() {
        let spec = cp().with_degree(2.0).unwrap();
        assert_relative_eq!(spec.eval(&[4.0, 9.0]).unwrap(), 36.0, max_relative = 1e-14);
        assert_eq!(spec.homogeneity_degree(), Some(2.0));
    }

    #[test]
    fn parse_and_display() {
        let cases = ["cp", "cp:3", "cs", "cm:0.8,0.2", "curve:1,2", "curve:1,2,3", "cp^2"];
        for case in cases {
            let spec: TradingFunctionSpec = case.parse().unwrap();
            let again: TradingFunctionSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again, "{case}");
        }
        assert_eq!("cp:3".parse::<TradingFunctionSpec>().unwrap().n_assets(), 3);
        assert!("xyz".parse::<TradingFunctionSpec>().is_err());
        assert!("cm:0.3,0.3".parse::<TradingFunctionSpec>().is_err());
        assert!("curve:1".parse::<TradingFunctionSpec>().is_err());
        assert!("cp^abc".parse::<TradingFunctionSpec>().is_err());
    }
}
