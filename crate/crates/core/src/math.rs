//! Float helpers backed by `libm` so the crate stays `no_std`.

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn ln_1p(x: f64) -> f64 {
    libm::log1p(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn exp_m1(x: f64) -> f64 {
    libm::expm1(x)
}

#[inline]
pub fn powf(x: f64, y: f64) -> f64 {
    libm::pow(x, y)
}

#[inline]
pub fn log2(x: f64) -> f64 {
    libm::log2(x)
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}

pub fn norm(v: &[f64]) -> f64 {
    // scaled to avoid overflow on reserves near 1e300
    let scale = v.iter().fold(0.0_f64, |m, x| m.max(abs(*x)));
    if scale == 0.0 || !scale.is_finite() {
        return scale;
    }
    scale * sqrt(v.iter().map(|x| (x / scale) * (x / scale)).sum::<f64>())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Largest relative componentwise gap `|a_i - b_i| / |b_i|`.
pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| abs(x - y) / abs(*y).max(f64::MIN_POSITIVE))
        .fold(0.0, f64::max)
}
