//! Bracketing root finders on the real line.

use crate::error::{Error, Result};

/// Outcome of a bisection: the final bracket and the endpoint with the
/// smaller residual.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Root {
    pub x: f64,
    pub fx: f64,
    /// End of the final bracket on the negative side.
    pub neg: f64,
    /// End of the final bracket on the positive side.
    pub pos: f64,
    pub iterations: usize,
}

/// Bisects `f` on a bracket with `f(neg) < 0 < f(pos)` (the ends may be in
/// either order). Stops when `f` hits zero exactly, when the bracket is no
/// wider than `rel_width · |x|`, or when the midpoint can no longer be
/// represented between the ends.
///
/// `f` may return `NaN` for points outside its domain; those are treated as
/// negative.
pub fn bisect<F>(mut f: F, mut neg: f64, mut pos: f64, rel_width: f64, max_iter: usize) -> Root
where
    F: FnMut(f64) -> f64,
{
    let mut f_neg = f64::NEG_INFINITY;
    let mut f_pos = f64::INFINITY;
    let mut iterations = 0;
    while iterations < max_iter {
        let mid = neg + (pos - neg) / 2.0;
        if mid == neg || mid == pos {
            break;
        }
        if crate::math::abs(pos - neg) <= rel_width * crate::math::abs(mid) {
            break;
        }
        iterations += 1;
        let fm = f(mid);
        if fm == 0.0 {
            return Root { x: mid, fx: 0.0, neg: mid, pos: mid, iterations };
        }
        if fm > 0.0 {
            pos = mid;
            f_pos = fm;
        } else {
            neg = mid;
            f_neg = if fm.is_nan() { f64::NEG_INFINITY } else { fm };
        }
    }
    let (x, fx) = if crate::math::abs(f_neg) < crate::math::abs(f_pos) { (neg, f_neg) } else { (pos, f_pos) };
    Root { x, fx, neg, pos, iterations }
}

/// Starting from `start > 0`, multiplies or divides by `factor` until `f`
/// changes sign. Returns `(neg, pos)` with `f(neg) < 0 < f(pos)`; `f` must be
/// negative below its root and positive above it.
pub fn bracket_geometric<F>(mut f: F, start: f64, factor: f64, lo_limit: f64, hi_limit: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> f64,
{
    let f0 = f(start);
    if f0 > 0.0 {
        let mut pos = start;
        let mut x = start / factor;
        while x >= lo_limit {
            if !(f(x) > 0.0) {
                return Ok((x, pos));
            }
            pos = x;
            x /= factor;
        }
    } else {
        let mut neg = start;
        let mut x = start * factor;
        while x <= hi_limit {
            if f(x) > 0.0 {
                return Ok((neg, x));
            }
            neg = x;
            x *= factor;
        }
    }
    Err(Error::Bracket { lo: lo_limit, hi: hi_limit })
}
