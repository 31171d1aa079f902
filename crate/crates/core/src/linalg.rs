//! Small dense linear algebra for the Newton solvers and the LP.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Solves `a · x = b` for square row-major `a` by Gaussian elimination with
/// partial pivoting.
pub fn solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    let n = b.len();
    debug_assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    let mut x = b.to_vec();
    let scale = m.iter().fold(0.0_f64, |s, v| s.max(math::abs(*v)));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::Singular);
    }
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| math::abs(m[i * n + col]).total_cmp(&math::abs(m[j * n + col])))
            .unwrap();
        if math::abs(m[pivot * n + col]) <= 1e-14 * scale {
            return Err(Error::Singular);
        }
        if pivot != col {
            for k in 0..n {
                m.swap(col * n + k, pivot * n + k);
            }
            x.swap(col, pivot);
        }
        let p = m[col * n + col];
        for row in col + 1..n {
            let factor = m[row * n + col] / p;
            if factor == 0.0 {
                continue;
            }
            for k in col..n {
                m[row * n + k] -= factor * m[col * n + k];
            }
            x[row] -= factor * x[col];
        }
    }
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|k| m[row * n + k] * x[k]).sum();
        x[row] = (x[row] - tail) / m[row * n + row];
    }
    Ok(x)
}

/// Numerical rank of a row-major `rows × cols` matrix, with pivots below
/// `rel_tol` times the largest entry counted as zero.
pub fn rank(a: &[f64], rows: usize, cols: usize, rel_tol: f64) -> usize {
    let mut m = a.to_vec();
    let scale = m.iter().fold(0.0_f64, |s, v| s.max(math::abs(*v)));
    if scale == 0.0 {
        return 0;
    }
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let pivot = (rank..rows)
            .max_by(|&i, &j| math::abs(m[i * cols + col]).total_cmp(&math::abs(m[j * cols + col])))
            .unwrap();
        if math::abs(m[pivot * cols + col]) <= rel_tol * scale {
            continue;
        }
        for k in 0..cols {
            m.swap(rank * cols + k, pivot * cols + k);
        }
        for row in rank + 1..rows {
            let factor = m[row * cols + col] / m[rank * cols + col];
            for k in col..cols {
                m[row * cols + k] -= factor * m[rank * cols + k];
            }
        }
        rank += 1;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn solves_with_pivoting() {
        let a = [0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let x = solve(&a, &[7.0, 3.0, 6.0]).unwrap();
        for (got, want) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert_relative_eq!(*got, want, max_relative = 1e-14);
        }
    }

    #[test]
    fn detects_singular() {
        assert_eq!(solve(&[1.0, 2.0, 2.0, 4.0], &[1.0, 1.0]), Err(Error::Singular));
    }

    #[test]
    fn rank_of_dependent_rows() {
        assert_eq!(rank(&[1.0, -1.0, -1.0, 1.0], 2, 2, 1e-12), 1);
        assert_eq!(rank(&[1.0, -1.0, -1.0, 2.0], 2, 2, 1e-12), 2);
        assert_eq!(rank(&[0.0; 6], 2, 3, 1e-12), 0);
    }
}
