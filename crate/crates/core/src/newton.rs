//! Damped Newton iteration for small dense square systems.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::{linalg, math};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iter: usize,
    /// Convergence threshold on the max-norm of the residual.
    pub tol: f64,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { max_iter: 100, tol: 1e-12, max_halvings: 40 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

/// A square system: returns `(F(x), J(x))` with `J` row-major, or `None` when
/// `x` lies outside the domain.
pub trait System {
    fn eval(&mut self, x: &[f64]) -> Option<(Vec<f64>, Vec<f64>)>;
}

impl<F> System for F
where
    F: FnMut(&[f64]) -> Option<(Vec<f64>, Vec<f64>)>,
{
    fn eval(&mut self, x: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        self(x)
    }
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(math::abs(*x)))
}

/// Newton's method with step halving on the Euclidean residual norm.
pub fn solve<S: System>(system: &mut S, x0: &[f64], opts: NewtonOptions) -> Result<NewtonOutcome> {
    let mut x = x0.to_vec();
    let (mut f, mut jac) = system.eval(&x).ok_or(Error::Convergence { iterations: 0, residual: f64::NAN })?;
    for iteration in 0..opts.max_iter {
        let residual = max_norm(&f);
        if residual <= opts.tol {
            return Ok(NewtonOutcome { x, residual, iterations: iteration });
        }
        let rhs: Vec<f64> = f.iter().map(|v| -v).collect();
        let step = linalg::solve(&jac, &rhs)?;
        let merit = math::norm(&f);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let trial: Vec<f64> = x.iter().zip(&step).map(|(xi, si)| xi + t * si).collect();
            if let Some((ft, jt)) = system.eval(&trial) {
                if math::norm(&ft) < (1.0 - 1e-4 * t) * merit {
                    accepted = Some((trial, ft, jt));
                    break;
                }
            }
            t /= 2.0;
        }
        match accepted {
            Some((xn, fnew, jn)) => {
                x = xn;
                f = fnew;
                jac = jn;
            }
            None => {
                // stalled; converged only if already at the noise floor
                return if residual <= opts.tol * 1e2 {
                    Ok(NewtonOutcome { x, residual, iterations: iteration })
                } else {
                    Err(Error::Convergence { iterations: iteration, residual })
                };
            }
        }
    }
    let residual = max_norm(&f);
    if residual <= opts.tol {
        Ok(NewtonOutcome { x, residual, iterations: opts.max_iter })
    } else {
        Err(Error::Convergence { iterations: opts.max_iter, residual })
    }
}
