//! Dense two-phase simplex for the small programs the price estimator builds.
//!
//! Solves `minimize cᵀx` subject to row constraints and `x ≥ 0`. Uses Bland's
//! rule throughout, so it terminates on degenerate problems at the cost of
//! speed; the programs here have a handful of variables.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        Self { coeffs, relation, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

const EPS: f64 = 1e-11;

struct Tableau {
    rows: usize,
    cols: usize,
    // (rows + 1) × (cols + 1); last row is the reduced-cost row, last column the rhs
    data: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * (self.cols + 1) + c]
    }

    fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * (self.cols + 1) + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.cols + 1;
        let p = self.at(row, col);
        for c in 0..width {
            *self.at_mut(row, c) /= p;
        }
        for r in 0..=self.rows {
            if r == row {
                continue;
            }
            let factor = self.at(r, col);
            if factor == 0.0 {
                continue;
            }
            for c in 0..width {
                let v = self.at(row, c);
                *self.at_mut(r, c) -= factor * v;
            }
        }
        self.basis[row] = col;
    }

    fn load_objective(&mut self, costs: &[f64]) {
        let obj = self.rows;
        for (c, cost) in costs.iter().enumerate() {
            *self.at_mut(obj, c) = *cost;
        }
        *self.at_mut(obj, self.cols) = 0.0;
        for r in 0..self.rows {
            let cb = costs[self.basis[r]];
            if cb == 0.0 {
                continue;
            }
            for c in 0..=self.cols {
                let v = self.at(r, c);
                *self.at_mut(obj, c) -= cb * v;
            }
        }
    }

    /// Runs Bland's-rule iterations over the allowed columns.
    fn optimize(&mut self, allowed: &[bool]) -> Result<()> {
        let max_iter = 50 * (self.rows + self.cols + 1);
        for _ in 0..max_iter {
            let entering = (0..self.cols).find(|&c| allowed[c] && self.at(self.rows, c) < -EPS);
            let Some(col) = entering else { return Ok(()) };
            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.rows {
                let a = self.at(r, col);
                if a > EPS {
                    let ratio = self.rhs(r) / a;
                    leaving = match leaving {
                        None => Some((r, ratio)),
                        Some((lr, lratio)) => {
                            if ratio < lratio - EPS || (math::abs(ratio - lratio) <= EPS && self.basis[r] < self.basis[lr]) {
                                Some((r, ratio))
                            } else {
                                Some((lr, lratio))
                            }
                        }
                    };
                }
            }
            match leaving {
                Some((row, _)) => self.pivot(row, col),
                None => return Err(Error::UnboundedLp),
            }
        }
        Err(Error::Convergence { iterations: max_iter, residual: f64::NAN })
    }
}

/// Minimizes `objective · x` subject to `constraints` and `x ≥ 0`.
pub fn minimize(objective: &[f64], constraints: &[Constraint]) -> Result<LpSolution> {
    let n = objective.len();
    let m = constraints.len();
    if constraints.iter().any(|c| c.coeffs.len() != n) {
        return Err(Error::InvalidParameter("constraint width differs from objective".into()));
    }

    // normalize rows to rhs ≥ 0 and unit scale
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
    for c in constraints {
        let scale = c.coeffs.iter().fold(math::abs(c.rhs), |s, v| s.max(math::abs(*v)));
        let scale = if scale > 0.0 { scale } else { 1.0 };
        let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
        let relation = match (c.relation, sign < 0.0) {
            (Relation::Le, true) => Relation::Ge,
            (Relation::Ge, true) => Relation::Le,
            (r, _) => r,
        };
        rows.push((c.coeffs.iter().map(|v| sign * v / scale).collect(), relation, sign * c.rhs / scale));
    }

    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let cols = n + n_slack + n_art;
    let mut t = Tableau { rows: m, cols, data: vec![0.0; (m + 1) * (cols + 1)], basis: vec![0; m] };

    let (mut slack, mut art) = (n, n + n_slack);
    for (r, (coeffs, relation, rhs)) in rows.iter().enumerate() {
        for (c, v) in coeffs.iter().enumerate() {
            *t.at_mut(r, c) = *v;
        }
        *t.at_mut(r, cols) = *rhs;
        match relation {
            Relation::Le => {
                *t.at_mut(r, slack) = 1.0;
                t.basis[r] = slack;
                slack += 1;
            }
            Relation::Ge => {
                *t.at_mut(r, slack) = -1.0;
                slack += 1;
                *t.at_mut(r, art) = 1.0;
                t.basis[r] = art;
                art += 1;
            }
            Relation::Eq => {
                *t.at_mut(r, art) = 1.0;
                t.basis[r] = art;
                art += 1;
            }
        }
    }

    let is_art = |c: usize| c >= n + n_slack;
    if n_art > 0 {
        let costs: Vec<f64> = (0..cols).map(|c| if is_art(c) { 1.0 } else { 0.0 }).collect();
        t.load_objective(&costs);
        t.optimize(&vec![true; cols])?;
        if -t.at(m, cols) > 1e-9 {
            return Err(Error::InfeasibleLp);
        }
        // drive zero-valued artificials out of the basis
        for r in 0..m {
            if is_art(t.basis[r]) {
                if let Some(c) = (0..n + n_slack).find(|&c| math::abs(t.at(r, c)) > EPS) {
                    t.pivot(r, c);
                }
            }
        }
    }

    let mut costs = vec![0.0; cols];
    costs[..n].copy_from_slice(objective);
    t.load_objective(&costs);
    let allowed: Vec<bool> = (0..cols).map(|c| !is_art(c)).collect();
    t.optimize(&allowed)?;

    let mut x = vec![0.0; n];
    for r in 0..m {
        if t.basis[r] < n {
            x[t.basis[r]] = t.rhs(r).max(0.0);
        }
    }
    let objective_value = math::dot(objective, &x);
    Ok(LpSolution { x, objective: objective_value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y s.t. x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18  →  (2, 6), 36
        let cons = [
            Constraint::new(vec![1.0, 0.0], Relation::Le, 4.0),
            Constraint::new(vec![0.0, 2.0], Relation::Le, 12.0),
            Constraint::new(vec![3.0, 2.0], Relation::Le, 18.0),
        ];
        let sol = minimize(&[-3.0, -5.0], &cons).unwrap();
        assert_relative_eq!(sol.x[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(sol.x[1], 6.0, epsilon = 1e-12);
        assert_relative_eq!(sol.objective, -36.0, epsilon = 1e-12);
    }

    #[test]
    fn ge_and_eq_rows() {
        // min x + y s.t. x + 2y ≥ 4, x − y = 1
        let cons = [
            Constraint::new(vec![1.0, 2.0], Relation::Ge, 4.0),
            Constraint::new(vec![1.0, -1.0], Relation::Eq, 1.0),
        ];
        let sol = minimize(&[1.0, 1.0], &cons).unwrap();
        assert_relative_eq!(sol.x[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(sol.x[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let cons = [
            Constraint::new(vec![1.0, -1.0], Relation::Ge, 1.0),
            Constraint::new(vec![-1.0, 1.0], Relation::Ge, 1.0),
        ];
        assert_eq!(minimize(&[1.0, 1.0], &cons), Err(Error::InfeasibleLp));
        let cons = [Constraint::new(vec![1.0, -1.0], Relation::Le, 1.0)];
        assert_eq!(minimize(&[0.0, -1.0], &cons), Err(Error::UnboundedLp));
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // min x s.t. −x ≤ −3
        let sol = minimize(&[1.0], &[Constraint::new(vec![-1.0], Relation::Le, -3.0)]).unwrap();
        assert_relative_eq!(sol.x[0], 3.0, epsilon = 1e-12);
    }
}
