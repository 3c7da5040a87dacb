//! Dense revised simplex for small restricted master problems.

mod model;
mod solver;

pub use model::{ColSpec, LpError, LpModel, RowSpec, Sense};
pub use solver::{solve_with, Basis, LpSolution, LpStatus, SimplexOptions};

use crate::scalar::Scalar;

impl<T: Scalar> LpModel<T> {
    pub fn solve(&self, warm_start: Option<&Basis>) -> LpSolution<T> {
        solve_with(self, warm_start, SimplexOptions::default())
    }

    pub fn solve_with(&self, warm_start: Option<&Basis>, opts: SimplexOptions<T>) -> LpSolution<T> {
        solve_with(self, warm_start, opts)
    }

    /// `b^T y` plus the bound contributions of nonbasic columns.
    pub fn dual_objective(&self, sol: &LpSolution<T>) -> T {
        let mut v = T::zero();
        for (row, &y) in self.rows().iter().zip(&sol.duals) {
            v = v + row.rhs * y;
        }
        for (j, c) in self.cols().iter().enumerate() {
            if !self.is_active(j) {
                continue;
            }
            let d = sol.reduced_costs[j];
            if d > T::zero() && c.lo.is_finite() {
                v = v + d * c.lo;
            } else if d < T::zero() && c.hi.is_finite() {
                v = v + d * c.hi;
            }
        }
        v
    }
}

pub fn solve<T: Scalar>(model: &LpModel<T>, warm_start: Option<&Basis>) -> LpSolution<T> {
    model.solve(warm_start)
}
