use std::fmt::Write as _;

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl Sense {
    fn symbol(self) -> &'static str {
        match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RowSpec<T> {
    pub sense: Sense,
    pub rhs: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColSpec<T> {
    pub obj: T,
    pub lo: T,
    pub hi: T,
    /// Sparse coefficients as `(row, value)`.
    pub coefs: Vec<(usize, T)>,
}

impl<T: Scalar> ColSpec<T> {
    pub fn new(obj: T, lo: T, hi: T, coefs: Vec<(usize, T)>) -> Self {
        ColSpec { obj, lo, hi, coefs }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("column references row {row} but the model has {rows} rows")]
    UnknownRow { row: usize, rows: usize },
    #[error("unknown column id {0}")]
    UnknownColumn(usize),
    #[error("non-finite coefficient or objective in column")]
    NonFinite,
    #[error("lower bound {lo} exceeds upper bound {hi}")]
    InvalidBounds { lo: f64, hi: f64 },
    #[error("cannot deactivate column {0}: its bounds exclude zero")]
    CannotDeactivate(usize),
}

/// A minimisation LP over explicitly stored rows and sparse columns.
///
/// Column ids are stable: columns are never physically removed, only
/// deactivated, so every id handed out by [`LpModel::add_column`] stays valid.
#[derive(Debug, Clone, Default)]
pub struct LpModel<T> {
    rows: Vec<RowSpec<T>>,
    cols: Vec<ColSpec<T>>,
    active: Vec<bool>,
}

impl<T: Scalar> LpModel<T> {
    pub fn new() -> Self {
        LpModel {
            rows: Vec::new(),
            cols: Vec::new(),
            active: Vec::new(),
        }
    }

    pub fn add_row(&mut self, sense: Sense, rhs: T) -> usize {
        self.rows.push(RowSpec { sense, rhs });
        self.rows.len() - 1
    }

    pub fn add_column(&mut self, col: ColSpec<T>) -> Result<usize, LpError> {
        if !col.obj.is_finite() || col.lo.is_nan() || col.hi.is_nan() {
            return Err(LpError::NonFinite);
        }
        if col.lo > col.hi {
            return Err(LpError::InvalidBounds {
                lo: col.lo.to_f64_lossy(),
                hi: col.hi.to_f64_lossy(),
            });
        }
        for &(row, v) in &col.coefs {
            if row >= self.rows.len() {
                return Err(LpError::UnknownRow {
                    row,
                    rows: self.rows.len(),
                });
            }
            if !v.is_finite() {
                return Err(LpError::NonFinite);
            }
        }
        self.cols.push(col);
        self.active.push(true);
        Ok(self.cols.len() - 1)
    }

    pub fn set_variable_bounds(&mut self, col: usize, lo: T, hi: T) -> Result<(), LpError> {
        if lo > hi || lo.is_nan() || hi.is_nan() {
            return Err(LpError::InvalidBounds {
                lo: lo.to_f64_lossy(),
                hi: hi.to_f64_lossy(),
            });
        }
        let c = self.cols.get_mut(col).ok_or(LpError::UnknownColumn(col))?;
        c.lo = lo;
        c.hi = hi;
        Ok(())
    }

    pub fn set_objective(&mut self, col: usize, obj: T) -> Result<(), LpError> {
        if !obj.is_finite() {
            return Err(LpError::NonFinite);
        }
        self.cols.get_mut(col).ok_or(LpError::UnknownColumn(col))?.obj = obj;
        Ok(())
    }

    pub fn set_rhs(&mut self, row: usize, rhs: T) {
        self.rows[row].rhs = rhs;
    }

    /// Inactive columns are invisible to the solver and read as zero.
    pub fn set_column_active(&mut self, col: usize, active: bool) -> Result<(), LpError> {
        let c = self.cols.get(col).ok_or(LpError::UnknownColumn(col))?;
        if !active && (c.lo > T::zero() || c.hi < T::zero()) {
            return Err(LpError::CannotDeactivate(col));
        }
        self.active[col] = active;
        Ok(())
    }

    pub fn is_active(&self, col: usize) -> bool {
        self.active[col]
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn num_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, i: usize) -> &RowSpec<T> {
        &self.rows[i]
    }

    pub fn col(&self, j: usize) -> &ColSpec<T> {
        &self.cols[j]
    }

    pub fn rows(&self) -> &[RowSpec<T>] {
        &self.rows
    }

    pub fn cols(&self) -> &[ColSpec<T>] {
        &self.cols
    }

    /// Row activities `A x` for a given primal vector.
    pub fn row_activity(&self, x: &[T]) -> Vec<T> {
        let mut act = vec![T::zero(); self.rows.len()];
        for (j, c) in self.cols.iter().enumerate() {
            if x[j] == T::zero() {
                continue;
            }
            for &(i, a) in &c.coefs {
                act[i] = act[i] + a * x[j];
            }
        }
        act
    }

    pub fn objective_value(&self, x: &[T]) -> T {
        self.cols
            .iter()
            .zip(x)
            .fold(T::zero(), |acc, (c, &v)| acc + c.obj * v)
    }

    /// Largest bound or row violation of `x`; zero means feasible.
    pub fn max_violation(&self, x: &[T]) -> T {
        let mut worst = T::zero();
        for (j, c) in self.cols.iter().enumerate() {
            worst = worst.max(c.lo - x[j]).max(x[j] - c.hi);
        }
        for (row, act) in self.rows.iter().zip(self.row_activity(x)) {
            let v = match row.sense {
                Sense::Le => act - row.rhs,
                Sense::Ge => row.rhs - act,
                Sense::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Plain-text dump, one constraint per line, in a CPLEX-LP-like layout.
    pub fn to_lp_string(&self) -> String {
        let mut out = String::new();
        let term = |out: &mut String, coef: T, name: &str| {
            let v = coef.to_f64_lossy();
            if v < 0.0 {
                let _ = write!(out, " - {} {}", -v, name);
            } else {
                let _ = write!(out, " + {} {}", v, name);
            }
        };
        out.push_str("Minimize\n obj:");
        for (j, c) in self.cols.iter().enumerate() {
            if self.active[j] && c.obj != T::zero() {
                term(&mut out, c.obj, &format!("x{j}"));
            }
        }
        out.push_str("\nSubject To\n");
        let mut by_row: Vec<Vec<(usize, T)>> = vec![Vec::new(); self.rows.len()];
        for (j, c) in self.cols.iter().enumerate() {
            if !self.active[j] {
                continue;
            }
            for &(i, a) in &c.coefs {
                by_row[i].push((j, a));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            let _ = write!(out, " r{i}:");
            if by_row[i].is_empty() {
                out.push_str(" 0 x0");
            }
            for &(j, a) in &by_row[i] {
                term(&mut out, a, &format!("x{j}"));
            }
            let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs.to_f64_lossy());
        }
        out.push_str("Bounds\n");
        for (j, c) in self.cols.iter().enumerate() {
            if !self.active[j] {
                continue;
            }
            let lo = c.lo.to_f64_lossy();
            let hi = c.hi.to_f64_lossy();
            let fmt = |v: f64| {
                if v == f64::INFINITY {
                    "+inf".to_string()
                } else if v == f64::NEG_INFINITY {
                    "-inf".to_string()
                } else {
                    v.to_string()
                }
            };
            let _ = writeln!(out, " {} <= x{} <= {}", fmt(lo), j, fmt(hi));
        }
        out.push_str("End\n");
        out
    }
}
