//! Bounded-variable revised simplex with an explicit dense basis inverse.
//!
//! Variables are laid out as `[structural | slack | artificial]`. Row `i`
//! reads `a_i x + s_i = b_i` with the slack bounded by the row sense
//! (`Le`: `s >= 0`, `Ge`: `s <= 0`, `Eq`: `s = 0`). Artificials only exist
//! during phase 1 and are swapped out for the matching slack afterwards.

use crate::scalar::Scalar;

use super::model::{LpModel, Sense};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    IterationLimit,
}

/// A simplex basis over the `[structural | slack]` variable space.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Basis {
    pub basic: Vec<usize>,
    pub at_upper: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LpSolution<T> {
    pub status: LpStatus,
    pub x: Vec<T>,
    pub objective: T,
    pub duals: Vec<T>,
    pub reduced_costs: Vec<T>,
    pub basis: Option<Basis>,
    pub iterations: usize,
    pub warm_started: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct SimplexOptions<T> {
    pub tol_feas: T,
    pub tol_opt: T,
    /// `None` means `100 * (rows + cols)`.
    pub max_iterations: Option<usize>,
    /// Consecutive degenerate pivots before switching to Bland's rule.
    pub bland_after: usize,
    pub refactor_every: usize,
}

impl<T: Scalar> Default for SimplexOptions<T> {
    fn default() -> Self {
        SimplexOptions {
            tol_feas: T::tol_feas(),
            tol_opt: T::tol_opt(),
            max_iterations: None,
            bland_after: 50,
            refactor_every: 64,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
    /// Nonbasic free variable resting at zero.
    Zero,
    /// Not allowed to enter (inactive column or retired artificial).
    Locked,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
    IterationLimit,
}

struct Simplex<'a, T: Scalar> {
    model: &'a LpModel<T>,
    m: usize,
    n: usize,
    lo: Vec<T>,
    hi: Vec<T>,
    cost: Vec<T>,
    art_sign: Vec<T>,
    state: Vec<VarState>,
    x: Vec<T>,
    basic: Vec<usize>,
    binv: Vec<T>,
    opts: SimplexOptions<T>,
    iterations: usize,
    max_iterations: usize,
    since_refactor: usize,
}

impl<'a, T: Scalar> Simplex<'a, T> {
    fn new(model: &'a LpModel<T>, opts: SimplexOptions<T>) -> Self {
        let m = model.num_rows();
        let n = model.num_cols();
        let total = n + 2 * m;
        let mut lo = vec![T::zero(); total];
        let mut hi = vec![T::zero(); total];
        for (j, c) in model.cols().iter().enumerate() {
            if model.is_active(j) {
                lo[j] = c.lo;
                hi[j] = c.hi;
            }
        }
        for (i, row) in model.rows().iter().enumerate() {
            let (l, h) = match row.sense {
                Sense::Le => (T::zero(), T::infinity()),
                Sense::Ge => (T::neg_infinity(), T::zero()),
                Sense::Eq => (T::zero(), T::zero()),
            };
            lo[n + i] = l;
            hi[n + i] = h;
            lo[n + m + i] = T::zero();
            hi[n + m + i] = T::infinity();
        }
        let max_iterations = opts.max_iterations.unwrap_or(100 * (m + n).max(1));
        Simplex {
            model,
            m,
            n,
            lo,
            hi,
            cost: vec![T::zero(); total],
            art_sign: vec![T::one(); m],
            state: vec![VarState::Lower; total],
            x: vec![T::zero(); total],
            basic: Vec::with_capacity(m),
            binv: vec![T::zero(); m * m],
            opts,
            iterations: 0,
            max_iterations,
            since_refactor: 0,
        }
    }

    fn for_each_entry(&self, j: usize, mut f: impl FnMut(usize, T)) {
        if j < self.n {
            for &(i, a) in &self.model.col(j).coefs {
                f(i, a);
            }
        } else if j < self.n + self.m {
            f(j - self.n, T::one());
        } else {
            let i = j - self.n - self.m;
            f(i, self.art_sign[i]);
        }
    }

    fn nonbasic_value(&self, j: usize, prefer_upper: bool) -> (VarState, T) {
        let (l, h) = (self.lo[j], self.hi[j]);
        if prefer_upper && h.is_finite() {
            (VarState::Upper, h)
        } else if l.is_finite() {
            (VarState::Lower, l)
        } else if h.is_finite() {
            (VarState::Upper, h)
        } else {
            (VarState::Zero, T::zero())
        }
    }

    /// Rebuilds the dense inverse of the current basis matrix.
    fn refactor(&mut self) -> bool {
        let m = self.m;
        let mut a = vec![T::zero(); m * m];
        for (pos, &j) in self.basic.iter().enumerate() {
            self.for_each_entry(j, |i, v| a[i * m + pos] = a[i * m + pos] + v);
        }
        let mut inv = vec![T::zero(); m * m];
        for i in 0..m {
            inv[i * m + i] = T::one();
        }
        for col in 0..m {
            let mut piv = col;
            let mut best = a[col * m + col].abs();
            for r in col + 1..m {
                let v = a[r * m + col].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best <= T::tol_pivot() {
                return false;
            }
            if piv != col {
                for k in 0..m {
                    a.swap(col * m + k, piv * m + k);
                    inv.swap(col * m + k, piv * m + k);
                }
            }
            let d = a[col * m + col];
            for k in 0..m {
                a[col * m + k] = a[col * m + k] / d;
                inv[col * m + k] = inv[col * m + k] / d;
            }
            for r in 0..m {
                if r == col {
                    continue;
                }
                let f = a[r * m + col];
                if f == T::zero() {
                    continue;
                }
                for k in 0..m {
                    a[r * m + k] = a[r * m + k] - f * a[col * m + k];
                    inv[r * m + k] = inv[r * m + k] - f * inv[col * m + k];
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        true
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs: Vec<T> = self.model.rows().iter().map(|r| r.rhs).collect();
        let total = self.n + 2 * self.m;
        for j in 0..total {
            if self.state[j] == VarState::Basic || self.x[j] == T::zero() {
                continue;
            }
            let xj = self.x[j];
            self.for_each_entry(j, |i, a| rhs[i] = rhs[i] - a * xj);
        }
        for pos in 0..m {
            let mut v = T::zero();
            for k in 0..m {
                v = v + self.binv[pos * m + k] * rhs[k];
            }
            let j = self.basic[pos];
            self.x[j] = v;
        }
    }

    fn duals(&self) -> Vec<T> {
        let m = self.m;
        let mut y = vec![T::zero(); m];
        for pos in 0..m {
            let c = self.cost[self.basic[pos]];
            if c == T::zero() {
                continue;
            }
            for k in 0..m {
                y[k] = y[k] + c * self.binv[pos * m + k];
            }
        }
        y
    }

    fn reduced_cost(&self, j: usize, y: &[T]) -> T {
        let mut d = self.cost[j];
        self.for_each_entry(j, |i, a| d = d - y[i] * a);
        d
    }

    fn ftran(&self, j: usize) -> Vec<T> {
        let m = self.m;
        let mut alpha = vec![T::zero(); m];
        self.for_each_entry(j, |i, a| {
            for pos in 0..m {
                alpha[pos] = alpha[pos] + self.binv[pos * m + i] * a;
            }
        });
        alpha
    }

    fn pivot_inverse(&mut self, r: usize, alpha: &[T]) {
        let m = self.m;
        let p = alpha[r];
        for k in 0..m {
            self.binv[r * m + k] = self.binv[r * m + k] / p;
        }
        for i in 0..m {
            if i == r || alpha[i] == T::zero() {
                continue;
            }
            let f = alpha[i];
            for k in 0..m {
                self.binv[i * m + k] = self.binv[i * m + k] - f * self.binv[r * m + k];
            }
        }
    }

    /// Returns the entering variable and its direction (+1 increase, -1 decrease).
    fn choose_entering(&self, y: &[T], bland: bool) -> Option<(usize, T)> {
        let tol = self.opts.tol_opt;
        let total = self.n + 2 * self.m;
        let mut best: Option<(usize, T, T)> = None;
        for j in 0..total {
            let dir = match self.state[j] {
                VarState::Basic | VarState::Locked => continue,
                VarState::Lower => {
                    if self.lo[j] == self.hi[j] {
                        continue;
                    }
                    let d = self.reduced_cost(j, y);
                    if d < -tol {
                        (T::one(), -d)
                    } else {
                        continue;
                    }
                }
                VarState::Upper => {
                    if self.lo[j] == self.hi[j] {
                        continue;
                    }
                    let d = self.reduced_cost(j, y);
                    if d > tol {
                        (-T::one(), d)
                    } else {
                        continue;
                    }
                }
                VarState::Zero => {
                    let d = self.reduced_cost(j, y);
                    if d < -tol {
                        (T::one(), -d)
                    } else if d > tol {
                        (-T::one(), d)
                    } else {
                        continue;
                    }
                }
            };
            if bland {
                return Some((j, dir.0));
            }
            if best.map_or(true, |(_, _, s)| dir.1 > s) {
                best = Some((j, dir.0, dir.1));
            }
        }
        best.map(|(j, d, _)| (j, d))
    }

    fn iterate(&mut self) -> PhaseOutcome {
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= self.max_iterations {
                return PhaseOutcome::IterationLimit;
            }
            if self.since_refactor >= self.opts.refactor_every {
                if self.refactor() {
                    self.recompute_basic_values();
                }
            }
            let bland = degenerate_run >= self.opts.bland_after;
            let y = self.duals();
            let Some((q, dir)) = self.choose_entering(&y, bland) else {
                if self.since_refactor > 0 && self.refactor() {
                    self.recompute_basic_values();
                    let y = self.duals();
                    if self.choose_entering(&y, false).is_some() {
                        continue;
                    }
                }
                return PhaseOutcome::Optimal;
            };
            let alpha = self.ftran(q);
            let tol_piv = T::tol_pivot();
            let tol_feas = self.opts.tol_feas;

            // Harris two-pass ratio test; Bland mode uses the plain textbook rule.
            let mut bound = T::infinity();
            if !bland {
                for (pos, &a) in alpha.iter().enumerate() {
                    let delta = dir * a;
                    let b = self.basic[pos];
                    let lim = if delta > tol_piv && self.lo[b].is_finite() {
                        (self.x[b] - self.lo[b] + tol_feas) / delta
                    } else if delta < -tol_piv && self.hi[b].is_finite() {
                        (self.hi[b] - self.x[b] + tol_feas) / -delta
                    } else {
                        continue;
                    };
                    bound = bound.min(lim);
                }
            }
            let mut leave: Option<(usize, T)> = None;
            let mut leave_key = T::neg_infinity();
            for (pos, &a) in alpha.iter().enumerate() {
                let delta = dir * a;
                let b = self.basic[pos];
                let ratio = if delta > tol_piv && self.lo[b].is_finite() {
                    (self.x[b] - self.lo[b]) / delta
                } else if delta < -tol_piv && self.hi[b].is_finite() {
                    (self.hi[b] - self.x[b]) / -delta
                } else {
                    continue;
                };
                let ratio = ratio.max(T::zero());
                if bland {
                    let better = match leave {
                        None => true,
                        Some((lp, lr)) => {
                            ratio < lr || (ratio == lr && self.basic[pos] < self.basic[lp])
                        }
                    };
                    if better {
                        leave = Some((pos, ratio));
                    }
                } else if ratio <= bound && delta.abs() > leave_key {
                    leave_key = delta.abs();
                    leave = Some((pos, ratio));
                }
            }
            let flip_range = if self.lo[q].is_finite() && self.hi[q].is_finite() {
                self.hi[q] - self.lo[q]
            } else {
                T::infinity()
            };
            let step = leave.map_or(T::infinity(), |(_, r)| r);
            if !flip_range.is_finite() && !step.is_finite() {
                return PhaseOutcome::Unbounded;
            }
            self.iterations += 1;
            self.since_refactor += 1;
            let (t, flip) = if flip_range <= step {
                (flip_range, true)
            } else {
                (step, false)
            };
            if t <= tol_piv {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            for (pos, &a) in alpha.iter().enumerate() {
                if a != T::zero() {
                    let b = self.basic[pos];
                    self.x[b] = self.x[b] - t * dir * a;
                }
            }
            if flip {
                if dir > T::zero() {
                    self.state[q] = VarState::Upper;
                    self.x[q] = self.hi[q];
                } else {
                    self.state[q] = VarState::Lower;
                    self.x[q] = self.lo[q];
                }
                continue;
            }
            let (r, _) = leave.expect("finite step implies a leaving row");
            let b = self.basic[r];
            let delta = dir * alpha[r];
            if delta > T::zero() {
                self.state[b] = VarState::Lower;
                self.x[b] = self.lo[b];
            } else {
                self.state[b] = VarState::Upper;
                self.x[b] = self.hi[b];
            }
            self.x[q] = self.x[q] + t * dir;
            self.basic[r] = q;
            self.state[q] = VarState::Basic;
            self.pivot_inverse(r, &alpha);
        }
    }

    fn set_nonbasic_defaults(&mut self, at_upper: &[usize]) {
        let total = self.n + 2 * self.m;
        for j in 0..total {
            if j < self.n && !self.model.is_active(j) {
                self.state[j] = VarState::Locked;
                self.x[j] = T::zero();
                continue;
            }
            if j >= self.n + self.m {
                self.state[j] = VarState::Locked;
                self.x[j] = T::zero();
                continue;
            }
            let (s, v) = self.nonbasic_value(j, at_upper.contains(&j));
            self.state[j] = s;
            self.x[j] = v;
        }
    }

    fn try_warm(&mut self, basis: &Basis) -> bool {
        let (m, n) = (self.m, self.n);
        if basis.basic.len() != m {
            return false;
        }
        let mut seen = vec![false; n + m];
        for &j in &basis.basic {
            if j >= n + m || seen[j] || (j < n && !self.model.is_active(j)) {
                return false;
            }
            seen[j] = true;
        }
        self.set_nonbasic_defaults(&basis.at_upper);
        self.basic = basis.basic.clone();
        for &j in &self.basic {
            self.state[j] = VarState::Basic;
        }
        if !self.refactor() {
            return false;
        }
        self.recompute_basic_values();
        let tol = self.opts.tol_feas;
        self.basic
            .iter()
            .all(|&j| self.x[j] >= self.lo[j] - tol && self.x[j] <= self.hi[j] + tol)
    }

    fn cold_start(&mut self) -> Result<(), LpStatus> {
        let (m, n) = (self.m, self.n);
        self.set_nonbasic_defaults(&[]);
        let mut resid: Vec<T> = self.model.rows().iter().map(|r| r.rhs).collect();
        for j in 0..n {
            let xj = self.x[j];
            if xj != T::zero() {
                for &(i, a) in &self.model.col(j).coefs {
                    resid[i] = resid[i] - a * xj;
                }
            }
        }
        self.basic.clear();
        for (i, &r) in resid.iter().enumerate() {
            let s = n + i;
            let a = n + m + i;
            if r >= self.lo[s] && r <= self.hi[s] {
                self.state[s] = VarState::Basic;
                self.x[s] = r;
                self.state[a] = VarState::Locked;
                self.x[a] = T::zero();
                self.basic.push(s);
            } else {
                let sv = r.max(self.lo[s]).min(self.hi[s]);
                self.x[s] = sv;
                self.state[s] = if sv == self.lo[s] {
                    VarState::Lower
                } else {
                    VarState::Upper
                };
                let diff = r - sv;
                self.art_sign[i] = if diff < T::zero() { -T::one() } else { T::one() };
                self.state[a] = VarState::Basic;
                self.x[a] = diff.abs();
                self.basic.push(a);
            }
        }
        for j in 0..(n + 2 * m) {
            self.cost[j] = if j >= n + m { T::one() } else { T::zero() };
        }
        // Artificials that start nonbasic never enter.
        if !self.refactor() {
            return Err(LpStatus::IterationLimit);
        }
        match self.iterate() {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded => return Err(LpStatus::IterationLimit),
            PhaseOutcome::IterationLimit => return Err(LpStatus::IterationLimit),
        }
        self.recompute_basic_values();
        let infeas = (0..m).fold(T::zero(), |acc, i| acc + self.x[n + m + i].max(T::zero()));
        let scale = self
            .model
            .rows()
            .iter()
            .fold(T::one(), |acc, r| acc.max(r.rhs.abs()));
        if infeas > self.opts.tol_feas * scale {
            return Err(LpStatus::Infeasible);
        }
        // Swap basic artificials for their row slack: the columns are parallel.
        for pos in 0..m {
            let j = self.basic[pos];
            if j >= n + m {
                let i = j - n - m;
                let s = n + i;
                debug_assert_ne!(self.state[s], VarState::Basic);
                let sign = self.art_sign[i];
                for k in 0..m {
                    self.binv[pos * m + k] = self.binv[pos * m + k] * sign;
                }
                self.basic[pos] = s;
                self.state[s] = VarState::Basic;
                self.x[s] = T::zero();
                self.state[j] = VarState::Locked;
                self.x[j] = T::zero();
            }
        }
        for i in 0..m {
            let a = n + m + i;
            self.state[a] = VarState::Locked;
            self.x[a] = T::zero();
        }
        self.recompute_basic_values();
        Ok(())
    }

    fn set_phase2_costs(&mut self) {
        let (m, n) = (self.m, self.n);
        for j in 0..(n + 2 * m) {
            self.cost[j] = if j < n && self.model.is_active(j) {
                self.model.col(j).obj
            } else {
                T::zero()
            };
        }
    }

    fn export_basis(&self) -> Basis {
        let at_upper = (0..self.n + self.m)
            .filter(|&j| self.state[j] == VarState::Upper)
            .collect();
        Basis {
            basic: self.basic.clone(),
            at_upper,
        }
    }
}

fn failed<T: Scalar>(status: LpStatus, model: &LpModel<T>, iterations: usize, warm: bool) -> LpSolution<T> {
    LpSolution {
        status,
        x: vec![T::zero(); model.num_cols()],
        objective: T::nan(),
        duals: vec![T::zero(); model.num_rows()],
        reduced_costs: vec![T::zero(); model.num_cols()],
        basis: None,
        iterations,
        warm_started: warm,
    }
}

pub fn solve_with<T: Scalar>(
    model: &LpModel<T>,
    warm_start: Option<&Basis>,
    opts: SimplexOptions<T>,
) -> LpSolution<T> {
    let mut sx = Simplex::new(model, opts);
    let mut warm = false;
    if let Some(b) = warm_start {
        warm = sx.try_warm(b);
    }
    if !warm {
        if let Err(status) = sx.cold_start() {
            return failed(status, model, sx.iterations, false);
        }
    }
    sx.set_phase2_costs();
    let mut retried = false;
    loop {
        match sx.iterate() {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded => return failed(LpStatus::Unbounded, model, sx.iterations, warm),
            PhaseOutcome::IterationLimit => {
                return failed(LpStatus::IterationLimit, model, sx.iterations, warm)
            }
        }
        // Guard against drift: the final point must be primal feasible.
        if sx.refactor() {
            sx.recompute_basic_values();
        }
        let tol = sx.opts.tol_feas;
        let drifted = sx
            .basic
            .iter()
            .any(|&j| sx.x[j] < sx.lo[j] - tol || sx.x[j] > sx.hi[j] + tol);
        if !drifted {
            break;
        }
        if retried {
            return failed(LpStatus::IterationLimit, model, sx.iterations, warm);
        }
        retried = true;
        warm = false;
        if let Err(status) = sx.cold_start() {
            return failed(status, model, sx.iterations, false);
        }
        sx.set_phase2_costs();
    }
    let y = sx.duals();
    let n = sx.n;
    let mut x = vec![T::zero(); n];
    let mut rc = vec![T::zero(); n];
    for j in 0..n {
        if model.is_active(j) {
            x[j] = sx.x[j].max(sx.lo[j]).min(sx.hi[j]);
            rc[j] = if sx.state[j] == VarState::Basic {
                T::zero()
            } else {
                sx.reduced_cost(j, &y)
            };
        }
    }
    let objective = model.objective_value(&x);
    LpSolution {
        status: LpStatus::Optimal,
        x,
        objective,
        duals: y,
        reduced_costs: rc,
        basis: Some(sx.export_basis()),
        iterations: sx.iterations,
        warm_started: warm,
    }
}
