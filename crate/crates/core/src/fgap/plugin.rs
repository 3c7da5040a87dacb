//! Agent-assignment master for the fair GAP and its knapsack pricer.

use crate::bitset::ElemSet;
use crate::colgen::{Column, MasterSpec, Pricer, PricingRequest};
use crate::engine::{BranchDecision, Incumbent, NodeColumn, ProblemPlugin, INTEGRALITY_TOL};
use crate::simplex_lp::{ColSpec, Sense};

use super::instance::GapInstance;
use super::knapsack::best_subset;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GapMode {
    /// Minimise the load range subject to a profit floor.
    Range { profit_floor: i64 },
    /// Maximise total profit (objective is the negated profit).
    MaxProfit,
}

pub struct FgapProblem {
    pub inst: GapInstance,
    pub mode: GapMode,
    cover: usize,
    conv: usize,
    eta: usize,
    gamma: usize,
    profit_row: Option<usize>,
    rows: usize,
}

impl FgapProblem {
    pub fn new(inst: GapInstance, mode: GapMode) -> Self {
        let (n, m) = (inst.agents(), inst.jobs());
        let (profit_row, cover) = match mode {
            GapMode::Range { .. } => (Some(0), 1),
            GapMode::MaxProfit => (None, 0),
        };
        let conv = cover + m;
        let eta = conv + n;
        let gamma = eta + n;
        let rows = match mode {
            GapMode::Range { .. } => gamma + n,
            GapMode::MaxProfit => eta,
        };
        FgapProblem {
            inst,
            mode,
            cover,
            conv,
            eta,
            gamma,
            profit_row,
            rows,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows
    }

    pub fn make_column(&self, agent: usize, mut jobs: Vec<usize>) -> Column {
        jobs.sort_unstable();
        Column {
            owner: agent,
            cost: self.inst.profit_of(agent, &jobs) as f64,
            payoff: self.inst.load(agent, &jobs) as f64,
            covers: jobs.iter().copied().collect(),
            payload: jobs,
        }
    }

    /// `(forced, forbidden)` job sets of an agent under a decision stack.
    fn fixings(&self, agent: usize, decisions: &[BranchDecision]) -> (ElemSet, ElemSet) {
        let mut forced = ElemSet::empty();
        let mut forbidden = ElemSet::empty();
        for d in decisions {
            if let BranchDecision::JobAgent { job, agent: a, forced: f } = *d {
                if a == agent {
                    if f {
                        forced.insert(job);
                    } else {
                        forbidden.insert(job);
                    }
                } else if f {
                    forbidden.insert(job);
                }
            }
        }
        (forced, forbidden)
    }

    /// Loads per agent of an assignment (`assign[j]` = agent), idle agents at 0.
    pub fn loads(&self, assign: &[usize]) -> Vec<i64> {
        let mut l = vec![0; self.inst.agents()];
        for (j, &i) in assign.iter().enumerate() {
            l[i] += self.inst.weight[i][j];
        }
        l
    }

    fn objective_of_columns(&self, cols: &[&Column]) -> f64 {
        match self.mode {
            GapMode::Range { .. } => {
                let mut l = vec![0.0; self.inst.agents()];
                for c in cols {
                    l[c.owner] += c.payoff;
                }
                crate::objective::range_of(&l).unwrap_or(0.0)
            }
            GapMode::MaxProfit => -cols.iter().map(|c| c.cost).sum::<f64>(),
        }
    }

    /// Incumbent from a complete assignment, if it respects capacities and the floor.
    pub fn incumbent_from_assignment(&self, assign: &[usize]) -> Option<Incumbent> {
        let n = self.inst.agents();
        if assign.len() != self.inst.jobs() || assign.iter().any(|&i| i >= n) {
            return None;
        }
        let loads = self.loads(assign);
        if loads.iter().zip(&self.inst.capacity).any(|(l, c)| l > c) {
            return None;
        }
        let profit: i64 = assign.iter().enumerate().map(|(j, &i)| self.inst.profit[i][j]).sum();
        if let GapMode::Range { profit_floor } = self.mode {
            if profit < profit_floor {
                return None;
            }
        }
        let cols: Vec<Column> = (0..n)
            .map(|i| {
                let jobs: Vec<usize> = (0..assign.len()).filter(|&j| assign[j] == i).collect();
                self.make_column(i, jobs)
            })
            .collect();
        let refs: Vec<&Column> = cols.iter().collect();
        Some(Incumbent {
            objective: self.objective_of_columns(&refs),
            columns: cols,
        })
    }

    /// Job-to-agent map of an integral column selection.
    pub fn assignment_of(&self, cols: &[Column]) -> Vec<usize> {
        let mut a = vec![usize::MAX; self.inst.jobs()];
        for c in cols {
            for &j in &c.payload {
                a[j] = c.owner;
            }
        }
        a
    }
}

impl Pricer for FgapProblem {
    fn num_subproblems(&self) -> usize {
        self.inst.agents()
    }

    fn price(&self, agent: usize, req: &PricingRequest) -> Vec<Column> {
        let d = req.duals;
        let m = self.inst.jobs();
        let lambda = self.profit_row.map_or(0.0, |r| d[r]);
        let (w, obj) = match self.mode {
            GapMode::Range { .. } => (d[self.eta + agent] + d[self.gamma + agent], 0.0),
            GapMode::MaxProfit => (0.0, req.obj_scale),
        };
        let mu = d[self.conv + agent];
        let value = |j: usize| {
            // Column objective is the negated profit in profit mode.
            obj * self.inst.profit[agent][j] as f64
                + d[self.cover + j]
                + lambda * self.inst.profit[agent][j] as f64
                + w * self.inst.weight[agent][j] as f64
        };
        let (forced, forbidden) = self.fixings(agent, req.decisions);
        if !forced.is_disjoint(forbidden) {
            return Vec::new();
        }
        let window = req.window(agent);
        let cap = self.inst.capacity[agent];
        let hi = if window.has_upper() {
            (window.hi.floor() as i64).min(cap)
        } else {
            cap
        };
        let lo = window.lo.max(0.0).ceil() as i64;
        let base_w: i64 = forced.iter().map(|j| self.inst.weight[agent][j]).sum();
        let base_v: f64 = forced.iter().map(value).sum();
        if hi < base_w || lo > hi {
            return Vec::new();
        }
        let free: Vec<usize> = (0..m).filter(|&j| !forced.contains(j) && !forbidden.contains(j)).collect();
        let vals: Vec<f64> = free.iter().map(|&j| value(j)).collect();
        let wts: Vec<usize> = free.iter().map(|&j| self.inst.weight[agent][j] as usize).collect();
        let lo_r = (lo - base_w).max(0) as usize;
        let hi_r = (hi - base_w) as usize;
        let Some((pick, v)) = best_subset(&vals, &wts, lo_r, hi_r) else {
            return Vec::new();
        };
        let rc = -mu - (base_v + v);
        if rc >= req.threshold {
            return Vec::new();
        }
        let mut jobs: Vec<usize> = forced.iter().collect();
        jobs.extend(pick.into_iter().map(|t| free[t]));
        vec![self.make_column(agent, jobs)]
    }

    fn column_coefs(&self, col: &Column) -> Vec<(usize, f64)> {
        let mut out = Vec::with_capacity(col.payload.len() + 4);
        if let Some(r) = self.profit_row {
            if col.cost != 0.0 {
                out.push((r, col.cost));
            }
        }
        for &j in &col.payload {
            out.push((self.cover + j, 1.0));
        }
        out.push((self.conv + col.owner, 1.0));
        if let GapMode::Range { .. } = self.mode {
            if col.payoff != 0.0 {
                out.push((self.eta + col.owner, col.payoff));
                out.push((self.gamma + col.owner, col.payoff));
            }
        }
        out
    }

    fn column_obj(&self, col: &Column) -> f64 {
        match self.mode {
            GapMode::Range { .. } => 0.0,
            GapMode::MaxProfit => -col.cost,
        }
    }
}

impl ProblemPlugin for FgapProblem {
    fn master_spec(&self) -> MasterSpec {
        let (n, m) = (self.inst.agents(), self.inst.jobs());
        let mut rows = Vec::with_capacity(self.rows);
        let mut names = Vec::with_capacity(self.rows);
        if let GapMode::Range { profit_floor } = self.mode {
            rows.push((Sense::Ge, profit_floor as f64));
            names.push("profit".to_string());
        }
        for j in 0..m {
            rows.push((Sense::Eq, 1.0));
            names.push(format!("cover_{j}"));
        }
        for i in 0..n {
            rows.push((Sense::Le, 1.0));
            names.push(format!("conv_{i}"));
        }
        let cap_max = self.inst.capacity.iter().copied().max().unwrap_or(0) as f64;
        let max_profit: f64 = (0..m)
            .map(|j| (0..n).map(|i| self.inst.profit[i][j]).max().unwrap_or(0) as f64)
            .sum();
        let mut statics = Vec::new();
        let (mut eta, mut gamma) = (None, None);
        let trivial_lb;
        let scale;
        match self.mode {
            GapMode::Range { .. } => {
                for i in 0..n {
                    rows.push((Sense::Le, 0.0));
                    names.push(format!("eta_{i}"));
                }
                for i in 0..n {
                    rows.push((Sense::Ge, 0.0));
                    names.push(format!("gamma_{i}"));
                }
                statics.push(ColSpec::new(1.0, 0.0, cap_max, (0..n).map(|i| (self.eta + i, -1.0)).collect()));
                statics.push(ColSpec::new(-1.0, 0.0, cap_max, (0..n).map(|i| (self.gamma + i, -1.0)).collect()));
                eta = Some(0);
                gamma = Some(1);
                trivial_lb = 0.0;
                scale = cap_max;
            }
            GapMode::MaxProfit => {
                trivial_lb = -max_profit;
                scale = max_profit;
            }
        }
        MasterSpec {
            rows,
            row_names: names,
            statics,
            eta,
            gamma,
            z: Vec::new(),
            num_subproblems: n,
            penalty: 10.0 * (scale + 1.0),
            integer_payoffs: true,
            integer_objective: true,
            trivial_lb,
            payoff_cap: cap_max,
        }
    }

    fn initial_columns(&self) -> Vec<Column> {
        (0..self.inst.agents()).map(|i| self.make_column(i, Vec::new())).collect()
    }

    fn column_allowed(&self, col: &Column, decisions: &[BranchDecision]) -> bool {
        let (forced, forbidden) = self.fixings(col.owner, decisions);
        forced.is_subset(col.covers) && col.covers.is_disjoint(forbidden)
    }

    fn branch(&self, cols: &[NodeColumn], _decisions: &[BranchDecision]) -> Option<(BranchDecision, BranchDecision)> {
        let (n, m) = (self.inst.agents(), self.inst.jobs());
        let mut agg = vec![vec![0.0; n]; m];
        for c in cols {
            for &j in &c.col.payload {
                agg[j][c.col.owner] += c.value;
            }
        }
        let mut best: Option<(f64, usize, usize)> = None;
        for (j, row) in agg.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                if v <= INTEGRALITY_TOL || v >= 1.0 - INTEGRALITY_TOL {
                    continue;
                }
                let s = (v - 0.5).abs();
                if best.map_or(true, |b| s < b.0 - 1e-12) {
                    best = Some((s, j, i));
                }
            }
        }
        let (_, job, agent) = best?;
        Some((
            BranchDecision::JobAgent { job, agent, forced: true },
            BranchDecision::JobAgent { job, agent, forced: false },
        ))
    }

    fn is_integral(&self, cols: &[NodeColumn]) -> bool {
        cols.iter()
            .filter(|c| !c.col.payload.is_empty())
            .all(|c| c.value <= INTEGRALITY_TOL || c.value >= 1.0 - INTEGRALITY_TOL)
    }

    fn integral_objective(&self, selected: &[&Column]) -> f64 {
        self.objective_of_columns(selected)
    }
}
