//! Restricted master management: column pool with aging, artificial slacks,
//! and the pricing loop for a single tree node.

use std::collections::HashMap;
use std::time::Instant;

use log::{debug, trace, warn};
use rayon::prelude::*;

use crate::bitset::ElemSet;
use crate::branching::Window;
use crate::engine::BranchDecision;
use crate::simplex_lp::{Basis, ColSpec, LpModel, LpSolution, LpStatus, Sense};

pub type ColId = usize;

pub const TOL_FEAS: f64 = 1e-7;
pub const TOL_OPT: f64 = 1e-6;
/// Total artificial mass below which the master counts as feasible.
const ART_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    /// Vehicle, last customer, order position or agent.
    pub owner: usize,
    /// Route cost or assignment profit.
    pub cost: f64,
    pub payoff: f64,
    pub covers: ElemSet,
    /// Vertex sequence without depots (routes) or sorted job list (assignments).
    pub payload: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct PricingRequest<'a> {
    pub duals: &'a [f64],
    pub windows: &'a [Window<f64>],
    pub decisions: &'a [BranchDecision],
    pub cap: usize,
    /// Multiplier on the column objective; zero while hunting for feasibility.
    pub obj_scale: f64,
    /// Columns must have reduced cost strictly below this value.
    pub threshold: f64,
}

impl PricingRequest<'_> {
    pub fn window(&self, sub: usize) -> Window<f64> {
        self.windows.get(sub).copied().unwrap_or_default()
    }
}

/// The column-generating side of a problem.
pub trait Pricer: Sync {
    fn num_subproblems(&self) -> usize;

    /// Columns with reduced cost below `req.threshold` for one subproblem.
    fn price(&self, sub: usize, req: &PricingRequest) -> Vec<Column>;

    /// Sparse master coefficients of a column.
    fn column_coefs(&self, col: &Column) -> Vec<(usize, f64)>;

    fn column_obj(&self, _col: &Column) -> f64 {
        0.0
    }

    fn column_upper(&self) -> f64 {
        1.0
    }
}

/// Rows, auxiliary columns and constants of a master problem.
#[derive(Debug, Clone)]
pub struct MasterSpec {
    pub rows: Vec<(Sense, f64)>,
    pub row_names: Vec<String>,
    /// Auxiliary continuous columns (eta, gamma, z_k).
    pub statics: Vec<ColSpec<f64>>,
    pub eta: Option<usize>,
    pub gamma: Option<usize>,
    pub z: Vec<usize>,
    pub num_subproblems: usize,
    /// Objective coefficient of the artificial slacks.
    pub penalty: f64,
    pub integer_payoffs: bool,
    pub integer_objective: bool,
    pub trivial_lb: f64,
    pub payoff_cap: f64,
}

#[derive(Debug, Clone)]
pub struct PooledColumn {
    pub col: Column,
    pub lp_index: usize,
    pub active: bool,
    pub inactive_rounds: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Insert {
    New(ColId),
    Reactivated(ColId),
    Duplicate(ColId),
}

#[derive(Debug, Clone, Default)]
pub struct ColumnPool {
    cols: Vec<PooledColumn>,
    index: HashMap<(usize, Vec<usize>), ColId>,
}

impl ColumnPool {
    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn get(&self, id: ColId) -> &PooledColumn {
        &self.cols[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ColId, &PooledColumn)> {
        self.cols.iter().enumerate()
    }

    pub fn find(&self, col: &Column) -> Option<ColId> {
        self.index.get(&(col.owner, col.payload.clone())).copied()
    }

    pub fn num_active(&self) -> usize {
        self.cols.iter().filter(|c| c.active).count()
    }
}

/// The restricted master LP with its column pool.
///
/// LP column layout: statics, then artificials, then pooled columns.
#[derive(Debug, Clone)]
pub struct Master {
    pub lp: LpModel<f64>,
    pub spec: MasterSpec,
    pub pool: ColumnPool,
    art_start: usize,
    art_count: usize,
    col_upper: f64,
}

impl Master {
    pub fn new(spec: MasterSpec, col_upper: f64) -> Self {
        let mut lp = LpModel::new();
        for &(sense, rhs) in &spec.rows {
            lp.add_row(sense, rhs);
        }
        for s in &spec.statics {
            lp.add_column(s.clone()).expect("static column is well formed");
        }
        let art_start = lp.num_cols();
        for (i, &(sense, _)) in spec.rows.iter().enumerate() {
            let dirs: &[f64] = match sense {
                Sense::Le => &[-1.0],
                Sense::Ge => &[1.0],
                Sense::Eq => &[1.0, -1.0],
            };
            for &d in dirs {
                lp.add_column(ColSpec::new(spec.penalty, 0.0, f64::INFINITY, vec![(i, d)]))
                    .expect("artificial column is well formed");
            }
        }
        let art_count = lp.num_cols() - art_start;
        Master {
            lp,
            spec,
            pool: ColumnPool::default(),
            art_start,
            art_count,
            col_upper,
        }
    }

    pub fn artificial_range(&self) -> std::ops::Range<usize> {
        self.art_start..self.art_start + self.art_count
    }

    pub fn lp_index(&self, id: ColId) -> usize {
        self.pool.cols[id].lp_index
    }

    /// Adds a column, reactivates an archived duplicate, or reports an active duplicate.
    pub fn add_column(&mut self, col: Column, pricer: &dyn Pricer) -> Insert {
        let key = (col.owner, col.payload.clone());
        if let Some(&id) = self.pool.index.get(&key) {
            let pc = &mut self.pool.cols[id];
            if pc.active {
                return Insert::Duplicate(id);
            }
            pc.active = true;
            pc.inactive_rounds = 0;
            let lp_index = pc.lp_index;
            self.lp
                .set_column_active(lp_index, true)
                .expect("reactivation cannot fail");
            return Insert::Reactivated(id);
        }
        let coefs = pricer.column_coefs(&col);
        let obj = pricer.column_obj(&col);
        let lp_index = self
            .lp
            .add_column(ColSpec::new(obj, 0.0, self.col_upper, coefs))
            .expect("pricer produced a malformed column");
        let id = self.pool.cols.len();
        self.pool.cols.push(PooledColumn {
            col,
            lp_index,
            active: true,
            inactive_rounds: 0,
        });
        self.pool.index.insert(key, id);
        Insert::New(id)
    }

    pub fn set_column_bounds(&mut self, id: ColId, lo: f64, hi: f64) {
        let lp_index = self.pool.cols[id].lp_index;
        self.lp
            .set_variable_bounds(lp_index, lo, hi)
            .expect("column bounds are ordered");
        if lo > 0.0 && !self.pool.cols[id].active {
            self.pool.cols[id].active = true;
            self.pool.cols[id].inactive_rounds = 0;
            self.lp.set_column_active(lp_index, true).expect("reactivation");
        }
    }

    pub fn column_upper(&self) -> f64 {
        self.col_upper
    }

    fn set_phase(&mut self, pricer: &dyn Pricer, phase: Phase) {
        let statics = self.spec.statics.len();
        for j in 0..statics {
            let obj = match phase {
                Phase::Feasibility => 0.0,
                _ => self.spec.statics[j].obj,
            };
            self.lp.set_objective(j, obj).expect("static index");
        }
        for j in self.artificial_range() {
            let (obj, hi) = match phase {
                Phase::Penalized => (self.spec.penalty, f64::INFINITY),
                Phase::Feasibility => (1.0, f64::INFINITY),
                Phase::Clean => (self.spec.penalty, 0.0),
            };
            self.lp.set_objective(j, obj).expect("artificial index");
            self.lp.set_variable_bounds(j, 0.0, hi).expect("artificial bounds");
        }
        for id in 0..self.pool.cols.len() {
            let obj = match phase {
                Phase::Feasibility => 0.0,
                _ => pricer.column_obj(&self.pool.cols[id].col),
            };
            let lp_index = self.pool.cols[id].lp_index;
            self.lp.set_objective(lp_index, obj).expect("pool index");
        }
    }

    fn artificial_mass(&self, x: &[f64]) -> f64 {
        self.artificial_range().map(|j| x[j].max(0.0)).sum()
    }

    /// Column value of a pooled column in an LP primal vector.
    pub fn value(&self, x: &[f64], id: ColId) -> f64 {
        let pc = &self.pool.cols[id];
        if pc.active {
            x[pc.lp_index]
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Penalized,
    Feasibility,
    Clean,
}

/// Ages every active column and archives the ones idle for `threshold` rounds.
///
/// `protected` columns (basic, or held away from zero by branching) are never evicted.
pub fn age_and_evict(
    master: &mut Master,
    x: &[f64],
    threshold: usize,
    protected: impl Fn(ColId) -> bool,
) -> usize {
    assert!(threshold >= 1, "eviction threshold must be positive");
    let mut evicted = 0;
    for id in 0..master.pool.cols.len() {
        let pc = &mut master.pool.cols[id];
        if !pc.active {
            continue;
        }
        if x[pc.lp_index] <= TOL_FEAS {
            pc.inactive_rounds += 1;
        } else {
            pc.inactive_rounds = 0;
        }
        if pc.inactive_rounds >= threshold && !protected(id) {
            let lp_index = pc.lp_index;
            if master.lp.set_column_active(lp_index, false).is_ok() {
                master.pool.cols[id].active = false;
                evicted += 1;
            }
        }
    }
    evicted
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColgenStatus {
    Optimal,
    Infeasible,
    TimeLimit,
    /// The LP solver reported numerical trouble.
    Failed,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundTrace {
    pub round: usize,
    pub objective: f64,
    pub columns_added: usize,
}

#[derive(Debug, Clone)]
pub struct ColgenResult {
    pub status: ColgenStatus,
    pub objective: f64,
    pub duals: Vec<f64>,
    /// Primal values indexed by LP column.
    pub x: Vec<f64>,
    pub rounds: usize,
    pub columns_added: usize,
    pub proven_optimal: bool,
    pub basis: Option<Basis>,
    pub trace: Vec<RoundTrace>,
}

impl ColgenResult {
    fn new(status: ColgenStatus) -> Self {
        ColgenResult {
            status,
            objective: f64::NAN,
            duals: Vec::new(),
            x: Vec::new(),
            rounds: 0,
            columns_added: 0,
            proven_optimal: false,
            basis: None,
            trace: Vec::new(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ColgenOptions {
    pub cap: usize,
    pub evict_after: usize,
    pub parallel: bool,
    pub deadline: Option<Instant>,
    pub max_rounds: usize,
}

impl Default for ColgenOptions {
    fn default() -> Self {
        ColgenOptions {
            cap: 20,
            evict_after: 20,
            parallel: true,
            deadline: None,
            max_rounds: 100_000,
        }
    }
}

/// Per-node pricing context: windows per subproblem and the decision stack.
#[derive(Clone, Copy)]
pub struct NodeContext<'a> {
    pub windows: &'a [Window<f64>],
    pub decisions: &'a [BranchDecision],
    /// Structural admissibility of a priced column at this node.
    pub admissible: &'a (dyn Fn(&Column) -> bool + Sync),
}

enum Converge {
    Done(LpSolution<f64>),
    Stop(ColgenStatus),
}

fn price_all(pricer: &dyn Pricer, req: &PricingRequest, parallel: bool) -> Vec<Column> {
    let subs = pricer.num_subproblems();
    let per_sub: Vec<Vec<Column>> = if parallel && subs > 1 {
        (0..subs).into_par_iter().map(|s| pricer.price(s, req)).collect()
    } else {
        (0..subs).map(|s| pricer.price(s, req)).collect()
    };
    per_sub.into_iter().flatten().collect()
}

fn converge(
    master: &mut Master,
    pricer: &dyn Pricer,
    ctx: &NodeContext,
    opts: &ColgenOptions,
    obj_scale: f64,
    basis: &mut Option<Basis>,
    out: &mut ColgenResult,
) -> Converge {
    loop {
        if opts.deadline.map_or(false, |d| Instant::now() >= d) {
            return Converge::Stop(ColgenStatus::TimeLimit);
        }
        let mut sol = master.lp.solve(basis.as_ref());
        if sol.status != LpStatus::Optimal && basis.is_some() {
            sol = master.lp.solve(None);
        }
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible | LpStatus::Unbounded | LpStatus::IterationLimit => {
                warn!("master LP returned {:?}", sol.status);
                return Converge::Stop(ColgenStatus::Failed);
            }
        }
        *basis = sol.basis.clone();
        if out.rounds >= opts.max_rounds {
            return Converge::Stop(ColgenStatus::Failed);
        }
        let basic: Vec<bool> = {
            let mut b = vec![false; master.lp.num_cols()];
            if let Some(bs) = basis.as_ref() {
                for &j in &bs.basic {
                    if j < b.len() {
                        b[j] = true;
                    }
                }
            }
            b
        };
        let protect: Vec<bool> = (0..master.pool.len())
            .map(|id| {
                let j = master.lp_index(id);
                basic[j] || master.lp.col(j).lo > 0.0
            })
            .collect();
        let evicted = age_and_evict(master, &sol.x, opts.evict_after, |id| protect[id]);
        if evicted > 0 {
            trace!("evicted {evicted} columns");
        }

        let req = PricingRequest {
            duals: &sol.duals,
            windows: ctx.windows,
            decisions: ctx.decisions,
            cap: opts.cap,
            obj_scale,
            threshold: -TOL_OPT,
        };
        let priced = price_all(pricer, &req, opts.parallel);
        let mut added = 0;
        for col in priced {
            if !(ctx.admissible)(&col) {
                warn!("pricer returned an inadmissible column for owner {}", col.owner);
                continue;
            }
            match master.add_column(col, pricer) {
                Insert::New(_) | Insert::Reactivated(_) => added += 1,
                Insert::Duplicate(_) => {}
            }
        }
        out.rounds += 1;
        out.columns_added += added;
        out.trace.push(RoundTrace {
            round: out.rounds,
            objective: sol.objective,
            columns_added: added,
        });
        debug!("round {} obj {:.6} added {}", out.rounds, sol.objective, added);
        if added == 0 {
            return Converge::Done(sol);
        }
    }
}

/// Runs column generation to LP optimality at one node.
pub fn run_colgen(
    master: &mut Master,
    pricer: &dyn Pricer,
    ctx: &NodeContext,
    opts: &ColgenOptions,
    warm: Option<Basis>,
) -> ColgenResult {
    let mut out = ColgenResult::new(ColgenStatus::Optimal);
    let mut basis = warm;

    master.set_phase(pricer, Phase::Penalized);
    let sol = match converge(master, pricer, ctx, opts, 1.0, &mut basis, &mut out) {
        Converge::Done(s) => s,
        Converge::Stop(st) => {
            out.status = st;
            return out;
        }
    };
    let sol = if master.artificial_mass(&sol.x) > ART_TOL {
        master.set_phase(pricer, Phase::Feasibility);
        let feas = match converge(master, pricer, ctx, opts, 0.0, &mut basis, &mut out) {
            Converge::Done(s) => s,
            Converge::Stop(st) => {
                master.set_phase(pricer, Phase::Penalized);
                out.status = st;
                return out;
            }
        };
        if master.artificial_mass(&feas.x) > ART_TOL {
            master.set_phase(pricer, Phase::Penalized);
            out.status = ColgenStatus::Infeasible;
            out.objective = f64::INFINITY;
            return out;
        }
        master.set_phase(pricer, Phase::Clean);
        let clean = match converge(master, pricer, ctx, opts, 1.0, &mut basis, &mut out) {
            Converge::Done(s) => s,
            Converge::Stop(st) => {
                master.set_phase(pricer, Phase::Penalized);
                out.status = st;
                return out;
            }
        };
        master.set_phase(pricer, Phase::Penalized);
        clean
    } else {
        sol
    };
    out.status = ColgenStatus::Optimal;
    out.proven_optimal = true;
    out.objective = sol.objective;
    out.duals = sol.duals;
    out.x = sol.x;
    out.basis = sol.basis;
    out
}
