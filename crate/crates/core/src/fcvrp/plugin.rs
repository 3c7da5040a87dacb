//! Master problems and branching for the fair CVRP.

use log::warn;

use crate::bitset::ElemSet;
use crate::colgen::{Column, MasterSpec, Pricer, PricingRequest};
use crate::engine::{BranchDecision, Incumbent, NodeColumn, ProblemPlugin, INTEGRALITY_TOL};
use crate::objective::{evaluate, OrderWeights};
use crate::simplex_lp::{ColSpec, Sense};

use super::instance::CvrpInstance;
use super::labeling::{price_routes, LabelingMode, PricingGraph, Subproblem};

#[derive(Debug, Clone, PartialEq)]
pub enum Formulation {
    /// Routes assigned to vehicles; single `eta`, `gamma`.
    Vehicle,
    /// Routes keyed by their last customer, big-M lower rows.
    Customer,
    /// Vehicle-indexed with sorted payoff variables `z_k` and objective `v^T z`.
    Order(OrderWeights<f64>),
    /// Plain cost minimisation with exactly `K` routes.
    Cost,
}

impl Formulation {
    pub fn name(&self) -> &'static str {
        match self {
            Formulation::Vehicle => "vehicle",
            Formulation::Customer => "customer",
            Formulation::Order(_) => "order",
            Formulation::Cost => "cost",
        }
    }

    fn by_last_customer(&self) -> bool {
        matches!(self, Formulation::Customer | Formulation::Cost)
    }
}

#[derive(Debug, Clone)]
pub struct FcvrpOptions {
    pub mode: LabelingMode,
    pub ng_size: usize,
    /// Vehicle `k` may only serve customers `>= k + 1` (vehicle formulation only).
    pub symmetry_breaking: bool,
}

impl Default for FcvrpOptions {
    fn default() -> Self {
        FcvrpOptions {
            mode: LabelingMode::Bidirectional,
            ng_size: 8,
            symmetry_breaking: true,
        }
    }
}

/// Row offsets of a master layout.
#[derive(Debug, Clone, Copy)]
struct Layout {
    cover: usize,
    budget: Option<usize>,
    /// Per-vehicle convexity rows, or the single cardinality row.
    conv: usize,
    eta: Option<usize>,
    gamma: Option<usize>,
    link: Option<usize>,
    order: Option<usize>,
    rows: usize,
}

pub struct FcvrpProblem {
    pub inst: CvrpInstance,
    pub formulation: Formulation,
    pub budget: Option<i64>,
    /// Upper bound on any route distance, used as big-M and static bound.
    pub payoff_cap: f64,
    pub options: FcvrpOptions,
    graph: PricingGraph,
    layout: Layout,
    seed: Vec<Column>,
}

/// Upper bound on the distance of any route in a solution.
pub fn payoff_cap(inst: &CvrpInstance, budget: Option<i64>) -> f64 {
    match budget {
        Some(b) if inst.cost_equals_distance() => b as f64,
        _ => {
            let s: i64 = (0..inst.num_vertices())
                .map(|i| inst.dist[i].iter().copied().max().unwrap_or(0))
                .sum();
            s as f64
        }
    }
}

impl FcvrpProblem {
    pub fn new(inst: CvrpInstance, formulation: Formulation, budget: Option<i64>, options: FcvrpOptions) -> Self {
        let n = inst.num_customers();
        let k = inst.vehicles;
        let graph = PricingGraph::new(&inst, options.ng_size);
        let per_vehicle = matches!(formulation, Formulation::Vehicle | Formulation::Order(_));
        let mut r = n;
        let budget_row = if budget.is_some() && formulation != Formulation::Cost {
            r += 1;
            Some(r - 1)
        } else {
            None
        };
        let conv = r;
        r += if per_vehicle { k } else { 1 };
        let groups = if per_vehicle { k } else { n };
        let (mut eta, mut gamma, mut link, mut order) = (None, None, None, None);
        match formulation {
            Formulation::Vehicle | Formulation::Customer => {
                eta = Some(r);
                r += groups;
                gamma = Some(r);
                r += groups;
            }
            Formulation::Order(_) => {
                link = Some(r);
                r += k;
                order = Some(r);
                r += k - 1;
            }
            Formulation::Cost => {}
        }
        let layout = Layout {
            cover: 0,
            budget: budget_row,
            conv,
            eta,
            gamma,
            link,
            order,
            rows: r,
        };
        FcvrpProblem {
            payoff_cap: payoff_cap(&inst, budget),
            inst,
            formulation,
            budget,
            options,
            graph,
            layout,
            seed: Vec::new(),
        }
    }

    pub fn num_rows(&self) -> usize {
        self.layout.rows
    }

    /// Last customer served by a subproblem of a last-customer master.
    fn last_of(&self, sub: usize) -> Option<usize> {
        self.formulation.by_last_customer().then_some(sub + 1)
    }

    /// Builds a column for `route` in subproblem `owner`.
    pub fn make_column(&self, owner: usize, route: Vec<usize>) -> Column {
        Column {
            owner,
            cost: self.inst.route_cost(&route) as f64,
            payoff: self.inst.route_distance(&route) as f64,
            covers: route.iter().copied().collect(),
            payload: route,
        }
    }

    fn subproblem_disabled(&self, sub: usize, decisions: &[BranchDecision]) -> bool {
        let last = self.last_of(sub);
        decisions.iter().any(|d| match *d {
            BranchDecision::LastCustomer { customer, forced: false } => Some(customer) == last,
            _ => false,
        })
    }

    fn customer_blocked(&self, sub: usize, j: usize, decisions: &[BranchDecision]) -> bool {
        if self.formulation == Formulation::Vehicle && self.options.symmetry_breaking && j < sub + 1 {
            return true;
        }
        let last = self.last_of(sub);
        decisions.iter().any(|d| match *d {
            BranchDecision::CustomerVehicle {
                customer,
                vehicle,
                forced,
            } => customer == j && (if forced { vehicle != sub } else { vehicle == sub }),
            BranchDecision::LastCustomer { customer, forced: true } => customer == j && last != Some(j),
            _ => false,
        })
    }

    fn arc_removed(&self, a: usize, b: usize, decisions: &[BranchDecision]) -> bool {
        decisions.iter().any(|d| match *d {
            BranchDecision::Arc { from, to, forced: false } => from == a && to == b,
            BranchDecision::Arc { from, to, forced: true } => {
                (from != 0 && a == from && b != to) || (to != 0 && b == to && a != from)
            }
            _ => false,
        })
    }

    fn removed_matrix(&self, decisions: &[BranchDecision]) -> Vec<Vec<bool>> {
        let v = self.inst.num_vertices();
        let mut m = vec![vec![false; v]; v];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = true;
        }
        for d in decisions {
            if let BranchDecision::Arc { from, to, forced } = *d {
                if !forced {
                    m[from][to] = true;
                } else {
                    for k in 0..v {
                        if from != 0 && k != to {
                            m[from][k] = true;
                        }
                        if to != 0 && k != from {
                            m[k][to] = true;
                        }
                    }
                }
            }
        }
        m
    }

    /// Arc reduced costs and the per-route constant of subproblem `sub`.
    fn reduced_costs(&self, sub: usize, duals: &[f64], obj_scale: f64) -> (Vec<Vec<f64>>, f64) {
        let l = &self.layout;
        let v = self.inst.num_vertices();
        let lambda = l.budget.map_or(0.0, |r| duals[r]);
        let (constant, w, objc) = match &self.formulation {
            Formulation::Vehicle => {
                let (e, g) = (duals[l.eta.unwrap() + sub], duals[l.gamma.unwrap() + sub]);
                (-duals[l.conv + sub], e + g, 0.0)
            }
            Formulation::Customer => {
                let (e, g) = (duals[l.eta.unwrap() + sub], duals[l.gamma.unwrap() + sub]);
                (-duals[l.conv] + g * self.payoff_cap, e + g, 0.0)
            }
            Formulation::Order(_) => (-duals[l.conv + sub], duals[l.link.unwrap() + sub], 0.0),
            Formulation::Cost => (-duals[l.conv], 0.0, obj_scale),
        };
        let mut rc = vec![vec![0.0; v]; v];
        for (i, row) in rc.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                let kappa = if j == 0 { 0.0 } else { duals[l.cover + j - 1] };
                let c = self.inst.cost[i][j] as f64;
                let p = self.inst.dist[i][j] as f64;
                *cell = objc * c - kappa - lambda * c - w * p;
            }
        }
        (rc, constant)
    }

    /// Routes of an integral selection, ordered by owner.
    pub fn routes_of(cols: &[&Column]) -> Vec<Vec<usize>> {
        let mut v: Vec<&&Column> = cols.iter().collect();
        v.sort_by_key(|c| c.owner);
        v.into_iter().map(|c| c.payload.clone()).collect()
    }

    /// Objective of a set of routes under this formulation.
    pub fn routes_objective(&self, routes: &[Vec<usize>]) -> f64 {
        let payoffs: Vec<f64> = routes.iter().map(|r| self.inst.route_distance(r) as f64).collect();
        match &self.formulation {
            Formulation::Vehicle | Formulation::Customer => crate::objective::range_of(&payoffs).unwrap_or(0.0),
            Formulation::Order(w) => evaluate(w, &payoffs).unwrap_or(f64::INFINITY),
            Formulation::Cost => routes.iter().map(|r| self.inst.route_cost(r) as f64).sum(),
        }
    }

    /// Maps a full set of `K` routes onto this formulation's columns.
    pub fn columns_for_routes(&self, routes: &[Vec<usize>]) -> Vec<Column> {
        match &self.formulation {
            Formulation::Vehicle => {
                let mut rs: Vec<Vec<usize>> = routes.to_vec();
                rs.sort_by_key(|r| r.iter().copied().min().unwrap_or(0));
                rs.into_iter().enumerate().map(|(k, r)| self.make_column(k, r)).collect()
            }
            Formulation::Order(_) => {
                let mut rs: Vec<Vec<usize>> = routes.to_vec();
                rs.sort_by_key(|r| std::cmp::Reverse(self.inst.route_distance(r)));
                rs.into_iter().enumerate().map(|(k, r)| self.make_column(k, r)).collect()
            }
            Formulation::Customer | Formulation::Cost => routes
                .iter()
                .map(|r| {
                    let mut r = r.clone();
                    if r.first() > r.last() {
                        r.reverse();
                    }
                    let last = *r.last().expect("non-empty route");
                    self.make_column(last - 1, r)
                })
                .collect(),
        }
    }

    /// Incumbent built from a known feasible solution.
    pub fn incumbent_from_routes(&self, routes: &[Vec<usize>]) -> Option<Incumbent> {
        if routes.len() != self.inst.vehicles || self.inst.check_solution(routes, self.budget).is_err() {
            return None;
        }
        Some(Incumbent {
            objective: self.routes_objective(routes),
            columns: self.columns_for_routes(routes),
        })
    }

    /// Extra columns loaded into the pool at the root.
    pub fn set_seed_columns(&mut self, cols: Vec<Column>) {
        self.seed = cols;
    }

    fn most_fractional(values: impl Iterator<Item = (f64, BranchDecision, BranchDecision)>) -> Option<(BranchDecision, BranchDecision)> {
        let mut best: Option<(f64, BranchDecision, BranchDecision)> = None;
        for (v, l, r) in values {
            let frac = v - v.floor();
            if frac <= INTEGRALITY_TOL || frac >= 1.0 - INTEGRALITY_TOL {
                continue;
            }
            let score = (frac - 0.5).abs();
            if best.as_ref().map_or(true, |b| score < b.0 - 1e-12) {
                best = Some((score, l, r));
            }
        }
        best.map(|(_, l, r)| (l, r))
    }
}

fn arcs_of(route: &[usize]) -> impl Iterator<Item = (usize, usize)> + '_ {
    let n = route.len();
    (0..=n).map(move |t| {
        let a = if t == 0 { 0 } else { route[t - 1] };
        let b = if t == n { 0 } else { route[t] };
        (a, b)
    })
}

impl Pricer for FcvrpProblem {
    fn num_subproblems(&self) -> usize {
        if self.formulation.by_last_customer() {
            self.inst.num_customers()
        } else {
            self.inst.vehicles
        }
    }

    fn price(&self, sub: usize, req: &PricingRequest) -> Vec<Column> {
        if self.subproblem_disabled(sub, req.decisions) {
            return Vec::new();
        }
        let n = self.inst.num_customers();
        let allowed: ElemSet = (1..=n)
            .filter(|&j| !self.customer_blocked(sub, j, req.decisions))
            .collect();
        let last = self.last_of(sub);
        if let Some(i) = last {
            if !allowed.contains(i) {
                return Vec::new();
            }
        }
        let (arc_rc, constant) = self.reduced_costs(sub, req.duals, req.obj_scale);
        let sp = Subproblem {
            arc_rc,
            constant,
            removed: self.removed_matrix(req.decisions),
            allowed,
            last,
            window: req.window(sub),
            cap: req.cap,
            threshold: req.threshold,
        };
        price_routes(&self.inst, &self.graph, &sp, self.options.mode)
            .into_iter()
            .map(|r| self.make_column(sub, r.route))
            .collect()
    }

    fn column_coefs(&self, col: &Column) -> Vec<(usize, f64)> {
        let l = &self.layout;
        let mut visits = vec![0.0; self.inst.num_customers()];
        for &v in &col.payload {
            visits[v - 1] += 1.0;
        }
        let mut out: Vec<(usize, f64)> = visits
            .iter()
            .enumerate()
            .filter(|(_, &c)| c != 0.0)
            .map(|(i, &c)| (l.cover + i, c))
            .collect();
        if let Some(b) = l.budget {
            if col.cost != 0.0 {
                out.push((b, col.cost));
            }
        }
        let k = col.owner;
        let p = col.payoff;
        match &self.formulation {
            Formulation::Vehicle => {
                out.push((l.conv + k, 1.0));
                out.push((l.eta.unwrap() + k, p));
                out.push((l.gamma.unwrap() + k, p));
            }
            Formulation::Customer => {
                out.push((l.conv, 1.0));
                out.push((l.eta.unwrap() + k, p));
                out.push((l.gamma.unwrap() + k, p - self.payoff_cap));
            }
            Formulation::Order(_) => {
                out.push((l.conv + k, 1.0));
                out.push((l.link.unwrap() + k, p));
            }
            Formulation::Cost => out.push((l.conv, 1.0)),
        }
        out.retain(|&(_, c)| c != 0.0);
        out
    }

    fn column_obj(&self, col: &Column) -> f64 {
        match self.formulation {
            Formulation::Cost => col.cost,
            _ => 0.0,
        }
    }
}

impl ProblemPlugin for FcvrpProblem {
    fn master_spec(&self) -> MasterSpec {
        let l = &self.layout;
        let n = self.inst.num_customers();
        let k = self.inst.vehicles;
        let m = self.payoff_cap;
        let mut rows = Vec::with_capacity(l.rows);
        let mut names = Vec::with_capacity(l.rows);
        for i in 1..=n {
            rows.push((Sense::Eq, 1.0));
            names.push(format!("cover_{i}"));
        }
        if let Some(b) = self.budget.filter(|_| l.budget.is_some()) {
            rows.push((Sense::Le, b as f64));
            names.push("budget".into());
        }
        let mut statics = Vec::new();
        let (mut eta, mut gamma, mut z) = (None, None, Vec::new());
        let mut trivial_lb = 0.0;
        let mut integer_objective = true;
        match &self.formulation {
            Formulation::Vehicle => {
                for kk in 0..k {
                    rows.push((Sense::Eq, 1.0));
                    names.push(format!("conv_{kk}"));
                }
                for kk in 0..k {
                    rows.push((Sense::Le, 0.0));
                    names.push(format!("eta_{kk}"));
                }
                for kk in 0..k {
                    rows.push((Sense::Ge, 0.0));
                    names.push(format!("gamma_{kk}"));
                }
                let er = l.eta.unwrap();
                let gr = l.gamma.unwrap();
                statics.push(ColSpec::new(1.0, 0.0, m, (0..k).map(|kk| (er + kk, -1.0)).collect()));
                statics.push(ColSpec::new(-1.0, 0.0, m, (0..k).map(|kk| (gr + kk, -1.0)).collect()));
                eta = Some(0);
                gamma = Some(1);
            }
            Formulation::Customer => {
                rows.push((Sense::Eq, k as f64));
                names.push("card".into());
                for i in 1..=n {
                    rows.push((Sense::Le, 0.0));
                    names.push(format!("eta_{i}"));
                }
                for i in 1..=n {
                    rows.push((Sense::Ge, -m));
                    names.push(format!("gamma_{i}"));
                }
                let er = l.eta.unwrap();
                let gr = l.gamma.unwrap();
                statics.push(ColSpec::new(1.0, 0.0, m, (0..n).map(|i| (er + i, -1.0)).collect()));
                statics.push(ColSpec::new(-1.0, 0.0, m, (0..n).map(|i| (gr + i, -1.0)).collect()));
                eta = Some(0);
                gamma = Some(1);
            }
            Formulation::Order(w) => {
                for kk in 0..k {
                    rows.push((Sense::Eq, 1.0));
                    names.push(format!("conv_{kk}"));
                }
                for kk in 0..k {
                    rows.push((Sense::Eq, 0.0));
                    names.push(format!("link_{kk}"));
                }
                for kk in 0..k - 1 {
                    rows.push((Sense::Ge, 0.0));
                    names.push(format!("order_{kk}"));
                }
                let lr = l.link.unwrap();
                let or = l.order.unwrap();
                for kk in 0..k {
                    let mut coefs = vec![(lr + kk, -1.0)];
                    if kk + 1 < k {
                        coefs.push((or + kk, 1.0));
                    }
                    if kk > 0 {
                        coefs.push((or + kk - 1, -1.0));
                    }
                    statics.push(ColSpec::new(w.v[kk], 0.0, m, coefs));
                    z.push(kk);
                }
                trivial_lb = w.trivial_lower_bound(m);
                integer_objective = w.v.iter().all(|x| x.fract() == 0.0);
            }
            Formulation::Cost => {
                rows.push((Sense::Eq, k as f64));
                names.push("card".into());
                trivial_lb = f64::NEG_INFINITY;
            }
        }
        debug_assert_eq!(rows.len(), l.rows);
        let obj_scale = match self.formulation {
            Formulation::Cost => self.inst.cost.iter().flatten().copied().max().unwrap_or(1) as f64 * (n as f64 + 1.0),
            Formulation::Order(ref w) => m * w.v.iter().map(|x| x.abs()).sum::<f64>(),
            _ => m,
        };
        MasterSpec {
            rows,
            row_names: names,
            statics,
            eta,
            gamma,
            z,
            num_subproblems: self.num_subproblems(),
            penalty: 10.0 * (obj_scale + 1.0),
            integer_payoffs: true,
            integer_objective,
            trivial_lb,
            payoff_cap: m,
        }
    }

    fn initial_columns(&self) -> Vec<Column> {
        self.seed.clone()
    }

    fn column_allowed(&self, col: &Column, decisions: &[BranchDecision]) -> bool {
        let sub = col.owner;
        if self.subproblem_disabled(sub, decisions) {
            return false;
        }
        if col.payload.iter().any(|&j| self.customer_blocked(sub, j, decisions)) {
            return false;
        }
        arcs_of(&col.payload).all(|(a, b)| !self.arc_removed(a, b, decisions))
    }

    fn branch(&self, cols: &[NodeColumn], _decisions: &[BranchDecision]) -> Option<(BranchDecision, BranchDecision)> {
        let n = self.inst.num_customers();
        let v = self.inst.num_vertices();
        if self.formulation.by_last_customer() {
            let mut agg = vec![0.0; n + 1];
            for c in cols {
                agg[c.col.owner + 1] += c.value;
            }
            let cands = (1..=n).map(|i| {
                (
                    agg[i],
                    BranchDecision::LastCustomer { customer: i, forced: true },
                    BranchDecision::LastCustomer { customer: i, forced: false },
                )
            });
            if let Some(b) = Self::most_fractional(cands) {
                return Some(b);
            }
        } else {
            let k = self.inst.vehicles;
            let mut agg = vec![vec![0.0; k]; n + 1];
            for c in cols {
                for &j in &c.col.payload {
                    agg[j][c.col.owner] += c.value;
                }
            }
            let cands = (1..=n).flat_map(|i| {
                let row = agg[i].clone();
                (0..k).map(move |kk| {
                    (
                        row[kk],
                        BranchDecision::CustomerVehicle {
                            customer: i,
                            vehicle: kk,
                            forced: true,
                        },
                        BranchDecision::CustomerVehicle {
                            customer: i,
                            vehicle: kk,
                            forced: false,
                        },
                    )
                })
            });
            if let Some(b) = Self::most_fractional(cands) {
                return Some(b);
            }
        }
        let mut flow = vec![vec![0.0; v]; v];
        for c in cols {
            for (a, b) in arcs_of(&c.col.payload) {
                flow[a][b] += c.value;
            }
        }
        let cands = (0..v).flat_map(|a| {
            let row = flow[a].clone();
            (0..v).map(move |b| {
                (
                    row[b],
                    BranchDecision::Arc { from: a, to: b, forced: true },
                    BranchDecision::Arc { from: a, to: b, forced: false },
                )
            })
        });
        if let Some(b) = Self::most_fractional(cands) {
            return Some(b);
        }
        let frac = cols
            .iter()
            .filter(|c| c.value > INTEGRALITY_TOL && c.value < 1.0 - INTEGRALITY_TOL)
            .min_by(|a, b| (a.value - 0.5).abs().total_cmp(&(b.value - 0.5).abs()))?;
        warn!("falling back to column branching on column {}", frac.id);
        Some((
            BranchDecision::Column { id: frac.id, forced: true },
            BranchDecision::Column { id: frac.id, forced: false },
        ))
    }

    fn integral_objective(&self, selected: &[&Column]) -> f64 {
        let routes = Self::routes_of(selected);
        self.routes_objective(&routes)
    }
}
