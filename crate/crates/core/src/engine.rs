//! Branch-and-price tree search over column-generation nodes.

use std::time::{Duration, Instant};

use log::{debug, info, warn};
use thiserror::Error;

use crate::branching::{
    detect_order_violation, detect_range_violation, make_order_children, make_range_children,
    CutSide, FairCut, OrderView, RangeView, Window,
};
use crate::colgen::{
    run_colgen, ColId, ColgenOptions, ColgenStatus, Column, Master, MasterSpec, NodeContext, Pricer,
};
use crate::simplex_lp::Basis;

/// Lower bounds within this of the incumbent are pruned.
pub const PRUNE_TOL: f64 = 1e-10;
/// Slack used when rounding bounds of integer-valued objectives.
pub const INT_TOL: f64 = 1e-6;
pub const INTEGRALITY_TOL: f64 = 1e-6;
/// Tolerance of the range/order-respecting check at nodes without a fairness branch.
pub const RBF_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BranchDecision {
    /// `eta <= U` with payoff windows `<= U` and fixing of larger payoffs.
    EtaUpper(f64),
    /// `eta >= U` only.
    EtaLower(f64),
    /// `gamma >= L` with payoff windows `>= L` and fixing of smaller payoffs.
    GammaLower(f64),
    /// `gamma <= L` only.
    GammaUpper(f64),
    OrderCut { k: usize, z: f64, side: CutSide },
    CustomerVehicle { customer: usize, vehicle: usize, forced: bool },
    LastCustomer { customer: usize, forced: bool },
    Arc { from: usize, to: usize, forced: bool },
    JobAgent { job: usize, agent: usize, forced: bool },
    /// Fixes a single pooled column to one or zero.
    Column { id: ColId, forced: bool },
}

impl BranchDecision {
    pub fn fair_cut(&self) -> Option<FairCut<f64>> {
        Some(match *self {
            BranchDecision::EtaUpper(u) => FairCut::EtaUpper(u),
            BranchDecision::EtaLower(u) => FairCut::EtaLower(u),
            BranchDecision::GammaLower(l) => FairCut::GammaLower(l),
            BranchDecision::GammaUpper(l) => FairCut::GammaUpper(l),
            BranchDecision::OrderCut { k, z, side } => FairCut::Order { k, z, side },
            _ => return None,
        })
    }
}

impl From<FairCut<f64>> for BranchDecision {
    fn from(c: FairCut<f64>) -> Self {
        match c {
            FairCut::EtaUpper(u) => BranchDecision::EtaUpper(u),
            FairCut::EtaLower(u) => BranchDecision::EtaLower(u),
            FairCut::GammaLower(l) => BranchDecision::GammaLower(l),
            FairCut::GammaUpper(l) => BranchDecision::GammaUpper(l),
            FairCut::Order { k, z, side } => BranchDecision::OrderCut { k, z, side },
        }
    }
}

/// A pooled column together with its value in the current node LP.
#[derive(Debug, Clone, Copy)]
pub struct NodeColumn<'a> {
    pub id: ColId,
    pub col: &'a Column,
    pub value: f64,
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("no branching candidate in a fractional solution at node {0}")]
    NoBranchingCandidate(usize),
    #[error("master LP failed at node {0}")]
    LpFailure(usize),
}

/// Problem-specific hooks used by the tree search.
pub trait ProblemPlugin: Pricer {
    fn master_spec(&self) -> MasterSpec;

    fn initial_columns(&self) -> Vec<Column>;

    /// Structural admissibility of a column under the decision stack (windows
    /// are checked by the engine).
    fn column_allowed(&self, _col: &Column, _decisions: &[BranchDecision]) -> bool {
        true
    }

    /// Problem-specific branching on a fractional, fairness-respecting solution.
    fn branch(&self, cols: &[NodeColumn], decisions: &[BranchDecision]) -> Option<(BranchDecision, BranchDecision)>;

    fn is_integral(&self, cols: &[NodeColumn]) -> bool {
        cols.iter()
            .all(|c| c.value <= INTEGRALITY_TOL || c.value >= 1.0 - INTEGRALITY_TOL)
    }

    /// True objective of an integral selection, recomputed from payloads.
    fn integral_objective(&self, selected: &[&Column]) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeStatus {
    Open,
    Branched,
    PrunedBound,
    PrunedInfeasible,
    Integral,
}

#[derive(Debug, Clone)]
pub struct Node {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub decision: Option<BranchDecision>,
    /// Full root-to-node decision path.
    pub decisions: Vec<BranchDecision>,
    pub lb: f64,
    pub status: NodeStatus,
    pub basis: Option<Basis>,
    /// Set once the node or an ancestor passed the fairness rule without a branch.
    pub rbf_descendant: bool,
}

/// Best-first by lower bound, then deeper first, then lower id.
pub fn select_next_node(open: &[Node]) -> Option<usize> {
    (0..open.len()).min_by(|&a, &b| {
        let (x, y) = (&open[a], &open[b]);
        x.lb.total_cmp(&y.lb)
            .then(y.depth.cmp(&x.depth))
            .then(x.id.cmp(&y.id))
    })
}

/// `lb = None` marks an infeasible node.
pub fn prune(lb: Option<f64>, incumbent: Option<f64>, integer_objective: bool) -> bool {
    let Some(lb) = lb else { return true };
    let Some(inc) = incumbent else { return false };
    lb >= inc - PRUNE_TOL || (integer_objective && lb >= inc - 1.0 + INT_TOL)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchingScheme {
    Classical,
    Range,
    Order,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleKind {
    Fairness,
    Problem,
}

pub struct BranchContext<'a> {
    pub node_id: usize,
    pub cols: &'a [NodeColumn<'a>],
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub z: &'a [f64],
    pub decisions: &'a [BranchDecision],
    pub integer_payoffs: bool,
}

pub trait BranchingRule {
    fn kind(&self) -> RuleKind;
    fn propose(
        &self,
        ctx: &BranchContext,
        plugin: &dyn ProblemPlugin,
    ) -> Option<(BranchDecision, BranchDecision)>;
}

pub struct RangeRule {
    pub alpha: f64,
    pub exact_fallback: bool,
}

impl RangeRule {
    pub fn view(ctx: &BranchContext) -> RangeView<f64> {
        RangeView::new(
            ctx.cols.iter().map(|c| (c.col.payoff, c.value)),
            ctx.eta.unwrap_or(f64::INFINITY),
            ctx.gamma.unwrap_or(f64::NEG_INFINITY),
        )
    }
}

impl BranchingRule for RangeRule {
    fn kind(&self) -> RuleKind {
        RuleKind::Fairness
    }

    fn propose(&self, ctx: &BranchContext, _: &dyn ProblemPlugin) -> Option<(BranchDecision, BranchDecision)> {
        let view = Self::view(ctx);
        let cand = detect_range_violation(&view, self.alpha).or_else(|| {
            if self.exact_fallback && self.alpha > 0.0 {
                detect_range_violation(&view, 0.0)
            } else {
                None
            }
        })?;
        let (l, r) = make_range_children(&cand, ctx.integer_payoffs);
        Some((l.into(), r.into()))
    }
}

pub struct OrderRule {
    pub alpha: f64,
}

impl OrderRule {
    pub fn view(ctx: &BranchContext) -> OrderView<f64> {
        OrderView::new(
            ctx.cols.iter().map(|c| (c.col.owner, c.col.payoff, c.value)),
            ctx.z.to_vec(),
        )
    }
}

impl BranchingRule for OrderRule {
    fn kind(&self) -> RuleKind {
        RuleKind::Fairness
    }

    fn propose(&self, ctx: &BranchContext, _: &dyn ProblemPlugin) -> Option<(BranchDecision, BranchDecision)> {
        let cand = detect_order_violation(&Self::view(ctx), self.alpha)?;
        let (l, r) = make_order_children(&cand, ctx.integer_payoffs);
        Some((l.into(), r.into()))
    }
}

pub struct ProblemRule;

impl BranchingRule for ProblemRule {
    fn kind(&self) -> RuleKind {
        RuleKind::Problem
    }

    fn propose(&self, ctx: &BranchContext, plugin: &dyn ProblemPlugin) -> Option<(BranchDecision, BranchDecision)> {
        plugin.branch(ctx.cols, ctx.decisions)
    }
}

pub fn branching_chain(scheme: BranchingScheme, alpha: f64, exact_fallback: bool) -> Vec<Box<dyn BranchingRule>> {
    match scheme {
        BranchingScheme::Classical => vec![Box::new(ProblemRule)],
        BranchingScheme::Range => vec![
            Box::new(RangeRule {
                alpha,
                exact_fallback,
            }),
            Box::new(ProblemRule),
        ],
        BranchingScheme::Order => vec![Box::new(OrderRule { alpha }), Box::new(ProblemRule)],
    }
}

#[derive(Debug, Clone)]
pub struct Incumbent {
    pub objective: f64,
    /// May be empty when only the value is known.
    pub columns: Vec<Column>,
}

#[derive(Debug, Clone)]
pub struct SolveConfig {
    pub scheme: BranchingScheme,
    pub alpha: f64,
    pub time_limit: Option<Duration>,
    pub node_limit: Option<usize>,
    pub cap: usize,
    pub evict_after: usize,
    pub parallel: bool,
    /// Retry range detection with exact cutoffs when the relaxed test finds nothing.
    pub exact_fallback: bool,
    pub initial_incumbent: Option<Incumbent>,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            scheme: BranchingScheme::Range,
            alpha: 0.0,
            time_limit: None,
            node_limit: None,
            cap: 20,
            evict_after: 20,
            parallel: true,
            exact_fallback: false,
            initial_incumbent: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Feasible,
    Infeasible,
    TimeLimit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint {
    pub time: f64,
    pub lb: f64,
    pub ub: f64,
}

#[derive(Debug, Clone)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// `+inf` when no incumbent exists.
    pub incumbent: f64,
    pub incumbent_columns: Vec<Column>,
    pub lower_bound: f64,
    pub gap_pct: f64,
    pub nodes: usize,
    pub nodes_processed: usize,
    pub wall_time: f64,
    pub trajectory: Vec<TrajectoryPoint>,
    pub root_lp_bound: Option<f64>,
    pub colgen_rounds: usize,
    pub columns_generated: usize,
    /// Nodes where the fairness rule found nothing, checked at exact cutoffs.
    pub rbf_checks: usize,
    pub rbf_violations: usize,
    /// Global bound the first time every open node descended from an RBF node.
    pub rbf_frontier_lb: Option<f64>,
}

pub fn gap_pct(lb: f64, ub: f64) -> f64 {
    if !ub.is_finite() {
        return 100.0;
    }
    if (ub - lb).abs() <= 1e-9 {
        return 0.0;
    }
    if lb <= 0.0 && ub > 0.0 {
        return 100.0;
    }
    if ub.abs() <= 1e-12 {
        return 100.0;
    }
    ((ub - lb) / ub.abs() * 100.0).max(0.0)
}

/// Payoff windows per subproblem under a decision stack.
pub fn node_windows(decisions: &[BranchDecision], subproblems: usize) -> Vec<Window<f64>> {
    let mut w = vec![Window::unbounded(); subproblems];
    for d in decisions {
        if let Some(cut) = d.fair_cut() {
            for (s, ws) in w.iter_mut().enumerate() {
                *ws = ws.intersect(&cut.window(s));
            }
        }
    }
    w
}

struct Tracker {
    start: Instant,
    lb: f64,
    ub: f64,
    trajectory: Vec<TrajectoryPoint>,
}

impl Tracker {
    fn update(&mut self, lb: f64, ub: f64) {
        let lb = lb.max(self.lb).min(ub);
        let ub = ub.min(self.ub);
        if lb != self.lb || ub != self.ub || self.trajectory.is_empty() {
            self.lb = lb;
            self.ub = ub;
            self.trajectory.push(TrajectoryPoint {
                time: self.start.elapsed().as_secs_f64(),
                lb,
                ub,
            });
        }
    }
}

fn round_bound(lb: f64, integer: bool) -> f64 {
    if integer && lb.is_finite() {
        (lb - INT_TOL).ceil()
    } else {
        lb
    }
}

/// Applies a node's decisions to the shared master. Returns false if the
/// auxiliary bounds alone are contradictory.
fn apply_node(master: &mut Master, plugin: &dyn ProblemPlugin, decisions: &[BranchDecision], windows: &[Window<f64>]) -> bool {
    let spec = master.spec.clone();
    for (j, s) in spec.statics.iter().enumerate() {
        let (mut lo, mut hi) = (s.lo, s.hi);
        for d in decisions {
            match *d {
                BranchDecision::EtaUpper(u) if spec.eta == Some(j) => hi = hi.min(u),
                BranchDecision::EtaLower(u) if spec.eta == Some(j) => lo = lo.max(u),
                BranchDecision::GammaLower(l) if spec.gamma == Some(j) => lo = lo.max(l),
                BranchDecision::GammaUpper(l) if spec.gamma == Some(j) => hi = hi.min(l),
                BranchDecision::OrderCut { k, z, side } if spec.z.get(k) == Some(&j) => match side {
                    CutSide::Le => hi = hi.min(z),
                    CutSide::Ge => lo = lo.max(z),
                },
                _ => {}
            }
        }
        if lo > hi + 1e-9 {
            return false;
        }
        master
            .lp
            .set_variable_bounds(j, lo, hi.max(lo))
            .expect("static bounds ordered");
    }
    let ub = master.column_upper();
    for id in 0..master.pool.len() {
        let col = &master.pool.get(id).col;
        let ok = windows.get(col.owner).map_or(true, |w| w.contains(col.payoff))
            && plugin.column_allowed(col, decisions);
        let (mut lo, mut hi) = if ok { (0.0, ub) } else { (0.0, 0.0) };
        for d in decisions {
            if let BranchDecision::Column { id: cid, forced } = *d {
                if cid == id {
                    if forced {
                        lo = 1.0f64.min(hi);
                        if !ok {
                            return false;
                        }
                    } else {
                        hi = 0.0;
                    }
                }
            }
        }
        master.set_column_bounds(id, lo, hi);
    }
    true
}

/// Solves a problem instance by branch and price.
pub fn solve(plugin: &dyn ProblemPlugin, config: &SolveConfig) -> Result<SolveReport, EngineError> {
    let chain = branching_chain(config.scheme, config.alpha, config.exact_fallback);
    solve_with_chain(plugin, &chain, config)
}

pub fn solve_with_chain(
    plugin: &dyn ProblemPlugin,
    chain: &[Box<dyn BranchingRule>],
    config: &SolveConfig,
) -> Result<SolveReport, EngineError> {
    let start = Instant::now();
    let deadline = config.time_limit.map(|t| start + t);
    let spec = plugin.master_spec();
    let integer_obj = spec.integer_objective;
    let subs = spec.num_subproblems;
    let mut master = Master::new(spec.clone(), plugin.column_upper());
    for col in plugin.initial_columns() {
        master.add_column(col, plugin);
    }
    let mut incumbent: Option<Incumbent> = config.initial_incumbent.clone();
    if let Some(inc) = &incumbent {
        for col in &inc.columns {
            master.add_column(col.clone(), plugin);
        }
    }
    let mut tracker = Tracker {
        start,
        lb: f64::NEG_INFINITY,
        ub: f64::INFINITY,
        trajectory: Vec::new(),
    };
    let ub0 = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
    tracker.update(spec.trivial_lb, ub0);

    let has_fairness = chain.iter().any(|r| r.kind() == RuleKind::Fairness);
    let exact_check = config.alpha == 0.0 || config.exact_fallback;
    let mut open = vec![Node {
        id: 0,
        parent: None,
        depth: 0,
        decision: None,
        decisions: Vec::new(),
        lb: spec.trivial_lb,
        status: NodeStatus::Open,
        basis: None,
        rbf_descendant: false,
    }];
    let mut created = 1usize;
    let mut processed = 0usize;
    let mut rounds = 0usize;
    let mut generated = 0usize;
    let mut root_lp = None;
    let mut rbf_checks = 0usize;
    let mut rbf_violations = 0usize;
    let mut rbf_frontier = None;
    let mut stop: Option<SolveStatus> = None;

    let inc_value = |inc: &Option<Incumbent>| inc.as_ref().map(|i| i.objective);

    while let Some(idx) = select_next_node(&open) {
        if deadline.map_or(false, |d| Instant::now() >= d) {
            stop = Some(SolveStatus::TimeLimit);
            break;
        }
        if config.node_limit.map_or(false, |n| processed >= n) {
            stop = Some(SolveStatus::Feasible);
            break;
        }
        let mut node = open.swap_remove(idx);
        if prune(Some(node.lb), inc_value(&incumbent), integer_obj) {
            node.status = NodeStatus::PrunedBound;
            continue;
        }
        processed += 1;
        let windows = node_windows(&node.decisions, subs);
        if windows.iter().any(|w| w.is_empty()) || !apply_node(&mut master, plugin, &node.decisions, &windows) {
            node.status = NodeStatus::PrunedInfeasible;
            continue;
        }
        let decisions = node.decisions.clone();
        let admissible = |c: &Column| {
            windows.get(c.owner).map_or(true, |w| w.contains(c.payoff)) && plugin.column_allowed(c, &decisions)
        };
        let ctx = NodeContext {
            windows: &windows,
            decisions: &decisions,
            admissible: &admissible,
        };
        let opts = ColgenOptions {
            cap: config.cap,
            evict_after: config.evict_after,
            parallel: config.parallel,
            deadline,
            ..ColgenOptions::default()
        };
        let res = run_colgen(&mut master, plugin, &ctx, &opts, node.basis.take());
        rounds += res.rounds;
        generated += res.columns_added;
        match res.status {
            ColgenStatus::Optimal => {}
            ColgenStatus::Infeasible => {
                debug!("node {} infeasible", node.id);
                node.status = NodeStatus::PrunedInfeasible;
                refresh_bounds(&mut tracker, &open, &incumbent, integer_obj);
                continue;
            }
            ColgenStatus::TimeLimit => {
                open.push(node);
                stop = Some(SolveStatus::TimeLimit);
                break;
            }
            ColgenStatus::Failed => return Err(EngineError::LpFailure(node.id)),
        }
        if node.id == 0 {
            root_lp = Some(res.objective);
        }
        node.lb = node.lb.max(res.objective);

        if prune(Some(node.lb), inc_value(&incumbent), integer_obj) {
            node.status = NodeStatus::PrunedBound;
            refresh_bounds(&mut tracker, &open, &incumbent, integer_obj);
            continue;
        }

        let cols: Vec<NodeColumn> = master
            .pool
            .iter()
            .map(|(id, pc)| NodeColumn {
                id,
                col: &pc.col,
                value: master.value(&res.x, id),
            })
            .filter(|c| c.value > 1e-9)
            .collect();
        let z: Vec<f64> = spec.z.iter().map(|&j| res.x[j]).collect();
        let bctx = BranchContext {
            node_id: node.id,
            cols: &cols,
            eta: spec.eta.map(|j| res.x[j]),
            gamma: spec.gamma.map(|j| res.x[j]),
            z: &z,
            decisions: &node.decisions,
            integer_payoffs: spec.integer_payoffs,
        };

        let mut children = None;
        let mut fairness_passed = has_fairness;
        for rule in chain {
            if rule.kind() == RuleKind::Problem && plugin.is_integral(&cols) {
                break;
            }
            if let Some(split) = rule.propose(&bctx, plugin) {
                if rule.kind() == RuleKind::Fairness {
                    fairness_passed = false;
                }
                children = Some(split);
                break;
            }
        }
        if has_fairness && fairness_passed && exact_check {
            rbf_checks += 1;
            let ok = match config.scheme {
                BranchingScheme::Order => OrderRule::view(&bctx).is_order_respecting(RBF_TOL),
                _ => RangeRule::view(&bctx).is_range_respecting(RBF_TOL),
            };
            if !ok {
                rbf_violations += 1;
                warn!("node {} passed the fairness rule but is not fairness-respecting", node.id);
            }
        }
        let rbf_desc = node.rbf_descendant || (has_fairness && fairness_passed);

        match children {
            None => {
                if !plugin.is_integral(&cols) {
                    return Err(EngineError::NoBranchingCandidate(node.id));
                }
                let selected: Vec<&Column> = cols.iter().filter(|c| c.value > 0.5).map(|c| c.col).collect();
                let obj = plugin.integral_objective(&selected);
                if obj > node.lb + 1e-6 {
                    debug!("node {} integral objective {} above LP bound {}", node.id, obj, node.lb);
                }
                node.status = NodeStatus::Integral;
                if incumbent.as_ref().map_or(true, |i| obj < i.objective - 1e-9) {
                    info!("new incumbent {obj} at node {}", node.id);
                    incumbent = Some(Incumbent {
                        objective: obj,
                        columns: selected.into_iter().cloned().collect(),
                    });
                    let inc = inc_value(&incumbent);
                    open.retain(|n| !prune(Some(n.lb), inc, integer_obj));
                }
            }
            Some((left, right)) => {
                node.status = NodeStatus::Branched;
                for d in [left, right] {
                    let mut decs = node.decisions.clone();
                    decs.push(d);
                    open.push(Node {
                        id: created,
                        parent: Some(node.id),
                        depth: node.depth + 1,
                        decision: Some(d),
                        decisions: decs,
                        lb: node.lb,
                        status: NodeStatus::Open,
                        basis: res.basis.clone(),
                        rbf_descendant: rbf_desc,
                    });
                    created += 1;
                }
            }
        }
        refresh_bounds(&mut tracker, &open, &incumbent, integer_obj);
        if rbf_frontier.is_none() && has_fairness && open.iter().all(|n| n.rbf_descendant) {
            rbf_frontier = Some(tracker.lb);
        }
    }

    let ub = inc_value(&incumbent).unwrap_or(f64::INFINITY);
    let status = match stop {
        Some(s) => {
            refresh_bounds(&mut tracker, &open, &incumbent, integer_obj);
            s
        }
        None => {
            if incumbent.is_some() {
                tracker.update(ub, ub);
                SolveStatus::Optimal
            } else {
                SolveStatus::Infeasible
            }
        }
    };
    if rbf_frontier.is_none() && has_fairness && status == SolveStatus::Optimal {
        rbf_frontier = Some(tracker.lb);
    }
    let lb = tracker.lb;
    let wall = start.elapsed().as_secs_f64();
    info!(
        "status {:?} lb {} ub {} nodes {} time {:.3}s",
        status, lb, ub, created, wall
    );
    Ok(SolveReport {
        status,
        incumbent: ub,
        incumbent_columns: incumbent.map(|i| i.columns).unwrap_or_default(),
        lower_bound: lb,
        gap_pct: gap_pct(lb, ub),
        nodes: created,
        nodes_processed: processed,
        wall_time: wall,
        trajectory: tracker.trajectory,
        root_lp_bound: root_lp,
        colgen_rounds: rounds,
        columns_generated: generated,
        rbf_checks,
        rbf_violations,
        rbf_frontier_lb: rbf_frontier,
    })
}

fn refresh_bounds(tracker: &mut Tracker, open: &[Node], incumbent: &Option<Incumbent>, integer: bool) {
    let ub = incumbent.as_ref().map_or(f64::INFINITY, |i| i.objective);
    let lb = open.iter().map(|n| n.lb).fold(ub, f64::min);
    tracker.update(round_bound(lb, integer), ub);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn node(id: usize, depth: usize, lb: f64) -> Node {
        Node {
            id,
            parent: None,
            depth,
            decision: None,
            decisions: Vec::new(),
            lb,
            status: NodeStatus::Open,
            basis: None,
            rbf_descendant: false,
        }
    }

    #[test]
    fn best_first_selection() {
        assert_eq!(select_next_node(&[node(0, 0, 5.0), node(1, 0, 3.0)]), Some(1));
        assert_eq!(select_next_node(&[node(0, 2, 3.0), node(1, 4, 3.0)]), Some(1));
        assert_eq!(select_next_node(&[node(3, 2, 3.0), node(1, 2, 3.0)]), Some(1));
        assert_eq!(select_next_node(&[]), None);
    }

    #[test]
    fn prune_rules() {
        assert!(prune(None, Some(6.0), true));
        assert!(prune(Some(5.2), Some(6.0), true));
        assert!(!prune(Some(5.2), Some(6.0), false));
        assert!(!prune(Some(4.0), Some(6.0), true));
        assert!(!prune(Some(4.0 - 1e-9), Some(4.0), false));
        assert!(prune(Some(4.0 + 1e-9), Some(4.0), false));
        assert!(!prune(Some(1.0), None, true));
    }

    #[test]
    fn gap_convention() {
        assert_eq!(gap_pct(5.0, 5.0), 0.0);
        assert_eq!(gap_pct(0.0, 4.0), 100.0);
        assert!((gap_pct(3.0, 4.0) - 25.0).abs() < 1e-12);
        assert_eq!(gap_pct(1.0, f64::INFINITY), 100.0);
    }

    #[test]
    fn windows_nest_along_path() {
        let d = [BranchDecision::EtaUpper(5.0), BranchDecision::GammaLower(1.0), BranchDecision::EtaUpper(3.0)];
        let w = node_windows(&d, 2);
        assert_eq!((w[1].lo, w[1].hi), (1.0, 3.0));
        let o = [BranchDecision::OrderCut { k: 1, z: 4.0, side: CutSide::Le }];
        let w = node_windows(&o, 3);
        assert!(!w[0].has_upper());
        assert_eq!(w[2].hi, 4.0);
    }
}
