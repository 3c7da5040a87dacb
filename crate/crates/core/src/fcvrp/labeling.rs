//! Labeling for the elementary shortest path problem with capacity, under the
//! ng-path relaxation, with optional bidirectional search and payoff windows.

use std::collections::HashMap;

use crate::bitset::ElemSet;
use crate::branching::Window;

use super::instance::CvrpInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LabelingMode {
    Mono,
    Bidirectional,
    /// Elementary labels, dominance by (vertex, visited set, distance), and
    /// only routes whose distance equals the optimal tour over their customers.
    Tsp,
}

/// Partial path state: end vertex, reduced cost, load, distance, ng memory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Label {
    pub v: usize,
    pub rc: f64,
    pub load: u32,
    pub dist: i64,
    pub memory: ElemSet,
}

/// Label dominance with the payoff-window clauses. Both labels must share
/// their direction.
pub fn dominates(l1: &Label, l2: &Label, window: &Window<f64>) -> bool {
    if l1.v != l2.v || l1.load > l2.load || l1.rc > l2.rc + 1e-12 || !l1.memory.is_subset(l2.memory) {
        return false;
    }
    // A label already at or past the lower window end meets it on every completion.
    let lower_ok = !window.has_lower() || l1.dist >= l2.dist || l1.dist as f64 >= window.lo;
    let upper_ok = !window.has_upper() || l1.dist <= l2.dist;
    lower_ok && upper_ok
}

/// Static per-instance data shared by every pricing call.
#[derive(Debug, Clone)]
pub struct PricingGraph {
    /// ng neighbourhood of each vertex (customer itself included).
    pub ng: Vec<ElemSet>,
    /// Shortest-path distance from each vertex to the depot.
    pub sp_depot: Vec<i64>,
}

impl PricingGraph {
    pub fn new(inst: &CvrpInstance, ng_size: usize) -> Self {
        let v = inst.num_vertices();
        let mut ng = vec![ElemSet::empty(); v];
        for i in 1..v {
            let mut others: Vec<usize> = (1..v).filter(|&j| j != i).collect();
            others.sort_by_key(|&j| (inst.dist[i][j], j));
            let mut s: ElemSet = others.into_iter().take(ng_size).collect();
            s.insert(i);
            ng[i] = s;
        }
        let mut sp = inst.dist.clone();
        for k in 0..v {
            for i in 0..v {
                for j in 0..v {
                    let via = sp[i][k] + sp[k][j];
                    if via < sp[i][j] {
                        sp[i][j] = via;
                    }
                }
            }
        }
        let sp_depot = (0..v).map(|i| sp[i][0]).collect();
        PricingGraph { ng, sp_depot }
    }
}

/// One pricing subproblem with its dual-adjusted arc costs and restrictions.
#[derive(Debug, Clone)]
pub struct Subproblem {
    pub arc_rc: Vec<Vec<f64>>,
    /// Added once per route.
    pub constant: f64,
    pub removed: Vec<Vec<bool>>,
    /// Customers this subproblem may visit (vertex indices).
    pub allowed: ElemSet,
    /// Route must end at this customer and start at a smaller one.
    pub last: Option<usize>,
    pub window: Window<f64>,
    pub cap: usize,
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PricedRoute {
    pub route: Vec<usize>,
    pub rc: f64,
}

struct Node {
    label: Label,
    visited: ElemSet,
    pred: usize,
    alive: bool,
}

const NONE: usize = usize::MAX;

struct Search<'a> {
    inst: &'a CvrpInstance,
    g: &'a PricingGraph,
    sp: &'a Subproblem,
    forward: bool,
    tsp: bool,
    /// Extend only labels whose load satisfies this predicate.
    extend_limit: Box<dyn Fn(u32) -> bool + 'a>,
    arena: Vec<Node>,
    at: Vec<Vec<usize>>,
    by_load: Vec<Vec<usize>>,
}

impl<'a> Search<'a> {
    fn arc(&self, from: usize, to: usize) -> (usize, usize) {
        if self.forward {
            (from, to)
        } else {
            (to, from)
        }
    }

    fn path(&self, mut idx: usize) -> Vec<usize> {
        let mut p = Vec::new();
        while idx != NONE {
            let v = self.arena[idx].label.v;
            if v != 0 {
                p.push(v);
            }
            idx = self.arena[idx].pred;
        }
        p.reverse();
        p
    }

    fn dominated_by(&self, a: &Node, b: &Node) -> bool {
        if self.tsp {
            a.label.v == b.label.v && a.visited == b.visited && a.label.dist <= b.label.dist
        } else {
            dominates(&a.label, &b.label, &self.sp.window)
        }
    }

    fn insert(&mut self, node: Node) -> Option<usize> {
        let v = node.label.v;
        for &o in &self.at[v] {
            if self.arena[o].alive && self.dominated_by(&self.arena[o], &node) {
                return None;
            }
        }
        let idx = self.arena.len();
        let at_v = std::mem::take(&mut self.at[v]);
        let mut keep = Vec::with_capacity(at_v.len() + 1);
        for o in at_v {
            if self.arena[o].alive && self.dominated_by(&node, &self.arena[o]) {
                self.arena[o].alive = false;
            } else if self.arena[o].alive {
                keep.push(o);
            }
        }
        keep.push(idx);
        self.at[v] = keep;
        let load = node.label.load as usize;
        self.arena.push(node);
        self.by_load[load].push(idx);
        Some(idx)
    }

    fn may_visit(&self, from: usize, j: usize) -> bool {
        if !self.sp.allowed.contains(j) {
            return false;
        }
        match self.sp.last {
            None => true,
            Some(i) => {
                if self.forward {
                    if from == 0 {
                        j <= i
                    } else {
                        true
                    }
                } else if from == 0 {
                    j == i
                } else {
                    j != i
                }
            }
        }
    }

    /// Runs the search; `on_label` sees every created label index.
    fn run(&mut self, start_rc: f64, mut on_label: impl FnMut(&Self, usize)) {
        let q = self.inst.capacity;
        let root = Node {
            label: Label {
                v: 0,
                rc: start_rc,
                load: 0,
                dist: 0,
                memory: ElemSet::empty(),
            },
            visited: ElemSet::empty(),
            pred: NONE,
            alive: true,
        };
        self.insert(root);
        let n = self.inst.num_customers();
        let upper = self.sp.window.hi;
        for load in 0..=q as usize {
            let mut k = 0;
            while k < self.by_load[load].len() {
                let idx = self.by_load[load][k];
                k += 1;
                if !self.arena[idx].alive {
                    continue;
                }
                let lab = self.arena[idx].label;
                let visited = self.arena[idx].visited;
                if lab.v != 0 && self.sp.last == Some(lab.v) && self.forward {
                    continue;
                }
                if !(self.extend_limit)(lab.load) {
                    continue;
                }
                for j in 1..=n {
                    if lab.memory.contains(j) || !self.may_visit(lab.v, j) {
                        continue;
                    }
                    let (a, b) = self.arc(lab.v, j);
                    if self.sp.removed[a][b] {
                        continue;
                    }
                    let nl = lab.load + self.inst.demand[j];
                    if nl > q {
                        continue;
                    }
                    let nd = lab.dist + self.inst.dist[a][b];
                    if upper.is_finite() && (nd + self.g.sp_depot[j]) as f64 > upper + 1e-9 {
                        continue;
                    }
                    let memory = if self.tsp {
                        visited.union(ElemSet::singleton(j))
                    } else {
                        let mut m = lab.memory.intersection(self.g.ng[j]);
                        m.insert(j);
                        m
                    };
                    let node = Node {
                        label: Label {
                            v: j,
                            rc: lab.rc + self.sp.arc_rc[a][b],
                            load: nl,
                            dist: nd,
                            memory,
                        },
                        visited: visited.union(ElemSet::singleton(j)),
                        pred: idx,
                        alive: true,
                    };
                    if let Some(ni) = self.insert(node) {
                        on_label(self, ni);
                    }
                }
            }
        }
    }
}

struct Collector {
    cap: usize,
    threshold: f64,
    /// Worst reduced cost still in the running once the list has been trimmed.
    bar: Option<f64>,
    found: HashMap<Vec<usize>, f64>,
}

impl Collector {
    /// Whether a route of reduced cost `rc` could still make the final list.
    fn wants(&self, rc: f64) -> bool {
        rc < self.threshold && self.bar.map_or(true, |b| rc <= b)
    }

    fn offer(&mut self, route: Vec<usize>, rc: f64) {
        if !self.wants(rc) {
            return;
        }
        let e = self.found.entry(route).or_insert(rc);
        if rc < *e {
            *e = rc;
        }
        if self.found.len() >= 4 * self.cap.max(16) {
            let v = self.sorted();
            self.bar = v.get(self.cap.saturating_sub(1)).map(|r| r.rc);
            self.found = v.into_iter().take(self.cap).map(|r| (r.route, r.rc)).collect();
        }
    }

    fn sorted(&mut self) -> Vec<PricedRoute> {
        let mut v: Vec<PricedRoute> = self
            .found
            .drain()
            .map(|(route, rc)| PricedRoute { route, rc })
            .collect();
        v.sort_by(|a, b| a.rc.total_cmp(&b.rc).then_with(|| a.route.cmp(&b.route)));
        v
    }

    fn finish(mut self) -> Vec<PricedRoute> {
        let mut v = self.sorted();
        v.truncate(self.cap);
        v
    }
}

/// Optimal closed tour over the depot and `set`.
pub fn tsp_optimum(inst: &CvrpInstance, set: ElemSet) -> i64 {
    let nodes: Vec<usize> = set.iter().collect();
    let k = nodes.len();
    if k == 0 {
        return 0;
    }
    let full = (1usize << k) - 1;
    let mut dp = vec![i64::MAX; (1 << k) * k];
    for (i, &v) in nodes.iter().enumerate() {
        dp[(1 << i) * k + i] = inst.dist[0][v];
    }
    for mask in 1..=full {
        for last in 0..k {
            let cur = dp[mask * k + last];
            if cur == i64::MAX || mask & (1 << last) == 0 {
                continue;
            }
            for nxt in 0..k {
                if mask & (1 << nxt) != 0 {
                    continue;
                }
                let m2 = mask | (1 << nxt);
                let c = cur + inst.dist[nodes[last]][nodes[nxt]];
                if c < dp[m2 * k + nxt] {
                    dp[m2 * k + nxt] = c;
                }
            }
        }
    }
    (0..k)
        .map(|l| dp[full * k + l].saturating_add(inst.dist[nodes[l]][0]))
        .min()
        .unwrap_or(0)
}

fn route_window_ok(w: &Window<f64>, dist: i64) -> bool {
    w.contains(dist as f64)
}

/// Returns up to `sp.cap` routes with reduced cost below the threshold, best first.
pub fn price_routes(
    inst: &CvrpInstance,
    g: &PricingGraph,
    sp: &Subproblem,
    mode: LabelingMode,
) -> Vec<PricedRoute> {
    let q = inst.capacity;
    let mut col = Collector {
        cap: sp.cap,
        threshold: sp.threshold,
        bar: None,
        found: HashMap::new(),
    };
    let tsp = mode == LabelingMode::Tsp;
    let new_search = |forward: bool, limit: Box<dyn Fn(u32) -> bool>| Search {
        inst,
        g,
        sp,
        forward,
        tsp,
        extend_limit: limit,
        arena: Vec::new(),
        at: vec![Vec::new(); inst.num_vertices()],
        by_load: vec![Vec::new(); q as usize + 1],
    };
    let close = |s: &Search, idx: usize, col: &mut Collector, memo: &mut HashMap<ElemSet, i64>| {
        let node = &s.arena[idx];
        let v = node.label.v;
        if v == 0 || sp.removed[v][0] || sp.last.map_or(false, |i| i != v) {
            return;
        }
        let dist = node.label.dist + inst.dist[v][0];
        if !route_window_ok(&sp.window, dist) {
            return;
        }
        if tsp {
            let opt = *memo.entry(node.visited).or_insert_with(|| tsp_optimum(inst, node.visited));
            if dist != opt {
                return;
            }
        }
        let rc = node.label.rc + sp.arc_rc[v][0];
        if col.wants(rc) {
            col.offer(s.path(idx), rc);
        }
    };

    match mode {
        LabelingMode::Mono | LabelingMode::Tsp => {
            let mut memo = HashMap::new();
            let mut fwd = new_search(true, Box::new(|_| true));
            let mut closing = Vec::new();
            fwd.run(sp.constant, |_, i| closing.push(i));
            // Closing after the search only uses labels that survived dominance.
            for i in closing {
                if fwd.arena[i].alive {
                    close(&fwd, i, &mut col, &mut memo);
                }
            }
        }
        LabelingMode::Bidirectional => {
            let mut memo = HashMap::new();
            let mut fwd = new_search(true, Box::new(move |l| 2 * l <= q));
            fwd.run(sp.constant, |_, _| {});
            let mut bwd = new_search(false, Box::new(move |l| 2 * l < q));
            bwd.run(0.0, |_, _| {});
            let f_alive: Vec<usize> = (0..fwd.arena.len())
                .filter(|&i| fwd.arena[i].alive && fwd.arena[i].label.v != 0)
                .collect();
            for &i in &f_alive {
                close(&fwd, i, &mut col, &mut memo);
            }
            for &fi in &f_alive {
                let f = &fwd.arena[fi];
                let vf = f.label.v;
                if sp.last == Some(vf) {
                    continue;
                }
                for vb in 1..=inst.num_customers() {
                    if sp.removed[vf][vb] {
                        continue;
                    }
                    for &bi in &bwd.at[vb] {
                        let b = &bwd.arena[bi];
                        if !b.alive {
                            continue;
                        }
                        if f.label.load + b.label.load > q || !f.label.memory.is_disjoint(b.label.memory) {
                            continue;
                        }
                        let dist = f.label.dist + inst.dist[vf][vb] + b.label.dist;
                        if !route_window_ok(&sp.window, dist) {
                            continue;
                        }
                        let rc = f.label.rc + sp.arc_rc[vf][vb] + b.label.rc;
                        if !col.wants(rc) {
                            continue;
                        }
                        let mut route = fwd.path(fi);
                        let mut tail = bwd.path(bi);
                        tail.reverse();
                        route.extend(tail);
                        col.offer(route, rc);
                    }
                }
            }
        }
    }
    col.finish()
}
