//! Pick-`k`-of-`n` range minimization with one column per item.
//!
//! Model: `sum x = k`, `p_i x_i <= eta`, `M + (p_i - M) x_i >= gamma`,
//! `eta >= gamma`, `eta, gamma in [0, M]`, objective `eta - gamma`.

use crate::bitset::ElemSet;
use crate::colgen::{Column, MasterSpec, PricingRequest, Pricer};
use crate::engine::{BranchDecision, NodeColumn, ProblemPlugin};
use crate::objective::range_of;
use crate::simplex_lp::{ColSpec, LpModel, Sense};

#[derive(Debug, Clone)]
pub struct SelectionProblem {
    pub payoffs: Vec<f64>,
    pub pick: usize,
    pub cap: f64,
}

impl SelectionProblem {
    pub fn new(payoffs: Vec<f64>, pick: usize) -> Self {
        let cap = payoffs.iter().copied().fold(0.0, f64::max);
        SelectionProblem { payoffs, pick, cap }
    }

    /// Three items with payoffs 1, 2, 3; choose two.
    pub fn example() -> Self {
        Self::new(vec![1.0, 2.0, 3.0], 2)
    }

    fn n(&self) -> usize {
        self.payoffs.len()
    }

    fn column(&self, i: usize) -> Column {
        Column {
            owner: i,
            cost: 0.0,
            payoff: self.payoffs[i],
            covers: ElemSet::empty(),
            payload: vec![i],
        }
    }

    /// The complete model as a plain LP: columns `x_1..x_n, eta, gamma`.
    pub fn full_lp(&self) -> LpModel<f64> {
        let n = self.n();
        let m = self.cap;
        let mut lp = LpModel::new();
        let card = lp.add_row(Sense::Eq, self.pick as f64);
        let eta_rows: Vec<usize> = (0..n).map(|_| lp.add_row(Sense::Le, 0.0)).collect();
        let gamma_rows: Vec<usize> = (0..n).map(|_| lp.add_row(Sense::Ge, -m)).collect();
        let link = lp.add_row(Sense::Ge, 0.0);
        for i in 0..n {
            let p = self.payoffs[i];
            lp.add_column(ColSpec::new(
                0.0,
                0.0,
                1.0,
                vec![(card, 1.0), (eta_rows[i], p), (gamma_rows[i], p - m)],
            ))
            .expect("valid column");
        }
        let mut eta = vec![(link, 1.0)];
        eta.extend(eta_rows.iter().map(|&r| (r, -1.0)));
        lp.add_column(ColSpec::new(1.0, 0.0, m, eta)).expect("valid column");
        let mut gamma = vec![(link, -1.0)];
        gamma.extend(gamma_rows.iter().map(|&r| (r, -1.0)));
        lp.add_column(ColSpec::new(-1.0, 0.0, m, gamma)).expect("valid column");
        lp
    }
}

impl Pricer for SelectionProblem {
    fn num_subproblems(&self) -> usize {
        self.n()
    }

    fn price(&self, sub: usize, req: &PricingRequest) -> Vec<Column> {
        let col = self.column(sub);
        if !req.window(sub).contains(col.payoff) {
            return Vec::new();
        }
        if req
            .decisions
            .iter()
            .any(|d| !matches!(d, BranchDecision::Column { .. }) && d.fair_cut().is_none())
        {
            return Vec::new();
        }
        let rc = req.obj_scale * self.column_obj(&col)
            - self
                .column_coefs(&col)
                .iter()
                .map(|&(r, a)| req.duals[r] * a)
                .sum::<f64>();
        if rc < req.threshold {
            vec![col]
        } else {
            Vec::new()
        }
    }

    fn column_coefs(&self, col: &Column) -> Vec<(usize, f64)> {
        let n = self.n();
        let i = col.owner;
        vec![(0, 1.0), (1 + i, col.payoff), (1 + n + i, col.payoff - self.cap)]
    }
}

impl ProblemPlugin for SelectionProblem {
    fn master_spec(&self) -> MasterSpec {
        let n = self.n();
        let m = self.cap;
        let mut rows = vec![(Sense::Eq, self.pick as f64)];
        rows.extend((0..n).map(|_| (Sense::Le, 0.0)));
        rows.extend((0..n).map(|_| (Sense::Ge, -m)));
        rows.push((Sense::Ge, 0.0));
        let link = 2 * n + 1;
        let mut eta = vec![(link, 1.0)];
        eta.extend((0..n).map(|i| (1 + i, -1.0)));
        let mut gamma = vec![(link, -1.0)];
        gamma.extend((0..n).map(|i| (1 + n + i, -1.0)));
        let mut names = vec!["card".to_string()];
        names.extend((0..n).map(|i| format!("eta_{i}")));
        names.extend((0..n).map(|i| format!("gamma_{i}")));
        names.push("link".to_string());
        MasterSpec {
            rows,
            row_names: names,
            statics: vec![ColSpec::new(1.0, 0.0, m, eta), ColSpec::new(-1.0, 0.0, m, gamma)],
            eta: Some(0),
            gamma: Some(1),
            z: Vec::new(),
            num_subproblems: n,
            penalty: 10.0 * m.max(1.0),
            integer_payoffs: self.payoffs.iter().all(|p| p.fract() == 0.0),
            integer_objective: self.payoffs.iter().all(|p| p.fract() == 0.0),
            trivial_lb: 0.0,
            payoff_cap: m,
        }
    }

    fn initial_columns(&self) -> Vec<Column> {
        (0..self.n()).map(|i| self.column(i)).collect()
    }

    fn branch(&self, cols: &[NodeColumn], _decisions: &[BranchDecision]) -> Option<(BranchDecision, BranchDecision)> {
        let c = cols
            .iter()
            .filter(|c| c.value > 1e-6 && c.value < 1.0 - 1e-6)
            .min_by(|a, b| (a.value - 0.5).abs().total_cmp(&(b.value - 0.5).abs()))?;
        Some((
            BranchDecision::Column { id: c.id, forced: false },
            BranchDecision::Column { id: c.id, forced: true },
        ))
    }

    fn integral_objective(&self, selected: &[&Column]) -> f64 {
        let p: Vec<f64> = selected.iter().map(|c| c.payoff).collect();
        range_of(&p).unwrap_or(0.0)
    }
}
