//! Brute-force reference solutions for small instances.
//!
//! Nothing here calls into the engine, the pricers or the branching code.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bitset::ElemSet;
use crate::fcvrp::CvrpInstance;
use crate::fgap::GapInstance;
use crate::simplex_lp::{ColSpec, LpModel, LpStatus, Sense};

pub const ROUTE_CUSTOMER_CAP: usize = 9;
pub const ASSIGNMENT_JOB_CAP: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("{what}: {n} exceeds the oracle cap of {cap}")]
    TooLarge { what: &'static str, n: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleRoute {
    pub seq: Vec<usize>,
    pub set: ElemSet,
    pub cost: i64,
    pub dist: i64,
    pub load: u64,
}

/// Every elementary route of an instance.
#[derive(Debug, Clone)]
pub struct RouteUniverse {
    pub routes: Vec<OracleRoute>,
}

pub fn enumerate_routes(inst: &CvrpInstance) -> Result<RouteUniverse, OracleError> {
    let n = inst.num_customers();
    if n > ROUTE_CUSTOMER_CAP {
        return Err(OracleError::TooLarge {
            what: "customers",
            n,
            cap: ROUTE_CUSTOMER_CAP,
        });
    }
    let mut routes = Vec::new();
    let mut seq = Vec::new();
    fn go(inst: &CvrpInstance, seq: &mut Vec<usize>, load: u64, out: &mut Vec<OracleRoute>) {
        if !seq.is_empty() {
            out.push(OracleRoute {
                seq: seq.clone(),
                set: seq.iter().copied().collect(),
                cost: inst.route_cost(seq),
                dist: inst.route_distance(seq),
                load,
            });
        }
        for j in 1..=inst.num_customers() {
            let l = load + u64::from(inst.demand[j]);
            if !seq.contains(&j) && l <= u64::from(inst.capacity) {
                seq.push(j);
                go(inst, seq, l, out);
                seq.pop();
            }
        }
    }
    go(inst, &mut seq, 0, &mut routes);
    Ok(RouteUniverse { routes })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FairObjective {
    Range,
    /// Weights applied to the payoffs sorted non-increasingly.
    Weights(Vec<i64>),
    Cost,
}

impl FairObjective {
    pub fn eval(&self, costs: &[i64], dists: &[i64]) -> i64 {
        match self {
            FairObjective::Range => dists.iter().max().unwrap() - dists.iter().min().unwrap(),
            FairObjective::Weights(v) => {
                let mut z = dists.to_vec();
                z.sort_unstable_by(|a, b| b.cmp(a));
                v.iter().zip(&z).map(|(a, b)| a * b).sum()
            }
            FairObjective::Cost => costs.iter().sum(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CvrpOptimum {
    pub value: i64,
    pub routes: Vec<Vec<usize>>,
}

/// Exact optimum over all partitions of the customers into exactly `k`
/// routes with total cost within `budget`.
pub fn brute_force_optimum(
    universe: &RouteUniverse,
    n: usize,
    k: usize,
    budget: Option<i64>,
    objective: &FairObjective,
) -> Option<CvrpOptimum> {
    // Distinct (cost, distance) options per customer set, smallest sequence kept.
    let mut by_set: BTreeMap<u128, BTreeMap<(i64, i64), Vec<usize>>> = BTreeMap::new();
    for r in &universe.routes {
        let e = by_set.entry(r.set.0).or_default().entry((r.cost, r.dist)).or_insert_with(|| r.seq.clone());
        if r.seq < *e {
            *e = r.seq.clone();
        }
    }
    let sets: Vec<(ElemSet, Vec<((i64, i64), Vec<usize>)>)> = by_set
        .into_iter()
        .map(|(s, o)| (ElemSet(s), o.into_iter().collect()))
        .collect();
    let all: ElemSet = (1..=n).collect();
    let mut best: Option<CvrpOptimum> = None;
    let mut chosen: Vec<(i64, i64, Vec<usize>)> = Vec::new();

    #[allow(clippy::too_many_arguments)]
    fn go(
        sets: &[(ElemSet, Vec<((i64, i64), Vec<usize>)>)],
        all: ElemSet,
        covered: ElemSet,
        k: usize,
        budget: Option<i64>,
        spent: i64,
        objective: &FairObjective,
        chosen: &mut Vec<(i64, i64, Vec<usize>)>,
        best: &mut Option<CvrpOptimum>,
    ) {
        if covered == all {
            if chosen.len() == k {
                let costs: Vec<i64> = chosen.iter().map(|c| c.0).collect();
                let dists: Vec<i64> = chosen.iter().map(|c| c.1).collect();
                let v = objective.eval(&costs, &dists);
                if best.as_ref().map_or(true, |b| v < b.value) {
                    let mut routes: Vec<Vec<usize>> = chosen.iter().map(|c| c.2.clone()).collect();
                    routes.sort();
                    *best = Some(CvrpOptimum { value: v, routes });
                }
            }
            return;
        }
        if chosen.len() == k {
            return;
        }
        let first = all.0 & !covered.0;
        let pivot = first.trailing_zeros() as usize;
        for (s, opts) in sets {
            if !s.contains(pivot) || !s.is_disjoint(covered) {
                continue;
            }
            for ((c, p), seq) in opts {
                if budget.map_or(false, |b| spent + c > b) {
                    continue;
                }
                chosen.push((*c, *p, seq.clone()));
                go(sets, all, covered.union(*s), k, budget, spent + c, objective, chosen, best);
                chosen.pop();
            }
        }
    }
    go(&sets, all, ElemSet::empty(), k, budget, 0, objective, &mut chosen, &mut best);
    best
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpFormulation {
    /// Routes indexed by vehicle, no symmetry breaking.
    VehicleIndex,
    /// Routes keyed by their last customer, one orientation per route.
    LastCustomer,
}

/// LP relaxation value with every route present; `None` if infeasible.
pub fn full_lp_bound(
    inst: &CvrpInstance,
    universe: &RouteUniverse,
    budget: Option<i64>,
    big_m: f64,
    form: LpFormulation,
) -> Option<f64> {
    let n = inst.num_customers();
    let k = inst.vehicles;
    let mut lp = LpModel::<f64>::new();
    for _ in 0..n {
        lp.add_row(Sense::Eq, 1.0);
    }
    let budget_row = budget.map(|b| lp.add_row(Sense::Le, b as f64));
    let routes: Vec<&OracleRoute> = match form {
        LpFormulation::VehicleIndex => universe.routes.iter().collect(),
        LpFormulation::LastCustomer => universe
            .routes
            .iter()
            .filter(|r| r.seq.first() <= r.seq.last())
            .collect(),
    };
    match form {
        LpFormulation::VehicleIndex => {
            let conv: Vec<usize> = (0..k).map(|_| lp.add_row(Sense::Eq, 1.0)).collect();
            let up: Vec<usize> = (0..k).map(|_| lp.add_row(Sense::Le, 0.0)).collect();
            let lo: Vec<usize> = (0..k).map(|_| lp.add_row(Sense::Ge, 0.0)).collect();
            lp.add_column(ColSpec::new(1.0, 0.0, f64::INFINITY, up.iter().map(|&r| (r, -1.0)).collect()))
                .unwrap();
            lp.add_column(ColSpec::new(-1.0, 0.0, f64::INFINITY, lo.iter().map(|&r| (r, -1.0)).collect()))
                .unwrap();
            for r in &routes {
                for kk in 0..k {
                    let mut coefs: Vec<(usize, f64)> = r.seq.iter().map(|&c| (c - 1, 1.0)).collect();
                    if let Some(b) = budget_row {
                        coefs.push((b, r.cost as f64));
                    }
                    coefs.push((conv[kk], 1.0));
                    coefs.push((up[kk], r.dist as f64));
                    coefs.push((lo[kk], r.dist as f64));
                    coefs.retain(|c| c.1 != 0.0);
                    lp.add_column(ColSpec::new(0.0, 0.0, 1.0, coefs)).unwrap();
                }
            }
        }
        LpFormulation::LastCustomer => {
            let card = lp.add_row(Sense::Eq, k as f64);
            let up: Vec<usize> = (0..n).map(|_| lp.add_row(Sense::Le, 0.0)).collect();
            let lo: Vec<usize> = (0..n).map(|_| lp.add_row(Sense::Ge, -big_m)).collect();
            lp.add_column(ColSpec::new(1.0, 0.0, f64::INFINITY, up.iter().map(|&r| (r, -1.0)).collect()))
                .unwrap();
            lp.add_column(ColSpec::new(-1.0, 0.0, f64::INFINITY, lo.iter().map(|&r| (r, -1.0)).collect()))
                .unwrap();
            for r in &routes {
                let last = *r.seq.last().unwrap() - 1;
                let mut coefs: Vec<(usize, f64)> = r.seq.iter().map(|&c| (c - 1, 1.0)).collect();
                if let Some(b) = budget_row {
                    coefs.push((b, r.cost as f64));
                }
                coefs.push((card, 1.0));
                coefs.push((up[last], r.dist as f64));
                coefs.push((lo[last], r.dist as f64 - big_m));
                coefs.retain(|c| c.1 != 0.0);
                lp.add_column(ColSpec::new(0.0, 0.0, 1.0, coefs)).unwrap();
            }
        }
    }
    let sol = lp.solve(None);
    match sol.status {
        LpStatus::Optimal => Some(sol.objective),
        _ => None,
    }
}

/// Every capacity-feasible job subset of one agent, as sorted job lists.
pub fn enumerate_assignments(inst: &GapInstance, agent: usize) -> Result<Vec<Vec<usize>>, OracleError> {
    let m = inst.jobs();
    if m > ASSIGNMENT_JOB_CAP {
        return Err(OracleError::TooLarge {
            what: "jobs",
            n: m,
            cap: ASSIGNMENT_JOB_CAP,
        });
    }
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        let jobs: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
        if inst.load(agent, &jobs) <= inst.capacity[agent] {
            out.push(jobs);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> CvrpInstance {
        let d = vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]];
        CvrpInstance::from_matrices("toy", vec![(0.0, 0.0); 3], vec![0, 1, 1], 2, 2, d.clone(), d).unwrap()
    }

    #[test]
    fn toy_universe() {
        let u = enumerate_routes(&toy()).unwrap();
        let mut seqs: Vec<Vec<usize>> = u.routes.iter().map(|r| r.seq.clone()).collect();
        seqs.sort();
        assert_eq!(seqs, vec![vec![1], vec![1, 2], vec![2], vec![2, 1]]);
        let o = brute_force_optimum(&u, 2, 2, None, &FairObjective::Range).unwrap();
        assert_eq!(o.value, 2);
        assert_eq!(o.routes, vec![vec![1], vec![2]]);
        let g = brute_force_optimum(&u, 2, 2, None, &FairObjective::Weights(vec![1, -1])).unwrap();
        assert_eq!(g.value, 2);
        let one = brute_force_optimum(&u, 2, 1, None, &FairObjective::Cost).unwrap();
        assert_eq!(one.value, 4);
    }

    #[test]
    fn tight_capacity_gives_empty_universe() {
        let mut inst = toy();
        inst.capacity = 0;
        assert!(enumerate_routes(&inst).unwrap().routes.is_empty());
    }
}
