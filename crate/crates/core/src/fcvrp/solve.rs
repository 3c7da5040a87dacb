//! Cost baseline, budget and fair solve in one call.

use crate::engine::{solve, BranchingScheme, EngineError, SolveConfig, SolveReport, SolveStatus};

use super::instance::CvrpInstance;
use super::plugin::{FcvrpOptions, FcvrpProblem, Formulation};

/// `ceil(pct * cost / 100)` in integer arithmetic.
pub fn budget_from_pct(cost: i64, pct: u32) -> i64 {
    (cost * i64::from(pct) + 99).div_euclid(100)
}

#[derive(Debug, Clone)]
pub struct CostBaseline {
    pub cost: i64,
    pub routes: Vec<Vec<usize>>,
    pub proven: bool,
    pub report: SolveReport,
}

/// Cheapest solution with exactly `K` routes.
pub fn cost_baseline(
    inst: &CvrpInstance,
    options: &FcvrpOptions,
    config: &SolveConfig,
) -> Result<Option<CostBaseline>, EngineError> {
    let opts = FcvrpOptions {
        mode: match options.mode {
            super::LabelingMode::Tsp => super::LabelingMode::Bidirectional,
            m => m,
        },
        ..options.clone()
    };
    let problem = FcvrpProblem::new(inst.clone(), Formulation::Cost, None, opts);
    let cfg = SolveConfig {
        scheme: BranchingScheme::Classical,
        initial_incumbent: None,
        ..config.clone()
    };
    let report = solve(&problem, &cfg)?;
    if report.incumbent_columns.is_empty() {
        return Ok(None);
    }
    let cols: Vec<_> = report.incumbent_columns.iter().collect();
    let routes = FcvrpProblem::routes_of(&cols);
    Ok(Some(CostBaseline {
        cost: report.incumbent.round() as i64,
        routes,
        proven: report.status == SolveStatus::Optimal,
        report,
    }))
}

#[derive(Debug, Clone)]
pub struct FairOutcome {
    pub budget: i64,
    pub baseline: CostBaseline,
    /// Objective of the cost-efficient routes under the fair objective.
    pub efficient_objective: f64,
    pub report: SolveReport,
    pub routes: Vec<Vec<usize>>,
}

impl FairOutcome {
    /// Reduction of the fair objective relative to the cost-efficient routes, in percent.
    pub fn delta_pct(&self) -> f64 {
        delta_pct(self.efficient_objective, self.report.incumbent)
    }
}

/// `100 * (efficient - best) / efficient`, zero when the efficient value is zero.
pub fn delta_pct(efficient: f64, best: f64) -> f64 {
    if efficient.abs() < 1e-12 || !best.is_finite() {
        0.0
    } else {
        100.0 * (efficient - best) / efficient
    }
}

/// Runs the cost baseline, sets the budget to `budget_pct` percent of it and
/// solves the fair problem seeded with the baseline routes.
pub fn solve_fair(
    inst: &CvrpInstance,
    formulation: Formulation,
    budget_pct: u32,
    options: &FcvrpOptions,
    config: &SolveConfig,
) -> Result<Option<FairOutcome>, EngineError> {
    let Some(baseline) = cost_baseline(inst, options, config)? else {
        return Ok(None);
    };
    let budget = budget_from_pct(baseline.cost, budget_pct);
    let problem = FcvrpProblem::new(inst.clone(), formulation, Some(budget), options.clone());
    let inc = problem.incumbent_from_routes(&baseline.routes);
    let efficient_objective = inc.as_ref().map_or(f64::INFINITY, |i| i.objective);
    let cfg = SolveConfig {
        initial_incumbent: inc,
        ..config.clone()
    };
    let report = solve(&problem, &cfg)?;
    let cols: Vec<_> = report.incumbent_columns.iter().collect();
    let routes = FcvrpProblem::routes_of(&cols);
    Ok(Some(FairOutcome {
        budget,
        baseline,
        efficient_objective,
        report,
        routes,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_rounding() {
        assert_eq!(budget_from_pct(1000, 110), 1100);
        assert_eq!(budget_from_pct(1001, 101), 1012);
        assert_eq!(budget_from_pct(100, 101), 101);
    }

    #[test]
    fn delta_matches_reference_figure() {
        let d = delta_pct(2170.0, 1601.0);
        assert!((d - 26.2).abs() < 0.05, "{d}");
    }
}
