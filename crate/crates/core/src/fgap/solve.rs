//! Profit maximum, profit floor and fair solve in one call.

use crate::engine::{solve, BranchingScheme, EngineError, SolveConfig, SolveReport, SolveStatus};

use super::compact::profit_floor;
use super::instance::GapInstance;
use super::plugin::{FgapProblem, GapMode};

#[derive(Debug, Clone)]
pub struct ProfitBaseline {
    pub profit: i64,
    pub assign: Vec<usize>,
    pub proven: bool,
    pub report: SolveReport,
}

/// Maximum-profit assignment by branch and price.
pub fn max_profit(inst: &GapInstance, config: &SolveConfig) -> Result<Option<ProfitBaseline>, EngineError> {
    let problem = FgapProblem::new(inst.clone(), GapMode::MaxProfit);
    let cfg = SolveConfig {
        scheme: BranchingScheme::Classical,
        initial_incumbent: None,
        ..config.clone()
    };
    let report = solve(&problem, &cfg)?;
    if report.incumbent_columns.is_empty() {
        return Ok(None);
    }
    Ok(Some(ProfitBaseline {
        profit: (-report.incumbent).round() as i64,
        assign: problem.assignment_of(&report.incumbent_columns),
        proven: report.status == SolveStatus::Optimal,
        report,
    }))
}

#[derive(Debug, Clone)]
pub struct GapOutcome {
    pub floor: i64,
    pub baseline: ProfitBaseline,
    /// Load range of the profit-maximal assignment.
    pub efficient_range: f64,
    pub report: SolveReport,
    pub assign: Vec<usize>,
}

/// Computes the profit maximum, sets the floor to `ceil((1 - theta) P*)` and
/// minimises the load range seeded with the profit-maximal assignment.
pub fn solve_fair_gap(inst: &GapInstance, theta: f64, config: &SolveConfig) -> Result<Option<GapOutcome>, EngineError> {
    let Some(baseline) = max_profit(inst, config)? else {
        return Ok(None);
    };
    let floor = profit_floor(baseline.profit, theta);
    let problem = FgapProblem::new(inst.clone(), GapMode::Range { profit_floor: floor });
    let inc = problem.incumbent_from_assignment(&baseline.assign);
    let efficient_range = inc.as_ref().map_or(f64::INFINITY, |i| i.objective);
    let cfg = SolveConfig {
        initial_incumbent: inc,
        ..config.clone()
    };
    let report = solve(&problem, &cfg)?;
    let assign = problem.assignment_of(&report.incumbent_columns);
    Ok(Some(GapOutcome {
        floor,
        baseline,
        efficient_range,
        report,
        assign,
    }))
}
