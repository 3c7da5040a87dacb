//! Exhaustive solution of the compact model on small instances.

use thiserror::Error;

use super::instance::GapInstance;

/// Largest job count the enumeration accepts.
pub const COMPACT_JOB_CAP: usize = 12;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CompactError {
    #[error("{0} jobs exceed the enumeration cap of {COMPACT_JOB_CAP}")]
    TooLarge(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompactOptimum {
    /// Load range (or total profit for the profit maximum).
    pub value: i64,
    /// `assign[j]` is the agent of job `j`.
    pub assign: Vec<usize>,
}

/// Calls `f(assign, loads, profit)` for every capacity-feasible assignment.
fn for_each_assignment(inst: &GapInstance, mut f: impl FnMut(&[usize], &[i64], i64)) {
    let (n, m) = (inst.agents(), inst.jobs());
    let mut assign = vec![0usize; m];
    let mut loads = vec![0i64; n];
    fn go(
        inst: &GapInstance,
        j: usize,
        assign: &mut Vec<usize>,
        loads: &mut Vec<i64>,
        profit: i64,
        f: &mut dyn FnMut(&[usize], &[i64], i64),
    ) {
        if j == assign.len() {
            f(assign, loads, profit);
            return;
        }
        for i in 0..loads.len() {
            let w = inst.weight[i][j];
            if loads[i] + w <= inst.capacity[i] {
                loads[i] += w;
                assign[j] = i;
                go(inst, j + 1, assign, loads, profit + inst.profit[i][j], f);
                loads[i] -= w;
            }
        }
    }
    go(inst, 0, &mut assign, &mut loads, 0, &mut f);
}

/// Minimum load range over assignments with profit at least `floor`; idle agents count as load 0.
pub fn solve_compact_oracle(inst: &GapInstance, floor: i64) -> Result<Option<CompactOptimum>, CompactError> {
    if inst.jobs() > COMPACT_JOB_CAP {
        return Err(CompactError::TooLarge(inst.jobs()));
    }
    let mut best: Option<CompactOptimum> = None;
    for_each_assignment(inst, |a, loads, profit| {
        if profit < floor {
            return;
        }
        let r = loads.iter().max().unwrap() - loads.iter().min().unwrap();
        if best.as_ref().map_or(true, |b| r < b.value) {
            best = Some(CompactOptimum {
                value: r,
                assign: a.to_vec(),
            });
        }
    });
    Ok(best)
}

/// Maximum total profit over capacity-feasible assignments.
pub fn max_profit_oracle(inst: &GapInstance) -> Result<Option<CompactOptimum>, CompactError> {
    if inst.jobs() > COMPACT_JOB_CAP {
        return Err(CompactError::TooLarge(inst.jobs()));
    }
    let mut best: Option<CompactOptimum> = None;
    for_each_assignment(inst, |a, _, profit| {
        if best.as_ref().map_or(true, |b| profit > b.value) {
            best = Some(CompactOptimum {
                value: profit,
                assign: a.to_vec(),
            });
        }
    });
    Ok(best)
}

/// `ceil((1 - theta) * p_star)` computed without drifting past integers.
pub fn profit_floor(p_star: i64, theta: f64) -> i64 {
    let x = (1.0 - theta) * p_star as f64;
    (x - 1e-9).ceil() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_example() {
        let g = GapInstance::new("d", vec![vec![0, 0], vec![0, 0]], vec![vec![1, 2], vec![2, 1]], vec![2, 2]).unwrap();
        let o = solve_compact_oracle(&g, 0).unwrap().unwrap();
        assert_eq!(o.value, 0);
        assert_eq!(o.assign, vec![0, 1]);
        assert_eq!(solve_compact_oracle(&g, 1).unwrap(), None);
    }

    #[test]
    fn single_agent_has_zero_range() {
        let g = GapInstance::new("s", vec![vec![3, 4]], vec![vec![1, 1]], vec![5]).unwrap();
        assert_eq!(solve_compact_oracle(&g, 0).unwrap().unwrap().value, 0);
        assert_eq!(max_profit_oracle(&g).unwrap().unwrap().value, 7);
    }

    #[test]
    fn floors() {
        assert_eq!(profit_floor(200, 0.01), 198);
        assert_eq!(profit_floor(201, 0.01), 199);
        assert_eq!(profit_floor(100, 0.0), 100);
    }
}
