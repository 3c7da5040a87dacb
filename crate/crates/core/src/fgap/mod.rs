//! Fair generalized assignment.

pub mod compact;
pub mod instance;
pub mod knapsack;
pub mod plugin;
pub mod solve;

pub use compact::{max_profit_oracle, profit_floor, solve_compact_oracle, CompactError, CompactOptimum};
pub use instance::{GapError, GapInstance};
pub use knapsack::{best_subset, DpTable};
pub use plugin::{FgapProblem, GapMode};
pub use solve::{max_profit, solve_fair_gap, GapOutcome, ProfitBaseline};
