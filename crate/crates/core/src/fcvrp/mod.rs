//! Fair capacitated vehicle routing.

pub mod instance;
pub mod labeling;
pub mod plugin;
pub mod solve;
pub mod tsp;

pub use instance::{CvrpInstance, InstanceError};
pub use labeling::{dominates, price_routes, Label, LabelingMode, PricedRoute, PricingGraph, Subproblem};
pub use plugin::{payoff_cap, FcvrpOptions, FcvrpProblem, Formulation};
pub use tsp::{delta_r, optimal_tour, tsp_postprocess, PostProcessed, TspError, TSP_EXACT_CAP};
pub use solve::{budget_from_pct, cost_baseline, delta_pct, solve_fair, CostBaseline, FairOutcome};
