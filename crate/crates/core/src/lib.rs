//! Branch and price for range and order-based fairness objectives.
//!
//! The LP layer and the branching views are generic over [`Scalar`]; the
//! tree search, pricing and problem plugins work in `f64`.

pub mod bench;
pub mod bitset;
pub mod branching;
pub mod colgen;
pub mod engine;
pub mod fcvrp;
pub mod fgap;
pub mod objective;
pub mod oracle;
pub mod scalar;
pub mod selection;
pub mod simplex_lp;

pub use bitset::ElemSet;
pub use scalar::Scalar;

pub type LpModel64 = simplex_lp::LpModel<f64>;
pub type LpModel32 = simplex_lp::LpModel<f32>;
pub type LpSolution64 = simplex_lp::LpSolution<f64>;
pub type LpSolution32 = simplex_lp::LpSolution<f32>;
pub type RangeView64 = branching::RangeView<f64>;
pub type RangeView32 = branching::RangeView<f32>;
pub type OrderView64 = branching::OrderView<f64>;
pub type OrderView32 = branching::OrderView<f32>;
pub type Window64 = branching::Window<f64>;
pub type OrderWeights64 = objective::OrderWeights<f64>;
pub type OrderWeightsI64 = objective::OrderWeights<i64>;
