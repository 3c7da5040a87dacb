use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point type the LP and the branching views are written against.
///
/// Tolerances are part of the type: single precision cannot honour the
/// double-precision feasibility tolerance, so each impl carries its own.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Primal feasibility tolerance.
    fn tol_feas() -> Self;
    /// Dual feasibility (optimality) tolerance.
    fn tol_opt() -> Self;
    /// Smallest magnitude accepted as a pivot element.
    fn tol_pivot() -> Self;

    fn from_f64_lossy(v: f64) -> Self {
        Self::from_f64(v).unwrap_or_else(Self::nan)
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn tol_feas() -> Self {
        1e-7
    }
    fn tol_opt() -> Self {
        1e-6
    }
    fn tol_pivot() -> Self {
        1e-9
    }
}

impl Scalar for f32 {
    fn tol_feas() -> Self {
        1e-4
    }
    fn tol_opt() -> Self {
        1e-3
    }
    fn tol_pivot() -> Self {
        1e-6
    }
}
