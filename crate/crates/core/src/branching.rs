//! Range and order violation detection plus child construction.
//!
//! Positions and subproblems are 0-based. A payoff window `[lo, hi]` is
//! closed; `hi = +inf` means no upper window.

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window<T> {
    pub lo: T,
    pub hi: T,
}

impl<T: Scalar> Window<T> {
    pub fn unbounded() -> Self {
        Window {
            lo: T::zero(),
            hi: T::infinity(),
        }
    }

    pub fn has_upper(&self) -> bool {
        self.hi.is_finite()
    }

    pub fn has_lower(&self) -> bool {
        self.lo > T::zero()
    }

    pub fn contains(&self, p: T) -> bool {
        let eps = T::tol_pivot();
        p >= self.lo - eps && p <= self.hi + eps
    }

    pub fn intersect(&self, o: &Self) -> Self {
        Window {
            lo: self.lo.max(o.lo),
            hi: self.hi.min(o.hi),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.lo > self.hi + T::tol_pivot()
    }
}

impl<T: Scalar> Default for Window<T> {
    fn default() -> Self {
        Self::unbounded()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutSide {
    Le,
    Ge,
}

/// A fairness branching constraint on the auxiliary variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FairCut<T> {
    /// `eta <= U` and no column with payoff above `U`.
    EtaUpper(T),
    /// `eta >= U` only.
    EtaLower(T),
    /// `gamma >= L` and no column with payoff below `L`.
    GammaLower(T),
    /// `gamma <= L` only.
    GammaUpper(T),
    /// `z_k <= Z` (forbid payoff above `Z` at positions `>= k`) or
    /// `z_k >= Z` (forbid payoff below `Z` at positions `<= k`).
    Order { k: usize, z: T, side: CutSide },
}

impl<T: Scalar> FairCut<T> {
    /// Payoff window this cut imposes on a subproblem (order position).
    pub fn window(&self, sub: usize) -> Window<T> {
        let mut w = Window::unbounded();
        match *self {
            FairCut::EtaUpper(u) => w.hi = u,
            FairCut::GammaLower(l) => w.lo = l,
            FairCut::Order { k, z, side: CutSide::Le } if sub >= k => w.hi = z,
            FairCut::Order { k, z, side: CutSide::Ge } if sub <= k => w.lo = z,
            _ => {}
        }
        w
    }

    pub fn threshold(&self) -> T {
        match *self {
            FairCut::EtaUpper(v)
            | FairCut::EtaLower(v)
            | FairCut::GammaLower(v)
            | FairCut::GammaUpper(v) => v,
            FairCut::Order { z, .. } => z,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RangeSide {
    Max,
    Min,
}

#[derive(Debug, Clone)]
pub struct RangeView<T> {
    pub support: Vec<T>,
    pub eta: T,
    pub gamma: T,
    pub p_max: Option<T>,
    pub p_min: Option<T>,
}

impl<T: Scalar> RangeView<T> {
    /// Builds the view from `(payoff, value)` pairs; the support is `value > tol_feas`.
    pub fn new(cols: impl IntoIterator<Item = (T, T)>, eta: T, gamma: T) -> Self {
        let tol = T::tol_feas();
        let support: Vec<T> = cols
            .into_iter()
            .filter(|&(_, x)| x > tol)
            .map(|(p, _)| p)
            .collect();
        let p_max = support.iter().copied().reduce(T::max);
        let p_min = support.iter().copied().reduce(T::min);
        RangeView {
            support,
            eta,
            gamma,
            p_max,
            p_min,
        }
    }

    pub fn is_range_respecting(&self, tol: T) -> bool {
        match (self.p_max, self.p_min) {
            (Some(hi), Some(lo)) => self.eta >= hi - tol && self.gamma <= lo + tol,
            _ => true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeCandidate<T> {
    pub side: RangeSide,
    pub cutoff: T,
    pub violation: T,
}

fn midpoint<T: Scalar>(a: T, b: T) -> T {
    (a + b) / T::from_f64_lossy(2.0)
}

pub fn detect_range_violation<T: Scalar>(view: &RangeView<T>, alpha: T) -> Option<RangeCandidate<T>> {
    let (p_max, p_min) = (view.p_max?, view.p_min?);
    let tol = T::tol_feas();
    let one = T::one();
    let mut best: Option<(T, RangeCandidate<T>)> = None;

    let u_alpha = (one + alpha) * view.eta;
    if p_max > u_alpha + tol && p_max > view.eta + tol {
        let cutoff = if alpha > T::zero() && u_alpha > view.eta + tol {
            u_alpha
        } else {
            midpoint(view.eta, p_max)
        };
        let violation = p_max - view.eta;
        let rel = violation / one.max(view.eta.abs());
        best = Some((
            rel,
            RangeCandidate {
                side: RangeSide::Max,
                cutoff,
                violation,
            },
        ));
    }
    let l_alpha = (one - alpha) * view.gamma;
    if p_min < l_alpha - tol && p_min < view.gamma - tol {
        let cutoff = if alpha > T::zero() && l_alpha < view.gamma - tol && l_alpha > p_min {
            l_alpha
        } else {
            midpoint(p_min, view.gamma)
        };
        let violation = view.gamma - p_min;
        let rel = violation / one.max(view.gamma.abs());
        // Ties go to the max side.
        if best.map_or(true, |(r, _)| rel > r) {
            best = Some((
                rel,
                RangeCandidate {
                    side: RangeSide::Min,
                    cutoff,
                    violation,
                },
            ));
        }
    }
    best.map(|(_, c)| c)
}

/// `(left, right)` decisions for a range candidate. With integral payoffs the
/// cutoff is floored and the split becomes `<= U` / `>= U + 1`.
pub fn make_range_children<T: Scalar>(c: &RangeCandidate<T>, integer: bool) -> (FairCut<T>, FairCut<T>) {
    match (c.side, integer) {
        (RangeSide::Max, false) => (FairCut::EtaUpper(c.cutoff), FairCut::EtaLower(c.cutoff)),
        (RangeSide::Max, true) => {
            let u = c.cutoff.floor();
            (FairCut::EtaUpper(u), FairCut::EtaLower(u + T::one()))
        }
        (RangeSide::Min, false) => (FairCut::GammaLower(c.cutoff), FairCut::GammaUpper(c.cutoff)),
        (RangeSide::Min, true) => {
            let l = c.cutoff.floor() + T::one();
            (FairCut::GammaLower(l), FairCut::GammaUpper(l - T::one()))
        }
    }
}

#[derive(Debug, Clone)]
pub struct OrderView<T> {
    /// `(position, payoff, value)` for every column with positive value.
    pub entries: Vec<(usize, T, T)>,
    pub z: Vec<T>,
}

impl<T: Scalar> OrderView<T> {
    pub fn new(cols: impl IntoIterator<Item = (usize, T, T)>, z: Vec<T>) -> Self {
        let tol = T::tol_feas();
        let entries = cols.into_iter().filter(|&(_, _, y)| y > tol).collect();
        OrderView { entries, z }
    }

    pub fn positions(&self) -> usize {
        self.z.len()
    }

    /// Smallest payoff used at positions `<= k`.
    pub fn p_minus(&self, k: usize) -> Option<T> {
        self.entries
            .iter()
            .filter(|e| e.0 <= k)
            .map(|e| e.1)
            .reduce(T::min)
    }

    /// Largest payoff used at positions `>= k`.
    pub fn p_plus(&self, k: usize) -> Option<T> {
        self.entries
            .iter()
            .filter(|e| e.0 >= k)
            .map(|e| e.1)
            .reduce(T::max)
    }

    pub fn is_order_respecting(&self, tol: T) -> bool {
        (0..self.positions()).all(|k| {
            let z = self.z[k];
            self.p_minus(k).map_or(true, |p| z <= p + tol)
                && self.p_plus(k).map_or(true, |p| z >= p - tol)
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderDirection {
    /// `z_k > p^k_-`.
    TooHigh,
    /// `z_k < p^k_+`.
    TooLow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderCandidate<T> {
    pub k: usize,
    pub direction: OrderDirection,
    pub cutoff: T,
    pub violation: T,
}

pub fn detect_order_violation<T: Scalar>(view: &OrderView<T>, alpha: T) -> Option<OrderCandidate<T>> {
    let tol = T::tol_feas();
    let one = T::one();
    let mut best: Option<OrderCandidate<T>> = None;
    let mut consider = |c: OrderCandidate<T>| {
        if best.map_or(true, |b| c.violation > b.violation + tol) {
            best = Some(c);
        }
    };
    for k in 0..view.positions() {
        let z = view.z[k];
        if let Some(pm) = view.p_minus(k) {
            let lim = (one - alpha) * z;
            if pm < lim - tol && pm < z - tol {
                let cutoff = if alpha > T::zero() && lim < z - tol && lim > pm {
                    lim
                } else {
                    midpoint(pm, z)
                };
                consider(OrderCandidate {
                    k,
                    direction: OrderDirection::TooHigh,
                    cutoff,
                    violation: z - pm,
                });
            }
        }
        if let Some(pp) = view.p_plus(k) {
            let lim = (one + alpha) * z;
            if pp > lim + tol && pp > z + tol {
                let cutoff = if alpha > T::zero() && lim > z + tol && lim < pp {
                    lim
                } else {
                    midpoint(z, pp)
                };
                consider(OrderCandidate {
                    k,
                    direction: OrderDirection::TooLow,
                    cutoff,
                    violation: pp - z,
                });
            }
        }
    }
    best
}

pub fn make_order_children<T: Scalar>(c: &OrderCandidate<T>, integer: bool) -> (FairCut<T>, FairCut<T>) {
    let k = c.k;
    let (le, ge) = if integer {
        let z = c.cutoff.floor();
        (z, z + T::one())
    } else {
        (c.cutoff, c.cutoff)
    };
    (
        FairCut::Order {
            k,
            z: le,
            side: CutSide::Le,
        },
        FairCut::Order {
            k,
            z: ge,
            side: CutSide::Ge,
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1_view() -> RangeView<f64> {
        RangeView::new([(1.0, 0.5), (2.0, 1.0), (3.0, 0.5)], 2.0, 2.0)
    }

    #[test]
    fn example1_point_violates_max_side() {
        let v = example1_view();
        let c = detect_range_violation(&v, 0.0).unwrap();
        assert_eq!(c.side, RangeSide::Max);
        assert!(c.cutoff > 2.0 && c.cutoff < 3.0);
        let (l, r) = make_range_children(&c, true);
        assert_eq!(l, FairCut::EtaUpper(2.0));
        assert_eq!(r, FairCut::EtaLower(3.0));
    }

    #[test]
    fn min_side_children_are_symmetric() {
        let c = RangeCandidate {
            side: RangeSide::Min,
            cutoff: 1.5,
            violation: 1.0,
        };
        assert_eq!(
            make_range_children(&c, false),
            (FairCut::GammaLower(1.5), FairCut::GammaUpper(1.5))
        );
        assert_eq!(
            make_range_children(&c, true),
            (FairCut::GammaLower(2.0), FairCut::GammaUpper(1.0))
        );
    }

    #[test]
    fn respecting_point_has_no_candidate() {
        let v = RangeView::new([(1.0, 1.0), (2.0, 1.0)], 2.0, 1.0);
        assert!(v.is_range_respecting(1e-6));
        assert!(detect_range_violation(&v, 0.0).is_none());
        let empty = RangeView::<f64>::new([], 0.0, 0.0);
        assert!(detect_range_violation(&empty, 0.0).is_none());
    }

    #[test]
    fn alpha_relaxation_boundary() {
        let v = RangeView::new([(102.0, 1.0), (100.0, 1.0)], 100.0, 100.0);
        assert!(detect_range_violation(&v, 0.025).is_none());
        assert!(detect_range_violation(&v, 0.0).is_some());
    }

    #[test]
    fn nested_windows_intersect() {
        let outer = FairCut::EtaUpper(5.0).window(0);
        let inner = FairCut::EtaUpper(3.0).window(0);
        let w = outer.intersect(&inner);
        assert_eq!((w.lo, w.hi), (0.0, 3.0));
    }

    #[test]
    fn order_example_k2() {
        // Payoffs 5 and 7, both spread evenly over the two positions.
        let view = OrderView::new(
            [(0, 5.0, 0.5), (0, 7.0, 0.5), (1, 5.0, 0.5), (1, 7.0, 0.5)],
            vec![6.0, 6.0],
        );
        assert_eq!(view.p_minus(0), Some(5.0));
        assert_eq!(view.p_plus(1), Some(7.0));
        let c = detect_order_violation(&view, 0.0).unwrap();
        assert_eq!(c.k, 0);
        assert_eq!(c.direction, OrderDirection::TooHigh);
        assert_eq!(c.cutoff, 5.5);
        let (l, r) = make_order_children(&c, false);
        // Left forbids p > 5.5 at every position, right forbids p < 5.5 at position 0 only.
        assert_eq!(l.window(0).hi, 5.5);
        assert_eq!(l.window(1).hi, 5.5);
        assert_eq!(r.window(0).lo, 5.5);
        assert_eq!(r.window(1).lo, 0.0);
    }

    #[test]
    fn order_integral_point_respects() {
        let view = OrderView::new([(0, 7.0, 1.0), (1, 5.0, 1.0)], vec![7.0, 5.0]);
        assert!(view.is_order_respecting(1e-6));
        assert!(detect_order_violation(&view, 0.0).is_none());
    }

    #[test]
    fn last_position_too_low_forbids_everywhere() {
        let c = OrderCandidate {
            k: 2,
            direction: OrderDirection::TooLow,
            cutoff: 4.5,
            violation: 1.0,
        };
        let (_, r) = make_order_children(&c, false);
        for pos in 0..3 {
            assert_eq!(r.window(pos).lo, 4.5);
        }
    }

    #[test]
    fn generic_over_f32() {
        let v = RangeView::<f32>::new([(1.0, 0.5), (3.0, 0.5)], 2.0, 2.0);
        assert!(detect_range_violation(&v, 0.0).is_some());
    }
}
