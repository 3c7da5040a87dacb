//! Order-weight vectors and their evaluation on integral solutions.
//!
//! Generic over any ordered numeric type, so `i64` gives exact results.

use num_traits::{Num, NumCast};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WeightError {
    #[error("order weights need K >= 2, got {0}")]
    TooFewPositions(usize),
    #[error("expected {expected} payoffs, got {got}")]
    WrongCount { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderWeights<T> {
    pub v: Vec<T>,
}

impl<T: Num + NumCast + Copy + PartialOrd> OrderWeights<T> {
    pub fn new(v: Vec<T>) -> Result<Self, WeightError> {
        if v.len() < 2 {
            return Err(WeightError::TooFewPositions(v.len()));
        }
        Ok(OrderWeights { v })
    }

    pub fn k(&self) -> usize {
        self.v.len()
    }

    /// `(1, 0, ..., 0, -1)`.
    pub fn range(k: usize) -> Result<Self, WeightError> {
        if k < 2 {
            return Err(WeightError::TooFewPositions(k));
        }
        let mut v = vec![T::zero(); k];
        v[0] = T::one();
        v[k - 1] = T::zero() - T::one();
        Ok(OrderWeights { v })
    }

    pub fn is_range(&self) -> bool {
        let k = self.v.len();
        self.v[0] == T::one()
            && self.v[k - 1] == T::zero() - T::one()
            && self.v[1..k - 1].iter().all(|&x| x == T::zero())
    }

    /// Smallest value `v^T z` can take over non-increasing `z` in `[0, cap]^K`.
    pub fn trivial_lower_bound(&self, cap: T) -> T {
        // v^T z = sum_k (z_k - z_{k+1}) * prefix_k, each difference in [0, cap].
        let mut prefix = T::zero();
        let mut lb = T::zero();
        for &w in &self.v {
            prefix = prefix + w;
            if prefix < T::zero() {
                lb = lb + prefix * cap;
            }
        }
        lb
    }
}

pub fn gini_weights<T: Num + NumCast + Copy + PartialOrd>(k: usize) -> Result<OrderWeights<T>, WeightError> {
    if k < 2 {
        return Err(WeightError::TooFewPositions(k));
    }
    let v = (1..=k)
        .map(|i| {
            let w = k as i64 - 2 * i as i64 + 1;
            T::from(w).expect("weight fits the numeric type")
        })
        .collect();
    Ok(OrderWeights { v })
}

/// Sorts payoffs non-increasingly (stable in input order) and returns `v^T z`.
pub fn evaluate<T: Num + NumCast + Copy + PartialOrd>(
    weights: &OrderWeights<T>,
    payoffs: &[T],
) -> Result<T, WeightError> {
    if payoffs.len() != weights.k() {
        return Err(WeightError::WrongCount {
            expected: weights.k(),
            got: payoffs.len(),
        });
    }
    let z = sorted_desc(payoffs);
    Ok(weights
        .v
        .iter()
        .zip(&z)
        .fold(T::zero(), |acc, (&w, &p)| acc + w * p))
}

pub fn sorted_desc<T: Copy + PartialOrd>(payoffs: &[T]) -> Vec<T> {
    let mut z = payoffs.to_vec();
    z.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    z
}

/// `sum_{i<j} |z_i - z_j|`.
pub fn gini_deviation<T: Num + Copy + PartialOrd>(payoffs: &[T]) -> T {
    let mut s = T::zero();
    for i in 0..payoffs.len() {
        for j in i + 1..payoffs.len() {
            let (a, b) = (payoffs[i], payoffs[j]);
            s = s + if a > b { a - b } else { b - a };
        }
    }
    s
}

pub fn range_of<T: Copy + PartialOrd + std::ops::Sub<Output = T>>(payoffs: &[T]) -> Option<T> {
    let mut it = payoffs.iter().copied();
    let first = it.next()?;
    let (lo, hi) = it.fold((first, first), |(lo, hi), p| {
        (if p < lo { p } else { lo }, if p > hi { p } else { hi })
    });
    Some(hi - lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gini_weight_vectors() {
        assert_eq!(gini_weights::<i64>(5).unwrap().v, vec![4, 2, 0, -2, -4]);
        assert_eq!(gini_weights::<i64>(3).unwrap().v, vec![2, 0, -2]);
        assert_eq!(gini_weights::<i64>(2).unwrap(), OrderWeights::range(2).unwrap());
        assert!(gini_weights::<f64>(1).is_err());
    }

    #[test]
    fn evaluate_examples() {
        let g = gini_weights::<i64>(3).unwrap();
        assert_eq!(evaluate(&g, &[3, 2, 1]).unwrap(), 4);
        assert_eq!(gini_deviation(&[3, 2, 1]), 4);
        assert_eq!(evaluate(&g, &[5, 5, 5]).unwrap(), 0);
        let r = OrderWeights::<i64>::range(2).unwrap();
        assert_eq!(evaluate(&r, &[1, 3]).unwrap(), 2);
        assert!(evaluate(&r, &[1, 2, 3]).is_err());
    }

    #[test]
    fn trivial_bounds() {
        let g = gini_weights::<f64>(4).unwrap();
        assert_eq!(g.trivial_lower_bound(10.0), 0.0);
        let w = OrderWeights::new(vec![-1.0, 1.0]).unwrap();
        assert_eq!(w.trivial_lower_bound(10.0), -10.0);
    }
}
