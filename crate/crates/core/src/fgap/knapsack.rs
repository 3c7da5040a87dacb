//! Exact-weight 0/1 knapsack table.

/// Best value of a subset of items `0..k` with total weight exactly `c`.
/// Ties prefer fewer items.
#[derive(Debug, Clone)]
pub struct DpTable {
    cap: usize,
    /// Row-major `(items + 1) x (cap + 1)`; `None` marks unreachable weights.
    cells: Vec<Option<(f64, usize)>>,
    weights: Vec<usize>,
}

fn better(a: (f64, usize), b: (f64, usize)) -> bool {
    a.0 > b.0 || (a.0 == b.0 && a.1 < b.1)
}

impl DpTable {
    pub fn build(values: &[f64], weights: &[usize], cap: usize) -> Self {
        assert_eq!(values.len(), weights.len());
        let k = values.len();
        let w = cap + 1;
        let mut cells = vec![None; (k + 1) * w];
        cells[0] = Some((0.0, 0));
        for it in 1..=k {
            let (vi, wi) = (values[it - 1], weights[it - 1]);
            for c in 0..=cap {
                let mut best = cells[(it - 1) * w + c];
                if c >= wi {
                    if let Some((v, n)) = cells[(it - 1) * w + c - wi] {
                        let cand = (v + vi, n + 1);
                        if best.map_or(true, |b| better(cand, b)) {
                            best = Some(cand);
                        }
                    }
                }
                cells[it * w + c] = best;
            }
        }
        DpTable {
            cap,
            cells,
            weights: weights.to_vec(),
        }
    }

    pub fn items(&self) -> usize {
        self.weights.len()
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }

    pub fn value(&self, k: usize, c: usize) -> Option<f64> {
        self.cells.get(k * (self.cap + 1) + c).copied().flatten().map(|x| x.0)
    }

    fn cell(&self, k: usize, c: usize) -> Option<(f64, usize)> {
        self.cells[k * (self.cap + 1) + c]
    }

    /// Best reachable weight in `[lo, hi]` using all items, with its value.
    pub fn best_in(&self, lo: usize, hi: usize) -> Option<(usize, f64)> {
        let k = self.items();
        let mut best: Option<(usize, (f64, usize))> = None;
        for c in lo..=hi.min(self.cap) {
            if let Some(v) = self.cell(k, c) {
                if best.map_or(true, |(_, b)| better(v, b)) {
                    best = Some((c, v));
                }
            }
        }
        best.map(|(c, v)| (c, v.0))
    }

    /// Item indices of the stored optimum at weight `c`.
    pub fn reconstruct(&self, c: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut c = c;
        for it in (1..=self.items()).rev() {
            let here = self.cell(it, c);
            if here != self.cell(it - 1, c) {
                out.push(it - 1);
                c -= self.weights[it - 1];
            }
        }
        out.reverse();
        out
    }
}

/// Best subset of `values`/`weights` whose total weight lies in `[lo, hi]`.
pub fn best_subset(values: &[f64], weights: &[usize], lo: usize, hi: usize) -> Option<(Vec<usize>, f64)> {
    if lo > hi {
        return None;
    }
    let t = DpTable::build(values, weights, hi);
    let (c, v) = t.best_in(lo, hi)?;
    Some((t.reconstruct(c), v))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_examples() {
        let (v, w) = ([3.0, 4.0], [2, 3]);
        assert_eq!(best_subset(&v, &w, 0, 5), Some((vec![0, 1], 7.0)));
        assert_eq!(best_subset(&v, &w, 4, 4), None);
        assert_eq!(best_subset(&v, &w, 0, 2), Some((vec![0], 3.0)));
        let t = DpTable::build(&v, &w, 5);
        assert_eq!(t.value(0, 0), Some(0.0));
        assert_eq!(t.value(0, 1), None);
        let reach: Vec<usize> = (0..=5).filter(|&c| t.value(2, c).is_some()).collect();
        assert_eq!(reach, vec![0, 2, 3, 5]);
    }

    #[test]
    fn ties_prefer_fewer_items() {
        assert_eq!(best_subset(&[0.0, 2.0], &[1, 1], 0, 2), Some((vec![1], 2.0)));
        assert_eq!(best_subset(&[-1.0], &[1], 0, 1), Some((vec![], 0.0)));
    }
}
