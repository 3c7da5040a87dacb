//! Exact per-route reordering of a solution into shortest tours.

use thiserror::Error;

use super::instance::CvrpInstance;

/// Largest route the exact reordering accepts.
pub const TSP_EXACT_CAP: usize = 14;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TspError {
    #[error("route with {0} customers exceeds the exact size cap of {TSP_EXACT_CAP}")]
    TooLarge(usize),
}

/// Shortest closed tour from the depot through `customers`, as a customer
/// sequence and its distance. Ties resolve to the lexicographically smallest sequence.
pub fn optimal_tour(inst: &CvrpInstance, customers: &[usize]) -> Result<(Vec<usize>, i64), TspError> {
    let k = customers.len();
    if k > TSP_EXACT_CAP {
        return Err(TspError::TooLarge(k));
    }
    if k <= 1 {
        let r = customers.to_vec();
        let d = inst.route_distance(&r);
        return Ok((r, d));
    }
    let mut nodes = customers.to_vec();
    nodes.sort_unstable();
    let full = (1usize << k) - 1;
    // dp over (set, last) of the shortest path from the depot.
    let mut dp = vec![i64::MAX; (full + 1) * k];
    for i in 0..k {
        dp[(1 << i) * k + i] = inst.dist[0][nodes[i]];
    }
    for mask in 1..=full {
        for last in 0..k {
            let cur = dp[mask * k + last];
            if cur == i64::MAX || mask & (1 << last) == 0 {
                continue;
            }
            for nxt in 0..k {
                if mask & (1 << nxt) == 0 {
                    let m2 = mask | (1 << nxt);
                    let c = cur + inst.dist[nodes[last]][nodes[nxt]];
                    if c < dp[m2 * k + nxt] {
                        dp[m2 * k + nxt] = c;
                    }
                }
            }
        }
    }
    let best = (0..k)
        .map(|l| dp[full * k + l] + inst.dist[nodes[l]][0])
        .min()
        .expect("k >= 2");
    // back[(set, first)]: shortest path from `first` through `set` to the depot.
    // Walking it greedily from the front yields the smallest optimal sequence.
    let mut back = vec![i64::MAX; (full + 1) * k];
    for i in 0..k {
        back[(1 << i) * k + i] = inst.dist[nodes[i]][0];
    }
    for mask in 1..=full {
        for first in 0..k {
            let cur = back[mask * k + first];
            if cur == i64::MAX || mask & (1 << first) == 0 {
                continue;
            }
            for prv in 0..k {
                if mask & (1 << prv) == 0 {
                    let m2 = mask | (1 << prv);
                    let c = cur + inst.dist[nodes[prv]][nodes[first]];
                    if c < back[m2 * k + prv] {
                        back[m2 * k + prv] = c;
                    }
                }
            }
        }
    }
    let mut seq = Vec::with_capacity(k);
    let mut remaining = full;
    let mut prev = 0usize;
    let mut spent = 0i64;
    while remaining != 0 {
        let pick = (0..k)
            .filter(|&i| remaining & (1 << i) != 0)
            .find(|&i| spent + inst.dist[prev][nodes[i]] + back[remaining * k + i] == best)
            .expect("an optimal continuation exists");
        spent += inst.dist[prev][nodes[pick]];
        prev = nodes[pick];
        seq.push(nodes[pick]);
        remaining &= !(1 << pick);
    }
    Ok((seq, best))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PostProcessed {
    pub routes: Vec<Vec<usize>>,
    pub distance_before: Vec<i64>,
    pub distance_after: Vec<i64>,
    /// Route was already a shortest tour.
    pub tsp_optimal: Vec<bool>,
    pub range_before: i64,
    pub range_after: i64,
}

impl PostProcessed {
    pub fn delta_r(&self) -> f64 {
        delta_r(self.range_before, self.range_after)
    }
}

/// Relative underestimation of the range by general routes, in percent.
pub fn delta_r(range_general: i64, range_post: i64) -> f64 {
    if range_post == 0 {
        0.0
    } else {
        100.0 * (range_post - range_general) as f64 / range_post as f64
    }
}

fn range(d: &[i64]) -> i64 {
    d.iter().max().copied().unwrap_or(0) - d.iter().min().copied().unwrap_or(0)
}

/// Replaces every route by a shortest tour over its customers. Routes that
/// are already shortest tours are kept as they are.
pub fn tsp_postprocess(inst: &CvrpInstance, routes: &[Vec<usize>]) -> Result<PostProcessed, TspError> {
    let mut out = Vec::with_capacity(routes.len());
    let mut before = Vec::with_capacity(routes.len());
    let mut after = Vec::with_capacity(routes.len());
    let mut opt = Vec::with_capacity(routes.len());
    for r in routes {
        let d0 = inst.route_distance(r);
        let (tour, d1) = optimal_tour(inst, r)?;
        before.push(d0);
        if d1 < d0 {
            out.push(tour);
            after.push(d1);
            opt.push(false);
        } else {
            out.push(r.clone());
            after.push(d0);
            opt.push(true);
        }
    }
    Ok(PostProcessed {
        range_before: range(&before),
        range_after: range(&after),
        routes: out,
        distance_before: before,
        distance_after: after,
        tsp_optimal: opt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> CvrpInstance {
        let d = vec![vec![0, 1, 2], vec![1, 0, 1], vec![2, 1, 0]];
        CvrpInstance::from_matrices("toy", vec![(0.0, 0.0); 3], vec![0, 1, 1], 2, 2, d.clone(), d).unwrap()
    }

    #[test]
    fn toy_reordering_keeps_ties() {
        let inst = toy();
        let p = tsp_postprocess(&inst, &[vec![2, 1]]).unwrap();
        assert_eq!(p.distance_before, vec![4]);
        assert_eq!(p.distance_after, vec![4]);
        assert_eq!(p.routes, vec![vec![2, 1]]);
        let (t, d) = optimal_tour(&inst, &[2, 1]).unwrap();
        assert_eq!((t, d), (vec![1, 2], 4));
        let p = tsp_postprocess(&inst, &[vec![1]]).unwrap();
        assert_eq!(p.routes, vec![vec![1]]);
        assert_eq!(p.delta_r(), 0.0);
    }

    #[test]
    fn delta_r_convention() {
        assert_eq!(delta_r(3, 4), 25.0);
        assert_eq!(delta_r(0, 0), 0.0);
    }

    #[test]
    fn size_cap() {
        let n = TSP_EXACT_CAP + 1;
        let coords: Vec<(f64, f64)> = (0..=n).map(|i| (i as f64, (i * i % 7) as f64)).collect();
        let mut dem = vec![1; n + 1];
        dem[0] = 0;
        let inst = CvrpInstance::from_coords("big", coords, dem, n as u32, 1).unwrap();
        let r: Vec<usize> = (1..=n).collect();
        assert_eq!(optimal_tour(&inst, &r).unwrap_err(), TspError::TooLarge(n));
    }
}
