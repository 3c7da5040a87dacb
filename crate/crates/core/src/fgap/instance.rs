use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GapError {
    #[error("expected {expected} numbers, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("invalid token {0:?}")]
    Token(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Generalized assignment instance; `profit[i][j]`, `weight[i][j]` for agent `i`, job `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GapInstance {
    pub name: String,
    pub profit: Vec<Vec<i64>>,
    pub weight: Vec<Vec<i64>>,
    pub capacity: Vec<i64>,
}

impl GapInstance {
    pub fn new(name: &str, profit: Vec<Vec<i64>>, weight: Vec<Vec<i64>>, capacity: Vec<i64>) -> Result<Self, GapError> {
        let n = capacity.len();
        if n == 0 {
            return Err(GapError::Invalid("no agents".into()));
        }
        if profit.len() != n || weight.len() != n {
            return Err(GapError::Invalid("matrix row count differs from agent count".into()));
        }
        let m = profit[0].len();
        if profit.iter().chain(&weight).any(|r| r.len() != m) {
            return Err(GapError::Invalid("ragged matrix".into()));
        }
        if weight.iter().flatten().any(|&w| w < 0) || capacity.iter().any(|&c| c < 0) {
            return Err(GapError::Invalid("negative weight or capacity".into()));
        }
        Ok(GapInstance {
            name: name.to_string(),
            profit,
            weight,
            capacity,
        })
    }

    pub fn agents(&self) -> usize {
        self.capacity.len()
    }

    pub fn jobs(&self) -> usize {
        self.profit[0].len()
    }

    pub fn load(&self, agent: usize, jobs: &[usize]) -> i64 {
        jobs.iter().map(|&j| self.weight[agent][j]).sum()
    }

    pub fn profit_of(&self, agent: usize, jobs: &[usize]) -> i64 {
        jobs.iter().map(|&j| self.profit[agent][j]).sum()
    }

    /// Parses `n m`, the profit matrix, the weight matrix and the capacities.
    pub fn parse_orlib(name: &str, text: &str) -> Result<Self, GapError> {
        let nums = numbers(text)?;
        let (inst, used) = Self::from_numbers(name, &nums)?;
        if used != nums.len() {
            return Err(GapError::Invalid(format!("{} trailing numbers", nums.len() - used)));
        }
        Ok(inst)
    }

    /// Parses a file holding a leading instance count followed by that many instances.
    pub fn parse_orlib_collection(name: &str, text: &str) -> Result<Vec<Self>, GapError> {
        let nums = numbers(text)?;
        let count = *nums.first().ok_or(GapError::Truncated { expected: 1, found: 0 })? as usize;
        let mut pos = 1;
        let mut out = Vec::with_capacity(count);
        for t in 0..count {
            let (inst, used) = Self::from_numbers(&format!("{name}-{}", t + 1), &nums[pos..])?;
            pos += used;
            out.push(inst);
        }
        Ok(out)
    }

    fn from_numbers(name: &str, nums: &[i64]) -> Result<(Self, usize), GapError> {
        if nums.len() < 2 {
            return Err(GapError::Truncated {
                expected: 2,
                found: nums.len(),
            });
        }
        let (n, m) = (nums[0] as usize, nums[1] as usize);
        let need = 2 + 2 * n * m + n;
        if nums.len() < need {
            return Err(GapError::Truncated {
                expected: need,
                found: nums.len(),
            });
        }
        let mat = |off: usize| -> Vec<Vec<i64>> {
            (0..n).map(|i| nums[off + i * m..off + (i + 1) * m].to_vec()).collect()
        };
        let profit = mat(2);
        let weight = mat(2 + n * m);
        let capacity = nums[2 + 2 * n * m..need].to_vec();
        Ok((Self::new(name, profit, weight, capacity)?, need))
    }

    pub fn to_orlib(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} {}", self.agents(), self.jobs());
        for m in [&self.profit, &self.weight] {
            for row in m {
                let r: Vec<String> = row.iter().map(|x| x.to_string()).collect();
                let _ = writeln!(s, "{}", r.join(" "));
            }
        }
        let c: Vec<String> = self.capacity.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{}", c.join(" "));
        s
    }

    /// Uniform profits and weights in `[5, 25]`, capacities `floor(0.8 * sum_j w_ij / n)`.
    pub fn generate(agents: usize, jobs: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let profit: Vec<Vec<i64>> = (0..agents)
            .map(|_| (0..jobs).map(|_| rng.gen_range(5..=25)).collect())
            .collect();
        let weight: Vec<Vec<i64>> = (0..agents)
            .map(|_| (0..jobs).map(|_| rng.gen_range(5..=25)).collect())
            .collect();
        let capacity = weight
            .iter()
            .map(|row| (8 * row.iter().sum::<i64>()) / (10 * agents as i64))
            .collect();
        GapInstance {
            name: format!("gap-{agents}x{jobs}-s{seed}"),
            profit,
            weight,
            capacity,
        }
    }
}

fn numbers(text: &str) -> Result<Vec<i64>, GapError> {
    text.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| GapError::Token(t.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orlib_round_trip() {
        let text = "2 3\n1 2 3\n4 5 6\n\n7 8 9 10 11 12\n 20 30\n";
        let g = GapInstance::parse_orlib("t", text).unwrap();
        assert_eq!(g.agents(), 2);
        assert_eq!(g.jobs(), 3);
        assert_eq!(g.weight[1], vec![10, 11, 12]);
        assert_eq!(g.capacity, vec![20, 30]);
        let back = GapInstance::parse_orlib("t", &g.to_orlib()).unwrap();
        assert_eq!(back, g);
        assert!(GapInstance::parse_orlib("t", "2 3 1 2").is_err());
        assert!(GapInstance::parse_orlib("t", "1 1 x 1 1").is_err());
    }

    #[test]
    fn collection() {
        let text = "2\n1 1 5 3 4\n1 2 1 1 1 1 2\n";
        let v = GapInstance::parse_orlib_collection("c", text).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[1].capacity, vec![2]);
    }

    #[test]
    fn generator_is_seeded() {
        let a = GapInstance::generate(3, 10, 5);
        assert_eq!(a, GapInstance::generate(3, 10, 5));
        assert_ne!(a, GapInstance::generate(3, 10, 6));
        assert!(a.profit.iter().flatten().all(|&p| (5..=25).contains(&p)));
        let c0: i64 = a.weight[0].iter().sum();
        assert_eq!(a.capacity[0], 8 * c0 / 30);
    }
}
