use std::fmt::Write as _;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing section or keyword {0}")]
    Missing(&'static str),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Capacitated VRP instance. Vertex 0 is the depot, `1..=n` are customers.
#[derive(Debug, Clone, PartialEq)]
pub struct CvrpInstance {
    pub name: String,
    pub coords: Vec<(f64, f64)>,
    pub demand: Vec<u32>,
    pub capacity: u32,
    pub vehicles: usize,
    pub cost: Vec<Vec<i64>>,
    pub dist: Vec<Vec<i64>>,
}

/// Euclidean distance rounded to the nearest integer.
pub fn nint_dist(a: (f64, f64), b: (f64, f64)) -> i64 {
    ((a.0 - b.0).hypot(a.1 - b.1) + 0.5).floor() as i64
}

impl CvrpInstance {
    /// Cost and distance both set to rounded Euclidean distances.
    pub fn from_coords(
        name: &str,
        coords: Vec<(f64, f64)>,
        demand: Vec<u32>,
        capacity: u32,
        vehicles: usize,
    ) -> Result<Self, InstanceError> {
        let n = coords.len();
        let dist: Vec<Vec<i64>> = (0..n)
            .map(|i| (0..n).map(|j| nint_dist(coords[i], coords[j])).collect())
            .collect();
        Self::from_matrices(name, coords, demand, capacity, vehicles, dist.clone(), dist)
    }

    pub fn from_matrices(
        name: &str,
        coords: Vec<(f64, f64)>,
        demand: Vec<u32>,
        capacity: u32,
        vehicles: usize,
        cost: Vec<Vec<i64>>,
        dist: Vec<Vec<i64>>,
    ) -> Result<Self, InstanceError> {
        let inst = CvrpInstance {
            name: name.to_string(),
            coords,
            demand,
            capacity,
            vehicles,
            cost,
            dist,
        };
        inst.validate()?;
        Ok(inst)
    }

    fn validate(&self) -> Result<(), InstanceError> {
        let v = self.demand.len();
        let bad = |m: String| Err(InstanceError::Invalid(m));
        if v < 2 {
            return bad("need a depot and at least one customer".into());
        }
        if v - 1 > crate::ElemSet::CAPACITY {
            return bad(format!("{} customers exceed the supported maximum", v - 1));
        }
        if self.cost.len() != v || self.dist.len() != v {
            return bad("matrix size does not match the vertex count".into());
        }
        if self.demand[0] != 0 {
            return bad("depot demand must be zero".into());
        }
        if self.demand[1..].iter().any(|&d| d == 0) {
            return bad("customer demands must be positive".into());
        }
        if self.vehicles == 0 {
            return bad("need at least one vehicle".into());
        }
        for i in 0..v {
            if self.cost[i].len() != v || self.dist[i].len() != v {
                return bad("matrix rows must be square".into());
            }
            for j in 0..v {
                if self.dist[i][j] < 0 || self.cost[i][j] < 0 {
                    return bad("negative arc data".into());
                }
                if self.dist[i][j] != self.dist[j][i] {
                    return bad("distances must be symmetric".into());
                }
            }
        }
        Ok(())
    }

    pub fn num_customers(&self) -> usize {
        self.demand.len() - 1
    }

    pub fn num_vertices(&self) -> usize {
        self.demand.len()
    }

    pub fn total_demand(&self) -> u64 {
        self.demand.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn cost_equals_distance(&self) -> bool {
        self.cost == self.dist
    }

    fn along(m: &[Vec<i64>], route: &[usize]) -> i64 {
        let mut prev = 0;
        let mut s = 0;
        for &v in route {
            s += m[prev][v];
            prev = v;
        }
        s + m[prev][0]
    }

    pub fn route_cost(&self, route: &[usize]) -> i64 {
        Self::along(&self.cost, route)
    }

    pub fn route_distance(&self, route: &[usize]) -> i64 {
        Self::along(&self.dist, route)
    }

    pub fn route_load(&self, route: &[usize]) -> u64 {
        route.iter().map(|&v| u64::from(self.demand[v])).sum()
    }

    /// Smallest capacity at least `ceil(total / K)` whose bin packing into `K` vehicles is feasible.
    pub fn min_feasible_capacity(demand: &[u32], vehicles: usize) -> u32 {
        let total: u64 = demand.iter().map(|&d| u64::from(d)).sum();
        let max_d = demand.iter().copied().max().unwrap_or(0);
        let mut q = (total.div_ceil(vehicles as u64) as u32).max(max_d);
        let mut items: Vec<u32> = demand.iter().copied().filter(|&d| d > 0).collect();
        items.sort_unstable_by(|a, b| b.cmp(a));
        while !packs(&items, vehicles, q) {
            q += 1;
        }
        q
    }

    /// Seeded random instance: integer coordinates in `[0, 100]^2`, demands in
    /// `[1, 10]`, capacity from [`Self::min_feasible_capacity`].
    pub fn generate(customers: usize, vehicles: usize, seed: u64) -> Self {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let coords: Vec<(f64, f64)> = (0..=customers)
            .map(|_| (f64::from(rng.gen_range(0..=100u32)), f64::from(rng.gen_range(0..=100u32))))
            .collect();
        let mut demand: Vec<u32> = (0..=customers).map(|_| rng.gen_range(1..=10)).collect();
        demand[0] = 0;
        let q = Self::min_feasible_capacity(&demand, vehicles);
        Self::from_coords(&format!("rand-n{customers}-k{vehicles}-s{seed}"), coords, demand, q, vehicles)
            .expect("generated instance is valid")
    }

    pub fn parse_tsplib(text: &str) -> Result<Self, InstanceError> {
        let mut name = String::from("unnamed");
        let mut dim: Option<usize> = None;
        let mut capacity: Option<u32> = None;
        let mut vehicles: Option<usize> = None;
        let mut coords: Vec<Option<(f64, f64)>> = Vec::new();
        let mut demand: Vec<Option<u32>> = Vec::new();
        let mut depot: Option<usize> = None;
        #[derive(PartialEq)]
        enum Sec {
            Header,
            Coords,
            Demand,
            Depot,
        }
        let mut sec = Sec::Header;
        let perr = |line: usize, msg: &str| InstanceError::Parse {
            line,
            msg: msg.to_string(),
        };
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            let ln = ln + 1;
            if line.is_empty() {
                continue;
            }
            if line == "EOF" {
                break;
            }
            let upper = line.to_ascii_uppercase();
            if upper.starts_with("NODE_COORD_SECTION") {
                sec = Sec::Coords;
                continue;
            }
            if upper.starts_with("DEMAND_SECTION") {
                sec = Sec::Demand;
                continue;
            }
            if upper.starts_with("DEPOT_SECTION") {
                sec = Sec::Depot;
                continue;
            }
            if let Some((key, val)) = line.split_once(':') {
                let key = key.trim().to_ascii_uppercase();
                let val = val.trim();
                sec = Sec::Header;
                match key.as_str() {
                    "NAME" => name = val.to_string(),
                    "DIMENSION" => {
                        let d: usize = val.parse().map_err(|_| perr(ln, "bad DIMENSION"))?;
                        dim = Some(d);
                        coords = vec![None; d];
                        demand = vec![None; d];
                    }
                    "CAPACITY" => capacity = Some(val.parse().map_err(|_| perr(ln, "bad CAPACITY"))?),
                    "VEHICLES" => vehicles = Some(val.parse().map_err(|_| perr(ln, "bad VEHICLES"))?),
                    "EDGE_WEIGHT_TYPE" => {
                        if val != "EUC_2D" {
                            return Err(perr(ln, "only EUC_2D is supported"));
                        }
                    }
                    _ => {}
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let d = dim.ok_or(InstanceError::Missing("DIMENSION"))?;
            match sec {
                Sec::Coords => {
                    if toks.len() < 3 {
                        return Err(perr(ln, "coordinate line needs id x y"));
                    }
                    let id: usize = toks[0].parse().map_err(|_| perr(ln, "bad node id"))?;
                    if id == 0 || id > d {
                        return Err(perr(ln, "node id out of range"));
                    }
                    let x: f64 = toks[1].parse().map_err(|_| perr(ln, "bad x"))?;
                    let y: f64 = toks[2].parse().map_err(|_| perr(ln, "bad y"))?;
                    coords[id - 1] = Some((x, y));
                }
                Sec::Demand => {
                    if toks.len() < 2 {
                        return Err(perr(ln, "demand line needs id q"));
                    }
                    let id: usize = toks[0].parse().map_err(|_| perr(ln, "bad node id"))?;
                    if id == 0 || id > d {
                        return Err(perr(ln, "node id out of range"));
                    }
                    demand[id - 1] = Some(toks[1].parse().map_err(|_| perr(ln, "bad demand"))?);
                }
                Sec::Depot => {
                    let id: i64 = toks[0].parse().map_err(|_| perr(ln, "bad depot id"))?;
                    if id >= 1 && depot.is_none() {
                        depot = Some(id as usize - 1);
                    }
                }
                Sec::Header => return Err(perr(ln, "unexpected line")),
            }
        }
        let d = dim.ok_or(InstanceError::Missing("DIMENSION"))?;
        let capacity = capacity.ok_or(InstanceError::Missing("CAPACITY"))?;
        let depot = depot.unwrap_or(0);
        if depot >= d {
            return Err(InstanceError::Invalid("depot id out of range".into()));
        }
        let coords: Vec<(f64, f64)> = coords
            .into_iter()
            .collect::<Option<_>>()
            .ok_or(InstanceError::Missing("NODE_COORD_SECTION"))?;
        let demand: Vec<u32> = demand
            .into_iter()
            .collect::<Option<_>>()
            .ok_or(InstanceError::Missing("DEMAND_SECTION"))?;
        let mut order: Vec<usize> = vec![depot];
        order.extend((0..d).filter(|&i| i != depot));
        let coords: Vec<(f64, f64)> = order.iter().map(|&i| coords[i]).collect();
        let mut demand: Vec<u32> = order.iter().map(|&i| demand[i]).collect();
        demand[0] = 0;
        let total: u64 = demand.iter().map(|&q| u64::from(q)).sum();
        let vehicles = vehicles.unwrap_or_else(|| total.div_ceil(u64::from(capacity.max(1))) as usize);
        Self::from_coords(&name, coords, demand, capacity, vehicles)
    }

    pub fn to_tsplib(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "NAME : {}", self.name);
        let _ = writeln!(s, "TYPE : CVRP");
        let _ = writeln!(s, "DIMENSION : {}", self.num_vertices());
        let _ = writeln!(s, "EDGE_WEIGHT_TYPE : EUC_2D");
        let _ = writeln!(s, "CAPACITY : {}", self.capacity);
        let _ = writeln!(s, "VEHICLES : {}", self.vehicles);
        let _ = writeln!(s, "NODE_COORD_SECTION");
        for (i, (x, y)) in self.coords.iter().enumerate() {
            let _ = writeln!(s, "{} {} {}", i + 1, x, y);
        }
        let _ = writeln!(s, "DEMAND_SECTION");
        for (i, q) in self.demand.iter().enumerate() {
            let _ = writeln!(s, "{} {}", i + 1, q);
        }
        let _ = writeln!(s, "DEPOT_SECTION\n1\n-1\nEOF");
        s
    }

    /// One route per line: `0 c1 c2 ... 0 distance`.
    pub fn solution_text(&self, routes: &[Vec<usize>]) -> String {
        let mut s = String::new();
        for (k, r) in routes.iter().enumerate() {
            let seq: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                s,
                "Route #{}: 0 {} 0 distance {}",
                k + 1,
                seq.join(" "),
                self.route_distance(r)
            );
        }
        s
    }

    /// Checks partition, capacity and (optionally) the budget on a set of routes.
    pub fn check_solution(&self, routes: &[Vec<usize>], budget: Option<i64>) -> Result<(), String> {
        let n = self.num_customers();
        let mut seen = vec![0usize; n + 1];
        for r in routes {
            if r.is_empty() {
                return Err("empty route".into());
            }
            if self.route_load(r) > u64::from(self.capacity) {
                return Err(format!("route {r:?} exceeds capacity"));
            }
            for &v in r {
                if v == 0 || v > n {
                    return Err(format!("invalid vertex {v}"));
                }
                seen[v] += 1;
            }
        }
        if let Some(i) = (1..=n).find(|&i| seen[i] != 1) {
            return Err(format!("customer {i} visited {} times", seen[i]));
        }
        if let Some(b) = budget {
            let c: i64 = routes.iter().map(|r| self.route_cost(r)).sum();
            if c > b {
                return Err(format!("cost {c} exceeds budget {b}"));
            }
        }
        Ok(())
    }
}

fn packs(items: &[u32], bins: usize, cap: u32) -> bool {
    fn go(items: &[u32], i: usize, loads: &mut [u32], cap: u32) -> bool {
        if i == items.len() {
            return true;
        }
        for b in 0..loads.len() {
            if loads[b] + items[i] <= cap {
                // Bins with identical load are interchangeable.
                if loads[..b].contains(&loads[b]) {
                    continue;
                }
                loads[b] += items[i];
                if go(items, i + 1, loads, cap) {
                    return true;
                }
                loads[b] -= items[i];
            }
        }
        false
    }
    let mut loads = vec![0u32; bins];
    go(items, 0, &mut loads, cap)
}
