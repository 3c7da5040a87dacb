//! Experiment harness: run configurations, summary and trajectory CSVs,
//! sub-instance derivation and the TSP post-processing report.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use log::{info, warn};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{BranchingScheme, SolveConfig, SolveStatus, TrajectoryPoint};
use crate::fcvrp::{self, CvrpInstance, FcvrpOptions, Formulation};
use crate::fgap::{self, GapInstance};
use crate::objective::gini_weights;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {msg}")]
    Instance { path: String, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("inconsistent result: {0}")]
    Inconsistent(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Problem {
    Cvrp,
    Gap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FormulationKind {
    Vehicle,
    Customer,
    Order,
}

impl FormulationKind {
    pub fn name(self) -> &'static str {
        match self {
            FormulationKind::Vehicle => "vehicle",
            FormulationKind::Customer => "customer",
            FormulationKind::Order => "order",
        }
    }
}

pub fn scheme_name(s: BranchingScheme) -> &'static str {
    match s {
        BranchingScheme::Classical => "classical",
        BranchingScheme::Range => "range",
        BranchingScheme::Order => "order",
    }
}

/// Where a run's instance comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceSource {
    File(PathBuf),
    RandomCvrp { customers: usize, vehicles: usize, seed: u64 },
    RandomGap { agents: usize, jobs: usize, seed: u64 },
}

impl InstanceSource {
    pub fn label(&self) -> String {
        match self {
            InstanceSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
            InstanceSource::RandomCvrp { customers, vehicles, seed } => format!("rand-n{customers}-k{vehicles}-s{seed}"),
            InstanceSource::RandomGap { agents, jobs, seed } => format!("gap-{agents}x{jobs}-s{seed}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub problem: Problem,
    pub formulation: FormulationKind,
    pub branching: BranchingScheme,
    pub alpha: f64,
    pub budget_pct: u32,
    pub theta: f64,
    pub time_limit: Option<f64>,
    pub seed: u64,
    pub instance: InstanceSource,
    /// Order formulation objective: Gini weights unless set to range weights.
    pub order_range_weights: bool,
    pub labeling: fcvrp::LabelingMode,
    pub cap: usize,
    pub evict_after: usize,
}

impl RunConfig {
    pub fn cvrp(instance: InstanceSource, formulation: FormulationKind, branching: BranchingScheme) -> Self {
        RunConfig {
            problem: Problem::Cvrp,
            formulation,
            branching,
            alpha: 0.025,
            budget_pct: 110,
            theta: 0.01,
            time_limit: None,
            seed: 0,
            instance,
            order_range_weights: false,
            labeling: fcvrp::LabelingMode::Bidirectional,
            cap: 20,
            evict_after: 20,
        }
    }

    pub fn gap(instance: InstanceSource, branching: BranchingScheme) -> Self {
        RunConfig {
            problem: Problem::Gap,
            formulation: FormulationKind::Vehicle,
            branching,
            alpha: 0.0,
            budget_pct: 110,
            theta: 0.01,
            time_limit: None,
            seed: 0,
            instance,
            order_range_weights: false,
            labeling: fcvrp::LabelingMode::Bidirectional,
            cap: 1,
            evict_after: 30,
        }
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: &str| Err(BenchError::Config(m.to_string()));
        if !(0.0..1.0).contains(&self.alpha) {
            return bad("alpha must lie in [0, 1)");
        }
        if self.branching == BranchingScheme::Order && self.formulation != FormulationKind::Order {
            return bad("order branching requires the order formulation");
        }
        if self.formulation == FormulationKind::Order && self.branching == BranchingScheme::Range {
            return bad("the order formulation has no eta/gamma variables; use order or classical branching");
        }
        if self.time_limit.map_or(false, |t| !(t >= 0.0)) {
            return bad("time limit must be non-negative");
        }
        if self.cap == 0 || self.evict_after == 0 {
            return bad("column cap and eviction threshold must be positive");
        }
        match self.problem {
            Problem::Cvrp => {
                if self.budget_pct < 100 {
                    return bad("budget percentage must be at least 100");
                }
                if matches!(self.instance, InstanceSource::RandomGap { .. }) {
                    return bad("a GAP instance cannot be used for a CVRP run");
                }
            }
            Problem::Gap => {
                if self.formulation != FormulationKind::Vehicle {
                    return bad("GAP runs use the agent formulation only");
                }
                if self.branching == BranchingScheme::Order {
                    return bad("order branching is not available for GAP");
                }
                if !(0.0..1.0).contains(&self.theta) {
                    return bad("theta must lie in [0, 1)");
                }
                if matches!(self.instance, InstanceSource::RandomCvrp { .. }) {
                    return bad("a CVRP instance cannot be used for a GAP run");
                }
            }
        }
        Ok(())
    }

    fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            scheme: self.branching,
            alpha: self.alpha,
            time_limit: self.time_limit.map(Duration::from_secs_f64),
            cap: self.cap,
            evict_after: self.evict_after,
            seed: self.seed,
            ..SolveConfig::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub instance: String,
    /// `|C|` for CVRP, `n x m` for GAP.
    pub size: String,
    pub formulation: String,
    pub branching: String,
    pub solved: bool,
    pub time_s: f64,
    pub gap_pct: f64,
    pub nodes: usize,
    pub delta_pct: f64,
    pub lb: f64,
    pub ub: f64,
    /// `optimal`, `time_limit`, `infeasible` or an error message.
    pub status: String,
}

#[derive(Serialize)]
struct CsvSummary<'a> {
    instance: &'a str,
    size: &'a str,
    formulation: &'a str,
    branching: &'a str,
    solved: u8,
    time_s: String,
    gap_pct: String,
    nodes: usize,
    delta_pct: String,
    lb: String,
    ub: String,
    status: &'a str,
}

fn fnum(x: f64, digits: usize) -> String {
    if x.is_finite() {
        format!("{x:.digits$}")
    } else if x > 0.0 {
        "inf".into()
    } else if x < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

pub const SUMMARY_HEADER: &str = "instance,size,formulation,branching,solved,time_s,gap_pct,nodes,delta_pct,lb,ub,status";
pub const TRAJECTORY_HEADER: &str = "time_s,lb,ub";

pub fn write_summary<W: std::io::Write>(w: W, rows: &[SummaryRow]) -> Result<(), BenchError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(CsvSummary {
            instance: &r.instance,
            size: &r.size,
            formulation: &r.formulation,
            branching: &r.branching,
            solved: u8::from(r.solved),
            time_s: fnum(r.time_s, 3),
            gap_pct: fnum(r.gap_pct, 2),
            nodes: r.nodes,
            delta_pct: fnum(r.delta_pct, 2),
            lb: fnum(r.lb, 3),
            ub: fnum(r.ub, 3),
            status: &r.status,
        })?;
    }
    if rows.is_empty() {
        wr.write_record(SUMMARY_HEADER.split(','))?;
    }
    wr.flush()?;
    Ok(())
}

/// Writes `(time, lb, ub)` rows after checking that the bounds never move backwards.
pub fn write_trajectory<W: std::io::Write>(w: W, traj: &[TrajectoryPoint]) -> Result<(), BenchError> {
    for p in traj.windows(2) {
        if p[1].lb < p[0].lb - 1e-9 || p[1].ub > p[0].ub + 1e-9 || p[1].time < p[0].time {
            return Err(BenchError::Inconsistent("trajectory is not monotone".into()));
        }
    }
    let mut wr = csv::Writer::from_writer(w);
    wr.write_record(TRAJECTORY_HEADER.split(','))?;
    for p in traj {
        wr.write_record([fnum(p.time, 6), fnum(p.lb, 6), fnum(p.ub, 6)])?;
    }
    wr.flush()?;
    Ok(())
}

pub fn load_cvrp(src: &InstanceSource) -> Result<CvrpInstance, BenchError> {
    match src {
        InstanceSource::File(p) => {
            let text = fs::read_to_string(p)?;
            CvrpInstance::parse_tsplib(&text).map_err(|e| BenchError::Instance {
                path: p.display().to_string(),
                msg: e.to_string(),
            })
        }
        InstanceSource::RandomCvrp { customers, vehicles, seed } => Ok(CvrpInstance::generate(*customers, *vehicles, *seed)),
        InstanceSource::RandomGap { .. } => Err(BenchError::Config("expected a CVRP instance".into())),
    }
}

pub fn load_gap(src: &InstanceSource) -> Result<GapInstance, BenchError> {
    match src {
        InstanceSource::File(p) => {
            let text = fs::read_to_string(p)?;
            let name = src.label();
            GapInstance::parse_orlib(&name, &text).map_err(|e| BenchError::Instance {
                path: p.display().to_string(),
                msg: e.to_string(),
            })
        }
        InstanceSource::RandomGap { agents, jobs, seed } => Ok(GapInstance::generate(*agents, *jobs, *seed)),
        InstanceSource::RandomCvrp { .. } => Err(BenchError::Config("expected a GAP instance".into())),
    }
}

/// Result of one run: summary row, bound trajectory and (for CVRP) routes.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub row: SummaryRow,
    pub trajectory: Vec<TrajectoryPoint>,
    pub routes: Vec<Vec<usize>>,
    pub budget: Option<i64>,
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Feasible => "node_limit",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::TimeLimit => "time_limit",
    }
}

pub fn run_one(cfg: &RunConfig) -> Result<RunOutput, BenchError> {
    cfg.validate()?;
    let sc = cfg.solve_config();
    let label = cfg.instance.label();
    match cfg.problem {
        Problem::Cvrp => {
            let inst = load_cvrp(&cfg.instance)?;
            let formulation = match cfg.formulation {
                FormulationKind::Vehicle => Formulation::Vehicle,
                FormulationKind::Customer => Formulation::Customer,
                FormulationKind::Order => {
                    let k = inst.vehicles;
                    let w = if cfg.order_range_weights {
                        crate::objective::OrderWeights::range(k)
                    } else {
                        gini_weights(k)
                    };
                    Formulation::Order(w.map_err(|e| BenchError::Config(e.to_string()))?)
                }
            };
            let opts = FcvrpOptions {
                mode: cfg.labeling,
                ..FcvrpOptions::default()
            };
            let out = fcvrp::solve_fair(&inst, formulation, cfg.budget_pct, &opts, &sc)
                .map_err(|e| BenchError::Inconsistent(e.to_string()))?;
            let size = inst.num_customers().to_string();
            match out {
                None => Ok(RunOutput {
                    row: SummaryRow {
                        instance: label,
                        size,
                        formulation: cfg.formulation.name().into(),
                        branching: scheme_name(cfg.branching).into(),
                        solved: false,
                        time_s: 0.0,
                        gap_pct: 100.0,
                        nodes: 0,
                        delta_pct: 0.0,
                        lb: f64::NAN,
                        ub: f64::INFINITY,
                        status: "infeasible".into(),
                    },
                    trajectory: Vec::new(),
                    routes: Vec::new(),
                    budget: None,
                }),
                Some(o) => {
                    if !o.routes.is_empty() {
                        inst.check_solution(&o.routes, Some(o.budget)).map_err(BenchError::Inconsistent)?;
                    }
                    let r = &o.report;
                    Ok(RunOutput {
                        row: SummaryRow {
                            instance: label,
                            size,
                            formulation: cfg.formulation.name().into(),
                            branching: scheme_name(cfg.branching).into(),
                            solved: r.status == SolveStatus::Optimal,
                            time_s: r.wall_time,
                            gap_pct: r.gap_pct,
                            nodes: r.nodes,
                            delta_pct: o.delta_pct(),
                            lb: r.lower_bound,
                            ub: r.incumbent,
                            status: status_name(r.status).into(),
                        },
                        trajectory: r.trajectory.clone(),
                        routes: o.routes.clone(),
                        budget: Some(o.budget),
                    })
                }
            }
        }
        Problem::Gap => {
            let inst = load_gap(&cfg.instance)?;
            let size = format!("{}x{}", inst.agents(), inst.jobs());
            let out = fgap::solve_fair_gap(&inst, cfg.theta, &sc).map_err(|e| BenchError::Inconsistent(e.to_string()))?;
            let Some(o) = out else {
                return Ok(RunOutput {
                    row: SummaryRow {
                        instance: label,
                        size,
                        formulation: "agent".into(),
                        branching: scheme_name(cfg.branching).into(),
                        solved: false,
                        time_s: 0.0,
                        gap_pct: 100.0,
                        nodes: 0,
                        delta_pct: 0.0,
                        lb: f64::NAN,
                        ub: f64::INFINITY,
                        status: "infeasible".into(),
                    },
                    trajectory: Vec::new(),
                    routes: Vec::new(),
                    budget: None,
                });
            };
            let r = &o.report;
            Ok(RunOutput {
                row: SummaryRow {
                    instance: label,
                    size,
                    formulation: "agent".into(),
                    branching: scheme_name(cfg.branching).into(),
                    solved: r.status == SolveStatus::Optimal,
                    time_s: r.wall_time,
                    gap_pct: r.gap_pct,
                    nodes: r.nodes,
                    delta_pct: fcvrp::delta_pct(o.efficient_range, r.incumbent),
                    lb: r.lower_bound,
                    ub: r.incumbent,
                    status: status_name(r.status).into(),
                },
                trajectory: r.trajectory.clone(),
                routes: Vec::new(),
                budget: None,
            })
        }
    }
}

fn error_row(cfg: &RunConfig, e: &BenchError) -> SummaryRow {
    SummaryRow {
        instance: cfg.instance.label(),
        size: String::new(),
        formulation: match cfg.problem {
            Problem::Cvrp => cfg.formulation.name().into(),
            Problem::Gap => "agent".into(),
        },
        branching: scheme_name(cfg.branching).into(),
        solved: false,
        time_s: 0.0,
        gap_pct: 100.0,
        nodes: 0,
        delta_pct: 0.0,
        lb: f64::NAN,
        ub: f64::NAN,
        status: format!("error: {e}"),
    }
}

pub fn trajectory_file_name(row: &SummaryRow) -> String {
    let clean: String = row
        .instance
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{}_{}_{}.csv", clean, row.formulation, row.branching)
}

/// Runs every configuration in order, writing `summary.csv` and one trajectory
/// CSV per run under `out`. Failed runs are recorded, never fatal.
pub fn run_matrix(configs: &[RunConfig], out: &Path) -> Result<Vec<RunOutput>, BenchError> {
    fs::create_dir_all(out.join("trajectories"))?;
    let mut outputs = Vec::with_capacity(configs.len());
    for cfg in configs {
        info!("running {} {} {}", cfg.instance.label(), cfg.formulation.name(), scheme_name(cfg.branching));
        let res = run_one(cfg).and_then(|o| {
            let path = out.join("trajectories").join(trajectory_file_name(&o.row));
            write_trajectory(fs::File::create(path)?, &o.trajectory)?;
            Ok(o)
        });
        match res {
            Ok(o) => outputs.push(o),
            Err(e) => {
                warn!("run failed: {e}");
                outputs.push(RunOutput {
                    row: error_row(cfg, &e),
                    trajectory: Vec::new(),
                    routes: Vec::new(),
                    budget: None,
                });
            }
        }
    }
    let rows: Vec<SummaryRow> = outputs.iter().map(|o| o.row.clone()).collect();
    write_summary(fs::File::create(out.join("summary.csv"))?, &rows)?;
    Ok(outputs)
}

/// Samples `size + 1` distinct locations of `base` per derived instance (the
/// first becomes the depot), with `vehicles` vehicles and the smallest
/// feasible capacity. Output is a pure function of the arguments.
pub fn derive_subinstances(
    base: &CvrpInstance,
    sizes: &[usize],
    count: usize,
    seed: u64,
    vehicles: usize,
) -> Result<Vec<CvrpInstance>, BenchError> {
    let nv = base.num_vertices();
    let mut out = Vec::new();
    for &size in sizes {
        if size + 1 > nv {
            return Err(BenchError::Config(format!(
                "size {size} needs {} locations but the base instance has {nv}",
                size + 1
            )));
        }
        if size < vehicles {
            return Err(BenchError::Config(format!("size {size} is smaller than the vehicle count")));
        }
        for t in 0..count {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((size as u64) << 32) ^ (t as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
            let picked = sample(&mut rng, nv, size + 1).into_vec();
            let coords: Vec<(f64, f64)> = picked.iter().map(|&i| base.coords[i]).collect();
            let mut demand: Vec<u32> = picked.iter().map(|&i| base.demand[i].max(1)).collect();
            demand[0] = 0;
            let q = CvrpInstance::min_feasible_capacity(&demand, vehicles);
            let name = format!("{}-n{}-{}", base.name, size, t + 1);
            let inst = CvrpInstance::from_coords(&name, coords, demand, q, vehicles).map_err(|e| BenchError::Instance {
                path: base.name.clone(),
                msg: e.to_string(),
            })?;
            out.push(inst);
        }
    }
    Ok(out)
}

/// Writes derived instances as `<name>.vrp` files and returns their paths.
pub fn write_instances(insts: &[CvrpInstance], dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir)?;
    insts
        .iter()
        .map(|i| {
            let p = dir.join(format!("{}.vrp", i.name));
            fs::write(&p, i.to_tsplib())?;
            Ok(p)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TspRow {
    pub instance: String,
    pub range_general: i64,
    pub range_post: i64,
    pub delta_r_pct: f64,
    pub lb: f64,
    pub tsp_optimal: bool,
    pub routes_changed: usize,
}

#[derive(Serialize)]
struct CsvTsp<'a> {
    instance: &'a str,
    range_general: i64,
    range_post: i64,
    delta_r_pct: String,
    lb: String,
    tsp_optimal: u8,
    routes_changed: usize,
}

pub const TSP_HEADER: &str = "instance,range_general,range_post,delta_r_pct,lb,tsp_optimal,routes_changed";

/// Post-processes a general-route solution and compares it with the bound `lb`.
pub fn tsp_report(
    inst: &CvrpInstance,
    routes: &[Vec<usize>],
    budget: Option<i64>,
    lb: f64,
) -> Result<TspRow, BenchError> {
    let post = fcvrp::tsp_postprocess(inst, routes).map_err(|e| BenchError::Inconsistent(e.to_string()))?;
    inst.check_solution(&post.routes, budget).map_err(BenchError::Inconsistent)?;
    if post.distance_after.iter().zip(&post.distance_before).any(|(a, b)| a > b) {
        return Err(BenchError::Inconsistent("reordering increased a route distance".into()));
    }
    let ub = post.range_after as f64;
    if ub < lb - 1e-6 {
        return Err(BenchError::Inconsistent(format!("post-processed range {ub} below lower bound {lb}")));
    }
    Ok(TspRow {
        instance: inst.name.clone(),
        range_general: post.range_before,
        range_post: post.range_after,
        delta_r_pct: post.delta_r(),
        lb,
        tsp_optimal: ub <= lb + 1e-6,
        routes_changed: post.tsp_optimal.iter().filter(|&&o| !o).count(),
    })
}

pub fn write_tsp_report<W: std::io::Write>(w: W, rows: &[TspRow]) -> Result<(), BenchError> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(CsvTsp {
            instance: &r.instance,
            range_general: r.range_general,
            range_post: r.range_post,
            delta_r_pct: fnum(r.delta_r_pct, 2),
            lb: fnum(r.lb, 3),
            tsp_optimal: u8::from(r.tsp_optimal),
            routes_changed: r.routes_changed,
        })?;
    }
    if rows.is_empty() {
        wr.write_record(TSP_HEADER.split(','))?;
    }
    wr.flush()?;
    Ok(())
}
