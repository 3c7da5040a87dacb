use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::error;

use fairbnp::bench::{
    self, BenchError, FormulationKind, InstanceSource, Problem, RunConfig,
};
use fairbnp::engine::BranchingScheme;
use fairbnp::fcvrp::{CvrpInstance, LabelingMode};

#[derive(Parser)]
#[command(name = "fairbnp", version, about = "Branch and price for fair CVRP and GAP")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a formulation x branching matrix and write summary and trajectory CSVs.
    Run(RunArgs),
    /// Sample smaller CVRP instances from a base instance.
    Derive(DeriveArgs),
    /// Run CVRP configurations and post-process their routes into shortest tours.
    Tsp(RunArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemArg {
    Cvrp,
    Gap,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum FormArg {
    Vehicle,
    Customer,
    Order,
}

#[derive(Clone, Copy, ValueEnum)]
enum BranchArg {
    Classical,
    Range,
    Order,
}

#[derive(Clone, Copy, ValueEnum)]
enum LabelArg {
    Mono,
    Bidirectional,
    Tsp,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightsArg {
    Gini,
    Range,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum)]
    problem: ProblemArg,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "vehicle")]
    formulation: Vec<FormArg>,
    #[arg(long, value_enum, value_delimiter = ',', default_value = "range")]
    branching: Vec<BranchArg>,
    /// Relaxation factor of the fairness cutoffs (default 0.025 for CVRP, 0 for GAP).
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "110")]
    budget_pct: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "0.01")]
    theta: Vec<f64>,
    /// Seconds per run.
    #[arg(long, default_value_t = 3600.0)]
    time_limit: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Instance files or directories of instance files.
    #[arg(long)]
    instance: Vec<PathBuf>,
    /// Generate this many random instances (seeds `seed..seed+count`) instead of reading files.
    #[arg(long, default_value_t = 0)]
    random_count: usize,
    /// Customers (CVRP) or jobs (GAP) of generated instances.
    #[arg(long, default_value_t = 10)]
    random_size: usize,
    /// Vehicles (CVRP) or agents (GAP) of generated instances.
    #[arg(long, default_value_t = 3)]
    random_fleet: usize,
    #[arg(long, value_enum, default_value = "bidirectional")]
    labeling: LabelArg,
    #[arg(long, value_enum, default_value = "gini")]
    order_weights: WeightsArg,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct DeriveArgs {
    #[arg(long)]
    base: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "15,20,25")]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    vehicles: usize,
    #[arg(long, default_value = "instances")]
    out: PathBuf,
}

fn instance_files(paths: &[PathBuf]) -> Result<Vec<PathBuf>, BenchError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut v: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|q| q.is_file())
                .collect();
            v.sort();
            out.extend(v);
        } else if p.is_file() {
            out.push(p.clone());
        } else {
            return Err(BenchError::Config(format!("instance path {} does not exist", p.display())));
        }
    }
    Ok(out)
}

fn build_configs(a: &RunArgs) -> Result<Vec<RunConfig>, BenchError> {
    let problem = match a.problem {
        ProblemArg::Cvrp => Problem::Cvrp,
        ProblemArg::Gap => Problem::Gap,
    };
    let mut sources: Vec<InstanceSource> = instance_files(&a.instance)?.into_iter().map(InstanceSource::File).collect();
    for s in 0..a.random_count as u64 {
        sources.push(match problem {
            Problem::Cvrp => InstanceSource::RandomCvrp {
                customers: a.random_size,
                vehicles: a.random_fleet,
                seed: a.seed + s,
            },
            Problem::Gap => InstanceSource::RandomGap {
                agents: a.random_fleet,
                jobs: a.random_size,
                seed: a.seed + s,
            },
        });
    }
    if sources.is_empty() {
        return Err(BenchError::Config("no instances given (use --instance or --random-count)".into()));
    }
    let forms: Vec<FormulationKind> = a
        .formulation
        .iter()
        .map(|f| match f {
            FormArg::Vehicle => FormulationKind::Vehicle,
            FormArg::Customer => FormulationKind::Customer,
            FormArg::Order => FormulationKind::Order,
        })
        .collect();
    let schemes: Vec<BranchingScheme> = a
        .branching
        .iter()
        .map(|b| match b {
            BranchArg::Classical => BranchingScheme::Classical,
            BranchArg::Range => BranchingScheme::Range,
            BranchArg::Order => BranchingScheme::Order,
        })
        .collect();
    let mut out = Vec::new();
    for src in &sources {
        for &form in &forms {
            for &scheme in &schemes {
                let params: Vec<(u32, f64)> = match problem {
                    Problem::Cvrp => a.budget_pct.iter().map(|&b| (b, 0.0)).collect(),
                    Problem::Gap => a.theta.iter().map(|&t| (0, t)).collect(),
                };
                for (pct, theta) in params {
                    let mut c = match problem {
                        Problem::Cvrp => RunConfig::cvrp(src.clone(), form, scheme),
                        Problem::Gap => {
                            let mut c = RunConfig::gap(src.clone(), scheme);
                            c.formulation = form;
                            c
                        }
                    };
                    if let Some(al) = a.alpha {
                        c.alpha = al;
                    }
                    if problem == Problem::Cvrp {
                        c.budget_pct = pct;
                    } else {
                        c.theta = theta;
                    }
                    c.time_limit = Some(a.time_limit);
                    c.seed = a.seed;
                    c.labeling = match a.labeling {
                        LabelArg::Mono => LabelingMode::Mono,
                        LabelArg::Bidirectional => LabelingMode::Bidirectional,
                        LabelArg::Tsp => LabelingMode::Tsp,
                    };
                    c.order_range_weights = matches!(a.order_weights, WeightsArg::Range);
                    c.validate()?;
                    out.push(c);
                }
            }
        }
    }
    Ok(out)
}

fn print_rows(rows: &[bench::SummaryRow]) {
    for r in rows {
        println!(
            "{:<24} {:>6} {:<9} {:<9} solved={} time={:.2}s gap={:.2}% nodes={} delta={:.2}% status={}",
            r.instance, r.size, r.formulation, r.branching, u8::from(r.solved), r.time_s, r.gap_pct, r.nodes, r.delta_pct, r.status
        );
    }
}

fn cmd_run(a: &RunArgs) -> Result<(), BenchError> {
    let configs = build_configs(a)?;
    let outs = bench::run_matrix(&configs, &a.out)?;
    let rows: Vec<_> = outs.into_iter().map(|o| o.row).collect();
    print_rows(&rows);
    println!("wrote {}", a.out.join("summary.csv").display());
    Ok(())
}

fn cmd_tsp(a: &RunArgs) -> Result<(), BenchError> {
    if !matches!(a.problem, ProblemArg::Cvrp) {
        return Err(BenchError::Config("the TSP report applies to CVRP runs only".into()));
    }
    let configs = build_configs(a)?;
    let outs = bench::run_matrix(&configs, &a.out)?;
    let mut rows = Vec::new();
    for (cfg, o) in configs.iter().zip(&outs) {
        if o.routes.is_empty() {
            continue;
        }
        let inst = bench::load_cvrp(&cfg.instance)?;
        match bench::tsp_report(&inst, &o.routes, o.budget, o.row.lb) {
            Ok(r) => rows.push(r),
            Err(e) => error!("{}: {e}", o.row.instance),
        }
    }
    let path = a.out.join("tsp_report.csv");
    bench::write_tsp_report(std::fs::File::create(&path)?, &rows)?;
    for r in &rows {
        println!(
            "{:<24} range {} -> {} delta_r={:.2}% tsp_optimal={}",
            r.instance, r.range_general, r.range_post, r.delta_r_pct, u8::from(r.tsp_optimal)
        );
    }
    println!("wrote {}", path.display());
    Ok(())
}

fn cmd_derive(a: &DeriveArgs) -> Result<(), BenchError> {
    let text = std::fs::read_to_string(&a.base).map_err(|e| BenchError::Instance {
        path: a.base.display().to_string(),
        msg: e.to_string(),
    })?;
    let base = CvrpInstance::parse_tsplib(&text).map_err(|e| BenchError::Instance {
        path: a.base.display().to_string(),
        msg: e.to_string(),
    })?;
    let insts = bench::derive_subinstances(&base, &a.sizes, a.count, a.seed, a.vehicles)?;
    let paths = bench::write_instances(&insts, Path::new(&a.out))?;
    println!("wrote {} instances to {}", paths.len(), a.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    if let Ok(t) = std::env::var("FAIRBNP_THREADS") {
        match t.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("error: FAIRBNP_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Tsp(a) => cmd_tsp(a),
        Cmd::Derive(a) => cmd_derive(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ BenchError::Config(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e @ BenchError::Instance { .. }) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
