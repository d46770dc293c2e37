//! Command-line front end.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{bail, ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;

use evfleet::colgen::{self, ColgenLimits, ColgenOutcome, ColgenStatus, ColumnPool};
use evfleet::master::{self, MasterOptions, MasterRun, SolverKind};
use evfleet::model::{self, generate, DiscretizedInstance, PriceProfile};
use evfleet::oracle::{self, OracleLimits};
use evfleet::qubo;
use evfleet::scenario_graph::{ArcKind, Node, ScenarioGraph};
use evfleet::seed::{self, Component};

#[derive(Debug, Parser)]
#[command(
    name = "evfleet",
    version,
    about = "EV fleet charging and allocation by column generation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Column generation followed by a master solver.
    Solve(SolveArgs),
    /// Exact optimum by assignment enumeration (tiny instances only).
    Oracle(OracleArgs),
    /// Column generation, then write the master QUBO.
    ExportQubo(ExportArgs),
    /// Run every solver on a seeded family of instances.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Wall-clock budget per stage, in seconds.
    #[arg(long)]
    pub time_limit_s: Option<f64>,
}

impl Common {
    fn time_limit(&self) -> Result<Option<Duration>> {
        match self.time_limit_s {
            None => Ok(None),
            Some(s) => {
                ensure!(s.is_finite() && s > 0.0, "--time-limit-s must be positive, got {s}");
                Ok(Some(Duration::from_secs_f64(s)))
            }
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        fs::create_dir_all(&self.out).with_context(|| format!("creating {}", self.out.display()))?;
        Ok(&self.out)
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long)]
    pub vehicles: usize,
    #[arg(long)]
    pub reservations: usize,
    #[arg(long)]
    pub t_max: usize,
    #[arg(long, default_value = "day-night")]
    pub price_profile: PriceProfile,
    /// File name inside `--out`.
    #[arg(long, default_value = "instance.json")]
    pub name: String,
}

#[derive(Debug, Args)]
pub struct PoolArgs {
    /// Use every distinct plan of every vehicle instead of column generation.
    #[arg(long)]
    pub all_columns: bool,
    /// Per-vehicle path cap for `--all-columns`.
    #[arg(long, default_value_t = 100_000)]
    pub max_paths: usize,
    /// Column generation iteration cap.
    #[arg(long, default_value_t = 500)]
    pub max_iterations: usize,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pool: PoolArgs,
    #[arg(long, default_value = "exact")]
    pub solver: SolverKind,
    /// QUBO penalty weight; defaults to a provably dominating value.
    #[arg(long)]
    pub penalty: Option<f64>,
    #[arg(long)]
    pub sweeps: Option<usize>,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long)]
    pub tenure: Option<usize>,
    #[arg(long)]
    pub tabu_iterations: Option<usize>,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_assignments: u64,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    pub instance: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub pool: PoolArgs,
    #[arg(long)]
    pub penalty: Option<f64>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 10)]
    pub instances: usize,
    #[arg(long, default_value_t = 2)]
    pub vehicles: usize,
    #[arg(long, default_value_t = 4)]
    pub reservations: usize,
    #[arg(long, default_value_t = 12)]
    pub t_max: usize,
    #[arg(long, default_value = "day-night")]
    pub price_profile: PriceProfile,
    /// Comma-separated subset of exact, sa, tabu, feasible-anneal.
    #[arg(long, value_delimiter = ',', default_values_t = SolverKind::ALL)]
    pub solvers: Vec<SolverKind>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate(a) => cmd_generate(&a),
        Command::Solve(a) => cmd_solve(&a),
        Command::Oracle(a) => cmd_oracle(&a),
        Command::ExportQubo(a) => cmd_export_qubo(&a),
        Command::Bench(a) => cmd_bench(&a),
    }
}

fn load(path: &Path) -> Result<DiscretizedInstance> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let inst = model::load_instance(&bytes).with_context(|| format!("model: {}", path.display()))?;
    model::discretize(&inst).context("discretize")
}

fn write(path: PathBuf, bytes: impl AsRef<[u8]>) -> Result<()> {
    fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn write_csv(path: PathBuf, f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Result<()> {
    let mut buf = Vec::new();
    f(&mut buf).with_context(|| format!("formatting {}", path.display()))?;
    write(path, buf)
}

pub fn cmd_generate(a: &GenerateArgs) -> Result<()> {
    a.common.time_limit()?;
    let inst = generate(a.common.seed, a.vehicles, a.reservations, a.t_max, a.price_profile).context("generate")?;
    let path = a.common.out_dir()?.join(&a.name);
    write(path.clone(), model::save_instance(&inst))?;
    println!(
        "{} n={} r_max={} t_max={}",
        path.display(),
        inst.vehicles.len(),
        inst.reservations.len(),
        inst.t_max
    );
    Ok(())
}

fn build_pool(dinst: &DiscretizedInstance, args: &PoolArgs, time_limit: Option<Duration>) -> Result<ColgenOutcome> {
    let mut limits = ColgenLimits {
        max_iterations: args.max_iterations,
        ..Default::default()
    };
    if let Some(t) = time_limit {
        limits.max_wall = t;
    }
    let graph = ScenarioGraph::build(dinst);
    let pool = if args.all_columns {
        ColumnPool::all_columns(&graph, args.max_paths).context("scenario graph")?
    } else {
        ColumnPool::with_trivial(&graph)
    };
    colgen::run_from(graph, pool, dinst, &limits).context("column generation")
}

#[derive(Debug, Serialize)]
struct ArcDoc {
    id: usize,
    #[serde(flatten)]
    kind: ArcKind,
    from: Node,
    to: Node,
    cost: f64,
}

#[derive(Debug, Serialize)]
struct VehicleDoc {
    vehicle: usize,
    column: usize,
    cost: f64,
    served: Vec<usize>,
    arcs: Vec<ArcDoc>,
}

#[derive(Debug, Serialize)]
struct SolutionDoc {
    instance: String,
    solver: String,
    seed: Option<u64>,
    params: String,
    cost: f64,
    feasible: bool,
    proven_optimal: bool,
    lp_bound: f64,
    colgen_status: ColgenStatus,
    pool_size: usize,
    energy: Option<f64>,
    vehicles: Vec<VehicleDoc>,
    y: Vec<u8>,
}

fn solution_doc(instance: &Path, cg: &ColgenOutcome, run: &MasterRun) -> SolutionDoc {
    let sol = &run.solution;
    let vehicles = sol
        .columns
        .iter()
        .enumerate()
        .map(|(v, &p)| {
            let col = cg.pool.column(p);
            VehicleDoc {
                vehicle: v,
                column: p,
                cost: col.cost,
                served: col.served.clone(),
                arcs: col
                    .arcs
                    .iter()
                    .map(|&id| {
                        let a = cg.graph.arc(id);
                        ArcDoc {
                            id,
                            kind: a.kind,
                            from: cg.graph.node(a.from),
                            to: cg.graph.node(a.to),
                            cost: a.base_cost,
                        }
                    })
                    .collect(),
            }
        })
        .collect();
    SolutionDoc {
        instance: instance.display().to_string(),
        solver: sol.provenance.solver.clone(),
        seed: sol.provenance.seed,
        params: sol.provenance.params.clone(),
        cost: sol.cost,
        feasible: sol.feasible,
        proven_optimal: sol.proven_optimal,
        lp_bound: cg.lp_bound(),
        colgen_status: cg.report.status,
        pool_size: cg.pool.len(),
        energy: run.energy,
        vehicles,
        y: sol.uncovered.iter().map(|&u| u8::from(u)).collect(),
    }
}

pub fn cmd_solve(a: &SolveArgs) -> Result<()> {
    let limit = a.common.time_limit()?;
    let out = a.common.out_dir()?;
    let dinst = load(&a.instance)?;
    let cg = build_pool(&dinst, &a.pool, limit)?;
    let opts = MasterOptions {
        seed: a.common.seed,
        time_limit: limit,
        penalty: a.penalty,
        sweeps: a.sweeps,
        restarts: a.restarts,
        tabu_tenure: a.tenure,
        tabu_iterations: a.tabu_iterations,
    };
    let run = master::solve_master(a.solver, &cg.pool, &dinst, &opts).context("master solver")?;

    let doc = solution_doc(&a.instance, &cg, &run);
    let mut json = serde_json::to_vec_pretty(&doc).context("serializing solution")?;
    json.push(b'\n');
    write(out.join("solution.json"), json)?;
    write_csv(out.join("colgen.csv"), |b| cg.report.write_csv(b))?;
    write_csv(out.join("solver.csv"), |b| master::write_solver_csv(&[run.record()], b))?;

    if !run.solution.feasible {
        bail!("{} produced an infeasible solution", a.solver);
    }
    println!(
        "solver={} cost={} lp_bound={} columns={} colgen={:?}",
        a.solver,
        run.solution.cost,
        cg.lp_bound(),
        cg.pool.len(),
        cg.report.status
    );
    Ok(())
}

pub fn cmd_oracle(a: &OracleArgs) -> Result<()> {
    a.common.time_limit()?;
    let out = a.common.out_dir()?;
    let dinst = load(&a.instance)?;
    let limits = OracleLimits {
        max_assignments: a.max_assignments,
        ..Default::default()
    };
    let res = oracle::solve_oracle(&dinst, &limits).context("oracle")?;
    let mut json = serde_json::to_vec_pretty(&res).context("serializing oracle result")?;
    json.push(b'\n');
    write(out.join("oracle.json"), json)?;
    let assignment: Vec<String> = res
        .assignment
        .iter()
        .map(|a| a.map_or_else(|| "-".to_string(), |v| v.to_string()))
        .collect();
    println!("oracle cost={} assignment=[{}]", res.cost, assignment.join(","));
    Ok(())
}

pub fn cmd_export_qubo(a: &ExportArgs) -> Result<()> {
    let limit = a.common.time_limit()?;
    let out = a.common.out_dir()?;
    let dinst = load(&a.instance)?;
    let cg = build_pool(&dinst, &a.pool, limit)?;
    let m = match a.penalty {
        Some(p) => qubo::build_with_penalty(&cg.pool, &dinst, p),
        None => qubo::build(&cg.pool, &dinst),
    };
    let path = out.join("qubo.txt");
    write(path.clone(), m.export())?;
    println!(
        "{} variables={} terms={}",
        path.display(),
        m.n_vars(),
        m.coefficients().len()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct BenchRow {
    instance: String,
    n: usize,
    r_max: usize,
    t_max: usize,
    solver: SolverName,
    cost: f64,
    gap_vs_exact: f64,
    wall_s: f64,
}

#[derive(Debug)]
struct SolverName(SolverKind);

impl Serialize for SolverName {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.0.name())
    }
}

/// Percentage gap of `cost` over `exact`, zero when they agree.
fn gap_percent(cost: f64, exact: f64) -> f64 {
    let diff = cost - exact;
    if diff.abs() <= 1e-9 * (1.0 + exact.abs()) {
        0.0
    } else {
        100.0 * diff / exact.abs().max(1e-12)
    }
}

fn bench_instance(a: &BenchArgs, k: usize, inst_seed: u64, limit: Option<Duration>) -> Result<Vec<BenchRow>> {
    let inst = generate(inst_seed, a.vehicles, a.reservations, a.t_max, a.price_profile).context("generate")?;
    let dinst = model::discretize(&inst).context("discretize")?;
    let name = format!("bench-{k:03}");
    let start = Instant::now();
    let pool_args = PoolArgs {
        all_columns: false,
        max_paths: 0,
        max_iterations: 500,
    };
    let cg = build_pool(&dinst, &pool_args, limit).with_context(|| name.clone())?;
    let colgen_s = start.elapsed().as_secs_f64();
    let opts = MasterOptions {
        seed: inst_seed,
        time_limit: limit,
        ..Default::default()
    };
    let exact = master::solve_master(SolverKind::Exact, &cg.pool, &dinst, &opts)?;
    let mut rows = Vec::new();
    for &kind in &a.solvers {
        let run = if kind == SolverKind::Exact {
            exact.clone()
        } else {
            master::solve_master(kind, &cg.pool, &dinst, &opts)?
        };
        ensure!(run.solution.feasible, "{name}: {kind} infeasible");
        rows.push(BenchRow {
            instance: name.clone(),
            n: dinst.n_vehicles(),
            r_max: dinst.n_reservations(),
            t_max: dinst.t_max,
            solver: SolverName(kind),
            cost: run.solution.cost,
            gap_vs_exact: if kind == SolverKind::Exact {
                0.0
            } else {
                gap_percent(run.solution.cost, exact.solution.cost)
            },
            wall_s: colgen_s + run.wall_s,
        });
    }
    Ok(rows)
}

pub fn cmd_bench(a: &BenchArgs) -> Result<()> {
    let limit = a.common.time_limit()?;
    let out = a.common.out_dir()?;
    ensure!(!a.solvers.is_empty(), "--solvers must name at least one solver");
    let mut rng = seed::rng(a.common.seed, Component::Bench);
    let seeds: Vec<u64> = (0..a.instances).map(|_| rng.next_u64()).collect();
    let per: Vec<Vec<BenchRow>> = seeds
        .par_iter()
        .enumerate()
        .map(|(k, &s)| bench_instance(a, k, s, limit))
        .collect::<Result<_>>()?;
    let rows: Vec<BenchRow> = per.into_iter().flatten().collect();
    write_csv(out.join("bench.csv"), |b| {
        let mut w = csv::Writer::from_writer(b);
        for r in &rows {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    })?;
    let worst = rows.iter().map(|r| r.gap_vs_exact).fold(0.0, f64::max);
    println!(
        "{} rows={} instances={} worst_gap_pct={worst}",
        out.join("bench.csv").display(),
        rows.len(),
        a.instances
    );
    Ok(())
}
