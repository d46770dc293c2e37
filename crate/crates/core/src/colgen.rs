//! Root-node column generation.
//!
//! Repeats: solve the restricted master LP, read reservation duals `pi` and
//! vehicle duals `mu`, price every vehicle with one DP pass over the
//! scenario graph, and append each plan whose reduced cost is below `-eps`.
//! Stops when a pricing round adds nothing, at which point the restricted LP
//! is optimal for the full relaxation.

use std::collections::HashMap;
use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::lp_simplex::{self, LinearProgram, LpError, LpSolution, LpStatus, PivotRule};
use crate::model::DiscretizedInstance;
use crate::scenario_graph::{ArcWeights, Column, GraphError, ScenarioGraph};

#[derive(Debug, Error)]
pub enum ColgenError {
    #[error("restricted master LP: {0}")]
    Lp(#[from] LpError),
    #[error("restricted master LP is infeasible although trivial columns are present")]
    Infeasible,
    #[error("scenario graph: {0}")]
    Graph(#[from] GraphError),
}

/// Master-problem duals: `pi[r]` per reservation row, `mu[v]` per vehicle row.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DualValues {
    pub pi: Vec<f64>,
    pub mu: Vec<f64>,
}

impl DualValues {
    pub fn arc_weights(&self) -> ArcWeights {
        ArcWeights::from_bonuses(self.pi.clone())
    }

    /// `c_p - sum_{r in p} pi_r - mu_v`.
    pub fn reduced_cost(&self, col: &Column) -> f64 {
        col.cost - col.served.iter().map(|&r| self.pi[r]).sum::<f64>() - self.mu[col.vehicle]
    }
}

/// Ordered, duplicate-free set of columns that always holds one trivial
/// column per vehicle.
#[derive(Debug, Clone)]
pub struct ColumnPool {
    columns: Vec<Column>,
    index: HashMap<(usize, Vec<usize>), usize>,
    trivial: Vec<usize>,
    by_vehicle: Vec<Vec<usize>>,
}

impl ColumnPool {
    /// Pool holding exactly the trivial columns, in vehicle order.
    pub fn with_trivial(graph: &ScenarioGraph) -> Self {
        let n = graph.n_vehicles();
        let mut pool = ColumnPool {
            columns: Vec::new(),
            index: HashMap::new(),
            trivial: Vec::with_capacity(n),
            by_vehicle: vec![Vec::new(); n],
        };
        for v in 0..n {
            let col = graph.trivial_column(v).expect("vehicle ids are contiguous");
            pool.insert(col);
            pool.trivial.push(pool.columns.len() - 1);
        }
        pool
    }

    /// Every distinct served set of every vehicle, keeping the cheapest path
    /// for each. Fails if a vehicle has more than `path_limit` paths.
    pub fn all_columns(graph: &ScenarioGraph, path_limit: usize) -> Result<Self, GraphError> {
        let mut pool = ColumnPool::with_trivial(graph);
        for v in 0..graph.n_vehicles() {
            let mut best: HashMap<Vec<usize>, Column> = HashMap::new();
            let mut order: Vec<Vec<usize>> = Vec::new();
            graph.for_each_path(v, path_limit, |arcs| {
                let col = graph.column_from_arcs(v, arcs.to_vec());
                match best.get_mut(&col.served) {
                    Some(b) if col.cost < b.cost => *b = col,
                    Some(_) => {}
                    None => {
                        order.push(col.served.clone());
                        best.insert(col.served.clone(), col);
                    }
                }
            })?;
            let trivial_cost = pool.columns[pool.trivial[v]].cost;
            for served in order {
                let col = best.remove(&served).unwrap();
                if served.is_empty() && col.cost >= trivial_cost {
                    continue;
                }
                pool.insert(col);
            }
        }
        Ok(pool)
    }

    /// Adds `col` unless an identical column is present. Returns whether it
    /// was added.
    pub fn insert(&mut self, col: Column) -> bool {
        let key = (col.vehicle, col.arcs.clone());
        if self.index.contains_key(&key) {
            return false;
        }
        let id = self.columns.len();
        if col.vehicle >= self.by_vehicle.len() {
            self.by_vehicle.resize(col.vehicle + 1, Vec::new());
        }
        self.by_vehicle[col.vehicle].push(id);
        self.index.insert(key, id);
        self.columns.push(col);
        true
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn column(&self, id: usize) -> &Column {
        &self.columns[id]
    }

    pub fn n_vehicles(&self) -> usize {
        self.by_vehicle.len()
    }

    /// Pool index of the trivial column of `vehicle`.
    pub fn trivial(&self, vehicle: usize) -> usize {
        self.trivial[vehicle]
    }

    pub fn is_trivial(&self, id: usize) -> bool {
        self.trivial.get(self.columns[id].vehicle) == Some(&id)
    }

    /// Pool indices of the columns of `vehicle`, in insertion order.
    pub fn of_vehicle(&self, vehicle: usize) -> &[usize] {
        &self.by_vehicle[vehicle]
    }

    /// Keeps only the columns for which `keep` holds, plus every trivial
    /// column. Order is preserved.
    pub fn retain(&self, mut keep: impl FnMut(usize, &Column) -> bool) -> Self {
        let mut out = ColumnPool {
            columns: Vec::new(),
            index: HashMap::new(),
            trivial: vec![usize::MAX; self.trivial.len()],
            by_vehicle: vec![Vec::new(); self.by_vehicle.len()],
        };
        for (id, col) in self.columns.iter().enumerate() {
            if self.is_trivial(id) || keep(id, col) {
                if self.is_trivial(id) {
                    out.trivial[col.vehicle] = out.columns.len();
                }
                out.insert(col.clone());
            }
        }
        out
    }
}

/// Restricted master LP. Variables `0..R` are the uncovered indicators
/// `y_r`; variable `R + p` is `lambda_p`. Rows `0..R` are reservations and
/// rows `R..R+n` vehicles. Upper bounds are left infinite: the equality rows
/// already cap every variable at 1.
pub fn master_lp(pool: &ColumnPool, dinst: &DiscretizedInstance) -> LinearProgram {
    let r = dinst.n_reservations();
    let mut lp = LinearProgram::new(vec![1.0; r + dinst.n_vehicles()]);
    for res in 0..r {
        lp.add_column(dinst.uncovered_cost(res), vec![(res, 1.0)], f64::INFINITY);
    }
    for col in pool.columns() {
        let mut entries: Vec<(usize, f64)> = col.served.iter().map(|&s| (s, 1.0)).collect();
        entries.push((r + col.vehicle, 1.0));
        lp.add_column(col.cost, entries, f64::INFINITY);
    }
    lp
}

pub fn duals_of(sol: &LpSolution, dinst: &DiscretizedInstance) -> DualValues {
    let r = dinst.n_reservations();
    DualValues {
        pi: sol.duals[..r].to_vec(),
        mu: sol.duals[r..].to_vec(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ColgenLimits {
    pub max_iterations: usize,
    pub max_wall: Duration,
    /// Columns are added only when their reduced cost is below `-rc_tol`.
    pub rc_tol: f64,
    pub pivot_rule: PivotRule,
}

impl Default for ColgenLimits {
    fn default() -> Self {
        ColgenLimits {
            max_iterations: 500,
            max_wall: Duration::from_secs(300),
            rc_tol: 1e-7,
            pivot_rule: PivotRule::Bland,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColgenStatus {
    Converged,
    IterationLimit,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColgenIteration {
    pub iter: usize,
    pub lp_obj: f64,
    pub n_cols_added: usize,
    pub cumulative_cols: usize,
    pub elapsed_s: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ColgenReport {
    pub iterations: Vec<ColgenIteration>,
    pub status: ColgenStatus,
    pub final_lp_bound: f64,
    pub wall_s: f64,
    /// Largest `|primal - dual| / (1 + |primal|)` over every LP solved.
    pub max_duality_residual: f64,
}

impl ColgenReport {
    /// One row per iteration: `iter,lp_obj,n_cols_added,cumulative_cols,elapsed_s`.
    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        for row in &self.iterations {
            w.serialize(row)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct ColgenOutcome {
    pub graph: ScenarioGraph,
    pub pool: ColumnPool,
    pub lp: LpSolution,
    pub duals: DualValues,
    pub report: ColgenReport,
}

impl ColgenOutcome {
    /// The LP value; a valid lower bound on the integer optimum only when
    /// the run converged.
    pub fn lp_bound(&self) -> f64 {
        self.lp.objective
    }
}

fn duality_residual(lp: &LpSolution) -> f64 {
    lp.duality_gap() / (1.0 + lp.objective.abs())
}

fn solve_master(
    pool: &ColumnPool,
    dinst: &DiscretizedInstance,
    limits: &ColgenLimits,
    warm: Option<&lp_simplex::Basis>,
) -> Result<LpSolution, ColgenError> {
    let lp = master_lp(pool, dinst);
    let sol = lp_simplex::solve_with(&lp, limits.pivot_rule, warm)?;
    if sol.status != LpStatus::Optimal {
        return Err(ColgenError::Infeasible);
    }
    Ok(sol)
}

/// Runs column generation from the trivial pool.
pub fn run(dinst: &DiscretizedInstance, limits: &ColgenLimits) -> Result<ColgenOutcome, ColgenError> {
    let graph = ScenarioGraph::build(dinst);
    let pool = ColumnPool::with_trivial(&graph);
    run_from(graph, pool, dinst, limits)
}

/// Runs column generation starting from an existing pool.
pub fn run_from(
    graph: ScenarioGraph,
    mut pool: ColumnPool,
    dinst: &DiscretizedInstance,
    limits: &ColgenLimits,
) -> Result<ColgenOutcome, ColgenError> {
    let start = Instant::now();
    let mut iterations = Vec::new();
    let mut lp = solve_master(&pool, dinst, limits, None)?;
    let mut max_gap = duality_residual(&lp);
    let mut status = ColgenStatus::Converged;

    for iter in 0.. {
        let duals = duals_of(&lp, dinst);
        let weights = duals.arc_weights();
        let priced: Vec<(Column, f64)> = (0..dinst.n_vehicles())
            .into_par_iter()
            .map(|v| graph.cheapest_scenario(v, &weights))
            .collect::<Result<_, _>>()?;

        let mut added = 0;
        for (col, weighted) in priced {
            let rc = weighted - duals.mu[col.vehicle];
            if rc < -limits.rc_tol {
                let recomputed = duals.reduced_cost(&col);
                assert!(
                    (recomputed - rc).abs() <= 1e-7 * (1.0 + rc.abs()),
                    "pricing reduced cost {rc} disagrees with recomputation {recomputed}"
                );
                if pool.insert(col) {
                    added += 1;
                }
            }
        }
        iterations.push(ColgenIteration {
            iter,
            lp_obj: lp.objective,
            n_cols_added: added,
            cumulative_cols: pool.len(),
            elapsed_s: start.elapsed().as_secs_f64(),
        });
        if added == 0 {
            break;
        }

        let previous = lp.objective;
        lp = solve_master(&pool, dinst, limits, Some(&lp.basis))?;
        max_gap = max_gap.max(duality_residual(&lp));
        assert!(
            lp.objective <= previous + 1e-7 * (1.0 + previous.abs()),
            "restricted master objective increased from {previous} to {}",
            lp.objective
        );

        if iter + 1 >= limits.max_iterations {
            status = ColgenStatus::IterationLimit;
            break;
        }
        if start.elapsed() >= limits.max_wall {
            status = ColgenStatus::TimeLimit;
            break;
        }
    }

    let duals = duals_of(&lp, dinst);
    let report = ColgenReport {
        iterations,
        status,
        final_lp_bound: lp.objective,
        wall_s: start.elapsed().as_secs_f64(),
        max_duality_residual: max_gap,
    };
    Ok(ColgenOutcome {
        graph,
        pool,
        lp,
        duals,
        report,
    })
}
