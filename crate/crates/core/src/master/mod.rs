//! Integer set-partition master over a column pool.
//!
//! A solution picks exactly one pool column per vehicle; a reservation not
//! served by any picked column is uncovered and pays its penalty.

mod anneal;
mod exact;
mod feasible;
mod repair;
mod tabu;

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::Serialize;
use thiserror::Error;

use crate::colgen::ColumnPool;
use crate::model::DiscretizedInstance;
use crate::qubo;
use crate::seed::{self, Component};

pub use anneal::{anneal_qubo, AnnealSchedule, ScheduleError};
pub use exact::solve_exact;
pub use feasible::{feasible_anneal, feasible_anneal_with, feasible_schedule};
pub use repair::greedy_repair;
pub use tabu::{tabu_qubo, TabuParams};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub solver: String,
    pub seed: Option<u64>,
    pub params: String,
}

impl Provenance {
    pub fn new(solver: &str, seed: Option<u64>, params: impl Into<String>) -> Self {
        Provenance {
            solver: solver.to_string(),
            seed,
            params: params.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MasterSolution {
    /// Pool index of the column chosen for each vehicle.
    pub columns: Vec<usize>,
    /// `uncovered[r]` is the master's `y_r`.
    pub uncovered: Vec<bool>,
    pub cost: f64,
    pub feasible: bool,
    /// Set only by the exact solver when its search finished.
    pub proven_optimal: bool,
    pub provenance: Provenance,
}

impl MasterSolution {
    /// Builds the solution implied by one column per vehicle: every
    /// reservation that no chosen column serves is uncovered.
    pub fn from_columns(
        pool: &ColumnPool,
        dinst: &DiscretizedInstance,
        columns: Vec<usize>,
        provenance: Provenance,
    ) -> Self {
        let mut uncovered = vec![true; dinst.n_reservations()];
        for &p in &columns {
            for &r in &pool.column(p).served {
                uncovered[r] = false;
            }
        }
        let feasible = check(pool, dinst, &columns, &uncovered).is_ok();
        let cost = cost_of(pool, dinst, &columns, &uncovered);
        MasterSolution {
            columns,
            uncovered,
            cost,
            feasible,
            proven_optimal: false,
            provenance,
        }
    }

    pub fn all_trivial(pool: &ColumnPool, dinst: &DiscretizedInstance, provenance: Provenance) -> Self {
        let cols = (0..dinst.n_vehicles()).map(|v| pool.trivial(v)).collect();
        Self::from_columns(pool, dinst, cols, provenance)
    }

    /// The QUBO bit vector of this solution: lambdas in pool order, then y.
    pub fn to_bits(&self, pool: &ColumnPool) -> fixedbitset::FixedBitSet {
        let mut x = fixedbitset::FixedBitSet::with_capacity(pool.len() + self.uncovered.len());
        for &p in &self.columns {
            x.insert(p);
        }
        for (r, &u) in self.uncovered.iter().enumerate() {
            x.set(pool.len() + r, u);
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Infeasibility {
    #[error("expected one column per vehicle ({expected}), got {got}")]
    ColumnCount { expected: usize, got: usize },
    #[error("column {column} does not exist in the pool")]
    UnknownColumn { column: usize },
    #[error("column {column} belongs to vehicle {owner}, not vehicle {vehicle}")]
    WrongVehicle {
        column: usize,
        owner: usize,
        vehicle: usize,
    },
    #[error("expected {expected} uncovered flags, got {got}")]
    FlagCount { expected: usize, got: usize },
    #[error("reservation {reservation} is covered {times} times")]
    Coverage { reservation: usize, times: usize },
}

/// Checks the partition rows: every vehicle has exactly one of its own
/// columns and every reservation is served or flagged uncovered exactly once.
pub fn check(
    pool: &ColumnPool,
    dinst: &DiscretizedInstance,
    columns: &[usize],
    uncovered: &[bool],
) -> Result<(), Infeasibility> {
    let n = dinst.n_vehicles();
    let r = dinst.n_reservations();
    if columns.len() != n {
        return Err(Infeasibility::ColumnCount {
            expected: n,
            got: columns.len(),
        });
    }
    if uncovered.len() != r {
        return Err(Infeasibility::FlagCount {
            expected: r,
            got: uncovered.len(),
        });
    }
    let mut times = vec![0usize; r];
    for (v, &p) in columns.iter().enumerate() {
        if p >= pool.len() {
            return Err(Infeasibility::UnknownColumn { column: p });
        }
        let col = pool.column(p);
        if col.vehicle != v {
            return Err(Infeasibility::WrongVehicle {
                column: p,
                owner: col.vehicle,
                vehicle: v,
            });
        }
        for &s in &col.served {
            times[s] += 1;
        }
    }
    for (res, &u) in uncovered.iter().enumerate() {
        let t = times[res] + usize::from(u);
        if t != 1 {
            return Err(Infeasibility::Coverage {
                reservation: res,
                times: t,
            });
        }
    }
    Ok(())
}

/// `sum c_p + sum_r uncovered_cost(r) y_r`.
pub fn cost_of(pool: &ColumnPool, dinst: &DiscretizedInstance, columns: &[usize], uncovered: &[bool]) -> f64 {
    let cols: f64 = columns.iter().map(|&p| pool.column(p).cost).sum();
    let unc: f64 = uncovered
        .iter()
        .enumerate()
        .filter(|(_, &u)| u)
        .map(|(r, _)| dinst.uncovered_cost(r))
        .sum();
    cols + unc
}

/// `c_p - sum_{r in p} uncovered_cost(r)`: the change in master cost from
/// replacing nothing by `p`, given all of `p`'s reservations were uncovered.
pub(crate) fn net_costs(pool: &ColumnPool, dinst: &DiscretizedInstance) -> Vec<f64> {
    pool.columns()
        .iter()
        .map(|c| c.cost - c.served.iter().map(|&r| dinst.uncovered_cost(r)).sum::<f64>())
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Exact,
    Sa,
    Tabu,
    FeasibleAnneal,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [
        SolverKind::Exact,
        SolverKind::Sa,
        SolverKind::Tabu,
        SolverKind::FeasibleAnneal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Exact => "exact",
            SolverKind::Sa => "sa",
            SolverKind::Tabu => "tabu",
            SolverKind::FeasibleAnneal => "feasible-anneal",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error)]
#[error("unknown solver `{0}` (expected exact, sa, tabu or feasible-anneal)")]
pub struct UnknownSolver(String);

impl FromStr for SolverKind {
    type Err = UnknownSolver;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| UnknownSolver(s.to_string()))
    }
}

/// Knobs shared by the dispatcher. `None` means the solver default.
#[derive(Debug, Clone, Default)]
pub struct MasterOptions {
    pub seed: u64,
    pub time_limit: Option<Duration>,
    pub penalty: Option<f64>,
    pub sweeps: Option<usize>,
    pub restarts: Option<usize>,
    pub tabu_tenure: Option<usize>,
    pub tabu_iterations: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct MasterRun {
    pub solution: MasterSolution,
    /// QUBO energy of the raw annealer output, before repair.
    pub energy: Option<f64>,
    pub wall_s: f64,
}

impl MasterRun {
    pub fn record(&self) -> SolverRecord {
        let p = &self.solution.provenance;
        SolverRecord {
            solver: p.solver.clone(),
            seed: p.seed,
            params: p.params.clone(),
            cost: self.solution.cost,
            feasible: self.solution.feasible,
            wall_s: self.wall_s,
            energy: self.energy,
        }
    }
}

pub fn solve_master(
    kind: SolverKind,
    pool: &ColumnPool,
    dinst: &DiscretizedInstance,
    opts: &MasterOptions,
) -> Result<MasterRun, ScheduleError> {
    let start = Instant::now();
    let (mut solution, energy) = match kind {
        SolverKind::Exact => (solve_exact(pool, dinst, opts.time_limit), None),
        SolverKind::Sa => {
            let m = build_qubo(pool, dinst, opts);
            let mut sched = AnnealSchedule::for_model(&m, seed::derive(opts.seed, Component::Anneal));
            if let Some(s) = opts.sweeps {
                sched.sweeps = s;
            }
            if let Some(r) = opts.restarts {
                sched.restarts = r;
            }
            sched.validate()?;
            let (x, e) = anneal_qubo(&m, &sched);
            let mut sol = greedy_repair(pool, dinst, &x);
            sol.provenance = Provenance::new(kind.name(), Some(opts.seed), format!("{sched}; M={}", m.penalty()));
            (sol, Some(e))
        }
        SolverKind::Tabu => {
            let m = build_qubo(pool, dinst, opts);
            let mut params = TabuParams::for_model(&m, seed::derive(opts.seed, Component::Tabu));
            if let Some(t) = opts.tabu_tenure {
                params.tenure = t;
            }
            if let Some(i) = opts.tabu_iterations {
                params.max_iterations = i;
            }
            let (x, e) = tabu_qubo(&m, &params);
            let mut sol = greedy_repair(pool, dinst, &x);
            sol.provenance = Provenance::new(kind.name(), Some(opts.seed), format!("{params}; M={}", m.penalty()));
            (sol, Some(e))
        }
        SolverKind::FeasibleAnneal => {
            let mut sched = feasible_schedule(pool, dinst, seed::derive(opts.seed, Component::FeasibleAnneal));
            if let Some(s) = opts.sweeps {
                sched.sweeps = s;
            }
            if let Some(r) = opts.restarts {
                sched.restarts = r;
            }
            sched.validate()?;
            let mut sol = feasible_anneal(pool, dinst, &sched);
            sol.provenance.seed = Some(opts.seed);
            (sol, None)
        }
    };
    if kind == SolverKind::Exact {
        solution.provenance.seed = None;
    }
    assert!(
        check(pool, dinst, &solution.columns, &solution.uncovered).is_ok(),
        "{kind} returned an infeasible solution"
    );
    Ok(MasterRun {
        solution,
        energy,
        wall_s: start.elapsed().as_secs_f64(),
    })
}

fn build_qubo(pool: &ColumnPool, dinst: &DiscretizedInstance, opts: &MasterOptions) -> qubo::QuboModel {
    match opts.penalty {
        Some(m) => qubo::build_with_penalty(pool, dinst, m),
        None => qubo::build(pool, dinst),
    }
}

/// One row of the solver summary CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverRecord {
    pub solver: String,
    pub seed: Option<u64>,
    pub params: String,
    pub cost: f64,
    pub feasible: bool,
    pub wall_s: f64,
    pub energy: Option<f64>,
}

pub fn write_solver_csv<W: Write>(records: &[SolverRecord], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
