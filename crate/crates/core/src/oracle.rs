//! Exact reference solver for tiny instances.
//!
//! Enumerates every assignment of reservations to vehicles or "uncovered"
//! and, for each vehicle, finds its cheapest charging plan that serves
//! exactly its assigned reservations by a dynamic program over
//! (timestep, level). Nothing here touches the scenario graph or the LP.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::colgen::ColumnPool;
use crate::master::solve_exact;
use crate::model::DiscretizedInstance;
use crate::scenario_graph::{GraphError, ScenarioGraph};

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("assignment space (n+1)^r = {space} exceeds the limit {limit}")]
    ScaleGuard { space: f64, limit: u64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("exact methods disagree: assignment enumeration {assignment}, path enumeration {paths}")]
    Disagreement { assignment: f64, paths: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub max_assignments: u64,
    /// Per-vehicle path cap for the path-enumeration cross-check.
    pub max_paths: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_assignments: 1_000_000,
            max_paths: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum PlanStep {
    Idle {
        t: usize,
    },
    Charge {
        t: usize,
    },
    Serve {
        reservation: usize,
        t_start: usize,
        t_end: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VehiclePlan {
    pub vehicle: usize,
    pub steps: Vec<PlanStep>,
    /// Level at every timestep `0..=t_max`; held constant during a service.
    pub levels: Vec<usize>,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleResult {
    pub cost: f64,
    /// Vehicle serving each reservation, `None` when uncovered.
    pub assignment: Vec<Option<usize>>,
    pub plans: Vec<VehiclePlan>,
}

#[derive(Clone, Copy)]
enum Back {
    Idle,
    Charge,
    Serve(usize),
}

/// Cheapest plan from `level_e0` that serves exactly `mask`, or `None` if no
/// plan does.
fn vehicle_dp(dinst: &DiscretizedInstance, vehicle: usize, mask: u64) -> Option<VehiclePlan> {
    let mut jobs: Vec<usize> = (0..dinst.n_reservations()).filter(|&r| mask >> r & 1 == 1).collect();
    jobs.sort_by_key(|&r| (dinst.reservations[r].t_start, r));
    let levels = dinst.i_max + 1;
    let t_max = dinst.t_max;
    let k = dinst.charge_step;

    // best[t][l] and how it was reached; only times the vehicle is free.
    let mut best = vec![vec![f64::INFINITY; levels]; t_max + 1];
    let mut back: Vec<Vec<Option<(usize, usize, Back)>>> = vec![vec![None; levels]; t_max + 1];
    best[0][dinst.vehicles[vehicle].level_e0] = 0.0;

    let mut next = 0;
    let mut t = 0;
    while t < t_max {
        if next < jobs.len() && dinst.reservations[jobs[next]].t_start < t {
            return None;
        }
        if next < jobs.len() && dinst.reservations[jobs[next]].t_start == t {
            let r = &dinst.reservations[jobs[next]];
            for l in r.level_res..levels {
                let c = best[t][l];
                if c < best[r.t_end][l - r.level_res] {
                    best[r.t_end][l - r.level_res] = c;
                    back[r.t_end][l - r.level_res] = Some((t, l, Back::Serve(r.id)));
                }
            }
            next += 1;
            t = r.t_end;
            continue;
        }
        let price = dinst.charge_cost(t);
        for l in 0..levels {
            let c = best[t][l];
            if !c.is_finite() {
                continue;
            }
            if c < best[t + 1][l] {
                best[t + 1][l] = c;
                back[t + 1][l] = Some((t, l, Back::Idle));
            }
            if l + k < levels && c + price < best[t + 1][l + k] {
                best[t + 1][l + k] = c + price;
                back[t + 1][l + k] = Some((t, l, Back::Charge));
            }
        }
        t += 1;
    }
    if next < jobs.len() {
        return None;
    }

    let (end, cost) = (0..levels)
        .filter(|&l| best[t_max][l].is_finite())
        .map(|l| (l, best[t_max][l] + dinst.terminal_cost(l)))
        .fold(None, |acc: Option<(usize, f64)>, (l, c)| match acc {
            Some((_, bc)) if bc <= c => acc,
            _ => Some((l, c)),
        })?;

    let mut steps = Vec::new();
    let mut lv = vec![0; t_max + 1];
    let (mut t, mut l) = (t_max, end);
    lv[t] = l;
    while let Some((pt, pl, how)) = back[t][l] {
        steps.push(match how {
            Back::Idle => PlanStep::Idle { t: pt },
            Back::Charge => PlanStep::Charge { t: pt },
            Back::Serve(r) => PlanStep::Serve {
                reservation: r,
                t_start: pt,
                t_end: t,
            },
        });
        lv[pt..t].fill(pl);
        t = pt;
        l = pl;
    }
    debug_assert_eq!(t, 0);
    steps.reverse();
    Some(VehiclePlan {
        vehicle,
        steps,
        levels: lv,
        cost,
    })
}

struct Enumeration<'a> {
    dinst: &'a DiscretizedInstance,
    memo: HashMap<(usize, u64), Option<VehiclePlan>>,
    masks: Vec<u64>,
    assignment: Vec<Option<usize>>,
    best: Option<(f64, Vec<Option<usize>>, Vec<u64>)>,
}

impl Enumeration<'_> {
    fn plan(&mut self, v: usize, mask: u64) -> Option<VehiclePlan> {
        let d = self.dinst;
        let key = (d.vehicles[v].level_e0, mask);
        self.memo
            .entry(key)
            .or_insert_with(|| vehicle_dp(d, v, mask))
            .clone()
            .map(|p| VehiclePlan { vehicle: v, ..p })
    }

    fn go(&mut self, r: usize) {
        let d = self.dinst;
        if r == d.n_reservations() {
            let mut total = 0.0;
            for v in 0..d.n_vehicles() {
                match self.plan(v, self.masks[v]) {
                    Some(p) => total += p.cost,
                    None => return,
                }
            }
            for (res, a) in self.assignment.iter().enumerate() {
                if a.is_none() {
                    total += d.uncovered_cost(res);
                }
            }
            if self.best.as_ref().is_none_or(|b| total < b.0 - 1e-12) {
                self.best = Some((total, self.assignment.clone(), self.masks.clone()));
            }
            return;
        }
        // Lexicographic order: vehicles 0..n, then uncovered.
        for v in 0..d.n_vehicles() {
            let clash = (0..r).any(|q| self.masks[v] >> q & 1 == 1 && d.reservations[q].overlaps(&d.reservations[r]));
            if clash {
                continue;
            }
            self.masks[v] |= 1 << r;
            self.assignment[r] = Some(v);
            self.go(r + 1);
            self.masks[v] &= !(1 << r);
        }
        self.assignment[r] = None;
        self.go(r + 1);
    }
}

pub fn solve_oracle(dinst: &DiscretizedInstance, limits: &OracleLimits) -> Result<OracleResult, OracleError> {
    let space = ((dinst.n_vehicles() + 1) as f64).powi(dinst.n_reservations() as i32);
    if space > limits.max_assignments as f64 || dinst.n_reservations() >= 64 {
        return Err(OracleError::ScaleGuard {
            space,
            limit: limits.max_assignments,
        });
    }
    let mut e = Enumeration {
        dinst,
        memo: HashMap::new(),
        masks: vec![0; dinst.n_vehicles()],
        assignment: vec![None; dinst.n_reservations()],
        best: None,
    };
    e.go(0);
    let (cost, assignment, masks) = e.best.take().expect("the all-uncovered assignment is always feasible");
    let plans = masks
        .iter()
        .enumerate()
        .map(|(v, &m)| e.plan(v, m).expect("optimal assignment is feasible"))
        .collect();
    Ok(OracleResult {
        cost,
        assignment,
        plans,
    })
}

/// The second exact method: every path of every vehicle as a column, then
/// the exact master over that pool.
pub fn solve_by_path_enumeration(dinst: &DiscretizedInstance, limits: &OracleLimits) -> Result<f64, OracleError> {
    let graph = ScenarioGraph::build(dinst);
    let pool = ColumnPool::all_columns(&graph, limits.max_paths)?;
    let sol = solve_exact(&pool, dinst, None);
    Ok(sol.cost)
}

/// Runs both exact methods and fails if they disagree beyond `1e-6`.
pub fn cross_check(dinst: &DiscretizedInstance, limits: &OracleLimits) -> Result<OracleResult, OracleError> {
    let res = solve_oracle(dinst, limits)?;
    let paths = solve_by_path_enumeration(dinst, limits)?;
    if (res.cost - paths).abs() > 1e-6 {
        return Err(OracleError::Disagreement {
            assignment: res.cost,
            paths,
        });
    }
    Ok(res)
}
