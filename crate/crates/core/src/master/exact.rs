//! Depth-first branch and bound, one vehicle per level.

use std::time::{Duration, Instant};

use fixedbitset::FixedBitSet;

use super::{net_costs, MasterSolution, Provenance};
use crate::colgen::ColumnPool;
use crate::model::DiscretizedInstance;

/// Wall clock is consulted once per this many nodes.
const CLOCK_EVERY: u64 = 1024;

struct Search<'a> {
    pool: &'a ColumnPool,
    /// Per vehicle: non-trivial columns by ascending (net cost, index),
    /// trivial column last.
    order: Vec<Vec<usize>>,
    net: Vec<f64>,
    served: FixedBitSet,
    chosen: Vec<usize>,
    best: Vec<usize>,
    best_net: f64,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

impl Search<'_> {
    fn conflicts(&self, p: usize) -> bool {
        self.pool.column(p).served.iter().any(|&r| self.served[r])
    }

    /// Lower bound on the net cost of vehicles `from..`: each takes its
    /// cheapest column that is compatible with what is already served.
    fn completion_bound(&self, from: usize) -> f64 {
        self.order[from..]
            .iter()
            .map(|cols| {
                cols.iter()
                    .filter(|&&p| !self.conflicts(p))
                    .map(|&p| self.net[p])
                    .fold(f64::INFINITY, f64::min)
            })
            .sum()
    }

    fn visit(&mut self, v: usize, running: f64) {
        self.nodes += 1;
        if self.nodes.is_multiple_of(CLOCK_EVERY) {
            if let Some(d) = self.deadline {
                if Instant::now() >= d {
                    self.timed_out = true;
                }
            }
        }
        if self.timed_out {
            return;
        }
        if v == self.order.len() {
            if running < self.best_net - 1e-12 {
                self.best_net = running;
                self.best.clone_from(&self.chosen);
            }
            return;
        }
        if running + self.completion_bound(v) >= self.best_net - 1e-12 {
            return;
        }
        for k in 0..self.order[v].len() {
            let p = self.order[v][k];
            if self.conflicts(p) {
                continue;
            }
            let served = &self.pool.column(p).served;
            for &r in served {
                self.served.insert(r);
            }
            self.chosen.push(p);
            self.visit(v + 1, running + self.net[p]);
            self.chosen.pop();
            for &r in &self.pool.column(p).served {
                self.served.set(r, false);
            }
            if self.timed_out {
                return;
            }
        }
    }
}

/// Optimal master solution over `pool`. If `time_limit` expires first, the
/// best solution found so far is returned with `proven_optimal` unset.
pub fn solve_exact(pool: &ColumnPool, dinst: &DiscretizedInstance, time_limit: Option<Duration>) -> MasterSolution {
    let start = Instant::now();
    let net = net_costs(pool, dinst);
    let order: Vec<Vec<usize>> = (0..dinst.n_vehicles())
        .map(|v| {
            let t = pool.trivial(v);
            let mut cols: Vec<usize> = pool.of_vehicle(v).iter().copied().filter(|&p| p != t).collect();
            cols.sort_by(|&a, &b| net[a].total_cmp(&net[b]).then(a.cmp(&b)));
            cols.push(t);
            cols
        })
        .collect();
    let trivial: Vec<usize> = (0..dinst.n_vehicles()).map(|v| pool.trivial(v)).collect();
    let trivial_net = trivial.iter().map(|&p| net[p]).sum();

    let mut s = Search {
        pool,
        order,
        net,
        served: FixedBitSet::with_capacity(dinst.n_reservations()),
        chosen: Vec::with_capacity(dinst.n_vehicles()),
        best: trivial,
        best_net: trivial_net,
        nodes: 0,
        deadline: time_limit.map(|l| start + l),
        timed_out: false,
    };
    s.visit(0, 0.0);

    let params = match time_limit {
        Some(l) => format!("time_limit_s={}", l.as_secs_f64()),
        None => "time_limit_s=none".to_string(),
    };
    let mut sol = MasterSolution::from_columns(pool, dinst, s.best, Provenance::new("exact", None, params));
    sol.proven_optimal = !s.timed_out;
    sol
}
