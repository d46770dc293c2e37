//! Annealing restricted to feasible partitions.
//!
//! The state is one column per vehicle with no reservation served twice.
//! A move proposes another column for a random vehicle; proposals that would
//! serve a reservation already held by a different vehicle are rejected, so
//! every visited state is feasible. Proposing the trivial column releases
//! the vehicle.

use rand::Rng;
use rayon::prelude::*;

use super::anneal::AnnealSchedule;
use super::{net_costs, MasterSolution, Provenance};
use crate::colgen::ColumnPool;
use crate::model::DiscretizedInstance;
use crate::seed;

/// Temperatures from the spread of net column costs within each vehicle.
pub fn feasible_schedule(pool: &ColumnPool, dinst: &DiscretizedInstance, seed: u64) -> AnnealSchedule {
    let net = net_costs(pool, dinst);
    let mut hi: f64 = 0.0;
    let mut lo = f64::INFINITY;
    for v in 0..dinst.n_vehicles() {
        let cols = pool.of_vehicle(v);
        for (a, &p) in cols.iter().enumerate() {
            for &q in &cols[a + 1..] {
                let d = (net[p] - net[q]).abs();
                hi = hi.max(d);
                if d > 1e-12 {
                    lo = lo.min(d);
                }
            }
        }
    }
    AnnealSchedule::spanning(hi, lo, seed)
}

struct Chain<'a> {
    pool: &'a ColumnPool,
    net: &'a [f64],
    columns: Vec<usize>,
    owner: Vec<Option<usize>>,
    total: f64,
}

impl Chain<'_> {
    fn uncovered(&self) -> Vec<bool> {
        self.owner.iter().map(Option::is_none).collect()
    }

    fn compatible(&self, v: usize, q: usize) -> bool {
        self.pool
            .column(q)
            .served
            .iter()
            .all(|&r| self.owner[r].is_none_or(|w| w == v))
    }

    fn assign(&mut self, v: usize, q: usize) {
        let old = self.columns[v];
        for &r in &self.pool.column(old).served {
            self.owner[r] = None;
        }
        for &r in &self.pool.column(q).served {
            self.owner[r] = Some(v);
        }
        self.total += self.net[q] - self.net[old];
        self.columns[v] = q;
    }
}

fn run_chain(
    pool: &ColumnPool,
    dinst: &DiscretizedInstance,
    net: &[f64],
    sched: &AnnealSchedule,
    restart: usize,
    observe: &mut dyn FnMut(&[usize], &[bool]),
) -> (Vec<usize>, f64) {
    let n = dinst.n_vehicles();
    let columns: Vec<usize> = (0..n).map(|v| pool.trivial(v)).collect();
    let total = columns.iter().map(|&p| net[p]).sum();
    let mut c = Chain {
        pool,
        net,
        columns,
        owner: vec![None; dinst.n_reservations()],
        total,
    };
    observe(&c.columns, &c.uncovered());
    let mut best = c.columns.clone();
    let mut best_total = c.total;
    let mut rng = seed::stream(sched.seed, restart as u64);
    let moves = pool.len().max(n);

    for s in 0..sched.sweeps {
        let temp = sched.temperature(s);
        for _ in 0..moves {
            let v = rng.gen_range(0..n);
            let cols = pool.of_vehicle(v);
            if cols.len() < 2 {
                continue;
            }
            let cur = c.columns[v];
            let mut q = cols[rng.gen_range(0..cols.len() - 1)];
            if q == cur {
                q = cols[cols.len() - 1];
            }
            if !c.compatible(v, q) {
                continue;
            }
            let d = net[q] - net[cur];
            if d <= 0.0 || rng.gen::<f64>() < (-d / temp).exp() {
                c.assign(v, q);
                observe(&c.columns, &c.uncovered());
                if c.total < best_total - 1e-12 {
                    best_total = c.total;
                    best.clone_from(&c.columns);
                }
            }
        }
    }
    (best, best_total)
}

fn finish(
    pool: &ColumnPool,
    dinst: &DiscretizedInstance,
    sched: &AnnealSchedule,
    runs: Vec<(Vec<usize>, f64)>,
) -> MasterSolution {
    let (cols, _) = runs
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 - 1e-12 { b } else { a })
        .expect("at least one restart");
    let prov = Provenance::new("feasible-anneal", Some(sched.seed), sched.to_string());
    MasterSolution::from_columns(pool, dinst, cols, prov)
}

/// Best feasible solution over all restarts, which run in parallel.
pub fn feasible_anneal(pool: &ColumnPool, dinst: &DiscretizedInstance, sched: &AnnealSchedule) -> MasterSolution {
    let net = net_costs(pool, dinst);
    let runs = (0..sched.restarts.max(1))
        .into_par_iter()
        .map(|k| run_chain(pool, dinst, &net, sched, k, &mut |_, _| {}))
        .collect();
    finish(pool, dinst, sched, runs)
}

/// Same result as [`feasible_anneal`], run sequentially, calling `observe`
/// with every visited state (columns per vehicle, uncovered flags).
pub fn feasible_anneal_with(
    pool: &ColumnPool,
    dinst: &DiscretizedInstance,
    sched: &AnnealSchedule,
    mut observe: impl FnMut(&[usize], &[bool]),
) -> MasterSolution {
    let net = net_costs(pool, dinst);
    let runs = (0..sched.restarts.max(1))
        .map(|k| run_chain(pool, dinst, &net, sched, k, &mut observe))
        .collect();
    finish(pool, dinst, sched, runs)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::tiny;
    use super::super::{check, solve_exact};
    use super::*;

    #[test]
    fn every_visited_state_is_feasible() {
        let (d, pool) = tiny(21, 3, 5, 8);
        let sched = feasible_schedule(&pool, &d, 4);
        let mut visited = 0usize;
        let mut first = None;
        let sol = feasible_anneal_with(&pool, &d, &sched, |cols, unc| {
            if first.is_none() {
                first = Some(cols.to_vec());
            }
            check(&pool, &d, cols, unc).unwrap();
            visited += 1;
        });
        assert!(visited > 1);
        assert_eq!(first.unwrap(), (0..3).map(|v| pool.trivial(v)).collect::<Vec<_>>());
        assert_eq!(sol, feasible_anneal(&pool, &d, &sched));
    }

    #[test]
    fn reaches_exact_on_small_pool() {
        let (d, pool) = tiny(22, 2, 4, 8);
        let sol = feasible_anneal(&pool, &d, &feasible_schedule(&pool, &d, 1));
        let exact = solve_exact(&pool, &d, None);
        assert!((sol.cost - exact.cost).abs() < 1e-9);
    }
}
