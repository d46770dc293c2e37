//! Single-bit-flip simulated annealing on a QUBO.

use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::qubo::{Adjacency, QuboModel};
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct AnnealSchedule {
    pub t_initial: f64,
    pub t_final: f64,
    pub sweeps: usize,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScheduleError {
    #[error("temperatures must be finite and positive (got {t_initial} -> {t_final})")]
    Temperature { t_initial: f64, t_final: f64 },
    #[error("sweeps and restarts must be at least 1")]
    Empty,
}

impl AnnealSchedule {
    pub const DEFAULT_SWEEPS: usize = 200;
    pub const DEFAULT_RESTARTS: usize = 20;

    /// Spans from ten times the largest possible flip change down to a
    /// hundredth of the smallest nonzero coefficient.
    pub fn for_model(m: &QuboModel, seed: u64) -> Self {
        let adj = m.adjacency();
        let max_flip = (0..m.n_vars())
            .map(|i| adj.diag[i].abs() + adj.neighbours[i].iter().map(|(_, q)| q.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        let min_coef = m
            .coefficients()
            .values()
            .map(|v| v.abs())
            .filter(|&v| v > 0.0)
            .fold(f64::INFINITY, f64::min);
        Self::spanning(max_flip, min_coef, seed)
    }

    pub(crate) fn spanning(max_delta: f64, min_delta: f64, seed: u64) -> Self {
        let (hi, lo) = if max_delta > 0.0 && min_delta.is_finite() && min_delta > 0.0 {
            (max_delta, min_delta)
        } else {
            (1.0, 1.0)
        };
        AnnealSchedule {
            t_initial: 10.0 * hi,
            t_final: 0.01 * lo,
            sweeps: Self::DEFAULT_SWEEPS,
            restarts: Self::DEFAULT_RESTARTS,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), ScheduleError> {
        let ok = |t: f64| t.is_finite() && t > 0.0;
        if !ok(self.t_initial) || !ok(self.t_final) {
            return Err(ScheduleError::Temperature {
                t_initial: self.t_initial,
                t_final: self.t_final,
            });
        }
        if self.sweeps == 0 || self.restarts == 0 {
            return Err(ScheduleError::Empty);
        }
        Ok(())
    }

    /// Temperature of sweep `s`, geometric from `t_initial` to `t_final`.
    pub fn temperature(&self, s: usize) -> f64 {
        if self.sweeps <= 1 {
            return self.t_initial;
        }
        let frac = s as f64 / (self.sweeps - 1) as f64;
        self.t_initial * (self.t_final / self.t_initial).powf(frac)
    }
}

impl fmt::Display for AnnealSchedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "t_initial={} t_final={} sweeps={} restarts={}",
            self.t_initial, self.t_final, self.sweeps, self.restarts
        )
    }
}

/// Local fields are recomputed from scratch this often, in sweeps.
const FIELD_RESYNC: usize = 25;

pub(crate) fn fields(adj: &Adjacency, x: &[bool]) -> Vec<f64> {
    (0..x.len())
        .map(|i| {
            adj.diag[i]
                + adj.neighbours[i]
                    .iter()
                    .filter(|&&(j, _)| x[j])
                    .map(|&(_, q)| q)
                    .sum::<f64>()
        })
        .collect()
}

pub(crate) fn energy_of(adj: &Adjacency, offset: f64, x: &[bool]) -> f64 {
    let mut e = offset;
    for i in (0..x.len()).filter(|&i| x[i]) {
        e += adj.diag[i];
        e += adj.neighbours[i]
            .iter()
            .filter(|&&(j, _)| j > i && x[j])
            .map(|&(_, q)| q)
            .sum::<f64>();
    }
    e
}

/// Flips bit `i`, keeping the local fields `h` in sync.
pub(crate) fn flip(adj: &Adjacency, x: &mut [bool], h: &mut [f64], i: usize) {
    x[i] = !x[i];
    let sign = if x[i] { 1.0 } else { -1.0 };
    for &(j, q) in &adj.neighbours[i] {
        h[j] += sign * q;
    }
}

pub(crate) fn to_bitset(x: &[bool]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(x.len());
    for (i, &v) in x.iter().enumerate() {
        b.set(i, v);
    }
    b
}

fn chain(m: &QuboModel, adj: &Adjacency, sched: &AnnealSchedule, restart: usize) -> (Vec<bool>, f64) {
    let n = m.n_vars();
    let mut rng = seed::stream(sched.seed, restart as u64);
    let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut h = fields(adj, &x);
    let mut e = energy_of(adj, m.offset(), &x);
    let mut best = x.clone();
    let mut best_e = e;

    for s in 0..sched.sweeps {
        let temp = sched.temperature(s);
        for i in 0..n {
            let d = if x[i] { -h[i] } else { h[i] };
            if d <= 0.0 || rng.gen::<f64>() < (-d / temp).exp() {
                flip(adj, &mut x, &mut h, i);
                e += d;
                if e < best_e - 1e-12 {
                    best_e = e;
                    best.copy_from_slice(&x);
                }
            }
        }
        let audit = energy_of(adj, m.offset(), &x);
        assert!(
            (audit - e).abs() <= 1e-6 * (1.0 + audit.abs()),
            "incremental energy drifted: {e} vs {audit}"
        );
        e = audit;
        if s % FIELD_RESYNC == FIELD_RESYNC - 1 {
            h = fields(adj, &x);
        }
    }
    let exact = energy_of(adj, m.offset(), &best);
    (best, exact)
}

/// Best state over all restarts, with its energy. Restarts run in parallel
/// on independent streams; ties go to the lowest restart index.
pub fn anneal_qubo(m: &QuboModel, sched: &AnnealSchedule) -> (FixedBitSet, f64) {
    let adj = m.adjacency();
    let runs: Vec<(Vec<bool>, f64)> = (0..sched.restarts.max(1))
        .into_par_iter()
        .map(|k| chain(m, &adj, sched, k))
        .collect();
    let (x, _) = runs
        .into_iter()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("at least one restart");
    let x = to_bitset(&x);
    let e = m.energy(&x).expect("length matches");
    (x, e)
}
