//! Steepest-descent single-flip tabu search on a QUBO.

use std::fmt;

use fixedbitset::FixedBitSet;
use rand::Rng;

use super::anneal::{energy_of, fields, flip, to_bitset};
use crate::qubo::QuboModel;
use crate::seed;

#[derive(Debug, Clone, PartialEq)]
pub struct TabuParams {
    /// Iterations a flipped variable stays tabu.
    pub tenure: usize,
    pub max_iterations: usize,
    /// Restart from a fresh random state after this many moves without a
    /// new best; 0 disables restarts.
    pub stall_limit: usize,
    pub seed: u64,
}

impl TabuParams {
    /// Tenure `max(7, N/10)` capped at `N - 1`, `max(1000, 20 N)` moves, and a
    /// restart after `max(30, 2 N)` moves without improvement.
    pub fn for_model(m: &QuboModel, seed: u64) -> Self {
        let n = m.n_vars();
        TabuParams {
            tenure: (n / 10).max(7).min(n.saturating_sub(1)),
            max_iterations: (20 * n).max(1000),
            stall_limit: (2 * n).max(30),
            seed,
        }
    }
}

impl fmt::Display for TabuParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "tenure={} max_iterations={} stall_limit={}",
            self.tenure, self.max_iterations, self.stall_limit
        )
    }
}

/// Each iteration flips the best admissible bit: not tabu, or tabu but
/// leading to a new best energy. Equal moves are broken uniformly at random.
/// When every bit is tabu the one released soonest is flipped. After
/// `stall_limit` moves without a new best the walk restarts from a random
/// state; the best state seen is kept throughout.
pub fn tabu_qubo(m: &QuboModel, params: &TabuParams) -> (FixedBitSet, f64) {
    let n = m.n_vars();
    let adj = m.adjacency();
    let mut rng = seed::stream(params.seed, 0);
    let mut x: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
    let mut h = fields(&adj, &x);
    let mut e = energy_of(&adj, m.offset(), &x);
    let mut best = x.clone();
    let mut best_e = e;
    let mut tabu_until = vec![0usize; n];
    let mut last_best = 0;

    for it in 0..params.max_iterations {
        if params.stall_limit > 0 && it - last_best >= params.stall_limit {
            x.iter_mut().for_each(|b| *b = rng.gen());
            h = fields(&adj, &x);
            e = energy_of(&adj, m.offset(), &x);
            tabu_until.iter_mut().for_each(|t| *t = 0);
            last_best = it;
        }
        let mut pick: Option<(usize, f64)> = None;
        let mut ties = 0u32;
        for i in 0..n {
            let d = if x[i] { -h[i] } else { h[i] };
            if tabu_until[i] > it && e + d >= best_e - 1e-12 {
                continue;
            }
            match pick {
                Some((_, pd)) if d > pd + 1e-12 => {}
                Some((_, pd)) if d >= pd - 1e-12 => {
                    ties += 1;
                    if rng.gen_range(0..ties) == 0 {
                        pick = Some((i, d));
                    }
                }
                _ => {
                    pick = Some((i, d));
                    ties = 1;
                }
            }
        }
        let (i, d) = match pick {
            Some(p) => p,
            None => {
                let i = (0..n).min_by_key(|&i| (tabu_until[i], i)).expect("n >= 1");
                (i, if x[i] { -h[i] } else { h[i] })
            }
        };
        flip(&adj, &mut x, &mut h, i);
        e += d;
        tabu_until[i] = it + 1 + params.tenure;
        if e < best_e - 1e-12 {
            best_e = e;
            best.copy_from_slice(&x);
            last_best = it;
        }
        if it % n.max(64) == 0 {
            e = energy_of(&adj, m.offset(), &x);
            h = fields(&adj, &x);
        }
    }
    let x = to_bitset(&best);
    let e = m.energy(&x).expect("length matches");
    (x, e)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::tiny;
    use super::*;
    use crate::colgen::ColumnPool;
    use crate::model::{discretize, generate, PriceProfile};
    use crate::qubo;
    use crate::scenario_graph::ScenarioGraph;

    #[test]
    fn single_variable_sets_lambda() {
        let d = discretize(&generate(1, 1, 0, 4, PriceProfile::Flat).unwrap()).unwrap();
        let pool = ColumnPool::with_trivial(&ScenarioGraph::build(&d));
        let m = qubo::build(&pool, &d);
        let p = TabuParams::for_model(&m, 1);
        assert_eq!(p.tenure, 0);
        let (x, e) = tabu_qubo(&m, &p);
        assert!(x[0]);
        assert!((e - pool.column(0).cost).abs() < 1e-9);
    }

    #[test]
    fn defaults_scale_with_size() {
        let (d, pool) = tiny(3, 3, 5, 8);
        let m = qubo::build(&pool, &d);
        let p = TabuParams::for_model(&m, 0);
        assert_eq!(p.tenure, (m.n_vars() / 10).max(7).min(m.n_vars() - 1));
        assert_eq!(p.max_iterations, (20 * m.n_vars()).max(1000));
    }

    #[test]
    fn reported_energy_is_model_energy_and_deterministic() {
        let (d, pool) = tiny(13, 2, 4, 8);
        let m = qubo::build(&pool, &d);
        let p = TabuParams::for_model(&m, 8);
        let (x, e) = tabu_qubo(&m, &p);
        assert_eq!(e, m.energy(&x).unwrap());
        assert_eq!(tabu_qubo(&m, &p), (x, e));
    }
}
