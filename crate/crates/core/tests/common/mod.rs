#![allow(dead_code)]

use evfleet::colgen::ColumnPool;
use evfleet::model::{discretize, generate_with, DiscretizedInstance, GeneratorConfig, PriceProfile};
use evfleet::scenario_graph::ScenarioGraph;
use evfleet::seed;
use rand::seq::SliceRandom;
use rand::Rng;

/// Tiny instance drawn from the acceptance family: n <= 3, r <= 6,
/// t_max in 6..=12, 4..=8 energy levels, charge step 1 or 2.
pub fn family_instance(case: u64) -> DiscretizedInstance {
    let mut rng = seed::stream(0xACCE, case);
    let n = rng.gen_range(1..=3);
    let r = rng.gen_range(0..=6);
    let t_max = rng.gen_range(6..=12);
    let levels = rng.gen_range(4..=8);
    let charge_step = rng.gen_range(1..=2);
    let cfg = GeneratorConfig {
        levels,
        charge_step,
        max_duration: Some(rng.gen_range(1..=4)),
        profile: if rng.gen() {
            PriceProfile::DayNight
        } else {
            PriceProfile::Flat
        },
        ..Default::default()
    };
    let inst = generate_with(rng.gen(), n, r, t_max, &cfg).expect("family parameters are valid");
    discretize(&inst).expect("generated instances discretize")
}

/// A pool with at most `max_vars` QUBO variables (columns plus
/// reservations): the trivial columns plus a random subset of the full
/// path pool of a small instance.
pub fn small_pool(case: u64, max_vars: usize) -> (DiscretizedInstance, ColumnPool) {
    let mut rng = seed::stream(0x5EED, case);
    loop {
        let n = rng.gen_range(1..=3);
        let r = rng.gen_range(1..=5);
        let cfg = GeneratorConfig {
            levels: rng.gen_range(3..=6),
            max_duration: Some(rng.gen_range(1..=3)),
            ..Default::default()
        };
        let t_max = rng.gen_range(4..=8);
        let d = discretize(&generate_with(rng.gen(), n, r, t_max, &cfg).unwrap()).unwrap();
        let full = ColumnPool::all_columns(&ScenarioGraph::build(&d), 1_000_000).unwrap();
        let budget = max_vars.saturating_sub(n + r);
        let mut extra: Vec<usize> = (0..full.len()).filter(|&p| !full.is_trivial(p)).collect();
        if budget < 2 || extra.len() < 2 {
            continue;
        }
        extra.shuffle(&mut rng);
        extra.truncate(rng.gen_range(2..=budget.min(extra.len())));
        let pool = full.retain(|p, _| extra.contains(&p));
        assert!(pool.len() + r <= max_vars);
        return (d, pool);
    }
}
