//! Greedy repair of an arbitrary QUBO bit vector into a feasible partition.

use fixedbitset::FixedBitSet;

use super::{MasterSolution, Provenance};
use crate::colgen::ColumnPool;
use crate::model::DiscretizedInstance;

/// Admits the selected columns in ascending (cost, index) order whenever
/// their vehicle is still free and none of their reservations is taken,
/// then gives every free vehicle its trivial column. The `y` bits of `x`
/// are ignored; uncovered flags follow from the admitted columns.
pub fn greedy_repair(pool: &ColumnPool, dinst: &DiscretizedInstance, x: &FixedBitSet) -> MasterSolution {
    let mut selected: Vec<usize> = x.ones().take_while(|&i| i < pool.len()).collect();
    selected.sort_by(|&a, &b| pool.column(a).cost.total_cmp(&pool.column(b).cost).then(a.cmp(&b)));

    let mut assigned: Vec<Option<usize>> = vec![None; dinst.n_vehicles()];
    let mut taken = FixedBitSet::with_capacity(dinst.n_reservations());
    for p in selected {
        let col = pool.column(p);
        if assigned[col.vehicle].is_some() || col.served.iter().any(|&r| taken[r]) {
            continue;
        }
        assigned[col.vehicle] = Some(p);
        for &r in &col.served {
            taken.insert(r);
        }
    }
    let columns = assigned
        .iter()
        .enumerate()
        .map(|(v, a)| a.unwrap_or_else(|| pool.trivial(v)))
        .collect();
    MasterSolution::from_columns(pool, dinst, columns, Provenance::new("greedy_repair", None, ""))
}
