//! Time-expanded graph of single-vehicle exploitation scenarios.
//!
//! One node per (energy level, timestep) plus a source and a sink. Every
//! source-to-sink path is a feasible plan for one vehicle: it enters at the
//! vehicle's initial level, then at each step idles, charges, or serves a
//! reservation, and finally pays the future-cost penalty on the terminal arc.
//! Time strictly increases along every grid arc, so node ids ordered by
//! `(t, level)` are already a topological order.

use serde::Serialize;
use thiserror::Error;

use crate::model::DiscretizedInstance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct NodeId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Source,
    Sink,
    Grid { level: usize, t: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArcKind {
    VehicleSelect { vehicle: usize },
    Charge,
    Idle,
    Serve { reservation: usize },
    Terminal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Arc {
    pub from: NodeId,
    pub to: NodeId,
    pub kind: ArcKind,
    pub base_cost: f64,
}

/// One vehicle exploitation plan: a source-to-sink path.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Column {
    pub vehicle: usize,
    pub arcs: Vec<usize>,
    /// Served reservation ids, ascending.
    pub served: Vec<usize>,
    /// Sum of base arc costs; duals never enter it.
    pub cost: f64,
}

impl Column {
    /// Stable 64-bit FNV-1a fingerprint of `(vehicle, arcs)`.
    pub fn fingerprint(&self) -> u64 {
        const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h = OFFSET;
        for word in std::iter::once(self.vehicle).chain(self.arcs.iter().copied()) {
            for byte in (word as u64).to_le_bytes() {
                h ^= byte as u64;
                h = h.wrapping_mul(PRIME);
            }
        }
        h
    }

    pub fn serves(&self, reservation: usize) -> bool {
        self.served.binary_search(&reservation).is_ok()
    }
}

/// Dual bonuses subtracted from Serve arcs during pricing.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ArcWeights {
    reservation_bonus: Vec<f64>,
}

impl ArcWeights {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn from_bonuses(bonuses: Vec<f64>) -> Self {
        ArcWeights {
            reservation_bonus: bonuses,
        }
    }

    pub fn set(&mut self, reservation: usize, bonus: f64) {
        if self.reservation_bonus.len() <= reservation {
            self.reservation_bonus.resize(reservation + 1, 0.0);
        }
        self.reservation_bonus[reservation] = bonus;
    }

    pub fn bonus(&self, reservation: usize) -> f64 {
        self.reservation_bonus.get(reservation).copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ArcCounts {
    pub vehicle_select: usize,
    pub charge: usize,
    pub idle: usize,
    pub serve: usize,
    pub terminal: usize,
}

impl ArcCounts {
    pub fn total(&self) -> usize {
        self.vehicle_select + self.charge + self.idle + self.serve + self.terminal
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("vehicle {0} does not exist")]
    UnknownVehicle(usize),
    #[error("more than {limit} paths for vehicle {vehicle}")]
    TooManyPaths { vehicle: usize, limit: usize },
    #[error("column is not a valid source-to-sink path: {0}")]
    InvalidColumn(String),
}

#[derive(Debug, Clone)]
pub struct ScenarioGraph {
    levels: usize,
    t_max: usize,
    n_reservations: usize,
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<usize>>,
    /// Incoming arcs sorted by `(from, arc id)`.
    in_arcs: Vec<Vec<usize>>,
    /// Arc id of each vehicle's VehicleSelect arc.
    vehicle_arcs: Vec<usize>,
}

impl ScenarioGraph {
    pub fn build(dinst: &DiscretizedInstance) -> Self {
        let levels = dinst.i_max + 1;
        let t_max = dinst.t_max;
        let n_nodes = levels * (t_max + 1) + 2;
        let mut g = ScenarioGraph {
            levels,
            t_max,
            n_reservations: dinst.n_reservations(),
            arcs: Vec::new(),
            out_arcs: vec![Vec::new(); n_nodes],
            in_arcs: vec![Vec::new(); n_nodes],
            vehicle_arcs: Vec::with_capacity(dinst.n_vehicles()),
        };

        for v in &dinst.vehicles {
            let id = g.push_arc(
                g.source(),
                g.grid(v.level_e0, 0),
                ArcKind::VehicleSelect { vehicle: v.id },
                0.0,
            );
            g.vehicle_arcs.push(id);
        }

        let k = dinst.charge_step;
        for t in 0..t_max {
            let charge_cost = dinst.charge_cost(t);
            for level in 0..levels {
                let here = g.grid(level, t);
                g.push_arc(here, g.grid(level, t + 1), ArcKind::Idle, 0.0);
                if level + k <= dinst.i_max {
                    g.push_arc(here, g.grid(level + k, t + 1), ArcKind::Charge, charge_cost);
                }
            }
        }

        for r in &dinst.reservations {
            for level in r.level_res..levels {
                g.push_arc(
                    g.grid(level, r.t_start),
                    g.grid(level - r.level_res, r.t_end),
                    ArcKind::Serve { reservation: r.id },
                    0.0,
                );
            }
        }

        for level in 0..levels {
            g.push_arc(
                g.grid(level, t_max),
                g.sink(),
                ArcKind::Terminal,
                dinst.terminal_cost(level),
            );
        }

        let arcs = &g.arcs;
        for list in &mut g.in_arcs {
            list.sort_by_key(|&a| (arcs[a].from, a));
        }
        g
    }

    fn push_arc(&mut self, from: NodeId, to: NodeId, kind: ArcKind, base_cost: f64) -> usize {
        let id = self.arcs.len();
        self.arcs.push(Arc {
            from,
            to,
            kind,
            base_cost,
        });
        self.out_arcs[from.0].push(id);
        self.in_arcs[to.0].push(id);
        id
    }

    pub fn source(&self) -> NodeId {
        NodeId(0)
    }

    pub fn sink(&self) -> NodeId {
        NodeId(self.node_count() - 1)
    }

    pub fn grid(&self, level: usize, t: usize) -> NodeId {
        debug_assert!(level < self.levels && t <= self.t_max);
        NodeId(1 + t * self.levels + level)
    }

    pub fn node(&self, id: NodeId) -> Node {
        if id == self.source() {
            Node::Source
        } else if id == self.sink() {
            Node::Sink
        } else {
            let g = id.0 - 1;
            Node::Grid {
                level: g % self.levels,
                t: g / self.levels,
            }
        }
    }

    pub fn node_count(&self) -> usize {
        self.levels * (self.t_max + 1) + 2
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> &Arc {
        &self.arcs[id]
    }

    pub fn out_arcs(&self, node: NodeId) -> &[usize] {
        &self.out_arcs[node.0]
    }

    pub fn n_vehicles(&self) -> usize {
        self.vehicle_arcs.len()
    }

    pub fn n_reservations(&self) -> usize {
        self.n_reservations
    }

    pub fn arc_counts(&self) -> ArcCounts {
        let mut c = ArcCounts::default();
        for a in &self.arcs {
            match a.kind {
                ArcKind::VehicleSelect { .. } => c.vehicle_select += 1,
                ArcKind::Charge => c.charge += 1,
                ArcKind::Idle => c.idle += 1,
                ArcKind::Serve { .. } => c.serve += 1,
                ArcKind::Terminal => c.terminal += 1,
            }
        }
        c
    }

    fn check_vehicle(&self, vehicle: usize) -> Result<usize, GraphError> {
        self.vehicle_arcs
            .get(vehicle)
            .copied()
            .ok_or(GraphError::UnknownVehicle(vehicle))
    }

    fn effective_cost(&self, arc: usize, w: &ArcWeights) -> f64 {
        let a = &self.arcs[arc];
        match a.kind {
            ArcKind::Serve { reservation } => a.base_cost - w.bonus(reservation),
            _ => a.base_cost,
        }
    }

    /// Builds a column from a raw arc list, recomputing `served` and `cost`.
    pub fn column_from_arcs(&self, vehicle: usize, arcs: Vec<usize>) -> Column {
        let mut served: Vec<usize> = arcs
            .iter()
            .filter_map(|&a| match self.arcs[a].kind {
                ArcKind::Serve { reservation } => Some(reservation),
                _ => None,
            })
            .collect();
        served.sort_unstable();
        let unique = served.windows(2).all(|w| w[0] != w[1]);
        assert!(unique, "a path cannot serve the same reservation twice");
        let cost = arcs.iter().map(|&a| self.arcs[a].base_cost).sum();
        Column {
            vehicle,
            arcs,
            served,
            cost,
        }
    }

    /// Checks that a column is a connected source-to-sink path for its
    /// vehicle and that its stored fields match the arcs.
    pub fn validate_column(&self, col: &Column) -> Result<(), GraphError> {
        let invalid = |m: String| Err(GraphError::InvalidColumn(m));
        let select = self.check_vehicle(col.vehicle)?;
        if col.arcs.first() != Some(&select) {
            return invalid(format!("first arc is not VehicleSelect({})", col.vehicle));
        }
        match col.arcs.last() {
            Some(&a) if self.arcs.get(a).map(|a| a.kind) == Some(ArcKind::Terminal) => {}
            _ => return invalid("last arc is not Terminal".into()),
        }
        for pair in col.arcs.windows(2) {
            let (a, b) = (&self.arcs[pair[0]], &self.arcs[pair[1]]);
            if a.to != b.from {
                return invalid(format!("arcs {} and {} are not adjacent", pair[0], pair[1]));
            }
        }
        let rebuilt = self.column_from_arcs(col.vehicle, col.arcs.clone());
        if rebuilt.served != col.served {
            return invalid("served set does not match Serve arcs".into());
        }
        if (rebuilt.cost - col.cost).abs() > 1e-9 * (1.0 + col.cost.abs()) {
            return invalid(format!("stored cost {} != arc sum {}", col.cost, rebuilt.cost));
        }
        Ok(())
    }

    /// The all-idle plan for `vehicle`.
    pub fn trivial_column(&self, vehicle: usize) -> Result<Column, GraphError> {
        let select = self.check_vehicle(vehicle)?;
        let mut arcs = vec![select];
        let mut node = self.arcs[select].to;
        while node != self.sink() {
            let next = self.out_arcs[node.0]
                .iter()
                .copied()
                .find(|&a| matches!(self.arcs[a].kind, ArcKind::Idle | ArcKind::Terminal))
                .expect("every grid node has an idle or terminal arc");
            arcs.push(next);
            node = self.arcs[next].to;
        }
        Ok(self.column_from_arcs(vehicle, arcs))
    }

    /// Minimum effective-cost plan for `vehicle` under reservation bonuses `w`.
    ///
    /// Single pass over nodes in topological order. On equal cost the
    /// predecessor with the smallest node id wins, then the smallest arc id.
    /// Returns the column (base costs) and its weighted cost.
    pub fn cheapest_scenario(&self, vehicle: usize, w: &ArcWeights) -> Result<(Column, f64), GraphError> {
        let select = self.check_vehicle(vehicle)?;
        let n = self.node_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![usize::MAX; n];
        dist[self.source().0] = 0.0;

        let entry = self.arcs[select].to;
        for node in entry.0..n {
            let mut best = f64::INFINITY;
            let mut best_arc = usize::MAX;
            for &a in &self.in_arcs[node] {
                let arc = &self.arcs[a];
                if arc.from == self.source() && a != select {
                    continue;
                }
                let d = dist[arc.from.0];
                if d == f64::INFINITY {
                    continue;
                }
                let cand = d + self.effective_cost(a, w);
                if cand < best {
                    best = cand;
                    best_arc = a;
                }
            }
            dist[node] = best;
            pred[node] = best_arc;
        }

        let sink = self.sink().0;
        let weighted = dist[sink];
        debug_assert!(weighted.is_finite(), "the all-idle path always exists");
        let mut arcs = Vec::with_capacity(self.t_max + 2);
        let mut node = sink;
        while node != self.source().0 {
            let a = pred[node];
            arcs.push(a);
            node = self.arcs[a].from.0;
        }
        arcs.reverse();
        let col = self.column_from_arcs(vehicle, arcs);

        let bonus: f64 = col.served.iter().map(|&r| w.bonus(r)).sum();
        debug_assert!(
            (col.cost - bonus - weighted).abs() <= 1e-9 * (1.0 + weighted.abs() + bonus.abs()),
            "weighted cost must equal base cost minus bonuses"
        );
        Ok((col, weighted))
    }

    /// Every source-to-sink path of `vehicle`, in depth-first arc order.
    pub fn enumerate_paths(&self, vehicle: usize, limit: usize) -> Result<Vec<Column>, GraphError> {
        let mut out = Vec::new();
        self.for_each_path(vehicle, limit, |arcs| {
            out.push(self.column_from_arcs(vehicle, arcs.to_vec()))
        })?;
        Ok(out)
    }

    /// Calls `visit` with the arc list of every path of `vehicle`. Fails once
    /// more than `limit` paths have been seen.
    pub fn for_each_path(
        &self,
        vehicle: usize,
        limit: usize,
        mut visit: impl FnMut(&[usize]),
    ) -> Result<usize, GraphError> {
        let select = self.check_vehicle(vehicle)?;
        let sink = self.sink();
        let mut count = 0usize;
        let mut path = vec![select];
        // Stack of (node, next out-arc position).
        let mut stack = vec![(self.arcs[select].to, 0usize)];
        while let Some(&mut (node, ref mut pos)) = stack.last_mut() {
            if node == sink {
                count += 1;
                if count > limit {
                    return Err(GraphError::TooManyPaths { vehicle, limit });
                }
                visit(&path);
                stack.pop();
                path.pop();
                continue;
            }
            let outs = &self.out_arcs[node.0];
            if *pos < outs.len() {
                let a = outs[*pos];
                *pos += 1;
                path.push(a);
                stack.push((self.arcs[a].to, 0));
            } else {
                stack.pop();
                path.pop();
            }
        }
        Ok(count)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{discretize, generate_with, DiscreteReservation, DiscreteVehicle, GeneratorConfig};
    use proptest::prelude::*;

    pub(crate) fn tiny(
        t_max: usize,
        i_max: usize,
        k: usize,
        prices: Vec<f64>,
        alpha: f64,
        vehicles: &[usize],
        reservations: &[(usize, usize, usize)],
    ) -> DiscretizedInstance {
        DiscretizedInstance {
            t_max,
            dt_hours: 1.0,
            e_cap: i_max as f64,
            delta_e: 1.0,
            i_max,
            p_max: k as f64,
            charge_step: k,
            alpha,
            c_uncov: 1.0,
            prices,
            vehicles: vehicles
                .iter()
                .enumerate()
                .map(|(id, &level_e0)| DiscreteVehicle { id, level_e0 })
                .collect(),
            reservations: reservations
                .iter()
                .enumerate()
                .map(|(id, &(t_start, t_end, level_res))| DiscreteReservation {
                    id,
                    t_start,
                    t_end,
                    level_res,
                })
                .collect(),
        }
    }

    #[test]
    fn hand_counted_single_step_graph() {
        let d = tiny(1, 1, 1, vec![0.5], 1.0, &[1], &[]);
        let g = ScenarioGraph::build(&d);
        assert_eq!(g.node_count(), 2 * 2 + 2);
        let c = g.arc_counts();
        assert_eq!(c.vehicle_select, 1);
        assert_eq!(c.terminal, 2);
        assert_eq!(c.charge, 1);
        assert_eq!(c.serve, 0);
        let from_top = g.grid(1, 0);
        let kinds: Vec<_> = g.out_arcs(from_top).iter().map(|&a| g.arc(a).kind).collect();
        assert_eq!(kinds, vec![ArcKind::Idle]);
        let from_bottom = g.grid(0, 0);
        let kinds: Vec<_> = g.out_arcs(from_bottom).iter().map(|&a| g.arc(a).kind).collect();
        assert_eq!(kinds, vec![ArcKind::Idle, ArcKind::Charge]);
    }

    #[test]
    fn full_energy_reservation_has_one_serve_arc() {
        let d = tiny(4, 3, 1, vec![1.0; 4], 0.0, &[0], &[(1, 3, 3)]);
        let g = ScenarioGraph::build(&d);
        assert_eq!(g.arc_counts().serve, 1);
        let serve = g
            .arcs()
            .iter()
            .find(|a| matches!(a.kind, ArcKind::Serve { .. }))
            .unwrap();
        assert_eq!(g.node(serve.from), Node::Grid { level: 3, t: 1 });
        assert_eq!(g.node(serve.to), Node::Grid { level: 0, t: 3 });
    }

    #[test]
    fn trivial_column_costs() {
        let d = tiny(3, 4, 1, vec![1.0; 3], 0.0, &[4], &[]);
        let g = ScenarioGraph::build(&d);
        let col = g.trivial_column(0).unwrap();
        assert_eq!(col.cost, 0.0);
        assert!(col.served.is_empty());
        assert_eq!(col.arcs.len(), 3 + 2);

        let mut d = tiny(3, 10, 1, vec![1.0; 3], 2.0, &[0], &[]);
        d.e_cap = 10.0;
        let g = ScenarioGraph::build(&d);
        let col = g.trivial_column(0).unwrap();
        assert_eq!(col.cost, 20.0);
        g.validate_column(&col).unwrap();
    }

    #[test]
    fn idle_is_cheapest_without_incentives() {
        let d = tiny(4, 4, 1, vec![0.3, 0.1, 0.2, 0.4], 0.0, &[1], &[]);
        let g = ScenarioGraph::build(&d);
        let (col, w) = g.cheapest_scenario(0, &ArcWeights::zero()).unwrap();
        assert_eq!(w, 0.0);
        assert_eq!(col, g.trivial_column(0).unwrap());

        // A free reservation ties with idling; only the cost is pinned.
        let d = tiny(4, 4, 1, vec![0.3, 0.1, 0.2, 0.4], 0.0, &[1], &[(0, 2, 1)]);
        let g = ScenarioGraph::build(&d);
        let (_, w) = g.cheapest_scenario(0, &ArcWeights::zero()).unwrap();
        assert_eq!(w, 0.0);
    }

    #[test]
    fn prohibitive_prices_give_the_trivial_plan() {
        let d = tiny(3, 4, 2, vec![1e6; 3], 0.0, &[2], &[]);
        let g = ScenarioGraph::build(&d);
        let (col, _) = g.cheapest_scenario(0, &ArcWeights::zero()).unwrap();
        assert_eq!(col, g.trivial_column(0).unwrap());
    }

    #[test]
    fn unknown_vehicle() {
        let d = tiny(2, 2, 1, vec![1.0; 2], 0.0, &[0], &[]);
        let g = ScenarioGraph::build(&d);
        assert_eq!(g.trivial_column(3), Err(GraphError::UnknownVehicle(3)));
        assert!(g.cheapest_scenario(1, &ArcWeights::zero()).is_err());
    }

    fn brute_force_min(g: &ScenarioGraph, vehicle: usize, w: &ArcWeights) -> f64 {
        g.enumerate_paths(vehicle, 1_000_000)
            .unwrap()
            .iter()
            .map(|c| c.cost - c.served.iter().map(|&r| w.bonus(r)).sum::<f64>())
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn expensive_future_charges_to_full_on_cheapest_steps() {
        // alpha above every price: each charged level pays for itself.
        let d = tiny(4, 3, 1, vec![0.4, 0.1, 0.3, 0.2], 0.5, &[1], &[]);
        let g = ScenarioGraph::build(&d);
        let (col, w) = g.cheapest_scenario(0, &ArcWeights::zero()).unwrap();
        let charged: Vec<usize> = col
            .arcs
            .iter()
            .filter(|&&a| g.arc(a).kind == ArcKind::Charge)
            .map(|&a| match g.node(g.arc(a).from) {
                Node::Grid { t, .. } => t,
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(charged, vec![1, 3]);
        assert!((w - 0.3).abs() < 1e-12);
        assert!((w - brute_force_min(&g, 0, &ArcWeights::zero())).abs() < 1e-12);
    }

    #[test]
    fn large_bonus_pulls_the_reservation_in() {
        let d = tiny(4, 3, 1, vec![0.2; 4], 0.1, &[2], &[(1, 3, 3), (0, 1, 1)]);
        let g = ScenarioGraph::build(&d);
        let mut w = ArcWeights::zero();
        w.set(0, 100.0);
        let (col, wc) = g.cheapest_scenario(0, &w).unwrap();
        assert!(col.serves(0));
        assert!((wc - brute_force_min(&g, 0, &w)).abs() < 1e-12);
        assert!((wc - (col.cost - 100.0)).abs() < 1e-12);
    }

    /// Arc counts from the closed-form rules, without looking at the graph.
    fn counted(d: &DiscretizedInstance) -> ArcCounts {
        let mut c = ArcCounts {
            vehicle_select: d.n_vehicles(),
            terminal: d.i_max + 1,
            ..Default::default()
        };
        for _t in 0..d.t_max {
            for level in 0..=d.i_max {
                c.idle += 1;
                if level + d.charge_step <= d.i_max {
                    c.charge += 1;
                }
            }
        }
        for r in &d.reservations {
            c.serve += (0..=d.i_max).filter(|&l| l >= r.level_res).count();
        }
        c
    }

    fn family(seed: u64, n: usize, r: usize, t_max: usize, levels: usize, k: usize) -> DiscretizedInstance {
        let cfg = GeneratorConfig {
            levels,
            charge_step: k.min(levels),
            max_duration: Some(3),
            ..Default::default()
        };
        discretize(&generate_with(seed, n, r, t_max, &cfg).unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn arc_counts_match_enumeration(
            seed in any::<u64>(), n in 1usize..4, r in 0usize..6,
            t_max in 1usize..8, levels in 1usize..6, k in 1usize..3,
        ) {
            let d = family(seed, n, r, t_max, levels, k);
            let g = ScenarioGraph::build(&d);
            prop_assert_eq!(g.arc_counts(), counted(&d));
            prop_assert_eq!(g.node_count(), (d.i_max + 1) * (t_max + 1) + 2);
            prop_assert!(g.arc_counts().serve <= r * (d.i_max + 1));
            for a in g.arcs() {
                match (g.node(a.from), g.node(a.to)) {
                    (Node::Grid { t: t0, .. }, Node::Grid { t: t1, .. }) => prop_assert!(t1 > t0),
                    (Node::Source, Node::Grid { t, .. }) => prop_assert_eq!(t, 0),
                    (Node::Grid { t, .. }, Node::Sink) => prop_assert_eq!(t, t_max),
                    other => prop_assert!(false, "unexpected arc {:?}", other),
                }
            }
        }

        #[test]
        fn dp_matches_exhaustive_paths(
            seed in any::<u64>(), r in 0usize..4, t_max in 1usize..6,
            levels in 1usize..5, k in 1usize..3,
            bonuses in proptest::collection::vec(-1.0f64..6.0, 4),
        ) {
            let d = family(seed, 2, r, t_max, levels, k);
            let g = ScenarioGraph::build(&d);
            let w = ArcWeights::from_bonuses(bonuses);
            for v in 0..d.n_vehicles() {
                let (col, wc) = g.cheapest_scenario(v, &w).unwrap();
                g.validate_column(&col).unwrap();
                let bonus: f64 = col.served.iter().map(|&r| w.bonus(r)).sum();
                prop_assert!((wc - (col.cost - bonus)).abs() <= 1e-9);
                let brute = brute_force_min(&g, v, &w);
                prop_assert!((wc - brute).abs() <= 1e-9, "dp {} brute {}", wc, brute);
            }
        }

        #[test]
        fn every_enumerated_path_is_valid(seed in any::<u64>(), r in 0usize..4) {
            let d = family(seed, 1, r, 4, 3, 1);
            let g = ScenarioGraph::build(&d);
            for col in g.enumerate_paths(0, 100_000).unwrap() {
                prop_assert!(g.validate_column(&col).is_ok());
            }
        }
    }

    #[test]
    fn dp_is_deterministic() {
        let d = family(9, 3, 5, 8, 4, 1);
        let g = ScenarioGraph::build(&d);
        let w = ArcWeights::from_bonuses(vec![3.0, 0.5, 2.0, 1.0, 4.0]);
        for v in 0..3 {
            assert_eq!(g.cheapest_scenario(v, &w).unwrap(), g.cheapest_scenario(v, &w).unwrap());
        }
    }

    #[test]
    fn path_limit_is_enforced() {
        let d = tiny(6, 3, 1, vec![1.0; 6], 0.0, &[0], &[]);
        let g = ScenarioGraph::build(&d);
        assert_eq!(
            g.enumerate_paths(0, 3).unwrap_err(),
            GraphError::TooManyPaths { vehicle: 0, limit: 3 }
        );
    }
}
