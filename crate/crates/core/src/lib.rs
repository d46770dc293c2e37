//! Column generation over a time-expanded scenario graph feeding a
//! set-partition master, with exact, QUBO and feasible-move master solvers.

pub mod colgen;
pub mod lp_simplex;
pub mod master;
pub mod model;
pub mod oracle;
pub mod qubo;
pub mod scenario_graph;
pub mod seed;
