mod common;

use common::family_instance;
use evfleet::colgen::{self, ColgenLimits, ColgenStatus};
use evfleet::master::{check, solve_master, MasterOptions, SolverKind};
use evfleet::oracle::{cross_check, OracleLimits};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// LP bound <= oracle <= exact over the generated pool <= every heuristic.
    #[test]
    fn solver_ordering(case in 0u64..100_000, seed in any::<u64>()) {
        let d = family_instance(case);
        let oracle = cross_check(&d, &OracleLimits { max_paths: 2_000_000, ..Default::default() }).unwrap().cost;
        let cg = colgen::run(&d, &ColgenLimits::default()).unwrap();
        prop_assert_eq!(cg.report.status, ColgenStatus::Converged);
        prop_assert!(cg.lp_bound() <= oracle + 1e-6);

        let opts = MasterOptions { seed, ..Default::default() };
        let exact = solve_master(SolverKind::Exact, &cg.pool, &d, &opts).unwrap().solution;
        prop_assert!(exact.proven_optimal);
        prop_assert!(oracle <= exact.cost + 1e-6);
        for kind in [SolverKind::Sa, SolverKind::Tabu, SolverKind::FeasibleAnneal] {
            let sol = solve_master(kind, &cg.pool, &d, &opts).unwrap().solution;
            prop_assert!(check(&cg.pool, &d, &sol.columns, &sol.uncovered).is_ok());
            prop_assert!(sol.cost >= exact.cost - 1e-6, "{} beat exact", kind);
            prop_assert!(sol.cost >= oracle - 1e-6);
        }
    }
}
