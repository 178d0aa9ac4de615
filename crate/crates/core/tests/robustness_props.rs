//! Robustness implications, simulator behaviour and the exact oracle.

use proptest::prelude::*;
use teamplan::kinematics::{tour_time, ugv_time};
use teamplan::oracle::{exact_plan, CandidateClass};
use teamplan::planner::{objective, plan_mission, validate};
use teamplan::robustness::{adjustment_budget, check_modified_plan, corollary_check, row_robustness};
use teamplan::simulator::{execute, generate_instance, inject_unknown_obstacles, ExecutionOptions, AREA_SIDE, CEILING};
use teamplan::tours::TIME_EPS;
use teamplan::{Bounds, Point3, Scenario, Team, VehicleParams};

fn scenario(seed: u64, n: usize, m: usize) -> Scenario {
    generate_instance(
        seed,
        n,
        m,
        Bounds::new(AREA_SIDE, AREA_SIDE, CEILING),
        None,
        VehicleParams::default(),
    )
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// A release/collect change accepted by the corollary check keeps the
    /// tour within its planned times plus robustness in the actual world.
    #[test]
    fn corollary_implies_modified_plan_check(
        seed in any::<u64>(),
        n in 1usize..25,
        pick in any::<usize>(),
        r_shift in (0.0f64..400.0, 0.0f64..std::f64::consts::TAU),
        c_shift in (0.0f64..400.0, 0.0f64..std::f64::consts::TAU),
    ) {
        let s = scenario(seed, n, 1);
        let mission = plan_mission(&s).unwrap();
        let world = inject_unknown_obstacles(&s.environment, &s.teams, seed, 12, 250.0).unwrap();
        let plan = &mission.team_plans[0];
        let tours: Vec<usize> = plan.tours().map(|(i, _)| i).collect();
        let i = tours[pick % tours.len()];
        let row = &plan.rows[i];
        let budget = adjustment_budget(plan, i, &s.params, &s.environment).unwrap();

        let moved = |p: Point3, (d, a): (f64, f64)| {
            world.actual.project_to_ground(&Point3::new(p.x + d * a.cos(), p.y + d * a.sin(), 0.0))
        };
        let modified_row = teamplan::TourRow {
            release: moved(row.release, r_shift),
            visits: row.visits.clone(),
            collect: moved(row.collect, c_shift),
        };
        prop_assume!(corollary_check(row, &modified_row, &s.environment, &world.actual, &budget));

        let rob = row_robustness(row, &s.params, &s.environment).unwrap();
        let actual_a = tour_time(&s.params, &modified_row);
        let actual_g = ugv_time(&s.params, &world.actual, &modified_row.release, &modified_row.collect).unwrap();
        prop_assert!(actual_a <= tour_time(&s.params, row) + rob.delta_hat_a + TIME_EPS);
        prop_assert!(actual_a <= s.params.tau_a_max + TIME_EPS);
        prop_assert!(actual_g <= s.params.tau_a_max + TIME_EPS);

        let mut modified = mission.clone();
        modified.team_plans[0].rows[i] = modified_row;
        let report = check_modified_plan(&mission, &modified, &s.params, &s.environment, &world.actual).unwrap();
        let own: Vec<_> = report.violations.iter().filter(|v| v.row == Some(i)).collect();
        prop_assert!(own.is_empty(), "{:?}", own);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn simulation_is_deterministic_and_safe_within_budget(seed in any::<u64>(), n in 1usize..30, m in 1usize..4, obstacles in 0usize..20) {
        prop_assume!(n >= m);
        let s = scenario(seed, n, m);
        let mission = plan_mission(&s).unwrap();
        let world = inject_unknown_obstacles(&s.environment, &s.teams, seed ^ 1, obstacles, 200.0).unwrap();
        let opts = ExecutionOptions::default();
        let a = execute(&mission, &world, &s.params, &opts).unwrap();
        prop_assert_eq!(&a, &execute(&mission, &world, &s.params, &opts).unwrap());
        prop_assert!(a.all_visited);
        for t in a.tours.iter().filter(|t| t.within_budget) {
            prop_assert!(!t.energy_violation());
            prop_assert!(t.realized_tau_a <= s.params.tau_a_max + TIME_EPS);
        }
        prop_assert_eq!(a.success, a.tours.iter().all(|t| t.within_budget && !t.energy_violation()));

        let calm = teamplan::simulator::TrueWorld::known(&s.environment);
        let nominal = execute(&mission, &calm, &s.params, &opts).unwrap();
        prop_assert!(nominal.success);
        prop_assert_eq!(nominal.adjustments(), 0);
        let planned = objective(&mission, &s.params, &s.environment).unwrap();
        prop_assert!((nominal.objective - planned).abs() <= 1e-9 * planned);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn oracle_is_valid_and_never_worse(seed in any::<u64>(), n in 1usize..5, diagonal in any::<bool>()) {
        let teams = diagonal.then(|| {
            vec![Team {
                index: 1,
                start: Point3::new(0.0, 0.0, 0.0),
                finish: Point3::new(AREA_SIDE, AREA_SIDE, 0.0),
            }]
        });
        let s = generate_instance(seed, n, 1, Bounds::new(AREA_SIDE, AREA_SIDE, CEILING), teams, VehicleParams::default()).unwrap();
        let heuristic = objective(&plan_mission(&s).unwrap(), &s.params, &s.environment).unwrap();
        for class in [CandidateClass::standard(&s), CandidateClass::projections(&s)] {
            let (plan, best) = exact_plan(&s, &class).unwrap();
            prop_assert!(validate(&plan, &s).passed());
            prop_assert!(best <= heuristic + TIME_EPS, "{}: {} > {}", class.description, best, heuristic);
        }
    }
}
