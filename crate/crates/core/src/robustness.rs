//! Tour robustness values and admissibility of modified plans.
//!
//! A tour's robustness is the slack between its planned flight and drive
//! times and the flight budget. A modified plan that only moves release and
//! collect points keeps every UAV within its energy limit as long as each
//! tour's realized times stay within the planned times plus that slack.

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::geometry::Environment;
use crate::kinematics::{tour_time, ugv_time, TourRow, VehicleParams};
use crate::planner::{Constraint, MissionPlan, TeamPlan, ValidationReport, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TourRobustness {
    pub delta_hat_a: f64,
    pub delta_hat_g: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdjustmentBudget {
    /// Allowed combined displacement of release and collect (m).
    pub combined_deviation_radius: f64,
    /// Allowed growth of the release-to-collect ground path (m).
    pub ground_slack: f64,
}

pub fn row_robustness(row: &TourRow, params: &VehicleParams, env: &Environment) -> Result<TourRobustness> {
    Ok(TourRobustness {
        delta_hat_a: params.tau_a_max - tour_time(params, row),
        delta_hat_g: params.tau_a_max - ugv_time(params, env, &row.release, &row.collect)?,
    })
}

pub fn tour_robustness(plan: &TeamPlan, i: usize, params: &VehicleParams, env: &Environment) -> Result<TourRobustness> {
    row_robustness(&plan.rows[i], params, env)
}

/// Budgets from the robustness values at the given sustained speeds. Pass
/// derated speeds in `params` for a more conservative budget.
pub fn budget_from(robustness: TourRobustness, params: &VehicleParams) -> AdjustmentBudget {
    AdjustmentBudget {
        combined_deviation_radius: (params.v_h * robustness.delta_hat_a).max(0.0),
        ground_slack: (params.v_g * robustness.delta_hat_g).max(0.0),
    }
}

pub fn adjustment_budget(plan: &TeamPlan, i: usize, params: &VehicleParams, env: &Environment) -> Result<AdjustmentBudget> {
    Ok(budget_from(tour_robustness(plan, i, params, env)?, params))
}

/// Sufficient condition for a release/collect change to keep the tour
/// within its robustness: the endpoints move no more than the combined
/// radius in total, and the realized ground path grows by no more than the
/// ground slack.
pub fn corollary_check(
    original: &TourRow,
    modified: &TourRow,
    planned_env: &Environment,
    actual_env: &Environment,
    budget: &AdjustmentBudget,
) -> bool {
    let deviation = original.release.distance(&modified.release) + original.collect.distance(&modified.collect);
    if deviation > budget.combined_deviation_radius + 1e-9 {
        return false;
    }
    let planned = match planned_env.ground_distance(&original.release, &original.collect) {
        Ok(d) => d,
        Err(_) => return false,
    };
    match actual_env.ground_distance(&modified.release, &modified.collect) {
        Ok(actual) => actual <= planned + budget.ground_slack + 1e-9,
        Err(_) => false,
    }
}

/// Checks that a plan changed only in release and collect points still
/// satisfies the robustness conditions in the actual environment.
pub fn check_modified_plan(
    original: &MissionPlan,
    modified: &MissionPlan,
    params: &VehicleParams,
    planned_env: &Environment,
    actual_env: &Environment,
) -> Result<ValidationReport> {
    if original.team_plans.len() != modified.team_plans.len() {
        return Err(PlanError::StructureMismatch(format!(
            "{} vs {} team plans",
            original.team_plans.len(),
            modified.team_plans.len()
        )));
    }
    for (a, b) in original.team_plans.iter().zip(&modified.team_plans) {
        if a.team != b.team || a.rows.len() != b.rows.len() || a.rows.iter().zip(&b.rows).any(|(x, y)| x.visits != y.visits) {
            return Err(PlanError::StructureMismatch(format!("team {} visits differ", a.team.index)));
        }
    }

    let mut report = ValidationReport::default();
    for (a, b) in original.team_plans.iter().zip(&modified.team_plans) {
        let t = a.team.index;
        for (i, (x, y)) in a.rows.iter().zip(&b.rows).enumerate() {
            if x.is_trivial() {
                continue;
            }
            let rob = row_robustness(x, params, planned_env)?;
            let planned_a = tour_time(params, x);
            let actual_a = tour_time(params, y);
            report.slack(Constraint::FlightDeviation, t, i, planned_a + rob.delta_hat_a - actual_a, || {
                format!(
                    "realized flight {actual_a:.3} s exceeds {planned_a:.3} s + {:.3} s",
                    rob.delta_hat_a
                )
            });
            let planned_g = ugv_time(params, planned_env, &x.release, &x.collect)?;
            match ugv_time(params, actual_env, &y.release, &y.collect) {
                Ok(actual_g) => report.slack(Constraint::GroundDeviation, t, i, planned_g + rob.delta_hat_g - actual_g, || {
                    format!("realized drive {actual_g:.3} s exceeds {planned_g:.3} s + {:.3} s", rob.delta_hat_g)
                }),
                Err(e) => report.require(false, || Violation {
                    constraint: Constraint::GroundDeviation,
                    team: Some(t),
                    row: Some(i),
                    column: None,
                    slack: None,
                    detail: e.to_string(),
                }),
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Bounds, BoxObstacle, Point3};
    use crate::partition::Team;

    fn g(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 0.0)
    }

    fn a(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 100.0)
    }

    fn env() -> Environment {
        Environment::open(Bounds::new(4000.0, 4000.0, 500.0), 100.0).unwrap()
    }

    fn two_point_plan() -> TeamPlan {
        let origin = g(0.0, 0.0);
        TeamPlan {
            team: Team {
                index: 1,
                start: origin,
                finish: origin,
            },
            rows: vec![
                TourRow {
                    release: origin,
                    visits: vec![a(0.0, 0.0), a(2000.0, 0.0)],
                    collect: origin,
                },
                TourRow::trivial(origin),
            ],
        }
    }

    #[test]
    fn robustness_values() {
        let params = VehicleParams::default();
        let plan = two_point_plan();
        let r = tour_robustness(&plan, 0, &params, &env()).unwrap();
        assert_eq!(r.delta_hat_a, 100.0);
        assert_eq!(r.delta_hat_g, 600.0);
        let trivial = tour_robustness(&plan, 1, &params, &env()).unwrap();
        assert_eq!(
            trivial,
            TourRobustness {
                delta_hat_a: 600.0,
                delta_hat_g: 600.0
            }
        );
    }

    #[test]
    fn budgets() {
        let params = VehicleParams::default();
        let b = adjustment_budget(&two_point_plan(), 0, &params, &env()).unwrap();
        assert_eq!(b.combined_deviation_radius, 1000.0);
        assert_eq!(b.ground_slack, 1500.0);
        let zero = budget_from(
            TourRobustness {
                delta_hat_a: 0.0,
                delta_hat_g: 0.0,
            },
            &params,
        );
        assert_eq!(zero.combined_deviation_radius, 0.0);
    }

    #[test]
    fn deviation_check() {
        let e = env();
        let budget = AdjustmentBudget {
            combined_deviation_radius: 1000.0,
            ground_slack: 1500.0,
        };
        let row = TourRow {
            release: g(1000.0, 1000.0),
            visits: vec![a(1000.0, 1000.0)],
            collect: g(1000.0, 1000.0),
        };
        let moved = TourRow {
            release: g(1300.0, 1000.0),
            collect: g(1000.0, 1400.0),
            ..row.clone()
        };
        assert!(corollary_check(&row, &moved, &e, &e, &budget));
        let far = TourRow {
            release: g(2100.0, 1000.0),
            ..row.clone()
        };
        assert!(!corollary_check(&row, &far, &e, &e, &budget));
        // an obstacle elsewhere leaves the ground path unchanged
        let ob = BoxObstacle::from_ranges((3000.0, 3100.0), (3000.0, 3100.0), (0.0, 20.0)).unwrap();
        let actual = e.with_additional_obstacles(&[ob]).unwrap();
        assert!(corollary_check(&row, &row, &e, &actual, &budget));
    }

    #[test]
    fn modified_plan_checks() {
        let params = VehicleParams::default();
        let e = env();
        let plan = MissionPlan {
            team_plans: vec![two_point_plan()],
        };
        assert!(check_modified_plan(&plan, &plan, &params, &e, &e).unwrap().passed());

        let mut moved = plan.clone();
        moved.team_plans[0].rows[0].collect = g(3000.0, 2000.0);
        let report = check_modified_plan(&plan, &moved, &params, &e, &e).unwrap();
        assert!(report
            .violations
            .iter()
            .any(|v| v.constraint == Constraint::GroundDeviation && v.row == Some(0)));

        let mut other = plan.clone();
        other.team_plans[0].rows[0].visits.pop();
        assert!(matches!(
            check_modified_plan(&plan, &other, &params, &e, &e),
            Err(PlanError::StructureMismatch(_))
        ));
    }
}
