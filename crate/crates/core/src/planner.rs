//! End-to-end planning, mission-time evaluation and plan validation.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::collect_select::{build_collect_graph, chosen_collects, finalize_team_plan, select_collect_points};
use crate::error::{PlanError, Result};
use crate::geometry::{Environment, Point3};
use crate::kinematics::{recharge_time, tour_time, ugv_time, TourRow, VehicleParams};
use crate::partition::{assign_points, Team};
use crate::scenario::Scenario;
use crate::sequencing::plan_visit_sequence;
use crate::tours::{build_feasible_tours, TIME_EPS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamPlan {
    pub team: Team,
    pub rows: Vec<TourRow>,
}

impl TeamPlan {
    pub fn tours(&self) -> impl Iterator<Item = (usize, &TourRow)> {
        self.rows.iter().enumerate().filter(|(_, r)| !r.is_trivial())
    }

    pub fn tour_count(&self) -> usize {
        self.tours().count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionPlan {
    pub team_plans: Vec<TeamPlan>,
}

impl MissionPlan {
    pub fn tour_count(&self) -> usize {
        self.team_plans.iter().map(TeamPlan::tour_count).sum()
    }
}

/// Plans one team's share of the points.
pub fn plan_team(team: &Team, points: &[Point3], params: &VehicleParams, env: &Environment) -> Result<TeamPlan> {
    let seq = plan_visit_sequence(points, &team.start, &team.finish, env)?;
    let partial = build_feasible_tours(&seq, params, env).map_err(|e| match e {
        PlanError::InfeasibleInstance { point, .. } => PlanError::InfeasibleInstance { team: team.index, point },
        other => other,
    })?;
    let graph = build_collect_graph(&partial, &team.start, &team.finish, params, env)?;
    let selection = select_collect_points(&graph);
    let collects = chosen_collects(&graph, &selection);
    Ok(finalize_team_plan(team, &partial, &graph, &collects))
}

pub fn plan_mission(scenario: &Scenario) -> Result<MissionPlan> {
    scenario.validate()?;
    let env = &scenario.environment;
    let partition = assign_points(&scenario.teams, &scenario.points, env)?;
    let team_plans = scenario
        .teams
        .par_iter()
        .enumerate()
        .map(|(k, team)| plan_team(team, &partition.points_of(k, &scenario.points), &scenario.params, env))
        .collect::<Result<Vec<_>>>()?;
    Ok(MissionPlan { team_plans })
}

/// Total time for a team to execute its plan. Trivial rows contribute
/// nothing; a team without tours just drives from start to finish.
pub fn mission_time(plan: &TeamPlan, params: &VehicleParams, env: &Environment) -> Result<f64> {
    let tours: Vec<&TourRow> = plan.tours().map(|(_, r)| r).collect();
    let (first, last) = match (tours.first(), tours.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return ugv_time(params, env, &plan.team.start, &plan.team.finish),
    };
    let mut total = ugv_time(params, env, &plan.team.start, &first.release)? + ugv_time(params, env, &last.collect, &plan.team.finish)?;
    for (i, row) in tours.iter().enumerate() {
        total += tour_time(params, row).max(ugv_time(params, env, &row.release, &row.collect)?);
        if let Some(next) = tours.get(i + 1) {
            total += ugv_time(params, env, &row.collect, &next.release)?.max(recharge_time(params, env, row)?);
        }
    }
    Ok(total)
}

/// Longest team mission time.
pub fn objective(mission: &MissionPlan, params: &VehicleParams, env: &Environment) -> Result<f64> {
    mission
        .team_plans
        .iter()
        .map(|p| mission_time(p, params, env))
        .try_fold(0.0f64, |acc, t| Ok(acc.max(t?)))
}

/// Sanity lower bound on the objective: every point must be reached on a
/// trip from some team's start to its finish moving no faster than the
/// fastest vehicle, plus one take-off and one landing.
pub fn objective_lower_bound(scenario: &Scenario) -> f64 {
    let params = &scenario.params;
    let speed = params.v_h.max(params.v_g);
    let best_team = |p: &Point3| {
        scenario
            .teams
            .iter()
            .map(|t| (t.start.horizontal_distance(p) + p.horizontal_distance(&t.finish)) / speed)
            .fold(f64::INFINITY, f64::min)
    };
    scenario
        .points
        .iter()
        .map(|p| best_team(p) + 2.0 * params.tau_tl())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Constraint {
    /// Every monitoring point is visited.
    Coverage,
    /// Flight time plus margin within the budget.
    FlightTime,
    /// Release-to-collect drive plus margin within the budget.
    GroundTime,
    /// Release and collect points lie on feasible ground.
    GroundFeasibility,
    /// Plan matrix shape: one row per team point, visits from the point set,
    /// trivial rows collapsed to one location.
    Structure,
    /// Realized flight time exceeds the planned time plus its robustness.
    FlightDeviation,
    /// Realized drive exceeds the planned time plus its robustness.
    GroundDeviation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: Constraint,
    /// 1-based team index.
    pub team: Option<usize>,
    pub row: Option<usize>,
    /// Column in the row matrix: 0 is the release, the last is the collect.
    pub column: Option<usize>,
    /// Negative slack in seconds for time constraints.
    pub slack: Option<f64>,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub checks: usize,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub(crate) fn slack(&mut self, constraint: Constraint, team: usize, row: usize, slack: f64, detail: impl FnOnce() -> String) {
        self.checks += 1;
        if slack < -TIME_EPS {
            self.violations.push(Violation {
                constraint,
                team: Some(team),
                row: Some(row),
                column: None,
                slack: Some(slack),
                detail: detail(),
            });
        }
    }

    pub(crate) fn require(&mut self, ok: bool, v: impl FnOnce() -> Violation) {
        self.checks += 1;
        if !ok {
            self.violations.push(v());
        }
    }
}

fn structure(team: Option<usize>, row: Option<usize>, column: Option<usize>, detail: String) -> Violation {
    Violation {
        constraint: Constraint::Structure,
        team,
        row,
        column,
        slack: None,
        detail,
    }
}

/// Checks every constraint of the planning problem, recomputing all times
/// from the environment.
pub fn validate(mission: &MissionPlan, scenario: &Scenario) -> ValidationReport {
    let params = &scenario.params;
    let env = &scenario.environment;
    let mut report = ValidationReport::default();

    report.require(mission.team_plans.len() == scenario.teams.len(), || {
        structure(
            None,
            None,
            None,
            format!("{} team plans for {} teams", mission.team_plans.len(), scenario.teams.len()),
        )
    });

    let visited: Vec<Point3> = mission
        .team_plans
        .iter()
        .flat_map(|p| p.rows.iter().flat_map(|r| r.visits.iter().copied()))
        .collect();
    for p in &scenario.points {
        report.require(visited.contains(p), || Violation {
            constraint: Constraint::Coverage,
            team: None,
            row: None,
            column: None,
            slack: None,
            detail: format!("point {p:?} is not visited"),
        });
    }

    for (k, plan) in mission.team_plans.iter().enumerate() {
        let t = plan.team.index;
        report.require(scenario.teams.get(k) == Some(&plan.team), || {
            structure(Some(t), None, None, format!("team plan {k} does not match the scenario team"))
        });
        let own_points = plan.rows.iter().map(|r| r.visits.len()).sum::<usize>();
        report.require(plan.rows.len() == own_points, || {
            structure(Some(t), None, None, format!("{} rows for {own_points} points", plan.rows.len()))
        });

        for (i, row) in plan.rows.iter().enumerate() {
            let last_col = row.visits.len() + 1;
            for (j, v) in row.visits.iter().enumerate() {
                report.require(scenario.points.contains(v), || {
                    structure(Some(t), Some(i), Some(j + 1), format!("visit {v:?} is not a monitoring point"))
                });
            }
            for (col, p) in [(0, &row.release), (last_col, &row.collect)] {
                report.require(env.is_feasible_ground(p), || Violation {
                    constraint: Constraint::GroundFeasibility,
                    team: Some(t),
                    row: Some(i),
                    column: Some(col),
                    slack: None,
                    detail: format!("{p:?} is not feasible ground"),
                });
            }
            if row.is_trivial() {
                report.require(row.release == row.collect, || {
                    structure(Some(t), Some(i), None, "trivial row must stay at one location".into())
                });
                continue;
            }
            let flight = tour_time(params, row);
            report.slack(Constraint::FlightTime, t, i, params.tau_a_max - params.delta_a - flight, || {
                format!(
                    "tour time {flight:.3} s with margin {} s exceeds {} s",
                    params.delta_a, params.tau_a_max
                )
            });
            match ugv_time(params, env, &row.release, &row.collect) {
                Ok(ground) => report.slack(Constraint::GroundTime, t, i, params.tau_a_max - params.delta_g - ground, || {
                    format!(
                        "UGV time {ground:.3} s with margin {} s exceeds {} s",
                        params.delta_g, params.tau_a_max
                    )
                }),
                Err(e) => report.require(false, || Violation {
                    constraint: Constraint::GroundTime,
                    team: Some(t),
                    row: Some(i),
                    column: None,
                    slack: None,
                    detail: e.to_string(),
                }),
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Bounds;

    fn g(x: f64, y: f64) -> Point3 {
        Point3::new(x, y, 0.0)
    }

    fn single_point_scenario() -> Scenario {
        let env = Environment::open(Bounds::new(4000.0, 4000.0, 500.0), 100.0).unwrap();
        let origin = g(0.0, 0.0);
        Scenario::new(
            env,
            VehicleParams::default(),
            vec![Team {
                index: 1,
                start: origin,
                finish: origin,
            }],
            vec![Point3::new(500.0, 0.0, 100.0)],
        )
    }

    #[test]
    fn single_point_plan() {
        let s = single_point_scenario();
        let plan = plan_mission(&s).unwrap();
        let rows = &plan.team_plans[0].rows;
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].release, g(500.0, 0.0));
        assert_eq!(rows[0].collect, g(500.0, 0.0));
        // 200 + 200 + max(100, 0)
        assert_eq!(mission_time(&plan.team_plans[0], &s.params, &s.environment).unwrap(), 500.0);
        assert_eq!(objective(&plan, &s.params, &s.environment).unwrap(), 500.0);
        assert!(validate(&plan, &s).passed());
    }

    #[test]
    fn empty_team_drives_from_start_to_finish() {
        let mut s = single_point_scenario();
        s.teams.push(Team {
            index: 2,
            start: g(4000.0, 4000.0),
            finish: g(4000.0, 0.0),
        });
        let plan = plan_mission(&s).unwrap();
        assert!(plan.team_plans[1].rows.is_empty());
        assert_eq!(mission_time(&plan.team_plans[1], &s.params, &s.environment).unwrap(), 1600.0);
        assert_eq!(objective(&plan, &s.params, &s.environment).unwrap(), 1600.0);
        assert!(validate(&plan, &s).passed());
    }

    #[test]
    fn missing_visit_is_reported() {
        let mut s = single_point_scenario();
        s.points.push(Point3::new(600.0, 0.0, 100.0));
        let mut plan = plan_mission(&s).unwrap();
        let removed = plan.team_plans[0].rows.iter_mut().find_map(|r| r.visits.pop()).unwrap();
        let report = validate(&plan, &s);
        assert!(!report.passed());
        let coverage: Vec<_> = report.violations.iter().filter(|v| v.constraint == Constraint::Coverage).collect();
        assert_eq!(coverage.len(), 1);
        assert!(coverage[0].detail.contains(&format!("{removed:?}")));
    }

    #[test]
    fn distant_collect_breaks_ground_time() {
        let env = Environment::open(Bounds::new(20000.0, 20000.0, 500.0), 100.0).unwrap();
        let origin = g(0.0, 0.0);
        let s = Scenario::new(
            env,
            VehicleParams::default(),
            vec![Team {
                index: 1,
                start: origin,
                finish: origin,
            }],
            vec![Point3::new(500.0, 0.0, 100.0)],
        );
        let mut plan = plan_mission(&s).unwrap();
        plan.team_plans[0].rows[0].collect = g(10500.0, 0.0);
        let report = validate(&plan, &s);
        let ground: Vec<_> = report
            .violations
            .iter()
            .filter(|v| v.constraint == Constraint::GroundTime)
            .collect();
        assert_eq!(ground.len(), 1);
        assert!(ground[0].slack.unwrap() < 0.0);
        assert_eq!(ground[0].row, Some(0));
    }

    #[test]
    fn lower_bound_holds() {
        let s = single_point_scenario();
        let plan = plan_mission(&s).unwrap();
        assert!(objective(&plan, &s.params, &s.environment).unwrap() >= objective_lower_bound(&s));
    }
}
