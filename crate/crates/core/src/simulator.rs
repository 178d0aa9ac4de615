//! Random instances, unknown ground obstacles, and plan execution against
//! the true world with local release/collect adjustment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::geometry::{Bounds, BoxObstacle, Environment, Point3};
use crate::kinematics::{tour_time, ugv_time, TourRow, VehicleParams};
use crate::partition::Team;
use crate::planner::{mission_time, MissionPlan};
use crate::robustness::{budget_from, corollary_check, row_robustness, AdjustmentBudget};
use crate::scenario::Scenario;
use crate::tours::TIME_EPS;

/// Default side length of the square mission area (m).
pub const AREA_SIDE: f64 = 4000.0;
/// Default ceiling of the mission volume (m).
pub const CEILING: f64 = 500.0;

/// Start and finish of each of the ten reference teams.
pub const REFERENCE_ANCHORS: [((f64, f64), (f64, f64)); 10] = [
    ((0.0, 0.0), (1900.0, 1900.0)),
    ((4000.0, 0.0), (2100.0, 1900.0)),
    ((0.0, 4000.0), (1900.0, 2100.0)),
    ((4000.0, 4000.0), (2100.0, 2100.0)),
    ((2000.0, 0.0), (2000.0, 1800.0)),
    ((4000.0, 2000.0), (2200.0, 2000.0)),
    ((2000.0, 4000.0), (2000.0, 2200.0)),
    ((0.0, 2000.0), (1800.0, 2000.0)),
    ((1000.0, 0.0), (1850.0, 1950.0)),
    ((3000.0, 0.0), (2150.0, 1950.0)),
];

const MAX_INJECTION_ATTEMPTS: usize = 10_000;
const RING_BEARINGS: usize = 16;
const RING_STEPS: usize = 20;
/// Nearest feasible candidates kept per endpoint during adjustment.
const CANDIDATES_PER_ENDPOINT: usize = 8;

pub fn reference_teams(m: usize) -> Result<Vec<Team>> {
    if m == 0 || m > REFERENCE_ANCHORS.len() {
        return Err(PlanError::InvalidScenario(format!(
            "reference anchors exist for 1..={} teams, got {m}",
            REFERENCE_ANCHORS.len()
        )));
    }
    Ok(REFERENCE_ANCHORS[..m]
        .iter()
        .enumerate()
        .map(|(k, &((sx, sy), (fx, fy)))| Team {
            index: k + 1,
            start: Point3::new(sx, sy, 0.0),
            finish: Point3::new(fx, fy, 0.0),
        })
        .collect())
}

/// Points uniform over the ground rectangle at the minimum flight altitude.
/// Without explicit teams the reference anchors are used.
pub fn generate_instance(
    seed: u64,
    n: usize,
    m: usize,
    bounds: Bounds,
    teams: Option<Vec<Team>>,
    params: VehicleParams,
) -> Result<Scenario> {
    if m == 0 || n < m {
        return Err(PlanError::InvalidScenario(format!("need n >= m >= 1, got n = {n}, m = {m}")));
    }
    let teams = match teams {
        Some(t) if t.len() == m => t,
        Some(t) => return Err(PlanError::InvalidScenario(format!("{} team positions for m = {m}", t.len()))),
        None => reference_teams(m)?,
    };
    let env = Environment::open(bounds, params.z_min)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = (0..n)
        .map(|_| Point3::new(rng.gen_range(0.0..=bounds.x_max), rng.gen_range(0.0..=bounds.y_max), params.z_min))
        .collect();
    let mut s = Scenario::new(env, params, teams, points);
    s.seed = Some(seed);
    s.validate()?;
    Ok(s)
}

/// The environment as it really is: the planned one plus obstacles the
/// planner did not know about.
#[derive(Debug, Clone, PartialEq)]
pub struct TrueWorld {
    pub base: Environment,
    pub unknown_obstacles: Vec<BoxObstacle>,
    pub actual: Environment,
}

impl TrueWorld {
    pub fn known(env: &Environment) -> Self {
        Self {
            base: env.clone(),
            unknown_obstacles: Vec::new(),
            actual: env.clone(),
        }
    }
}

struct Injector<'a> {
    base: &'a Environment,
    teams: &'a [Team],
    accepted: Vec<BoxObstacle>,
    actual: Environment,
}

impl<'a> Injector<'a> {
    fn new(base: &'a Environment, teams: &'a [Team]) -> Self {
        Self {
            base,
            teams,
            accepted: Vec::new(),
            actual: base.clone(),
        }
    }

    /// Accepts a box unless it cuts the ground, covers a team anchor or
    /// fails the extra requirement on the resulting environment.
    fn offer(&mut self, ob: BoxObstacle, require: impl Fn(&Environment) -> bool) -> bool {
        let Ok(env) = self.actual.with_additional_obstacles(&[ob]) else {
            return false;
        };
        let anchors_free = self
            .teams
            .iter()
            .all(|t| env.is_feasible_ground(&t.start) && env.is_feasible_ground(&t.finish));
        if !anchors_free || !require(&env) {
            return false;
        }
        self.actual = env;
        self.accepted.push(ob);
        true
    }

    fn finish(self) -> TrueWorld {
        TrueWorld {
            base: self.base.clone(),
            unknown_obstacles: self.accepted,
            actual: self.actual,
        }
    }
}

fn random_box(rng: &mut ChaCha8Rng, center: (f64, f64), max_size: f64, bounds: &Bounds, z_min: f64) -> Option<BoxObstacle> {
    let w = rng.gen_range(max_size / 4.0..=max_size);
    let d = rng.gen_range(max_size / 4.0..=max_size);
    let h = rng.gen_range(1.0..=z_min / 2.0);
    let x0 = (center.0 - w / 2.0).max(0.0);
    let x1 = (center.0 + w / 2.0).min(bounds.x_max);
    let y0 = (center.1 - d / 2.0).max(0.0);
    let y1 = (center.1 + d / 2.0).min(bounds.y_max);
    if x1 - x0 <= 1.0 || y1 - y0 <= 1.0 {
        return None;
    }
    BoxObstacle::from_ranges((x0, x1), (y0, y1), (0.0, h)).ok()
}

/// Adds `count` random ground obstacles with sides up to `max_size`.
/// Boxes covering a team anchor or disconnecting the ground are redrawn.
pub fn inject_unknown_obstacles(env: &Environment, teams: &[Team], seed: u64, count: usize, max_size: f64) -> Result<TrueWorld> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = env.bounds();
    let mut injector = Injector::new(env, teams);
    let mut attempts = 0;
    while injector.accepted.len() < count {
        attempts += 1;
        if attempts > MAX_INJECTION_ATTEMPTS {
            return Err(PlanError::GenerationFailed(format!(
                "placed {} of {count} obstacles after {MAX_INJECTION_ATTEMPTS} attempts",
                injector.accepted.len()
            )));
        }
        let center = (rng.gen_range(0.0..=bounds.x_max), rng.gen_range(0.0..=bounds.y_max));
        if let Some(ob) = random_box(&mut rng, center, max_size, &bounds, env.min_flight_altitude()) {
            injector.offer(ob, |_| true);
        }
    }
    Ok(injector.finish())
}

/// Places one obstacle over each target ground point (skipping targets that
/// cannot be covered without disconnecting the ground or covering an anchor).
pub fn inject_obstacles_over(env: &Environment, teams: &[Team], seed: u64, targets: &[Point3], max_size: f64) -> Result<TrueWorld> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds = env.bounds();
    let mut injector = Injector::new(env, teams);
    for target in targets {
        for _ in 0..32 {
            let jitter = max_size / 8.0;
            let center = (
                target.x + rng.gen_range(-jitter..=jitter),
                target.y + rng.gen_range(-jitter..=jitter),
            );
            let Some(ob) = random_box(&mut rng, center, max_size, &bounds, env.min_flight_altitude()) else {
                continue;
            };
            if injector.offer(ob, |env| !env.is_feasible_ground(target)) {
                break;
            }
        }
    }
    Ok(injector.finish())
}

/// Feasible points around `p` in the actual world, nearest first: `p` itself
/// when feasible, otherwise rings of 16 bearings at radial steps of
/// `radius / 20`.
pub fn ring_candidates(p: &Point3, radius: f64, world: &TrueWorld) -> Vec<Point3> {
    if world.actual.is_feasible_ground(p) {
        return vec![*p];
    }
    let mut out = Vec::new();
    if radius <= 0.0 {
        return out;
    }
    for step in 1..=RING_STEPS {
        let r = radius * step as f64 / RING_STEPS as f64;
        for b in 0..RING_BEARINGS {
            let angle = std::f64::consts::TAU * b as f64 / RING_BEARINGS as f64;
            let c = Point3::new(p.x + r * angle.cos(), p.y + r * angle.sin(), 0.0);
            if world.actual.is_feasible_ground(&c) {
                out.push(c);
            }
        }
    }
    out
}

/// Moves blocked release/collect points to nearby feasible ground. Each
/// endpoint may move up to half the combined deviation radius; the first
/// pair in order of total displacement that passes the robustness check is
/// returned.
pub fn adjust_release_collect(row: &TourRow, world: &TrueWorld, budget: &AdjustmentBudget) -> Result<TourRow> {
    let per_endpoint = budget.combined_deviation_radius / 2.0;
    let releases: Vec<Point3> = ring_candidates(&row.release, per_endpoint, world)
        .into_iter()
        .take(CANDIDATES_PER_ENDPOINT)
        .collect();
    let collects: Vec<Point3> = ring_candidates(&row.collect, per_endpoint, world)
        .into_iter()
        .take(CANDIDATES_PER_ENDPOINT)
        .collect();
    let mut pairs: Vec<(f64, Point3, Point3)> = releases
        .iter()
        .flat_map(|r| {
            collects
                .iter()
                .map(move |c| (r.distance(&row.release) + c.distance(&row.collect), *r, *c))
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (_, r, c) in pairs {
        let modified = TourRow {
            release: r,
            visits: row.visits.clone(),
            collect: c,
        };
        if corollary_check(row, &modified, &world.base, &world.actual, budget) {
            return Ok(modified);
        }
    }
    Err(PlanError::AdjustmentExhausted { team: 0, tour: 0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExecutionOptions {
    /// Multiplier on realized flight time (1 = calm air).
    pub wind_slowdown: f64,
    /// Multiplier on every adjustment budget (0 forbids adjustment).
    pub budget_scale: f64,
}

impl Default for ExecutionOptions {
    fn default() -> Self {
        Self {
            wind_slowdown: 1.0,
            budget_scale: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourExecution {
    pub team: usize,
    pub row: usize,
    pub planned_tau_a: f64,
    pub planned_tau_g: f64,
    pub realized_tau_a: f64,
    pub realized_tau_g: f64,
    pub release: Point3,
    pub collect: Point3,
    pub release_shift: f64,
    pub collect_shift: f64,
    /// The endpoints passed the robustness check (always true when unmoved
    /// and unaffected).
    pub within_budget: bool,
    pub flight_violation: bool,
    pub ground_violation: bool,
}

impl TourExecution {
    pub fn adjusted(&self) -> bool {
        self.release_shift > 0.0 || self.collect_shift > 0.0
    }

    pub fn energy_violation(&self) -> bool {
        self.flight_violation || self.ground_violation
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamExecution {
    pub team: usize,
    pub planned_time: f64,
    pub realized_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionReport {
    pub teams: Vec<TeamExecution>,
    pub tours: Vec<TourExecution>,
    pub objective: f64,
    pub all_visited: bool,
    pub success: bool,
}

impl ExecutionReport {
    pub fn energy_violations(&self) -> usize {
        self.tours.iter().filter(|t| t.energy_violation()).count()
    }

    pub fn over_budget(&self) -> usize {
        self.tours.iter().filter(|t| !t.within_budget).count()
    }

    pub fn adjustments(&self) -> usize {
        self.tours.iter().filter(|t| t.adjusted()).count()
    }
}

/// Flies the plan in the true world. Blocked endpoints are adjusted within
/// their budget; when no admissible adjustment exists, the nearest feasible
/// point is used and the tour is marked over budget.
pub fn execute(mission: &MissionPlan, world: &TrueWorld, params: &VehicleParams, options: &ExecutionOptions) -> Result<ExecutionReport> {
    let planned_env = &world.base;
    let actual_env = &world.actual;
    let mut teams = Vec::with_capacity(mission.team_plans.len());
    let mut tours = Vec::new();
    let mut objective = 0.0f64;

    for plan in &mission.team_plans {
        let t = plan.team.index;
        let mut realized: Vec<TourRow> = Vec::new();
        let mut realized_a: Vec<f64> = Vec::new();
        for (i, row) in plan.tours() {
            let rob = row_robustness(row, params, planned_env)?;
            let mut budget = budget_from(rob, params);
            budget.combined_deviation_radius *= options.budget_scale;
            budget.ground_slack *= options.budget_scale;
            let (modified, within_budget) = match adjust_release_collect(row, world, &budget) {
                Ok(m) => (m, true),
                Err(PlanError::AdjustmentExhausted { .. }) => {
                    let fallback = TourRow {
                        release: actual_env.project_to_ground(&row.release),
                        visits: row.visits.clone(),
                        collect: actual_env.project_to_ground(&row.collect),
                    };
                    (fallback, false)
                }
                Err(e) => return Err(e),
            };
            let tau_a = tour_time(params, &modified) * options.wind_slowdown;
            let tau_g = ugv_time(params, actual_env, &modified.release, &modified.collect)?;
            tours.push(TourExecution {
                team: t,
                row: i,
                planned_tau_a: tour_time(params, row),
                planned_tau_g: ugv_time(params, planned_env, &row.release, &row.collect)?,
                realized_tau_a: tau_a,
                realized_tau_g: tau_g,
                release: modified.release,
                collect: modified.collect,
                release_shift: modified.release.distance(&row.release),
                collect_shift: modified.collect.distance(&row.collect),
                within_budget,
                flight_violation: tau_a > params.tau_a_max + TIME_EPS,
                ground_violation: tau_g > params.tau_a_max + TIME_EPS,
            });
            realized.push(modified);
            realized_a.push(tau_a);
        }
        let time = realized_mission_time(&plan.team, &realized, &realized_a, params, actual_env)?;
        objective = objective.max(time);
        teams.push(TeamExecution {
            team: t,
            planned_time: mission_time(plan, params, planned_env)?,
            realized_time: time,
        });
    }

    let all_visited = mission
        .team_plans
        .iter()
        .all(|p| p.rows.iter().all(|r| r.visits.iter().all(|v| actual_env.is_feasible(v))));
    let success = all_visited && tours.iter().all(|t| t.within_budget && !t.energy_violation());
    Ok(ExecutionReport {
        teams,
        tours,
        objective,
        all_visited,
        success,
    })
}

fn realized_mission_time(team: &Team, rows: &[TourRow], tau_a: &[f64], params: &VehicleParams, env: &Environment) -> Result<f64> {
    let (Some(first), Some(last)) = (rows.first(), rows.last()) else {
        return ugv_time(params, env, &team.start, &team.finish);
    };
    let mut total = ugv_time(params, env, &team.start, &first.release)? + ugv_time(params, env, &last.collect, &team.finish)?;
    for (i, row) in rows.iter().enumerate() {
        let ground = ugv_time(params, env, &row.release, &row.collect)?;
        total += tau_a[i].max(ground);
        if let Some(next) = rows.get(i + 1) {
            let recharge = params.gamma * tau_a[i].max(ground);
            total += ugv_time(params, env, &row.collect, &next.release)?.max(recharge);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::planner::plan_mission;

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

    #[test]
    fn generation_is_deterministic() {
        assert_eq!(scenario(3, 25, 2), scenario(3, 25, 2));
        assert_ne!(scenario(3, 25, 2).points, scenario(4, 25, 2).points);
        let s = scenario(0, 25, 1);
        assert!(s
            .points
            .iter()
            .all(|p| p.z == 100.0 && (0.0..=4000.0).contains(&p.x) && (0.0..=4000.0).contains(&p.y)));
    }

    #[test]
    fn reference_anchor_table() {
        let teams = reference_teams(10).unwrap();
        assert_eq!(teams[0].start, Point3::new(0.0, 0.0, 0.0));
        assert_eq!(teams[0].finish, Point3::new(1900.0, 1900.0, 0.0));
        assert_eq!(teams[9].start, Point3::new(3000.0, 0.0, 0.0));
        assert_eq!(teams[9].finish, Point3::new(2150.0, 1950.0, 0.0));
        assert!(reference_teams(11).is_err());
        assert!(generate_instance(0, 1, 2, Bounds::new(4000.0, 4000.0, 500.0), None, VehicleParams::default()).is_err());
    }

    #[test]
    fn injection() {
        let s = scenario(1, 10, 4);
        let none = inject_unknown_obstacles(&s.environment, &s.teams, 9, 0, 200.0).unwrap();
        assert_eq!(none.actual, s.environment);
        let world = inject_unknown_obstacles(&s.environment, &s.teams, 9, 30, 200.0).unwrap();
        assert_eq!(world.unknown_obstacles.len(), 30);
        assert_eq!(world, inject_unknown_obstacles(&s.environment, &s.teams, 9, 30, 200.0).unwrap());
        for ob in &world.unknown_obstacles {
            assert!(ob.max_corner.z < s.params.z_min);
        }
        for t in &s.teams {
            assert!(world.actual.is_feasible_ground(&t.start) && world.actual.is_feasible_ground(&t.finish));
        }
    }

    #[test]
    fn unblocked_endpoint_is_kept() {
        let s = scenario(1, 10, 1);
        let world = TrueWorld::known(&s.environment);
        let row = TourRow {
            release: Point3::new(100.0, 100.0, 0.0),
            visits: vec![Point3::new(100.0, 100.0, 100.0)],
            collect: Point3::new(100.0, 100.0, 0.0),
        };
        let budget = AdjustmentBudget {
            combined_deviation_radius: 0.0,
            ground_slack: 0.0,
        };
        assert_eq!(adjust_release_collect(&row, &world, &budget).unwrap(), row);
    }

    #[test]
    fn blocked_release_moves_within_half_radius() {
        let s = scenario(1, 10, 1);
        let ob = BoxObstacle::from_ranges((975.0, 1025.0), (975.0, 1025.0), (0.0, 20.0)).unwrap();
        let world = TrueWorld {
            base: s.environment.clone(),
            unknown_obstacles: vec![ob],
            actual: s.environment.with_additional_obstacles(&[ob]).unwrap(),
        };
        let row = TourRow {
            release: Point3::new(1000.0, 1000.0, 0.0),
            visits: vec![Point3::new(1200.0, 1000.0, 100.0)],
            collect: Point3::new(1200.0, 1000.0, 0.0),
        };
        let budget = AdjustmentBudget {
            combined_deviation_radius: 1000.0,
            ground_slack: 1500.0,
        };
        let moved = adjust_release_collect(&row, &world, &budget).unwrap();
        let shift = moved.release.distance(&row.release);
        assert!(shift > 0.0 && shift <= 500.0);
        assert!(world.actual.is_feasible_ground(&moved.release));
        assert_eq!(moved.collect, row.collect);
        assert!(corollary_check(&row, &moved, &world.base, &world.actual, &budget));
        // the first ring reaches the box boundary, which is feasible ground
        assert!((shift - 25.0).abs() < 1e-9, "{shift}");
        assert_eq!(moved.release, Point3::new(1025.0, 1000.0, 0.0));

        let zero = AdjustmentBudget {
            combined_deviation_radius: 0.0,
            ground_slack: 0.0,
        };
        assert!(matches!(
            adjust_release_collect(&row, &world, &zero),
            Err(PlanError::AdjustmentExhausted { .. })
        ));
    }

    #[test]
    fn known_world_reproduces_plan() {
        let s = scenario(5, 25, 2);
        let plan = plan_mission(&s).unwrap();
        let report = execute(&plan, &TrueWorld::known(&s.environment), &s.params, &ExecutionOptions::default()).unwrap();
        assert!(report.success);
        assert_eq!(report.adjustments(), 0);
        for t in &report.teams {
            assert!((t.planned_time - t.realized_time).abs() < 1e-6);
        }
    }

    #[test]
    fn zero_budget_over_blocked_endpoint_is_flagged() {
        let s = scenario(5, 25, 1);
        let plan = plan_mission(&s).unwrap();
        let targets: Vec<Point3> = plan.team_plans[0].tours().map(|(_, r)| r.release).collect();
        let world = inject_obstacles_over(&s.environment, &s.teams, 2, &targets, 100.0).unwrap();
        assert!(!world.unknown_obstacles.is_empty());
        let opts = ExecutionOptions {
            budget_scale: 0.0,
            ..Default::default()
        };
        let report = execute(&plan, &world, &s.params, &opts).unwrap();
        assert!(report.over_budget() > 0);
        assert!(!report.success);
    }
}
