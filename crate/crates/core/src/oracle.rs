//! Exhaustive reference solvers for small instances.

use std::collections::HashMap;

use crate::collect_select::{LayeredGraph, Selection};
use crate::error::{PlanError, Result};
use crate::geometry::{Environment, Point3};
use crate::kinematics::{tour_time, ugv_time, TourRow, VehicleParams};
use crate::planner::{MissionPlan, TeamPlan};
use crate::scenario::Scenario;
use crate::sequencing::{distance_matrix, endpoint_indices, order_length, VisitSequence};
use crate::tours::TIME_EPS;

pub const MAX_EXACT_POINTS: usize = 5;
pub const MAX_BRUTE_FORCE_POINTS: usize = 9;
pub const MAX_COLLECT_COMBINATIONS: usize = 10_000;

/// Finite set of ground points from which releases and collects are drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateClass {
    pub points: Vec<Point3>,
    pub description: String,
}

impl CandidateClass {
    /// Ground projections of every monitoring point plus the team anchors.
    pub fn standard(scenario: &Scenario) -> Self {
        let anchors = scenario.teams.iter().flat_map(|t| [t.start, t.finish]);
        Self {
            points: dedup(projections(scenario).chain(anchors)),
            description: "ground projections of monitoring points and team anchors".into(),
        }
    }

    /// Ground projections only: the points the heuristic itself can pick.
    pub fn projections(scenario: &Scenario) -> Self {
        Self {
            points: dedup(projections(scenario)),
            description: "ground projections of monitoring points".into(),
        }
    }
}

fn projections(scenario: &Scenario) -> impl Iterator<Item = Point3> + '_ {
    scenario.points.iter().map(|p| scenario.environment.project_to_ground(p))
}

fn dedup(points: impl Iterator<Item = Point3>) -> Vec<Point3> {
    let mut out: Vec<Point3> = Vec::new();
    for p in points {
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

/// Flight time for every (release, collect) pair of one tour.
fn tour_table(visits: &[Point3], cands: &[Point3], params: &VehicleParams) -> Vec<Vec<f64>> {
    cands
        .iter()
        .map(|r| {
            cands
                .iter()
                .map(|c| {
                    tour_time(
                        params,
                        &TourRow {
                            release: *r,
                            visits: visits.to_vec(),
                            collect: *c,
                        },
                    )
                })
                .collect()
        })
        .collect()
}

struct Exact<'a> {
    params: &'a VehicleParams,
    cands: &'a [Point3],
    ground: Vec<Vec<f64>>,
    from_start: Vec<f64>,
    to_finish: Vec<f64>,
    tables: HashMap<Vec<usize>, Vec<Vec<f64>>>,
}

/// Best plan for one fixed sequence of tours, with the chosen
/// (release, collect) indices per tour.
fn best_for_split(ex: &mut Exact, points: &[Point3], tours: &[Vec<usize>]) -> Option<(f64, Vec<(usize, usize)>)> {
    let k = ex.cands.len();
    let p = ex.params;
    let budget = p.tau_a_max + TIME_EPS;
    let tables: Vec<Vec<Vec<f64>>> = tours
        .iter()
        .map(|t| {
            ex.tables
                .entry(t.clone())
                .or_insert_with(|| {
                    let visits: Vec<Point3> = t.iter().map(|&i| points[i]).collect();
                    tour_table(&visits, ex.cands, p)
                })
                .clone()
        })
        .collect();

    // dp[r][c]: best time up to landing of the current tour at c, released at r
    let inf = f64::INFINITY;
    let mut dp = vec![vec![inf; k]; k];
    let mut back: Vec<Vec<Vec<(usize, usize)>>> = Vec::with_capacity(tours.len());
    for (ti, table) in tables.iter().enumerate() {
        let mut next = vec![vec![inf; k]; k];
        let mut link = vec![vec![(usize::MAX, usize::MAX); k]; k];
        for r in 0..k {
            for c in 0..k {
                let fly = table[r][c];
                let drive = ex.ground[r][c];
                if fly + p.delta_a > budget || drive + p.delta_g > budget {
                    continue;
                }
                let stage = fly.max(drive);
                if ti == 0 {
                    next[r][c] = ex.from_start[r] + stage;
                    continue;
                }
                let prev_table = &tables[ti - 1];
                for pr in 0..k {
                    for pc in 0..k {
                        let before = dp[pr][pc];
                        if before == inf {
                            continue;
                        }
                        let recharge = p.gamma * prev_table[pr][pc].max(ex.ground[pr][pc]);
                        let total = before + ex.ground[pc][r].max(recharge) + stage;
                        if total < next[r][c] {
                            next[r][c] = total;
                            link[r][c] = (pr, pc);
                        }
                    }
                }
            }
        }
        dp = next;
        back.push(link);
    }

    let mut best: Option<(f64, usize, usize)> = None;
    for r in 0..k {
        for c in 0..k {
            if dp[r][c] == inf {
                continue;
            }
            let total = dp[r][c] + ex.to_finish[c];
            if best.is_none_or(|(b, _, _)| total < b) {
                best = Some((total, r, c));
            }
        }
    }
    let (cost, mut r, mut c) = best?;
    let mut picks = vec![(0, 0); tours.len()];
    for ti in (0..tours.len()).rev() {
        picks[ti] = (r, c);
        if ti > 0 {
            (r, c) = back[ti][r][c];
        }
    }
    Some((cost, picks))
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}

/// Cost, tours as point indices, and the (release, collect) candidates per tour.
type Split = (f64, Vec<Vec<usize>>, Vec<(usize, usize)>);

/// Optimal single-team plan over every visiting order, every split into
/// consecutive tours and every release/collect choice from the candidate
/// class.
pub fn exact_plan(scenario: &Scenario, candidates: &CandidateClass) -> Result<(MissionPlan, f64)> {
    scenario.validate()?;
    if scenario.teams.len() != 1 {
        return Err(PlanError::TooLarge(format!(
            "exact search handles one team, got {}",
            scenario.teams.len()
        )));
    }
    let n = scenario.points.len();
    if n > MAX_EXACT_POINTS {
        return Err(PlanError::TooLarge(format!(
            "exact search handles at most {MAX_EXACT_POINTS} points, got {n}"
        )));
    }
    let env = &scenario.environment;
    let params = &scenario.params;
    let team = scenario.teams[0];
    if n == 0 {
        let t = ugv_time(params, env, &team.start, &team.finish)?;
        return Ok((
            MissionPlan {
                team_plans: vec![TeamPlan { team, rows: vec![] }],
            },
            t,
        ));
    }

    let cands = &candidates.points;
    let ground = ground_matrix(env, params, cands)?;
    let mut ex = Exact {
        params,
        cands,
        ground,
        from_start: cands.iter().map(|c| ugv_time(params, env, &team.start, c)).collect::<Result<_>>()?,
        to_finish: cands
            .iter()
            .map(|c| ugv_time(params, env, c, &team.finish))
            .collect::<Result<_>>()?,
        tables: HashMap::new(),
    };

    let mut best: Option<Split> = None;
    for perm in permutations(n) {
        for mask in 0..(1u32 << (n - 1)) {
            // bit i set: a new tour starts after position i
            let mut tours = vec![vec![perm[0]]];
            for i in 1..n {
                if mask & (1 << (i - 1)) != 0 {
                    tours.push(Vec::new());
                }
                tours.last_mut().expect("nonempty").push(perm[i]);
            }
            if let Some((cost, picks)) = best_for_split(&mut ex, &scenario.points, &tours) {
                if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
                    best = Some((cost, tours, picks));
                }
            }
        }
    }
    let (_, tours, picks) = best.ok_or(PlanError::InfeasibleInstance {
        team: team.index,
        point: scenario.points[0],
    })?;

    let mut rows: Vec<TourRow> = tours
        .iter()
        .zip(&picks)
        .map(|(t, &(r, c))| TourRow {
            release: cands[r],
            visits: t.iter().map(|&i| scenario.points[i]).collect(),
            collect: cands[c],
        })
        .collect();
    let last_release = rows.last().expect("at least one tour").release;
    while rows.len() < n {
        rows.push(TourRow::trivial(last_release));
    }
    let plan = MissionPlan {
        team_plans: vec![TeamPlan { team, rows }],
    };
    let objective = crate::planner::objective(&plan, params, env)?;
    Ok((plan, objective))
}

fn ground_matrix(env: &Environment, params: &VehicleParams, cands: &[Point3]) -> Result<Vec<Vec<f64>>> {
    let k = cands.len();
    let mut m = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in (i + 1)..k {
            let t = ugv_time(params, env, &cands[i], &cands[j])?;
            m[i][j] = t;
            m[j][i] = t;
        }
    }
    Ok(m)
}

/// Shortest Hamiltonian path from `s` to `t` by enumeration.
pub fn brute_force_index_path(dist: &[Vec<f64>], s: usize, t: usize) -> Result<Vec<usize>> {
    let n = dist.len();
    if n > MAX_BRUTE_FORCE_POINTS {
        return Err(PlanError::TooLarge(format!(
            "brute force handles at most {MAX_BRUTE_FORCE_POINTS} points, got {n}"
        )));
    }
    if n == 1 {
        return Ok(vec![s]);
    }
    let inner: Vec<usize> = (0..n).filter(|&v| v != s && v != t).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for perm in permutations(inner.len()) {
        let mut order = Vec::with_capacity(n);
        order.push(s);
        order.extend(perm.iter().map(|&i| inner[i]));
        order.push(t);
        let len = order_length(&order, dist);
        if best.as_ref().is_none_or(|(b, _)| len < *b) {
            best = Some((len, order));
        }
    }
    Ok(best.expect("at least one permutation").1)
}

/// Optimal visiting order with the same first and last points the
/// sequencing heuristic would use.
pub fn brute_force_path(points: &[Point3], start: &Point3, finish: &Point3, env: &Environment) -> Result<VisitSequence> {
    if points.len() > MAX_BRUTE_FORCE_POINTS {
        return Err(PlanError::TooLarge(format!(
            "brute force handles at most {MAX_BRUTE_FORCE_POINTS} points, got {}",
            points.len()
        )));
    }
    if points.is_empty() {
        return Ok(VisitSequence {
            order: vec![],
            points: vec![],
        });
    }
    let (s, t) = endpoint_indices(points, start, finish, env)?;
    let order = brute_force_index_path(&distance_matrix(points), s, t)?;
    let seq = order.iter().map(|&i| points[i]).collect();
    Ok(VisitSequence { order, points: seq })
}

/// Cheapest path through the layered graph by trying every combination.
pub fn enumerate_collect_choices(graph: &LayeredGraph) -> Result<Selection> {
    let combos = graph.layers.iter().try_fold(1usize, |acc, l| acc.checked_mul(l.len()));
    match combos {
        Some(c) if c <= MAX_COLLECT_COMBINATIONS => {}
        _ => {
            return Err(PlanError::TooLarge(format!(
                "more than {MAX_COLLECT_COMBINATIONS} collect combinations"
            )))
        }
    }
    let mut choice = vec![0usize; graph.layers.len()];
    let mut best: Option<Selection> = None;
    loop {
        let cost = graph.path_weight(&choice);
        if best.as_ref().is_none_or(|b| cost < b.cost) {
            best = Some(Selection {
                nodes: choice.clone(),
                cost,
            });
        }
        // odometer with the last layer fastest, so ties keep the
        // lexicographically smallest choice
        let mut l = graph.layers.len();
        loop {
            if l == 0 {
                return Ok(best.expect("at least one combination"));
            }
            l -= 1;
            choice[l] += 1;
            if choice[l] < graph.layers[l].len() {
                break;
            }
            choice[l] = 0;
        }
    }
}
