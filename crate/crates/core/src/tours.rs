//! Greedy packing of a visit sequence into maximal energy-feasible tours.
//!
//! Each tour is released at the ground projection of its first point. Points
//! are appended while at least one collect point remains admissible, where a
//! candidate collect point is the ground projection of any point already in
//! the tour and admissibility means both robust energy conditions hold:
//!
//! * flight time with that landing point plus `delta_a` fits the budget;
//! * UGV time from release to that point plus `delta_g` fits the budget.

use crate::error::{PlanError, Result};
use crate::geometry::{Environment, Point3};
use crate::kinematics::{ugv_time, FlightClock, TourRow, VehicleParams};
use crate::sequencing::VisitSequence;

/// Slack allowed on time comparisons (s).
pub const TIME_EPS: f64 = 1e-6;

/// Tours before collect selection. Every row's collect still equals its
/// release; trivial rows (after the sequence is exhausted) repeat the
/// previous release and carry an empty candidate set.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialTeamPlan {
    pub rows: Vec<TourRow>,
    pub candidate_sets: Vec<Vec<Point3>>,
}

impl PartialTeamPlan {
    /// Indices of rows that visit at least one point.
    pub fn tour_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.iter().enumerate().filter(|(_, r)| !r.is_trivial()).map(|(i, _)| i)
    }

    pub fn tour_count(&self) -> usize {
        self.tour_indices().count()
    }

    /// Rows whose default collect (the release itself) violates the energy
    /// conditions; their collect must come from the candidate set.
    pub fn rows_with_infeasible_default(&self) -> Vec<usize> {
        self.tour_indices()
            .filter(|&i| !self.candidate_sets[i].contains(&self.rows[i].release))
            .collect()
    }
}

fn fits(time: f64, margin: f64, budget: f64) -> bool {
    time + margin <= budget + TIME_EPS
}

pub fn build_feasible_tours(seq: &VisitSequence, params: &VehicleParams, env: &Environment) -> Result<PartialTeamPlan> {
    let n = seq.len();
    let budget = params.tau_a_max;
    let projections: Vec<Point3> = seq.points.iter().map(|p| env.project_to_ground(p)).collect();

    for (p, foot) in seq.points.iter().zip(&projections) {
        let single = TourRow {
            release: *foot,
            visits: vec![*p],
            collect: *foot,
        };
        if !fits(crate::kinematics::tour_time(params, &single), params.delta_a, budget) || !fits(0.0, params.delta_g, budget) {
            return Err(PlanError::InfeasibleInstance { team: 0, point: *p });
        }
    }

    let mut rows = Vec::with_capacity(n);
    let mut candidate_sets = Vec::with_capacity(n);
    let mut k = 0;
    for _ in 0..n {
        if k == n {
            let prev = rows.last().map(|r: &TourRow| r.release).expect("a tour precedes exhaustion");
            rows.push(TourRow::trivial(prev));
            candidate_sets.push(Vec::new());
            continue;
        }
        let release = projections[k];
        let mut clock = FlightClock::start(params, release);
        let mut visits = Vec::new();
        // distinct projections of the tour's points with their UGV time from release
        let mut collects: Vec<(Point3, f64)> = Vec::new();
        let mut accepted: Vec<Point3> = Vec::new();

        while k < n {
            let p = seq.points[k];
            let mut trial = clock.clone();
            trial.visit(p);
            let mut trial_collects = collects.clone();
            if !trial_collects.iter().any(|(c, _)| *c == projections[k]) {
                let t = ugv_time(params, env, &release, &projections[k])?;
                trial_collects.push((projections[k], t));
            }
            let admissible: Vec<Point3> = trial_collects
                .iter()
                .filter(|(c, ground)| fits(trial.time_landing_at(c), params.delta_a, budget) && fits(*ground, params.delta_g, budget))
                .map(|(c, _)| *c)
                .collect();
            if admissible.is_empty() {
                break;
            }
            clock = trial;
            collects = trial_collects;
            accepted = admissible;
            visits.push(p);
            k += 1;
        }
        debug_assert!(!visits.is_empty(), "singleton check guarantees progress");
        rows.push(TourRow {
            release,
            visits,
            collect: release,
        });
        candidate_sets.push(accepted);
    }
    Ok(PartialTeamPlan { rows, candidate_sets })
}
