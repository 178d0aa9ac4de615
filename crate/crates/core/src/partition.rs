//! Nearest-anchor assignment of monitoring points to teams.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geometry::{Environment, Point3};

/// A UAV-UGV team with its start and finish positions on the ground.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Team {
    /// 1-based team index.
    pub index: usize,
    pub start: Point3,
    pub finish: Point3,
}

/// Point indices per team, in input order. `teams[k]` belongs to the team
/// at position `k` of the input team list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub teams: Vec<Vec<usize>>,
}

impl Partition {
    pub fn points_of(&self, team: usize, points: &[Point3]) -> Vec<Point3> {
        self.teams[team].iter().map(|&i| points[i]).collect()
    }
}

/// Distance from an air point to a ground anchor: the straight line when it
/// clears every known obstacle, otherwise descent to the ground projection
/// followed by the shortest ground path (an upper bound).
pub fn anchor_distance(env: &Environment, p: &Point3, anchor: &Point3) -> Result<f64> {
    if env.segment_clear(p, anchor) {
        return Ok(p.distance(anchor));
    }
    let foot = env.project_to_ground(p);
    Ok(p.distance(&foot) + env.ground_distance(&foot, anchor)?)
}

/// Assigns each point to the team whose start or finish is nearest. Ties go
/// to the team listed first.
pub fn assign_points(teams: &[Team], points: &[Point3], env: &Environment) -> Result<Partition> {
    let mut assigned = vec![Vec::new(); teams.len()];
    for (i, p) in points.iter().enumerate() {
        let mut best: Option<(usize, f64)> = None;
        for (k, team) in teams.iter().enumerate() {
            let d = anchor_distance(env, p, &team.start)?.min(anchor_distance(env, p, &team.finish)?);
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((k, d));
            }
        }
        if let Some((k, _)) = best {
            assigned[k].push(i);
        }
    }
    Ok(Partition { teams: assigned })
}
