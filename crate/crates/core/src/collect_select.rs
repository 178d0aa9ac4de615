//! Collect-point selection as a shortest path through a layered graph.
//!
//! Layers alternate between single release nodes and the candidate collect
//! set of each tour: `start -> r1 -> C1 -> r2 -> C2 -> ... -> Ck -> finish`.
//! An edge into a collect candidate costs the longer of the flight and the
//! UGV drive for that tour; an edge out of it costs the longer of the drive
//! to the next release and the recharge. The drive to the finish carries no
//! recharge. Trivial rows add nothing and are skipped, so the path weight is
//! exactly the team's mission time.

use crate::error::Result;
use crate::geometry::{Environment, Point3};
use crate::kinematics::{recharge_time, tour_time, ugv_time, VehicleParams};
use crate::partition::Team;
use crate::planner::TeamPlan;
use crate::tours::PartialTeamPlan;

#[derive(Debug, Clone, PartialEq)]
pub struct LayeredGraph {
    pub layers: Vec<Vec<Point3>>,
    /// `weights[l][a][b]` is the edge from `layers[l][a]` to `layers[l + 1][b]`.
    pub weights: Vec<Vec<Vec<f64>>>,
    /// Row index of each non-trivial tour, in order. Tour `i` owns the
    /// collect layer `2 * i + 2`.
    pub tour_rows: Vec<usize>,
}

impl LayeredGraph {
    pub fn node_count(&self) -> usize {
        self.layers.iter().map(Vec::len).sum()
    }

    pub fn edge_count(&self) -> usize {
        self.layers.windows(2).map(|w| w[0].len() * w[1].len()).sum()
    }

    pub fn collect_layer(tour: usize) -> usize {
        2 * tour + 2
    }

    /// Weight of the path picking `choice[l]` in every layer.
    pub fn path_weight(&self, choice: &[usize]) -> f64 {
        (0..self.weights.len()).map(|l| self.weights[l][choice[l]][choice[l + 1]]).sum()
    }
}

/// Exact minimum over every combination of collect points.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    /// Node index per layer.
    pub nodes: Vec<usize>,
    pub cost: f64,
}

pub fn build_collect_graph(
    partial: &PartialTeamPlan,
    start: &Point3,
    finish: &Point3,
    params: &VehicleParams,
    env: &Environment,
) -> Result<LayeredGraph> {
    let tour_rows: Vec<usize> = partial.tour_indices().collect();
    let mut layers = vec![vec![*start]];
    for &i in &tour_rows {
        layers.push(vec![partial.rows[i].release]);
        layers.push(partial.candidate_sets[i].clone());
    }
    layers.push(vec![*finish]);

    let mut weights = Vec::with_capacity(layers.len() - 1);
    if tour_rows.is_empty() {
        weights.push(vec![vec![ugv_time(params, env, start, finish)?]]);
        return Ok(LayeredGraph {
            layers,
            weights,
            tour_rows,
        });
    }
    weights.push(vec![vec![ugv_time(params, env, start, &partial.rows[tour_rows[0]].release)?]]);
    for (t, &i) in tour_rows.iter().enumerate() {
        let row = &partial.rows[i];
        let candidates = &partial.candidate_sets[i];
        let mut into = Vec::with_capacity(candidates.len());
        let mut out = Vec::with_capacity(candidates.len());
        for c in candidates {
            let trial = row.with_collect(*c);
            into.push(ugv_time(params, env, &row.release, c)?.max(tour_time(params, &trial)));
            let edge = match tour_rows.get(t + 1) {
                Some(&next) => ugv_time(params, env, c, &partial.rows[next].release)?.max(recharge_time(params, env, &trial)?),
                None => ugv_time(params, env, c, finish)?,
            };
            out.push(vec![edge]);
        }
        weights.push(vec![into]);
        weights.push(out);
    }
    Ok(LayeredGraph {
        layers,
        weights,
        tour_rows,
    })
}

/// Layer-by-layer dynamic program. Ties go to the lower node index.
pub fn select_collect_points(graph: &LayeredGraph) -> Selection {
    let depth = graph.layers.len();
    let mut cost = vec![0.0];
    let mut parent: Vec<Vec<usize>> = vec![vec![0]];
    for l in 1..depth {
        let w = &graph.weights[l - 1];
        let mut next = Vec::with_capacity(graph.layers[l].len());
        let mut link = Vec::with_capacity(graph.layers[l].len());
        for b in 0..graph.layers[l].len() {
            let (a, c) = (0..cost.len())
                .map(|a| (a, cost[a] + w[a][b]))
                .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
            next.push(c);
            link.push(a);
        }
        cost = next;
        parent.push(link);
    }
    let mut nodes = vec![0; depth];
    for l in (1..depth).rev() {
        nodes[l - 1] = parent[l][nodes[l]];
    }
    Selection { nodes, cost: cost[0] }
}

/// Collect point chosen for each non-trivial tour.
pub fn chosen_collects(graph: &LayeredGraph, selection: &Selection) -> Vec<Point3> {
    (0..graph.tour_rows.len())
        .map(|t| {
            let l = LayeredGraph::collect_layer(t);
            graph.layers[l][selection.nodes[l]]
        })
        .collect()
}

/// Writes the chosen collect points into the tours.
pub fn finalize_team_plan(team: &Team, partial: &PartialTeamPlan, graph: &LayeredGraph, collects: &[Point3]) -> TeamPlan {
    let mut rows = partial.rows.clone();
    for (&i, c) in graph.tour_rows.iter().zip(collects) {
        rows[i].collect = *c;
    }
    TeamPlan { team: *team, rows }
}
