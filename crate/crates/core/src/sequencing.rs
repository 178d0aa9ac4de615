//! Visiting order of a team's monitoring points.
//!
//! The first point is the one nearest the team start and the last is the one
//! nearest the team finish. In between, a Christofides-style construction
//! for paths with fixed endpoints: minimum spanning tree, minimum-weight
//! matching on the vertices of wrong parity (the two endpoints must end up
//! odd, everything else even), an Euler path from start to finish,
//! shortcutting, then 2-opt with both endpoints pinned.

use crate::error::Result;
use crate::geometry::{Environment, Point3};
use crate::matching::min_weight_perfect_matching;
use crate::partition::anchor_distance;

const IMPROVEMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct VisitSequence {
    /// Indices into the input point list, in visiting order.
    pub order: Vec<usize>,
    pub points: Vec<Point3>,
}

impl VisitSequence {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Straight-line cruise length through the points.
    pub fn cruise_length(&self) -> f64 {
        path_length(&self.points)
    }
}

pub fn path_length(points: &[Point3]) -> f64 {
    points.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Length of an index path under a distance matrix.
pub fn order_length(order: &[usize], dist: &[Vec<f64>]) -> f64 {
    order.windows(2).map(|w| dist[w[0]][w[1]]).sum()
}

pub fn distance_matrix(points: &[Point3]) -> Vec<Vec<f64>> {
    points.iter().map(|a| points.iter().map(|b| a.distance(b)).collect()).collect()
}

/// Indices of the points that must open and close the sequence.
///
/// Ties go to the smaller index. If both roles pick the same point and
/// there are at least two points, the finish role falls to the runner-up.
pub fn endpoint_indices(points: &[Point3], start: &Point3, finish: &Point3, env: &Environment) -> Result<(usize, usize)> {
    let argmin = |anchor: &Point3, skip: Option<usize>| -> Result<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in points.iter().enumerate() {
            if Some(i) == skip {
                continue;
            }
            let d = anchor_distance(env, p, anchor)?;
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((i, d));
            }
        }
        Ok(best.expect("nonempty candidate set").0)
    };
    let first = argmin(start, None)?;
    let mut last = argmin(finish, None)?;
    if last == first && points.len() >= 2 {
        last = argmin(finish, Some(first))?;
    }
    Ok((first, last))
}

pub fn plan_visit_sequence(points: &[Point3], start: &Point3, finish: &Point3, env: &Environment) -> Result<VisitSequence> {
    if points.is_empty() {
        return Ok(VisitSequence {
            order: Vec::new(),
            points: Vec::new(),
        });
    }
    let (first, last) = endpoint_indices(points, start, finish, env)?;
    let order = if points.len() == 1 {
        vec![first]
    } else {
        let dist = distance_matrix(points);
        let path = christofides_path(&dist, first, last);
        two_opt_pinned(path, &dist)
    };
    let seq = order.iter().map(|&i| points[i]).collect();
    Ok(VisitSequence { order, points: seq })
}

/// Christofides construction for a Hamiltonian path from `s` to `t`.
pub fn christofides_path(dist: &[Vec<f64>], s: usize, t: usize) -> Vec<usize> {
    let n = dist.len();
    assert!(s != t && s < n && t < n);
    if n == 2 {
        return vec![s, t];
    }

    let mut edges = minimum_spanning_tree(dist);
    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let wrong_parity: Vec<usize> = (0..n)
        .filter(|&v| {
            let want_odd = v == s || v == t;
            (degree[v] % 2 == 1) != want_odd
        })
        .collect();
    let mate = min_weight_perfect_matching(wrong_parity.len(), |i, j| dist[wrong_parity[i]][wrong_parity[j]]);
    for (i, &j) in mate.iter().enumerate() {
        if i < j {
            edges.push((wrong_parity[i], wrong_parity[j]));
        }
    }

    let walk = euler_path(n, &edges, s);
    let mut seen = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for v in walk {
        if v != t && !seen[v] {
            seen[v] = true;
            order.push(v);
        }
    }
    order.push(t);
    order
}

/// Prim's algorithm on a dense matrix, O(n^2).
fn minimum_spanning_tree(dist: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n = dist.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut link = vec![0usize; n];
    let mut edges = Vec::with_capacity(n.saturating_sub(1));
    best[0] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .expect("vertex left");
        in_tree[u] = true;
        if u != 0 {
            edges.push((link[u], u));
        }
        for v in 0..n {
            if !in_tree[v] && dist[u][v] < best[v] {
                best[v] = dist[u][v];
                link[v] = u;
            }
        }
    }
    edges
}

/// Hierholzer's algorithm on a multigraph whose only odd vertices are the
/// start and one other vertex.
fn euler_path(n: usize, edges: &[(usize, usize)], start: usize) -> Vec<usize> {
    let mut adj = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut used = vec![false; edges.len()];
    let mut next = vec![0usize; n];
    let mut stack = vec![start];
    let mut path = Vec::with_capacity(edges.len() + 1);
    while let Some(&v) = stack.last() {
        while next[v] < adj[v].len() && used[adj[v][next[v]].1] {
            next[v] += 1;
        }
        if let Some(&(u, e)) = adj[v].get(next[v]) {
            used[e] = true;
            stack.push(u);
        } else {
            path.push(v);
            stack.pop();
        }
    }
    path.reverse();
    path
}

/// Best-improvement 2-opt keeping the first and last entries in place.
pub fn two_opt_pinned(mut order: Vec<usize>, dist: &[Vec<f64>]) -> Vec<usize> {
    let n = order.len();
    if n < 4 {
        return order;
    }
    loop {
        let mut best = (0.0, 0, 0);
        for i in 1..n - 2 {
            for j in (i + 1)..n - 1 {
                let (a, b, c, d) = (order[i - 1], order[i], order[j], order[j + 1]);
                let delta = dist[a][c] + dist[b][d] - dist[a][b] - dist[c][d];
                if delta < best.0 {
                    best = (delta, i, j);
                }
            }
        }
        if best.0 >= -IMPROVEMENT_EPS {
            return order;
        }
        order[best.1..=best.2].reverse();
    }
}
