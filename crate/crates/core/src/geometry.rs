//! World model: a bounded cuboid with axis-aligned box obstacles.
//!
//! Ground planning works on the plane `z = 0`. An obstacle blocks the ground
//! when it rests on it (`min z <= 0 < max z`); its footprint interior is then
//! infeasible for ground vehicles. Boundaries are feasible (closed feasible
//! set), so vehicles may drive along obstacle faces and through corners.
//!
//! Shortest ground paths are exact Euclidean shortest paths computed on a
//! visibility graph whose nodes are the obstacle footprint corners.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};

/// Geometric tolerance in meters for boundary tests.
pub const GEOM_EPS: f64 = 1e-7;

/// Lower bound on the connectivity grid resolution (m).
const GRID_MIN_RESOLUTION: f64 = 5.0;
/// Upper bound on connectivity grid cells per axis.
const GRID_MAX_CELLS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    /// The point with its altitude dropped to the ground plane.
    pub fn on_ground(self) -> Self {
        Self { z: 0.0, ..self }
    }

    pub fn at_altitude(self, z: f64) -> Self {
        Self { z, ..self }
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    fn xy(&self) -> (f64, f64) {
        (self.x, self.y)
    }
}

/// Extent of the world: `[0, x_max] x [0, y_max] x [0, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub x_max: f64,
    pub y_max: f64,
    pub z_max: f64,
}

impl Bounds {
    pub const fn new(x_max: f64, y_max: f64, z_max: f64) -> Self {
        Self { x_max, y_max, z_max }
    }

    pub fn contains(&self, p: &Point3) -> bool {
        p.x >= -GEOM_EPS
            && p.x <= self.x_max + GEOM_EPS
            && p.y >= -GEOM_EPS
            && p.y <= self.y_max + GEOM_EPS
            && p.z >= -GEOM_EPS
            && p.z <= self.z_max + GEOM_EPS
    }

    fn contains_xy(&self, (x, y): (f64, f64)) -> bool {
        x >= -GEOM_EPS && x <= self.x_max + GEOM_EPS && y >= -GEOM_EPS && y <= self.y_max + GEOM_EPS
    }
}

/// Axis-aligned bounding box of an obstacle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BoxObstacleRepr")]
pub struct BoxObstacle {
    pub min_corner: Point3,
    pub max_corner: Point3,
}

#[derive(Deserialize)]
struct BoxObstacleRepr {
    min_corner: Point3,
    max_corner: Point3,
}

impl TryFrom<BoxObstacleRepr> for BoxObstacle {
    type Error = PlanError;

    fn try_from(repr: BoxObstacleRepr) -> Result<Self> {
        BoxObstacle::new(repr.min_corner, repr.max_corner)
    }
}

impl BoxObstacle {
    pub fn new(min_corner: Point3, max_corner: Point3) -> Result<Self> {
        if !min_corner.is_finite() || !max_corner.is_finite() {
            return Err(PlanError::InvalidEnvironment("obstacle corner is not finite".into()));
        }
        if min_corner.x > max_corner.x || min_corner.y > max_corner.y || min_corner.z > max_corner.z {
            return Err(PlanError::InvalidEnvironment(format!(
                "obstacle min corner {min_corner:?} exceeds max corner {max_corner:?}"
            )));
        }
        Ok(Self { min_corner, max_corner })
    }

    /// Convenience constructor from `[x0, x1] x [y0, y1] x [z0, z1]`.
    pub fn from_ranges(x: (f64, f64), y: (f64, f64), z: (f64, f64)) -> Result<Self> {
        Self::new(Point3::new(x.0, y.0, z.0), Point3::new(x.1, y.1, z.1))
    }

    pub fn blocks_ground(&self) -> bool {
        self.min_corner.z <= GEOM_EPS && self.max_corner.z > GEOM_EPS
    }

    fn footprint(&self) -> Rect {
        Rect {
            x0: self.min_corner.x,
            y0: self.min_corner.y,
            x1: self.max_corner.x,
            y1: self.max_corner.y,
        }
    }

    /// True when `p` lies in the obstacle interior. On the ground plane a
    /// grounded obstacle occupies its whole open footprint.
    pub fn contains(&self, p: &Point3) -> bool {
        if !self.footprint().contains_strict(p.xy()) {
            return false;
        }
        if p.z <= GEOM_EPS {
            self.blocks_ground()
        } else {
            p.z > self.min_corner.z + GEOM_EPS && p.z < self.max_corner.z - GEOM_EPS
        }
    }

    /// True when the open segment `a -> b` passes through the interior.
    pub fn intersects_segment(&self, a: &Point3, b: &Point3) -> bool {
        let lo = [self.min_corner.x, self.min_corner.y, self.min_corner.z];
        let hi = [self.max_corner.x, self.max_corner.y, self.max_corner.z];
        let start = [a.x, a.y, a.z];
        let dir = [b.x - a.x, b.y - a.y, b.z - a.z];
        let Some((t0, t1)) = clip_segment(&start, &dir, &lo, &hi) else {
            return false;
        };
        if t1 - t0 <= 1e-12 {
            return false;
        }
        let tm = 0.5 * (t0 + t1);
        let mid = Point3::new(a.x + tm * dir[0], a.y + tm * dir[1], a.z + tm * dir[2]);
        self.contains(&mid)
    }
}

/// Liang-Barsky clipping of `start + t * dir`, `t in [0, 1]`, against a
/// closed axis-aligned box. Returns the parameter interval inside the box.
fn clip_segment(start: &[f64], dir: &[f64], lo: &[f64], hi: &[f64]) -> Option<(f64, f64)> {
    let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
    for axis in 0..start.len() {
        for (p, q) in [(-dir[axis], start[axis] - lo[axis]), (dir[axis], hi[axis] - start[axis])] {
            if p == 0.0 {
                if q < 0.0 {
                    return None;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
    }
    (t0 <= t1).then_some((t0, t1))
}

/// Ground footprint of an obstacle.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Rect {
    x0: f64,
    y0: f64,
    x1: f64,
    y1: f64,
}

impl Rect {
    fn contains_strict(&self, (x, y): (f64, f64)) -> bool {
        x > self.x0 + GEOM_EPS && x < self.x1 - GEOM_EPS && y > self.y0 + GEOM_EPS && y < self.y1 - GEOM_EPS
    }

    fn has_interior(&self) -> bool {
        self.x1 - self.x0 > 2.0 * GEOM_EPS && self.y1 - self.y0 > 2.0 * GEOM_EPS
    }

    fn crosses_segment(&self, a: (f64, f64), b: (f64, f64)) -> bool {
        let start = [a.0, a.1];
        let dir = [b.0 - a.0, b.1 - a.1];
        let Some((t0, t1)) = clip_segment(&start, &dir, &[self.x0, self.y0], &[self.x1, self.y1]) else {
            return false;
        };
        if t1 - t0 <= 1e-12 {
            return false;
        }
        let tm = 0.5 * (t0 + t1);
        self.contains_strict((a.0 + tm * dir[0], a.1 + tm * dir[1]))
    }

    fn clipped_to(&self, bounds: &Bounds) -> Option<Rect> {
        let r = Rect {
            x0: self.x0.max(0.0),
            y0: self.y0.max(0.0),
            x1: self.x1.min(bounds.x_max),
            y1: self.y1.min(bounds.y_max),
        };
        (r.x0 <= r.x1 && r.y0 <= r.y1).then_some(r)
    }

    fn corners(&self) -> [(f64, f64); 4] {
        [(self.x0, self.y0), (self.x1, self.y0), (self.x1, self.y1), (self.x0, self.y1)]
    }

    fn edges(&self) -> [Segment2; 4] {
        let c = self.corners();
        [
            Segment2(c[0], c[1]),
            Segment2(c[1], c[2]),
            Segment2(c[3], c[2]),
            Segment2(c[0], c[3]),
        ]
    }
}

/// Axis-aligned segment (either horizontal or vertical).
#[derive(Debug, Clone, Copy)]
struct Segment2((f64, f64), (f64, f64));

impl Segment2 {
    fn closest_point(&self, (px, py): (f64, f64)) -> (f64, f64) {
        let (a, b) = (self.0, self.1);
        (px.clamp(a.0.min(b.0), a.0.max(b.0)), py.clamp(a.1.min(b.1), a.1.max(b.1)))
    }

    fn is_vertical(&self) -> bool {
        self.0 .0 == self.1 .0
    }

    /// Intersection of a horizontal and a vertical segment.
    fn cross(&self, other: &Segment2) -> Option<(f64, f64)> {
        let (h, v) = match (self.is_vertical(), other.is_vertical()) {
            (false, true) => (self, other),
            (true, false) => (other, self),
            _ => return None,
        };
        let x = v.0 .0;
        let y = h.0 .1;
        let (hx0, hx1) = (h.0 .0.min(h.1 .0), h.0 .0.max(h.1 .0));
        let (vy0, vy1) = (v.0 .1.min(v.1 .1), v.0 .1.max(v.1 .1));
        (x >= hx0 && x <= hx1 && y >= vy0 && y <= vy1).then_some((x, y))
    }
}

/// Serialized form of an [`Environment`]; derived data is rebuilt on load.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub bounds: Bounds,
    #[serde(default)]
    pub known_obstacles: Vec<BoxObstacle>,
    pub min_flight_altitude: f64,
}

/// Immutable world model with a precomputed ground visibility graph.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "EnvironmentSpec", into = "EnvironmentSpec")]
pub struct Environment {
    bounds: Bounds,
    known_obstacles: Vec<BoxObstacle>,
    min_flight_altitude: f64,
    footprints: Vec<Rect>,
    corners: Vec<(f64, f64)>,
    corner_edges: Vec<Vec<(usize, f64)>>,
}

impl PartialEq for Environment {
    fn eq(&self, other: &Self) -> bool {
        self.bounds == other.bounds
            && self.known_obstacles == other.known_obstacles
            && self.min_flight_altitude == other.min_flight_altitude
    }
}

impl TryFrom<EnvironmentSpec> for Environment {
    type Error = PlanError;

    fn try_from(spec: EnvironmentSpec) -> Result<Self> {
        Environment::new(spec.bounds, spec.known_obstacles, spec.min_flight_altitude)
    }
}

impl From<Environment> for EnvironmentSpec {
    fn from(env: Environment) -> Self {
        env.to_spec()
    }
}

/// Ordered ground waypoints with their total length.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundPath {
    pub waypoints: Vec<Point3>,
    pub length: f64,
}

impl Environment {
    /// Builds and validates an environment. Fails if any obstacle reaches
    /// above the minimum flight altitude or the feasible ground is not
    /// connected.
    pub fn new(bounds: Bounds, known_obstacles: Vec<BoxObstacle>, min_flight_altitude: f64) -> Result<Self> {
        if !(bounds.x_max > 0.0 && bounds.y_max > 0.0 && bounds.z_max > 0.0)
            || !(bounds.x_max.is_finite() && bounds.y_max.is_finite() && bounds.z_max.is_finite())
        {
            return Err(PlanError::InvalidEnvironment(format!(
                "bounds must be positive and finite: {bounds:?}"
            )));
        }
        if !(min_flight_altitude > 0.0 && min_flight_altitude <= bounds.z_max) {
            return Err(PlanError::InvalidEnvironment(format!(
                "minimum flight altitude {min_flight_altitude} must lie in (0, {}]",
                bounds.z_max
            )));
        }
        for ob in &known_obstacles {
            if ob.max_corner.z > min_flight_altitude + GEOM_EPS {
                return Err(PlanError::InvalidEnvironment(format!(
                    "obstacle {ob:?} extends above the minimum flight altitude {min_flight_altitude}"
                )));
            }
        }

        let footprints: Vec<Rect> = known_obstacles
            .iter()
            .filter(|ob| ob.blocks_ground())
            .map(BoxObstacle::footprint)
            .filter(Rect::has_interior)
            .collect();

        check_ground_connectivity(&bounds, &footprints)?;

        let mut corners: Vec<(f64, f64)> = Vec::new();
        for rect in &footprints {
            let Some(clipped) = rect.clipped_to(&bounds) else {
                continue;
            };
            for c in clipped.corners() {
                if !footprints.iter().any(|f| f.contains_strict(c)) && !corners.contains(&c) {
                    corners.push(c);
                }
            }
        }
        let mut corner_edges = vec![Vec::new(); corners.len()];
        for i in 0..corners.len() {
            for j in (i + 1)..corners.len() {
                if segment_visible(&footprints, corners[i], corners[j]) {
                    let d = dist2(corners[i], corners[j]);
                    corner_edges[i].push((j, d));
                    corner_edges[j].push((i, d));
                }
            }
        }

        Ok(Self {
            bounds,
            known_obstacles,
            min_flight_altitude,
            footprints,
            corners,
            corner_edges,
        })
    }

    /// Obstacle-free world.
    pub fn open(bounds: Bounds, min_flight_altitude: f64) -> Result<Self> {
        Self::new(bounds, Vec::new(), min_flight_altitude)
    }

    /// This environment with extra obstacles added (e.g. ones unknown at
    /// planning time). The result is validated like any environment.
    pub fn with_additional_obstacles(&self, extra: &[BoxObstacle]) -> Result<Self> {
        let mut obstacles = self.known_obstacles.clone();
        obstacles.extend_from_slice(extra);
        Self::new(self.bounds, obstacles, self.min_flight_altitude)
    }

    pub fn bounds(&self) -> Bounds {
        self.bounds
    }

    pub fn known_obstacles(&self) -> &[BoxObstacle] {
        &self.known_obstacles
    }

    pub fn min_flight_altitude(&self) -> f64 {
        self.min_flight_altitude
    }

    pub fn to_spec(&self) -> EnvironmentSpec {
        EnvironmentSpec {
            bounds: self.bounds,
            known_obstacles: self.known_obstacles.clone(),
            min_flight_altitude: self.min_flight_altitude,
        }
    }

    /// Membership in the closed feasible space.
    pub fn is_feasible(&self, p: &Point3) -> bool {
        p.is_finite() && self.bounds.contains(p) && !self.known_obstacles.iter().any(|ob| ob.contains(p))
    }

    pub fn is_feasible_ground(&self, p: &Point3) -> bool {
        p.z.abs() <= GEOM_EPS && self.is_feasible(p)
    }

    fn ground_xy_feasible(&self, xy: (f64, f64)) -> bool {
        self.bounds.contains_xy(xy) && !self.footprints.iter().any(|f| f.contains_strict(xy))
    }

    /// True when the straight segment avoids every known obstacle interior.
    pub fn segment_clear(&self, a: &Point3, b: &Point3) -> bool {
        !self.known_obstacles.iter().any(|ob| ob.intersects_segment(a, b))
    }

    /// Closest feasible ground point to `p`. Ties are broken by smallest
    /// `x`, then smallest `y`.
    pub fn project_to_ground(&self, p: &Point3) -> Point3 {
        let target = (p.x.clamp(0.0, self.bounds.x_max), p.y.clamp(0.0, self.bounds.y_max));
        if self.ground_xy_feasible(target) {
            return Point3::new(target.0, target.1, 0.0);
        }

        let bounds_rect = Rect {
            x0: 0.0,
            y0: 0.0,
            x1: self.bounds.x_max,
            y1: self.bounds.y_max,
        };
        let edges: Vec<Segment2> = self
            .footprints
            .iter()
            .chain(std::iter::once(&bounds_rect))
            .flat_map(Rect::edges)
            .collect();

        let mut candidates: Vec<(f64, f64)> = edges.iter().map(|e| e.closest_point(target)).collect();
        for (i, e) in edges.iter().enumerate() {
            for f in &edges[i + 1..] {
                if let Some(c) = e.cross(f) {
                    candidates.push(c);
                }
            }
        }

        let mut best: Option<((f64, f64), f64)> = None;
        for c in candidates {
            if !self.ground_xy_feasible(c) {
                continue;
            }
            let d = dist2(c, target);
            let better = match best {
                None => true,
                Some((b, bd)) => {
                    if d < bd - 1e-9 {
                        true
                    } else if d <= bd + 1e-9 {
                        c.0 < b.0 || (c.0 == b.0 && c.1 < b.1)
                    } else {
                        false
                    }
                }
            };
            if better {
                best = Some((c, d));
            }
        }
        // Connectivity validation guarantees a nonempty feasible ground set,
        // whose boundary is covered by the candidate edges above.
        let (c, _) = best.expect("feasible ground set is nonempty");
        Point3::new(c.0, c.1, 0.0)
    }

    /// Length of the shortest obstacle-avoiding ground path.
    pub fn ground_distance(&self, a: &Point3, b: &Point3) -> Result<f64> {
        let (a2, b2) = (a.xy(), b.xy());
        self.check_ground_endpoint(a)?;
        self.check_ground_endpoint(b)?;
        if segment_visible(&self.footprints, a2, b2) {
            return Ok(dist2(a2, b2));
        }
        self.route(a2, b2).map(|(_, len)| len)
    }

    /// Shortest obstacle-avoiding ground path with its waypoints.
    pub fn ground_shortest_path(&self, a: &Point3, b: &Point3) -> Result<GroundPath> {
        let (a2, b2) = (a.xy(), b.xy());
        self.check_ground_endpoint(a)?;
        self.check_ground_endpoint(b)?;
        if a2 == b2 {
            return Ok(GroundPath {
                waypoints: vec![a.on_ground()],
                length: 0.0,
            });
        }
        if segment_visible(&self.footprints, a2, b2) {
            return Ok(GroundPath {
                waypoints: vec![a.on_ground(), b.on_ground()],
                length: dist2(a2, b2),
            });
        }
        let (nodes, length) = self.route(a2, b2)?;
        let waypoints = nodes.into_iter().map(|(x, y)| Point3::new(x, y, 0.0)).collect();
        Ok(GroundPath { waypoints, length })
    }

    /// Straight-line 3D length; valid above the minimum flight altitude and
    /// for vertical take-off/landing legs.
    pub fn air_leg_length(&self, a: &Point3, b: &Point3) -> f64 {
        a.distance(b)
    }

    fn check_ground_endpoint(&self, p: &Point3) -> Result<()> {
        if self.ground_xy_feasible(p.xy()) && p.is_finite() {
            Ok(())
        } else {
            Err(PlanError::DisconnectedGround(format!("{p:?} is not a feasible ground point")))
        }
    }

    /// Dijkstra over corners plus the two endpoints.
    fn route(&self, a: (f64, f64), b: (f64, f64)) -> Result<(Vec<(f64, f64)>, f64)> {
        let n = self.corners.len();
        let (src, dst) = (n, n + 1);
        let pos = |i: usize| -> (f64, f64) {
            if i == src {
                a
            } else if i == dst {
                b
            } else {
                self.corners[i]
            }
        };
        let visible_from = |p: (f64, f64)| -> Vec<(usize, f64)> {
            (0..n)
                .filter(|&i| segment_visible(&self.footprints, p, self.corners[i]))
                .map(|i| (i, dist2(p, self.corners[i])))
                .collect()
        };
        let from_src = visible_from(a);
        let to_dst: Vec<Option<f64>> = {
            let mut v = vec![None; n];
            for (i, d) in visible_from(b) {
                v[i] = Some(d);
            }
            v
        };

        let total = n + 2;
        let mut dist = vec![f64::INFINITY; total];
        let mut prev = vec![usize::MAX; total];
        let mut done = vec![false; total];
        dist[src] = 0.0;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for (i, &d) in dist.iter().enumerate() {
                if !done[i] && d < best {
                    best = d;
                    u = i;
                }
            }
            if u == usize::MAX || u == dst {
                break;
            }
            done[u] = true;
            let mut relax = |v: usize, w: f64| {
                if dist[u] + w < dist[v] {
                    dist[v] = dist[u] + w;
                    prev[v] = u;
                }
            };
            if u == src {
                for &(v, w) in &from_src {
                    relax(v, w);
                }
            } else {
                for &(v, w) in &self.corner_edges[u] {
                    relax(v, w);
                }
                if let Some(w) = to_dst[u] {
                    relax(dst, w);
                }
            }
        }
        if !dist[dst].is_finite() {
            return Err(PlanError::DisconnectedGround(format!("no ground path from {a:?} to {b:?}")));
        }
        let mut nodes = vec![pos(dst)];
        let mut cur = dst;
        while cur != src {
            cur = prev[cur];
            nodes.push(pos(cur));
        }
        nodes.reverse();
        Ok((nodes, dist[dst]))
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn segment_visible(footprints: &[Rect], a: (f64, f64), b: (f64, f64)) -> bool {
    !footprints.iter().any(|f| f.crosses_segment(a, b))
}

/// Rejects environments whose free ground splits into several components,
/// using an occupancy grid at a quarter of the smallest footprint edge.
fn check_ground_connectivity(bounds: &Bounds, footprints: &[Rect]) -> Result<()> {
    if footprints.is_empty() {
        return Ok(());
    }
    let min_edge = footprints
        .iter()
        .map(|f| (f.x1 - f.x0).min(f.y1 - f.y0))
        .fold(f64::INFINITY, f64::min);
    let mut res = (min_edge / 4.0).max(GRID_MIN_RESOLUTION);
    res = res
        .max(bounds.x_max / GRID_MAX_CELLS as f64)
        .max(bounds.y_max / GRID_MAX_CELLS as f64);
    let nx = ((bounds.x_max / res).ceil() as usize).max(1);
    let ny = ((bounds.y_max / res).ceil() as usize).max(1);
    let (cw, ch) = (bounds.x_max / nx as f64, bounds.y_max / ny as f64);

    let mut blocked = vec![false; nx * ny];
    for f in footprints {
        let i0 = (f.x0 / cw).floor().clamp(0.0, nx as f64) as usize;
        let i1 = (f.x1 / cw).ceil().clamp(0.0, nx as f64) as usize;
        let j0 = (f.y0 / ch).floor().clamp(0.0, ny as f64) as usize;
        let j1 = (f.y1 / ch).ceil().clamp(0.0, ny as f64) as usize;
        for j in j0..j1 {
            for i in i0..i1 {
                let c = ((i as f64 + 0.5) * cw, (j as f64 + 0.5) * ch);
                if f.contains_strict(c) {
                    blocked[j * nx + i] = true;
                }
            }
        }
    }

    let free = blocked.iter().filter(|b| !**b).count();
    let Some(start) = blocked.iter().position(|b| !*b) else {
        return Err(PlanError::DisconnectedGround("no free ground".into()));
    };
    let mut seen = vec![false; nx * ny];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut reached = 1;
    while let Some(c) = queue.pop_front() {
        let (i, j) = (c % nx, c / nx);
        let mut push = |k: usize| {
            if !blocked[k] && !seen[k] {
                seen[k] = true;
                reached += 1;
                queue.push_back(k);
            }
        };
        if i > 0 {
            push(c - 1);
        }
        if i + 1 < nx {
            push(c + 1);
        }
        if j > 0 {
            push(c - nx);
        }
        if j + 1 < ny {
            push(c + nx);
        }
    }
    if reached == free {
        Ok(())
    } else {
        Err(PlanError::DisconnectedGround(format!(
            "occupancy grid at {res:.1} m has unreachable free cells ({reached} of {free} reached)"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn world() -> Environment {
        Environment::open(Bounds::new(4000.0, 4000.0, 500.0), 100.0).unwrap()
    }

    fn blocked_world() -> Environment {
        let ob = BoxObstacle::from_ranges((400.0, 600.0), (-100.0, 100.0), (0.0, 50.0)).unwrap();
        Environment::new(Bounds::new(4000.0, 4000.0, 500.0), vec![ob], 100.0).unwrap()
    }

    #[test]
    fn feasibility_basic() {
        assert!(world().is_feasible(&Point3::new(100.0, 100.0, 0.0)));
        assert!(!blocked_world().is_feasible(&Point3::new(500.0, 0.0, 10.0)));
        assert!(world().is_feasible(&Point3::new(4000.0, 4000.0, 500.0)));
        assert!(!world().is_feasible(&Point3::new(4000.1, 0.0, 0.0)));
        // faces are feasible
        assert!(blocked_world().is_feasible(&Point3::new(400.0, 0.0, 0.0)));
        assert!(blocked_world().is_feasible(&Point3::new(500.0, 50.0, 50.0)));
    }

    #[test]
    fn projection() {
        assert_eq!(
            world().project_to_ground(&Point3::new(500.0, 0.0, 100.0)),
            Point3::new(500.0, 0.0, 0.0)
        );
        assert_eq!(
            blocked_world().project_to_ground(&Point3::new(500.0, 0.0, 100.0)),
            Point3::new(400.0, 0.0, 0.0)
        );
        let p = Point3::new(10.0, 20.0, 0.0);
        assert_eq!(blocked_world().project_to_ground(&p), p);
    }

    #[test]
    fn ground_distance_examples() {
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1000.0, 0.0, 0.0);
        assert_eq!(world().ground_distance(&a, &b).unwrap(), 1000.0);
        let d = blocked_world().ground_distance(&a, &b).unwrap();
        let expected = 2.0 * (400.0_f64 * 400.0 + 100.0 * 100.0).sqrt() + 200.0;
        assert!((d - expected).abs() < 1e-9);
        assert!((d - 1024.62).abs() < 0.01);
        assert_eq!(blocked_world().ground_distance(&a, &a).unwrap(), 0.0);

        let path = blocked_world().ground_shortest_path(&a, &b).unwrap();
        assert_eq!(
            path.waypoints,
            vec![a, Point3::new(400.0, 100.0, 0.0), Point3::new(600.0, 100.0, 0.0), b]
        );
    }

    #[test]
    fn air_legs() {
        let w = world();
        assert_eq!(
            w.air_leg_length(&Point3::new(0.0, 0.0, 100.0), &Point3::new(300.0, 400.0, 100.0)),
            500.0
        );
        assert_eq!(w.air_leg_length(&Point3::new(0.0, 0.0, 0.0), &Point3::new(0.0, 0.0, 100.0)), 100.0);
        assert_eq!(w.air_leg_length(&Point3::new(1.0, 2.0, 3.0), &Point3::new(1.0, 2.0, 3.0)), 0.0);
    }

    #[test]
    fn infeasible_endpoint_is_reported() {
        let err = blocked_world()
            .ground_distance(&Point3::new(500.0, 50.0, 0.0), &Point3::new(0.0, 0.0, 0.0))
            .unwrap_err();
        assert!(matches!(err, PlanError::DisconnectedGround(_)));
    }

    #[test]
    fn rejects_tall_obstacle() {
        let ob = BoxObstacle::from_ranges((0.0, 10.0), (0.0, 10.0), (0.0, 150.0)).unwrap();
        assert!(matches!(
            Environment::new(Bounds::new(100.0, 100.0, 200.0), vec![ob], 100.0),
            Err(PlanError::InvalidEnvironment(_))
        ));
    }

    #[test]
    fn rejects_disconnected_ground() {
        // a wall spanning the full width splits the map
        let wall = BoxObstacle::from_ranges((-10.0, 1010.0), (480.0, 520.0), (0.0, 10.0)).unwrap();
        assert!(matches!(
            Environment::new(Bounds::new(1000.0, 1000.0, 200.0), vec![wall], 100.0),
            Err(PlanError::DisconnectedGround(_))
        ));
        // the same wall with a gap is fine
        let wall = BoxObstacle::from_ranges((-10.0, 900.0), (480.0, 520.0), (0.0, 10.0)).unwrap();
        assert!(Environment::new(Bounds::new(1000.0, 1000.0, 200.0), vec![wall], 100.0).is_ok());
    }

    #[test]
    fn rejects_inverted_box() {
        assert!(BoxObstacle::from_ranges((10.0, 0.0), (0.0, 1.0), (0.0, 1.0)).is_err());
    }

    #[test]
    fn floating_obstacle_does_not_block_ground() {
        let ob = BoxObstacle::from_ranges((400.0, 600.0), (-100.0, 100.0), (20.0, 50.0)).unwrap();
        let env = Environment::new(Bounds::new(4000.0, 4000.0, 500.0), vec![ob], 100.0).unwrap();
        let d = env
            .ground_distance(&Point3::new(0.0, 0.0, 0.0), &Point3::new(1000.0, 0.0, 0.0))
            .unwrap();
        assert_eq!(d, 1000.0);
        assert!(!env.is_feasible(&Point3::new(500.0, 0.0, 30.0)));
    }

    #[test]
    fn serde_round_trip_rebuilds_graph() {
        let env = blocked_world();
        let json = serde_json::to_string(&env).unwrap();
        let back: Environment = serde_json::from_str(&json).unwrap();
        assert_eq!(back, env);
        let a = Point3::new(0.0, 0.0, 0.0);
        let b = Point3::new(1000.0, 0.0, 0.0);
        assert_eq!(back.ground_distance(&a, &b).unwrap(), env.ground_distance(&a, &b).unwrap());
    }
}
