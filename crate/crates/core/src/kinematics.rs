//! Travel-time model for the UAV, the UGV and recharging.
//!
//! The UAV takes off vertically to the minimum flight altitude, cruises in
//! straight lines through its monitoring points, and lands vertically. A leg
//! moves horizontally and vertically at the same time, so its duration is
//! the larger of the two per-axis times.

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::geometry::{Environment, Point3};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Horizontal UAV speed (m/s).
    pub v_h: f64,
    /// Vertical UAV speed (m/s).
    pub v_v: f64,
    /// UGV speed (m/s).
    pub v_g: f64,
    /// Maximum continuous flight time (s).
    pub tau_a_max: f64,
    /// Robustness margin on UAV tour time (s).
    #[serde(default)]
    pub delta_a: f64,
    /// Robustness margin on UGV release-to-collect time (s).
    #[serde(default)]
    pub delta_g: f64,
    /// Recharge ratio; 0 models a battery swap.
    pub gamma: f64,
    /// Minimum flight altitude (m).
    pub z_min: f64,
    /// Time budget constant for collect-point selection. Selection is exact
    /// and never approaches the budget.
    #[serde(default = "default_sigma")]
    pub sigma: f64,
}

fn default_sigma() -> f64 {
    1.0
}

impl Default for VehicleParams {
    fn default() -> Self {
        Self {
            v_h: 10.0,
            v_v: 2.0,
            v_g: 2.5,
            tau_a_max: 600.0,
            delta_a: 0.0,
            delta_g: 0.0,
            gamma: 1.0,
            z_min: 100.0,
            sigma: default_sigma(),
        }
    }
}

impl VehicleParams {
    pub fn with_margins(self, delta_a: f64, delta_g: f64) -> Self {
        Self { delta_a, delta_g, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("v_h", self.v_h),
            ("v_v", self.v_v),
            ("v_g", self.v_g),
            ("tau_a_max", self.tau_a_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(PlanError::InvalidParams(format!("{name} must be positive, got {v}")));
            }
        }
        let nonneg = [
            ("delta_a", self.delta_a),
            ("delta_g", self.delta_g),
            ("gamma", self.gamma),
            ("z_min", self.z_min),
            ("sigma", self.sigma),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(PlanError::InvalidParams(format!("{name} must be nonnegative, got {v}")));
            }
        }
        Ok(())
    }

    /// Constant take-off (or landing) time.
    pub fn tau_tl(&self) -> f64 {
        self.z_min / self.v_v
    }
}

/// One tour: release on the ground, visit points in the air, land at the
/// collect point. A row without visits is a trivial (zero-length) tour.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourRow {
    pub release: Point3,
    pub visits: Vec<Point3>,
    pub collect: Point3,
}

impl TourRow {
    pub fn trivial(at: Point3) -> Self {
        Self {
            release: at,
            visits: Vec::new(),
            collect: at,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.visits.is_empty()
    }

    pub fn with_collect(&self, collect: Point3) -> Self {
        Self { collect, ..self.clone() }
    }
}

pub fn uav_leg_time(params: &VehicleParams, a: &Point3, b: &Point3) -> f64 {
    let horizontal = a.horizontal_distance(b) / params.v_h;
    let vertical = (a.z - b.z).abs() / params.v_v;
    horizontal.max(vertical)
}

/// Flight time of a tour, 0 for trivial rows.
pub fn tour_time(params: &VehicleParams, row: &TourRow) -> f64 {
    if row.is_trivial() {
        return 0.0;
    }
    let mut clock = FlightClock::start(params, row.release);
    for v in &row.visits {
        clock.visit(*v);
    }
    clock.time_landing_at(&row.collect)
}

/// Incremental tour timer: accumulates take-off and cruise time so that the
/// total for several candidate landing points is O(1) each.
#[derive(Debug, Clone)]
pub(crate) struct FlightClock<'a> {
    params: &'a VehicleParams,
    position: Point3,
    elapsed: f64,
}

impl<'a> FlightClock<'a> {
    pub(crate) fn start(params: &'a VehicleParams, release: Point3) -> Self {
        Self {
            params,
            position: release.at_altitude(params.z_min),
            elapsed: params.tau_tl(),
        }
    }

    pub(crate) fn visit(&mut self, p: Point3) {
        self.elapsed += uav_leg_time(self.params, &self.position, &p);
        self.position = p;
    }

    pub(crate) fn time_landing_at(&self, collect: &Point3) -> f64 {
        let exit = collect.at_altitude(self.params.z_min);
        self.elapsed + uav_leg_time(self.params, &self.position, &exit) + self.params.tau_tl()
    }
}

pub fn ugv_time(params: &VehicleParams, env: &Environment, a: &Point3, b: &Point3) -> Result<f64> {
    Ok(env.ground_distance(a, b)? / params.v_g)
}

/// Linear charging model: `gamma * max(tour time, UGV release-to-collect time)`.
pub fn recharge_time(params: &VehicleParams, env: &Environment, row: &TourRow) -> Result<f64> {
    if row.is_trivial() {
        return Ok(0.0);
    }
    let flight = tour_time(params, row);
    let ground = ugv_time(params, env, &row.release, &row.collect)?;
    Ok(params.gamma * flight.max(ground))
}
