//! Problem instances and their JSON form.

use serde::{Deserialize, Serialize};

use crate::error::{PlanError, Result};
use crate::geometry::{Environment, Point3};
use crate::kinematics::VehicleParams;
use crate::partition::Team;

pub const SCENARIO_SCHEMA: &str = "teamplan.scenario/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub environment: Environment,
    pub params: VehicleParams,
    pub teams: Vec<Team>,
    pub points: Vec<Point3>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// UAV flight paths are unaffected by unknown obstacles; only the ground
    /// may hold surprises. Required for local release/collect adjustment.
    #[serde(default = "yes")]
    pub clear_airspace: bool,
}

fn yes() -> bool {
    true
}

#[derive(Serialize, Deserialize)]
struct ScenarioDocument {
    schema: String,
    #[serde(flatten)]
    scenario: Scenario,
}

impl Scenario {
    pub fn new(environment: Environment, params: VehicleParams, teams: Vec<Team>, points: Vec<Point3>) -> Self {
        Self {
            environment,
            params,
            teams,
            points,
            seed: None,
            clear_airspace: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let z = self.environment.min_flight_altitude();
        if (self.params.z_min - z).abs() > 1e-9 {
            return Err(PlanError::InvalidScenario(format!(
                "params.z_min = {} differs from the environment's minimum flight altitude {z}",
                self.params.z_min
            )));
        }
        if self.teams.is_empty() {
            return Err(PlanError::InvalidScenario("at least one team is required".into()));
        }
        for (k, t) in self.teams.iter().enumerate() {
            if t.index != k + 1 {
                return Err(PlanError::InvalidScenario(format!(
                    "team at position {k} has index {}, expected {}",
                    t.index,
                    k + 1
                )));
            }
            for (name, p) in [("start", &t.start), ("finish", &t.finish)] {
                if !self.environment.is_feasible_ground(p) {
                    return Err(PlanError::InvalidScenario(format!(
                        "team {} {name} {p:?} is not a feasible ground point",
                        t.index
                    )));
                }
            }
        }
        for p in &self.points {
            if p.z.is_nan() || p.z <= 0.0 || !self.environment.is_feasible(p) {
                return Err(PlanError::InvalidScenario(format!(
                    "monitoring point {p:?} is not a feasible air point"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let doc = ScenarioDocument {
            schema: SCENARIO_SCHEMA.to_string(),
            scenario: self.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("scenario serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScenarioDocument = serde_json::from_str(text).map_err(|e| PlanError::InvalidScenario(e.to_string()))?;
        if doc.schema != SCENARIO_SCHEMA {
            return Err(PlanError::InvalidScenario(format!("unsupported schema {:?}", doc.schema)));
        }
        Ok(doc.scenario)
    }
}
