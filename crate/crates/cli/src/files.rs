//! JSON plan files and CSV records.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};
use teamplan::kinematics::{recharge_time, tour_time, ugv_time, TourRow};
use teamplan::planner::{mission_time, objective};
use teamplan::robustness::row_robustness;
use teamplan::{MissionPlan, Point3, Scenario, Team, TeamPlan};

use crate::CliError;

pub const PLAN_SCHEMA: &str = "teamplan.plan/v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TourRecord {
    pub release: Point3,
    pub visits: Vec<Point3>,
    pub collect: Point3,
    pub trivial: bool,
    pub tau_a: f64,
    pub tau_g: f64,
    pub tau_c: f64,
    pub delta_hat_a: f64,
    pub delta_hat_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TeamRecord {
    pub team: Team,
    pub mission_time: f64,
    pub tours: Vec<TourRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanFile {
    pub schema: String,
    pub objective: f64,
    pub teams: Vec<TeamRecord>,
}

impl PlanFile {
    pub fn from_mission(mission: &MissionPlan, scenario: &Scenario) -> teamplan::Result<Self> {
        let params = &scenario.params;
        let env = &scenario.environment;
        let mut teams = Vec::with_capacity(mission.team_plans.len());
        for plan in &mission.team_plans {
            let mut tours = Vec::with_capacity(plan.rows.len());
            for row in &plan.rows {
                let rob = row_robustness(row, params, env)?;
                tours.push(TourRecord {
                    release: row.release,
                    visits: row.visits.clone(),
                    collect: row.collect,
                    trivial: row.is_trivial(),
                    tau_a: tour_time(params, row),
                    tau_g: ugv_time(params, env, &row.release, &row.collect)?,
                    tau_c: recharge_time(params, env, row)?,
                    delta_hat_a: rob.delta_hat_a,
                    delta_hat_g: rob.delta_hat_g,
                });
            }
            teams.push(TeamRecord {
                team: plan.team,
                mission_time: mission_time(plan, params, env)?,
                tours,
            });
        }
        Ok(Self {
            schema: PLAN_SCHEMA.to_string(),
            objective: objective(mission, params, env)?,
            teams,
        })
    }

    pub fn to_mission(&self) -> MissionPlan {
        MissionPlan {
            team_plans: self
                .teams
                .iter()
                .map(|t| TeamPlan {
                    team: t.team,
                    rows: t
                        .tours
                        .iter()
                        .map(|r| TourRow {
                            release: r.release,
                            visits: r.visits.clone(),
                            collect: r.collect,
                        })
                        .collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let plan: PlanFile = serde_json::from_str(text).map_err(|e| CliError::Parse(format!("plan file: {e}")))?;
        if plan.schema != PLAN_SCHEMA {
            return Err(CliError::Parse(format!("unsupported plan schema {:?}", plan.schema)));
        }
        Ok(plan)
    }
}

pub fn read_scenario(path: &Path) -> anyhow::Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Scenario::from_json(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())).into())
}

pub fn read_plan(path: &Path) -> anyhow::Result<PlanFile> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(PlanFile::from_json(&text)?)
}

pub fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("csv: {e}"))?;
    write_text(path, std::str::from_utf8(&bytes)?)
}
