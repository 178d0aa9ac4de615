use thiserror::Error;

use crate::geometry::Point3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("invalid environment: {0}")]
    InvalidEnvironment(String),

    #[error("feasible ground set is disconnected: {0}")]
    DisconnectedGround(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A monitoring point cannot be served even by a singleton tour
    /// released from its own ground projection.
    #[error("infeasible instance: team {team} cannot serve point {point:?} within the flight budget")]
    InfeasibleInstance { team: usize, point: Point3 },

    #[error("plans are not structurally aligned: {0}")]
    StructureMismatch(String),

    #[error("random generation failed: {0}")]
    GenerationFailed(String),

    #[error("no admissible release/collect adjustment within budget for team {team}, tour {tour}")]
    AdjustmentExhausted { team: usize, tour: usize },

    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
}

pub type Result<T> = std::result::Result<T, PlanError>;
