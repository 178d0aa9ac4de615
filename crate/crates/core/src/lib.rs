//! Robust, energy-aware mission planning for cooperative UAV-UGV teams.
//!
//! Each team is an energy-limited UAV carried by a UGV that doubles as a
//! mobile charging station. The planner partitions monitoring points among
//! teams, orders them, packs them into flight-time-feasible tours with
//! explicit robustness margins, and picks the collect point of every tour to
//! minimize mission time.

#![allow(clippy::needless_range_loop)]

pub mod collect_select;
pub mod error;
pub mod geometry;
pub mod kinematics;
pub mod matching;
pub mod oracle;
pub mod partition;
pub mod planner;
pub mod robustness;
pub mod scenario;
pub mod sequencing;
pub mod simulator;
pub mod tours;

pub use error::{PlanError, Result};
pub use geometry::{Bounds, BoxObstacle, Environment, GroundPath, Point3};
pub use kinematics::{TourRow, VehicleParams};
pub use partition::{Partition, Team};
pub use planner::{MissionPlan, TeamPlan, ValidationReport};
pub use robustness::{AdjustmentBudget, TourRobustness};
pub use scenario::Scenario;
pub use sequencing::VisitSequence;
pub use tours::PartialTeamPlan;
