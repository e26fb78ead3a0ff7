//! Longitudinal platoon-formation kinematics.
//!
//! A standalone truck `chi` trails a platoon by `R` meters. While it
//! authenticates (`Γ`) both keep their current motion; afterwards a
//! cooperative-driving strategy closes the gap to the joining headway (`Θ`).
//! Motion is piecewise constant acceleration clamped to each truck's speed
//! envelope, so [`theta`] is solved exactly and [`simulate`] steps the same
//! model numerically as a cross-check.

mod integrator;
mod kinematics;
mod model;
mod scenario_file;

use thiserror::Error;

pub use integrator::{simulate, Simulation, TracePoint, FALLBACK_HORIZON_S};
pub use kinematics::{displacement, relative_position, travel, PlatoonState, TruckState};
pub use model::{
    auth_time, catchup_gap, theta, total_time, FormationScenario, FormationTimeline, LatencyModel, Strategy,
};
pub use scenario_file::ScenarioParams;

pub const FORMATION_CSV_HEADER: &str = "n,strategy,gamma_s,theta_s,total_s";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormationError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("unreachable platoon under {strategy}: closing speed settles at {closing_speed} m/s")]
    UnreachablePlatoon { strategy: Strategy, closing_speed: f64 },
    #[error("simulation did not converge within {horizon_s} s")]
    DidNotConverge { horizon_s: f64 },
    #[error("scenario line {line}: {message}")]
    Parse { line: usize, message: String },
}
