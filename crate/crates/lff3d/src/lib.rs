//! Perception-aware 3D leader-follower formation control.
//!
//! A follower vehicle keeps a leader inside its forward camera frustum while
//! tracking a desired formation expressed in spherical relative coordinates
//! (range, azimuth, elevation, relative heading). The crate provides:
//!
//! * [`geometry`]: poses, the camera-frame relative state, and conversions
//!   between Cartesian and spherical coordinates;
//! * [`kinematics`]: the control-affine relative kinematics `xdot = F u_l + G u_f`
//!   together with the rate of the Cartesian relative position;
//! * [`controller`]: a feedback-linearizing tracking law with per-state gains
//!   and piecewise formation references with smooth ramps;
//! * [`barriers`]: the six affine frustum barrier functions and their
//!   control-affine constraint rows;
//! * [`qp`]: a small dense active-set solver for strictly convex quadratic
//!   programs with inequality rows;
//! * [`safety_filter`]: the minimally invasive command filter that projects a
//!   nominal command onto the barrier constraints;
//! * [`sim`]: a deterministic fixed-step multi-agent simulator;
//! * [`oracles`] and [`verify`]: independent reference computations (finite
//!   differences, scalar rate formulas, exhaustive QP enumeration) and a
//!   self-check suite built on them.
//!
//! All angles are radians, wrapped to `(-pi, pi]`; all distances are meters.

pub mod barriers;
pub mod controller;
pub mod geometry;
pub mod kinematics;
pub mod oracles;
pub mod qp;
pub mod safety_filter;
pub mod sim;
pub mod verify;

#[cfg(doctest)]
mod book;

pub use nalgebra;

pub use barriers::{constraint_rows, BarrierValues, ConstraintRow, FrustumFace};
pub use controller::{
    nominal_command, tracking_error, FormationReference, Gains, ReferenceStage, TrackingError,
};
pub use geometry::{
    cartesian_from_spherical, follower_pose_for, relative_cartesian, spherical_from_cartesian,
    wrap_angle, wrap_finite, CartesianRelative, FrustumParams, Pose, RelativeState,
};
pub use kinematics::{
    cartesian_rate, follower_matrix, leader_matrix, relative_rate, solve_follower,
    KinematicsMatrices, VelocityCommand,
};
pub use qp::{QpProblem, QpSolution, QpStatus};
pub use safety_filter::{filter, CbfParams, SafetyFilterResult, INTERVENTION_TOL};
pub use sim::{
    run_scenario, AgentState, CommandSegment, FollowerConfig, FollowerRecord, LeaderTrajectory,
    ScenarioConfig, ScriptedSample, SimError, SimLog, TickRecord,
};
pub use verify::{run as run_verification, CheckReport, VerifyConfig, VerifyReport};

/// Errors shared by the geometry, kinematics and control layers.
#[derive(thiserror::Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An input that must be finite was NaN or infinite.
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    /// The state left the domain where the spherical coordinates (and the
    /// matrices built from them) are well defined.
    #[error("kinematic singularity: {what} = {value:.3e}")]
    Singularity { what: &'static str, value: f64 },
    /// A parameter failed validation.
    #[error("invalid {what}: {why}")]
    InvalidParameter { what: &'static str, why: String },
}

impl Error {
    pub(crate) fn invalid(what: &'static str, why: impl Into<String>) -> Self {
        Error::InvalidParameter { what, why: why.into() }
    }
}
