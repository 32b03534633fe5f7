//! Formation tracking law and reference schedules.
//!
//! The nominal command inverts the relative kinematics around a desired
//! state trajectory: `u = G^-1 (xdot_d - K e - F u_leader)`, which makes the
//! tracking error obey `edot = -K e` exactly under ideal velocity tracking.
//! References are piecewise schedules of target states joined by smoothstep
//! ramps so the desired rate stays well-defined through stage changes.

use nalgebra::Vector4;

use crate::geometry::{wrap_finite, RelativeState};
use crate::kinematics::{leader_matrix, solve_follower, VelocityCommand};
use crate::Error;

/// Diagonal feedback gains, one per relative-state coordinate, each in 1/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gains {
    pub range: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub heading: f64,
}

impl Gains {
    pub fn new(range: f64, azimuth: f64, elevation: f64, heading: f64) -> Result<Self, Error> {
        let gains = Gains { range, azimuth, elevation, heading };
        for (value, what) in [
            (range, "gains.range"),
            (azimuth, "gains.azimuth"),
            (elevation, "gains.elevation"),
            (heading, "gains.heading"),
        ] {
            if !value.is_finite() {
                return Err(Error::NonFinite(what));
            }
            if value <= 0.0 {
                return Err(Error::invalid(what, "must be strictly positive"));
            }
        }
        Ok(gains)
    }

    pub fn uniform(k: f64) -> Result<Self, Error> {
        Gains::new(k, k, k, k)
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.range, self.azimuth, self.elevation, self.heading)
    }
}

/// Deviation from a desired relative state. The range component is in
/// meters; the angular components are shortest-arc differences in radians,
/// each in (-pi, pi].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackingError {
    pub range: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub heading: f64,
}

impl TrackingError {
    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.range, self.azimuth, self.elevation, self.heading)
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }
}

pub fn tracking_error(x: &RelativeState, x_d: &RelativeState) -> TrackingError {
    TrackingError {
        range: x.range - x_d.range,
        azimuth: wrap_finite(x.azimuth - x_d.azimuth),
        elevation: x.elevation - x_d.elevation,
        heading: wrap_finite(x.heading - x_d.heading),
    }
}

/// One scheduled formation change: starting at `start`, blend from the
/// previous target to `target` over `ramp` seconds.
#[derive(Debug, Clone, Copy)]
pub struct ReferenceStage {
    pub start: f64,
    pub ramp: f64,
    pub target: RelativeState,
}

/// Piecewise formation schedule: an initial target followed by timed stage
/// changes, blended with C^1 smoothstep ramps. Angular coordinates blend
/// along the shortest arc.
#[derive(Debug, Clone)]
pub struct FormationReference {
    initial: RelativeState,
    stages: Vec<ReferenceStage>,
}

impl FormationReference {
    pub fn new(initial: RelativeState, stages: Vec<ReferenceStage>) -> Result<Self, Error> {
        let mut prev_end = 0.0f64;
        for (i, stage) in stages.iter().enumerate() {
            if !stage.start.is_finite() || !stage.ramp.is_finite() {
                return Err(Error::NonFinite("reference stage timing"));
            }
            if stage.start < 0.0 {
                return Err(Error::invalid("reference stage", "start must be nonnegative"));
            }
            if stage.ramp < 0.0 {
                return Err(Error::invalid("reference stage", "ramp must be nonnegative"));
            }
            if i > 0 && stage.start < prev_end {
                return Err(Error::invalid(
                    "reference stage",
                    "stages must be ordered and must not start before the previous ramp ends",
                ));
            }
            prev_end = stage.start + stage.ramp;
        }
        Ok(FormationReference { initial, stages })
    }

    /// A schedule that holds one target forever.
    pub fn constant(target: RelativeState) -> Self {
        FormationReference { initial: target, stages: Vec::new() }
    }

    pub fn initial(&self) -> &RelativeState {
        &self.initial
    }

    pub fn stages(&self) -> &[ReferenceStage] {
        &self.stages
    }

    /// Desired state and its exact rate at time `t`. Before the first stage
    /// the initial target is held with zero rate; past the last ramp the
    /// final target is held.
    pub fn reference_at(&self, t: f64) -> (RelativeState, Vector4<f64>) {
        assert!(t.is_finite(), "reference time must be finite");
        // last stage that has started, if any
        let idx = self.stages.iter().rposition(|s| s.start <= t);
        let Some(idx) = idx else {
            return (self.initial, Vector4::zeros());
        };
        let stage = &self.stages[idx];
        let from = if idx == 0 { &self.initial } else { &self.stages[idx - 1].target };
        blend(from, &stage.target, t - stage.start, stage.ramp)
    }
}

/// Smoothstep blend between two targets, `elapsed` seconds into a ramp of
/// length `ramp`. Returns the blended state and its rate.
fn blend(
    from: &RelativeState,
    to: &RelativeState,
    elapsed: f64,
    ramp: f64,
) -> (RelativeState, Vector4<f64>) {
    if ramp <= 0.0 || elapsed >= ramp {
        return (*to, Vector4::zeros());
    }
    let delta = Vector4::new(
        to.range - from.range,
        wrap_finite(to.azimuth - from.azimuth),
        to.elevation - from.elevation,
        wrap_finite(to.heading - from.heading),
    );
    let tau = elapsed / ramp;
    let s = tau * tau * (3.0 - 2.0 * tau);
    let sdot = 6.0 * tau * (1.0 - tau) / ramp;
    let value = from.as_vector() + s * delta;
    let state = RelativeState::new(value[0], value[1], value[2], value[3])
        .expect("interpolation between valid targets stays in the valid domain");
    (state, sdot * delta)
}

/// Tracking command for the follower: the unique velocity command that makes
/// the relative state follow `xdot_d - K e`, accounting for the leader's
/// communicated command.
pub fn nominal_command(
    x: &RelativeState,
    cam_offset: f64,
    x_d: &RelativeState,
    xdot_d: &Vector4<f64>,
    gains: &Gains,
    u_leader: &VelocityCommand,
) -> Result<VelocityCommand, Error> {
    let e = tracking_error(x, x_d);
    let feedback = gains.as_vector().component_mul(&e.as_vector());
    let leader_flow = leader_matrix(x)? * u_leader.as_vector();
    let rhs = xdot_d - feedback - leader_flow;
    let u = solve_follower(x, cam_offset, &rhs)?;
    Ok(VelocityCommand::from_vector(&u))
}
