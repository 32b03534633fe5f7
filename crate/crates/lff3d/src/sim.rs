//! Deterministic fixed-step multi-agent simulation.
//!
//! One leader follows a scripted velocity trajectory; each follower measures
//! the relative state from poses (as a motion-capture system would), runs
//! the tracking controller and the safety filter, and integrates the
//! resulting command. Everything advances on a single clock with
//! snapshot-then-integrate ticks, so two runs of the same scenario produce
//! bit-identical logs.

use nalgebra::{Vector3, Vector4};

use crate::barriers::BarrierValues;
use crate::controller::{
    nominal_command, tracking_error, FormationReference, Gains, TrackingError,
};
use crate::geometry::{
    cartesian_from_spherical, follower_pose_for, relative_cartesian, rot_z,
    spherical_from_cartesian, wrap_finite, CartesianRelative, FrustumParams, Pose, RelativeState,
};
use crate::kinematics::VelocityCommand;
use crate::qp::QpStatus;
use crate::safety_filter::{filter, CbfParams};
use crate::Error;

/// One vehicle: a yaw-aligned pose plus the velocity it is actually flying,
/// which equals the last command under ideal tracking and lags behind it
/// with a first-order response when a velocity lag is configured.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub pose: Pose,
    pub u_applied: VelocityCommand,
}

/// One piece of a piecewise leader command schedule: blend from the previous
/// command over `ramp` seconds, then hold `command` until the segment's
/// `duration` elapses.
#[derive(Debug, Clone, Copy)]
pub struct CommandSegment {
    pub duration: f64,
    pub ramp: f64,
    pub command: VelocityCommand,
}

/// A time-stamped command for scripted playback (zero-order hold).
#[derive(Debug, Clone, Copy)]
pub struct ScriptedSample {
    pub t: f64,
    pub command: VelocityCommand,
}

/// Leader velocity generator. All commands are expressed in the leader's
/// yaw-aligned frame.
#[derive(Debug, Clone)]
pub enum LeaderTrajectory {
    /// Segments played in order; the last command is held after the schedule
    /// ends. An empty list means the leader stays put.
    Piecewise { segments: Vec<CommandSegment> },
    /// Figure-eight in the leader's initial horizontal frame with the yaw
    /// oscillating by `yaw_amplitude` over each pass.
    Lemniscate { scale: f64, period: f64, yaw_amplitude: f64 },
    /// Explicit samples with zero-order hold; zero command before the first
    /// sample.
    Scripted { samples: Vec<ScriptedSample> },
}

impl LeaderTrajectory {
    pub fn validate(&self) -> Result<(), Error> {
        match self {
            LeaderTrajectory::Piecewise { segments } => {
                for seg in segments {
                    if !seg.duration.is_finite() || !seg.ramp.is_finite() {
                        return Err(Error::NonFinite("segment timing"));
                    }
                    if seg.duration <= 0.0 {
                        return Err(Error::invalid("segment", "duration must be positive"));
                    }
                    if seg.ramp < 0.0 || seg.ramp > seg.duration {
                        return Err(Error::invalid(
                            "segment",
                            "ramp must fit within the segment duration",
                        ));
                    }
                    if !seg.command.is_finite() {
                        return Err(Error::NonFinite("segment command"));
                    }
                }
                Ok(())
            }
            LeaderTrajectory::Lemniscate { scale, period, yaw_amplitude } => {
                if !scale.is_finite() || !period.is_finite() || !yaw_amplitude.is_finite() {
                    return Err(Error::NonFinite("lemniscate parameters"));
                }
                if *scale <= 0.0 {
                    return Err(Error::invalid("lemniscate", "scale must be positive"));
                }
                if *period <= 0.0 {
                    return Err(Error::invalid("lemniscate", "period must be positive"));
                }
                Ok(())
            }
            LeaderTrajectory::Scripted { samples } => {
                let mut prev = f64::NEG_INFINITY;
                for sample in samples {
                    if !sample.t.is_finite() || !sample.command.is_finite() {
                        return Err(Error::NonFinite("scripted sample"));
                    }
                    if sample.t <= prev {
                        return Err(Error::invalid(
                            "scripted samples",
                            "timestamps must be strictly increasing",
                        ));
                    }
                    prev = sample.t;
                }
                Ok(())
            }
        }
    }

    /// The command published at time `t`.
    pub fn command_at(&self, t: f64) -> VelocityCommand {
        match self {
            LeaderTrajectory::Piecewise { segments } => {
                let mut start = 0.0;
                let mut prev = VelocityCommand::ZERO;
                for seg in segments {
                    if t < start + seg.duration {
                        let elapsed = t - start;
                        if seg.ramp <= 0.0 || elapsed >= seg.ramp {
                            return seg.command;
                        }
                        let tau = elapsed / seg.ramp;
                        let s = tau * tau * (3.0 - 2.0 * tau);
                        let blended = prev.as_vector() + s * (seg.command.as_vector() - prev.as_vector());
                        return VelocityCommand::from_vector(&blended);
                    }
                    start += seg.duration;
                    prev = seg.command;
                }
                prev
            }
            LeaderTrajectory::Lemniscate { scale, period, yaw_amplitude } => {
                // path in the initial frame: P(theta) = scale (sin, sin cos, 0),
                // yaw offset A sin(theta); the command is the path velocity
                // rotated into the current yaw frame, which depends only on
                // the yaw offset, not on the initial yaw itself
                let theta_dot = 2.0 * std::f64::consts::PI / period;
                let theta = theta_dot * t;
                let world = Vector3::new(
                    scale * theta.cos() * theta_dot,
                    scale * (2.0 * theta).cos() * theta_dot,
                    0.0,
                );
                let yaw_offset = yaw_amplitude * theta.sin();
                let body = rot_z(yaw_offset).transpose() * world;
                VelocityCommand::new(body.x, body.y, body.z, yaw_amplitude * theta.cos() * theta_dot)
            }
            LeaderTrajectory::Scripted { samples } => samples
                .iter()
                .rev()
                .find(|s| s.t <= t)
                .map(|s| s.command)
                .unwrap_or(VelocityCommand::ZERO),
        }
    }
}

/// Advances a yaw-aligned pose one step under a constant command (RK4).
pub fn step_pose(pose: &Pose, u: &VelocityCommand, dt: f64) -> Pose {
    let v = u.linear();
    let f = |yaw: f64| rot_z(yaw) * v;
    let k1 = f(pose.yaw);
    let k2 = f(pose.yaw + 0.5 * dt * u.yaw_rate);
    let k3 = k2;
    let k4 = f(pose.yaw + dt * u.yaw_rate);
    let position = pose.position + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    Pose { position, yaw: wrap_finite(pose.yaw + dt * u.yaw_rate) }
}

/// Advances a pose whose realized velocity lags the command with time
/// constant `lag` (first-order response), integrating the coupled eight
/// state ODE with RK4. Returns the new pose and realized velocity.
pub fn step_pose_lagged(
    pose: &Pose,
    u_applied: &VelocityCommand,
    u_command: &VelocityCommand,
    lag: f64,
    dt: f64,
) -> (Pose, VelocityCommand) {
    #[derive(Clone, Copy)]
    struct State {
        position: Vector3<f64>,
        yaw: f64,
        u: Vector4<f64>,
    }
    let cmd = u_command.as_vector();
    let deriv = |s: &State| State {
        position: rot_z(s.yaw) * Vector3::new(s.u[0], s.u[1], s.u[2]),
        yaw: s.u[3],
        u: (cmd - s.u) / lag,
    };
    let advance = |s: &State, d: &State, h: f64| State {
        position: s.position + h * d.position,
        yaw: s.yaw + h * d.yaw,
        u: s.u + h * d.u,
    };
    let y0 = State { position: pose.position, yaw: pose.yaw, u: u_applied.as_vector() };
    let k1 = deriv(&y0);
    let k2 = deriv(&advance(&y0, &k1, 0.5 * dt));
    let k3 = deriv(&advance(&y0, &k2, 0.5 * dt));
    let k4 = deriv(&advance(&y0, &k3, dt));
    let position = y0.position
        + (dt / 6.0) * (k1.position + 2.0 * k2.position + 2.0 * k3.position + k4.position);
    let yaw = y0.yaw + (dt / 6.0) * (k1.yaw + 2.0 * k2.yaw + 2.0 * k3.yaw + k4.yaw);
    let u = y0.u + (dt / 6.0) * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u);
    (
        Pose { position, yaw: wrap_finite(yaw) },
        VelocityCommand::from_vector(&u),
    )
}

/// One follower's scenario entry.
#[derive(Debug, Clone)]
pub struct FollowerConfig {
    /// Starting pose; when absent the follower is placed exactly at the
    /// initial formation reference.
    pub initial: Option<Pose>,
    pub reference: FormationReference,
    pub cbf_enabled: bool,
}

/// Complete scenario description.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub dt: f64,
    pub duration: f64,
    /// Followers see the leader command published this many ticks ago.
    pub message_delay_ticks: usize,
    /// First-order velocity tracking lag in seconds for every agent;
    /// zero means ideal tracking.
    pub velocity_lag: f64,
    pub frustum: FrustumParams,
    pub gains: Gains,
    /// Filter settings shared by all followers; the per-follower
    /// `cbf_enabled` flag decides who actually uses the filter.
    pub cbf: CbfParams,
    pub leader_initial: Pose,
    pub leader_trajectory: LeaderTrajectory,
    pub followers: Vec<FollowerConfig>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), Error> {
        if !self.dt.is_finite() || self.dt <= 0.0 {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        if !self.duration.is_finite() || self.duration < self.dt {
            return Err(Error::invalid("duration", "must cover at least one tick"));
        }
        if self.duration / self.dt > 10_000_000.0 {
            return Err(Error::invalid("duration", "too many ticks"));
        }
        if !self.velocity_lag.is_finite() || self.velocity_lag < 0.0 {
            return Err(Error::invalid("velocity_lag", "must be nonnegative and finite"));
        }
        self.leader_trajectory.validate()
    }

    pub fn tick_count(&self) -> usize {
        (self.duration / self.dt).round() as usize
    }
}

/// Everything a follower computed and experienced during one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct FollowerRecord {
    pub pose: Pose,
    pub state: RelativeState,
    pub desired: RelativeState,
    pub error: TrackingError,
    pub relative: CartesianRelative,
    pub barriers: BarrierValues,
    pub min_barrier: f64,
    pub u_nom: VelocityCommand,
    pub u_safe: VelocityCommand,
    pub slacks: [f64; 6],
    pub intervention: bool,
    /// `None` when the follower runs without the filter.
    pub qp_status: Option<QpStatus>,
    pub qp_iterations: usize,
}

/// Snapshot of the whole formation at one tick.
#[derive(Debug, Clone, PartialEq)]
pub struct TickRecord {
    pub t: f64,
    pub leader_pose: Pose,
    pub leader_command_norm: f64,
    /// One entry per follower; `None` once a follower's trace has ended.
    pub followers: Vec<Option<FollowerRecord>>,
}

/// Complete scenario log.
#[derive(Debug, Clone, PartialEq)]
pub struct SimLog {
    pub dt: f64,
    pub follower_count: usize,
    pub ticks: Vec<TickRecord>,
    /// Per follower: the tick at which its trace ended early, if it did.
    pub terminated: Vec<Option<usize>>,
}

impl SimLog {
    pub fn tick_count(&self) -> usize {
        self.ticks.len()
    }

    /// Iterates over the live records of one follower.
    pub fn records_for(
        &self,
        follower: usize,
    ) -> impl Iterator<Item = (f64, &FollowerRecord)> + '_ {
        self.ticks
            .iter()
            .filter_map(move |tick| tick.followers[follower].as_ref().map(|r| (tick.t, r)))
    }
}

#[derive(thiserror::Error, Debug)]
pub enum SimError {
    #[error("invalid scenario: {0}")]
    InvalidConfig(#[from] Error),
    #[error("follower {follower} hit a singular state at tick {tick}: {source}")]
    FollowerSingularity {
        follower: usize,
        tick: usize,
        source: Error,
        /// Log of the ticks completed before the abort.
        partial: SimLog,
    },
}

struct FollowerRuntime {
    agent: AgentState,
    reference: FormationReference,
    params: CbfParams,
    alive: bool,
}

/// Runs a scenario to completion. A follower without the filter that leaves
/// the valid state domain has its trace terminated and flagged; a filtered
/// follower doing so aborts the run, since that breaks the safety claim the
/// log exists to document.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimLog, SimError> {
    config.validate()?;
    let dt = config.dt;
    let n_ticks = config.tick_count();
    let cam_offset = config.frustum.cam_offset;

    let mut leader = AgentState { pose: config.leader_initial, u_applied: VelocityCommand::ZERO };
    let mut followers: Vec<FollowerRuntime> = Vec::with_capacity(config.followers.len());
    for fc in &config.followers {
        let pose = match fc.initial {
            Some(pose) => pose,
            None => {
                let (x0, _) = fc.reference.reference_at(0.0);
                follower_pose_for(&config.leader_initial, &x0, cam_offset)
            }
        };
        let mut params = config.cbf.clone();
        params.enabled = fc.cbf_enabled;
        followers.push(FollowerRuntime {
            agent: AgentState { pose, u_applied: VelocityCommand::ZERO },
            reference: fc.reference.clone(),
            params,
            alive: true,
        });
    }

    let mut ticks: Vec<TickRecord> = Vec::with_capacity(n_ticks);
    let mut terminated: Vec<Option<usize>> = vec![None; followers.len()];

    for tick in 0..n_ticks {
        let t = tick as f64 * dt;
        let u_leader_now = config.leader_trajectory.command_at(t);
        let u_msg = if tick >= config.message_delay_ticks {
            config
                .leader_trajectory
                .command_at((tick - config.message_delay_ticks) as f64 * dt)
        } else {
            VelocityCommand::ZERO
        };

        let mut rows: Vec<Option<FollowerRecord>> = Vec::with_capacity(followers.len());
        let mut commands: Vec<VelocityCommand> = Vec::with_capacity(followers.len());
        for (i, follower) in followers.iter_mut().enumerate() {
            if !follower.alive {
                rows.push(None);
                commands.push(VelocityCommand::ZERO);
                continue;
            }
            match follower_tick(
                follower,
                &leader.pose,
                t,
                &u_msg,
                &config.frustum,
                &config.gains,
            ) {
                Ok(record) => {
                    commands.push(record.u_safe);
                    rows.push(Some(record));
                }
                Err(source) if !follower.params.enabled => {
                    follower.alive = false;
                    terminated[i] = Some(tick);
                    rows.push(None);
                    commands.push(VelocityCommand::ZERO);
                    let _ = source;
                }
                Err(source) => {
                    return Err(SimError::FollowerSingularity {
                        follower: i,
                        tick,
                        source,
                        partial: SimLog {
                            dt,
                            follower_count: followers.len(),
                            ticks,
                            terminated,
                        },
                    });
                }
            }
        }

        ticks.push(TickRecord {
            t,
            leader_pose: leader.pose,
            leader_command_norm: u_leader_now.norm(),
            followers: rows,
        });

        // snapshot taken; now everyone moves simultaneously
        advance(&mut leader, &u_leader_now, config.velocity_lag, dt);
        for (follower, command) in followers.iter_mut().zip(&commands) {
            if follower.alive {
                advance(&mut follower.agent, command, config.velocity_lag, dt);
            }
        }
    }

    Ok(SimLog { dt, follower_count: followers.len(), ticks, terminated })
}

fn advance(agent: &mut AgentState, command: &VelocityCommand, lag: f64, dt: f64) {
    if lag > 0.0 {
        let (pose, u) = step_pose_lagged(&agent.pose, &agent.u_applied, command, lag, dt);
        agent.pose = pose;
        agent.u_applied = u;
    } else {
        agent.pose = step_pose(&agent.pose, command, dt);
        agent.u_applied = *command;
    }
}

/// Measure, track, filter: the per-tick pipeline of one follower.
fn follower_tick(
    follower: &FollowerRuntime,
    leader_pose: &Pose,
    t: f64,
    u_msg: &VelocityCommand,
    frustum: &FrustumParams,
    gains: &Gains,
) -> Result<FollowerRecord, Error> {
    let pose = follower.agent.pose;
    let q = relative_cartesian(&pose, leader_pose, frustum.cam_offset);
    let x = spherical_from_cartesian(&q, pose.yaw, leader_pose.yaw)?;
    let (x_d, xdot_d) = follower.reference.reference_at(t);
    let error = tracking_error(&x, &x_d);
    let u_nom = nominal_command(&x, frustum.cam_offset, &x_d, &xdot_d, gains, u_msg)?;
    let result = filter(&x, frustum, &u_nom, u_msg, &follower.params)?;

    Ok(FollowerRecord {
        pose,
        state: x,
        desired: x_d,
        error,
        relative: cartesian_from_spherical(&x),
        barriers: result.barriers,
        min_barrier: result.barriers.min(),
        u_nom,
        u_safe: result.u_safe,
        slacks: result.slacks,
        intervention: result.intervention,
        qp_status: result.qp.as_ref().map(|qp| qp.status),
        qp_iterations: result.qp.as_ref().map_or(0, |qp| qp.iterations),
    })
}
