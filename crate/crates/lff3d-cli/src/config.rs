//! Scenario configuration files.
//!
//! The on-disk format is TOML with a fixed schema: unknown keys are
//! rejected, units are meters, radians, and seconds throughout, and every
//! numeric range check happens in the library types this schema maps onto.
//! `simulate` echoes the parsed config back into the output directory in
//! canonical form, so a run directory always carries the exact settings
//! that produced it.

use lff3d::sim::{CommandSegment, FollowerConfig, LeaderTrajectory, ScriptedSample};
use lff3d::{
    CbfParams, FormationReference, FrustumParams, Gains, Pose, RelativeState, ScenarioConfig,
    VelocityCommand,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub dt: f64,
    pub duration: f64,
    #[serde(default)]
    pub message_delay_ticks: usize,
    #[serde(default)]
    pub velocity_lag: f64,
    pub frustum: FrustumSection,
    pub gains: GainsSection,
    pub cbf: CbfSection,
    pub leader: LeaderSection,
    pub followers: Vec<FollowerSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FrustumSection {
    /// Full horizontal field of view (rad).
    pub hfov: f64,
    /// Full vertical field of view (rad).
    pub vfov: f64,
    /// Near-plane distance along the camera axis (m).
    pub near: f64,
    /// Far-plane distance along the camera axis (m).
    pub far: f64,
    /// Camera offset ahead of the follower body origin (m).
    #[serde(default)]
    pub cam_offset: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GainsSection {
    pub range: f64,
    pub azimuth: f64,
    pub elevation: f64,
    pub heading: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CbfSection {
    pub kappa: f64,
    /// Robustness margins per face: near, far, ymin, ymax, zmin, zmax.
    pub delta: [f64; 6],
    pub rho: f64,
    /// Command box lower corner; omitted means unbounded below.
    pub u_min: Option<[f64; 4]>,
    /// Command box upper corner; omitted means unbounded above.
    pub u_max: Option<[f64; 4]>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LeaderSection {
    pub initial: PoseSection,
    pub trajectory: TrajectorySection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PoseSection {
    pub position: [f64; 3],
    pub yaw: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySection {
    Piecewise {
        #[serde(default)]
        segments: Vec<SegmentSection>,
    },
    Lemniscate {
        scale: f64,
        period: f64,
        yaw_amplitude: f64,
    },
    Scripted {
        samples: Vec<SampleSection>,
    },
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    pub duration: f64,
    #[serde(default)]
    pub ramp: f64,
    pub command: [f64; 4],
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SampleSection {
    pub t: f64,
    pub command: [f64; 4],
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FollowerSection {
    /// Starting pose; omitted places the follower exactly at the initial
    /// reference.
    pub initial: Option<PoseSection>,
    pub cbf_enabled: bool,
    pub reference: ReferenceSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSection {
    /// Initial target as [range, azimuth, elevation, heading].
    pub initial: [f64; 4],
    #[serde(default)]
    pub stages: Vec<StageSection>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StageSection {
    pub start: f64,
    #[serde(default)]
    pub ramp: f64,
    pub target: [f64; 4],
}

fn command_of(v: &[f64; 4]) -> VelocityCommand {
    VelocityCommand::new(v[0], v[1], v[2], v[3])
}

fn state_of(v: &[f64; 4]) -> Result<RelativeState, lff3d::Error> {
    RelativeState::new(v[0], v[1], v[2], v[3])
}

impl PoseSection {
    fn to_pose(&self) -> Result<Pose, lff3d::Error> {
        Pose::new(
            lff3d::nalgebra::Vector3::new(self.position[0], self.position[1], self.position[2]),
            self.yaw,
        )
    }
}

impl TrajectorySection {
    fn to_trajectory(&self) -> LeaderTrajectory {
        match self {
            TrajectorySection::Piecewise { segments } => LeaderTrajectory::Piecewise {
                segments: segments
                    .iter()
                    .map(|s| CommandSegment {
                        duration: s.duration,
                        ramp: s.ramp,
                        command: command_of(&s.command),
                    })
                    .collect(),
            },
            TrajectorySection::Lemniscate { scale, period, yaw_amplitude } => {
                LeaderTrajectory::Lemniscate {
                    scale: *scale,
                    period: *period,
                    yaw_amplitude: *yaw_amplitude,
                }
            }
            TrajectorySection::Scripted { samples } => LeaderTrajectory::Scripted {
                samples: samples
                    .iter()
                    .map(|s| ScriptedSample { t: s.t, command: command_of(&s.command) })
                    .collect(),
            },
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<ConfigFile, toml::de::Error> {
        toml::from_str(text)
    }

    /// Canonical serialized form of this config.
    pub fn canonical(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn to_scenario(&self) -> Result<ScenarioConfig, lff3d::Error> {
        let unbounded_lo = VelocityCommand::new(
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
            f64::NEG_INFINITY,
        );
        let unbounded_hi =
            VelocityCommand::new(f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY);
        let u_min = self.cbf.u_min.as_ref().map_or(unbounded_lo, command_of);
        let u_max = self.cbf.u_max.as_ref().map_or(unbounded_hi, command_of);
        let mut followers = Vec::with_capacity(self.followers.len());
        for f in &self.followers {
            let initial = match &f.initial {
                Some(p) => Some(p.to_pose()?),
                None => None,
            };
            let mut stages = Vec::with_capacity(f.reference.stages.len());
            for s in &f.reference.stages {
                stages.push(lff3d::controller::ReferenceStage {
                    start: s.start,
                    ramp: s.ramp,
                    target: state_of(&s.target)?,
                });
            }
            followers.push(FollowerConfig {
                initial,
                reference: FormationReference::new(state_of(&f.reference.initial)?, stages)?,
                cbf_enabled: f.cbf_enabled,
            });
        }
        Ok(ScenarioConfig {
            dt: self.dt,
            duration: self.duration,
            message_delay_ticks: self.message_delay_ticks,
            velocity_lag: self.velocity_lag,
            frustum: FrustumParams::new(
                self.frustum.hfov,
                self.frustum.vfov,
                self.frustum.near,
                self.frustum.far,
                self.frustum.cam_offset,
            )?,
            gains: Gains::new(
                self.gains.range,
                self.gains.azimuth,
                self.gains.elevation,
                self.gains.heading,
            )?,
            cbf: CbfParams::new(self.cbf.kappa, self.cbf.delta, self.cbf.rho, u_min, u_max, true)?,
            leader_initial: self.leader.initial.to_pose()?,
            leader_trajectory: self.leader.trajectory.to_trajectory(),
            followers,
        })
    }

    /// Stage boundaries of one follower in ticks: tick 0, each stage start,
    /// and the end of the run. Used to split summaries per stage.
    pub fn stage_bounds(&self, follower: usize) -> Vec<usize> {
        let ticks = (self.duration / self.dt).round() as usize;
        let mut bounds = vec![0usize];
        for stage in &self.followers[follower].reference.stages {
            let tick = (stage.start / self.dt).round() as usize;
            bounds.push(tick.min(ticks));
        }
        bounds.push(ticks);
        bounds
    }
}
