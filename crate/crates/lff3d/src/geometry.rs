//! Poses, frames and the spherical relative state.
//!
//! The follower observes the leader through a forward camera mounted
//! `cam_offset` meters ahead of its body origin along the body x axis. The
//! Cartesian relative position is expressed in the follower's yaw-aligned
//! frame:
//!
//! ```text
//! q = Rz(yaw_f)^T (p_l - p_f) - cam_offset * e_x
//! ```
//!
//! and its spherical form is `(range, azimuth, elevation, heading)` with
//! `heading = yaw_l - yaw_f - azimuth`, the leader's yaw relative to the
//! line of sight. Elevation is measured from the horizontal plane of the
//! frame, so the spherical chart is valid while the leader is not directly
//! above or below the camera (`|elevation| < pi/2`) and not on top of it
//! (`range > 0`).

use nalgebra::{Matrix3, Vector3};

use crate::Error;

/// Ranges below this are treated as a collision with the camera origin and
/// reported as singular.
pub const EPS_RANGE: f64 = 1e-9;

/// `cos(elevation)` values at or below this are treated as a vertical
/// line-of-sight singularity.
pub const EPS_COS_ELEVATION: f64 = 1e-6;

/// Wraps an angle into `(-pi, pi]`.
///
/// Errors if the input is not finite; see [`wrap_finite`] for the raw
/// operation on values already known to be finite.
pub fn wrap_angle(theta: f64) -> Result<f64, Error> {
    if !theta.is_finite() {
        return Err(Error::NonFinite("angle"));
    }
    Ok(wrap_finite(theta))
}

/// [`wrap_angle`] without the finiteness check. NaN propagates.
pub fn wrap_finite(theta: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let r = theta.rem_euclid(two_pi); // [0, 2*pi)
    if r > std::f64::consts::PI {
        r - two_pi
    } else {
        r
    }
}

/// Rotation of the world frame into a yaw-aligned frame (z axis shared).
pub(crate) fn rot_z(yaw: f64) -> Matrix3<f64> {
    let (s, c) = yaw.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// World-frame position and yaw of a vehicle. Roll and pitch are outside the
/// model: the vehicles are treated as yaw-steered velocity-controlled rigid
/// bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub position: Vector3<f64>,
    /// Wrapped to `(-pi, pi]` by [`Pose::new`] and by the simulator.
    pub yaw: f64,
}

impl Pose {
    pub fn new(position: Vector3<f64>, yaw: f64) -> Result<Self, Error> {
        if !position.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite("pose position"));
        }
        Ok(Pose { position, yaw: wrap_angle(yaw)? })
    }
}

/// Relative position of the leader in the follower's camera frame
/// (yaw-aligned, origin at the camera).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianRelative {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl CartesianRelative {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        CartesianRelative { x, y, z }
    }

    pub fn as_vector(&self) -> Vector3<f64> {
        Vector3::new(self.x, self.y, self.z)
    }

    pub fn from_vector(v: &Vector3<f64>) -> Self {
        CartesianRelative { x: v.x, y: v.y, z: v.z }
    }

    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }
}

/// Spherical relative state `(range, azimuth, elevation, heading)`.
///
/// Invariants, enforced by [`RelativeState::new`]: all components finite,
/// `range > 0`, `|elevation| < pi/2`, `azimuth` and `heading` wrapped to
/// `(-pi, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeState {
    /// Distance from the camera to the leader, meters.
    pub range: f64,
    /// Horizontal bearing of the leader in the camera frame.
    pub azimuth: f64,
    /// Angle above the camera frame's horizontal plane.
    pub elevation: f64,
    /// Leader yaw relative to the line of sight: `yaw_l - yaw_f - azimuth`.
    pub heading: f64,
}

impl RelativeState {
    pub fn new(range: f64, azimuth: f64, elevation: f64, heading: f64) -> Result<Self, Error> {
        for (v, what) in [
            (range, "range"),
            (azimuth, "azimuth"),
            (elevation, "elevation"),
            (heading, "heading"),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(what));
            }
        }
        if range <= EPS_RANGE {
            return Err(Error::Singularity { what: "range", value: range });
        }
        if elevation.abs() >= std::f64::consts::FRAC_PI_2 {
            return Err(Error::invalid(
                "elevation",
                format!("{elevation} is outside (-pi/2, pi/2)"),
            ));
        }
        Ok(RelativeState {
            range,
            azimuth: wrap_finite(azimuth),
            elevation,
            heading: wrap_finite(heading),
        })
    }

    /// State as a `(range, azimuth, elevation, heading)` vector.
    pub fn as_vector(&self) -> nalgebra::Vector4<f64> {
        nalgebra::Vector4::new(self.range, self.azimuth, self.elevation, self.heading)
    }
}

/// Camera frustum geometry and mounting offset.
///
/// `horizontal_fov` and `vertical_fov` are full opening angles; `near` and
/// `far` bound the depth (`x`) of the visible region. The visible set in the
/// camera frame is
///
/// ```text
/// near <= x <= far,  |y| <= x tan(horizontal_fov/2),  |z| <= x tan(vertical_fov/2)
/// ```
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrustumParams {
    pub horizontal_fov: f64,
    pub vertical_fov: f64,
    pub near: f64,
    pub far: f64,
    /// Camera position ahead of the body origin along body x, meters.
    pub cam_offset: f64,
}

impl FrustumParams {
    pub fn new(
        horizontal_fov: f64,
        vertical_fov: f64,
        near: f64,
        far: f64,
        cam_offset: f64,
    ) -> Result<Self, Error> {
        for (v, what) in [
            (horizontal_fov, "horizontal_fov"),
            (vertical_fov, "vertical_fov"),
            (near, "near"),
            (far, "far"),
            (cam_offset, "cam_offset"),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(what));
            }
        }
        let pi = std::f64::consts::PI;
        if horizontal_fov <= 0.0 || horizontal_fov >= pi {
            return Err(Error::invalid("horizontal_fov", "must lie in (0, pi)"));
        }
        if vertical_fov <= 0.0 || vertical_fov >= pi {
            return Err(Error::invalid("vertical_fov", "must lie in (0, pi)"));
        }
        if !(near > 0.0) {
            return Err(Error::invalid("near", "must be positive"));
        }
        if far <= near {
            return Err(Error::invalid("far", "must exceed near"));
        }
        if cam_offset < 0.0 {
            return Err(Error::invalid("cam_offset", "must be nonnegative"));
        }
        Ok(FrustumParams { horizontal_fov, vertical_fov, near, far, cam_offset })
    }

    pub fn tan_half_horizontal(&self) -> f64 {
        (self.horizontal_fov / 2.0).tan()
    }

    pub fn tan_half_vertical(&self) -> f64 {
        (self.vertical_fov / 2.0).tan()
    }

    /// True when `q` lies inside the (closed) frustum.
    pub fn contains(&self, q: &CartesianRelative) -> bool {
        q.x >= self.near
            && q.x <= self.far
            && q.y.abs() <= q.x * self.tan_half_horizontal()
            && q.z.abs() <= q.x * self.tan_half_vertical()
    }
}

/// Leader position in the follower's camera frame.
pub fn relative_cartesian(follower: &Pose, leader: &Pose, cam_offset: f64) -> CartesianRelative {
    let body = rot_z(follower.yaw).transpose() * (leader.position - follower.position);
    CartesianRelative { x: body.x - cam_offset, y: body.y, z: body.z }
}

/// Spherical relative state from the Cartesian one.
///
/// Fails with a singularity error when the leader is (numerically) at the
/// camera origin or on the vertical axis through it, where azimuth is
/// undefined.
pub fn spherical_from_cartesian(
    q: &CartesianRelative,
    follower_yaw: f64,
    leader_yaw: f64,
) -> Result<RelativeState, Error> {
    for (v, what) in [(q.x, "q.x"), (q.y, "q.y"), (q.z, "q.z")] {
        if !v.is_finite() {
            return Err(Error::NonFinite(what));
        }
    }
    let range = q.norm();
    if range <= EPS_RANGE {
        return Err(Error::Singularity { what: "range", value: range });
    }
    let horizontal = q.x.hypot(q.y);
    if horizontal <= EPS_RANGE {
        return Err(Error::Singularity { what: "horizontal range", value: horizontal });
    }
    let azimuth = q.y.atan2(q.x);
    let elevation = q.z.atan2(horizontal);
    let heading = wrap_angle(leader_yaw)? - wrap_angle(follower_yaw)? - azimuth;
    RelativeState::new(range, azimuth, elevation, heading)
}

/// Cartesian relative position from the spherical state.
pub fn cartesian_from_spherical(x: &RelativeState) -> CartesianRelative {
    let (se, ce) = x.elevation.sin_cos();
    let (sa, ca) = x.azimuth.sin_cos();
    CartesianRelative {
        x: x.range * ce * ca,
        y: x.range * ce * sa,
        z: x.range * se,
    }
}

/// Places the leader so that the pair `(follower, leader)` realizes the
/// relative state `x`. Inverse of the measurement pipeline; used to seed
/// simulations and finite-difference probes.
pub fn leader_pose_for(follower: &Pose, x: &RelativeState, cam_offset: f64) -> Pose {
    let q = cartesian_from_spherical(x);
    let body = q.as_vector() + Vector3::new(cam_offset, 0.0, 0.0);
    Pose {
        position: follower.position + rot_z(follower.yaw) * body,
        yaw: wrap_finite(follower.yaw + x.azimuth + x.heading),
    }
}

/// Places the follower so that the pair `(follower, leader)` realizes the
/// relative state `x`. Counterpart of [`leader_pose_for`] holding the leader
/// fixed instead.
pub fn follower_pose_for(leader: &Pose, x: &RelativeState, cam_offset: f64) -> Pose {
    let follower_yaw = wrap_finite(leader.yaw - x.azimuth - x.heading);
    let q = cartesian_from_spherical(x);
    let body = q.as_vector() + Vector3::new(cam_offset, 0.0, 0.0);
    Pose {
        position: leader.position - rot_z(follower_yaw) * body,
        yaw: follower_yaw,
    }
}
