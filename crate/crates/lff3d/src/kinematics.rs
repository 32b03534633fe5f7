//! Control-affine kinematics of the spherical relative state.
//!
//! With the leader command `u_l` and follower command `u_f`, both expressed
//! in the respective vehicle's yaw-aligned frame as
//! `(vx, vy, vz, yaw_rate)`, the relative state obeys
//!
//! ```text
//! d/dt (range, azimuth, elevation, heading) = F(x) u_l + G(x) u_f
//! ```
//!
//! `G` is square and invertible on the chart `range > 0`, `|elevation| < pi/2`
//! with `det G = 1 / (range^2 cos(elevation))`, which is what makes exact
//! feedback linearization of the follower possible. The Cartesian relative
//! position evolves as
//!
//! ```text
//! qdot = -v_f + Rz(heading + azimuth) v_l + yaw_rate_f * (q_y, -(q_x + cam_offset), 0)
//! ```
//!
//! [`cartesian_rate`] implements that form directly; it involves no
//! divisions and is the production path for barrier rates. The spherical
//! chain-rule route lives in [`crate::oracles`] as an independent check.

use nalgebra::{Matrix4, Vector3, Vector4};

use crate::geometry::{rot_z, RelativeState, EPS_COS_ELEVATION, EPS_RANGE};
use crate::Error;

/// Body-frame velocity command: linear velocity in the vehicle's yaw-aligned
/// frame plus yaw rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityCommand {
    pub vx: f64,
    pub vy: f64,
    pub vz: f64,
    pub yaw_rate: f64,
}

impl VelocityCommand {
    pub const ZERO: VelocityCommand =
        VelocityCommand { vx: 0.0, vy: 0.0, vz: 0.0, yaw_rate: 0.0 };

    pub fn new(vx: f64, vy: f64, vz: f64, yaw_rate: f64) -> Self {
        VelocityCommand { vx, vy, vz, yaw_rate }
    }

    pub fn as_vector(&self) -> Vector4<f64> {
        Vector4::new(self.vx, self.vy, self.vz, self.yaw_rate)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        VelocityCommand { vx: v.x, vy: v.y, vz: v.z, yaw_rate: v.w }
    }

    pub fn linear(&self) -> Vector3<f64> {
        Vector3::new(self.vx, self.vy, self.vz)
    }

    /// Euclidean norm over all four components.
    pub fn norm(&self) -> f64 {
        self.as_vector().norm()
    }

    pub fn is_finite(&self) -> bool {
        self.as_vector().iter().all(|v| v.is_finite())
    }

    /// Componentwise clamp to `[lo, hi]`.
    pub fn clamp(&self, lo: &VelocityCommand, hi: &VelocityCommand) -> VelocityCommand {
        VelocityCommand {
            vx: self.vx.clamp(lo.vx, hi.vx),
            vy: self.vy.clamp(lo.vy, hi.vy),
            vz: self.vz.clamp(lo.vz, hi.vz),
            yaw_rate: self.yaw_rate.clamp(lo.yaw_rate, hi.yaw_rate),
        }
    }
}

fn check_chart(x: &RelativeState) -> Result<(f64, f64), Error> {
    if x.range <= EPS_RANGE {
        return Err(Error::Singularity { what: "range", value: x.range });
    }
    let cos_elev = x.elevation.cos();
    if cos_elev <= EPS_COS_ELEVATION {
        return Err(Error::Singularity { what: "cos(elevation)", value: cos_elev });
    }
    Ok((x.range, cos_elev))
}

/// Input matrix of the leader command in `xdot = F u_l + G u_f`.
pub fn leader_matrix(x: &RelativeState) -> Result<Matrix4<f64>, Error> {
    let (range, ce) = check_chart(x)?;
    let se = x.elevation.sin();
    let (sh, ch) = x.heading.sin_cos();
    #[rustfmt::skip]
    let f = Matrix4::new(
        ce * ch,             -ce * sh,            se,         0.0,
        sh / (range * ce),    ch / (range * ce),  0.0,        0.0,
        -se * ch / range,     se * sh / range,    ce / range, 0.0,
        -sh / (range * ce),  -ch / (range * ce),  0.0,        1.0,
    );
    Ok(f)
}

/// Input matrix of the follower command in `xdot = F u_l + G u_f`.
pub fn follower_matrix(x: &RelativeState, cam_offset: f64) -> Result<Matrix4<f64>, Error> {
    if !cam_offset.is_finite() {
        return Err(Error::NonFinite("cam_offset"));
    }
    let (range, ce) = check_chart(x)?;
    let se = x.elevation.sin();
    let (sa, ca) = x.azimuth.sin_cos();
    let d = cam_offset;
    #[rustfmt::skip]
    let g = Matrix4::new(
        -ce * ca,           -ce * sa,          -se,          -d * ce * sa,
        sa / (range * ce),  -ca / (range * ce), 0.0,          -d * ca / (range * ce) - 1.0,
        se * ca / range,     se * sa / range,  -ce / range,   d * se * sa / range,
        -sa / (range * ce),  ca / (range * ce), 0.0,          d * ca / (range * ce),
    );
    Ok(g)
}

/// Both input matrices evaluated at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KinematicsMatrices {
    /// Multiplies the leader command.
    pub leader: Matrix4<f64>,
    /// Multiplies the follower command.
    pub follower: Matrix4<f64>,
}

impl KinematicsMatrices {
    pub fn evaluate(x: &RelativeState, cam_offset: f64) -> Result<Self, Error> {
        Ok(KinematicsMatrices {
            leader: leader_matrix(x)?,
            follower: follower_matrix(x, cam_offset)?,
        })
    }
}

/// Rate of the spherical relative state under the given commands.
pub fn relative_rate(
    x: &RelativeState,
    cam_offset: f64,
    u_follower: &VelocityCommand,
    u_leader: &VelocityCommand,
) -> Result<Vector4<f64>, Error> {
    let m = KinematicsMatrices::evaluate(x, cam_offset)?;
    Ok(m.leader * u_leader.as_vector() + m.follower * u_follower.as_vector())
}

/// Rate of the Cartesian relative position under the given commands,
/// computed directly in the camera frame (no divisions, hence no domain
/// restriction beyond a valid state).
pub fn cartesian_rate(
    x: &RelativeState,
    cam_offset: f64,
    u_follower: &VelocityCommand,
    u_leader: &VelocityCommand,
) -> Vector3<f64> {
    let q = crate::geometry::cartesian_from_spherical(x);
    let spin = Vector3::new(q.y, -(q.x + cam_offset), 0.0);
    -u_follower.linear()
        + rot_z(x.heading + x.azimuth) * u_leader.linear()
        + u_follower.yaw_rate * spin
}

/// Solves `G(x) u = rhs` for the follower command.
///
/// Direct dense factorization with partial pivoting; the conditioning of `G`
/// is governed by `1 / (range * cos(elevation))` so the chart guards in
/// [`follower_matrix`] also bound the solve.
pub fn solve_follower(
    x: &RelativeState,
    cam_offset: f64,
    rhs: &Vector4<f64>,
) -> Result<Vector4<f64>, Error> {
    let g = follower_matrix(x, cam_offset)?;
    g.lu()
        .solve(rhs)
        .ok_or(Error::Singularity { what: "follower matrix", value: 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn state(range: f64, azimuth: f64, elevation: f64, heading: f64) -> RelativeState {
        RelativeState::new(range, azimuth, elevation, heading).unwrap()
    }

    #[test]
    fn leader_matrix_at_boresight() {
        let f = leader_matrix(&state(1.0, 0.0, 0.0, 0.0)).unwrap();
        #[rustfmt::skip]
        let expect = Matrix4::new(
            1.0, 0.0, 0.0, 0.0,
            0.0, 1.0, 0.0, 0.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, -1.0, 0.0, 1.0,
        );
        assert_eq!(f, expect);

        let f2 = leader_matrix(&state(2.0, 0.0, 0.0, 0.0)).unwrap();
        assert_eq!(f2.row(0), expect.row(0));
        assert_eq!(f2[(1, 1)], 0.5);
        assert_eq!(f2[(2, 2)], 0.5);
        assert_eq!(f2[(3, 1)], -0.5);
    }

    #[test]
    fn follower_matrix_at_boresight_with_offset() {
        let g = follower_matrix(&state(1.0, 0.0, 0.0, 0.0), 0.1).unwrap();
        #[rustfmt::skip]
        let expect = Matrix4::new(
            -1.0,  0.0,  0.0,  0.0,
             0.0, -1.0,  0.0, -1.1,
             0.0,  0.0, -1.0,  0.0,
             0.0,  1.0,  0.0,  0.1,
        );
        assert_relative_eq!(g, expect, max_relative = 1e-15);
        assert_relative_eq!(g.determinant(), 1.0, max_relative = 1e-12);

        // without the camera offset the determinant identity still holds
        let g0 = follower_matrix(&state(1.0, 0.0, 0.0, 0.0), 0.0).unwrap();
        assert_relative_eq!(g0.determinant(), 1.0, max_relative = 1e-12);
    }

    #[test]
    fn command_frames_sanity() {
        // yaw-rate-only follower command at boresight: range holds, azimuth
        // and heading counter-rotate, elevation holds.
        let x = state(1.0, 0.0, 0.0, 0.0);
        let rate = relative_rate(
            &x,
            0.1,
            &VelocityCommand::new(0.0, 0.0, 0.0, 1.0),
            &VelocityCommand::ZERO,
        )
        .unwrap();
        assert_relative_eq!(rate.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(rate.y, -1.1, max_relative = 1e-15);
        assert_relative_eq!(rate.z, 0.0, epsilon = 1e-15);
        assert_relative_eq!(rate.w, 0.1, max_relative = 1e-15);

        // matching forward velocities cancel exactly at aligned boresight
        let rate = relative_rate(
            &x,
            0.0,
            &VelocityCommand::new(0.7, 0.0, 0.0, 0.0),
            &VelocityCommand::new(0.7, 0.0, 0.0, 0.0),
        )
        .unwrap();
        assert_relative_eq!(rate.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn cartesian_rate_matches_reference_case() {
        let x = state(1.0, 0.0, 0.0, 0.0);
        let qdot = cartesian_rate(
            &x,
            0.1,
            &VelocityCommand::new(0.0, 0.0, 0.0, 1.0),
            &VelocityCommand::ZERO,
        );
        assert_relative_eq!(qdot.x, 0.0, epsilon = 1e-15);
        assert_relative_eq!(qdot.y, -1.1, max_relative = 1e-15);
        assert_relative_eq!(qdot.z, 0.0, epsilon = 1e-15);

        // pure leader forward motion, rotated line of sight
        let x = state(2.0, std::f64::consts::FRAC_PI_2, 0.0, -std::f64::consts::FRAC_PI_2);
        let qdot = cartesian_rate(&x, 0.0, &VelocityCommand::ZERO, &VelocityCommand::new(1.0, 0.0, 0.0, 0.0));
        // heading + azimuth = 0: leader velocity passes through unrotated
        assert_relative_eq!(qdot.x, 1.0, max_relative = 1e-15);
        assert_relative_eq!(qdot.y, 0.0, epsilon = 1e-15);
        assert_relative_eq!(qdot.z, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn solve_follower_reference_case() {
        let x = state(1.0, 0.0, 0.0, 0.0);
        let u = solve_follower(&x, 0.1, &Vector4::new(-0.1, 0.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(u.x, 0.1, max_relative = 1e-12);
        assert_relative_eq!(u.y, 0.0, epsilon = 1e-14);
        assert_relative_eq!(u.z, 0.0, epsilon = 1e-14);
        assert_relative_eq!(u.w, 0.0, epsilon = 1e-14);

        let zero = solve_follower(&x, 0.1, &Vector4::zeros()).unwrap();
        assert_eq!(zero, Vector4::zeros());
    }

    #[test]
    fn chart_guards_reported() {
        let tall = RelativeState::new(1.0, 0.0, std::f64::consts::FRAC_PI_2 - 1e-9, 0.0).unwrap();
        assert!(matches!(
            leader_matrix(&tall),
            Err(Error::Singularity { what: "cos(elevation)", .. })
        ));
        assert!(matches!(
            follower_matrix(&tall, 0.1),
            Err(Error::Singularity { what: "cos(elevation)", .. })
        ));
        assert!(matches!(
            follower_matrix(&state(1.0, 0.0, 0.0, 0.0), f64::NAN),
            Err(Error::NonFinite("cam_offset"))
        ));
    }

    #[test]
    fn input_row_coupling_invariant() {
        // azimuth and heading rows differ only through the yaw-rate channel:
        // rows 2 and 4 of F sum to (0,0,0,1), of G to (0,0,0,-1).
        for (range, az, el, hd, d) in [
            (0.7, 0.3, -0.5, 1.1, 0.0),
            (2.4, -2.0, 0.9, -2.8, 0.12),
            (10.0, 1.5, -1.2, 0.4, 0.05),
        ] {
            let x = state(range, az, el, hd);
            let f = leader_matrix(&x).unwrap();
            let g = follower_matrix(&x, d).unwrap();
            let fsum = f.row(1) + f.row(3);
            let gsum = g.row(1) + g.row(3);
            for c in 0..3 {
                assert_relative_eq!(fsum[c], 0.0, epsilon = 1e-15);
                assert_relative_eq!(gsum[c], 0.0, epsilon = 1e-15);
            }
            assert_relative_eq!(fsum[3], 1.0, max_relative = 1e-15);
            assert_relative_eq!(gsum[3], -1.0, max_relative = 1e-15);
        }
    }
}
