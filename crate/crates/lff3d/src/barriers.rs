//! Frustum visibility barriers and their control-affine constraint rows.
//!
//! The camera frustum is the intersection of six halfspaces in the camera
//! frame, each encoded as a barrier function that is positive inside:
//!
//! ```text
//! h_near = x - near                 h_far  = far - x
//! h_ymin = x tan(hfov/2) + y        h_ymax = x tan(hfov/2) - y
//! h_zmin = x tan(vfov/2) + z        h_zmax = x tan(vfov/2) - z
//! ```
//!
//! All six are affine in the Cartesian relative position `q`, so their
//! gradients are constants of the frustum geometry and the barrier rates are
//! linear in `qdot`. Combined with the affine dependence of `qdot` on the
//! follower command this yields one linear inequality per face:
//!
//! ```text
//! hdot_l(u_f) + kappa h_l >= delta_l     <=>     a_l^T u_f >= b_l
//! ```
//!
//! which is exactly the row format the QP solver consumes. Enforcing the
//! rows keeps each face value above `exp(-kappa t) h_l(0)` (up to the margin
//! `delta_l` and sampling effects), hence the frustum forward invariant.

use nalgebra::{Vector3, Vector4};

use crate::geometry::{cartesian_from_spherical, rot_z, CartesianRelative, FrustumParams, RelativeState};
use crate::kinematics::VelocityCommand;
use crate::Error;

/// The six frustum faces, in the fixed row order used across the crate
/// (values, gradients, constraint rows, logs).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrustumFace {
    /// Minimum depth plane `x = near`.
    Near,
    /// Maximum depth plane `x = far`.
    Far,
    /// Horizontal field-of-view plane on the negative-y side.
    YMin,
    /// Horizontal field-of-view plane on the positive-y side.
    YMax,
    /// Vertical field-of-view plane on the negative-z side.
    ZMin,
    /// Vertical field-of-view plane on the positive-z side.
    ZMax,
}

impl FrustumFace {
    pub const ALL: [FrustumFace; 6] = [
        FrustumFace::Near,
        FrustumFace::Far,
        FrustumFace::YMin,
        FrustumFace::YMax,
        FrustumFace::ZMin,
        FrustumFace::ZMax,
    ];

    pub fn index(&self) -> usize {
        FrustumFace::ALL.iter().position(|f| f == self).unwrap()
    }

    pub fn label(&self) -> &'static str {
        match self {
            FrustumFace::Near => "near",
            FrustumFace::Far => "far",
            FrustumFace::YMin => "ymin",
            FrustumFace::YMax => "ymax",
            FrustumFace::ZMin => "zmin",
            FrustumFace::ZMax => "zmax",
        }
    }
}

/// Barrier values at one relative position, ordered as [`FrustumFace::ALL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierValues {
    pub h: [f64; 6],
}

impl BarrierValues {
    /// Smallest face value; nonnegative exactly inside the frustum.
    pub fn min(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn get(&self, face: FrustumFace) -> f64 {
        self.h[face.index()]
    }
}

/// Barrier values at `q`.
pub fn values(q: &CartesianRelative, frustum: &FrustumParams) -> BarrierValues {
    let ty = frustum.tan_half_horizontal();
    let tz = frustum.tan_half_vertical();
    BarrierValues {
        h: [
            q.x - frustum.near,
            frustum.far - q.x,
            q.x * ty + q.y,
            q.x * ty - q.y,
            q.x * tz + q.z,
            q.x * tz - q.z,
        ],
    }
}

/// Gradients of the barrier values with respect to `q`; constant over the
/// whole frame.
pub fn gradients(frustum: &FrustumParams) -> [Vector3<f64>; 6] {
    let ty = frustum.tan_half_horizontal();
    let tz = frustum.tan_half_vertical();
    [
        Vector3::new(1.0, 0.0, 0.0),
        Vector3::new(-1.0, 0.0, 0.0),
        Vector3::new(ty, 1.0, 0.0),
        Vector3::new(ty, -1.0, 0.0),
        Vector3::new(tz, 0.0, 1.0),
        Vector3::new(tz, 0.0, -1.0),
    ]
}

/// One QP-ready inequality `coeffs^T u_f >= bound` for a frustum face.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintRow {
    pub face: FrustumFace,
    pub coeffs: Vector4<f64>,
    pub bound: f64,
}

impl ConstraintRow {
    /// Value of `hdot + kappa h - delta` at a candidate follower command;
    /// nonnegative iff the row is satisfied.
    pub fn margin(&self, u_follower: &VelocityCommand) -> f64 {
        self.coeffs.dot(&u_follower.as_vector()) - self.bound
    }
}

/// Builds the six constraint rows at the current state.
///
/// The rows are affine in the follower command because
///
/// ```text
/// qdot = M(q) u_f + Rz(heading + azimuth) v_l
/// M(q) u_f = -v_f + yaw_rate_f * (q_y, -(q_x + cam_offset), 0)
/// ```
///
/// so `hdot_l = grad_l . qdot` splits into `a_l^T u_f` plus a leader drift
/// term that lands in the bound. `delta` is a per-face robustness margin
/// (see the safety filter).
pub fn constraint_rows(
    x: &RelativeState,
    frustum: &FrustumParams,
    u_leader: &VelocityCommand,
    kappa: f64,
    delta: &[f64; 6],
) -> Result<[ConstraintRow; 6], Error> {
    if !kappa.is_finite() || kappa <= 0.0 {
        return Err(Error::invalid("kappa", "must be positive and finite"));
    }
    if delta.iter().any(|d| !d.is_finite()) {
        return Err(Error::NonFinite("delta"));
    }
    if !u_leader.is_finite() {
        return Err(Error::NonFinite("leader command"));
    }
    let q = cartesian_from_spherical(x);
    let h = values(&q, frustum);
    let grads = gradients(frustum);
    let drift = rot_z(x.heading + x.azimuth) * u_leader.linear();
    let spin = Vector3::new(q.y, -(q.x + frustum.cam_offset), 0.0);

    Ok(std::array::from_fn(|l| {
        let g = grads[l];
        ConstraintRow {
            face: FrustumFace::ALL[l],
            coeffs: Vector4::new(-g.x, -g.y, -g.z, g.dot(&spin)),
            bound: delta[l] - kappa * h.h[l] - g.dot(&drift),
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{cartesian_rate, solve_follower, leader_matrix};
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3};

    fn frustum() -> FrustumParams {
        FrustumParams::new(FRAC_PI_2, FRAC_PI_3, 0.3, 3.0, 0.05).unwrap()
    }

    #[test]
    fn values_reference_case() {
        let h = values(&CartesianRelative::new(1.0, 0.2, -0.1), &frustum());
        assert_relative_eq!(h.h[0], 0.7, max_relative = 1e-15);
        assert_relative_eq!(h.h[1], 2.0, max_relative = 1e-15);
        assert_relative_eq!(h.h[2], 1.2, max_relative = 1e-15);
        assert_relative_eq!(h.h[3], 0.8, max_relative = 1e-14);
        assert_relative_eq!(h.h[4], 0.47735026918962573, max_relative = 1e-14);
        assert_relative_eq!(h.h[5], 0.6773502691896257, max_relative = 1e-14);
        assert_relative_eq!(h.min(), 0.47735026918962573, max_relative = 1e-14);
        assert_eq!(h.get(FrustumFace::ZMin), h.h[4]);
    }

    #[test]
    fn boundary_and_violation_signs() {
        let fr = frustum();
        // on the near plane, centered: h_near = 0, others positive
        let h = values(&CartesianRelative::new(0.3, 0.0, 0.0), &fr);
        assert_relative_eq!(h.h[0], 0.0, epsilon = 1e-15);
        assert!(h.h[1..].iter().all(|&v| v > 0.0));
        assert!(fr.contains(&CartesianRelative::new(0.3, 0.0, 0.0)));

        // outside the horizontal field of view: exactly ymax negative
        let q = CartesianRelative::new(1.0, 1.2, 0.0);
        let h = values(&q, &fr);
        assert!(h.h[3] < 0.0 && h.min() == h.h[3]);
        assert!(!fr.contains(&q));
    }

    #[test]
    fn membership_matches_min_sign() {
        let fr = frustum();
        let mut k = 0u32;
        for xi in [0.2, 0.3, 0.9, 2.9, 3.1] {
            for yi in [-1.5, -0.2, 0.0, 0.4, 1.1] {
                for zi in [-0.8, -0.1, 0.0, 0.3, 0.9] {
                    let q = CartesianRelative::new(xi, yi, zi);
                    assert_eq!(values(&q, &fr).min() >= 0.0, fr.contains(&q), "q = {q:?}");
                    k += 1;
                }
            }
        }
        assert_eq!(k, 125);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let fr = frustum();
        let q = CartesianRelative::new(1.3, -0.4, 0.2);
        let fd = crate::oracles::finite_difference_barrier_gradients(&q, &fr, 1e-6);
        for (g, gfd) in gradients(&fr).iter().zip(fd.iter()) {
            assert_relative_eq!(g, gfd, epsilon = 1e-8);
        }
    }

    #[test]
    fn rows_reproduce_rate_condition_for_any_command() {
        // for arbitrary u_f: coeffs^T u_f - bound == hdot + kappa h - delta
        let fr = frustum();
        let x = RelativeState::new(1.4, 0.5, -0.3, 1.0).unwrap();
        let u_l = VelocityCommand::new(0.4, -0.2, 0.1, 0.6);
        let kappa = 2.0;
        let delta = [0.01, 0.0, 0.02, 0.0, 0.03, 0.0];
        let rows = constraint_rows(&x, &fr, &u_l, kappa, &delta).unwrap();
        let q = cartesian_from_spherical(&x);
        let h = values(&q, &fr);
        let grads = gradients(&fr);

        for u_f in [
            VelocityCommand::new(0.0, 0.0, 0.0, 0.0),
            VelocityCommand::new(1.0, -2.0, 0.5, 1.5),
            VelocityCommand::new(-0.3, 0.8, -1.1, -2.0),
        ] {
            let qdot = cartesian_rate(&x, fr.cam_offset, &u_f, &u_l);
            for l in 0..6 {
                let gamma = grads[l].dot(&qdot) + kappa * h.h[l] - delta[l];
                assert_relative_eq!(rows[l].margin(&u_f), gamma, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn rows_match_trajectory_finite_differences() {
        let fr = frustum();
        let x = RelativeState::new(1.1, -0.8, 0.4, 2.2).unwrap();
        let u_l = VelocityCommand::new(-0.5, 0.3, -0.2, 0.9);
        let u_f = VelocityCommand::new(0.6, 0.1, 0.4, -1.2);
        let rows = constraint_rows(&x, &fr, &u_l, 1.7, &[0.0; 6]).unwrap();
        let q = cartesian_from_spherical(&x);
        let h = values(&q, &fr);
        let hdot_fd =
            crate::oracles::finite_difference_barrier_rates(&x, &fr, &u_f, &u_l, 1e-6);
        for l in 0..6 {
            let gamma_fd = hdot_fd[l] + 1.7 * h.h[l];
            assert_relative_eq!(rows[l].margin(&u_f), gamma_fd, epsilon = 1e-6);
        }
    }

    #[test]
    fn stationary_formation_leaves_pure_decay_margin() {
        // follower command that freezes the relative state: hdot = 0, so the
        // row margin reduces to kappa * h
        let fr = frustum();
        let x = RelativeState::new(1.2, 0.3, 0.1, -0.4).unwrap();
        let u_l = VelocityCommand::new(0.5, -0.1, 0.2, 0.3);
        let kappa = 2.5;
        let hold = solve_follower(
            &x,
            fr.cam_offset,
            &(-(leader_matrix(&x).unwrap() * u_l.as_vector())),
        )
        .unwrap();
        let u_hold = VelocityCommand::from_vector(&hold);
        let rows = constraint_rows(&x, &fr, &u_l, kappa, &[0.0; 6]).unwrap();
        let h = values(&cartesian_from_spherical(&x), &fr);
        for l in 0..6 {
            assert_relative_eq!(rows[l].margin(&u_hold), kappa * h.h[l], epsilon = 1e-9);
        }
    }

    #[test]
    fn parameter_validation() {
        let x = RelativeState::new(1.0, 0.0, 0.0, 0.0).unwrap();
        let err = constraint_rows(&x, &frustum(), &VelocityCommand::ZERO, 0.0, &[0.0; 6]);
        assert!(matches!(err, Err(Error::InvalidParameter { what: "kappa", .. })));
        let err = constraint_rows(
            &x,
            &frustum(),
            &VelocityCommand::ZERO,
            1.0,
            &[f64::NAN, 0.0, 0.0, 0.0, 0.0, 0.0],
        );
        assert!(matches!(err, Err(Error::NonFinite("delta"))));
    }
}
