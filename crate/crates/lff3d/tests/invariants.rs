//! Property-based invariants across module boundaries.

use lff3d::sim::step_pose;
use lff3d::{
    constraint_rows, filter, relative_cartesian, spherical_from_cartesian, wrap_finite, CbfParams,
    FrustumParams, Pose, RelativeState, VelocityCommand,
};
use nalgebra::Vector3;
use proptest::prelude::*;

fn valid_state() -> impl Strategy<Value = RelativeState> {
    (0.3f64..5.0, -1.0f64..1.0, -0.9f64..0.9, -3.1f64..3.1)
        .prop_map(|(l, phi, xi, alpha)| RelativeState::new(l, phi, xi, alpha).unwrap())
}

fn command(mag: f64) -> impl Strategy<Value = VelocityCommand> {
    (-mag..mag, -mag..mag, -mag..mag, -mag..mag)
        .prop_map(|(vx, vy, vz, w)| VelocityCommand::new(vx, vy, vz, w))
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        .. ProptestConfig::default()
    })]

    // Placing a pose pair at a state and measuring it back is the identity.
    #[test]
    fn state_to_poses_and_back(
        x in valid_state(),
        cam_offset in 0.0f64..0.4,
        leader_yaw in -3.1f64..3.1,
        px in -5.0f64..5.0,
        py in -5.0f64..5.0,
        pz in -5.0f64..5.0,
    ) {
        let leader = Pose::new(Vector3::new(px, py, pz), leader_yaw).unwrap();
        let follower = lff3d::follower_pose_for(&leader, &x, cam_offset);
        let q = relative_cartesian(&follower, &leader, cam_offset);
        let back = spherical_from_cartesian(&q, follower.yaw, leader.yaw).unwrap();
        prop_assert!((back.range - x.range).abs() <= 1e-9);
        prop_assert!(wrap_finite(back.azimuth - x.azimuth).abs() <= 1e-9);
        prop_assert!((back.elevation - x.elevation).abs() <= 1e-9);
        prop_assert!(wrap_finite(back.heading - x.heading).abs() <= 1e-9);
    }

    // One RK4 step under constant input stays within a step of the exact
    // screw-motion flow.
    #[test]
    fn pose_step_tracks_the_exact_flow(
        u in command(2.0),
        yaw in -3.1f64..3.1,
        dt in 0.001f64..0.05,
    ) {
        let start = Pose::new(Vector3::new(0.4, -0.2, 1.0), yaw).unwrap();
        let stepped = step_pose(&start, &u, dt);
        let exact = lff3d::oracles::exact_pose_flow(&start, &u, dt);
        // one-step error bound |v| w^4 dt^5 / 2880 at |v| <= 2*sqrt(3),
        // |w| <= 2, with headroom
        let budget = 0.05 * dt.powi(5) + 1e-12;
        prop_assert!((stepped.position - exact.position).norm() <= budget);
        prop_assert!(wrap_finite(stepped.yaw - exact.yaw).abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        .. ProptestConfig::default()
    })]

    // Whatever the filter returns respects the constraint rows up to the
    // reported slacks and stays inside the command box.
    #[test]
    fn filtered_command_is_sound(
        x in valid_state(),
        u_nom in command(2.0),
        u_leader in command(1.0),
        kappa in 0.5f64..5.0,
        delta in 0.0f64..0.2,
    ) {
        let frustum = FrustumParams::new(1.6, 1.2, 0.3, 5.0, 0.1).unwrap();
        let lo = VelocityCommand::new(-1.5, -1.5, -1.5, -1.5);
        let hi = VelocityCommand::new(1.5, 1.5, 1.5, 1.5);
        let params = CbfParams::new(kappa, [delta; 6], 1e4, lo, hi, true).unwrap();
        let result = filter(&x, &frustum, &u_nom, &u_leader, &params).unwrap();
        let rows = constraint_rows(&x, &frustum, &u_leader, kappa, &[delta; 6]).unwrap();
        for l in 0..6 {
            prop_assert!(
                rows[l].margin(&result.u_safe) >= -result.slacks[l] - 1e-7,
                "row {} violated beyond its slack", l
            );
            prop_assert!(result.slacks[l] >= -1e-9);
        }
        let u = result.u_safe.as_vector();
        for i in 0..4 {
            prop_assert!(u[i] >= -1.5 - 1e-9 && u[i] <= 1.5 + 1e-9);
        }
    }
}
