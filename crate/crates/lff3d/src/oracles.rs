//! Independent reference computations used to cross-check the production
//! code paths.
//!
//! Every function here derives its answer by a different route than the
//! implementation it checks: componentwise scalar rate formulas instead of
//! the assembled matrices, the exact constant-command screw motion instead
//! of the Runge-Kutta integrator, central finite differences instead of
//! analytic rates, the spherical chain rule instead of the direct Cartesian
//! rate, and exhaustive active-set enumeration instead of the iterative QP
//! solver. They are kept simple and slow on purpose; [`crate::verify`] and
//! the test suites drive them.

use nalgebra::{DMatrix, DVector, Matrix3x4, Vector3, Vector4};

use crate::geometry::{
    leader_pose_for, relative_cartesian, rot_z, spherical_from_cartesian, wrap_finite,
    FrustumParams, Pose, RelativeState,
};
use crate::kinematics::VelocityCommand;
use crate::qp::QpProblem;

/// Rate of the spherical state written out componentwise, term by term.
///
/// Mirrors the scalar expansion of the relative kinematics rather than the
/// matrix assembly, so a sign or placement error in either route shows up as
/// a mismatch.
pub fn scalar_relative_rate(
    x: &RelativeState,
    cam_offset: f64,
    u_follower: &VelocityCommand,
    u_leader: &VelocityCommand,
) -> Vector4<f64> {
    let l = x.range;
    let (sa, ca) = x.azimuth.sin_cos();
    let (se, ce) = x.elevation.sin_cos();
    let (sh, ch) = x.heading.sin_cos();
    let d = cam_offset;
    let (vxi, vyi, vzi, wi) =
        (u_follower.vx, u_follower.vy, u_follower.vz, u_follower.yaw_rate);
    let (vxj, vyj, vzj, wj) = (u_leader.vx, u_leader.vy, u_leader.vz, u_leader.yaw_rate);

    let range_rate = -ce * (ca * vxi + sa * vyi) - se * vzi - d * wi * ce * sa
        + ce * (ch * vxj - sh * vyj)
        + se * vzj;
    let azimuth_rate = (sa * vxi - ca * vyi) / (l * ce) - d * ca * wi / (l * ce) - wi
        + (sh * vxj + ch * vyj) / (l * ce);
    let elevation_rate = (se * (ca * vxi + sa * vyi) - ce * vzi) / l + d * se * sa * wi / l
        - se * ch * vxj / l
        + se * sh * vyj / l
        + ce * vzj / l;
    let heading_rate = wj - (sa * vxi - ca * vyi) / (l * ce) + d * ca * wi / (l * ce)
        - (sh * vxj + ch * vyj) / (l * ce);

    Vector4::new(range_rate, azimuth_rate, elevation_rate, heading_rate)
}

/// Exact pose after holding a velocity command for `t` seconds.
///
/// With constant body-frame velocity and yaw rate the trajectory is a screw
/// motion with a closed form, so this flow has no integration error at all.
pub fn exact_pose_flow(pose: &Pose, u: &VelocityCommand, t: f64) -> Pose {
    let w = u.yaw_rate;
    let (s_int, c_int) = if (w * t).abs() < 1e-6 {
        // series in w*t keeps the limits stable near w = 0
        (
            t * (1.0 - (w * t) * (w * t) / 6.0),
            w * t * t / 2.0 * (1.0 - (w * t) * (w * t) / 12.0),
        )
    } else {
        ((w * t).sin() / w, (1.0 - (w * t).cos()) / w)
    };
    // integral of Rz(w s) over [0, t]
    let m = nalgebra::Matrix3::new(s_int, -c_int, 0.0, c_int, s_int, 0.0, 0.0, 0.0, t);
    Pose {
        position: pose.position + rot_z(pose.yaw) * (m * u.linear()),
        yaw: wrap_finite(pose.yaw + w * t),
    }
}

/// Realizes `x` with a fixed nontrivial follower pose and returns both poses.
pub fn pose_pair_for(x: &RelativeState, cam_offset: f64) -> (Pose, Pose) {
    let follower = Pose { position: Vector3::new(0.37, -0.81, 0.52), yaw: 0.9 };
    let leader = leader_pose_for(&follower, x, cam_offset);
    (follower, leader)
}

/// Central finite difference of the spherical state along the exact
/// two-agent flow. Angle components are differenced along the shortest arc.
pub fn finite_difference_relative_rate(
    x: &RelativeState,
    cam_offset: f64,
    u_follower: &VelocityCommand,
    u_leader: &VelocityCommand,
    step: f64,
) -> Vector4<f64> {
    let (follower, leader) = pose_pair_for(x, cam_offset);
    let sample = |t: f64| -> Vector4<f64> {
        let f = exact_pose_flow(&follower, u_follower, t);
        let l = exact_pose_flow(&leader, u_leader, t);
        let q = relative_cartesian(&f, &l, cam_offset);
        spherical_from_cartesian(&q, f.yaw, l.yaw)
            .expect("finite-difference probe left the chart")
            .as_vector()
    };
    let plus = sample(step);
    let minus = sample(-step);
    Vector4::new(
        (plus.x - minus.x) / (2.0 * step),
        wrap_finite(plus.y - minus.y) / (2.0 * step),
        (plus.z - minus.z) / (2.0 * step),
        wrap_finite(plus.w - minus.w) / (2.0 * step),
    )
}

/// Jacobian of the Cartesian relative position with respect to the spherical
/// state.
pub fn spherical_jacobian(x: &RelativeState) -> Matrix3x4<f64> {
    let l = x.range;
    let (sa, ca) = x.azimuth.sin_cos();
    let (se, ce) = x.elevation.sin_cos();
    Matrix3x4::new(
        ce * ca, -l * ce * sa, -l * se * ca, 0.0,
        ce * sa, l * ce * ca, -l * se * sa, 0.0,
        se, 0.0, l * ce, 0.0,
    )
}

/// Cartesian rate computed through the spherical chain rule
/// `qdot = (dq/dx) xdot` with `xdot` supplied by the caller.
///
/// Pairing this with [`scalar_relative_rate`] gives a route to `qdot` that
/// shares no code with [`crate::kinematics::cartesian_rate`].
pub fn chain_rule_cartesian_rate(x: &RelativeState, xdot: &Vector4<f64>) -> Vector3<f64> {
    spherical_jacobian(x) * xdot
}

/// Central finite difference of the six barrier values along the exact
/// two-agent flow.
pub fn finite_difference_barrier_rates(
    x: &RelativeState,
    frustum: &FrustumParams,
    u_follower: &VelocityCommand,
    u_leader: &VelocityCommand,
    step: f64,
) -> [f64; 6] {
    let (follower, leader) = pose_pair_for(x, frustum.cam_offset);
    let sample = |t: f64| -> [f64; 6] {
        let f = exact_pose_flow(&follower, u_follower, t);
        let l = exact_pose_flow(&leader, u_leader, t);
        let q = relative_cartesian(&f, &l, frustum.cam_offset);
        crate::barriers::values(&q, frustum).h
    };
    let plus = sample(step);
    let minus = sample(-step);
    std::array::from_fn(|i| (plus[i] - minus[i]) / (2.0 * step))
}

/// Central finite difference of the barrier values with respect to the
/// Cartesian relative position.
pub fn finite_difference_barrier_gradients(
    q: &crate::geometry::CartesianRelative,
    frustum: &FrustumParams,
    step: f64,
) -> [Vector3<f64>; 6] {
    let value = |v: Vector3<f64>| -> [f64; 6] {
        crate::barriers::values(&crate::geometry::CartesianRelative::from_vector(&v), frustum).h
    };
    let base = q.as_vector();
    let mut grads = [Vector3::zeros(); 6];
    for axis in 0..3 {
        let mut dv = Vector3::zeros();
        dv[axis] = step;
        let plus = value(base + dv);
        let minus = value(base - dv);
        for (face, grad) in grads.iter_mut().enumerate() {
            grad[axis] = (plus[face] - minus[face]) / (2.0 * step);
        }
    }
    grads
}

/// Projection of `u0` onto the halfspace `a^T u >= b`.
pub fn project_halfspace(u0: &Vector4<f64>, a: &Vector4<f64>, b: f64) -> Vector4<f64> {
    let slack = b - a.dot(u0);
    if slack <= 0.0 {
        *u0
    } else {
        u0 + a * (slack / a.norm_squared())
    }
}

/// Minimizer of a strictly convex inequality-constrained QP found by
/// exhaustive active-set enumeration.
///
/// Every subset of rows up to size `n` is treated as an equality system; the
/// KKT system is solved, infeasible or singular candidates are discarded,
/// and the feasible candidate with the smallest objective is returned. The
/// optimal active set is among the subsets, and every surviving candidate is
/// feasible, so the minimum over candidates is the exact solution. Cost is
/// exponential in the number of rows; callers keep instances small.
///
/// Returns `None` when no candidate is feasible (infeasible problem).
pub fn enumerate_qp(problem: &QpProblem, feasibility_tol: f64) -> Option<DVector<f64>> {
    let n = problem.dimension();
    let m = problem.rows.len();
    assert!(m <= 24, "enumeration oracle is for small instances");

    let mut best: Option<(f64, DVector<f64>)> = None;
    let mut consider = |z: DVector<f64>| {
        if !problem.is_feasible(&z, feasibility_tol) {
            return;
        }
        let obj = problem.objective(&z);
        if best.as_ref().map_or(true, |(b, _)| obj < *b) {
            best = Some((obj, z));
        }
    };

    // subset = bitmask over rows; skip subsets larger than n
    for mask in 0u32..(1u32 << m) {
        let k = mask.count_ones() as usize;
        if k > n {
            continue;
        }
        if let Some(z) = solve_equality_kkt(problem, mask) {
            consider(z);
        }
    }
    best.map(|(_, z)| z)
}

/// Solves the KKT system of `min z^T Q z + c^T z` subject to the rows in
/// `mask` holding with equality. Returns `None` when the system is singular.
fn solve_equality_kkt(problem: &QpProblem, mask: u32) -> Option<DVector<f64>> {
    let n = problem.dimension();
    let active: Vec<usize> =
        (0..problem.rows.len()).filter(|i| mask & (1 << i) != 0).collect();
    let k = active.len();
    let dim = n + k;
    let mut kkt = DMatrix::zeros(dim, dim);
    let mut rhs = DVector::zeros(dim);
    for i in 0..n {
        kkt[(i, i)] = 2.0 * problem.quadratic[i];
        rhs[i] = -problem.linear[i];
    }
    for (row_idx, &r) in active.iter().enumerate() {
        let row = &problem.rows[r];
        for i in 0..n {
            kkt[(i, n + row_idx)] = -row.coeffs[i];
            kkt[(n + row_idx, i)] = row.coeffs[i];
        }
        rhs[n + row_idx] = row.bound;
    }
    let solved = kkt.lu().solve(&rhs)?;
    let z = solved.rows(0, n).into_owned();
    // reject spurious solutions from near-singular systems
    let mut residual: f64 = 0.0;
    for (row_idx, &r) in active.iter().enumerate() {
        let _ = row_idx;
        let row = &problem.rows[r];
        let mut ax = 0.0;
        for i in 0..n {
            ax += row.coeffs[i] * z[i];
        }
        residual = residual.max((ax - row.bound).abs());
    }
    if !z.iter().all(|v| v.is_finite()) || residual > 1e-7 {
        return None;
    }
    Some(z)
}

/// Exact minimizer of the structured safety-filter QP
///
/// ```text
/// min |u - u0|^2 + rho * sum(s_l^2)
/// s.t. a_l^T u + s_l >= b_l,  s_l >= 0,  lo <= u <= hi
/// ```
///
/// found by enumeration in the reduced space: eliminating each slack at its
/// optimum `s_l = max(0, b_l - a_l^T u)` leaves a piecewise quadratic in `u`
/// alone, and the pieces are indexed by which rows pay slack. For every
/// (slack pattern, box face pattern) combination the restricted quadratic is
/// solved on the free coordinates and inconsistent candidates are dropped;
/// the feasible minimum over candidates is the solution.
///
/// Degenerate instances where a row binds with exactly zero slack and zero
/// multiplier gap fall between patterns; random instances avoid them with
/// probability one, and such a miss surfaces as a comparison failure rather
/// than a wrong "pass".
pub fn enumerate_filter_qp(
    a_rows: &[Vector4<f64>; 6],
    b: &[f64; 6],
    u0: &Vector4<f64>,
    rho: f64,
    lo: &Vector4<f64>,
    hi: &Vector4<f64>,
) -> Option<(Vector4<f64>, [f64; 6])> {
    let mut best: Option<(f64, Vector4<f64>, [f64; 6])> = None;

    // box face pattern: per coordinate 0 = free, 1 = at lo, 2 = at hi
    for face_code in 0..81u32 {
        let mut faces = [0u8; 4];
        let mut c = face_code;
        for f in faces.iter_mut() {
            *f = (c % 3) as u8;
            c /= 3;
        }
        if faces.iter().enumerate().any(|(i, &f)| {
            (f == 1 && !lo[i].is_finite()) || (f == 2 && !hi[i].is_finite())
        }) {
            continue;
        }
        let free: Vec<usize> = (0..4).filter(|&i| faces[i] == 0).collect();

        for slack_mask in 0..64u32 {
            // objective in the free coordinates v (u[free] = v, rest pinned):
            // sum_i (v_i - u0_i)^2 + rho * sum_{l in mask} (r_l - a_l[free]^T v)^2
            // with r_l = b_l - a_l[pinned]^T pinned
            let mut pinned = Vector4::zeros();
            for i in 0..4 {
                pinned[i] = match faces[i] {
                    1 => lo[i],
                    2 => hi[i],
                    _ => 0.0,
                };
            }
            let nf = free.len();
            let mut hess = DMatrix::zeros(nf, nf);
            let mut grad = DVector::zeros(nf);
            for (r, &i) in free.iter().enumerate() {
                hess[(r, r)] = 2.0;
                grad[r] = -2.0 * u0[i];
            }
            for l in 0..6 {
                if slack_mask & (1 << l) == 0 {
                    continue;
                }
                let a = &a_rows[l];
                let mut resid = b[l];
                for i in 0..4 {
                    if faces[i] != 0 {
                        resid -= a[i] * pinned[i];
                    }
                }
                for (r, &i) in free.iter().enumerate() {
                    grad[r] += -2.0 * rho * resid * a[i];
                    for (s, &j) in free.iter().enumerate() {
                        hess[(r, s)] += 2.0 * rho * a[i] * a[j];
                    }
                }
            }
            let v = if nf == 0 {
                DVector::zeros(0)
            } else {
                match hess.clone().cholesky() {
                    Some(ch) => ch.solve(&(-grad)),
                    None => continue,
                }
            };
            let mut u = pinned;
            for (r, &i) in free.iter().enumerate() {
                u[i] = v[r];
            }

            // consistency and feasibility of the candidate
            let mut ok = true;
            for i in 0..4 {
                let l_ok = !lo[i].is_finite() || u[i] >= lo[i] - 1e-9;
                let h_ok = !hi[i].is_finite() || u[i] <= hi[i] + 1e-9;
                if !(l_ok && h_ok) {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut slacks = [0.0; 6];
            for l in 0..6 {
                let viol = b[l] - a_rows[l].dot(&u);
                if slack_mask & (1 << l) != 0 {
                    // pattern says this row pays slack
                    if viol < -1e-9 {
                        ok = false;
                        break;
                    }
                    slacks[l] = viol.max(0.0);
                } else if viol > 1e-9 {
                    // pattern says satisfied without slack, but it is not
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            let mut obj = (u - u0).norm_squared();
            for s in slacks {
                obj += rho * s * s;
            }
            if best.as_ref().map_or(true, |(bst, _, _)| obj < *bst) {
                best = Some((obj, u, slacks));
            }
        }
    }
    best.map(|(_, u, s)| (u, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{cartesian_rate, relative_rate};
    use approx::assert_relative_eq;

    #[test]
    fn exact_flow_reference_cases() {
        let p = Pose { position: Vector3::zeros(), yaw: 0.0 };
        // straight line
        let q = exact_pose_flow(&p, &VelocityCommand::new(1.0, 0.0, 0.5, 0.0), 2.0);
        assert_relative_eq!(q.position.x, 2.0, max_relative = 1e-15);
        assert_relative_eq!(q.position.z, 1.0, max_relative = 1e-15);
        // quarter circle of radius 1: v = 1, w = 1, t = pi/2
        let q = exact_pose_flow(
            &p,
            &VelocityCommand::new(1.0, 0.0, 0.0, 1.0),
            std::f64::consts::FRAC_PI_2,
        );
        assert_relative_eq!(q.position.x, 1.0, max_relative = 1e-12);
        assert_relative_eq!(q.position.y, 1.0, max_relative = 1e-12);
        assert_relative_eq!(q.yaw, std::f64::consts::FRAC_PI_2, max_relative = 1e-12);
        // small-rate series branch stays continuous
        let a = exact_pose_flow(&p, &VelocityCommand::new(1.0, 0.0, 0.0, 1e-7), 1.0);
        let b = exact_pose_flow(&p, &VelocityCommand::new(1.0, 0.0, 0.0, 1.1e-6), 1.0);
        assert_relative_eq!(a.position.x, b.position.x, epsilon = 1e-9);
    }

    #[test]
    fn scalar_and_matrix_rates_agree_spotcheck() {
        let x = RelativeState::new(1.3, 0.7, -0.4, 2.1).unwrap();
        let uf = VelocityCommand::new(0.3, -0.8, 0.2, 0.9);
        let ul = VelocityCommand::new(-0.5, 0.1, -0.3, 0.4);
        let scalar = scalar_relative_rate(&x, 0.07, &uf, &ul);
        let matrix = relative_rate(&x, 0.07, &uf, &ul).unwrap();
        assert_relative_eq!(scalar, matrix, epsilon = 1e-13);
    }

    #[test]
    fn finite_difference_agrees_with_both_routes() {
        let x = RelativeState::new(0.9, -1.2, 0.5, -2.4).unwrap();
        let uf = VelocityCommand::new(-0.4, 0.6, -0.1, -0.7);
        let ul = VelocityCommand::new(0.8, -0.2, 0.4, 1.1);
        let fd = finite_difference_relative_rate(&x, 0.05, &uf, &ul, 1e-6);
        let matrix = relative_rate(&x, 0.05, &uf, &ul).unwrap();
        assert_relative_eq!(fd, matrix, epsilon = 1e-8);
    }

    #[test]
    fn chain_rule_matches_direct_cartesian_rate() {
        let x = RelativeState::new(2.2, 2.9, -0.9, 0.3).unwrap();
        let uf = VelocityCommand::new(0.2, 0.5, -0.6, 0.8);
        let ul = VelocityCommand::new(-0.9, 0.3, 0.1, -0.5);
        let xdot = scalar_relative_rate(&x, 0.11, &uf, &ul);
        let via_chain = chain_rule_cartesian_rate(&x, &xdot);
        let direct = cartesian_rate(&x, 0.11, &uf, &ul);
        assert_relative_eq!(via_chain, direct, epsilon = 1e-12);
    }

    #[test]
    fn halfspace_projection_reference_case() {
        let u0 = Vector4::new(1.0, 0.0, 0.0, 0.0);
        let a = Vector4::new(0.0, 2.0, 0.0, 0.0);
        let p = project_halfspace(&u0, &a, 1.0);
        assert_relative_eq!(p, Vector4::new(1.0, 0.5, 0.0, 0.0), epsilon = 1e-15);
        // already feasible: unchanged
        let p = project_halfspace(&u0, &a, -1.0);
        assert_eq!(p, u0);
    }
}
