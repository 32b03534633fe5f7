//! Self-contained verification suite.
//!
//! Each check compares a production code path against an oracle that gets to
//! the same number a different way: central finite differences of exact
//! screw-motion flows, exhaustive active-set enumeration, closed-form
//! identities, or plain replays. Samples are drawn from a seeded generator,
//! so a report is reproducible bit for bit.
//!
//! The suite returns structured reports rather than printing, and the
//! kinematics matrices can be swapped out through [`run_with`] so tests can
//! demonstrate that an injected defect is actually caught.

use nalgebra::Vector4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::barriers::{constraint_rows, gradients, values};
use crate::controller::{nominal_command, tracking_error, FormationReference, Gains};
use crate::geometry::{
    cartesian_from_spherical, relative_cartesian, spherical_from_cartesian, wrap_finite,
    FrustumParams, Pose, RelativeState,
};
use crate::kinematics::{cartesian_rate, solve_follower, KinematicsMatrices, VelocityCommand};
use crate::oracles::{
    enumerate_filter_qp, finite_difference_barrier_rates, finite_difference_relative_rate,
    pose_pair_for, project_halfspace, scalar_relative_rate,
};
use crate::qp::QpStatus;
use crate::safety_filter::{filter, CbfParams};
use crate::sim::{
    run_scenario, CommandSegment, FollowerConfig, LeaderTrajectory, ScenarioConfig,
};
use crate::Error;

/// Suite settings. `tol_scale` multiplies every threshold (for exploring
/// margins without editing code); sample counts trade thoroughness for time.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub tol_scale: f64,
    pub seed: u64,
    /// Samples for the algebraic and finite-difference checks.
    pub state_samples: usize,
    /// Samples for the filter-versus-enumeration check (each one costs an
    /// exhaustive enumeration).
    pub qp_samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { tol_scale: 1.0, seed: 7, state_samples: 10_000, qp_samples: 1_000 }
    }
}

/// Outcome of one check.
#[derive(Debug, Clone)]
pub struct CheckReport {
    pub name: &'static str,
    pub samples: usize,
    /// Worst residual observed (0 for exact-equality checks that held).
    pub worst: f64,
    /// Threshold after scaling; `passed` means `worst <= tolerance`.
    pub tolerance: f64,
    pub passed: bool,
}

impl CheckReport {
    fn new(name: &'static str, samples: usize, worst: f64, tolerance: f64) -> Self {
        CheckReport { name, samples, worst, tolerance, passed: worst <= tolerance }
    }
}

/// All check outcomes, in a fixed order.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub checks: Vec<CheckReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&CheckReport> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Source of the kinematics matrices under test. The default is the
/// production implementation; tests inject mutated versions to confirm the
/// suite notices.
pub type MatrixProvider<'a> =
    &'a dyn Fn(&RelativeState, f64) -> Result<KinematicsMatrices, Error>;

/// Runs the full suite with the production kinematics.
pub fn run(config: &VerifyConfig) -> VerifyReport {
    run_with(config, &KinematicsMatrices::evaluate)
}

/// Runs the full suite with an injected kinematics-matrix source. Only the
/// checks that exercise the matrices route through the provider; the rest
/// always use production code, so a mutation fails some checks and leaves
/// the others green.
pub fn run_with(config: &VerifyConfig, matrices: MatrixProvider) -> VerifyReport {
    let checks = vec![
        relative_rate_fd(config, matrices),
        scalar_matrix_agreement(config, matrices),
        determinant_identity(config, matrices),
        barrier_rate_chain(config),
        constraint_row_margin(config),
        filter_enumeration(config),
        closed_loop_residual(config),
        filter_passthrough(config),
        halfspace_projection(config),
        spherical_roundtrip(config),
        follower_solve_residual(config),
        sim_determinism(config),
    ];
    VerifyReport { checks }
}

fn rng_for(config: &VerifyConfig, stream: u64) -> ChaCha8Rng {
    // independent stream per check so sample counts can change per check
    // without reshuffling the others
    ChaCha8Rng::seed_from_u64(config.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ stream)
}

fn sample_state(rng: &mut ChaCha8Rng) -> RelativeState {
    RelativeState::new(
        rng.gen_range(0.4..4.0),
        rng.gen_range(-0.8..0.8),
        rng.gen_range(-0.7..0.7),
        rng.gen_range(-3.0..3.0),
    )
    .expect("sampled ranges stay inside the valid domain")
}

fn sample_command(rng: &mut ChaCha8Rng, mag: f64) -> VelocityCommand {
    VelocityCommand::new(
        rng.gen_range(-mag..mag),
        rng.gen_range(-mag..mag),
        rng.gen_range(-mag..mag),
        rng.gen_range(-mag..mag),
    )
}

fn sample_frustum(rng: &mut ChaCha8Rng) -> FrustumParams {
    FrustumParams::new(
        rng.gen_range(0.6..2.4),
        rng.gen_range(0.6..2.4),
        rng.gen_range(0.2..0.6),
        rng.gen_range(2.0..5.0),
        rng.gen_range(0.0..0.2),
    )
    .expect("sampled ranges satisfy the frustum invariants")
}

/// Analytic relative-state rate versus central finite differences of the
/// exact screw-motion pose flow.
fn relative_rate_fd(config: &VerifyConfig, matrices: MatrixProvider) -> CheckReport {
    let mut rng = rng_for(config, 1);
    let mut worst = 0.0f64;
    for _ in 0..config.state_samples {
        let x = sample_state(&mut rng);
        let cam_offset = rng.gen_range(0.0..0.3);
        let u_follower = sample_command(&mut rng, 1.5);
        let u_leader = sample_command(&mut rng, 1.5);
        let m = matrices(&x, cam_offset).expect("sampled state is regular");
        let analytic = m.leader * u_leader.as_vector() + m.follower * u_follower.as_vector();
        let fd = finite_difference_relative_rate(&x, cam_offset, &u_follower, &u_leader, 1e-6);
        let rel = (analytic - fd).amax() / analytic.amax().max(1.0);
        worst = worst.max(rel);
    }
    CheckReport::new(
        "relative-rate-fd",
        config.state_samples,
        worst,
        1e-6 * config.tol_scale,
    )
}

/// Matrix-product rate versus the independently coded scalar formulas.
fn scalar_matrix_agreement(config: &VerifyConfig, matrices: MatrixProvider) -> CheckReport {
    let mut rng = rng_for(config, 2);
    let mut worst = 0.0f64;
    for _ in 0..config.state_samples {
        let x = sample_state(&mut rng);
        let cam_offset = rng.gen_range(0.0..0.3);
        let u_follower = sample_command(&mut rng, 1.5);
        let u_leader = sample_command(&mut rng, 1.5);
        let m = matrices(&x, cam_offset).expect("sampled state is regular");
        let via_matrix = m.leader * u_leader.as_vector() + m.follower * u_follower.as_vector();
        let via_scalar = scalar_relative_rate(&x, cam_offset, &u_follower, &u_leader);
        let rel = (via_matrix - via_scalar).amax() / via_matrix.amax().max(1.0);
        worst = worst.max(rel);
    }
    CheckReport::new(
        "scalar-matrix-agreement",
        config.state_samples,
        worst,
        1e-12 * config.tol_scale,
    )
}

/// det(G) * range^2 * cos(elevation) must equal one everywhere.
fn determinant_identity(config: &VerifyConfig, matrices: MatrixProvider) -> CheckReport {
    let mut rng = rng_for(config, 3);
    let mut worst = 0.0f64;
    for _ in 0..config.state_samples {
        let x = sample_state(&mut rng);
        let cam_offset = rng.gen_range(0.0..0.3);
        let m = matrices(&x, cam_offset).expect("sampled state is regular");
        let det = m.follower.determinant();
        let product = det * x.range * x.range * x.elevation.cos();
        worst = worst.max((product - 1.0).abs());
    }
    CheckReport::new(
        "determinant-identity",
        config.state_samples,
        worst,
        1e-10 * config.tol_scale,
    )
}

/// Barrier rates through the chain rule (constant gradients times the
/// Cartesian rate) versus finite differences of the barrier values along
/// exact pose flows.
fn barrier_rate_chain(config: &VerifyConfig) -> CheckReport {
    let samples = config.state_samples / 2;
    let mut rng = rng_for(config, 4);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_state(&mut rng);
        let frustum = sample_frustum(&mut rng);
        let u_follower = sample_command(&mut rng, 1.5);
        let u_leader = sample_command(&mut rng, 1.5);
        let qdot = cartesian_rate(&x, frustum.cam_offset, &u_follower, &u_leader);
        let grads = gradients(&frustum);
        let fd = finite_difference_barrier_rates(&x, &frustum, &u_follower, &u_leader, 1e-6);
        for l in 0..6 {
            worst = worst.max((grads[l].dot(&qdot) - fd[l]).abs());
        }
    }
    // the FD oracle's own rounding noise is about eps * |h| / step = 1e-9,
    // so the threshold sits one decade above it
    CheckReport::new("barrier-rate-chain", samples, worst, 1e-8 * config.tol_scale)
}

/// The safety constraint rows encode hdot + kappa h - delta; recovering hdot
/// from a row must agree with the finite-difference barrier rate.
fn constraint_row_margin(config: &VerifyConfig) -> CheckReport {
    let samples = config.state_samples / 2;
    let mut rng = rng_for(config, 5);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_state(&mut rng);
        let frustum = sample_frustum(&mut rng);
        let u_follower = sample_command(&mut rng, 1.5);
        let u_leader = sample_command(&mut rng, 1.5);
        let kappa = rng.gen_range(0.5..5.0);
        let delta = std::array::from_fn(|_| rng.gen_range(0.0..0.2));
        let rows = constraint_rows(&x, &frustum, &u_leader, kappa, &delta)
            .expect("sampled state is regular");
        let h = values(&cartesian_from_spherical(&x), &frustum);
        let fd = finite_difference_barrier_rates(&x, &frustum, &u_follower, &u_leader, 1e-6);
        for l in 0..6 {
            let hdot = rows[l].margin(&u_follower) - kappa * h.h[l] + delta[l];
            worst = worst.max((hdot - fd[l]).abs());
        }
    }
    CheckReport::new("constraint-row-margin", samples, worst, 1e-6 * config.tol_scale)
}

/// Full filter against the exhaustive active-set enumeration oracle, plus
/// the solver's own optimality certificate.
fn filter_enumeration(config: &VerifyConfig) -> CheckReport {
    let mut rng = rng_for(config, 6);
    let mut worst = 0.0f64;
    for _ in 0..config.qp_samples {
        let x = sample_state(&mut rng);
        let frustum = sample_frustum(&mut rng);
        let u_nom = sample_command(&mut rng, 1.5);
        let u_leader = sample_command(&mut rng, 1.5);
        let kappa = rng.gen_range(0.5..5.0);
        let delta = std::array::from_fn(|_| rng.gen_range(0.0..0.2));
        let rho = if rng.gen_bool(0.5) { 1e3 } else { 1e4 };
        let lo = VelocityCommand::new(
            rng.gen_range(-2.0..-0.5),
            rng.gen_range(-2.0..-0.5),
            rng.gen_range(-2.0..-0.5),
            rng.gen_range(-2.0..-0.5),
        );
        let hi = VelocityCommand::new(
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(0.5..2.0),
        );
        let params = CbfParams::new(kappa, delta, rho, lo, hi, true)
            .expect("sampled parameters are valid");

        let result = filter(&x, &frustum, &u_nom, &u_leader, &params)
            .expect("sampled state is regular");
        let qp = result.qp.as_ref().expect("filter enabled");
        if qp.status != QpStatus::Optimal {
            worst = f64::INFINITY;
            continue;
        }

        let rows = constraint_rows(&x, &frustum, &u_leader, kappa, &delta)
            .expect("sampled state is regular");
        let a_rows = std::array::from_fn(|l| rows[l].coeffs);
        let bounds = std::array::from_fn(|l| rows[l].bound);
        let (u_ref, slack_ref) = enumerate_filter_qp(
            &a_rows,
            &bounds,
            &u_nom.as_vector(),
            rho,
            &lo.as_vector(),
            &hi.as_vector(),
        )
        .expect("slack rows keep the program feasible");

        worst = worst.max((result.u_safe.as_vector() - u_ref).amax());
        for l in 0..6 {
            worst = worst.max((result.slacks[l] - slack_ref[l]).abs());
        }
        // the certificate threshold is tighter than the match threshold;
        // normalize so one worst-number covers both
        worst = worst.max(qp.kkt_residual * 10.0);
    }
    CheckReport::new("filter-enumeration", config.qp_samples, worst, 1e-7 * config.tol_scale)
}

/// The tracking command must reproduce the commanded closed-loop error
/// dynamics exactly: xdot = xdot_d - K e.
fn closed_loop_residual(config: &VerifyConfig) -> CheckReport {
    let samples = config.state_samples / 2;
    let mut rng = rng_for(config, 7);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let x = sample_state(&mut rng);
        let x_d = sample_state(&mut rng);
        let cam_offset = rng.gen_range(0.0..0.3);
        let xdot_d = Vector4::from_fn(|_, _| rng.gen_range(-0.5..0.5));
        let gains = Gains::new(
            rng.gen_range(0.5..4.0),
            rng.gen_range(0.5..4.0),
            rng.gen_range(0.5..4.0),
            rng.gen_range(0.5..4.0),
        )
        .expect("sampled gains are positive");
        let u_leader = sample_command(&mut rng, 1.5);
        let u = nominal_command(&x, cam_offset, &x_d, &xdot_d, &gains, &u_leader)
            .expect("sampled state is regular");
        let rate = crate::kinematics::relative_rate(&x, cam_offset, &u, &u_leader)
            .expect("sampled state is regular");
        let e = tracking_error(&x, &x_d);
        let target = xdot_d - gains.as_vector().component_mul(&e.as_vector());
        worst = worst.max((rate - target).amax());
    }
    CheckReport::new("closed-loop-residual", samples, worst, 1e-9 * config.tol_scale)
}

/// Feasible nominal commands must pass through the filter bit for bit.
fn filter_passthrough(config: &VerifyConfig) -> CheckReport {
    let mut rng = rng_for(config, 8);
    let mut worst = 0.0f64;
    let mut accepted = 0usize;
    let target = 200usize.min(config.qp_samples);
    let mut attempts = 0usize;
    while accepted < target && attempts < 50 * target {
        attempts += 1;
        let x = sample_state(&mut rng);
        let frustum = sample_frustum(&mut rng);
        let u_nom = sample_command(&mut rng, 1.0);
        let u_leader = sample_command(&mut rng, 0.5);
        let kappa = rng.gen_range(0.5..5.0);
        let delta = std::array::from_fn(|_| rng.gen_range(0.0..0.1));
        let lo = VelocityCommand::new(-2.0, -2.0, -2.0, -2.0);
        let hi = VelocityCommand::new(2.0, 2.0, 2.0, 2.0);
        let rows = match constraint_rows(&x, &frustum, &u_leader, kappa, &delta) {
            Ok(rows) => rows,
            Err(_) => continue,
        };
        // keep only instances where the nominal command is strictly inside
        // every constraint, so the unconstrained minimizer is the answer
        if rows.iter().any(|row| row.margin(&u_nom) < 1e-3) {
            continue;
        }
        let params = CbfParams::new(kappa, delta, 1e4, lo, hi, true)
            .expect("sampled parameters are valid");
        let result = filter(&x, &frustum, &u_nom, &u_leader, &params)
            .expect("sampled state is regular");
        accepted += 1;
        let diff = (result.u_safe.as_vector() - u_nom.as_vector()).amax();
        worst = worst.max(diff);
        if result.intervention {
            worst = f64::INFINITY;
        }
    }
    CheckReport::new("filter-passthrough", accepted, worst, 0.0)
}

/// With one violated constraint, a huge slack penalty, and no box, the
/// filter must reproduce the analytic halfspace projection.
fn halfspace_projection(config: &VerifyConfig) -> CheckReport {
    let mut rng = rng_for(config, 9);
    let mut worst = 0.0f64;
    let mut accepted = 0usize;
    let target = 200usize.min(config.qp_samples);
    let mut attempts = 0usize;
    let lo = VelocityCommand::new(
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
        f64::NEG_INFINITY,
    );
    let hi = VelocityCommand::new(f64::INFINITY, f64::INFINITY, f64::INFINITY, f64::INFINITY);
    while accepted < target && attempts < 100 * target {
        attempts += 1;
        let x = sample_state(&mut rng);
        let frustum = sample_frustum(&mut rng);
        let u_nom = sample_command(&mut rng, 1.5);
        let u_leader = sample_command(&mut rng, 0.5);
        let kappa = rng.gen_range(0.5..5.0);
        let delta = std::array::from_fn(|_| rng.gen_range(0.0..0.1));
        let rows = match constraint_rows(&x, &frustum, &u_leader, kappa, &delta) {
            Ok(rows) => rows,
            Err(_) => continue,
        };
        let violated: Vec<usize> =
            (0..6).filter(|&l| rows[l].margin(&u_nom) < -1e-3).collect();
        if violated.len() != 1 {
            continue;
        }
        let l = violated[0];
        let projected =
            project_halfspace(&u_nom.as_vector(), &rows[l].coeffs, rows[l].bound);
        // the projection must land strictly inside every other row, or the
        // single-constraint model does not apply
        let proj_cmd = VelocityCommand::from_vector(&projected);
        if (0..6).any(|m| m != l && rows[m].margin(&proj_cmd) < 1e-6) {
            continue;
        }
        let params = CbfParams::new(kappa, delta, 1e12, lo, hi, true)
            .expect("sampled parameters are valid");
        let result = filter(&x, &frustum, &u_nom, &u_leader, &params)
            .expect("sampled state is regular");
        accepted += 1;
        worst = worst.max((result.u_safe.as_vector() - projected).amax());
    }
    CheckReport::new("halfspace-projection", accepted, worst, 1e-9 * config.tol_scale)
}

/// Spherical state to poses to Cartesian offset and back.
fn spherical_roundtrip(config: &VerifyConfig) -> CheckReport {
    let mut rng = rng_for(config, 10);
    let mut worst = 0.0f64;
    for _ in 0..config.state_samples {
        let x = sample_state(&mut rng);
        let cam_offset = rng.gen_range(0.0..0.3);
        let (follower, leader) = pose_pair_for(&x, cam_offset);
        let q = relative_cartesian(&follower, &leader, cam_offset);
        let back = spherical_from_cartesian(&q, follower.yaw, leader.yaw)
            .expect("roundtrip of a valid state stays valid");
        worst = worst.max((back.range - x.range).abs());
        worst = worst.max(wrap_finite(back.azimuth - x.azimuth).abs());
        worst = worst.max((back.elevation - x.elevation).abs());
        worst = worst.max(wrap_finite(back.heading - x.heading).abs());
    }
    CheckReport::new("spherical-roundtrip", config.state_samples, worst, 1e-12 * config.tol_scale)
}

/// Solving G u = rhs must return a command whose image is rhs.
fn follower_solve_residual(config: &VerifyConfig) -> CheckReport {
    let mut rng = rng_for(config, 11);
    let mut worst = 0.0f64;
    for _ in 0..config.state_samples {
        let x = sample_state(&mut rng);
        let cam_offset = rng.gen_range(0.0..0.3);
        let rhs = Vector4::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let u = solve_follower(&x, cam_offset, &rhs).expect("sampled state is regular");
        let m = KinematicsMatrices::evaluate(&x, cam_offset).expect("sampled state is regular");
        worst = worst.max((m.follower * u - rhs).amax());
    }
    CheckReport::new(
        "follower-solve-residual",
        config.state_samples,
        worst,
        1e-10 * config.tol_scale,
    )
}

/// Two runs of the same scenario must produce identical logs.
fn sim_determinism(_config: &VerifyConfig) -> CheckReport {
    let scenario = determinism_scenario();
    let a = run_scenario(&scenario).expect("scenario is valid");
    let b = run_scenario(&scenario).expect("scenario is valid");
    let worst = if a == b { 0.0 } else { 1.0 };
    CheckReport::new("sim-determinism", 2, worst, 0.0)
}

fn determinism_scenario() -> ScenarioConfig {
    let reference = FormationReference::constant(
        RelativeState::new(1.2, 0.1, -0.1, 0.2).expect("constant reference is valid"),
    );
    ScenarioConfig {
        dt: 0.01,
        duration: 1.0,
        message_delay_ticks: 2,
        velocity_lag: 0.05,
        frustum: FrustumParams::new(1.8, 1.5, 0.3, 5.0, 0.1).expect("frustum is valid"),
        gains: Gains::uniform(2.0).expect("gains are valid"),
        cbf: CbfParams::new(
            2.0,
            [0.01; 6],
            1e4,
            VelocityCommand::new(-2.0, -2.0, -2.0, -2.0),
            VelocityCommand::new(2.0, 2.0, 2.0, 2.0),
            true,
        )
        .expect("filter parameters are valid"),
        leader_initial: Pose::new(nalgebra::Vector3::new(0.0, 0.0, 1.0), 0.3)
            .expect("pose is valid"),
        leader_trajectory: LeaderTrajectory::Piecewise {
            segments: vec![CommandSegment {
                duration: 5.0,
                ramp: 0.4,
                command: VelocityCommand::new(0.4, -0.1, 0.05, 0.15),
            }],
        },
        followers: vec![FollowerConfig { initial: None, reference, cbf_enabled: true }],
    }
}
