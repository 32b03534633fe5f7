//! Visibility-preserving command filter.
//!
//! Each control tick the follower's nominal command is passed through a
//! small quadratic program that enforces one constraint per frustum face,
//! `Gamma_l(x, u) >= delta_l - zeta_l`, plus box bounds on the command. The
//! slack variables `zeta` carry a heavy penalty `rho` so they engage only
//! when the faces cannot all be respected within the box; otherwise the
//! filter returns the closest admissible command to the nominal one, and the
//! barrier dynamics keep the leader inside the camera frustum.

use nalgebra::DVector;

use crate::barriers::{constraint_rows, values, BarrierValues};
use crate::geometry::{cartesian_from_spherical, FrustumParams, RelativeState};
use crate::kinematics::VelocityCommand;
use crate::qp::{self, QpProblem, QpRow, QpSolution, QpStatus};
use crate::Error;

/// Command deviations larger than this mark the filter as intervening.
pub const INTERVENTION_TOL: f64 = 1e-6;

/// Filter configuration: barrier decay rate, per-face robustness margins,
/// slack penalty, command box, and the on/off switch for baseline runs.
#[derive(Debug, Clone)]
pub struct CbfParams {
    pub kappa: f64,
    pub delta: [f64; 6],
    pub rho: f64,
    pub u_min: VelocityCommand,
    pub u_max: VelocityCommand,
    pub enabled: bool,
}

impl CbfParams {
    pub fn new(
        kappa: f64,
        delta: [f64; 6],
        rho: f64,
        u_min: VelocityCommand,
        u_max: VelocityCommand,
        enabled: bool,
    ) -> Result<Self, Error> {
        if !kappa.is_finite() || kappa <= 0.0 {
            return Err(Error::invalid("kappa", "must be positive and finite"));
        }
        if delta.iter().any(|d| !d.is_finite() || *d < 0.0) {
            return Err(Error::invalid("delta", "must be nonnegative and finite"));
        }
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::invalid("rho", "must be positive and finite"));
        }
        let lo = u_min.as_vector();
        let hi = u_max.as_vector();
        for i in 0..4 {
            // infinite bounds are allowed and mean "unbounded on that side"
            if lo[i].is_nan() || hi[i].is_nan() {
                return Err(Error::NonFinite("command box bound"));
            }
            if lo[i] > hi[i] {
                return Err(Error::invalid("command box", "u_min must not exceed u_max"));
            }
        }
        Ok(CbfParams { kappa, delta, rho, u_min, u_max, enabled })
    }
}

/// Outcome of one filter evaluation.
#[derive(Debug, Clone)]
pub struct SafetyFilterResult {
    pub u_safe: VelocityCommand,
    pub slacks: [f64; 6],
    pub barriers: BarrierValues,
    pub intervention: bool,
    /// Solver diagnostics; `None` when the filter is disabled.
    pub qp: Option<QpSolution>,
}

/// Minimally modifies `u_nom` so every frustum-face constraint holds with
/// its slack and the command stays inside the box. With the filter disabled
/// the nominal command is only clamped to the box (baseline behavior) while
/// barrier diagnostics are still reported.
pub fn filter(
    x: &RelativeState,
    frustum: &FrustumParams,
    u_nom: &VelocityCommand,
    u_leader: &VelocityCommand,
    params: &CbfParams,
) -> Result<SafetyFilterResult, Error> {
    if !u_nom.is_finite() {
        return Err(Error::NonFinite("nominal command"));
    }
    let q = cartesian_from_spherical(x);
    let barriers = values(&q, frustum);

    if !params.enabled {
        let u_safe = u_nom.clamp(&params.u_min, &params.u_max);
        let intervention = deviation(&u_safe, u_nom) > INTERVENTION_TOL;
        return Ok(SafetyFilterResult {
            u_safe,
            slacks: [0.0; 6],
            barriers,
            intervention,
            qp: None,
        });
    }

    let rows = constraint_rows(x, frustum, u_leader, params.kappa, &params.delta)?;

    // variables z = (vx, vy, vz, yaw_rate, zeta_1..zeta_6)
    let mut qp_rows: Vec<QpRow> = Vec::with_capacity(20);
    for (l, row) in rows.iter().enumerate() {
        let mut coeffs = DVector::zeros(10);
        for i in 0..4 {
            coeffs[i] = row.coeffs[i];
        }
        coeffs[4 + l] = 1.0;
        qp_rows.push(QpRow { coeffs, bound: row.bound });
    }
    for l in 0..6 {
        let mut coeffs = DVector::zeros(10);
        coeffs[4 + l] = 1.0;
        qp_rows.push(QpRow { coeffs, bound: 0.0 });
    }
    let lo = params.u_min.as_vector();
    let hi = params.u_max.as_vector();
    for i in 0..4 {
        if lo[i].is_finite() {
            let mut coeffs = DVector::zeros(10);
            coeffs[i] = 1.0;
            qp_rows.push(QpRow { coeffs, bound: lo[i] });
        }
        if hi[i].is_finite() {
            let mut coeffs = DVector::zeros(10);
            coeffs[i] = -1.0;
            qp_rows.push(QpRow { coeffs, bound: -hi[i] });
        }
    }

    let mut quadratic = DVector::from_element(10, params.rho);
    let mut linear = DVector::zeros(10);
    for i in 0..4 {
        quadratic[i] = 1.0;
        linear[i] = -2.0 * u_nom.as_vector()[i];
    }
    let problem = QpProblem { quadratic, linear, rows: qp_rows };
    let solution = qp::solve(&problem);

    let (u_safe, slacks) = match solution.status {
        QpStatus::Optimal | QpStatus::MaxIterations => {
            let u = VelocityCommand::new(
                solution.z[0],
                solution.z[1],
                solution.z[2],
                solution.z[3],
            );
            (u, std::array::from_fn(|l| solution.z[4 + l]))
        }
        QpStatus::Infeasible => {
            // The slack columns make the program feasible whenever the box
            // is nonempty, so this branch is numerical breakdown. Fall back
            // to the clamped nominal and report the residual gaps as slacks.
            let u = u_nom.clamp(&params.u_min, &params.u_max);
            let slacks = std::array::from_fn(|l| (-rows[l].margin(&u)).max(0.0));
            (u, slacks)
        }
    };
    let intervention = deviation(&u_safe, u_nom) > INTERVENTION_TOL;
    Ok(SafetyFilterResult { u_safe, slacks, barriers, intervention, qp: Some(solution) })
}

fn deviation(a: &VelocityCommand, b: &VelocityCommand) -> f64 {
    (a.as_vector() - b.as_vector()).norm()
}
