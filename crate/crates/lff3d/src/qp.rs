//! Dense strictly convex quadratic programming with inequality rows.
//!
//! Problems have the form
//!
//! ```text
//! min  z^T diag(q) z + c^T z      (all q_i > 0)
//! s.t. a_i^T z >= b_i             (i = 0..m)
//! ```
//!
//! which covers the safety filter's command-plus-slack program (identity
//! weights on the command deviation, a large weight on slacks) as well as
//! generic small test instances.
//!
//! The solver is a dual active-set method: it starts at the unconstrained
//! minimizer, repeatedly picks the most violated row, and takes the exact
//! step that either activates it or drops a blocking active row. For a
//! strictly convex problem this terminates in finitely many steps with the
//! exact minimizer, needs no feasible starting point and no step-size
//! tuning, and every intermediate quantity is a deterministic function of
//! the input: identical inputs give bit-identical outputs.
//!
//! Tie-breaking is fixed: among equally violated rows the lowest index
//! enters first, and among equally blocking active rows the lowest index
//! leaves first.

use nalgebra::{DMatrix, DVector};

/// One inequality row `coeffs^T z >= bound`.
#[derive(Debug, Clone, PartialEq)]
pub struct QpRow {
    pub coeffs: DVector<f64>,
    pub bound: f64,
}

/// A strictly convex inequality-constrained QP; see the module docs for the
/// sign conventions.
#[derive(Debug, Clone, PartialEq)]
pub struct QpProblem {
    /// Diagonal of the quadratic cost, all entries strictly positive.
    pub quadratic: DVector<f64>,
    pub linear: DVector<f64>,
    pub rows: Vec<QpRow>,
}

impl QpProblem {
    pub fn dimension(&self) -> usize {
        self.quadratic.len()
    }

    pub fn objective(&self, z: &DVector<f64>) -> f64 {
        let mut obj = 0.0;
        for i in 0..self.dimension() {
            obj += self.quadratic[i] * z[i] * z[i] + self.linear[i] * z[i];
        }
        obj
    }

    /// True when every row holds up to `tol`.
    pub fn is_feasible(&self, z: &DVector<f64>, tol: f64) -> bool {
        self.rows.iter().all(|r| r.coeffs.dot(z) >= r.bound - tol)
    }

    fn assert_well_formed(&self) {
        let n = self.dimension();
        assert!(n > 0, "empty QP");
        assert_eq!(self.linear.len(), n, "linear cost dimension mismatch");
        assert!(
            self.quadratic.iter().all(|&q| q.is_finite() && q > 0.0),
            "quadratic cost must be strictly positive"
        );
        assert!(self.linear.iter().all(|v| v.is_finite()), "linear cost must be finite");
        for (i, row) in self.rows.iter().enumerate() {
            assert_eq!(row.coeffs.len(), n, "row {i} dimension mismatch");
            assert!(
                row.coeffs.iter().all(|v| v.is_finite()) && row.bound.is_finite(),
                "row {i} must be finite"
            );
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QpStatus {
    Optimal,
    /// Iteration cap hit; the returned point is the last iterate.
    MaxIterations,
    /// No point satisfies all rows; the returned point is the last iterate.
    Infeasible,
}

/// Solver output. `active_set` is sorted ascending; `duals` has one entry
/// per row (zero on inactive rows).
///
/// When `status` is [`QpStatus::Optimal`], `kkt_residual` is the largest of
/// the four KKT violations (stationarity, primal feasibility, dual sign,
/// complementary slackness) and certifies the solution.
#[derive(Debug, Clone, PartialEq)]
pub struct QpSolution {
    pub z: DVector<f64>,
    pub status: QpStatus,
    pub active_set: Vec<usize>,
    pub duals: DVector<f64>,
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct QpOptions {
    /// Cap on active-set changes before giving up; default 200.
    pub max_iterations: usize,
    /// Optional guess of the optimal active set. A correct guess returns in
    /// zero iterations; a wrong one falls back to the cold solve. The
    /// minimizer never depends on the guess.
    pub warm_start_active: Option<Vec<usize>>,
}

impl Default for QpOptions {
    fn default() -> Self {
        QpOptions { max_iterations: 200, warm_start_active: None }
    }
}

pub fn solve(problem: &QpProblem) -> QpSolution {
    solve_with(problem, &QpOptions::default())
}

pub fn solve_with(problem: &QpProblem, options: &QpOptions) -> QpSolution {
    problem.assert_well_formed();
    let n = problem.dimension();

    // inverse Hessian of the 1/2-free form: H = diag(2 q)^-1
    let w: DVector<f64> = problem.quadratic.map(|q| 0.5 / q);
    let z0: DVector<f64> =
        DVector::from_fn(n, |i, _| -0.5 * problem.linear[i] / problem.quadratic[i]);

    let bound_scale = 1.0
        + problem.rows.iter().map(|r| r.bound.abs()).fold(0.0, f64::max);
    let violation_tol = 1e-11 * bound_scale;

    if let Some(guess) = &options.warm_start_active {
        if let Some(solution) = try_active_set(problem, &z0, guess, violation_tol) {
            return solution;
        }
    }

    let mut z = z0.clone();
    let mut active: Vec<usize> = Vec::new();
    let mut duals_active: Vec<f64> = Vec::new();
    let mut iterations = 0usize;

    loop {
        // most violated row, lowest index on ties
        let mut worst = -violation_tol;
        let mut entering: Option<usize> = None;
        for (i, row) in problem.rows.iter().enumerate() {
            if active.contains(&i) {
                continue;
            }
            let s = row.coeffs.dot(&z) - row.bound;
            if s < worst {
                worst = s;
                entering = Some(i);
            }
        }
        let Some(p) = entering else {
            return finish(problem, z, active, duals_active, QpStatus::Optimal, iterations);
        };

        let a_p = problem.rows[p].coeffs.clone();
        let mut dual_p = 0.0;
        loop {
            if iterations >= options.max_iterations {
                active.push(p);
                duals_active.push(dual_p);
                return finish(
                    problem,
                    z,
                    active,
                    duals_active,
                    QpStatus::MaxIterations,
                    iterations,
                );
            }

            // Decompose a_p over the active normals by W-weighted least
            // squares: r minimizes ||sqrt(W)(a_p - N r)||. The residual gives
            // the primal direction z_dir = W (a_p - N r).
            let k = active.len();
            let (r, z_dir) = if k == 0 {
                (DVector::zeros(0), a_p.component_mul(&w))
            } else {
                let sw = w.map(f64::sqrt);
                let m = DMatrix::from_fn(n, k, |i, j| {
                    sw[i] * problem.rows[active[j]].coeffs[i]
                });
                let rhs = DVector::from_fn(n, |i, _| sw[i] * a_p[i]);
                let svd = m.svd(true, true);
                let cutoff = 1e-13 * svd.singular_values.amax();
                let r = svd
                    .solve(&rhs, cutoff)
                    .expect("svd solve with nonnegative cutoff");
                let mut combined = a_p.clone();
                for (ai, &ri) in active.iter().enumerate() {
                    combined.axpy(-r[ai], &problem.rows[ri].coeffs, 1.0);
                }
                (r, combined.component_mul(&w))
            };

            // a_p counts as dependent on the active normals when the residual
            // energy is below the cancellation noise of forming it, which
            // grows with ||r||^2. A full active set spans the space, so a_p
            // is dependent outright; this keeps the active set at <= n rows.
            let denom = a_p.dot(&z_dir);
            let denom_scale = weighted_dot(&a_p, &a_p, &w).max(f64::MIN_POSITIVE);
            let dependent =
                k == n || denom <= 1e-12 * denom_scale * (1.0 + r.norm_squared());
            let s_p = a_p.dot(&z) - problem.rows[p].bound;
            let step_full = if dependent { f64::INFINITY } else { -s_p / denom };

            // blocking active row, lowest index on ties
            let mut step_dual = f64::INFINITY;
            let mut leaving: Option<usize> = None;
            for (ai, &dual) in duals_active.iter().enumerate() {
                if r[ai] > 1e-12 {
                    let t = dual / r[ai];
                    if t < step_dual {
                        step_dual = t;
                        leaving = Some(ai);
                    }
                }
            }

            let step = step_full.min(step_dual);
            if !step.is_finite() {
                active.push(p);
                duals_active.push(dual_p);
                return finish(
                    problem,
                    z,
                    active,
                    duals_active,
                    QpStatus::Infeasible,
                    iterations,
                );
            }

            z.axpy(step, &z_dir, 1.0);
            for (ai, dual) in duals_active.iter_mut().enumerate() {
                *dual -= step * r[ai];
            }
            dual_p += step;
            iterations += 1;

            if step_full <= step_dual {
                active.push(p);
                duals_active.push(dual_p);
                break;
            }
            let out = leaving.expect("dual step without a blocking row");
            active.remove(out);
            duals_active.remove(out);
        }
    }
}

fn weighted_dot(a: &DVector<f64>, b: &DVector<f64>, w: &DVector<f64>) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        acc += a[i] * w[i] * b[i];
    }
    acc
}

/// Equality-solve on a guessed active set; returns a finished solution only
/// when the full KKT certificate passes.
fn try_active_set(
    problem: &QpProblem,
    z0: &DVector<f64>,
    guess: &[usize],
    violation_tol: f64,
) -> Option<QpSolution> {
    let k = guess.len();
    if k > problem.dimension() || guess.iter().any(|&i| i >= problem.rows.len()) {
        return None;
    }
    let mut deduped = guess.to_vec();
    deduped.sort_unstable();
    deduped.dedup();
    if deduped.len() != k {
        return None;
    }

    let (z, lambda) = if k > 0 {
        equality_solve(problem, &deduped)?
    } else {
        (z0.clone(), DVector::zeros(0))
    };
    let duals_active: Vec<f64> = lambda.iter().copied().collect();
    if duals_active.iter().any(|&d| d < -1e-10) {
        return None;
    }
    if !problem.is_feasible(&z, violation_tol.max(1e-9)) {
        return None;
    }
    Some(finish(problem, z, deduped, duals_active, QpStatus::Optimal, 0))
}

fn finish(
    problem: &QpProblem,
    z: DVector<f64>,
    active: Vec<usize>,
    duals_active: Vec<f64>,
    status: QpStatus,
    iterations: usize,
) -> QpSolution {
    let m = problem.rows.len();
    let mut duals = DVector::zeros(m);
    for (ai, &ri) in active.iter().enumerate() {
        duals[ri] = duals_active[ai];
    }
    let mut order: Vec<usize> = active.clone();
    order.sort_unstable();

    let mut residual = kkt_residual(problem, &z, &duals);
    let mut z = z;

    // One-shot equality re-solve on the final active set trims the rounding
    // accumulated over the steps; adopt it only when it tightens the
    // certificate.
    if status == QpStatus::Optimal && !active.is_empty() {
        if let Some((z2, lambda)) = equality_solve(problem, &active) {
            let mut duals2 = DVector::zeros(m);
            for (ai, &ri) in active.iter().enumerate() {
                duals2[ri] = lambda[ai];
            }
            let residual2 = kkt_residual(problem, &z2, &duals2);
            if residual2 < residual {
                z = z2;
                duals = duals2;
                residual = residual2;
            }
        }
    }

    QpSolution { z, status, active_set: order, duals, kkt_residual: residual, iterations }
}

/// Worst violation across stationarity, primal feasibility, dual sign, and
/// complementary slackness.
fn kkt_residual(problem: &QpProblem, z: &DVector<f64>, duals: &DVector<f64>) -> f64 {
    let n = problem.dimension();
    let mut stationarity: DVector<f64> =
        DVector::from_fn(n, |i, _| 2.0 * problem.quadratic[i] * z[i] + problem.linear[i]);
    for (ri, row) in problem.rows.iter().enumerate() {
        stationarity.axpy(-duals[ri], &row.coeffs, 1.0);
    }
    let mut residual = stationarity.amax();
    for (ri, row) in problem.rows.iter().enumerate() {
        let s = row.coeffs.dot(z) - row.bound;
        residual = residual.max(-s).max(-duals[ri]).max((duals[ri] * s).abs());
    }
    residual
}

/// Minimizer of the objective with the given rows forced to equality,
/// together with the row multipliers. `None` when the reduced system is not
/// positive definite.
fn equality_solve(
    problem: &QpProblem,
    active: &[usize],
) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = problem.dimension();
    let k = active.len();
    let w: DVector<f64> = problem.quadratic.map(|q| 0.5 / q);
    let z0: DVector<f64> =
        DVector::from_fn(n, |i, _| -0.5 * problem.linear[i] / problem.quadratic[i]);
    let mut nw = DMatrix::zeros(k, k);
    let mut rhs = DVector::zeros(k);
    for (ai, &ri) in active.iter().enumerate() {
        let arow = &problem.rows[ri].coeffs;
        rhs[ai] = problem.rows[ri].bound - arow.dot(&z0);
        for (aj, &rj) in active.iter().enumerate().take(ai + 1) {
            let v = weighted_dot(arow, &problem.rows[rj].coeffs, &w);
            nw[(ai, aj)] = v;
            nw[(aj, ai)] = v;
        }
    }
    let chol = nw.cholesky()?;
    let mut lambda = chol.solve(&rhs);
    let assemble = |lambda: &DVector<f64>| {
        let mut z = z0.clone();
        for (ai, &ri) in active.iter().enumerate() {
            z.axpy(lambda[ai], &problem.rows[ri].coeffs.component_mul(&w), 1.0);
        }
        z
    };
    let mut z = assemble(&lambda);

    // Iterative refinement against the full KKT equalities. Nearly parallel
    // rows put the intersection far out with large multipliers, and the
    // complementary-slackness product lambda * s only meets its certificate
    // once s is refined down to rounding level.
    for _ in 0..2 {
        // r1 = -c - 2 Q z + A^T lambda, r2 = b - A z
        let mut r1 =
            DVector::from_fn(n, |i, _| -problem.linear[i] - 2.0 * problem.quadratic[i] * z[i]);
        for (ai, &ri) in active.iter().enumerate() {
            r1.axpy(lambda[ai], &problem.rows[ri].coeffs, 1.0);
        }
        let mut r2 = DVector::zeros(k);
        for (ai, &ri) in active.iter().enumerate() {
            r2[ai] = problem.rows[ri].bound - problem.rows[ri].coeffs.dot(&z);
        }
        // reduce: (A W A^T) dl = r2 - A W r1, dz = W (r1 + A^T dl)
        let wr1 = r1.component_mul(&w);
        let mut reduced = r2;
        for (ai, &ri) in active.iter().enumerate() {
            reduced[ai] -= problem.rows[ri].coeffs.dot(&wr1);
        }
        let dl = chol.solve(&reduced);
        lambda += &dl;
        let mut dz = r1;
        for (ai, &ri) in active.iter().enumerate() {
            dz.axpy(dl[ai], &problem.rows[ri].coeffs, 1.0);
        }
        z += dz.component_mul(&w);
    }
    Some((z, lambda))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn problem(
        quadratic: &[f64],
        linear: &[f64],
        rows: &[(&[f64], f64)],
    ) -> QpProblem {
        QpProblem {
            quadratic: DVector::from_row_slice(quadratic),
            linear: DVector::from_row_slice(linear),
            rows: rows
                .iter()
                .map(|(a, b)| QpRow { coeffs: DVector::from_row_slice(a), bound: *b })
                .collect(),
        }
    }

    /// min |u - u0|^2 == quadratic (1,..), linear -2 u0
    fn deviation_problem(u0: &[f64], rows: &[(&[f64], f64)]) -> QpProblem {
        let quadratic: Vec<f64> = u0.iter().map(|_| 1.0).collect();
        let linear: Vec<f64> = u0.iter().map(|v| -2.0 * v).collect();
        problem(&quadratic, &linear, rows)
    }

    #[test]
    fn unconstrained_rows_inactive_passthrough() {
        let p = deviation_problem(&[0.3, -0.7, 1.1, 0.0], &[(&[1.0, 0.0, 0.0, 0.0], -10.0)]);
        let sol = solve(&p);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert!(sol.active_set.is_empty());
        assert_eq!(sol.iterations, 0);
        // unconstrained minimizer is exact, not approximate
        assert_eq!(sol.z.as_slice(), &[0.3, -0.7, 1.1, 0.0]);
    }

    #[test]
    fn single_halfspace_projection() {
        // min |u - u0|^2 s.t. a^T u >= b with u0 infeasible:
        // u = u0 + a (b - a^T u0) / |a|^2
        let u0 = [1.0, -0.5, 0.2, 0.0];
        let a = [0.5, 1.0, -0.25, 2.0];
        let b = 1.5;
        let p = deviation_problem(&u0, &[(&a, b)]);
        let sol = solve(&p);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_eq!(sol.active_set, vec![0]);

        let av = DVector::from_row_slice(&a);
        let u0v = DVector::from_row_slice(&u0);
        let expect = &u0v + &av * ((b - av.dot(&u0v)) / av.norm_squared());
        assert_relative_eq!(sol.z, expect, epsilon = 1e-12);
        assert!(sol.kkt_residual < 1e-10);
    }

    #[test]
    fn two_active_rows_corner() {
        // 2-d: min |u|^2 s.t. u_x >= 1, u_y >= 2 -> corner (1, 2)
        let p = deviation_problem(&[0.0, 0.0], &[(&[1.0, 0.0], 1.0), (&[0.0, 1.0], 2.0)]);
        let sol = solve(&p);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_eq!(sol.active_set, vec![0, 1]);
        assert_relative_eq!(sol.z[0], 1.0, max_relative = 1e-14);
        assert_relative_eq!(sol.z[1], 2.0, max_relative = 1e-14);
    }

    #[test]
    fn drops_a_blocking_row() {
        // the first activated row must leave again: minimizer at the
        // intersection region where only the second binds
        let p = deviation_problem(
            &[0.0, 0.0],
            &[(&[1.0, 0.0], 1.0), (&[1.0, 1.0], 3.0)],
        );
        let sol = solve(&p);
        assert_eq!(sol.status, QpStatus::Optimal);
        assert_relative_eq!(sol.z[0], 1.5, max_relative = 1e-14);
        assert_relative_eq!(sol.z[1], 1.5, max_relative = 1e-14);
        assert_eq!(sol.active_set, vec![1]);
        assert!(sol.kkt_residual < 1e-12);
    }

    #[test]
    fn infeasible_reported() {
        let p = deviation_problem(&[0.0], &[(&[1.0], 1.0), (&[-1.0], 0.0)]);
        let sol = solve(&p);
        assert_eq!(sol.status, QpStatus::Infeasible);
    }

    #[test]
    fn infeasible_with_nearly_dependent_rows() {
        // Regression case: an ill-conditioned full active set leaves a
        // cancellation residue in the dependence test, which once let a
        // fifth row into a four-dimensional active set and produced a bogus
        // Optimal status on an infeasible instance.
        let p = QpProblem {
            quadratic: DVector::from_row_slice(&[
                1.6235800869017516,
                0.4418350475611234,
                2.735957533614145,
                0.8560577479862428,
            ]),
            linear: DVector::from_row_slice(&[
                -1.6730288851814303,
                0.03432505946990938,
                0.8421849814300089,
                -2.3911776019339572,
            ]),
            rows: vec![
                QpRow {
                    coeffs: DVector::from_row_slice(&[
                        0.3706205259430315,
                        0.2844201383969338,
                        0.0019964789423640994,
                        -0.7304369454512463,
                    ]),
                    bound: -0.5192748665478739,
                },
                QpRow {
                    coeffs: DVector::from_row_slice(&[
                        -0.7263870249472055,
                        -0.21797951952392536,
                        0.5979633325399112,
                        -0.05535121422793887,
                    ]),
                    bound: -1.114439350106523,
                },
                QpRow {
                    coeffs: DVector::from_row_slice(&[
                        0.988226806139791,
                        0.30532230394720195,
                        0.44347054340990555,
                        0.8653346297730544,
                    ]),
                    bound: 0.9494366246689419,
                },
                QpRow {
                    coeffs: DVector::from_row_slice(&[
                        -0.43924499841967046,
                        -0.5245214959410363,
                        0.8709478027698943,
                        -0.7880147608578199,
                    ]),
                    bound: -0.6252345904007448,
                },
                QpRow {
                    coeffs: DVector::from_row_slice(&[
                        -0.5813883924164198,
                        -0.7764007925386718,
                        0.10797200232177984,
                        0.46526297071795186,
                    ]),
                    bound: 1.1476485294811298,
                },
                QpRow {
                    coeffs: DVector::from_row_slice(&[
                        0.1782284994431027,
                        0.7389793596085479,
                        -0.6673601354966299,
                        -0.5300513023158122,
                    ]),
                    bound: -0.6554951347757463,
                },
            ],
        };
        let sol = solve(&p);
        assert_eq!(sol.status, QpStatus::Infeasible);
        // the infeasible report lists the mutually contradictory rows, which
        // may be one more than the dimension
        assert!(sol.active_set.len() <= p.dimension() + 1);
    }

    #[test]
    fn iteration_cap_reported() {
        let p = deviation_problem(&[0.0, 0.0], &[(&[1.0, 0.0], 1.0), (&[0.0, 1.0], 2.0)]);
        let sol = solve_with(&p, &QpOptions { max_iterations: 1, ..Default::default() });
        assert_eq!(sol.status, QpStatus::MaxIterations);
    }

    #[test]
    fn warm_start_returns_same_minimizer() {
        let u0 = [1.0, -0.5, 0.2, 0.0];
        let rows: &[(&[f64], f64)] =
            &[(&[0.5, 1.0, -0.25, 2.0], 1.5), (&[1.0, 0.0, 0.0, 0.0], -5.0)];
        let p = deviation_problem(&u0, rows);
        let cold = solve(&p);
        let warm = solve_with(
            &p,
            &QpOptions { warm_start_active: Some(cold.active_set.clone()), ..Default::default() },
        );
        assert_eq!(warm.iterations, 0);
        assert_eq!(warm.status, QpStatus::Optimal);
        assert_relative_eq!(warm.z, cold.z, epsilon = 1e-9);

        // wrong guess: falls back, identical minimizer
        let wrong = solve_with(
            &p,
            &QpOptions { warm_start_active: Some(vec![1]), ..Default::default() },
        );
        assert_relative_eq!(wrong.z, cold.z, epsilon = 1e-12);
    }

    #[test]
    fn deterministic_bitwise() {
        let p = deviation_problem(
            &[0.3, 0.9, -1.4, 0.2],
            &[
                (&[1.0, 0.2, 0.0, -0.4], 1.0),
                (&[-0.3, 1.0, 0.5, 0.0], 0.7),
                (&[0.0, -1.0, 1.0, 1.0], -0.2),
            ],
        );
        let a = solve(&p);
        let b = solve(&p);
        assert_eq!(a.z.as_slice(), b.z.as_slice());
        assert_eq!(a.duals.as_slice(), b.duals.as_slice());
        assert_eq!(a.active_set, b.active_set);
        assert_eq!(a.iterations, b.iterations);
    }

    #[test]
    fn matches_enumeration_oracle_small_random() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for case in 0..200 {
            let n = rng.gen_range(2..=4usize);
            let m = rng.gen_range(1..=8usize);
            let quadratic: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
            let linear: Vec<f64> = (0..n).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let rows: Vec<QpRow> = (0..m)
                .map(|_| QpRow {
                    coeffs: DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
                    bound: rng.gen_range(-1.5..1.5),
                })
                .collect();
            let p = QpProblem {
                quadratic: DVector::from_row_slice(&quadratic),
                linear: DVector::from_row_slice(&linear),
                rows,
            };
            let sol = solve(&p);
            let oracle = crate::oracles::enumerate_qp(&p, 1e-9);
            match (sol.status, oracle) {
                (QpStatus::Optimal, Some(z_ref)) => {
                    let diff = (&sol.z - &z_ref).amax();
                    assert!(
                        diff <= 1e-7,
                        "case {case}: solver/oracle mismatch {diff:.3e}"
                    );
                    assert!(sol.kkt_residual < 1e-8, "case {case}: kkt {:.3e}", sol.kkt_residual);
                }
                (QpStatus::Infeasible, None) => {}
                (status, oracle) => panic!(
                    "case {case}: status {status:?} but oracle feasible = {}",
                    oracle.is_some()
                ),
            }
        }
    }
}
