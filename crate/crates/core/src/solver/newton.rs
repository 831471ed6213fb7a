//! Damped Newton iteration with load continuation.

use serde::{Deserialize, Serialize};

use super::grid::FieldGrid;
use super::problem::{Problem, System};
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Newton iterations allowed per load step.
    pub max_iter: usize,
    /// Largest number of geometric load steps tried; attempts use 1, 2, 4, ...
    pub max_load_steps: usize,
    /// Step halvings per Newton iteration before the iteration counts as stalled.
    pub max_backtracks: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_abs: 1e-10,
            tol_rel: 1e-10,
            max_iter: 30,
            max_load_steps: 16,
            max_backtracks: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub system: System,
    pub points_per_axis: [usize; 2],
    pub converged: bool,
    /// Newton iterations over all load steps of the final attempt.
    pub iterations: usize,
    /// Max-norm residuals of the final load step, starting with the initial one.
    pub residual_norm_history: Vec<f64>,
    pub final_residual_inf: f64,
    pub load_steps_used: usize,
    /// Convergence threshold `tol_abs + tol_rel * data_scale`.
    pub tolerance: f64,
    pub data_scale: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub w: FieldGrid,
    pub phi: FieldGrid,
    pub report: SolveReport,
}

struct Stage {
    w: FieldGrid,
    phi: FieldGrid,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
    tolerance: f64,
    data_scale: f64,
}

fn residual_norm(p: &Problem, w: &FieldGrid, phi: &FieldGrid, lambda: f64) -> Result<f64, SolverError> {
    let (r1, r2) = p.residual_scaled(w, phi, lambda)?;
    Ok(r1.max_abs_interior().max(r2.max_abs_interior()))
}

/// Data scale for the relative tolerance, raised so that the threshold never
/// falls below the roundoff level of evaluating the residual at `(w, phi)`.
fn data_scale(p: &Problem, w: &FieldGrid, phi: &FieldGrid, opts: &SolverOptions) -> f64 {
    let base = p.load.max_abs().max(p.gauss.max_abs()).max(1.0);
    let roundoff = 16.0 * f64::EPSILON * p.operator_scale(w, phi);
    if opts.tol_rel > 0.0 {
        base + roundoff / opts.tol_rel
    } else {
        base
    }
}

fn newton_stage(
    p: &Problem,
    mut w: FieldGrid,
    mut phi: FieldGrid,
    lambda: f64,
    opts: &SolverOptions,
) -> Result<Stage, SolverError> {
    let mut r = residual_norm(p, &w, &phi, lambda)?;
    let mut history = vec![r];
    let mut iterations = 0;
    let mut scale = data_scale(p, &w, &phi, opts);
    let mut tol = opts.tol_abs + opts.tol_rel * scale;
    let mut converged = false;
    while iterations < opts.max_iter {
        if iterations > 0 && r <= tol {
            converged = true;
            break;
        }
        let (r1, r2) = p.residual_scaled(&w, &phi, lambda)?;
        let mut delta = p.flatten(&r1, &r2);
        for v in &mut delta {
            *v = -*v;
        }
        p.jacobian(&w, &phi).factor()?.solve_in_place(&mut delta);
        iterations += 1;

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_backtracks {
            let (wt, pt) = p.step(&w, &phi, &delta, alpha);
            let rt = residual_norm(p, &wt, &pt, lambda)?;
            if rt.is_finite() && rt <= r {
                accepted = Some((wt, pt, rt));
                break;
            }
            alpha *= 0.5;
        }
        match accepted {
            Some((wt, pt, rt)) => {
                w = wt;
                phi = pt;
                r = rt;
                history.push(r);
                scale = data_scale(p, &w, &phi, opts);
                tol = opts.tol_abs + opts.tol_rel * scale;
            }
            None => break,
        }
    }
    if !converged && iterations > 0 && r <= tol {
        converged = true;
    }
    Ok(Stage {
        w,
        phi,
        history,
        iterations,
        converged,
        tolerance: tol,
        data_scale: scale,
    })
}

/// Solves `problem` from `init` (zero fields if `None`). Boundary nodes of the
/// initial fields are overwritten with the Dirichlet data.
///
/// Full-load Newton is tried first; if it does not converge the load is
/// applied in 2, 4, ... geometric steps `2^(k-s)`, `k = 1..=s`, up to
/// `max_load_steps`. Non-convergence is not an error: the best iterate is
/// returned with `converged == false`.
pub fn solve(
    problem: &Problem,
    init: Option<(&FieldGrid, &FieldGrid)>,
    opts: &SolverOptions,
) -> Result<Solution, SolverError> {
    let g = problem.grid;
    let (w0, phi0) = match init {
        Some((w, phi)) => {
            if !w.grid.same_shape(&g) || !phi.grid.same_shape(&g) {
                return Err(SolverError::ShapeMismatch);
            }
            problem.with_boundary(w, phi)
        }
        None => problem.with_boundary(&FieldGrid::zeros(g), &FieldGrid::zeros(g)),
    };
    if !w0.is_finite() || !phi0.is_finite() {
        return Err(SolverError::NonFinite);
    }

    let mut best: Option<(Stage, usize, usize)> = None;
    let mut steps = 1;
    while steps <= opts.max_load_steps.max(1) {
        let (mut w, mut phi) = (w0.clone(), phi0.clone());
        let mut total = 0;
        let mut last = None;
        for k in 1..=steps {
            let lambda = 2f64.powi(k as i32 - steps as i32);
            let stage = newton_stage(problem, w, phi, lambda, opts)?;
            total += stage.iterations;
            let done = stage.converged;
            w = stage.w.clone();
            phi = stage.phi.clone();
            let full = k == steps;
            last = Some(stage);
            if !done || full {
                if !full {
                    last = None;
                }
                break;
            }
        }
        if let Some(stage) = last {
            if stage.converged {
                best = Some((stage, total, steps));
                break;
            }
            let better = match &best {
                Some((b, _, _)) => stage.history.last() < b.history.last(),
                None => true,
            };
            if better {
                best = Some((stage, total, steps));
            }
        }
        steps *= 2;
    }

    let (stage, iterations, steps) = match best {
        Some(b) => b,
        None => {
            // No attempt reached full load; report the initial state at full load.
            let stage = newton_stage(problem, w0, phi0, 1.0, &SolverOptions { max_iter: 0, ..*opts })?;
            (stage, 0, 0)
        }
    };
    let final_residual_inf = *stage.history.last().expect("history starts with the initial residual");
    Ok(Solution {
        report: SolveReport {
            system: problem.system,
            points_per_axis: [g.n1 + 2, g.n2 + 2],
            converged: stage.converged,
            iterations,
            residual_norm_history: stage.history,
            final_residual_inf,
            load_steps_used: steps,
            tolerance: stage.tolerance,
            data_scale: stage.data_scale,
        },
        w: stage.w,
        phi: stage.phi,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::{Domain2D, MaterialParams, ShellSpec};
    use crate::solver::bc::BoundaryConditions;
    use crate::solver::grid::Grid;
    use crate::solver::problem::DataSampling;

    fn cap(p: &str) -> ShellSpec {
        ShellSpec::new(parse("0.05*(x1^2+x2^2)").unwrap(), parse(p).unwrap(), Domain2D::square(0.0, 1.0), 0.5).unwrap()
    }

    #[test]
    fn unloaded_plate_takes_one_iteration() {
        let plate = ShellSpec::new(parse("0").unwrap(), parse("0").unwrap(), Domain2D::square(0.0, 1.0), 0.5).unwrap();
        let g = Grid::with_points(plate.domain, 17).unwrap();
        let p = Problem::marguerre(&plate, &MaterialParams::default(), g, &BoundaryConditions::default(), DataSampling::Stencil).unwrap();
        let s = solve(&p, None, &SolverOptions::default()).unwrap();
        assert!(s.report.converged);
        assert_eq!(s.report.iterations, 1);
        assert_eq!(s.w.max_abs() + s.phi.max_abs(), 0.0);
    }

    #[test]
    fn loaded_cap_converges_monotonically() {
        let spec = cap("1");
        let g = Grid::with_points(spec.domain, 17).unwrap();
        let p = Problem::marguerre(&spec, &MaterialParams::default(), g, &BoundaryConditions::default(), DataSampling::Stencil).unwrap();
        let s = solve(&p, None, &SolverOptions::default()).unwrap();
        assert!(s.report.converged, "{:?}", s.report);
        assert!(s.report.final_residual_inf <= s.report.tolerance);
        assert!(s.report.residual_norm_history.windows(2).all(|w| w[1] <= w[0]));
        assert!(s.w.max_abs() > 1e-4);
    }

    #[test]
    fn strong_load_needs_continuation() {
        let spec = cap("-4000");
        let g = Grid::with_points(spec.domain, 17).unwrap();
        let p = Problem::marguerre(&spec, &MaterialParams::default(), g, &BoundaryConditions::default(), DataSampling::Stencil).unwrap();
        let s = solve(&p, None, &SolverOptions { max_iter: 8, ..Default::default() }).unwrap();
        assert!(s.report.converged, "{:?}", s.report);
        assert!(s.report.load_steps_used >= 1);
    }

    #[test]
    fn nonconvergence_is_reported_not_raised() {
        let spec = cap("1");
        let g = Grid::with_points(spec.domain, 17).unwrap();
        let p = Problem::marguerre(&spec, &MaterialParams::default(), g, &BoundaryConditions::default(), DataSampling::Stencil).unwrap();
        let s = solve(&p, None, &SolverOptions { max_iter: 1, max_load_steps: 1, ..Default::default() }).unwrap();
        assert!(!s.report.converged);
        assert!(s.w.is_finite());
    }
}
