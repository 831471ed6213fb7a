//! End-to-end checks tying classification, the equivalence transformation
//! and the solver together.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::equivalence::{bracket_expr, to_vonkarman, transform_boundary_data, EquivalenceError, VonKarmanForm};
use crate::expr::{parse, EvalError, Expr, Point};
use crate::geometry::{Domain2D, MaterialParams, ShellSpec};
use crate::solver::{
    solve, BcKind, BoundaryConditions, BoundaryData, DataSampling, FieldGrid, Grid, Problem, SolveReport, SolverError, SolverOptions,
    System,
};
use crate::symmetry::{FullDeSystem, Generator, InvarianceFields};

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{system:?} solve did not converge (residual {residual:e})")]
    NotConverged { system: System, residual: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Equivalence(#[from] EquivalenceError),
    #[error("the transformed evaluation stencil leaves the domain")]
    OutsideDomain,
    #[error("field does not live on a grid over the case domain")]
    GridMismatch,
}

/// Result of solving a shell and its von Kármán transform on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCheck {
    /// `max |w + f - w̃|` over all grid nodes.
    pub gap_w: f64,
    /// `max |Φ_M - Φ_vK|` over all grid nodes.
    pub gap_phi: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub marguerre: SolveReport,
    pub von_karman: SolveReport,
}

/// Solves the Marguerre problem and the von Kármán problem with transformed
/// boundary data and stencil-matched right-hand sides, and compares
/// `w + f` with `w̃` and the two stress functions.
pub fn verify_equivalence(
    spec: &ShellSpec,
    mat: &MaterialParams,
    grid: Grid,
    bc: &BoundaryConditions,
    opts: &SolverOptions,
    tolerance: f64,
) -> Result<EquivalenceCheck, VerifyError> {
    let m = Problem::marguerre(spec, mat, grid, bc, DataSampling::Stencil)?;
    let v = Problem::von_karman_from_shell(spec, mat, grid, &transform_boundary_data(bc, spec)?, DataSampling::Stencil)?;
    let sm = solve(&m, None, opts)?;
    let sv = solve(&v, None, opts)?;
    for s in [&sm, &sv] {
        if !s.report.converged {
            return Err(VerifyError::NotConverged {
                system: s.report.system,
                residual: s.report.final_residual_inf,
            });
        }
    }
    let f = FieldGrid::sample(grid, &spec.f)?;
    let gap_w = sm.w.map2(&f, |a, b| a + b).max_diff(&sv.w);
    let gap_phi = sm.phi.max_diff(&sv.phi);
    Ok(EquivalenceCheck {
        gap_w,
        gap_phi,
        tolerance,
        passed: gap_w <= tolerance && gap_phi <= tolerance,
        marguerre: sm.report,
        von_karman: sv.report,
    })
}

/// Comparison of the full determining equations with their reduced form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionCheck {
    pub generators: usize,
    pub points: usize,
    /// Samples where both reduced residuals vanish.
    pub admitted_samples: usize,
    /// Largest full residual over the admitted samples.
    pub reduction_residual_max: f64,
    /// Largest curvature-equation residual over all samples, with `η` in reduced form.
    pub curvature_residual_max: f64,
    /// Largest `|bracket + rK|` and `|load + rP|` over all samples.
    pub identity_gap_max: f64,
    /// Samples with a non-vanishing reduced residual.
    pub rejected_samples: usize,
    /// Rejected samples where the full equations fail as well.
    pub rejected_full_failures: usize,
    pub passed: bool,
}

/// Threshold below which the reduced residuals count as vanishing.
pub const REDUCED_ZERO: f64 = 1e-10;

/// Evaluates full and reduced determining equations for `n_random` generators
/// at `n_points` random points. Generators cycle through kernel elements
/// (`C = 0`), random combinations of the admitted homothetic parts in
/// `admitted`, and fully random parameters.
pub fn verify_reduction(
    spec: &ShellSpec,
    mat: &MaterialParams,
    admitted: &[[f64; 4]],
    n_random: usize,
    n_points: usize,
    seed: u64,
) -> Result<ReductionCheck, VerifyError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = spec.domain.shrink(0.05);
    let points: Vec<Point> = (0..n_points)
        .map(|_| [rng.gen_range(d.a1..=d.b1), rng.gen_range(d.a2..=d.b2)])
        .collect();
    let inv = InvarianceFields::from_spec(spec, mat);
    let samples = points.iter().map(|&x| inv.sample(x)).collect::<Result<Vec<_>, _>>()?;

    let mut check = ReductionCheck {
        generators: n_random,
        points: n_points,
        admitted_samples: 0,
        reduction_residual_max: 0.0,
        curvature_residual_max: 0.0,
        identity_gap_max: 0.0,
        rejected_samples: 0,
        rejected_full_failures: 0,
        passed: false,
    };
    for k in 0..n_random {
        let mut params = [0.0; 10];
        for v in &mut params[4..] {
            *v = rng.gen_range(-1.0..1.0);
        }
        match k % 3 {
            0 => {}
            1 if !admitted.is_empty() => {
                for c in admitted {
                    let s: f64 = rng.gen_range(-1.0..1.0);
                    for i in 0..4 {
                        params[i] += s * c[i];
                    }
                }
            }
            _ => {
                for v in &mut params[..4] {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
        }
        let gen = Generator::from_params(params);
        let full = FullDeSystem::new(&gen, spec, mat);
        for (x, s) in points.iter().zip(&samples) {
            let r = full.eval(*x)?;
            let (rp, rk) = s.residuals(&gen);
            let curvature = r.curvature.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            check.curvature_residual_max = check.curvature_residual_max.max(curvature);
            check.identity_gap_max = check.identity_gap_max.max((r.bracket + rk).abs()).max((r.load + rp).abs());
            if rp.abs() <= REDUCED_ZERO && rk.abs() <= REDUCED_ZERO {
                check.admitted_samples += 1;
                check.reduction_residual_max = check.reduction_residual_max.max(r.max_abs());
            } else {
                check.rejected_samples += 1;
                if r.bracket.abs().max(r.load.abs()) > REDUCED_ZERO {
                    check.rejected_full_failures += 1;
                }
            }
        }
    }
    check.passed = check.reduction_residual_max < 1e-8
        && check.curvature_residual_max < 1e-9
        && check.rejected_full_failures == check.rejected_samples;
    Ok(check)
}

/// Finite transformation `exp(tY)` of the plane part of a generator, in
/// complex form `z' = e^{λt} z + γ (e^{λt} - 1)/λ` with `λ = C1 - i C2`,
/// `γ = C3 + i C4`.
#[derive(Debug, Clone, Copy)]
pub struct Flow {
    gen: Generator,
    t: f64,
    lambda: Complex64,
    gamma: Complex64,
    /// `(e^{λt} - 1)/λ`
    e1: Complex64,
    /// `((e^{λt} - 1)/λ - t)/λ`
    e2: Complex64,
}

impl Flow {
    pub fn new(gen: &Generator, t: f64) -> Self {
        let lambda = Complex64::new(gen.c[0], -gen.c[1]);
        let gamma = Complex64::new(gen.c[2], gen.c[3]);
        let lt = lambda * t;
        let (e1, e2) = if lt.norm() < 1e-6 {
            // Series of (e^{z} - 1)/z and (e^{z} - 1 - z)/z² to third order.
            let e1 = t * (1.0 + lt / 2.0 + lt * lt / 6.0 + lt * lt * lt / 24.0);
            let e2 = t * t * (0.5 + lt / 6.0 + lt * lt / 24.0 + lt * lt * lt / 120.0);
            (e1, e2)
        } else {
            let e1 = ((lt).exp() - 1.0) / lambda;
            (e1, (e1 - t) / lambda)
        };
        Flow {
            gen: *gen,
            t,
            lambda,
            gamma,
            e1,
            e2,
        }
    }

    fn c(x: Point) -> Complex64 {
        Complex64::new(x[0], x[1])
    }

    pub fn forward(&self, x: Point) -> Point {
        let z = (self.lambda * self.t).exp() * Self::c(x) + self.gamma * self.e1;
        [z.re, z.im]
    }

    pub fn inverse(&self, y: Point) -> Point {
        let z = (Self::c(y) - self.gamma * self.e1) * (-self.lambda * self.t).exp();
        [z.re, z.im]
    }

    /// `∫₀ᵗ x(s) ds` along the orbit starting at `x`.
    fn position_integral(&self, x: Point) -> [f64; 2] {
        let z = Self::c(x) * self.e1 + self.gamma * self.e2;
        [z.re, z.im]
    }

    /// Increments of `w̃ = w + f` and `Φ` accumulated along the orbit from `x`.
    pub fn increments(&self, x: Point) -> (f64, f64) {
        if self.t == 0.0 {
            return (0.0, 0.0);
        }
        let s = self.position_integral(x);
        let (a, b) = (self.gen.a, self.gen.b);
        (
            a[0] * s[0] + a[1] * s[1] + a[2] * self.t,
            b[0] * s[0] + b[1] * s[1] + b[2] * self.t,
        )
    }
}

/// Piecewise bicubic (tensor cubic Lagrange) interpolation of grid values.
fn interpolate(u: &FieldGrid, x: Point) -> f64 {
    let g = u.grid;
    let axis = |x: f64, a: f64, h: f64, last: usize| {
        let s = (x - a) / h;
        let i0 = (s.floor() as isize - 1).clamp(0, last as isize - 3) as usize;
        let r = s - i0 as f64;
        let w = [
            -(r - 1.0) * (r - 2.0) * (r - 3.0) / 6.0,
            r * (r - 2.0) * (r - 3.0) / 2.0,
            -r * (r - 1.0) * (r - 3.0) / 2.0,
            r * (r - 1.0) * (r - 2.0) / 6.0,
        ];
        (i0, w)
    };
    let (i0, wi) = axis(x[0], g.domain.a1, g.h1, g.n1 + 1);
    let (j0, wj) = axis(x[1], g.domain.a2, g.h2, g.n2 + 1);
    let mut v = 0.0;
    for (a, wa) in wi.iter().enumerate() {
        for (b, wb) in wj.iter().enumerate() {
            v += wa * wb * u.get(i0 + a, j0 + b);
        }
    }
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrbitOptions {
    /// Finite-difference spacing of the residual evaluation in units of the
    /// grid spacing; a non-integer value keeps the evaluation off the grid lines.
    pub spacing_factor: f64,
    /// Evaluation points per axis in the sampling square.
    pub samples: usize,
    /// Residual magnitude treated as zero, relative to the data scale.
    pub floor: f64,
    /// Largest admissible ratio.
    pub max_ratio: f64,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        OrbitOptions {
            spacing_factor: 3.37,
            samples: 9,
            floor: 1e-10,
            max_ratio: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitCheck {
    pub generator: [f64; 10],
    pub t: f64,
    /// Half width of the sampling square.
    pub half_width: f64,
    pub transformed_residual: f64,
    pub baseline_residual: f64,
    pub ratio: f64,
    pub passed: bool,
}

const D1: [f64; 5] = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
const D2: [f64; 5] = [-1.0 / 12.0, 16.0 / 12.0, -30.0 / 12.0, 16.0 / 12.0, -1.0 / 12.0];
const D4: [f64; 7] = [
    -1.0 / 6.0,
    12.0 / 6.0,
    -39.0 / 6.0,
    56.0 / 6.0,
    -39.0 / 6.0,
    12.0 / 6.0,
    -1.0 / 6.0,
];

/// Fourth-order central differences on a 7 x 7 patch `u[a][b] = u(y + (a-3, b-3) H)`.
struct PatchDerivs {
    hess: [f64; 3],
    bih: f64,
}

fn patch_derivs(u: &[[f64; 7]; 7], h: f64) -> PatchDerivs {
    let h2 = h * h;
    let mut d11 = 0.0;
    let mut d22 = 0.0;
    let mut d12 = 0.0;
    let mut d1111 = 0.0;
    let mut d2222 = 0.0;
    let mut d1122 = 0.0;
    for k in 0..5 {
        d11 += D2[k] * u[k + 1][3];
        d22 += D2[k] * u[3][k + 1];
        for l in 0..5 {
            d12 += D1[k] * D1[l] * u[k + 1][l + 1];
            d1122 += D2[k] * D2[l] * u[k + 1][l + 1];
        }
    }
    for k in 0..7 {
        d1111 += D4[k] * u[k][3];
        d2222 += D4[k] * u[3][k];
    }
    PatchDerivs {
        hess: [d11 / h2, d12 / h2, d22 / h2],
        bih: (d1111 + 2.0 * d1122 + d2222) / (h2 * h2),
    }
}

fn bracket(u: [f64; 3], v: [f64; 3]) -> f64 {
    u[0] * v[2] + u[2] * v[0] - 2.0 * u[1] * v[1]
}

fn inside(d: &Domain2D, x: Point) -> bool {
    let tol = 1e-12 * (d.width() + d.height());
    x[0] >= d.a1 - tol && x[0] <= d.b1 + tol && x[1] >= d.a2 - tol && x[1] <= d.b2 + tol
}

/// Largest half width `r` of the square centred in the domain such that the
/// square widened by `pad`, and its preimage under the flow, stay in the domain.
fn sampling_half_width(d: &Domain2D, flow: &Flow, pad: f64) -> Option<f64> {
    let c = d.center();
    let fits = |r: f64| {
        let e = r + pad;
        [[-e, -e], [e, -e], [-e, e], [e, e]].iter().all(|o| {
            let y = [c[0] + o[0], c[1] + o[1]];
            inside(d, y) && inside(d, flow.inverse(y))
        })
    };
    if !fits(0.0) {
        return None;
    }
    let (mut lo, mut hi) = (0.0, 0.5 * d.width().min(d.height()));
    if fits(hi) {
        return Some(hi);
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fits(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Maps a discrete solution `(w, Φ)` of the Marguerre problem by the finite
/// transformation `exp(tY)` of `gen` and compares the continuous residual of
/// the mapped fields with that of the untransformed fields at the same
/// points.
///
/// The deflection is carried through the invariant `w̃ = w + f`: `w̃` moves as
/// a scalar plus the integral of the affine `A`-part along the orbit, and `f`
/// at the new point is subtracted again. The stress function gains the
/// integral of the `B`-part. Values at preimages come from bicubic
/// interpolation; derivatives from fourth-order differences with a spacing
/// that is not a multiple of the grid spacing. Both residuals therefore carry
/// the same discretization and interpolation error, and an admitted generator
/// gives a ratio near 1.
pub fn orbit_residual(
    w: &FieldGrid,
    phi: &FieldGrid,
    gen: &Generator,
    spec: &ShellSpec,
    mat: &MaterialParams,
    t: f64,
    opts: &OrbitOptions,
) -> Result<OrbitCheck, VerifyError> {
    if w.grid.domain != spec.domain || !w.grid.same_shape(&phi.grid) {
        return Err(VerifyError::GridMismatch);
    }
    let form: VonKarmanForm = to_vonkarman(spec, mat);
    let grid = w.grid;
    let hh = opts.spacing_factor * grid.h1.max(grid.h2);
    let flow = Flow::new(gen, t);
    let identity = Flow::new(gen, 0.0);
    let r = sampling_half_width(&spec.domain, &flow, 3.0 * hh).ok_or(VerifyError::OutsideDomain)?;
    let c = spec.domain.center();
    let m = opts.samples.max(1);
    let points: Vec<Point> = (0..m * m)
        .map(|k| {
            let (a, b) = ((k / m) as f64, (k % m) as f64);
            let s = |v: f64| if m == 1 { 0.0 } else { -1.0 + 2.0 * v / (m - 1) as f64 };
            [c[0] + r * s(a), c[1] + r * s(b)]
        })
        .collect();

    let residual = |fl: &Flow| -> Result<(f64, f64), VerifyError> {
        let mut worst: f64 = 0.0;
        let mut scale: f64 = 1.0;
        for &y in &points {
            let mut wt = [[0.0; 7]; 7];
            let mut ph = [[0.0; 7]; 7];
            for a in 0..7 {
                for b in 0..7 {
                    let q = [y[0] + (a as f64 - 3.0) * hh, y[1] + (b as f64 - 3.0) * hh];
                    let x = fl.inverse(q);
                    let (dw, dphi) = fl.increments(x);
                    wt[a][b] = interpolate(w, x) + spec.f.eval(x)? + dw;
                    ph[a][b] = interpolate(phi, x) + dphi;
                }
            }
            let dw = patch_derivs(&wt, hh);
            let dp = patch_derivs(&ph, hh);
            let (p, k) = (form.p.eval(y)?, form.k.eval(y)?);
            let r1 = mat.d * dw.bih - bracket(dw.hess, dp.hess) - p;
            let r2 = mat.membrane_compliance() * dp.bih + 0.5 * bracket(dw.hess, dw.hess) - k;
            worst = worst.max(r1.abs()).max(r2.abs());
            scale = scale.max(p.abs()).max(k.abs());
        }
        Ok((worst, scale))
    };
    let (transformed, s1) = residual(&flow)?;
    let (baseline, s2) = residual(&identity)?;
    let delta = opts.floor * s1.max(s2);
    let ratio = transformed.max(delta) / baseline.max(delta);
    Ok(OrbitCheck {
        generator: gen.params(),
        t,
        half_width: r,
        transformed_residual: transformed,
        baseline_residual: baseline,
        ratio,
        passed: ratio <= opts.max_ratio,
    })
}

/// One grid of a manufactured-solution convergence study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedRow {
    pub points: usize,
    pub h: f64,
    pub error_w: f64,
    pub error_phi: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManufacturedStudy {
    pub exact_w: String,
    pub exact_phi: String,
    pub rows: Vec<ManufacturedRow>,
    /// Observed orders `log2(e_k / e_{k+1})` between consecutive grids.
    pub order_w: Vec<f64>,
    pub order_phi: Vec<f64>,
    pub passed: bool,
}

/// Exact von Kármán pair used by [`manufactured_study`].
pub const MANUFACTURED_W: &str = "sin(pi*x1)*sin(pi*x2)";
pub const MANUFACTURED_PHI: &str = "x1^2*x2^2";

/// Solves the von Kármán system on the unit square with right-hand sides and
/// boundary data manufactured from `w̃ = sin(πx1) sin(πx2)`, `Φ = x1² x2²`
/// on each grid of `points`, and reports max-norm errors and observed orders.
/// The study passes when every observed order lies in `2.0 ± 0.3`.
pub fn manufactured_study(
    mat: &MaterialParams,
    w_kind: BcKind,
    points: &[usize],
    opts: &SolverOptions,
) -> Result<ManufacturedStudy, VerifyError> {
    let w = parse(MANUFACTURED_W).expect("constant expression");
    let phi = parse(MANUFACTURED_PHI).expect("constant expression");
    let load = Expr::sum([Expr::scale(mat.d, w.biharmonic()), Expr::neg(bracket_expr(&w, &phi))]);
    let gauss = Expr::sum([
        Expr::scale(mat.membrane_compliance(), phi.biharmonic()),
        Expr::scale(0.5, bracket_expr(&w, &w)),
    ]);
    let bc = BoundaryConditions {
        w: BoundaryData::trace_of(&w, w_kind),
        phi: BoundaryData::trace_of(&phi, BcKind::Clamped),
    };
    let mut rows = Vec::new();
    for &n in points {
        let grid = Grid::with_points(Domain2D::square(0.0, 1.0), n)?;
        let problem = Problem::von_karman(&load, &gauss, mat, grid, &bc)?;
        let s = solve(&problem, None, opts)?;
        if !s.report.converged {
            return Err(VerifyError::NotConverged {
                system: System::VonKarman,
                residual: s.report.final_residual_inf,
            });
        }
        rows.push(ManufacturedRow {
            points: n,
            h: grid.h1,
            error_w: s.w.max_diff(&FieldGrid::sample(grid, &w)?),
            error_phi: s.phi.max_diff(&FieldGrid::sample(grid, &phi)?),
            iterations: s.report.iterations,
        });
    }
    let orders = |e: fn(&ManufacturedRow) -> f64| -> Vec<f64> {
        rows.windows(2)
            .map(|p| (e(&p[0]) / e(&p[1])).ln() / (p[0].h / p[1].h).ln())
            .collect()
    };
    let order_w = orders(|r| r.error_w);
    let order_phi = orders(|r| r.error_phi);
    let passed = order_w.iter().chain(&order_phi).all(|o| (o - 2.0).abs() <= 0.3);
    Ok(ManufacturedStudy {
        exact_w: MANUFACTURED_W.to_string(),
        exact_phi: MANUFACTURED_PHI.to_string(),
        rows,
        order_w,
        order_phi,
        passed,
    })
}

/// A named shell for the built-in verification suite.
#[derive(Debug, Clone)]
pub struct Case {
    pub id: &'static str,
    pub spec: ShellSpec,
    pub mat: MaterialParams,
}

fn case(id: &'static str, f: &str, p: &str, domain: Domain2D, epsilon: f64) -> Case {
    Case {
        id,
        spec: ShellSpec::new(parse(f).expect("built-in case"), parse(p).expect("built-in case"), domain, epsilon)
            .expect("built-in case"),
        mat: MaterialParams::default(),
    }
}

/// Plate, paraboloid, parabolic cylinder, sine-product surface and a loaded
/// shallow cap.
pub fn case_suite() -> Vec<Case> {
    vec![
        case("plate", "0", "0", Domain2D::square(-1.0, 1.0), 0.5),
        case("paraboloid", "0.5*(x1^2+x2^2)", "0", Domain2D::square(-1.0, 1.0), 0.9),
        case("cylinder", "0.5*x1^2", "0", Domain2D::square(-1.0, 1.0), 0.9),
        case("sinsin", "sin(x1)*sin(x2)", "0", Domain2D::square(0.3, 2.8), 0.9),
        case("cap", "0.05*(x1^2+x2^2)", "1", Domain2D::square(0.0, 1.0), 0.5),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_round_trip_and_composition() {
        let gen = Generator::from_params([0.3, -0.7, 0.2, 0.5, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let f = Flow::new(&gen, 0.4);
        let x = [0.3, -1.1];
        let y = f.inverse(f.forward(x));
        assert!((y[0] - x[0]).abs() < 1e-14 && (y[1] - x[1]).abs() < 1e-14);
        let half = Flow::new(&gen, 0.2);
        let z = half.forward(half.forward(x));
        let y = f.forward(x);
        assert!((z[0] - y[0]).abs() < 1e-14 && (z[1] - y[1]).abs() < 1e-14);
    }

    #[test]
    fn flow_solves_the_orbit_equation() {
        let gen = Generator::from_params([0.3, -0.7, 0.2, 0.5, 0.4, -1.2, 0.3, 0.0, 0.0, 0.0]);
        let x = [0.3, -1.1];
        let n = 20000;
        let dt = 0.5 / n as f64;
        let (mut y, mut acc) = (x, 0.0);
        for _ in 0..n {
            // Midpoint rule on x' = ξ(x) and w̃' = A·x + A3.
            let k = gen.xi(y);
            let m = [y[0] + 0.5 * dt * k[0], y[1] + 0.5 * dt * k[1]];
            let km = gen.xi(m);
            acc += dt * (gen.a[0] * m[0] + gen.a[1] * m[1] + gen.a[2]);
            y = [y[0] + dt * km[0], y[1] + dt * km[1]];
        }
        let f = Flow::new(&gen, 0.5);
        let z = f.forward(x);
        assert!((z[0] - y[0]).abs() < 1e-8 && (z[1] - y[1]).abs() < 1e-8);
        assert!((f.increments(x).0 - acc).abs() < 1e-8);
        let pure_translation = Flow::new(&Generator::homothetic([0.0, 0.0, 1.0, 2.0]), 0.5);
        assert_eq!(pure_translation.forward([0.0, 0.0]), [0.5, 1.0]);
    }

    #[test]
    fn bicubic_reproduces_cubics() {
        let g = Grid::with_points(Domain2D::square(0.0, 1.0), 13).unwrap();
        let u = FieldGrid::from_fn(g, |x| f64::powi(x[0], 3) - 2.0 * x[0] * x[1] * x[1] + x[1]);
        for x in [[0.01, 0.99], [0.5, 0.5], [0.333, 0.77], [1.0, 0.0]] {
            let exact = f64::powi(x[0], 3) - 2.0 * x[0] * x[1] * x[1] + x[1];
            assert!((interpolate(&u, x) - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn patch_differences_are_exact_on_sextics() {
        let u = |x: f64, y: f64| x.powi(4) + x * x * y * y + 3.0 * x * y + y.powi(5);
        let (x0, y0, h) = (0.4, -0.2, 0.1);
        let mut p = [[0.0; 7]; 7];
        for a in 0..7 {
            for b in 0..7 {
                p[a][b] = u(x0 + (a as f64 - 3.0) * h, y0 + (b as f64 - 3.0) * h);
            }
        }
        let d = patch_derivs(&p, h);
        let exact_hess = [12.0 * x0 * x0 + 2.0 * y0 * y0, 4.0 * x0 * y0 + 3.0, 2.0 * x0 * x0 + 20.0 * y0.powi(3)];
        for k in 0..3 {
            assert!((d.hess[k] - exact_hess[k]).abs() < 1e-9, "{k}");
        }
        assert!((d.bih - (24.0 + 8.0 + 120.0 * y0)).abs() < 1e-7, "{}", d.bih);
    }

    #[test]
    fn reduction_on_plate_and_counterexample() {
        let suite = case_suite();
        let plate = &suite[0];
        let r = verify_reduction(&plate.spec, &plate.mat, &[], 9, 20, 1).unwrap();
        assert_eq!(r.reduction_residual_max, 0.0);
        assert!(r.passed);
        let sinsin = &suite[3];
        let r = verify_reduction(&sinsin.spec, &sinsin.mat, &[], 9, 20, 1).unwrap();
        assert!(r.passed, "{r:?}");
        assert!(r.rejected_samples > 0 && r.rejected_full_failures == r.rejected_samples);
    }

    #[test]
    fn flat_shell_equivalence_is_exact() {
        let plate = ShellSpec::new(parse("0").unwrap(), parse("1").unwrap(), Domain2D::square(0.0, 1.0), 0.5).unwrap();
        let g = Grid::with_points(plate.domain, 17).unwrap();
        let c = verify_equivalence(&plate, &MaterialParams::default(), g, &BoundaryConditions::default(), &SolverOptions::default(), 1e-9).unwrap();
        assert_eq!((c.gap_w, c.gap_phi), (0.0, 0.0));
    }
}
