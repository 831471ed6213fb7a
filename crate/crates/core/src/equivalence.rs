//! The substitution `w̃ = w + f` mapping Marguerre's shallow-shell equations
//! onto nonhomogeneous von Kármán plate equations.

use thiserror::Error;

use crate::expr::{EvalError, Expr, Point, Var};
use crate::geometry::{gauss_curvature, reduced_load, MaterialParams, ShellSpec};
use crate::solver::{BoundaryConditions, BoundaryData};

/// Right-hand sides of the von Kármán system equivalent to a shell.
#[derive(Debug, Clone, PartialEq)]
pub struct VonKarmanForm {
    /// `P = D Δ²f + p`
    pub p: Expr,
    /// `K = f,11 f,22 - f,12²`
    pub k: Expr,
    /// `f`; the deflection maps as `w̃ = w + f`.
    pub shift: Expr,
}

/// Right-hand sides with like terms collected.
pub fn to_vonkarman(spec: &ShellSpec, mat: &MaterialParams) -> VonKarmanForm {
    VonKarmanForm {
        p: reduced_load(spec, mat).simplify(),
        k: gauss_curvature(spec).simplify(),
        shift: spec.f.clone(),
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum EquivalenceError {
    #[error("{tensor} tensor is not symmetric: component {index:?} differs from {partner:?}")]
    Asymmetric {
        tensor: &'static str,
        index: [usize; 4],
        partner: [usize; 4],
    },
    #[error("{0} tensor has a non-finite component")]
    NonFinite(&'static str),
    #[error("boundary data kinds do not match")]
    KindMismatch,
}

/// Boundary data for `(w̃, Φ)` from data for `(w, Φ)`: the deflection data
/// gains the trace of `f` (value and outward normal derivative, or value and
/// Laplacian); the stress-function data is unchanged.
pub fn transform_boundary_data(
    bc: &BoundaryConditions,
    spec: &ShellSpec,
) -> Result<BoundaryConditions, EquivalenceError> {
    let shift = BoundaryData::trace_of(&spec.f, bc.w.kind());
    Ok(BoundaryConditions {
        w: bc.w.plus(&shift).ok_or(EquivalenceError::KindMismatch)?,
        phi: bc.phi.clone(),
    })
}

pub type Tensor4 = [[[[f64; 2]; 2]; 2]; 2];

/// Material tensors `D^{αβμν}`, `E^{αβμν}` of an anisotropic shell.
#[derive(Debug, Clone, PartialEq)]
pub struct AnisotropicParams {
    d: Tensor4,
    e: Tensor4,
}

fn check_symmetry(t: &Tensor4, name: &'static str) -> Result<(), EquivalenceError> {
    let scale = t.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * scale;
    for a in 0..2 {
        for b in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let v = t[a][b][m][n];
                    if !v.is_finite() {
                        return Err(EquivalenceError::NonFinite(name));
                    }
                    for partner in [[b, a, m, n], [a, b, n, m], [m, n, a, b]] {
                        let [p, q, r, s] = partner;
                        if (v - t[p][q][r][s]).abs() > tol {
                            return Err(EquivalenceError::Asymmetric {
                                tensor: name,
                                index: [a, b, m, n],
                                partner,
                            });
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

impl AnisotropicParams {
    pub fn new(d: Tensor4, e: Tensor4) -> Result<Self, EquivalenceError> {
        check_symmetry(&d, "D")?;
        check_symmetry(&e, "E")?;
        Ok(AnisotropicParams { d, e })
    }

    /// `D δ^{αβ} δ^{μν}` and `(1/Eh) δ^{αβ} δ^{μν}`, which reduce to the
    /// isotropic operators `D Δ²` and `(1/Eh) Δ²`.
    pub fn isotropic(mat: &MaterialParams) -> Self {
        let mut d = Tensor4::default();
        let mut e = Tensor4::default();
        for a in 0..2 {
            for m in 0..2 {
                d[a][a][m][m] = mat.d;
                e[a][a][m][m] = mat.membrane_compliance();
            }
        }
        AnisotropicParams { d, e }
    }

    pub fn d(&self) -> &Tensor4 {
        &self.d
    }

    pub fn e(&self) -> &Tensor4 {
        &self.e
    }
}

/// `Σ T^{αβμν} u,αβμν`.
pub fn tensor_contraction(t: &Tensor4, u: &Expr) -> Expr {
    let mut terms = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for m in 0..2 {
                for n in 0..2 {
                    let c = t[a][b][m][n];
                    if c != 0.0 {
                        let vars = [a, b, m, n].map(Var::from_index);
                        terms.push(Expr::scale(c, u.diff_n(&vars)));
                    }
                }
            }
        }
    }
    Expr::sum(terms)
}

/// Right-hand sides of the von Kármán-type system an anisotropic shell maps to:
/// `(Σ D^{αβμν} f,αβμν + p, K)`.
pub fn anisotropic_rhs(aniso: &AnisotropicParams, spec: &ShellSpec) -> (Expr, Expr) {
    (
        Expr::sum([tensor_contraction(&aniso.d, &spec.f), spec.p.clone()]),
        gauss_curvature(spec),
    )
}

/// `[u, v] = u,11 v,22 + u,22 v,11 - 2 u,12 v,12`.
pub fn bracket_expr(u: &Expr, v: &Expr) -> Expr {
    let d = |e: &Expr, a: Var, b: Var| e.diff(a).diff(b);
    use Var::{X1, X2};
    Expr::sum([
        Expr::product([d(u, X1, X1), d(v, X2, X2)]),
        Expr::product([d(u, X2, X2), d(v, X1, X1)]),
        Expr::scale(-2.0, Expr::product([d(u, X1, X2), d(v, X1, X2)])),
    ])
}

/// Symbolic residuals of a continuous system at given trial fields.
#[derive(Debug, Clone)]
pub struct ContinuousResidual {
    pub r1: Expr,
    pub r2: Expr,
}

impl ContinuousResidual {
    /// Marguerre residuals of `(w, Φ)`.
    pub fn marguerre(spec: &ShellSpec, mat: &MaterialParams, w: &Expr, phi: &Expr) -> Self {
        ContinuousResidual {
            r1: Expr::sum([
                Expr::scale(mat.d, w.biharmonic()),
                Expr::neg(bracket_expr(w, phi)),
                Expr::neg(bracket_expr(&spec.f, phi)),
                Expr::neg(spec.p.clone()),
            ]),
            r2: Expr::sum([
                Expr::scale(mat.membrane_compliance(), phi.biharmonic()),
                Expr::scale(0.5, bracket_expr(w, w)),
                bracket_expr(&spec.f, w),
            ]),
        }
    }

    /// von Kármán residuals of `(w̃, Φ)` with right-hand sides from `form`.
    pub fn von_karman(form: &VonKarmanForm, mat: &MaterialParams, wt: &Expr, phi: &Expr) -> Self {
        ContinuousResidual {
            r1: Expr::sum([
                Expr::scale(mat.d, wt.biharmonic()),
                Expr::neg(bracket_expr(wt, phi)),
                Expr::neg(form.p.clone()),
            ]),
            r2: Expr::sum([
                Expr::scale(mat.membrane_compliance(), phi.biharmonic()),
                Expr::scale(0.5, bracket_expr(wt, wt)),
                Expr::neg(form.k.clone()),
            ]),
        }
    }

    pub fn eval(&self, x: Point) -> Result<[f64; 2], EvalError> {
        Ok([self.r1.eval(x)?, self.r2.eval(x)?])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::Domain2D;
    use crate::solver::{BcKind, EdgeExprs};

    fn spec(f: &str, p: &str) -> ShellSpec {
        ShellSpec::new(parse(f).unwrap(), parse(p).unwrap(), Domain2D::square(0.0, 1.0), 0.5).unwrap()
    }

    fn close(a: &Expr, b: &Expr, pts: &[Point]) -> bool {
        pts.iter().all(|&x| (a.eval(x).unwrap() - b.eval(x).unwrap()).abs() < 1e-12)
    }

    const PTS: [Point; 4] = [[0.1, 0.2], [0.5, 0.5], [0.9, 0.3], [0.33, 0.77]];

    #[test]
    fn flat_shell_keeps_load() {
        let s = spec("0", "3*x1 + 1");
        let v = to_vonkarman(&s, &MaterialParams::default());
        assert!(close(&v.p, &s.p, &PTS));
        assert!(v.k.is_zero() && v.shift.is_zero());
    }

    #[test]
    fn sphere_like_cap() {
        let v = to_vonkarman(&spec("0.5*(x1^2+x2^2)", "0"), &MaterialParams::default());
        assert!(close(&v.p, &Expr::zero(), &PTS));
        assert!(close(&v.k, &Expr::one(), &PTS));
    }

    #[test]
    fn sine_product() {
        let v = to_vonkarman(&spec("sin(x1)*sin(x2)", "0.7"), &MaterialParams::default());
        assert!(close(&v.p, &parse("4*sin(x1)*sin(x2) + 0.7").unwrap(), &PTS));
        assert!(close(&v.k, &parse("sin(x1)^2*sin(x2)^2 - cos(x1)^2*cos(x2)^2").unwrap(), &PTS));
    }

    #[test]
    fn boundary_data_gains_trace() {
        let plate = spec("0", "0");
        let bc = BoundaryConditions::default();
        assert_eq!(
            transform_boundary_data(&bc, &plate).unwrap().w.value().eval([1.0, 0.0]).unwrap(),
            0.0
        );
        let t = transform_boundary_data(&bc, &spec("0.5*(x1^2+x2^2)", "0")).unwrap();
        assert_eq!(t.w.value().eval([1.0, 0.0]).unwrap(), 0.5);
        let t = transform_boundary_data(&bc, &spec("0.5*x1^2", "0")).unwrap();
        match t.w {
            BoundaryData::Clamped { normal: EdgeExprs { right, .. }, .. } => {
                assert_eq!(right.eval([1.0, 0.4]).unwrap(), 1.0)
            }
            _ => panic!("kind changed"),
        }
        assert_eq!(t.phi, bc.phi);
        let ss = BoundaryConditions::homogeneous(BcKind::SimplySupported, BcKind::Clamped);
        assert_eq!(transform_boundary_data(&ss, &plate).unwrap().w.kind(), BcKind::SimplySupported);
    }

    #[test]
    fn anisotropic_reduces_to_isotropic() {
        let s = spec("sin(x1)*x2^3 + x1^4", "2");
        let mat = MaterialParams { d: 1.7, e: 1.0, h: 1.0 };
        let (r1, r2) = anisotropic_rhs(&AnisotropicParams::isotropic(&mat), &s);
        let v = to_vonkarman(&s, &mat);
        assert!(close(&r1, &v.p, &PTS));
        assert!(close(&r2, &v.k, &PTS));

        let mut d = Tensor4::default();
        d[0][0][0][0] = 3.0;
        let a = AnisotropicParams::new(d, Tensor4::default()).unwrap();
        let (r1, _) = anisotropic_rhs(&a, &spec("0.5*x1^4", "1"));
        assert!(close(&r1, &Expr::constant(37.0), &PTS));
        let (r1, r2) = anisotropic_rhs(&a, &spec("0", "x2"));
        assert!(close(&r1, &Expr::x2(), &PTS) && r2.is_zero());
    }

    #[test]
    fn asymmetric_tensor_rejected() {
        let mut d = Tensor4::default();
        d[0][1][0][0] = 1.0;
        assert!(matches!(
            AnisotropicParams::new(d, Tensor4::default()),
            Err(EquivalenceError::Asymmetric { tensor: "D", .. })
        ));
    }

    #[test]
    fn substitution_identity_on_trial_fields() {
        let s = spec("0.2*x1^2*x2 - 0.4*cos(x1 + 2*x2)", "1 + x1*x2");
        let mat = MaterialParams { d: 1.3, e: 2.0, h: 0.4 };
        let form = to_vonkarman(&s, &mat);
        let w = parse("x1^3*x2 - sin(2*x2)*x1").unwrap();
        let phi = parse("exp(0.5*x1)*x2^2 + x1*x2^4").unwrap();
        let m = ContinuousResidual::marguerre(&s, &mat, &w, &phi);
        let v = ContinuousResidual::von_karman(&form, &mat, &Expr::sum([w.clone(), s.f.clone()]), &phi);
        for x in PTS {
            let (a, b) = (m.eval(x).unwrap(), v.eval(x).unwrap());
            assert!((a[0] - b[0]).abs() < 1e-9 && (a[1] - b[1]).abs() < 1e-9, "{a:?} {b:?}");
        }
    }
}
