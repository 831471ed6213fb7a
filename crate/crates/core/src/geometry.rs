//! Shallow-shell geometry of the midsurface `x3 = f(x1, x2)`.
//!
//! The metric is the identity and `Δ` is the flat Laplacian; the curvature
//! tensor is the Hessian of `f`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, Point, Var};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid domain [{a1}, {b1}] x [{a2}, {b2}]: need b1 > a1 and b2 > a2")]
    Domain { a1: f64, b1: f64, a2: f64, b2: f64 },
    #[error("shallowness bound epsilon = {0} must lie in (0, 1)")]
    Epsilon(f64),
    #[error("material constants must be strictly positive (D = {d}, E = {e}, h = {h})")]
    Material { d: f64, e: f64, h: f64 },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// Rectangle `[a1, b1] x [a2, b2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain2D {
    pub a1: f64,
    pub b1: f64,
    pub a2: f64,
    pub b2: f64,
}

impl Domain2D {
    pub fn new(a1: f64, b1: f64, a2: f64, b2: f64) -> Result<Self, GeometryError> {
        if !(b1 > a1 && b2 > a2) || ![a1, b1, a2, b2].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::Domain { a1, b1, a2, b2 });
        }
        Ok(Domain2D { a1, b1, a2, b2 })
    }

    pub fn square(a: f64, b: f64) -> Self {
        Domain2D::new(a, b, a, b).expect("valid square")
    }

    pub fn width(&self) -> f64 {
        self.b1 - self.a1
    }

    pub fn height(&self) -> f64 {
        self.b2 - self.a2
    }

    pub fn center(&self) -> Point {
        [0.5 * (self.a1 + self.b1), 0.5 * (self.a2 + self.b2)]
    }

    pub fn contains(&self, x: Point) -> bool {
        x[0] >= self.a1 && x[0] <= self.b1 && x[1] >= self.a2 && x[1] <= self.b2
    }

    /// The rectangle shrunk by `fraction` of its width/height on every side.
    pub fn shrink(&self, fraction: f64) -> Domain2D {
        let d1 = fraction * self.width();
        let d2 = fraction * self.height();
        Domain2D {
            a1: self.a1 + d1,
            b1: self.b1 - d1,
            a2: self.a2 + d2,
            b2: self.b2 - d2,
        }
    }

    /// Uniform `n x n` sample including the corners.
    pub fn uniform_grid(&self, n: usize) -> Vec<Point> {
        let n = n.max(2);
        let mut pts = Vec::with_capacity(n * n);
        for i in 0..n {
            let x1 = self.a1 + self.width() * i as f64 / (n - 1) as f64;
            for j in 0..n {
                let x2 = self.a2 + self.height() * j as f64 / (n - 1) as f64;
                pts.push([x1, x2]);
            }
        }
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShellSpec {
    /// Midsurface height.
    pub f: Expr,
    /// Transverse load per unit area.
    pub p: Expr,
    pub domain: Domain2D,
    /// Shallowness bound; the shell is shallow where `|f,α||f,β| <= ε²`.
    pub epsilon: f64,
}

impl ShellSpec {
    pub fn new(f: Expr, p: Expr, domain: Domain2D, epsilon: f64) -> Result<Self, GeometryError> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(GeometryError::Epsilon(epsilon));
        }
        Ok(ShellSpec {
            f,
            p,
            domain,
            epsilon,
        })
    }
}

/// Bending rigidity `D`, Young's modulus `E` and thickness `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    #[serde(rename = "D")]
    pub d: f64,
    #[serde(rename = "E")]
    pub e: f64,
    pub h: f64,
}

impl MaterialParams {
    pub fn new(d: f64, e: f64, h: f64) -> Result<Self, GeometryError> {
        if !(d > 0.0 && e > 0.0 && h > 0.0) || ![d, e, h].iter().all(|v| v.is_finite()) {
            return Err(GeometryError::Material { d, e, h });
        }
        Ok(MaterialParams { d, e, h })
    }

    /// Compliance `1/(E h)` multiplying `Δ²Φ`.
    pub fn membrane_compliance(&self) -> f64 {
        1.0 / (self.e * self.h)
    }
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            d: 1.0,
            e: 1.0,
            h: 1.0,
        }
    }
}

/// Curvature tensor `b_αβ = f,αβ` (stored once for `b12 = b21`).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    pub b11: Expr,
    pub b12: Expr,
    pub b22: Expr,
}

impl CurvatureTensor {
    pub fn component(&self, a: Var, b: Var) -> &Expr {
        match (a, b) {
            (Var::X1, Var::X1) => &self.b11,
            (Var::X2, Var::X2) => &self.b22,
            _ => &self.b12,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometryFields {
    pub b: CurvatureTensor,
    /// Mean curvature.
    pub h: Expr,
    /// Gaussian curvature.
    pub k: Expr,
    /// Reduced load `2DΔH + p`.
    pub p: Expr,
}

/// Pointwise values of [`GeometryFields`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometrySample {
    pub b11: f64,
    pub b12: f64,
    pub b22: f64,
    pub h: f64,
    pub k: f64,
    pub p: f64,
}

impl GeometryFields {
    pub fn new(spec: &ShellSpec, mat: &MaterialParams) -> Self {
        let b = curvature_tensor(spec);
        GeometryFields {
            h: mean_from(&b),
            k: gauss_from(&b),
            p: reduced_load(spec, mat),
            b,
        }
    }

    pub fn sample(&self, x: Point) -> Result<GeometrySample, EvalError> {
        Ok(GeometrySample {
            b11: self.b.b11.eval(x)?,
            b12: self.b.b12.eval(x)?,
            b22: self.b.b22.eval(x)?,
            h: self.h.eval(x)?,
            k: self.k.eval(x)?,
            p: self.p.eval(x)?,
        })
    }
}

pub fn curvature_tensor(spec: &ShellSpec) -> CurvatureTensor {
    let f1 = spec.f.diff(Var::X1);
    CurvatureTensor {
        b11: f1.diff(Var::X1),
        b12: f1.diff(Var::X2),
        b22: spec.f.diff_n(&[Var::X2, Var::X2]),
    }
}

fn mean_from(b: &CurvatureTensor) -> Expr {
    Expr::scale(0.5, Expr::sum([b.b11.clone(), b.b22.clone()]))
}

fn gauss_from(b: &CurvatureTensor) -> Expr {
    Expr::sub(
        Expr::product([b.b11.clone(), b.b22.clone()]),
        Expr::product([b.b12.clone(), b.b12.clone()]),
    )
}

/// `H = (f,11 + f,22) / 2`.
pub fn mean_curvature(spec: &ShellSpec) -> Expr {
    mean_from(&curvature_tensor(spec))
}

/// `K = f,11 f,22 - (f,12)²`, the contraction `½ e^{αμ} e^{βν} f,αβ f,μν`.
pub fn gauss_curvature(spec: &ShellSpec) -> Expr {
    gauss_from(&curvature_tensor(spec))
}

/// `P = 2D (H,11 + H,22) + p`.
pub fn reduced_load(spec: &ShellSpec, mat: &MaterialParams) -> Expr {
    let h = mean_curvature(spec);
    Expr::sum([Expr::scale(2.0 * mat.d, h.laplacian()), spec.p.clone()])
}

/// Points per axis of the shallowness sample grid.
pub const SHALLOWNESS_GRID: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Shallowness {
    /// Largest `max(|f,1|, |f,2|)²` on the sample grid.
    pub max_slope_product: f64,
    pub epsilon: f64,
    pub ok: bool,
}

/// Reports whether `|f,α||f,β| <= ε²` holds on a 201 x 201 sample of the
/// domain. Points where the slope cannot be evaluated count as violations.
pub fn shallowness_check(spec: &ShellSpec) -> Shallowness {
    let f1 = spec.f.diff(Var::X1);
    let f2 = spec.f.diff(Var::X2);
    let mut worst: f64 = 0.0;
    for x in spec.domain.uniform_grid(SHALLOWNESS_GRID) {
        let s = match (f1.eval(x), f2.eval(x)) {
            (Ok(a), Ok(b)) => a.abs().max(b.abs()),
            _ => f64::INFINITY,
        };
        worst = worst.max(s * s);
    }
    let bound = spec.epsilon * spec.epsilon;
    Shallowness {
        max_slope_product: worst,
        epsilon: spec.epsilon,
        ok: worst <= bound,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn spec(f: &str, p: &str) -> ShellSpec {
        ShellSpec::new(
            parse(f).unwrap(),
            parse(p).unwrap(),
            Domain2D::square(0.0, PI),
            0.2,
        )
        .unwrap()
    }

    /// Second-order central Hessian of `e`; independent of symbolic diff.
    fn fd_hessian(e: &Expr, x: Point, h: f64) -> [f64; 3] {
        let v = |dx: f64, dy: f64| e.eval([x[0] + dx, x[1] + dy]).unwrap();
        let c = v(0.0, 0.0);
        [
            (v(h, 0.0) - 2.0 * c + v(-h, 0.0)) / (h * h),
            (v(h, h) - v(h, -h) - v(-h, h) + v(-h, -h)) / (4.0 * h * h),
            (v(0.0, h) - 2.0 * c + v(0.0, -h)) / (h * h),
        ]
    }

    #[test]
    fn plate_has_no_curvature() {
        let s = spec("0", "0");
        let b = curvature_tensor(&s);
        assert!(b.b11.is_zero() && b.b12.is_zero() && b.b22.is_zero());
        assert!(reduced_load(&s, &MaterialParams::default()).is_zero());
    }

    #[test]
    fn paraboloid_curvatures() {
        let s = spec("0.5*(x1^2+x2^2)", "0");
        let b = curvature_tensor(&s);
        assert_eq!((b.b11.clone(), b.b12.clone(), b.b22.clone()), (Expr::one(), Expr::zero(), Expr::one()));
        assert_eq!(mean_curvature(&s).eval([0.3, 0.2]).unwrap(), 1.0);
        assert_eq!(gauss_curvature(&s).eval([0.3, 0.2]).unwrap(), 1.0);
        assert_eq!(reduced_load(&s, &MaterialParams::default()).eval([0.3, 0.2]).unwrap(), 0.0);
    }

    #[test]
    fn parabolic_cylinder() {
        let s = spec("0.5*x1^2", "0");
        assert_eq!(mean_curvature(&s).eval([1.0, 2.0]).unwrap(), 0.5);
        assert_eq!(gauss_curvature(&s).eval([1.0, 2.0]).unwrap(), 0.0);
    }

    #[test]
    fn sin_sin_curvatures_against_finite_differences() {
        let s = spec("sin(x1)*sin(x2)", "0");
        let b = curvature_tensor(&s);
        let c = [FRAC_PI_2, FRAC_PI_2];
        assert!(b.b12.eval(c).unwrap().abs() < 1e-15);
        assert!((b.b11.eval(c).unwrap() + 1.0).abs() < 1e-15);
        assert!((gauss_curvature(&s).eval([0.0, 0.0]).unwrap() + 1.0).abs() < 1e-15);
        for x in [[0.4, 1.3], [2.0, 0.7], [1.1, 2.9]] {
            let fd = fd_hessian(&s.f, x, 1e-4);
            let sym = [b.b11.eval(x).unwrap(), b.b12.eval(x).unwrap(), b.b22.eval(x).unwrap()];
            for k in 0..3 {
                assert!((fd[k] - sym[k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn sin_sin_reduced_load() {
        let s = spec("sin(x1)*sin(x2)", "0");
        let p = reduced_load(&s, &MaterialParams::default());
        for x in [[0.4, 1.3], [2.0, 0.7], [1.1, 2.9]] {
            let expect = 4.0 * f64::sin(x[0]) * f64::sin(x[1]);
            assert!((p.eval(x).unwrap() - expect).abs() < 1e-13);
        }
        // Finite-difference biharmonic of sampled f (13-point stencil, h = 1e-2).
        let h = 1e-2;
        let x = [1.0, 1.2];
        let f = |i: f64, j: f64| s.f.eval([x[0] + i * h, x[1] + j * h]).unwrap();
        let bih = (20.0 * f(0., 0.) - 8.0 * (f(1., 0.) + f(-1., 0.) + f(0., 1.) + f(0., -1.))
            + 2.0 * (f(1., 1.) + f(1., -1.) + f(-1., 1.) + f(-1., -1.))
            + f(2., 0.) + f(-2., 0.) + f(0., 2.) + f(0., -2.))
            / h.powi(4);
        assert!((bih - p.eval(x).unwrap()).abs() < 1e-3);
    }

    #[test]
    fn reduced_load_on_plate_is_load() {
        let s = spec("0", "3*x1 + cos(x2)");
        let p = reduced_load(&s, &MaterialParams { d: 7.0, e: 1.0, h: 1.0 });
        assert_eq!(p, s.p);
    }

    #[test]
    fn shallowness_examples() {
        let r = shallowness_check(&spec("0", "0"));
        assert_eq!(r.max_slope_product, 0.0);
        assert!(r.ok);

        let r = shallowness_check(&spec("0.1*sin(x1)*sin(x2)", "0"));
        assert!((r.max_slope_product - 0.01).abs() < 1e-12);
        assert!(r.ok);

        let mut s = spec("x1", "0");
        s.domain = Domain2D::square(0.0, 1.0);
        let r = shallowness_check(&s);
        assert_eq!(r.max_slope_product, 1.0);
        assert!(!r.ok);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(Domain2D::new(1.0, 0.0, 0.0, 1.0).is_err());
        assert!(ShellSpec::new(Expr::zero(), Expr::zero(), Domain2D::square(0.0, 1.0), 1.0).is_err());
        assert!(MaterialParams::new(1.0, 0.0, 1.0).is_err());
    }
}
