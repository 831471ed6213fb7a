#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use shellsym::expr::{parse, Expr, Point};

/// Random smooth midsurface on the unit square.
pub fn random_surface(rng: &mut ChaCha8Rng) -> String {
    let c = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    format!(
        "{:.6}*sin({:.6}*x1 + {:.6}*x2) + {:.6}*x1^2*x2 + {:.6}*exp({:.6}*x1)*cos({:.6}*x2) + {:.6}*x1*x2^3",
        0.3 * c(rng),
        1.0 + c(rng),
        1.0 + c(rng),
        0.2 * c(rng),
        0.2 * c(rng),
        c(rng),
        2.0 * c(rng),
        0.1 * c(rng)
    )
}

pub fn random_load(rng: &mut ChaCha8Rng) -> String {
    let c = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    format!(
        "{:.6}*cos({:.6}*x1) + {:.6}*x2^2 + {:.6}",
        c(rng),
        2.0 * c(rng),
        c(rng),
        c(rng)
    )
}

/// Random smooth trial field.
pub fn random_field(rng: &mut ChaCha8Rng) -> Expr {
    let c = |rng: &mut ChaCha8Rng| rng.gen_range(-1.0..1.0);
    parse(&format!(
        "{:.6}*sin(x1*x2 + {:.6}) + {:.6}*x1^3 + {:.6}*cos(x1 + {:.6}*x2)*x2^2",
        c(rng),
        c(rng),
        c(rng),
        c(rng),
        c(rng)
    ))
    .unwrap()
}

pub fn random_point(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Point {
    [rng.gen_range(lo..hi), rng.gen_range(lo..hi)]
}

/// Central-difference derivatives of a closure, independent of the symbolic
/// engine.
pub struct Fd<F: Fn(Point) -> f64> {
    pub f: F,
}

impl<F: Fn(Point) -> f64> Fd<F> {
    pub fn d2(&self, x: Point, h: f64) -> [f64; 3] {
        let f = &self.f;
        let v = f(x);
        let d11 = (f([x[0] + h, x[1]]) - 2.0 * v + f([x[0] - h, x[1]])) / (h * h);
        let d22 = (f([x[0], x[1] + h]) - 2.0 * v + f([x[0], x[1] - h])) / (h * h);
        let d12 = (f([x[0] + h, x[1] + h]) - f([x[0] + h, x[1] - h]) - f([x[0] - h, x[1] + h])
            + f([x[0] - h, x[1] - h]))
            / (4.0 * h * h);
        [d11, d12, d22]
    }

    /// 13-point biharmonic.
    pub fn biharmonic(&self, x: Point, h: f64) -> f64 {
        let f = |a: f64, b: f64| (self.f)([x[0] + a * h, x[1] + b * h]);
        (20.0 * f(0.0, 0.0) - 8.0 * (f(1.0, 0.0) + f(-1.0, 0.0) + f(0.0, 1.0) + f(0.0, -1.0))
            + 2.0 * (f(1.0, 1.0) + f(1.0, -1.0) + f(-1.0, 1.0) + f(-1.0, -1.0))
            + f(2.0, 0.0)
            + f(-2.0, 0.0)
            + f(0.0, 2.0)
            + f(0.0, -2.0))
            / h.powi(4)
    }

    pub fn gradient(&self, x: Point, h: f64) -> [f64; 2] {
        let f = &self.f;
        [
            (f([x[0] + h, x[1]]) - f([x[0] - h, x[1]])) / (2.0 * h),
            (f([x[0], x[1] + h]) - f([x[0], x[1] - h])) / (2.0 * h),
        ]
    }
}

/// Coefficients of `(C1, C2, C3, C4)` in `ξ(g) + 4 C1 g` for the plane field
/// `ξ = (C1 x1 + C2 x2 + C3, -C2 x1 + C1 x2 + C4)`.
pub fn homothetic_row(g: f64, grad: [f64; 2], x: Point) -> [f64; 4] {
    [
        x[0] * grad[0] + x[1] * grad[1] + 4.0 * g,
        x[1] * grad[0] - x[0] * grad[1],
        grad[0],
        grad[1],
    ]
}

/// Reduced invariance conditions for `P = DΔ²f + p` and `K = det ∇²f`,
/// evaluated by finite differences on an `n × n` grid covering
/// `[lo, hi]²`. One row per condition and grid point.
pub fn dense_reduced_matrix(
    f: impl Fn(Point) -> f64 + Copy,
    p: impl Fn(Point) -> f64 + Copy,
    d: f64,
    lo: f64,
    hi: f64,
    n: usize,
) -> nalgebra::DMatrix<f64> {
    let big_p = move |x: Point| d * Fd { f }.biharmonic(x, 0.05) + p(x);
    let big_k = move |x: Point| {
        let [a, b, c] = Fd { f }.d2(x, 1e-3);
        a * c - b * b
    };
    let mut rows = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let x = [
                lo + (hi - lo) * i as f64 / (n - 1) as f64,
                lo + (hi - lo) * j as f64 / (n - 1) as f64,
            ];
            rows.push(homothetic_row(big_p(x), Fd { f: big_p }.gradient(x, 1e-2), x));
            rows.push(homothetic_row(big_k(x), Fd { f: big_k }.gradient(x, 1e-2), x));
        }
    }
    nalgebra::DMatrix::from_fn(rows.len(), 4, |r, c| rows[r][c])
}

/// Numerical nullity of `m` at tolerance `tol` relative to the largest
/// singular value, or absolute when that is below one; also the singular
/// values in descending order.
pub fn nullity(m: &nalgebra::DMatrix<f64>, tol: f64) -> (usize, Vec<f64>) {
    let mut sv: Vec<f64> = m.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let cut = tol * sv[0].max(1.0);
    (sv.iter().filter(|&&s| s < cut).count(), sv)
}

/// `|M c| / (max(|M|, 1) |c|)`.
pub fn relative_residual(m: &nalgebra::DMatrix<f64>, c: [f64; 4]) -> f64 {
    let v = nalgebra::DVector::from_row_slice(&c);
    (m * &v).norm() / m.norm().max(1.0) * v.norm()
}
