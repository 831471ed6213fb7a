//! Point-symmetry generators of the Marguerre system and their group
//! classification for a given midsurface and load.
//!
//! A generator is `X = ξ^μ ∂/∂x^μ + η ∂/∂w + φ ∂/∂Φ` with
//!
//! ```text
//! ξ¹ =  C1 x1 + C2 x2 + C3
//! ξ² = -C2 x1 + C1 x2 + C4
//! η  = -ξ^μ f,μ + A1 x1 + A2 x2 + A3
//! φ  =  B1 x1 + B2 x2 + B3
//! ```
//!
//! and it is admitted iff `2Pξ^μ,μ + ξ^μ P,μ = 0` and `2Kξ^μ,μ + ξ^μ K,μ = 0`
//! where `P` is the reduced load and `K` the Gaussian curvature. Both
//! conditions are linear in `(C1..C4)`, so the admitted homothetic part is the
//! nullspace of a sampled coefficient matrix.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{EvalError, Expr, Point, Var};
use crate::geometry::{GeometryFields, MaterialParams, ShellSpec};

/// Dimension of the kernel algebra admitted for every midsurface and load:
/// `∂w, x1∂w, x2∂w, ∂Φ, x1∂Φ, x2∂Φ`.
pub const KERNEL_DIMENSION: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Generator {
    /// Homothetic-motion parameters `C1..C4`.
    pub c: [f64; 4],
    /// Affine part `A1..A3` of `η`.
    pub a: [f64; 3],
    /// Affine part `B1..B3` of `φ`.
    pub b: [f64; 3],
}

impl Generator {
    pub fn homothetic(c: [f64; 4]) -> Self {
        Generator {
            c,
            ..Default::default()
        }
    }

    /// All ten parameters in the order `C1..C4, A1..A3, B1..B3`.
    pub fn from_params(p: [f64; 10]) -> Self {
        Generator {
            c: [p[0], p[1], p[2], p[3]],
            a: [p[4], p[5], p[6]],
            b: [p[7], p[8], p[9]],
        }
    }

    pub fn params(&self) -> [f64; 10] {
        let [c1, c2, c3, c4] = self.c;
        let [a1, a2, a3] = self.a;
        let [b1, b2, b3] = self.b;
        [c1, c2, c3, c4, a1, a2, a3, b1, b2, b3]
    }

    pub fn xi(&self, x: Point) -> [f64; 2] {
        let [c1, c2, c3, c4] = self.c;
        [c1 * x[0] + c2 * x[1] + c3, -c2 * x[0] + c1 * x[1] + c4]
    }

    /// `∂ξ^μ/∂x^ν` as `[μ][ν]`.
    pub fn xi_jacobian(&self) -> [[f64; 2]; 2] {
        let [c1, c2, _, _] = self.c;
        [[c1, c2], [-c2, c1]]
    }

    /// `ξ^μ,μ`, identically `2 C1`.
    pub fn divergence(&self) -> f64 {
        2.0 * self.c[0]
    }

    pub fn xi_exprs(&self) -> [Expr; 2] {
        let [c1, c2, c3, c4] = self.c;
        let affine = |a: f64, b: f64, c: f64| {
            Expr::sum([
                Expr::scale(a, Expr::x1()),
                Expr::scale(b, Expr::x2()),
                Expr::Const(c),
            ])
        };
        [affine(c1, c2, c3), affine(-c2, c1, c4)]
    }

    /// `η = -ξ^μ f,μ + A1 x1 + A2 x2 + A3` as an expression.
    pub fn eta_expr(&self, f: &Expr) -> Expr {
        let [xi1, xi2] = self.xi_exprs();
        let [a1, a2, a3] = self.a;
        Expr::sum([
            Expr::neg(Expr::sum([
                Expr::product([xi1, f.diff(Var::X1)]),
                Expr::product([xi2, f.diff(Var::X2)]),
            ])),
            Expr::scale(a1, Expr::x1()),
            Expr::scale(a2, Expr::x2()),
            Expr::Const(a3),
        ])
    }

    pub fn phi(&self, x: Point) -> f64 {
        self.b[0] * x[0] + self.b[1] * x[1] + self.b[2]
    }

    pub fn eta_affine(&self, x: Point) -> f64 {
        self.a[0] * x[0] + self.a[1] * x[1] + self.a[2]
    }
}

/// `(ξ¹, ξ², η, φ)` at `x`.
pub fn xi_eta_phi(gen: &Generator, spec: &ShellSpec, x: Point) -> Result<[f64; 4], EvalError> {
    let xi = gen.xi(x);
    let f1 = spec.f.diff(Var::X1).eval(x)?;
    let f2 = spec.f.diff(Var::X2).eval(x)?;
    let eta = -(xi[0] * f1 + xi[1] * f2) + gen.eta_affine(x);
    Ok([xi[0], xi[1], eta, gen.phi(x)])
}

/// `P`, `K` and their first derivatives, prepared for repeated evaluation.
#[derive(Debug, Clone)]
pub struct InvarianceFields {
    p: [Expr; 3],
    k: [Expr; 3],
}

/// Values `[P, P,1, P,2]` and `[K, K,1, K,2]` at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceSample {
    pub x: Point,
    pub p: [f64; 3],
    pub k: [f64; 3],
}

impl InvarianceFields {
    pub fn new(p: &Expr, k: &Expr) -> Self {
        let jet = |e: &Expr| [e.clone(), e.diff(Var::X1), e.diff(Var::X2)];
        InvarianceFields { p: jet(p), k: jet(k) }
    }

    pub fn from_spec(spec: &ShellSpec, mat: &MaterialParams) -> Self {
        let g = GeometryFields::new(spec, mat);
        Self::new(&g.p, &g.k)
    }

    pub fn sample(&self, x: Point) -> Result<InvarianceSample, EvalError> {
        let ev = |j: &[Expr; 3]| -> Result<[f64; 3], EvalError> {
            Ok([j[0].eval(x)?, j[1].eval(x)?, j[2].eval(x)?])
        };
        Ok(InvarianceSample {
            x,
            p: ev(&self.p)?,
            k: ev(&self.k)?,
        })
    }
}

/// Coefficients of `(C1, C2, C3, C4)` in `2Gξ^μ,μ + ξ^μ G,μ` for a field `G`
/// with value and gradient `g = [G, G,1, G,2]` at `x`.
pub fn condition_row(g: [f64; 3], x: Point) -> [f64; 4] {
    [
        4.0 * g[0] + x[0] * g[1] + x[1] * g[2],
        x[1] * g[1] - x[0] * g[2],
        g[1],
        g[2],
    ]
}

impl InvarianceSample {
    pub fn rows(&self) -> [[f64; 4]; 2] {
        [condition_row(self.p, self.x), condition_row(self.k, self.x)]
    }

    /// `(rP, rK)` for the homothetic part `c`, evaluated directly from `ξ`.
    pub fn residuals(&self, gen: &Generator) -> (f64, f64) {
        let xi = gen.xi(self.x);
        let div = gen.divergence();
        let r = |g: [f64; 3]| 2.0 * g[0] * div + xi[0] * g[1] + xi[1] * g[2];
        (r(self.p), r(self.k))
    }
}

/// `rP = 2P ξ^μ,μ + ξ^μ P,μ` and `rK` likewise, at `x`.
pub fn invariance_residuals(
    gen: &Generator,
    p: &Expr,
    k: &Expr,
    x: Point,
) -> Result<(f64, f64), EvalError> {
    Ok(InvarianceFields::new(p, k).sample(x)?.residuals(gen))
}

/// `2N x 4` matrix whose row `2k` is the `P` condition and row `2k+1` the `K`
/// condition at `points[k]`; columns are `(C1, C2, C3, C4)`.
pub fn assemble_classification_matrix(
    p: &Expr,
    k: &Expr,
    points: &[Point],
) -> Result<DMatrix<f64>, EvalError> {
    let fields = InvarianceFields::new(p, k);
    assemble_from_fields(&fields, points)
}

fn assemble_from_fields(fields: &InvarianceFields, points: &[Point]) -> Result<DMatrix<f64>, EvalError> {
    let samples = points
        .par_iter()
        .map(|&x| fields.sample(x))
        .collect::<Result<Vec<_>, _>>()?;
    let mut m = DMatrix::zeros(2 * points.len(), 4);
    for (i, s) in samples.iter().enumerate() {
        for (r, row) in s.rows().iter().enumerate() {
            for c in 0..4 {
                m[(2 * i + r, c)] = row[c];
            }
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleScheme {
    /// Halton points (bases 2 and 3) starting after `skip` terms.
    Halton { skip: usize },
    /// Uniform random points from the given seed.
    Random { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub n_samples: usize,
    pub svd_tol: f64,
    pub svd_floor: f64,
    /// Fraction of the domain width kept free of sample points at each edge.
    pub boundary_layer: f64,
    pub scheme: SampleScheme,
    /// Points per axis of the dense verification grid.
    pub verify_grid: usize,
    pub verify_random: usize,
    /// Relative residual above which a nullspace vector is rejected.
    pub verify_tol: f64,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            n_samples: 64,
            svd_tol: 1e-8,
            svd_floor: 1e-12,
            boundary_layer: 0.05,
            scheme: SampleScheme::Halton { skip: 0 },
            verify_grid: 101,
            verify_random: 500,
            verify_tol: 1e-6,
            seed: 42,
        }
    }
}

fn radical_inverse(mut i: usize, base: usize) -> f64 {
    let inv = 1.0 / base as f64;
    let mut r = 0.0;
    let mut scale = inv;
    while i > 0 {
        r += (i % base) as f64 * scale;
        i /= base;
        scale *= inv;
    }
    r
}

/// Classification sample points inside the boundary-layer-shrunk domain.
pub fn sample_points(spec: &ShellSpec, cfg: &SamplingConfig) -> Vec<Point> {
    let d = spec.domain.shrink(cfg.boundary_layer);
    let place = |u: f64, v: f64| [d.a1 + u * d.width(), d.a2 + v * d.height()];
    match cfg.scheme {
        SampleScheme::Halton { skip } => (0..cfg.n_samples)
            .map(|i| place(radical_inverse(skip + i + 1, 2), radical_inverse(skip + i + 1, 3)))
            .collect(),
        SampleScheme::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..cfg.n_samples)
                .map(|_| place(rng.gen(), rng.gen()))
                .collect()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Characterization {
    /// `C1 = 0`: `P` and `K` are invariants of the one-parameter group.
    Invariant,
    /// `C1 != 0`: `P` and `K` are eigenfunctions of `ξ^μ ∂_μ` with this eigenvalue.
    Eigenfunction { eigenvalue: f64 },
}

/// Geometric type of a homothetic generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    Translation,
    Rotation,
    Homothety,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtraGenerator {
    /// Unit vector in `(C1, C2, C3, C4)` space.
    pub c: [f64; 4],
    pub characterization: Characterization,
    pub motion: MotionKind,
    /// Largest relative invariance residual on the verification points.
    pub verification_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationResult {
    pub nullity: usize,
    pub basis: Vec<ExtraGenerator>,
    /// Descending.
    pub singular_values: [f64; 4],
    pub rank_threshold: f64,
    pub algebra_dimension: usize,
    /// Nullspace directions rejected by dense-grid verification.
    pub spurious: Vec<[f64; 4]>,
}

#[derive(Debug, Error)]
pub enum ClassifyError {
    #[error("need at least 4 sample points, got {0}")]
    TooFewSamples(usize),
    #[error("cannot evaluate invariance conditions: {0}")]
    Eval(#[from] EvalError),
}

/// Orthonormal, deterministic basis of the row space of `vectors`: reduced
/// row echelon form followed by Gram-Schmidt, each vector signed so its
/// largest-magnitude component is positive.
pub fn canonical_basis(vectors: &[[f64; 4]]) -> Vec<[f64; 4]> {
    let mut rows: Vec<[f64; 4]> = vectors.to_vec();
    let mut lead = 0;
    let mut r = 0;
    while r < rows.len() && lead < 4 {
        let piv = (r..rows.len())
            .max_by(|&a, &b| rows[a][lead].abs().total_cmp(&rows[b][lead].abs()))
            .unwrap();
        if rows[piv][lead].abs() < 1e-10 {
            lead += 1;
            continue;
        }
        rows.swap(r, piv);
        let pv = rows[r][lead];
        for c in 0..4 {
            rows[r][c] /= pv;
        }
        for i in 0..rows.len() {
            if i != r {
                let m = rows[i][lead];
                for c in 0..4 {
                    rows[i][c] -= m * rows[r][c];
                }
            }
        }
        r += 1;
        lead += 1;
    }
    rows.truncate(r);
    let mut out: Vec<[f64; 4]> = Vec::new();
    for mut v in rows {
        for u in &out {
            let d: f64 = (0..4).map(|c| v[c] * u[c]).sum();
            for c in 0..4 {
                v[c] -= d * u[c];
            }
        }
        let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        for c in &mut v {
            *c /= n;
            if c.abs() < 1e-15 {
                *c = 0.0;
            }
        }
        let big = v.iter().copied().fold(0.0f64, |m, a| if a.abs() > m.abs() { a } else { m });
        if big < 0.0 {
            for c in &mut v {
                *c = -*c;
            }
        }
        out.push(v);
    }
    out
}

fn motion_kind(c: [f64; 4], tol: f64) -> MotionKind {
    if c[0].abs() >= tol {
        MotionKind::Homothety
    } else if c[1].abs() >= tol {
        MotionKind::Rotation
    } else {
        MotionKind::Translation
    }
}

/// Verification points: a dense uniform grid plus seeded random points, all
/// inside the boundary-layer-shrunk domain.
pub fn verification_points(spec: &ShellSpec, cfg: &SamplingConfig) -> Vec<Point> {
    let d = spec.domain.shrink(cfg.boundary_layer);
    let mut pts = d.uniform_grid(cfg.verify_grid);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.verify_random {
        pts.push([
            rng.gen_range(d.a1..=d.b1),
            rng.gen_range(d.a2..=d.b2),
        ]);
    }
    pts
}

/// Largest relative invariance residual of the homothetic part `c` over the
/// sampled points: `max |row·c| / max Σ|row_j c_j|` (zero if every term vanishes).
pub fn relative_invariance_residual(samples: &[InvarianceSample], c: [f64; 4]) -> f64 {
    let mut num: f64 = 0.0;
    let mut den: f64 = 0.0;
    for s in samples {
        for row in s.rows() {
            let r: f64 = (0..4).map(|j| row[j] * c[j]).sum();
            let a: f64 = (0..4).map(|j| (row[j] * c[j]).abs()).sum();
            num = num.max(r.abs());
            den = den.max(a);
        }
    }
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Determines the admitted homothetic generators for `spec`.
pub fn classify(
    spec: &ShellSpec,
    mat: &MaterialParams,
    cfg: &SamplingConfig,
) -> Result<ClassificationResult, ClassifyError> {
    if cfg.n_samples < 4 {
        return Err(ClassifyError::TooFewSamples(cfg.n_samples));
    }
    let fields = InvarianceFields::from_spec(spec, mat);
    let m = assemble_from_fields(&fields, &sample_points(spec, cfg))?;
    let svd = m.svd(false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut sv = [0.0; 4];
    for (k, &i) in order.iter().enumerate() {
        sv[k] = svd.singular_values[i];
    }
    let threshold = cfg.svd_tol * sv[0].max(cfg.svd_floor);
    let null: Vec<[f64; 4]> = order
        .iter()
        .filter(|&&i| svd.singular_values[i] < threshold)
        .map(|&i| [v_t[(i, 0)], v_t[(i, 1)], v_t[(i, 2)], v_t[(i, 3)]])
        .collect();

    let candidates = canonical_basis(&null);
    let checks = verification_points(spec, cfg)
        .par_iter()
        .map(|&x| fields.sample(x))
        .collect::<Result<Vec<_>, _>>()?;

    let mut basis = Vec::new();
    let mut spurious = Vec::new();
    for c in candidates {
        let res = relative_invariance_residual(&checks, c);
        if res > cfg.verify_tol {
            spurious.push(c);
            continue;
        }
        let characterization = if c[0].abs() < cfg.svd_tol {
            Characterization::Invariant
        } else {
            Characterization::Eigenfunction {
                eigenvalue: -4.0 * c[0],
            }
        };
        basis.push(ExtraGenerator {
            c,
            characterization,
            motion: motion_kind(c, cfg.svd_tol),
            verification_residual: res,
        });
    }
    Ok(ClassificationResult {
        nullity: basis.len(),
        algebra_dimension: KERNEL_DIMENSION + basis.len(),
        basis,
        singular_values: sv,
        rank_threshold: threshold,
        spurious,
    })
}

/// Residuals of the full determining equations for one generator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FullDeResiduals {
    /// `b_αμ ξ^μ,β + b_βμ ξ^μ,α + ξ^μ b_αβ,μ + η,αβ` for `αβ = 11, 12, 22`.
    pub curvature: [f64; 3],
    /// `e^{αμ} e^{βν} b_αβ η,μν`.
    pub bracket: f64,
    /// `DΔ²η - 2p ξ^μ,μ - ξ^μ p,μ`.
    pub load: f64,
}

impl FullDeResiduals {
    pub fn max_abs(&self) -> f64 {
        self.curvature
            .iter()
            .chain([&self.bracket, &self.load])
            .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

/// Prepared expressions for evaluating [`FullDeResiduals`] of one generator
/// at many points, with `η` built symbolically from its reduced form.
pub struct FullDeSystem {
    gen: Generator,
    d: f64,
    b: [Expr; 3],
    /// `b_αβ,μ` as `[component][μ]`.
    db: [[Expr; 2]; 3],
    eta2: [Expr; 3],
    eta_bih: Expr,
    p: [Expr; 3],
}

const PAIRS: [(Var, Var); 3] = [(Var::X1, Var::X1), (Var::X1, Var::X2), (Var::X2, Var::X2)];

impl FullDeSystem {
    pub fn new(gen: &Generator, spec: &ShellSpec, mat: &MaterialParams) -> Self {
        let b = PAIRS.map(|(a, c)| spec.f.diff_n(&[a, c]));
        let db = [0, 1, 2].map(|k| [b[k].diff(Var::X1), b[k].diff(Var::X2)]);
        let eta = gen.eta_expr(&spec.f);
        FullDeSystem {
            gen: *gen,
            d: mat.d,
            eta2: PAIRS.map(|(a, c)| eta.diff_n(&[a, c])),
            eta_bih: eta.biharmonic(),
            b,
            db,
            p: [spec.p.clone(), spec.p.diff(Var::X1), spec.p.diff(Var::X2)],
        }
    }

    pub fn eval(&self, x: Point) -> Result<FullDeResiduals, EvalError> {
        let b = [self.b[0].eval(x)?, self.b[1].eval(x)?, self.b[2].eval(x)?];
        let bm = |i: usize, j: usize| match (i, j) {
            (0, 0) => b[0],
            (1, 1) => b[2],
            _ => b[1],
        };
        let xi = self.gen.xi(x);
        let jac = self.gen.xi_jacobian();
        let mut curvature = [0.0; 3];
        for (k, (a, c)) in PAIRS.iter().enumerate() {
            let (al, be) = (a.index(), c.index());
            let mut r = self.eta2[k].eval(x)?;
            for mu in 0..2 {
                r += bm(al, mu) * jac[mu][be] + bm(be, mu) * jac[mu][al];
                r += xi[mu] * self.db[k][mu].eval(x)?;
            }
            curvature[k] = r;
        }
        let e = [self.eta2[0].eval(x)?, self.eta2[1].eval(x)?, self.eta2[2].eval(x)?];
        let bracket = b[0] * e[2] + b[2] * e[0] - 2.0 * b[1] * e[1];
        let p = [self.p[0].eval(x)?, self.p[1].eval(x)?, self.p[2].eval(x)?];
        let load = self.d * self.eta_bih.eval(x)?
            - 2.0 * p[0] * self.gen.divergence()
            - (xi[0] * p[1] + xi[1] * p[2]);
        Ok(FullDeResiduals {
            curvature,
            bracket,
            load,
        })
    }
}

pub fn check_full_de(
    gen: &Generator,
    spec: &ShellSpec,
    mat: &MaterialParams,
    x: Point,
) -> Result<FullDeResiduals, EvalError> {
    FullDeSystem::new(gen, spec, mat).eval(x)
}
