//! Discrete Marguerre and von Kármán systems: data, residual and Jacobian.
//!
//! Marguerre:
//! ```text
//! r1 = D Δ²w - [w, Φ] - [b, Φ] - p
//! r2 = (1/Eh) Δ²Φ + ½[w, w] + [b, w]
//! ```
//! von Kármán with right-hand sides `P`, `K`:
//! ```text
//! r1 = D Δ²w̃ - [w̃, Φ] - P
//! r2 = (1/Eh) Δ²Φ + ½[w̃, w̃] - K
//! ```

use serde::{Deserialize, Serialize};

use crate::expr::Expr;
use crate::geometry::{gauss_curvature, reduced_load, CurvatureTensor, MaterialParams, ShellSpec};

use super::band::BandMatrix;
use super::bc::{BoundaryConditions, BoundaryData, Extended, SampledBc};
use super::grid::{FieldGrid, Grid};
use super::stencil::{biharmonic_at, biharmonic_taps, bracket_of, hessian_at, hessian_taps, Tap};
use super::SolverError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum System {
    Marguerre,
    #[serde(rename = "vonkarman")]
    VonKarman,
}

/// How curvature and right-hand sides are put on the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSampling {
    /// `b`, `P`, `K` from the same stencils applied to sampled `f`; the
    /// Marguerre and transformed von Kármán systems are then related exactly.
    Stencil,
    /// `b`, `P`, `K` sampled from their closed forms.
    Symbolic,
}

/// A discrete system ready for Newton iteration.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: System,
    pub grid: Grid,
    pub mat: MaterialParams,
    /// `p` (Marguerre) or `P` (von Kármán) at interior nodes.
    pub load: FieldGrid,
    /// `K` at interior nodes; zero for Marguerre.
    pub gauss: FieldGrid,
    /// `[b11, b12, b22]` at interior nodes; `None` for von Kármán.
    pub curvature: Option<[FieldGrid; 3]>,
    pub(crate) bc_w: SampledBc,
    pub(crate) bc_phi: SampledBc,
}

fn interior_samples(grid: Grid, e: &Expr) -> Result<FieldGrid, SolverError> {
    let mut f = FieldGrid::zeros(grid);
    for i in 1..=grid.n1 {
        for j in 1..=grid.n2 {
            f.set(i, j, e.eval(grid.x(i, j))?);
        }
    }
    Ok(f)
}

fn interior_hessian(f: &FieldGrid) -> [FieldGrid; 3] {
    super::stencil::hessian(f)
}

impl Problem {
    /// Marguerre system for `spec` with boundary data `bc` on `(w, Φ)`.
    pub fn marguerre(
        spec: &ShellSpec,
        mat: &MaterialParams,
        grid: Grid,
        bc: &BoundaryConditions,
        sampling: DataSampling,
    ) -> Result<Problem, SolverError> {
        let curvature = match sampling {
            DataSampling::Stencil => interior_hessian(&FieldGrid::sample(grid, &spec.f)?),
            DataSampling::Symbolic => {
                let b = crate::geometry::curvature_tensor(spec);
                let CurvatureTensor { b11, b12, b22 } = b;
                [
                    interior_samples(grid, &b11)?,
                    interior_samples(grid, &b12)?,
                    interior_samples(grid, &b22)?,
                ]
            }
        };
        Ok(Problem {
            system: System::Marguerre,
            grid,
            mat: *mat,
            load: interior_samples(grid, &spec.p)?,
            gauss: FieldGrid::zeros(grid),
            curvature: Some(curvature),
            bc_w: bc.w.sample(&grid)?,
            bc_phi: bc.phi.sample(&grid)?,
        })
    }

    /// Nonhomogeneous von Kármán system obtained from `spec` by `w̃ = w + f`.
    /// `bc` holds the data for `(w̃, Φ)`, i.e. already transformed.
    ///
    /// With [`DataSampling::Stencil`], `P = DΔ²f + p` uses the discrete
    /// biharmonic with `f`'s own boundary data of the deflection's condition
    /// kind and `K = ½[f, f]` uses the discrete bracket.
    pub fn von_karman_from_shell(
        spec: &ShellSpec,
        mat: &MaterialParams,
        grid: Grid,
        bc: &BoundaryConditions,
        sampling: DataSampling,
    ) -> Result<Problem, SolverError> {
        let (load, gauss) = match sampling {
            DataSampling::Stencil => {
                let f = FieldGrid::sample(grid, &spec.f)?;
                let f_bc = BoundaryData::trace_of(&spec.f, bc.w.kind());
                let bih = super::stencil::biharmonic(&f, &f_bc)?;
                let p = interior_samples(grid, &spec.p)?;
                let load = bih.map2(&p, |b, p| mat.d * b + p);
                let ff = super::stencil::bracket(&f, &f)?;
                (load, ff.scaled(0.5))
            }
            DataSampling::Symbolic => (
                interior_samples(grid, &reduced_load(spec, mat))?,
                interior_samples(grid, &gauss_curvature(spec))?,
            ),
        };
        Ok(Problem {
            system: System::VonKarman,
            grid,
            mat: *mat,
            load,
            gauss,
            curvature: None,
            bc_w: bc.w.sample(&grid)?,
            bc_phi: bc.phi.sample(&grid)?,
        })
    }

    /// von Kármán system with explicitly given right-hand sides.
    pub fn von_karman(
        load: &Expr,
        gauss: &Expr,
        mat: &MaterialParams,
        grid: Grid,
        bc: &BoundaryConditions,
    ) -> Result<Problem, SolverError> {
        Ok(Problem {
            system: System::VonKarman,
            grid,
            mat: *mat,
            load: interior_samples(grid, load)?,
            gauss: interior_samples(grid, gauss)?,
            curvature: None,
            bc_w: bc.w.sample(&grid)?,
            bc_phi: bc.phi.sample(&grid)?,
        })
    }

    pub fn unknowns(&self) -> usize {
        2 * self.grid.interior_count()
    }

    /// Fields with the Dirichlet data written onto the boundary nodes.
    pub fn with_boundary(&self, w: &FieldGrid, phi: &FieldGrid) -> (FieldGrid, FieldGrid) {
        let mut w = w.clone();
        let mut phi = phi.clone();
        self.bc_w.apply_dirichlet(&mut w);
        self.bc_phi.apply_dirichlet(&mut phi);
        (w, phi)
    }

    fn curvature_hessian(&self, i: usize, j: usize) -> [f64; 3] {
        match &self.curvature {
            Some(b) => [b[0].get(i, j), b[1].get(i, j), b[2].get(i, j)],
            None => [0.0; 3],
        }
    }

    /// Residual fields `(r1, r2)` at interior nodes, with the load scaled by
    /// `load_factor`. Boundary values of `w`, `phi` are used as given.
    pub fn residual_scaled(
        &self,
        w: &FieldGrid,
        phi: &FieldGrid,
        load_factor: f64,
    ) -> Result<(FieldGrid, FieldGrid), SolverError> {
        if !w.grid.same_shape(&self.grid) || !phi.grid.same_shape(&self.grid) {
            return Err(SolverError::ShapeMismatch);
        }
        let g = self.grid;
        let ew = Extended::new(w, &self.bc_w);
        let ep = Extended::new(phi, &self.bc_phi);
        let taps = biharmonic_taps(&g);
        let c = self.mat.membrane_compliance();
        let mut r1 = FieldGrid::zeros(g);
        let mut r2 = FieldGrid::zeros(g);
        for i in 1..=g.n1 {
            for j in 1..=g.n2 {
                let hw = hessian_at(w, i, j);
                let hp = hessian_at(phi, i, j);
                let hb = self.curvature_hessian(i, j);
                let a = self.mat.d * biharmonic_at(&ew, &taps, i, j)
                    - bracket_of(hw, hp)
                    - bracket_of(hb, hp)
                    - load_factor * self.load.get(i, j);
                let b = c * biharmonic_at(&ep, &taps, i, j)
                    + 0.5 * bracket_of(hw, hw)
                    + bracket_of(hb, hw)
                    - self.gauss.get(i, j);
                r1.set(i, j, a);
                r2.set(i, j, b);
            }
        }
        Ok((r1, r2))
    }

    pub fn residual(&self, w: &FieldGrid, phi: &FieldGrid) -> Result<(FieldGrid, FieldGrid), SolverError> {
        self.residual_scaled(w, phi, 1.0)
    }

    /// Largest magnitude of any individual term of the residual; roundoff in
    /// the residual is a small multiple of `ε` times this.
    pub(crate) fn operator_scale(&self, w: &FieldGrid, phi: &FieldGrid) -> f64 {
        let g = self.grid;
        let s_bih: f64 = biharmonic_taps(&g).iter().map(|t| t.2.abs()).sum();
        let hmax = |u: &FieldGrid| {
            let mut m: f64 = 0.0;
            for i in 1..=g.n1 {
                for j in 1..=g.n2 {
                    for v in hessian_at(u, i, j) {
                        m = m.max(v.abs());
                    }
                }
            }
            m
        };
        let (hw, hp) = (hmax(w), hmax(phi));
        let hb = self
            .curvature
            .as_ref()
            .map(|b| b.iter().map(FieldGrid::max_abs).fold(0.0, f64::max))
            .unwrap_or(0.0);
        [
            self.mat.d * s_bih * w.max_abs(),
            self.mat.membrane_compliance() * s_bih * phi.max_abs(),
            4.0 * (hw + hb) * hp,
            4.0 * (hw + hb) * hw,
            self.load.max_abs(),
            self.gauss.max_abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Unknown index of field `c` (0 = deflection, 1 = stress function) at
    /// interior node `(i, j)`.
    #[inline]
    pub(crate) fn unknown(&self, i: usize, j: usize, c: usize) -> usize {
        2 * self.grid.interior_index(i, j) + c
    }

    /// Half bandwidth of the Jacobian in the interleaved ordering.
    pub(crate) fn bandwidth(&self) -> usize {
        4 * self.grid.n2 + 1
    }

    /// Resolves a stencil reference to an interior unknown. Boundary nodes
    /// carry no unknown; ghost nodes reflect onto their mirror with the sign
    /// of the condition.
    #[inline]
    fn resolve(&self, i: isize, j: isize, sign: f64) -> Option<(usize, usize, f64)> {
        let (n1, n2) = (self.grid.n1 as isize, self.grid.n2 as isize);
        let (mut i, mut j, mut s) = (i, j, 1.0);
        if i == -1 {
            i = 1;
            s = sign;
        } else if i == n1 + 2 {
            i = n1;
            s = sign;
        } else if j == -1 {
            j = 1;
            s = sign;
        } else if j == n2 + 2 {
            j = n2;
            s = sign;
        }
        if i <= 0 || j <= 0 || i > n1 || j > n2 {
            return None;
        }
        Some((i as usize, j as usize, s))
    }

    /// Analytic Jacobian of the residual with respect to the interior
    /// unknowns, in banded storage.
    pub fn jacobian(&self, w: &FieldGrid, phi: &FieldGrid) -> BandMatrix {
        let g = self.grid;
        let n = self.unknowns();
        let bw = self.bandwidth();
        let mut jac = BandMatrix::zeros(n, bw, bw);
        let bih = biharmonic_taps(&g);
        let hess = hessian_taps(&g);
        let c = self.mat.membrane_compliance();
        let (sw, sp) = (self.bc_w.mirror_sign(), self.bc_phi.mirror_sign());

        let add_taps = |jac: &mut BandMatrix, row: usize, i: usize, j: usize, col: usize, sign: f64, taps: &[Tap], scale: f64| {
            if scale == 0.0 {
                return;
            }
            for &(di, dj, wt) in taps {
                if let Some((ii, jj, s)) = self.resolve(i as isize + di, j as isize + dj, sign) {
                    jac.add(row, self.unknown(ii, jj, col), scale * s * wt);
                }
            }
        };

        for i in 1..=g.n1 {
            for j in 1..=g.n2 {
                let r1 = self.unknown(i, j, 0);
                let r2 = self.unknown(i, j, 1);
                let hw = hessian_at(w, i, j);
                let hp = hessian_at(phi, i, j);
                let hb = self.curvature_hessian(i, j);
                let wb = [hw[0] + hb[0], hw[1] + hb[1], hw[2] + hb[2]];

                add_taps(&mut jac, r1, i, j, 0, sw, &bih, self.mat.d);
                add_taps(&mut jac, r2, i, j, 1, sp, &bih, c);
                // δ[u, v] in v for fixed u: u,22 δv,11 + u,11 δv,22 - 2u,12 δv,12.
                let coeff = |h: [f64; 3]| [h[2], -2.0 * h[1], h[0]];
                let (cp, cwb) = (coeff(hp), coeff(wb));
                for k in 0..3 {
                    add_taps(&mut jac, r1, i, j, 0, sw, &hess[k], -cp[k]);
                    add_taps(&mut jac, r1, i, j, 1, sp, &hess[k], -cwb[k]);
                    add_taps(&mut jac, r2, i, j, 0, sw, &hess[k], cwb[k]);
                }
            }
        }
        jac
    }

    pub(crate) fn flatten(&self, r1: &FieldGrid, r2: &FieldGrid) -> Vec<f64> {
        let g = self.grid;
        let mut out = vec![0.0; self.unknowns()];
        for i in 1..=g.n1 {
            for j in 1..=g.n2 {
                out[self.unknown(i, j, 0)] = r1.get(i, j);
                out[self.unknown(i, j, 1)] = r2.get(i, j);
            }
        }
        out
    }

    /// `(w, Φ) + α δ` on interior nodes.
    pub(crate) fn step(&self, w: &FieldGrid, phi: &FieldGrid, delta: &[f64], alpha: f64) -> (FieldGrid, FieldGrid) {
        let g = self.grid;
        let mut w = w.clone();
        let mut phi = phi.clone();
        for i in 1..=g.n1 {
            for j in 1..=g.n2 {
                w.set(i, j, w.get(i, j) + alpha * delta[self.unknown(i, j, 0)]);
                phi.set(i, j, phi.get(i, j) + alpha * delta[self.unknown(i, j, 1)]);
            }
        }
        (w, phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::geometry::Domain2D;
    use crate::solver::bc::BcKind;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn shell(f: &str, p: &str) -> ShellSpec {
        ShellSpec::new(parse(f).unwrap(), parse(p).unwrap(), Domain2D::square(0.0, 1.0), 0.5).unwrap()
    }

    #[test]
    fn plate_zero_state_has_zero_residual() {
        let g = Grid::with_points(Domain2D::square(0.0, 1.0), 13).unwrap();
        let p = Problem::marguerre(&shell("0", "0"), &MaterialParams::default(), g, &BoundaryConditions::default(), DataSampling::Stencil).unwrap();
        let (r1, r2) = p.residual(&FieldGrid::zeros(g), &FieldGrid::zeros(g)).unwrap();
        assert_eq!(r1.max_abs() + r2.max_abs(), 0.0);
    }

    #[test]
    fn jacobian_matches_directional_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in [BcKind::Clamped, BcKind::SimplySupported] {
            let g = Grid::with_points(Domain2D::square(0.0, 1.0), 13).unwrap();
            let bc = BoundaryConditions::homogeneous(kind, BcKind::Clamped);
            let p = Problem::marguerre(&shell("0.2*sin(2*x1)*x2^2", "1"), &MaterialParams { d: 1.0, e: 3.0, h: 0.5 }, g, &bc, DataSampling::Stencil).unwrap();
            let w = p.with_boundary(&FieldGrid::from_fn(g, |x| (3.0 * x[0]).sin() * x[1]), &FieldGrid::zeros(g)).0;
            let phi = p.with_boundary(&FieldGrid::zeros(g), &FieldGrid::from_fn(g, |x| x[0] * x[1] * (1.0 - x[1]))).1;
            let jac = p.jacobian(&w, &phi);
            let dir: Vec<f64> = (0..p.unknowns()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lin = jac.mul_vec(&dir);
            let t = 1e-6;
            let (wp, pp) = p.step(&w, &phi, &dir, t);
            let (wm, pm) = p.step(&w, &phi, &dir, -t);
            let rp = { let (a, b) = p.residual(&wp, &pp).unwrap(); p.flatten(&a, &b) };
            let rm = { let (a, b) = p.residual(&wm, &pm).unwrap(); p.flatten(&a, &b) };
            let scale = lin.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in 0..lin.len() {
                let fd = (rp[k] - rm[k]) / (2.0 * t);
                assert!((fd - lin[k]).abs() <= 1e-6 * scale, "{kind:?} row {k}: {fd} vs {}", lin[k]);
            }
        }
    }

    #[test]
    fn transformed_residual_matches_exactly() {
        let spec = shell("0.3*x1^2 - 0.1*x1*x2 + 0.2*sin(x2)", "1 + x1");
        let mat = MaterialParams { d: 2.0, e: 1.5, h: 0.3 };
        let g = Grid::with_points(spec.domain, 15).unwrap();
        for kind in [BcKind::Clamped, BcKind::SimplySupported] {
            let bc = BoundaryConditions::homogeneous(kind, BcKind::Clamped);
            let bc_t = BoundaryConditions {
                w: bc.w.plus(&BoundaryData::trace_of(&spec.f, kind)).unwrap(),
                phi: bc.phi.clone(),
            };
            let m = Problem::marguerre(&spec, &mat, g, &bc, DataSampling::Stencil).unwrap();
            let v = Problem::von_karman_from_shell(&spec, &mat, g, &bc_t, DataSampling::Stencil).unwrap();
            let w = m.with_boundary(&FieldGrid::from_fn(g, |x| (x[0] * 7.0).cos() * x[1]), &FieldGrid::zeros(g)).0;
            let phi = m.with_boundary(&FieldGrid::zeros(g), &FieldGrid::from_fn(g, |x| x[0] * x[0] - x[1])).1;
            let f = FieldGrid::sample(g, &spec.f).unwrap();
            let wt = w.map2(&f, |a, b| a + b);
            let (a1, a2) = m.residual(&w, &phi).unwrap();
            let (b1, b2) = v.residual(&wt, &phi).unwrap();
            let scale = m.operator_scale(&w, &phi).max(v.operator_scale(&wt, &phi));
            assert!(a1.max_diff(&b1) <= 1e-12 * scale, "{}", a1.max_diff(&b1));
            assert!(a2.max_diff(&b2) <= 1e-12 * scale, "{}", a2.max_diff(&b2));
        }
    }
}
