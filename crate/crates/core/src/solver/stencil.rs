//! Second-order finite-difference stencils on the uniform grid.

use super::bc::{BoundaryData, Extended};
use super::grid::{FieldGrid, Grid};
use super::SolverError;

/// Stencil tap `(di, dj, weight)`.
pub(crate) type Tap = (isize, isize, f64);

/// 13-point stencil of `Δ² = ∂⁴₁ + 2∂²₁∂²₂ + ∂⁴₂`.
pub(crate) fn biharmonic_taps(g: &Grid) -> [Tap; 13] {
    let a = 1.0 / g.h1.powi(4);
    let b = 1.0 / g.h2.powi(4);
    let c = 2.0 / (g.h1 * g.h1 * g.h2 * g.h2);
    [
        (0, 0, 6.0 * a + 6.0 * b + 4.0 * c),
        (1, 0, -4.0 * a - 2.0 * c),
        (-1, 0, -4.0 * a - 2.0 * c),
        (0, 1, -4.0 * b - 2.0 * c),
        (0, -1, -4.0 * b - 2.0 * c),
        (2, 0, a),
        (-2, 0, a),
        (0, 2, b),
        (0, -2, b),
        (1, 1, c),
        (1, -1, c),
        (-1, 1, c),
        (-1, -1, c),
    ]
}

/// Central-difference taps for `∂₁₁`, `∂₁₂`, `∂₂₂`.
pub(crate) fn hessian_taps(g: &Grid) -> [Vec<Tap>; 3] {
    let a = 1.0 / (g.h1 * g.h1);
    let b = 1.0 / (g.h2 * g.h2);
    let c = 0.25 / (g.h1 * g.h2);
    [
        vec![(1, 0, a), (0, 0, -2.0 * a), (-1, 0, a)],
        vec![(1, 1, c), (-1, -1, c), (1, -1, -c), (-1, 1, -c)],
        vec![(0, 1, b), (0, 0, -2.0 * b), (0, -1, b)],
    ]
}

#[inline]
pub(crate) fn biharmonic_at(e: &Extended, taps: &[Tap; 13], i: usize, j: usize) -> f64 {
    let (i, j) = (i as isize, j as isize);
    taps.iter().map(|&(di, dj, w)| w * e.at(i + di, j + dj)).sum()
}

/// `[u,11, u,12, u,22]` at interior node `(i, j)`; touches only grid nodes.
#[inline]
pub(crate) fn hessian_at(u: &FieldGrid, i: usize, j: usize) -> [f64; 3] {
    let g = &u.grid;
    let a = 1.0 / (g.h1 * g.h1);
    let b = 1.0 / (g.h2 * g.h2);
    let c = 0.25 / (g.h1 * g.h2);
    let v = u.get(i, j);
    [
        a * (u.get(i + 1, j) - 2.0 * v + u.get(i - 1, j)),
        c * (u.get(i + 1, j + 1) + u.get(i - 1, j - 1) - u.get(i + 1, j - 1) - u.get(i - 1, j + 1)),
        b * (u.get(i, j + 1) - 2.0 * v + u.get(i, j - 1)),
    ]
}

/// `[u, v] = u,11 v,22 + u,22 v,11 - 2 u,12 v,12` from two Hessians.
#[inline]
pub(crate) fn bracket_of(hu: [f64; 3], hv: [f64; 3]) -> f64 {
    hu[0] * hv[2] + hu[2] * hv[0] - 2.0 * hu[1] * hv[1]
}

/// Discrete `Δ²u` at interior nodes. Boundary values are taken from `u`;
/// ghost nodes are eliminated with the second condition in `bc`.
pub fn biharmonic(u: &FieldGrid, bc: &BoundaryData) -> Result<FieldGrid, SolverError> {
    let g = u.grid;
    let sampled = bc.sample(&g)?;
    let e = Extended::new(u, &sampled);
    let taps = biharmonic_taps(&g);
    let mut out = FieldGrid::zeros(g);
    for i in 1..=g.n1 {
        for j in 1..=g.n2 {
            out.set(i, j, biharmonic_at(&e, &taps, i, j));
        }
    }
    Ok(out)
}

/// Discrete Monge-Ampère bracket `[u, v]` at interior nodes.
pub fn bracket(u: &FieldGrid, v: &FieldGrid) -> Result<FieldGrid, SolverError> {
    if !u.grid.same_shape(&v.grid) {
        return Err(SolverError::ShapeMismatch);
    }
    let g = u.grid;
    let mut out = FieldGrid::zeros(g);
    for i in 1..=g.n1 {
        for j in 1..=g.n2 {
            out.set(i, j, bracket_of(hessian_at(u, i, j), hessian_at(v, i, j)));
        }
    }
    Ok(out)
}

/// Hessian components `[u,11, u,12, u,22]` at interior nodes.
pub fn hessian(u: &FieldGrid) -> [FieldGrid; 3] {
    let g = u.grid;
    let mut out = [FieldGrid::zeros(g), FieldGrid::zeros(g), FieldGrid::zeros(g)];
    for i in 1..=g.n1 {
        for j in 1..=g.n2 {
            let h = hessian_at(u, i, j);
            for k in 0..3 {
                out[k].set(i, j, h[k]);
            }
        }
    }
    out
}
