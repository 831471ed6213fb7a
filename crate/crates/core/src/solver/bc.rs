//! Boundary data on the rectangle and its ghost-node elimination.
//!
//! Clamped: `u = g` and `∂u/∂n = g_n` (outward normal); the ghost node is
//! `u_ghost = u_mirror + 2h g_n`.
//! Simply supported: `u = g` and `Δu = g_Δ`; the ghost node is
//! `u_ghost = -u_mirror + 2u_b + h² (g_Δ - ∂²g/∂t²)` with the tangential
//! second derivative taken by central differences along the edge.

use serde::{Deserialize, Serialize};

use crate::expr::{EvalError, Expr, Var};

use super::grid::{FieldGrid, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BcKind {
    Clamped,
    SimplySupported,
}

/// One expression per edge of the rectangle.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeExprs {
    /// `x1 = a1`
    pub left: Expr,
    /// `x1 = b1`
    pub right: Expr,
    /// `x2 = a2`
    pub bottom: Expr,
    /// `x2 = b2`
    pub top: Expr,
}

impl EdgeExprs {
    pub fn uniform(e: Expr) -> Self {
        EdgeExprs {
            left: e.clone(),
            right: e.clone(),
            bottom: e.clone(),
            top: e,
        }
    }

    /// Outward normal derivative of `u` on each edge.
    pub fn normal_derivative(u: &Expr) -> Self {
        let u1 = u.diff(Var::X1);
        let u2 = u.diff(Var::X2);
        EdgeExprs {
            left: Expr::neg(u1.clone()),
            right: u1,
            bottom: Expr::neg(u2.clone()),
            top: u2,
        }
    }

    fn zip(&self, o: &EdgeExprs, g: impl Fn(Expr, Expr) -> Expr) -> EdgeExprs {
        EdgeExprs {
            left: g(self.left.clone(), o.left.clone()),
            right: g(self.right.clone(), o.right.clone()),
            bottom: g(self.bottom.clone(), o.bottom.clone()),
            top: g(self.top.clone(), o.top.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryData {
    Clamped { value: Expr, normal: EdgeExprs },
    SimplySupported { value: Expr, laplacian: Expr },
}

impl BoundaryData {
    pub fn homogeneous(kind: BcKind) -> Self {
        match kind {
            BcKind::Clamped => BoundaryData::Clamped {
                value: Expr::zero(),
                normal: EdgeExprs::uniform(Expr::zero()),
            },
            BcKind::SimplySupported => BoundaryData::SimplySupported {
                value: Expr::zero(),
                laplacian: Expr::zero(),
            },
        }
    }

    /// The data a smooth field `u` itself carries for a condition of `kind`.
    pub fn trace_of(u: &Expr, kind: BcKind) -> Self {
        match kind {
            BcKind::Clamped => BoundaryData::Clamped {
                value: u.clone(),
                normal: EdgeExprs::normal_derivative(u),
            },
            BcKind::SimplySupported => BoundaryData::SimplySupported {
                value: u.clone(),
                laplacian: u.laplacian(),
            },
        }
    }

    pub fn kind(&self) -> BcKind {
        match self {
            BoundaryData::Clamped { .. } => BcKind::Clamped,
            BoundaryData::SimplySupported { .. } => BcKind::SimplySupported,
        }
    }

    pub fn value(&self) -> &Expr {
        match self {
            BoundaryData::Clamped { value, .. } | BoundaryData::SimplySupported { value, .. } => value,
        }
    }

    /// Data of the sum of two fields satisfying conditions of the same kind.
    pub fn plus(&self, other: &BoundaryData) -> Option<BoundaryData> {
        match (self, other) {
            (
                BoundaryData::Clamped { value: a, normal: na },
                BoundaryData::Clamped { value: b, normal: nb },
            ) => Some(BoundaryData::Clamped {
                value: Expr::sum([a.clone(), b.clone()]),
                normal: na.zip(nb, |x, y| Expr::sum([x, y])),
            }),
            (
                BoundaryData::SimplySupported { value: a, laplacian: la },
                BoundaryData::SimplySupported { value: b, laplacian: lb },
            ) => Some(BoundaryData::SimplySupported {
                value: Expr::sum([a.clone(), b.clone()]),
                laplacian: Expr::sum([la.clone(), lb.clone()]),
            }),
            _ => None,
        }
    }

    pub(crate) fn sample(&self, grid: &Grid) -> Result<SampledBc, EvalError> {
        let (n1, n2) = (grid.n1, grid.n2);
        let mut dirichlet = FieldGrid::zeros(*grid);
        for i in 0..=n1 + 1 {
            for j in 0..=n2 + 1 {
                if grid.is_boundary(i, j) {
                    dirichlet.set(i, j, self.value().eval(grid.x(i, j))?);
                }
            }
        }
        let edges = match self {
            BoundaryData::Clamped { normal, .. } => normal.clone(),
            BoundaryData::SimplySupported { laplacian, .. } => EdgeExprs::uniform(laplacian.clone()),
        };
        let along = |e: &Expr, pts: &mut dyn Iterator<Item = (usize, usize)>| {
            pts.map(|(i, j)| e.eval(grid.x(i, j))).collect::<Result<Vec<_>, _>>()
        };
        Ok(SampledBc {
            kind: self.kind(),
            dirichlet,
            left: along(&edges.left, &mut (1..=n2).map(|j| (0, j)))?,
            right: along(&edges.right, &mut (1..=n2).map(|j| (n1 + 1, j)))?,
            bottom: along(&edges.bottom, &mut (1..=n1).map(|i| (i, 0)))?,
            top: along(&edges.top, &mut (1..=n1).map(|i| (i, n2 + 1)))?,
        })
    }
}

/// Boundary conditions for the deflection (`w` or `w̃`) and the stress function.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConditions {
    pub w: BoundaryData,
    pub phi: BoundaryData,
}

impl BoundaryConditions {
    pub fn homogeneous(w: BcKind, phi: BcKind) -> Self {
        BoundaryConditions {
            w: BoundaryData::homogeneous(w),
            phi: BoundaryData::homogeneous(phi),
        }
    }
}

impl Default for BoundaryConditions {
    /// Clamped deflection and clamped stress function, zero data.
    fn default() -> Self {
        BoundaryConditions::homogeneous(BcKind::Clamped, BcKind::Clamped)
    }
}

/// Boundary data sampled on a grid: Dirichlet values on boundary nodes and
/// the second condition (normal derivative or Laplacian) along each edge,
/// indexed by the tangential node `1..=n`.
#[derive(Debug, Clone)]
pub(crate) struct SampledBc {
    pub kind: BcKind,
    pub dirichlet: FieldGrid,
    pub left: Vec<f64>,
    pub right: Vec<f64>,
    pub bottom: Vec<f64>,
    pub top: Vec<f64>,
}

impl SampledBc {
    /// `+1` for clamped (even reflection), `-1` for simply supported.
    pub fn mirror_sign(&self) -> f64 {
        match self.kind {
            BcKind::Clamped => 1.0,
            BcKind::SimplySupported => -1.0,
        }
    }

    pub fn apply_dirichlet(&self, u: &mut FieldGrid) {
        let g = u.grid;
        for i in 0..=g.n1 + 1 {
            for j in 0..=g.n2 + 1 {
                if g.is_boundary(i, j) {
                    u.set(i, j, self.dirichlet.get(i, j));
                }
            }
        }
    }

    /// Ghost value from mirror value `m`, boundary value `b`, boundary
    /// neighbours along the edge `(bm, bp)`, normal spacing `hn`, tangential
    /// spacing `ht` and edge datum `g`.
    #[inline]
    fn ghost(&self, m: f64, b: f64, bm: f64, bp: f64, hn: f64, ht: f64, g: f64) -> f64 {
        match self.kind {
            BcKind::Clamped => m + 2.0 * hn * g,
            BcKind::SimplySupported => {
                let tangential = (bp - 2.0 * b + bm) / (ht * ht);
                -m + 2.0 * b + hn * hn * (g - tangential)
            }
        }
    }
}

/// Field with one layer of ghost nodes around the grid; indices run from
/// `-1` to `n + 2`. Corner ghosts are unused and left at zero.
pub(crate) struct Extended {
    n2: usize,
    data: Vec<f64>,
}

impl Extended {
    pub fn new(u: &FieldGrid, bc: &SampledBc) -> Self {
        let g = u.grid;
        let (n1, n2) = (g.n1, g.n2);
        let mut e = Extended {
            n2,
            data: vec![0.0; (n1 + 4) * (n2 + 4)],
        };
        for i in 0..=n1 + 1 {
            for j in 0..=n2 + 1 {
                e.put(i as isize, j as isize, u.get(i, j));
            }
        }
        for j in 1..=n2 {
            let left = bc.ghost(u.get(1, j), u.get(0, j), u.get(0, j - 1), u.get(0, j + 1), g.h1, g.h2, bc.left[j - 1]);
            let right = bc.ghost(
                u.get(n1, j),
                u.get(n1 + 1, j),
                u.get(n1 + 1, j - 1),
                u.get(n1 + 1, j + 1),
                g.h1,
                g.h2,
                bc.right[j - 1],
            );
            e.put(-1, j as isize, left);
            e.put((n1 + 2) as isize, j as isize, right);
        }
        for i in 1..=n1 {
            let bottom = bc.ghost(u.get(i, 1), u.get(i, 0), u.get(i - 1, 0), u.get(i + 1, 0), g.h2, g.h1, bc.bottom[i - 1]);
            let top = bc.ghost(
                u.get(i, n2),
                u.get(i, n2 + 1),
                u.get(i - 1, n2 + 1),
                u.get(i + 1, n2 + 1),
                g.h2,
                g.h1,
                bc.top[i - 1],
            );
            e.put(i as isize, -1, bottom);
            e.put(i as isize, (n2 + 2) as isize, top);
        }
        e
    }

    #[inline]
    fn put(&mut self, i: isize, j: isize, v: f64) {
        let k = (i + 1) as usize * (self.n2 + 4) + (j + 1) as usize;
        self.data[k] = v;
    }

    #[inline]
    pub fn at(&self, i: isize, j: isize) -> f64 {
        self.data[(i + 1) as usize * (self.n2 + 4) + (j + 1) as usize]
    }
}
