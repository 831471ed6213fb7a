use std::io::{self, Write};

use crate::expr::{EvalError, Expr, Point};
use crate::geometry::Domain2D;

use super::SolverError;

/// Smallest interior point count per axis that fits the 13-point stencil.
pub const MIN_INTERIOR: usize = 9;

/// Uniform grid with `n1 x n2` interior nodes. Node `(i, j)` for
/// `i in 0..=n1+1`, `j in 0..=n2+1` sits at `(a1 + i h1, a2 + j h2)`;
/// indices `0` and `n + 1` are on the boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n1: usize,
    pub n2: usize,
    pub h1: f64,
    pub h2: f64,
    pub domain: Domain2D,
}

impl Grid {
    pub fn new(domain: Domain2D, n1: usize, n2: usize) -> Result<Self, SolverError> {
        if n1 < MIN_INTERIOR || n2 < MIN_INTERIOR {
            return Err(SolverError::GridTooSmall { n1, n2 });
        }
        Ok(Grid {
            n1,
            n2,
            h1: domain.width() / (n1 + 1) as f64,
            h2: domain.height() / (n2 + 1) as f64,
            domain,
        })
    }

    /// Grid with `points` nodes per axis counting both boundary nodes, so
    /// `points = 65` gives spacing `width / 64`.
    pub fn with_points(domain: Domain2D, points: usize) -> Result<Self, SolverError> {
        let n = points.saturating_sub(2);
        Grid::new(domain, n, n)
    }

    pub fn points_per_axis(&self) -> (usize, usize) {
        (self.n1 + 2, self.n2 + 2)
    }

    pub fn x(&self, i: usize, j: usize) -> Point {
        [
            self.domain.a1 + i as f64 * self.h1,
            self.domain.a2 + j as f64 * self.h2,
        ]
    }

    pub fn interior_count(&self) -> usize {
        self.n1 * self.n2
    }

    /// Linear index of interior node `(i, j)`, `1 <= i <= n1`, `1 <= j <= n2`.
    #[inline]
    pub fn interior_index(&self, i: usize, j: usize) -> usize {
        (i - 1) * self.n2 + (j - 1)
    }

    #[inline]
    pub fn is_boundary(&self, i: usize, j: usize) -> bool {
        i == 0 || j == 0 || i == self.n1 + 1 || j == self.n2 + 1
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.n1 == other.n1 && self.n2 == other.n2 && self.domain == other.domain
    }
}

/// Scalar field sampled at every node of a [`Grid`], boundary included.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub grid: Grid,
    values: Vec<f64>,
}

impl FieldGrid {
    pub fn zeros(grid: Grid) -> Self {
        FieldGrid {
            values: vec![0.0; (grid.n1 + 2) * (grid.n2 + 2)],
            grid,
        }
    }

    pub fn sample(grid: Grid, e: &Expr) -> Result<Self, EvalError> {
        let mut f = FieldGrid::zeros(grid);
        for i in 0..=grid.n1 + 1 {
            for j in 0..=grid.n2 + 1 {
                f.set(i, j, e.eval(grid.x(i, j))?);
            }
        }
        Ok(f)
    }

    pub fn from_fn(grid: Grid, mut g: impl FnMut(Point) -> f64) -> Self {
        let mut f = FieldGrid::zeros(grid);
        for i in 0..=grid.n1 + 1 {
            for j in 0..=grid.n2 + 1 {
                f.set(i, j, g(grid.x(i, j)));
            }
        }
        f
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        i * (self.grid.n2 + 2) + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[self.idx(i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let k = self.idx(i, j);
        self.values[k] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_interior(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 1..=self.grid.n1 {
            for j in 1..=self.grid.n2 {
                m = m.max(self.get(i, j).abs());
            }
        }
        m
    }

    /// Largest `|self - other|` over all nodes.
    pub fn max_diff(&self, other: &FieldGrid) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn map2(&self, other: &FieldGrid, g: impl Fn(f64, f64) -> f64) -> FieldGrid {
        FieldGrid {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| g(*a, *b)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> FieldGrid {
        FieldGrid {
            grid: self.grid,
            values: self.values.iter().map(|v| v * s).collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// CSV with header `x1,x2,value`, rows ordered by `i` then `j` over all
    /// nodes, numbers printed with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "x1,x2,value")?;
        for i in 0..=self.grid.n1 + 1 {
            for j in 0..=self.grid.n2 + 1 {
                let x = self.grid.x(i, j);
                writeln!(out, "{:.16e},{:.16e},{:.16e}", x[0], x[1], self.get(i, j))?;
            }
        }
        Ok(())
    }
}
