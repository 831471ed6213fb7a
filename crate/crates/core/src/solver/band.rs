//! Banded LU factorization with partial pivoting.
//!
//! Row `r` stores columns `r - kl ..= r + ku + kl`; the extra `kl` columns
//! hold the fill created by row interchanges. The multipliers of column `k`
//! stay in the rows they were computed in, so the solve replays the
//! interchanges one step at a time.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("matrix is singular to working precision at column {column}")]
pub struct SingularMatrix {
    pub column: usize,
}

#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandMatrix {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        BandMatrix {
            n,
            kl,
            ku,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c <= r + self.ku, "({r}, {c}) outside band");
        r * self.width + c + self.kl - r
    }

    #[inline]
    pub fn add(&mut self, r: usize, c: usize, v: f64) {
        let s = self.slot(r, c);
        self.data[s] += v;
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        if c + self.kl < r || c > r + self.ku {
            0.0
        } else {
            self.data[self.slot(r, c)]
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|r| {
                let lo = r.saturating_sub(self.kl);
                let hi = (r + self.ku).min(self.n - 1);
                (lo..=hi).map(|c| self.data[self.slot(r, c)] * x[c]).sum()
            })
            .collect()
    }

    pub fn factor(mut self) -> Result<BandLu, SingularMatrix> {
        let n = self.n;
        let (kl, width) = (self.kl, self.width);
        let max_reach = self.ku + kl;
        let scale = self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let tiny = scale * f64::EPSILON * 1e-3;
        // Last column holding a nonzero, per row.
        let mut end: Vec<usize> = (0..n).map(|r| (r + self.ku).min(n - 1)).collect();
        let mut pivots = vec![0usize; n];
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[k * width + kl].abs();
            for r in k + 1..=last {
                let v = self.data[r * width + k + kl - r].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(SingularMatrix { column: k });
            }
            pivots[k] = p;
            if p != k {
                let hi = end[k].max(end[p]);
                for c in k..=hi {
                    let a = k * width + c + kl - k;
                    let b = p * width + c + kl - p;
                    self.data.swap(a, b);
                }
                end.swap(k, p);
            }
            let hi = end[k].min(k + max_reach);
            let len = hi - k;
            let (head, tail) = self.data.split_at_mut((k + 1) * width);
            let pivot_row = &head[k * width + kl..k * width + kl + 1 + len];
            let inv = 1.0 / pivot_row[0];
            for r in k + 1..=last {
                let row = &mut tail[(r - k - 1) * width..(r - k) * width];
                let off = k + kl - r;
                let lead = row[off];
                if lead == 0.0 {
                    continue;
                }
                let m = lead * inv;
                row[off] = m;
                for (dst, src) in row[off + 1..off + 1 + len].iter_mut().zip(&pivot_row[1..]) {
                    *dst -= m * src;
                }
                end[r] = end[r].max(hi);
            }
        }
        Ok(BandLu {
            m: self,
            pivots,
            end,
        })
    }
}

#[derive(Debug, Clone)]
pub struct BandLu {
    m: BandMatrix,
    pivots: Vec<usize>,
    end: Vec<usize>,
}

impl BandLu {
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let BandMatrix { n, kl, width, .. } = self.m;
        let a = &self.m.data;
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            if bk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    b[r] -= a[r * width + k + kl - r] * bk;
                }
            }
        }
        for k in (0..n).rev() {
            let base = k * width + kl - k;
            let mut s = b[k];
            for c in k + 1..=self.end[k] {
                s -= a[base + c] * b[c];
            }
            b[k] = s / a[base + k];
        }
    }
}
