//! Minimal dense complex matrix used for channel gains, transmit blocks,
//! and receive blocks. Dimensions here are tiny (at most 8 x 4), so this
//! stays deliberately simple: row-major `Vec` storage with checked indexing
//! through `(row, col)` tuples.

use num_complex::Complex64;
use std::ops::{Index, IndexMut};

#[derive(Clone, Debug, PartialEq)]
pub struct CxMat {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl CxMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::ZERO; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Self {
        let n_cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == n_cols));
        Self {
            rows: rows.len(),
            cols: n_cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    /// Frobenius norm squared.
    pub fn norm_sq(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    /// `self * rhs^T` — used as `h * block^T` where block rows are time
    /// slots, giving a (receive antennas x time slots) result.
    pub fn mul_transpose(&self, rhs: &CxMat) -> CxMat {
        assert_eq!(self.cols, rhs.cols, "inner dimensions must agree");
        let mut out = CxMat::zeros(self.rows, rhs.rows);
        for i in 0..self.rows {
            for j in 0..rhs.rows {
                let mut acc = Complex64::ZERO;
                for k in 0..self.cols {
                    acc += self[(i, k)] * rhs[(j, k)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }

    /// `self^H * self`, the Gram matrix of the columns.
    pub fn gram(&self) -> CxMat {
        let mut out = CxMat::zeros(self.cols, self.cols);
        for i in 0..self.cols {
            for j in 0..self.cols {
                let mut acc = Complex64::ZERO;
                for k in 0..self.rows {
                    acc += self[(k, i)].conj() * self[(k, j)];
                }
                out[(i, j)] = acc;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CxMat {
    type Output = Complex64;
    #[inline]
    fn index(&self, (r, c): (usize, usize)) -> &Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CxMat {
    #[inline]
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}
