//! Row-major dense complex matrices.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex64;

use crate::parallel;

pub type C64 = Complex64;

pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Products with more multiply-adds than this are split over rows.
const PAR_WORK: usize = 1 << 18;

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMatrix { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.data[i * dim + i] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMatrix { rows, cols, data }
    }

    /// Builds from row-major data. Panics if the length is wrong.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "data length does not match shape");
        CMatrix { rows, cols, data }
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * diag.len() + i] = d;
        }
        m
    }

    /// Permutation matrix sending basis vector `j` to `perm[j]`.
    pub fn permutation(perm: &[usize]) -> Self {
        let d = perm.len();
        let mut m = Self::zeros(d, d);
        for (j, &i) in perm.iter().enumerate() {
            m.data[i * d + j] = ONE;
        }
        m
    }

    /// |u⟩⟨v|
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn scale(&self, s: C64) -> Self {
        CMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * s).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance from the adjoint.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.data[i * self.cols + j] - self.data[j * self.cols + i].conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    pub fn matmul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch {}x{} * {}x{}", self.rows, self.cols, other.rows, other.cols);
        let (n, inner, p) = (self.rows, self.cols, other.cols);
        let mut out = vec![ZERO; n * p];
        if p == 0 {
            return CMatrix { rows: n, cols: p, data: out };
        }
        // Zero-skipping row kernel: oracle matrices are very sparse.
        let kernel = |i: usize, out_row: &mut [C64]| {
            let a_row = &self.data[i * inner..(i + 1) * inner];
            for (k, &a) in a_row.iter().enumerate() {
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * p..(k + 1) * p];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        };
        parallel::for_each_row(&mut out, p, n * inner * p >= PAR_WORK, kernel);
        CMatrix { rows: n, cols: p, data: out }
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| {
                let row = self.row(i);
                let mut acc = ZERO;
                for (a, b) in row.iter().zip(v) {
                    if *a != ZERO {
                        acc += a * b;
                    }
                }
                acc
            })
            .collect()
    }

    pub fn kron(&self, other: &CMatrix) -> CMatrix {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        let mut out = CMatrix::zeros(rows, cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.data[i * self.cols + j];
                if a == ZERO {
                    continue;
                }
                for k in 0..other.rows {
                    let base = (i * other.rows + k) * cols + j * other.cols;
                    for l in 0..other.cols {
                        out.data[base + l] = a * other.data[k * other.cols + l];
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(blocks: &[&CMatrix]) -> CMatrix {
        let rows: usize = blocks.iter().map(|b| b.rows).sum();
        let cols: usize = blocks.iter().map(|b| b.cols).sum();
        let mut out = CMatrix::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    out.data[(r0 + i) * cols + c0 + j] = b.data[i * b.cols + j];
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        out
    }

    /// Sub-matrix with the given row and column index lists.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> CMatrix {
        CMatrix::from_fn(rows.len(), cols.len(), |i, j| self.data[rows[i] * self.cols + cols[j]])
    }

    /// Number of entries with modulus above `tol`.
    pub fn nonzeros(&self, tol: f64) -> usize {
        self.data.iter().filter(|a| a.norm() > tol).count()
    }

    /// Debug dump: one row per line, entries as "re im" pairs.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for i in 0..self.rows {
            let line: Vec<String> =
                self.row(i).iter().map(|a| format!("{:.17e} {:.17e}", a.re, a.im)).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{}", self.rows, self.cols)?;
        if self.rows * self.cols <= 64 {
            for i in 0..self.rows {
                let cells: Vec<String> =
                    self.row(i).iter().map(|a| format!("{:+.4}{:+.4}i", a.re, a.im)).collect();
                writeln!(f, "  [{}]", cells.join(", "))?;
            }
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

pub fn basis_vector(dim: usize, index: usize) -> Vec<C64> {
    let mut v = vec![ZERO; dim];
    v[index] = ONE;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn kron_of_identities() {
        let i2 = CMatrix::identity(2);
        assert_eq!(i2.kron(&i2), CMatrix::identity(4));
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = CMatrix::from_vec(2, 2, vec![c(1., 0.), c(0., 1.), c(2., 0.), ZERO]);
        let b = CMatrix::from_vec(2, 1, vec![c(1., 1.), c(3., 0.)]);
        let p = &a * &b;
        assert_eq!(p[(0, 0)], c(1., 4.));
        assert_eq!(p[(1, 0)], c(2., 2.));
    }

    #[test]
    fn adjoint_conjugates_and_transposes() {
        let a = CMatrix::from_vec(1, 2, vec![c(1., 2.), c(0., -1.)]);
        let h = a.adjoint();
        assert_eq!(h.rows(), 2);
        assert_eq!(h[(0, 0)], c(1., -2.));
        assert_eq!(h[(1, 0)], c(0., 1.));
    }

    #[test]
    fn permutation_maps_columns() {
        let p = CMatrix::permutation(&[2, 0, 1]);
        let v = p.mul_vec(&basis_vector(3, 0));
        assert_eq!(v, basis_vector(3, 2));
    }

    #[test]
    fn large_product_matches_reference() {
        let d = 70;
        let a = CMatrix::from_fn(d, d, |i, j| c(((i * 7 + j) % 5) as f64 - 2.0, ((i + 3 * j) % 3) as f64));
        let b = CMatrix::from_fn(d, d, |i, j| c(((i + j) % 4) as f64, -(((i * j) % 3) as f64)));
        let p = &a * &b;
        for &(i, j) in &[(0, 0), (13, 57), (69, 1)] {
            let mut acc = ZERO;
            for k in 0..d {
                acc += a[(i, k)] * b[(k, j)];
            }
            assert!((p[(i, j)] - acc).norm() < 1e-9);
        }
    }

    #[test]
    fn direct_sum_places_blocks() {
        let a = CMatrix::identity(1);
        let b = CMatrix::from_vec(1, 1, vec![c(0., 1.)]);
        let s = CMatrix::direct_sum(&[&a, &b]);
        assert_eq!(s[(1, 1)], c(0., 1.));
        assert_eq!(s[(0, 1)], ZERO);
    }
}
