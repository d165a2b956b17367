//! Dense complex matrices in row-major storage.
//!
//! Target dimensions are tiny (a few tens at most), so everything is a
//! straightforward O(d^3) loop over owned `Vec` storage with no attempt at
//! blocking or BLAS dispatch.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix<T: Scalar> {
    rows: usize,
    cols: usize,
    entries: Vec<Complex<T>>,
}

impl<T: Scalar> ComplexMatrix<T> {
    /// Builds a matrix from row-major entries.
    ///
    /// # Panics
    /// Panics if `rows * cols` does not match the entry count.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex<T>>) -> Self {
        assert_eq!(
            rows * cols,
            entries.len(),
            "entry count must equal rows*cols"
        );
        Self {
            rows,
            cols,
            entries,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m.set(i, i, Complex::new(T::one(), T::zero()));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self {
            rows,
            cols,
            entries,
        }
    }

    /// Diagonal matrix from the given complex entries.
    pub fn from_diagonal(diag: &[Complex<T>]) -> Self {
        let d = diag.len();
        let mut m = Self::zeros(d, d);
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Outer product |u><v| (u conjugated on the right, bra-ket convention).
    pub fn outer(u: &[Complex<T>], v: &[Complex<T>]) -> Self {
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

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex<T>) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    pub fn trace(&self) -> Complex<T> {
        debug_assert!(self.is_square());
        (0..self.rows)
            .map(|i| self.get(i, i))
            .fold(Complex::new(T::zero(), T::zero()), |acc, v| acc + v)
    }

    /// Largest entry magnitude, max_{ij} |a_ij|.
    pub fn max_norm(&self) -> T {
        self.entries
            .iter()
            .map(|e| e.norm())
            .fold(T::zero(), T::max)
    }

    /// max_{ij} |a_ij - b_ij|; the distance used by every tolerance check.
    pub fn max_norm_diff(&self, other: &Self) -> T {
        debug_assert_eq!(self.rows, other.rows);
        debug_assert_eq!(self.cols, other.cols);
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    /// Hermiticity defect, max_{ij} |a_ij - conj(a_ji)|.
    pub fn hermiticity_defect(&self) -> T {
        debug_assert!(self.is_square());
        let mut defect = T::zero();
        for i in 0..self.rows {
            for j in i..self.cols {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                defect = defect.max(d);
            }
        }
        defect
    }

    /// Unitarity defect, max-norm of U†U - I.
    pub fn unitarity_defect(&self) -> T {
        let gram = self.adjoint().mul_mat(self);
        gram.max_norm_diff(&Self::identity(self.cols))
    }

    /// (A + A†)/2.
    pub fn symmetrized(&self) -> Self {
        debug_assert!(self.is_square());
        let half = T::from_f64(0.5).unwrap();
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.get(i, j) + self.get(j, i).conj()).scale(half)
        })
    }

    pub fn mul_mat(&self, other: &Self) -> Self {
        assert_eq!(
            self.cols, other.rows,
            "inner dimensions must agree in matrix product"
        );
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.get(i, k);
                if aik.norm_sqr() == T::zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + aik * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        out
    }

    /// A * v for a column vector v.
    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                (0..self.cols)
                    .map(|j| self.get(i, j) * v[j])
                    .fold(Complex::new(T::zero(), T::zero()), |acc, x| acc + x)
            })
            .collect()
    }

    /// U * A * U† (similarity transform by a unitary).
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.mul_mat(self).mul_mat(&u.adjoint())
    }

    /// Re Tr(AB); the Hilbert-Schmidt pairing used for probabilities.
    pub fn trace_product_re(&self, other: &Self) -> T {
        debug_assert_eq!(self.cols, other.rows);
        debug_assert_eq!(self.rows, other.cols);
        let mut acc = T::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += (self.get(i, k) * other.get(k, i)).re;
            }
        }
        acc
    }

    /// Kronecker product A ⊗ B.
    pub fn kron(&self, other: &Self) -> Self {
        let rows = self.rows * other.rows;
        let cols = self.cols * other.cols;
        Self::from_fn(rows, cols, |i, j| {
            let (ia, ib) = (i / other.rows, i % other.rows);
            let (ja, jb) = (j / other.cols, j % other.cols);
            self.get(ia, ja) * other.get(ib, jb)
        })
    }

    /// Checks squareness against an expected dimension.
    pub fn expect_square(&self, dim: usize, context: &'static str) -> Result<()> {
        if self.rows != dim || self.cols != dim {
            return Err(Error::DimensionMismatch {
                context,
                expected: dim,
                got: if self.rows != dim { self.rows } else { self.cols },
            });
        }
        Ok(())
    }
}

impl<T: Scalar> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn add(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl<T: Scalar> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn sub(self, rhs: Self) -> ComplexMatrix<T> {
        assert_eq!(self.rows, rhs.rows);
        assert_eq!(self.cols, rhs.cols);
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl<T: Scalar> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;
    fn mul(self, rhs: Self) -> ComplexMatrix<T> {
        self.mul_mat(rhs)
    }
}
