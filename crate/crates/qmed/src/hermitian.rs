//! Hermitian matrices and the spectral primitives built on them.
//!
//! The eigensolver is a cyclic complex Jacobi iteration. At the dimensions
//! this crate targets (d <= 64) it is both simpler and more robust than a
//! tridiagonalization pipeline, and converges quadratically once the
//! off-diagonal mass is small.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::matrix::ComplexMatrix;
use crate::scalar::{real_tol, tol, Scalar};

/// Hermitian matrix. Construction symmetrizes exactly, so stored entries
/// always satisfy `a[i][j] == conj(a[j][i])` bit-for-bit.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix<T: Scalar> {
    matrix: ComplexMatrix<T>,
}

impl<T: Scalar> HermitianMatrix<T> {
    /// Accepts a square matrix whose Hermiticity defect is within `tol`,
    /// then symmetrizes it exactly.
    pub fn from_matrix_with_tol(m: ComplexMatrix<T>, tolerance: T) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: "Hermitian matrix must be square",
                expected: m.rows(),
                got: m.cols(),
            });
        }
        let defect = m.hermiticity_defect();
        if defect > tolerance {
            return Err(Error::NotHermitian {
                defect: defect.to_f64().unwrap_or(f64::NAN),
                tol: tolerance.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            matrix: m.symmetrized(),
        })
    }

    /// As [`Self::from_matrix_with_tol`] with the default construction tolerance.
    pub fn from_matrix(m: ComplexMatrix<T>) -> Result<Self> {
        let scale = T::one().max(m.max_norm());
        Self::from_matrix_with_tol(m, real_tol::<T>(tol::HERMITICITY) * scale)
    }

    /// Symmetrizes unconditionally; for matrices Hermitian by construction.
    pub fn symmetrize(m: ComplexMatrix<T>) -> Self {
        assert!(m.is_square(), "Hermitian matrix must be square");
        Self {
            matrix: m.symmetrized(),
        }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim),
        }
    }

    /// Diagonal Hermitian matrix from real entries.
    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let entries: Vec<Complex<T>> = diag.iter().map(|&x| Complex::new(x, T::zero())).collect();
        Self {
            matrix: ComplexMatrix::from_diagonal(&entries),
        }
    }

    /// Rank-one projector |v><v| / <v|v>.
    pub fn projector(v: &[Complex<T>]) -> Self {
        let norm_sqr: T = v.iter().map(|x| x.norm_sqr()).sum();
        let outer = ComplexMatrix::outer(v, v);
        Self::symmetrize(outer.scale_re(norm_sqr.recip()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix.get(i, j)
    }

    pub fn trace_re(&self) -> T {
        self.matrix.trace().re
    }

    pub fn max_norm(&self) -> T {
        self.matrix.max_norm()
    }

    pub fn max_norm_diff(&self, other: &Self) -> T {
        self.matrix.max_norm_diff(&other.matrix)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix + &other.matrix,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            matrix: &self.matrix - &other.matrix,
        }
    }

    pub fn scale_re(&self, factor: T) -> Self {
        Self {
            matrix: self.matrix.scale_re(factor),
        }
    }

    /// U H U† stays Hermitian for unitary U; symmetrized to absorb rounding.
    pub fn conjugate_by(&self, u: &ComplexMatrix<T>) -> Self {
        Self::symmetrize(self.matrix.conjugate_by(u))
    }
}

/// Eigenpairs of a Hermitian matrix. Eigenvalues ascending; column `k` of
/// `vectors` is the eigenvector paired with `values[k]`.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition<T: Scalar> {
    pub values: Vec<T>,
    pub vectors: ComplexMatrix<T>,
}

impl<T: Scalar> SpectralDecomposition<T> {
    /// Column `k` of the eigenvector matrix.
    pub fn vector(&self, k: usize) -> Vec<Complex<T>> {
        (0..self.vectors.rows())
            .map(|i| self.vectors.get(i, k))
            .collect()
    }

    /// V diag(f(lambda)) V† as a Hermitian matrix.
    pub fn apply(&self, mut f: impl FnMut(T) -> T) -> HermitianMatrix<T> {
        let d = self.values.len();
        let mut out = ComplexMatrix::zeros(d, d);
        for k in 0..d {
            let fk = f(self.values[k]);
            if fk == T::zero() {
                continue;
            }
            for i in 0..d {
                let vik = self.vectors.get(i, k);
                for j in 0..d {
                    let v = out.get(i, j) + vik * self.vectors.get(j, k).conj() * Complex::new(fk, T::zero());
                    out.set(i, j, v);
                }
            }
        }
        HermitianMatrix::symmetrize(out)
    }

    /// Reconstruction V diag(lambda) V†.
    pub fn reconstruct(&self) -> HermitianMatrix<T> {
        self.apply(|x| x)
    }

    pub fn min_value(&self) -> T {
        self.values.first().copied().unwrap_or_else(T::zero)
    }

    pub fn max_value(&self) -> T {
        self.values.last().copied().unwrap_or_else(T::zero)
    }
}

const MAX_JACOBI_SWEEPS: usize = 128;

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Eigenvalues are returned in ascending order with matching eigenvector
/// columns. Errors only if the sweep budget is exhausted before the
/// off-diagonal mass reaches machine-precision scale.
pub fn eigh<T: Scalar>(h: &HermitianMatrix<T>) -> Result<SpectralDecomposition<T>> {
    let d = h.dim();
    let mut a = h.matrix().clone();
    let mut v = ComplexMatrix::<T>::identity(d);

    let scale = a.max_norm();
    if scale == T::zero() || d == 1 {
        let values = (0..d).map(|i| a.get(i, i).re).collect();
        return Ok(SpectralDecomposition { values, vectors: v });
    }
    let threshold = scale * T::epsilon();

    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < MAX_JACOBI_SWEEPS {
        let mut off = T::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a.get(p, q).norm());
            }
        }
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                rotate(&mut a, &mut v, p, q);
            }
        }
        sweeps += 1;
    }

    if !converged {
        let mut off = T::zero();
        for p in 0..d {
            for q in (p + 1)..d {
                off = off.max(a.get(p, q).norm());
            }
        }
        // One more chance: quadratic convergence usually lands well below the
        // eps threshold; accept anything that reconstructs to working precision.
        if off > scale * real_tol::<T>(1e-13) {
            return Err(Error::EigNonConvergence {
                dim: d,
                norm: scale.to_f64().unwrap_or(f64::NAN),
                off: off.to_f64().unwrap_or(f64::NAN),
                sweeps: MAX_JACOBI_SWEEPS,
            });
        }
    }

    let mut order: Vec<usize> = (0..d).collect();
    let diag: Vec<T> = (0..d).map(|i| a.get(i, i).re).collect();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).expect("eigenvalues are finite"));

    let values: Vec<T> = order.iter().map(|&i| diag[i]).collect();
    let vectors = ComplexMatrix::from_fn(d, d, |i, k| v.get(i, order[k]));
    Ok(SpectralDecomposition { values, vectors })
}

/// One Jacobi rotation zeroing a[p][q], p < q. Updates a <- U† a U and
/// accumulates v <- v U, where U is a unitary Givens rotation carrying the
/// phase of the off-diagonal entry.
fn rotate<T: Scalar>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a.get(p, q);
    let m = apq.norm();
    if m == T::zero() {
        return;
    }
    let phase = apq.unscale(m); // e^{i phi}
    let app = a.get(p, p).re;
    let aqq = a.get(q, q).re;

    let two = T::one() + T::one();
    let theta = (aqq - app) / (two * m);
    let t = if theta >= T::zero() {
        T::one() / (theta + (theta * theta + T::one()).sqrt())
    } else {
        -T::one() / (-theta + (theta * theta + T::one()).sqrt())
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    // U restricted to the (p,q) plane:
    //   U[p][p] = c            U[p][q] = s
    //   U[q][p] = -s conj(ph)  U[q][q] = c conj(ph)
    let cc = Complex::new(c, T::zero());
    let ss = Complex::new(s, T::zero());
    let ph_conj = phase.conj();
    let d = a.rows();

    // Columns: M <- M U.
    for k in 0..d {
        let akp = a.get(k, p);
        let akq = a.get(k, q);
        a.set(k, p, akp * cc - akq * ss * ph_conj);
        a.set(k, q, akp * ss + akq * cc * ph_conj);
    }
    // Rows: M <- U† M.
    for k in 0..d {
        let apk = a.get(p, k);
        let aqk = a.get(q, k);
        a.set(p, k, apk * cc - aqk * ss * phase);
        a.set(q, k, apk * ss + aqk * cc * phase);
    }
    // Pin the rotated entries to their exact targets; rounding otherwise
    // leaves debris that stalls the final sweeps.
    a.set(p, q, Complex::new(T::zero(), T::zero()));
    a.set(q, p, Complex::new(T::zero(), T::zero()));
    let app_new = a.get(p, p);
    let aqq_new = a.get(q, q);
    a.set(p, p, Complex::new(app_new.re, T::zero()));
    a.set(q, q, Complex::new(aqq_new.re, T::zero()));

    for k in 0..d {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * cc - vkq * ss * ph_conj);
        v.set(k, q, vkp * ss + vkq * cc * ph_conj);
    }
}

/// PSD test with the deciding eigenvalue reported.
///
/// Returns `(min_eigenvalue >= -tol, min_eigenvalue)`.
pub fn is_psd<T: Scalar>(h: &HermitianMatrix<T>, tolerance: T) -> Result<(bool, T)> {
    let spec = eigh(h)?;
    let min = spec.min_value();
    Ok((min >= -tolerance, min))
}

/// Square root of a PSD matrix via spectral calculus.
///
/// Eigenvalues in `[-1e-10, 0)` are clamped to zero; anything lower is a
/// precondition failure.
pub fn sqrt_psd<T: Scalar>(h: &HermitianMatrix<T>) -> Result<HermitianMatrix<T>> {
    let spec = eigh(h)?;
    let slack = real_tol::<T>(1e-10);
    if spec.min_value() < -slack {
        return Err(Error::NotPsd {
            min_eigenvalue: spec.min_value().to_f64().unwrap_or(f64::NAN),
            tol: 1e-10,
        });
    }
    Ok(spec.apply(|x| x.max(T::zero()).sqrt()))
}

/// Moore-Penrose inverse of a PSD matrix.
///
/// Eigenvalues at or below `rank_tol * lambda_max` map to zero, the rest to
/// their reciprocals. The all-zero matrix maps to itself.
pub fn pinv_psd<T: Scalar>(h: &HermitianMatrix<T>, rank_tol: T) -> Result<HermitianMatrix<T>> {
    let spec = eigh(h)?;
    let lambda_max = spec.max_value();
    if lambda_max <= T::zero() {
        return Ok(HermitianMatrix::zeros(h.dim()));
    }
    let cutoff = rank_tol * lambda_max;
    Ok(spec.apply(|x| if x <= cutoff { T::zero() } else { x.recip() }))
}

/// Sum of absolute eigenvalues (Schatten 1-norm of a Hermitian matrix).
pub fn trace_norm<T: Scalar>(h: &HermitianMatrix<T>) -> Result<T> {
    let spec = eigh(h)?;
    Ok(spec.values.iter().map(|x| x.abs()).sum())
}
