//! Dense complex matrices and the hermitian eigen machinery built on them.
//!
//! Everything in this crate moves through [`ComplexMatrix`]: states, payoff
//! operators, basis elements, chi matrices. Storage is row-major
//! `Vec<Complex64>`; problem sizes stay at or below 256x256, so no sparse
//! or blocked formats are needed.

use num_complex::Complex64;
use thiserror::Error;

/// Hard cap on one side of any constructed matrix. Tensor products report
/// the size they would have needed instead of allocating past this.
pub const MAX_MATRIX_DIM: usize = 4096;

/// Relative tolerance under which an input must be hermitian before the
/// eigensolver and the PSD projection accept it.
pub const HERMITIAN_INPUT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum MatrixError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    DimensionMismatch {
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },
    #[error("matrix is not hermitian: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { residual: f64, tolerance: f64 },
    #[error("result would be {rows}x{cols}; the configured maximum is {max}x{max}")]
    TooLarge { rows: usize, cols: usize, max: usize },
    #[error("matrix entries must be finite")]
    NonFinite,
}

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Complex64>(
        rows: usize,
        cols: usize,
        mut f: F,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.set(r, c, f(r, c));
            }
        }
        m
    }

    /// Builds a matrix from row-major complex entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, MatrixError> {
        if data.len() != rows * cols {
            return Err(MatrixError::DimensionMismatch {
                left_rows: rows,
                left_cols: cols,
                right_rows: data.len(),
                right_cols: 1,
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(MatrixError::NonFinite);
        }
        Ok(Self { rows, cols, data })
    }

    /// Diagonal matrix with the given real entries.
    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.set(i, i, Complex64::new(d, 0.0));
        }
        m
    }

    /// The n x n matrix unit with a single 1 at (row, col), 0-based.
    pub fn matrix_unit(n: usize, row: usize, col: usize) -> Self {
        assert!(row < n && col < n);
        let mut m = Self::zeros(n, n);
        m.set(row, col, Complex64::new(1.0, 0.0));
        m
    }

    /// Rank-1 projector |v><v| of a (not necessarily normalized) vector.
    pub fn outer(v: &[Complex64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |r, c| v[r] * v[c].conj())
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        debug_assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c] = v;
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * factor).collect(),
        }
    }

    pub fn scale_re(&self, factor: f64) -> Self {
        self.scale(Complex64::new(factor, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Result<Self, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch {
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: other.rows,
                right_cols: other.cols,
            });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(r, k);
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for c in 0..other.cols {
                    let v = out.get(r, c) + a * other.get(k, c);
                    out.set(r, c, v);
                }
            }
        }
        Ok(out)
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square());
        (0..self.rows).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Hilbert-Schmidt inner product tr(self^dag other).
    pub fn frobenius_inner(&self, other: &Self) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Frobenius distance to the nearest hermitian matrix, times 2.
    pub fn hermitian_residual(&self) -> f64 {
        assert!(self.is_square());
        let mut sum = 0.0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                let d = self.get(r, c) - self.get(c, r).conj();
                sum += d.norm_sqr();
            }
        }
        sum.sqrt()
    }

    /// (A + A^dag)/2.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square());
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self.get(r, c) + self.get(c, r).conj()) * 0.5
        })
    }

    fn require_hermitian(&self) -> Result<(), MatrixError> {
        if !self.is_square() {
            return Err(MatrixError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        let tolerance = HERMITIAN_INPUT_TOL * self.frobenius_norm().max(1.0);
        let residual = self.hermitian_residual();
        if residual > tolerance {
            return Err(MatrixError::NotHermitian {
                residual,
                tolerance,
            });
        }
        Ok(())
    }

    /// Kronecker product. Index flattening: entry (r, c) of `a` tensor (s, d)
    /// of `b` lands at row r*b.rows + s, col c*b.cols + d, so for matrix
    /// units (0-based) unit(n,i,j) (x) unit(n,k,l) = unit(n^2, i*n+k, j*n+l).
    pub fn tensor_product(a: &Self, b: &Self) -> Result<Self, MatrixError> {
        let rows = a.rows.checked_mul(b.rows).unwrap_or(usize::MAX);
        let cols = a.cols.checked_mul(b.cols).unwrap_or(usize::MAX);
        if rows > MAX_MATRIX_DIM || cols > MAX_MATRIX_DIM {
            return Err(MatrixError::TooLarge {
                rows,
                cols,
                max: MAX_MATRIX_DIM,
            });
        }
        let mut out = Self::zeros(rows, cols);
        for ar in 0..a.rows {
            for ac in 0..a.cols {
                let av = a.get(ar, ac);
                if av.re == 0.0 && av.im == 0.0 {
                    continue;
                }
                for br in 0..b.rows {
                    for bc in 0..b.cols {
                        out.set(ar * b.rows + br, ac * b.cols + bc, av * b.get(br, bc));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Kronecker product of several factors, left to right.
    pub fn tensor_product_all(factors: &[&Self]) -> Result<Self, MatrixError> {
        assert!(!factors.is_empty());
        let mut acc = factors[0].clone();
        for f in &factors[1..] {
            acc = Self::tensor_product(&acc, f)?;
        }
        Ok(acc)
    }

    /// Full eigendecomposition of a hermitian matrix by cyclic Jacobi
    /// rotations. Eigenvalues come back ascending, eigenvectors as the
    /// matching columns of a unitary matrix.
    pub fn hermitian_eig(&self) -> Result<HermitianEigenDecomposition, MatrixError> {
        self.require_hermitian()?;
        let n = self.rows;
        let mut a = self.hermitian_part();
        let mut v = Self::identity(n);
        let scale = a.frobenius_norm().max(1.0);
        let target = scale * 1e-14;

        if n > 1 {
            for _sweep in 0..60 {
                let mut off = 0.0;
                for p in 0..n {
                    for q in (p + 1)..n {
                        off += a.get(p, q).norm_sqr();
                    }
                }
                if (2.0 * off).sqrt() <= target {
                    break;
                }
                for p in 0..n {
                    for q in (p + 1)..n {
                        let apq = a.get(p, q);
                        let mag = apq.norm();
                        if mag <= scale * 1e-300 {
                            continue;
                        }
                        let phase = apq / mag;
                        let tau = (a.get(q, q).re - a.get(p, p).re) / (2.0 * mag);
                        let t = if tau >= 0.0 {
                            1.0 / (tau + (1.0 + tau * tau).sqrt())
                        } else {
                            -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                        };
                        let c = 1.0 / (1.0 + t * t).sqrt();
                        let s = t * c;
                        let sigma = phase * s;

                        // A <- A U with the rotation acting on columns p, q.
                        for k in 0..n {
                            let akp = a.get(k, p);
                            let akq = a.get(k, q);
                            a.set(k, p, akp * c - akq * sigma.conj());
                            a.set(k, q, akp * sigma + akq * c);
                        }
                        // A <- U^dag A on rows p, q.
                        for k in 0..n {
                            let apk = a.get(p, k);
                            let aqk = a.get(q, k);
                            a.set(p, k, apk * c - aqk * sigma);
                            a.set(q, k, apk * sigma.conj() + aqk * c);
                        }
                        // Accumulate V <- V U.
                        for k in 0..n {
                            let vkp = v.get(k, p);
                            let vkq = v.get(k, q);
                            v.set(k, p, vkp * c - vkq * sigma.conj());
                            v.set(k, q, vkp * sigma + vkq * c);
                        }
                        // Kill roundoff residue at the pivot.
                        let fixed = (a.get(p, q).norm_sqr() + a.get(q, p).norm_sqr()).sqrt();
                        if fixed < scale * 1e-13 {
                            a.set(p, q, Complex64::new(0.0, 0.0));
                            a.set(q, p, Complex64::new(0.0, 0.0));
                        }
                    }
                }
            }
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| {
            a.get(i, i)
                .re
                .partial_cmp(&a.get(j, j).re)
                .expect("eigenvalues are finite")
        });
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a.get(i, i).re).collect();
        let eigenvectors = Self::from_fn(n, n, |r, c| v.get(r, order[c]));
        Ok(HermitianEigenDecomposition {
            eigenvalues,
            eigenvectors,
        })
    }

    /// Nearest positive semidefinite matrix in Frobenius distance:
    /// eigenvalues clipped at zero, eigenvectors kept.
    pub fn psd_project(&self) -> Result<Self, MatrixError> {
        let eig = self.hermitian_eig()?;
        let clipped: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
        Ok(eig.with_eigenvalues(&clipped).hermitian_part())
    }

    /// Smallest eigenvalue of a hermitian matrix.
    pub fn min_eigenvalue(&self) -> Result<f64, MatrixError> {
        Ok(self.hermitian_eig()?.eigenvalues[0])
    }
}

/// Eigenvalues (ascending) and orthonormal eigenvector columns of a
/// hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl HermitianEigenDecomposition {
    /// Column `i` of the eigenvector matrix.
    pub fn eigenvector(&self, i: usize) -> Vec<Complex64> {
        (0..self.eigenvectors.rows())
            .map(|r| self.eigenvectors.get(r, i))
            .collect()
    }

    /// Sum of lambda_i v_i v_i^dag with substituted eigenvalues.
    pub fn with_eigenvalues(&self, eigenvalues: &[f64]) -> ComplexMatrix {
        let n = self.eigenvectors.rows();
        assert_eq!(eigenvalues.len(), n);
        let mut out = ComplexMatrix::zeros(n, n);
        for (i, &l) in eigenvalues.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            for r in 0..n {
                let vr = self.eigenvectors.get(r, i);
                for c in 0..n {
                    let v = out.get(r, c) + vr * self.eigenvectors.get(c, i).conj() * l;
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// V Lambda V^dag with the decomposition's own eigenvalues.
    pub fn reconstruct(&self) -> ComplexMatrix {
        self.with_eigenvalues(&self.eigenvalues)
    }

    /// Frobenius norm of V^dag V - I.
    pub fn orthonormality_residual(&self) -> f64 {
        let v = &self.eigenvectors;
        let gram = v.adjoint().mul(v).expect("square");
        gram.sub(&ComplexMatrix::identity(v.rows())).frobenius_norm()
    }
}
