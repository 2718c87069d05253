//! Quantum channels and the chi-matrix strategy representation.
//!
//! A player's strategy is a trace-preserving completely positive map. Two
//! equivalent forms are used here: a Kraus operator list {E_k}, and the chi
//! matrix chi_{ab} = sum_k e_{ka} conj(e_{kb}) of expansion coefficients
//! relative to a fixed operator basis. The strategy set is exactly the set
//! of positive hermitian chi matrices satisfying the trace-preservation
//! constraint
//!
//!   sum_{a,b} conj(chi_{ab}) E~_a^dag E~_b = I,
//!
//! which in the matrix-unit basis reduces to sum_i chi_{(ij)(ij)} = 1 and
//! sum_i chi_{(ij)(il)} = 0 for j != l. [`TracePreservation`] linearizes
//! the constraint once per basis and provides the orthogonal projector onto
//! its solution affine set, plus the rank count that yields the 16^q - 4^q
//! free-parameter dimension.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::matrix::{ComplexMatrix, MatrixError};

/// Absolute tolerance for chi-matrix feasibility (hermiticity, positivity,
/// constraint residual) and Kraus trace preservation.
pub const CHI_FEASIBILITY_TOL: f64 = 1e-9;

/// Eigenvalue threshold separating genuine chi rank from roundoff.
pub const CHI_RANK_TOL: f64 = 1e-10;

/// Minimum allowed smallest singular value of a basis Gram matrix.
pub const BASIS_GRAM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("operator basis for dimension {n} needs {expected} elements of size {n}x{n}")]
    MalformedBasis { n: usize, expected: usize },
    #[error("basis is numerically singular: smallest Gram singular value {min_singular:.3e}")]
    SingularBasis { min_singular: f64 },
    #[error("basis expansion residual {residual:.3e} exceeds tolerance")]
    ExpansionResidual { residual: f64 },
    #[error("channel has no Kraus operators")]
    EmptyKraus,
    #[error("channel has {count} Kraus operators; at most {max} are independent")]
    TooManyKraus { count: usize, max: usize },
    #[error("Kraus operators are not trace preserving: residual {residual:.3e}")]
    NotTracePreserving { residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid chi matrix: {reason} (residual {residual:.3e})")]
    InvalidChi { reason: &'static str, residual: f64 },
    #[error("chi matrices refer to different operator bases")]
    BasisMismatch,
    #[error("invalid probability distribution: {reason}")]
    InvalidDistribution { reason: &'static str },
}

/// A basis {E~_a} for the n x n operator space: exactly n^2 linearly
/// independent elements. Linear independence is certified at construction
/// by the smallest eigenvalue of the Gram matrix G_{ab} = tr(E~_a^dag E~_b).
#[derive(Debug, Clone)]
pub struct OperatorBasis {
    n: usize,
    elements: Vec<ComplexMatrix>,
    gram_eigenvalues: Vec<f64>,
    gram_eigenvectors: ComplexMatrix,
}

impl OperatorBasis {
    pub fn new(n: usize, elements: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let m = n * n;
        if n < 2
            || elements.len() != m
            || elements.iter().any(|e| e.rows() != n || e.cols() != n)
        {
            return Err(ChannelError::MalformedBasis { n, expected: m });
        }
        let gram = ComplexMatrix::from_fn(m, m, |a, b| {
            elements[a].frobenius_inner(&elements[b])
        });
        let eig = gram.hermitian_eig()?;
        // The Gram matrix is PSD, so eigenvalues are its singular values.
        if eig.eigenvalues[0] <= BASIS_GRAM_TOL {
            return Err(ChannelError::SingularBasis {
                min_singular: eig.eigenvalues[0],
            });
        }
        Ok(Self {
            n,
            elements,
            gram_eigenvalues: eig.eigenvalues,
            gram_eigenvectors: eig.eigenvectors,
        })
    }

    /// The matrix-unit basis: element a is the unit with a 1 at row a/n,
    /// col a%n, i.e. the paper's 1-based n_[ij] at flat index (i-1)n+(j-1).
    pub fn matrix_units(n: usize) -> Arc<Self> {
        assert!(n >= 2);
        let elements = (0..n * n)
            .map(|a| ComplexMatrix::matrix_unit(n, a / n, a % n))
            .collect();
        Arc::new(Self::new(n, elements).expect("matrix units are a valid basis"))
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of basis elements, n^2.
    pub fn operator_count(&self) -> usize {
        self.elements.len()
    }

    pub fn element(&self, a: usize) -> &ComplexMatrix {
        &self.elements[a]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn min_gram_singular_value(&self) -> f64 {
        self.gram_eigenvalues[0]
    }

    /// Coefficients e_a with op = sum_a e_a E~_a, solved through the Gram
    /// matrix. The reconstruction residual is checked before returning.
    pub fn expand(&self, op: &ComplexMatrix) -> Result<Vec<Complex64>, ChannelError> {
        if op.rows() != self.n || op.cols() != self.n {
            return Err(ChannelError::DimensionMismatch {
                expected: self.n,
                got: op.rows(),
            });
        }
        let m = self.operator_count();
        let rhs: Vec<Complex64> = (0..m)
            .map(|a| self.elements[a].frobenius_inner(op))
            .collect();
        // e = V diag(1/lambda) V^dag rhs via the cached Gram decomposition.
        let v = &self.gram_eigenvectors;
        let mut vtr = vec![Complex64::new(0.0, 0.0); m];
        for i in 0..m {
            let mut acc = Complex64::new(0.0, 0.0);
            for r in 0..m {
                acc += v.get(r, i).conj() * rhs[r];
            }
            vtr[i] = acc / self.gram_eigenvalues[i];
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        for (r, coeff) in coeffs.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, w) in vtr.iter().enumerate() {
                acc += v.get(r, i) * w;
            }
            *coeff = acc;
        }
        let residual = self.combine(&coeffs).sub(op).frobenius_norm();
        if residual > 1e-10 * op.frobenius_norm().max(1.0) {
            return Err(ChannelError::ExpansionResidual { residual });
        }
        Ok(coeffs)
    }

    /// sum_a e_a E~_a.
    pub fn combine(&self, coeffs: &[Complex64]) -> ComplexMatrix {
        assert_eq!(coeffs.len(), self.operator_count());
        let mut out = ComplexMatrix::zeros(self.n, self.n);
        for (e, coeff) in self.elements.iter().zip(coeffs) {
            if coeff.re == 0.0 && coeff.im == 0.0 {
                continue;
            }
            out = out.add(&e.scale(*coeff));
        }
        out
    }

    /// sum_{a,b} conj(chi_{ab}) E~_a^dag E~_b, the left-hand side of the
    /// trace-preservation constraint.
    pub fn constraint_operator(&self, chi: &ComplexMatrix) -> ComplexMatrix {
        let m = self.operator_count();
        assert_eq!((chi.rows(), chi.cols()), (m, m));
        let mut out = ComplexMatrix::zeros(self.n, self.n);
        for a in 0..m {
            for b in 0..m {
                let w = chi.get(a, b).conj();
                if w.re == 0.0 && w.im == 0.0 {
                    continue;
                }
                let prod = self.elements[a]
                    .adjoint()
                    .mul(&self.elements[b])
                    .expect("square");
                out = out.add(&prod.scale(w));
            }
        }
        out
    }

    /// True when two bases are interchangeable: same object or identical
    /// element lists. Deterministic constructors produce bit-equal elements.
    pub fn same_as(self: &Arc<Self>, other: &Arc<Self>) -> bool {
        Arc::ptr_eq(self, other)
            || (self.n == other.n && self.elements == other.elements)
    }
}

/// A channel in Kraus form: sigma -> sum_k E_k sigma E_k^dag with
/// sum_k E_k^dag E_k = I.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    n: usize,
    operators: Vec<ComplexMatrix>,
}

impl KrausChannel {
    pub fn new(operators: Vec<ComplexMatrix>) -> Result<Self, ChannelError> {
        let first = operators.first().ok_or(ChannelError::EmptyKraus)?;
        let n = first.rows();
        if operators
            .iter()
            .any(|e| e.rows() != n || e.cols() != n || !e.is_finite())
        {
            return Err(ChannelError::DimensionMismatch {
                expected: n,
                got: operators
                    .iter()
                    .map(|e| e.rows())
                    .find(|&r| r != n)
                    .unwrap_or(n),
            });
        }
        if operators.len() > n * n {
            return Err(ChannelError::TooManyKraus {
                count: operators.len(),
                max: n * n,
            });
        }
        let channel = Self { n, operators };
        let residual = channel.trace_preservation_residual();
        if residual > CHI_FEASIBILITY_TOL {
            return Err(ChannelError::NotTracePreserving { residual });
        }
        Ok(channel)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn operators(&self) -> &[ComplexMatrix] {
        &self.operators
    }

    /// || sum_k E_k^dag E_k - I ||_F.
    pub fn trace_preservation_residual(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(self.n, self.n);
        for e in &self.operators {
            acc = acc.add(&e.adjoint().mul(e).expect("square"));
        }
        acc.sub(&ComplexMatrix::identity(self.n)).frobenius_norm()
    }

    /// sigma -> sum_k E_k sigma E_k^dag on a single system.
    pub fn apply(&self, sigma: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if sigma.rows() != self.n || sigma.cols() != self.n {
            return Err(ChannelError::DimensionMismatch {
                expected: self.n,
                got: sigma.rows(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.n, self.n);
        for e in &self.operators {
            out = out.add(&e.mul(sigma).expect("square").mul(&e.adjoint()).expect("square"));
        }
        Ok(out)
    }

    /// The do-nothing channel {I}.
    pub fn identity(n: usize) -> Self {
        Self::new(vec![ComplexMatrix::identity(n)]).expect("identity is trace preserving")
    }

    /// Discards the input and prepares |0><0|: Kraus operators |0><i|.
    pub fn replace_with_zero(n: usize) -> Self {
        let ops = (0..n)
            .map(|i| ComplexMatrix::matrix_unit(n, 0, i))
            .collect();
        Self::new(ops).expect("replacement channel is trace preserving")
    }

    /// Applies X with probability 1-p on a qubit: {sqrt(p) I, sqrt(1-p) X}.
    pub fn bit_flip(p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p));
        let x = ComplexMatrix::from_fn(2, 2, |r, c| {
            if r + c == 1 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self::new(vec![
            ComplexMatrix::identity(2).scale_re(p.sqrt()),
            x.scale_re((1.0 - p).sqrt()),
        ])
        .expect("bit flip mixture is trace preserving")
    }

    /// Fully depolarizing channel sigma -> tr(sigma) I/n, Kraus
    /// {n_[ij]/sqrt(n)}. Its chi matrix is full rank: the canonical interior
    /// point of the strategy set.
    pub fn depolarizing(n: usize) -> Self {
        let scale = 1.0 / (n as f64).sqrt();
        let ops = (0..n * n)
            .map(|a| ComplexMatrix::matrix_unit(n, a / n, a % n).scale_re(scale))
            .collect();
        Self::new(ops).expect("depolarizing channel is trace preserving")
    }

    /// The cyclic-shift unitary S^a with S|k> = |k+1 mod n>.
    pub fn shift_unitary(n: usize, a: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |r, c| {
            if r == (c + a) % n {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
    }

    /// Mixture of cyclic-shift unitaries with the given probabilities:
    /// Kraus {sqrt(p_a) S^a}. Realizes a classical mixed strategy.
    pub fn shift_mixture(probabilities: &[f64], n: usize) -> Result<Self, ChannelError> {
        if probabilities.is_empty() || probabilities.len() > n {
            return Err(ChannelError::InvalidDistribution {
                reason: "need between 1 and n probabilities",
            });
        }
        if probabilities.iter().any(|&p| !(p >= 0.0) || !p.is_finite()) {
            return Err(ChannelError::InvalidDistribution {
                reason: "probabilities must be nonnegative and finite",
            });
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(ChannelError::InvalidDistribution {
                reason: "probabilities must sum to 1",
            });
        }
        let ops = probabilities
            .iter()
            .enumerate()
            .filter(|(_, &p)| p > 0.0)
            .map(|(a, &p)| Self::shift_unitary(n, a).scale_re(p.sqrt()))
            .collect();
        Self::new(ops)
    }

    /// Deterministic random channel: a uniformly random (K n) x n block
    /// matrix is orthonormalized column by column, and its n-row blocks
    /// become the Kraus operators. Trace preservation then holds to machine
    /// precision, and the same seed reproduces the operators bit for bit.
    pub fn random_cptp(n: usize, kraus_count: usize, seed: u64) -> Self {
        assert!(
            (1..=n * n).contains(&kraus_count),
            "kraus_count must lie in 1..=n^2"
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rows = n * kraus_count;
        loop {
            let mut cols: Vec<Vec<Complex64>> = (0..n)
                .map(|_| {
                    (0..rows)
                        .map(|_| {
                            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
                        })
                        .collect()
                })
                .collect();
            // Modified Gram-Schmidt with one re-orthogonalization pass.
            let mut ok = true;
            for j in 0..n {
                for _pass in 0..2 {
                    for i in 0..j {
                        let proj: Complex64 = cols[i]
                            .iter()
                            .zip(&cols[j])
                            .map(|(u, w)| u.conj() * w)
                            .sum();
                        for r in 0..rows {
                            let correction = proj * cols[i][r];
                            cols[j][r] -= correction;
                        }
                    }
                }
                let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-8 {
                    ok = false;
                    break;
                }
                for z in cols[j].iter_mut() {
                    *z /= norm;
                }
            }
            if !ok {
                continue;
            }
            let operators = (0..kraus_count)
                .map(|k| {
                    ComplexMatrix::from_fn(n, n, |r, c| cols[c][k * n + r])
                })
                .collect();
            match Self::new(operators) {
                Ok(ch) => return ch,
                Err(_) => continue,
            }
        }
    }
}

/// A strategy in chi form: a positive hermitian m x m matrix (m = n^2)
/// satisfying the trace-preservation constraint relative to its basis.
#[derive(Debug, Clone)]
pub struct ChiMatrix {
    basis: Arc<OperatorBasis>,
    chi: ComplexMatrix,
}

impl ChiMatrix {
    /// Validates all feasibility invariants before wrapping.
    pub fn new(basis: Arc<OperatorBasis>, chi: ComplexMatrix) -> Result<Self, ChannelError> {
        let m = basis.operator_count();
        if chi.rows() != m || chi.cols() != m {
            return Err(ChannelError::DimensionMismatch {
                expected: m,
                got: chi.rows(),
            });
        }
        if !chi.is_finite() {
            return Err(ChannelError::Matrix(MatrixError::NonFinite));
        }
        let herm = chi.hermitian_residual();
        if herm > CHI_FEASIBILITY_TOL {
            return Err(ChannelError::InvalidChi {
                reason: "not hermitian",
                residual: herm,
            });
        }
        let min_eig = chi.hermitian_part().min_eigenvalue()?;
        if min_eig < -CHI_FEASIBILITY_TOL {
            return Err(ChannelError::InvalidChi {
                reason: "not positive semidefinite",
                residual: -min_eig,
            });
        }
        let constraint = basis
            .constraint_operator(&chi)
            .sub(&ComplexMatrix::identity(basis.dim()))
            .frobenius_norm();
        if constraint > CHI_FEASIBILITY_TOL {
            return Err(ChannelError::InvalidChi {
                reason: "trace-preservation constraint violated",
                residual: constraint,
            });
        }
        Ok(Self { basis, chi })
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.chi
    }

    pub fn entry(&self, a: usize, b: usize) -> Complex64 {
        self.chi.get(a, b)
    }

    /// || sum conj(chi_{ab}) E~_a^dag E~_b - I ||_F.
    pub fn constraint_residual(&self) -> f64 {
        self.basis
            .constraint_operator(&self.chi)
            .sub(&ComplexMatrix::identity(self.basis.dim()))
            .frobenius_norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.chi
            .hermitian_part()
            .min_eigenvalue()
            .expect("chi is hermitian")
    }

    /// Channel equality is defined on chi matrices, never on Kraus lists.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.basis.same_as(&other.basis)
            && self.chi.sub(&other.chi).frobenius_norm() <= tol
    }
}

/// chi_{ab} = sum_k e_{ka} conj(e_{kb}) from the basis expansions of the
/// Kraus operators.
pub fn kraus_to_chi(
    channel: &KrausChannel,
    basis: &Arc<OperatorBasis>,
) -> Result<ChiMatrix, ChannelError> {
    if channel.dim() != basis.dim() {
        return Err(ChannelError::DimensionMismatch {
            expected: basis.dim(),
            got: channel.dim(),
        });
    }
    let m = basis.operator_count();
    let mut chi = ComplexMatrix::zeros(m, m);
    for e in channel.operators() {
        let coeffs = basis.expand(e)?;
        for a in 0..m {
            for b in 0..m {
                let v = chi.get(a, b) + coeffs[a] * coeffs[b].conj();
                chi.set(a, b, v);
            }
        }
    }
    ChiMatrix::new(Arc::clone(basis), chi)
}

/// Kraus operators E_m = sqrt(lambda_m) sum_a (v_m)_a E~_a over the
/// eigenpairs of chi above the rank threshold.
pub fn chi_to_kraus(chi: &ChiMatrix) -> Result<KrausChannel, ChannelError> {
    let eig = chi.matrix().hermitian_part().hermitian_eig()?;
    let mut operators = Vec::new();
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda <= CHI_RANK_TOL {
            continue;
        }
        let coeffs: Vec<Complex64> = eig
            .eigenvector(i)
            .iter()
            .map(|z| z * lambda.sqrt())
            .collect();
        operators.push(chi.basis().combine(&coeffs));
    }
    if operators.is_empty() {
        return Err(ChannelError::InvalidChi {
            reason: "chi has no eigenvalues above the rank threshold",
            residual: 0.0,
        });
    }
    KrausChannel::new(operators)
}

/// The chi matrix of the fully depolarizing channel: the canonical
/// full-rank interior point of the strategy set.
pub fn depolarizing_chi(basis: &Arc<OperatorBasis>) -> ChiMatrix {
    kraus_to_chi(&KrausChannel::depolarizing(basis.dim()), basis)
        .expect("depolarizing channel is feasible in any valid basis")
}

/// pi = sum (E^1_{k_1} (x) ... (x) E^N_{k_N}) rho (...)^dag for one channel
/// per player acting on their share of the joint state.
pub fn apply_channel_pair(
    rho: &ComplexMatrix,
    channels: &[KrausChannel],
) -> Result<ComplexMatrix, ChannelError> {
    assert!(!channels.is_empty());
    let joint: usize = channels.iter().map(KrausChannel::dim).product();
    if rho.rows() != joint || rho.cols() != joint {
        return Err(ChannelError::DimensionMismatch {
            expected: joint,
            got: rho.rows(),
        });
    }
    let mut out = ComplexMatrix::zeros(joint, joint);
    let counts: Vec<usize> = channels.iter().map(|c| c.operators().len()).collect();
    let mut index = vec![0usize; channels.len()];
    loop {
        let factors: Vec<&ComplexMatrix> = channels
            .iter()
            .zip(&index)
            .map(|(c, &k)| &c.operators()[k])
            .collect();
        let joint_kraus = ComplexMatrix::tensor_product_all(&factors)?;
        out = out.add(
            &joint_kraus
                .mul(rho)
                .expect("dims checked")
                .mul(&joint_kraus.adjoint())
                .expect("dims checked"),
        );
        // Mixed-radix increment over the Kraus index tuple.
        let mut pos = channels.len();
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            index[pos] += 1;
            if index[pos] < counts[pos] {
                break;
            }
            index[pos] = 0;
        }
    }
}

/// Real coordinates for hermitian m x m matrices: the diagonal, then
/// (sqrt2 Re, sqrt2 Im) of each strict upper-triangle entry. The map is an
/// isometry between the Frobenius and Euclidean norms.
#[derive(Debug, Clone, Copy)]
pub struct HermitianCoords {
    m: usize,
}

impl HermitianCoords {
    pub fn new(m: usize) -> Self {
        Self { m }
    }

    pub fn real_dim(&self) -> usize {
        self.m * self.m
    }

    pub fn encode(&self, x: &ComplexMatrix) -> Vec<f64> {
        assert_eq!((x.rows(), x.cols()), (self.m, self.m));
        let sqrt2 = std::f64::consts::SQRT_2;
        let mut out = Vec::with_capacity(self.real_dim());
        for i in 0..self.m {
            out.push(x.get(i, i).re);
        }
        for p in 0..self.m {
            for q in (p + 1)..self.m {
                out.push(sqrt2 * x.get(p, q).re);
                out.push(sqrt2 * x.get(p, q).im);
            }
        }
        out
    }

    pub fn decode(&self, v: &[f64]) -> ComplexMatrix {
        assert_eq!(v.len(), self.real_dim());
        let inv_sqrt2 = std::f64::consts::FRAC_1_SQRT_2;
        let mut out = ComplexMatrix::zeros(self.m, self.m);
        for i in 0..self.m {
            out.set(i, i, Complex64::new(v[i], 0.0));
        }
        let mut idx = self.m;
        for p in 0..self.m {
            for q in (p + 1)..self.m {
                let z = Complex64::new(v[idx] * inv_sqrt2, v[idx + 1] * inv_sqrt2);
                idx += 2;
                out.set(p, q, z);
                out.set(q, p, z.conj());
            }
        }
        out
    }
}

/// The linearized trace-preservation system for one basis: the real-linear
/// map L from hermitian chi candidates (m^2 real coordinates) to the
/// hermitian constraint value (n^2 real coordinates), the right-hand side
/// corresponding to I, and the orthogonal projector onto {L x = b}.
#[derive(Debug, Clone)]
pub struct TracePreservation {
    basis: Arc<OperatorBasis>,
    chi_coords: HermitianCoords,
    out_coords: HermitianCoords,
    l: Vec<Vec<f64>>,
    b: Vec<f64>,
    /// L^T (L L^T)^+, applied to the constraint residual.
    correction: Vec<Vec<f64>>,
    rank: usize,
}

impl TracePreservation {
    pub fn new(basis: &Arc<OperatorBasis>) -> Self {
        let n = basis.dim();
        let m = basis.operator_count();
        let chi_coords = HermitianCoords::new(m);
        let out_coords = HermitianCoords::new(n);
        let in_dim = chi_coords.real_dim();
        let out_dim = out_coords.real_dim();

        // Column j of L is the constraint image of the j-th hermitian
        // coordinate direction.
        let mut l = vec![vec![0.0; in_dim]; out_dim];
        let mut unit = vec![0.0; in_dim];
        for j in 0..in_dim {
            unit[j] = 1.0;
            let direction = chi_coords.decode(&unit);
            unit[j] = 0.0;
            let image = basis.constraint_operator(&direction);
            let coords = out_coords.encode(&image.hermitian_part());
            for (row, &v) in coords.iter().enumerate() {
                l[row][j] = v;
            }
        }
        let b = out_coords.encode(&ComplexMatrix::identity(n));

        // Pseudo-inverse of the small Gram matrix L L^T via eigenvalues.
        let gram = ComplexMatrix::from_fn(out_dim, out_dim, |r, c| {
            let dot: f64 = l[r].iter().zip(&l[c]).map(|(a, b)| a * b).sum();
            Complex64::new(dot, 0.0)
        });
        let eig = gram.hermitian_eig().expect("gram is symmetric");
        let max_eig = eig.eigenvalues.last().copied().unwrap_or(0.0).max(1e-300);
        let tol = max_eig * 1e-12;
        let rank = eig.eigenvalues.iter().filter(|&&e| e > tol).count();
        let inv_eigs: Vec<f64> = eig
            .eigenvalues
            .iter()
            .map(|&e| if e > tol { 1.0 / e } else { 0.0 })
            .collect();
        let pinv = eig.with_eigenvalues(&inv_eigs);

        // correction = L^T pinv, stored dense (in_dim x out_dim).
        let mut correction = vec![vec![0.0; out_dim]; in_dim];
        for (i, corr_row) in correction.iter_mut().enumerate() {
            for (k, corr) in corr_row.iter_mut().enumerate() {
                let mut acc = 0.0;
                for (j, l_row) in l.iter().enumerate() {
                    acc += l_row[i] * pinv.get(j, k).re;
                }
                *corr = acc;
            }
        }

        Self {
            basis: Arc::clone(basis),
            chi_coords,
            out_coords,
            l,
            b,
            correction,
            rank,
        }
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    /// Rank of the linearized constraint system (n^2 when the basis is
    /// valid, making the feasible affine set (n^2)^2 - n^2 dimensional).
    pub fn constraint_rank(&self) -> usize {
        self.rank
    }

    /// Real dimension of the constraint-satisfying affine subspace of
    /// hermitian matrices: 16^q - 4^q at n = 2^q.
    pub fn affine_dimension(&self) -> usize {
        self.chi_coords.real_dim() - self.rank
    }

    fn apply_l(&self, x: &[f64]) -> Vec<f64> {
        self.l
            .iter()
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Euclidean residual of the constraint at a hermitian candidate;
    /// coincides with the Frobenius residual of the operator equation.
    pub fn residual(&self, x: &ComplexMatrix) -> f64 {
        let coords = self.chi_coords.encode(x);
        let lx = self.apply_l(&coords);
        lx.iter()
            .zip(&self.b)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }

    /// Orthogonal projection onto the affine solution set {L x = b}.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.project_with_rhs(x, Some(&self.b))
    }

    /// Orthogonal projection onto the tangent space {L x = 0}.
    pub fn project_tangent(&self, x: &ComplexMatrix) -> ComplexMatrix {
        self.project_with_rhs(x, None)
    }

    fn project_with_rhs(&self, x: &ComplexMatrix, rhs: Option<&[f64]>) -> ComplexMatrix {
        let mut coords = self.chi_coords.encode(&x.hermitian_part());
        let mut res = self.apply_l(&coords);
        if let Some(b) = rhs {
            for (r, bv) in res.iter_mut().zip(b) {
                *r -= bv;
            }
        }
        for (i, coord) in coords.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, &r) in res.iter().enumerate() {
                acc += self.correction[i][k] * r;
            }
            *coord -= acc;
        }
        self.chi_coords.decode(&coords)
    }

    pub fn out_coords(&self) -> HermitianCoords {
        self.out_coords
    }

    pub fn chi_coords(&self) -> HermitianCoords {
        self.chi_coords
    }
}
