//! Game definitions, payoff tensors, and payoff evaluation.
//!
//! A static quantum game is the triple (N, Omega, P) made concrete: a joint
//! initial state rho on n^N dimensions, one hermitian payoff operator R^k
//! per player (possibly derived from a POVM payoff scheme), and the common
//! strategy set of trace-preserving completely positive maps per player.
//!
//! The payoff admits two equivalent evaluations, which double as each
//! other's correctness oracle:
//!
//! - direct: P_k = tr(R^k pi) with pi the state after every player's
//!   channel acts on their share;
//! - chi form: P_k = Re[ chi^1_{a1 b1} ... chi^N_{aN bN} A^k ] with the
//!   payoff tensor A^k_{..} = tr[R^k (E~_{a1} (x) ...) rho (E~_{b1} (x) ...)^dag].

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::channels::{apply_channel_pair, ChannelError, ChiMatrix, KrausChannel, OperatorBasis};
use crate::exec;
use crate::matrix::{ComplexMatrix, MatrixError};
use crate::DEFAULT_MAX_JOINT_DIM;

/// Absolute tolerance for game-definition invariants (state trace and
/// positivity, payoff hermiticity, zero-sum cancellation).
pub const GAME_DEFINITION_TOL: f64 = 1e-9;

/// Absolute bound on the imaginary residue of a chi-form payoff before it
/// is reported as real.
pub const PAYOFF_REALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Error)]
pub enum GameError {
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("game needs at least two players, got {0}")]
    TooFewPlayers(usize),
    #[error("per-player dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("expected a {expected}x{expected} matrix, got {rows}x{cols}")]
    WrongShape {
        expected: usize,
        rows: usize,
        cols: usize,
    },
    #[error("invalid initial state: {reason} (residual {residual:.3e})")]
    InvalidState { reason: &'static str, residual: f64 },
    #[error("payoff operator {player} is not hermitian (residual {residual:.3e})")]
    PayoffNotHermitian { player: usize, residual: f64 },
    #[error("zero-sum flag set but payoff operators do not cancel (residual {residual:.3e})")]
    ZeroSumViolation { residual: f64 },
    #[error("POVM is incomplete: || sum M^dag M - I ||_F = {residual:.3e}")]
    IncompletePovm { residual: f64 },
    #[error("payoff table has {got} players or outcomes, expected {expected}")]
    PayoffTableShape { expected: usize, got: usize },
    #[error(
        "joint dimension {joint_dim} exceeds the tensor size guard {max}; \
         raise QGAME_MAX_DIM to override"
    )]
    TensorTooLarge { joint_dim: usize, max: usize },
    #[error("strategy profile has {got} entries for {expected} players")]
    WrongProfileLength { expected: usize, got: usize },
    #[error("strategy basis does not match the tensor basis")]
    BasisMismatch,
    #[error("payoff contraction has imaginary residue {imag:.3e}; inputs are not valid strategies")]
    NonRealPayoff { imag: f64 },
    #[error("no player with index {0}")]
    NoSuchPlayer(usize),
}

/// Optional descriptive fields carried alongside a game definition.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GameMetadata {
    pub name: Option<String>,
    pub description: Option<String>,
}

/// A static quantum game: N players, per-player dimension n (= 2^q when the
/// qubit protocol applies), joint initial state, and per-player hermitian
/// payoff operators.
#[derive(Debug, Clone)]
pub struct StaticQuantumGame {
    players: usize,
    n: usize,
    rho: ComplexMatrix,
    payoff_ops: Vec<ComplexMatrix>,
    zero_sum: bool,
    metadata: GameMetadata,
}

impl StaticQuantumGame {
    pub fn new(
        players: usize,
        n: usize,
        rho: ComplexMatrix,
        payoff_ops: Vec<ComplexMatrix>,
        zero_sum: bool,
    ) -> Result<Self, GameError> {
        if players < 2 {
            return Err(GameError::TooFewPlayers(players));
        }
        if n < 2 {
            return Err(GameError::DimensionTooSmall(n));
        }
        let joint = n.checked_pow(players as u32).ok_or(GameError::TensorTooLarge {
            joint_dim: usize::MAX,
            max: DEFAULT_MAX_JOINT_DIM,
        })?;
        if rho.rows() != joint || rho.cols() != joint {
            return Err(GameError::WrongShape {
                expected: joint,
                rows: rho.rows(),
                cols: rho.cols(),
            });
        }
        if payoff_ops.len() != players {
            return Err(GameError::PayoffTableShape {
                expected: players,
                got: payoff_ops.len(),
            });
        }
        let herm = rho.hermitian_residual();
        if herm > GAME_DEFINITION_TOL {
            return Err(GameError::InvalidState {
                reason: "state is not hermitian",
                residual: herm,
            });
        }
        let trace_residual = (rho.trace().re - 1.0).abs().max(rho.trace().im.abs());
        if trace_residual > GAME_DEFINITION_TOL {
            return Err(GameError::InvalidState {
                reason: "state trace is not 1",
                residual: trace_residual,
            });
        }
        let min_eig = rho.hermitian_part().min_eigenvalue()?;
        if min_eig < -GAME_DEFINITION_TOL {
            return Err(GameError::InvalidState {
                reason: "state is not positive semidefinite",
                residual: -min_eig,
            });
        }
        for (k, r) in payoff_ops.iter().enumerate() {
            if r.rows() != joint || r.cols() != joint {
                return Err(GameError::WrongShape {
                    expected: joint,
                    rows: r.rows(),
                    cols: r.cols(),
                });
            }
            let res = r.hermitian_residual();
            if res > GAME_DEFINITION_TOL {
                return Err(GameError::PayoffNotHermitian {
                    player: k,
                    residual: res,
                });
            }
        }
        if zero_sum && players == 2 {
            let residual = payoff_ops[0].add(&payoff_ops[1]).frobenius_norm();
            if residual > GAME_DEFINITION_TOL {
                return Err(GameError::ZeroSumViolation { residual });
            }
        }
        Ok(Self {
            players,
            n,
            rho,
            payoff_ops,
            zero_sum,
            metadata: GameMetadata::default(),
        })
    }

    pub fn from_povm(
        players: usize,
        n: usize,
        rho: ComplexMatrix,
        scheme: &PovmPayoffScheme,
        zero_sum: bool,
    ) -> Result<Self, GameError> {
        let payoff_ops = (0..players)
            .map(|k| scheme.payoff_operator(k))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(players, n, rho, payoff_ops, zero_sum)
    }

    pub fn with_metadata(mut self, metadata: GameMetadata) -> Self {
        self.metadata = metadata;
        self
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Per-player Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Qubits per player when n is a power of two; games with other n exist
    /// only for tensor-level analysis.
    pub fn qubits_per_player(&self) -> Option<u32> {
        self.n.is_power_of_two().then(|| self.n.trailing_zeros())
    }

    pub fn joint_dim(&self) -> usize {
        self.n.pow(self.players as u32)
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn payoff_operator(&self, player: usize) -> &ComplexMatrix {
        &self.payoff_ops[player]
    }

    pub fn payoff_operators(&self) -> &[ComplexMatrix] {
        &self.payoff_ops
    }

    pub fn zero_sum(&self) -> bool {
        self.zero_sum
    }

    pub fn metadata(&self) -> &GameMetadata {
        &self.metadata
    }
}

/// Referee-side measurement {M_m} with per-player payoffs a^k_m.
#[derive(Debug, Clone)]
pub struct PovmPayoffScheme {
    measurement_ops: Vec<ComplexMatrix>,
    payoffs: Vec<Vec<f64>>,
}

impl PovmPayoffScheme {
    pub fn new(
        measurement_ops: Vec<ComplexMatrix>,
        payoffs: Vec<Vec<f64>>,
    ) -> Result<Self, GameError> {
        assert!(!measurement_ops.is_empty());
        let d = measurement_ops[0].rows();
        let mut acc = ComplexMatrix::zeros(d, d);
        for m in &measurement_ops {
            if m.rows() != d || m.cols() != d {
                return Err(GameError::WrongShape {
                    expected: d,
                    rows: m.rows(),
                    cols: m.cols(),
                });
            }
            acc = acc.add(&m.adjoint().mul(m)?);
        }
        let residual = acc.sub(&ComplexMatrix::identity(d)).frobenius_norm();
        if residual > GAME_DEFINITION_TOL {
            return Err(GameError::IncompletePovm { residual });
        }
        for row in &payoffs {
            if row.len() != measurement_ops.len() {
                return Err(GameError::PayoffTableShape {
                    expected: measurement_ops.len(),
                    got: row.len(),
                });
            }
        }
        Ok(Self {
            measurement_ops,
            payoffs,
        })
    }

    pub fn outcomes(&self) -> usize {
        self.measurement_ops.len()
    }

    /// R^k = sum_m a^k_m M_m^dag M_m. Hermitian, with spectrum inside the
    /// payoff range by POVM completeness.
    pub fn payoff_operator(&self, player: usize) -> Result<ComplexMatrix, GameError> {
        let row = self
            .payoffs
            .get(player)
            .ok_or(GameError::NoSuchPlayer(player))?;
        let d = self.measurement_ops[0].rows();
        let mut out = ComplexMatrix::zeros(d, d);
        for (m, &a) in self.measurement_ops.iter().zip(row) {
            out = out.add(&m.adjoint().mul(m)?.scale_re(a));
        }
        Ok(out.hermitian_part())
    }
}

/// The multilinear payoff coefficients: per player, a flat array over the
/// 2N interleaved indices (a_1, b_1, ..., a_N, b_N), each ranging over the
/// n^2 basis labels.
#[derive(Debug, Clone)]
pub struct PayoffTensor {
    basis: Arc<OperatorBasis>,
    players: usize,
    data: Vec<Vec<Complex64>>,
}

impl PayoffTensor {
    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    pub fn players(&self) -> usize {
        self.players
    }

    /// Number of basis labels per index, n^2.
    pub fn index_range(&self) -> usize {
        self.basis.operator_count()
    }

    pub fn entries(&self, player: usize) -> &[Complex64] {
        &self.data[player]
    }

    /// Entry for one player at the given (a_j, b_j) pairs, one per player.
    pub fn entry(&self, player: usize, pairs: &[(usize, usize)]) -> Complex64 {
        assert_eq!(pairs.len(), self.players);
        let m = self.index_range();
        let mut flat = 0usize;
        for &(a, b) in pairs {
            flat = flat * m * m + a * m + b;
        }
        self.data[player][flat]
    }

    /// Worst-case violation of the conjugate symmetry A^k(swapped pairs) =
    /// conj(A^k), the identity making every payoff real.
    pub fn conjugate_symmetry_residual(&self, player: usize) -> f64 {
        let m = self.index_range();
        let digits = 2 * self.players;
        let data = &self.data[player];
        let mut worst = 0.0f64;
        for (flat, &v) in data.iter().enumerate() {
            let mut rest = flat;
            let mut idx = vec![0usize; digits];
            for d in (0..digits).rev() {
                idx[d] = rest % m;
                rest /= m;
            }
            let mut swapped = 0usize;
            for j in 0..self.players {
                swapped = swapped * m * m + idx[2 * j + 1] * m + idx[2 * j];
            }
            worst = worst.max((data[swapped] - v.conj()).norm());
        }
        worst
    }

    /// || A^0 + A^1 ||_F for two-player tensors; zero for zero-sum games.
    pub fn zero_sum_residual(&self) -> Option<f64> {
        if self.players != 2 {
            return None;
        }
        let sum: f64 = self.data[0]
            .iter()
            .zip(&self.data[1])
            .map(|(a, b)| (a + b).norm_sqr())
            .sum();
        Some(sum.sqrt())
    }

    fn check_profile(&self, profile: &[&ChiMatrix]) -> Result<(), GameError> {
        if profile.len() != self.players {
            return Err(GameError::WrongProfileLength {
                expected: self.players,
                got: profile.len(),
            });
        }
        for chi in profile {
            if !chi.basis().same_as(&self.basis) {
                return Err(GameError::BasisMismatch);
            }
        }
        Ok(())
    }

    /// Contracts the trailing (a, b) pair of `data` with a chi matrix.
    fn contract_last(data: &[Complex64], m: usize, chi: &ComplexMatrix) -> Vec<Complex64> {
        let block = m * m;
        let prefix = data.len() / block;
        let mut out = vec![Complex64::new(0.0, 0.0); prefix];
        for (p, slot) in out.iter_mut().enumerate() {
            let base = p * block;
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..m {
                for b in 0..m {
                    acc += data[base + a * m + b] * chi.get(a, b);
                }
            }
            *slot = acc;
        }
        out
    }

    /// Contracts the leading (a, b) pair of `data` with a chi matrix.
    fn contract_first(data: &[Complex64], m: usize, chi: &ComplexMatrix) -> Vec<Complex64> {
        let block = m * m;
        let rest = data.len() / block;
        let mut out = vec![Complex64::new(0.0, 0.0); rest];
        for a in 0..m {
            for b in 0..m {
                let w = chi.get(a, b);
                if w.re == 0.0 && w.im == 0.0 {
                    continue;
                }
                let base = (a * m + b) * rest;
                for (slot, &v) in out.iter_mut().zip(&data[base..base + rest]) {
                    *slot += w * v;
                }
            }
        }
        out
    }

    /// Raw complex contractions chi^1 ... chi^N A^k, one per player. Real
    /// for valid strategies; exposed so callers can inspect the imaginary
    /// residue directly.
    pub fn evaluate_raw(&self, profile: &[&ChiMatrix]) -> Result<Vec<Complex64>, GameError> {
        self.check_profile(profile)?;
        let m = self.index_range();
        let mut out = Vec::with_capacity(self.players);
        for player_data in &self.data {
            let mut work = player_data.clone();
            for chi in profile.iter().rev() {
                work = Self::contract_last(&work, m, chi.matrix());
            }
            debug_assert_eq!(work.len(), 1);
            out.push(work[0]);
        }
        Ok(out)
    }

    /// Per-player payoffs Re[chi^1 ... chi^N A^k]. The contraction is kept
    /// complex and its imaginary residue asserted small: a large residue
    /// means the inputs are not valid strategies.
    pub fn evaluate(&self, profile: &[&ChiMatrix]) -> Result<Vec<f64>, GameError> {
        let raw = self.evaluate_raw(profile)?;
        let mut out = Vec::with_capacity(raw.len());
        for value in raw {
            if value.im.abs() > PAYOFF_REALITY_TOL {
                return Err(GameError::NonRealPayoff { imag: value.im });
            }
            out.push(value.re);
        }
        Ok(out)
    }

    /// Contracts every opponent, leaving the hermitian effective payoff H
    /// for `player`: P_player = tr(chi H) for any chi the player picks.
    pub fn effective_hermitian(
        &self,
        player: usize,
        others: &[&ChiMatrix],
    ) -> Result<ComplexMatrix, GameError> {
        if player >= self.players {
            return Err(GameError::NoSuchPlayer(player));
        }
        if others.len() != self.players - 1 {
            return Err(GameError::WrongProfileLength {
                expected: self.players - 1,
                got: others.len(),
            });
        }
        for chi in others {
            if !chi.basis().same_as(&self.basis) {
                return Err(GameError::BasisMismatch);
            }
        }
        let m = self.index_range();
        let mut work = self.data[player].clone();
        // Opponents after `player` occupy trailing pairs; contract them
        // innermost first. Opponents before `player` occupy leading pairs.
        for chi in others[player..].iter().rev() {
            work = Self::contract_last(&work, m, chi.matrix());
        }
        for chi in &others[..player] {
            work = Self::contract_first(&work, m, chi.matrix());
        }
        debug_assert_eq!(work.len(), m * m);
        // work holds C_{ab} with P = sum chi_{ab} C_{ab}; hermitize so that
        // P = tr(chi H) exactly.
        let h = ComplexMatrix::from_fn(m, m, |r, c| {
            (work[c * m + r] + work[r * m + c].conj()) * 0.5
        });
        Ok(h)
    }
}

/// A^k entries from the defining traces, in any basis. Parallel over the
/// output index space when the `parallel` feature is on.
pub fn build_payoff_tensor(
    game: &StaticQuantumGame,
    basis: &Arc<OperatorBasis>,
    max_joint_dim: usize,
) -> Result<PayoffTensor, GameError> {
    if basis.dim() != game.dim() {
        return Err(GameError::WrongShape {
            expected: game.dim(),
            rows: basis.dim(),
            cols: basis.dim(),
        });
    }
    let joint = game.joint_dim();
    if joint > max_joint_dim {
        return Err(GameError::TensorTooLarge {
            joint_dim: joint,
            max: max_joint_dim,
        });
    }
    let players = game.players();
    let m = basis.operator_count();
    let combos = m.pow(players as u32);

    // X_I = E~_{a_1} (x) ... (x) E~_{a_N} for every label tuple I.
    let mut joint_ops = Vec::with_capacity(combos);
    for flat in 0..combos {
        let mut rest = flat;
        let mut labels = vec![0usize; players];
        for d in (0..players).rev() {
            labels[d] = rest % m;
            rest /= m;
        }
        let factors: Vec<&ComplexMatrix> = labels.iter().map(|&a| basis.element(a)).collect();
        joint_ops.push(ComplexMatrix::tensor_product_all(&factors)?);
    }
    let right: Vec<ComplexMatrix> = joint_ops
        .iter()
        .map(|x| x.mul(game.rho()).expect("dims match"))
        .collect();

    let total = m.pow(2 * players as u32);
    let mut data = Vec::with_capacity(players);
    for k in 0..players {
        let weighted: Vec<ComplexMatrix> = right
            .iter()
            .map(|xr| game.payoff_operator(k).mul(xr).expect("dims match"))
            .collect();
        // A^k[I, J] = <X_J, R^k X_I rho>_F over interleaved pair indices.
        let entries = exec::map_indices(total, |flat| {
            let mut rest = flat;
            let mut digits = vec![0usize; 2 * players];
            for d in (0..2 * players).rev() {
                digits[d] = rest % m;
                rest /= m;
            }
            let mut i_flat = 0usize;
            let mut j_flat = 0usize;
            for p in 0..players {
                i_flat = i_flat * m + digits[2 * p];
                j_flat = j_flat * m + digits[2 * p + 1];
            }
            joint_ops[j_flat].frobenius_inner(&weighted[i_flat])
        });
        data.push(entries);
    }
    Ok(PayoffTensor {
        basis: Arc::clone(basis),
        players,
        data,
    })
}

/// Two-player closed form in the matrix-unit basis: with 0-based labels
/// a,b,c,d,i,j,k,l in 0..n,
/// A_{(ab)(cd)(ij)(kl)} = R[c n + k][a n + i] * rho[b n + j][d n + l].
/// Used as the independent second route against [`build_payoff_tensor`].
pub fn matrix_unit_closed_form(game: &StaticQuantumGame) -> Result<PayoffTensor, GameError> {
    if game.players() != 2 {
        return Err(GameError::PayoffTableShape {
            expected: 2,
            got: game.players(),
        });
    }
    let n = game.dim();
    let m = n * n;
    let basis = OperatorBasis::matrix_units(n);
    let total = m.pow(4);
    let mut data = Vec::with_capacity(2);
    for k_player in 0..2 {
        let r = game.payoff_operator(k_player);
        let rho = game.rho();
        let entries = exec::map_indices(total, |flat| {
            let delta = flat % m;
            let gamma = (flat / m) % m;
            let beta = (flat / (m * m)) % m;
            let alpha = flat / (m * m * m);
            let (a, b) = (alpha / n, alpha % n);
            let (c, d) = (beta / n, beta % n);
            let (i, j) = (gamma / n, gamma % n);
            let (kk, l) = (delta / n, delta % n);
            r.get(c * n + kk, a * n + i) * rho.get(b * n + j, d * n + l)
        });
        data.push(entries);
    }
    Ok(PayoffTensor {
        basis,
        players: 2,
        data,
    })
}

/// P_k = tr(R^k pi) for pi from [`apply_channel_pair`]: the direct payoff
/// route, evaluated without any basis expansion.
pub fn evaluate_payoff_direct(
    game: &StaticQuantumGame,
    channels: &[KrausChannel],
) -> Result<Vec<f64>, GameError> {
    if channels.len() != game.players() {
        return Err(GameError::WrongProfileLength {
            expected: game.players(),
            got: channels.len(),
        });
    }
    for ch in channels {
        if ch.dim() != game.dim() {
            return Err(GameError::WrongShape {
                expected: game.dim(),
                rows: ch.dim(),
                cols: ch.dim(),
            });
        }
    }
    let pi = apply_channel_pair(game.rho(), channels)?;
    let mut out = Vec::with_capacity(game.players());
    for k in 0..game.players() {
        let value = game.payoff_operator(k).mul(&pi)?.trace();
        if value.im.abs() > PAYOFF_REALITY_TOL {
            return Err(GameError::NonRealPayoff { imag: value.im });
        }
        out.push(value.re);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::kraus_to_chi;
    use crate::constructors;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bell_state() -> ComplexMatrix {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::outer(&[c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)])
    }

    fn random_density(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(d, d, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        let psd = g.mul(&g.adjoint()).unwrap();
        psd.scale_re(1.0 / psd.trace().re)
    }

    fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(d, d, |_, _| {
            c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        g.add(&g.adjoint()).scale_re(0.5)
    }

    fn random_game(n: usize, rng: &mut ChaCha8Rng) -> StaticQuantumGame {
        let d = n * n;
        let rho = random_density(d, rng);
        let r1 = random_hermitian(d, rng);
        let r2 = random_hermitian(d, rng);
        StaticQuantumGame::new(2, n, rho, vec![r1, r2], false).unwrap()
    }

    #[test]
    fn povm_von_neumann_bell_scheme_recovers_projector() {
        let inv = std::f64::consts::FRAC_1_SQRT_2;
        let psi = [c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)];
        let phi_minus = [c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-inv, 0.0)];
        let ops = vec![
            ComplexMatrix::outer(&psi),
            ComplexMatrix::matrix_unit(4, 1, 1),
            ComplexMatrix::matrix_unit(4, 2, 2),
            ComplexMatrix::outer(&phi_minus),
        ];
        let scheme =
            PovmPayoffScheme::new(ops, vec![vec![1.0, 0.0, 0.0, 0.0]; 2]).unwrap();
        let r = scheme.payoff_operator(0).unwrap();
        assert!(r.sub(&ComplexMatrix::outer(&psi)).frobenius_norm() < 1e-12);
    }

    #[test]
    fn povm_equal_payoffs_give_scaled_identity() {
        let scheme = PovmPayoffScheme::new(
            vec![
                ComplexMatrix::identity(2).scale_re(0.5f64.sqrt()),
                ComplexMatrix::identity(2).scale_re(0.5f64.sqrt()),
            ],
            vec![vec![0.7, 0.7]],
        )
        .unwrap();
        let r = scheme.payoff_operator(0).unwrap();
        assert!(
            r.sub(&ComplexMatrix::identity(2).scale_re(0.7)).frobenius_norm() < 1e-12
        );
    }

    #[test]
    fn povm_payoff_operator_eigenvalues_bounded() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for seed in 0..20u64 {
            // Random POVM from a random CPTP channel's Kraus operators.
            let ch = crate::channels::KrausChannel::random_cptp(3, 3, 400 + seed);
            let payoffs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.0..1.0)).collect();
            let scheme =
                PovmPayoffScheme::new(ch.operators().to_vec(), vec![payoffs.clone()]).unwrap();
            let r = scheme.payoff_operator(0).unwrap();
            let eig = r.hermitian_eig().unwrap();
            let lo = payoffs.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = payoffs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            assert!(eig.eigenvalues[0] >= lo - 1e-9);
            assert!(*eig.eigenvalues.last().unwrap() <= hi + 1e-9);
        }
    }

    #[test]
    fn povm_incomplete_rejected() {
        let err = PovmPayoffScheme::new(
            vec![ComplexMatrix::identity(2).scale_re(0.5)],
            vec![vec![1.0]],
        )
        .unwrap_err();
        assert!(matches!(err, GameError::IncompletePovm { .. }));
    }

    #[test]
    fn game_validation_rejects_bad_states() {
        let rho = ComplexMatrix::from_real_diag(&[0.9, 0.0, 0.0, 0.0]);
        let r = ComplexMatrix::identity(4);
        let err =
            StaticQuantumGame::new(2, 2, rho, vec![r.clone(), r.clone()], false).unwrap_err();
        assert!(matches!(err, GameError::InvalidState { .. }));

        let neg = ComplexMatrix::from_real_diag(&[1.5, -0.5, 0.0, 0.0]);
        let err = StaticQuantumGame::new(2, 2, neg, vec![r.clone(), r.clone()], false)
            .unwrap_err();
        assert!(matches!(err, GameError::InvalidState { .. }));

        // Zero-sum flag demands cancelling payoff operators.
        let rho = ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0]);
        let err = StaticQuantumGame::new(2, 2, rho, vec![r.clone(), r], true).unwrap_err();
        assert!(matches!(err, GameError::ZeroSumViolation { .. }));
    }

    #[test]
    fn tensor_general_route_matches_closed_form() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let basis = OperatorBasis::matrix_units(2);
        for _ in 0..5 {
            let game = random_game(2, &mut rng);
            let general = build_payoff_tensor(&game, &basis, 16).unwrap();
            let closed = matrix_unit_closed_form(&game).unwrap();
            for player in 0..2 {
                for (a, b) in general.entries(player).iter().zip(closed.entries(player)) {
                    assert!((a - b).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn tensor_conjugate_symmetry() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let basis = OperatorBasis::matrix_units(2);
        let game = random_game(2, &mut rng);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        for player in 0..2 {
            assert!(tensor.conjugate_symmetry_residual(player) <= 1e-10);
        }
    }

    #[test]
    fn bell_game_payoffs_by_both_routes() {
        let game = constructors::bell_example_game();
        let id = KrausChannel::identity(2);
        let direct = evaluate_payoff_direct(&game, &[id.clone(), id.clone()]).unwrap();
        assert!((direct[0] - 1.0).abs() <= 1e-9);
        assert!((direct[1] - 1.0).abs() <= 1e-9);

        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let chi_id = kraus_to_chi(&id, &basis).unwrap();
        let chi_pay = tensor.evaluate(&[&chi_id, &chi_id]).unwrap();
        assert!((chi_pay[0] - 1.0).abs() <= 1e-9);

        // Frozen oracle: pi = I/2 (x) |0><0| gives tr(R pi) = 1/4.
        let rep = KrausChannel::replace_with_zero(2);
        let direct_rep = evaluate_payoff_direct(&game, &[id, rep.clone()]).unwrap();
        assert!((direct_rep[0] - 0.25).abs() <= 1e-9);
        let chi_rep = kraus_to_chi(&rep, &basis).unwrap();
        let chi_pay_rep = tensor.evaluate(&[&chi_id, &chi_rep]).unwrap();
        assert!((chi_pay_rep[0] - 0.25).abs() <= 1e-9);
    }

    #[test]
    fn dual_path_equivalence_random_sweep() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let basis = OperatorBasis::matrix_units(2);
        for trial in 0..40u64 {
            let game = random_game(2, &mut rng);
            let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
            let ch1 = KrausChannel::random_cptp(2, 1 + (trial as usize % 4), 2 * trial);
            let ch2 = KrausChannel::random_cptp(2, 1 + (trial as usize % 3), 2 * trial + 1);
            let direct = evaluate_payoff_direct(&game, &[ch1.clone(), ch2.clone()]).unwrap();
            let chi1 = kraus_to_chi(&ch1, &basis).unwrap();
            let chi2 = kraus_to_chi(&ch2, &basis).unwrap();
            let viachi = tensor.evaluate(&[&chi1, &chi2]).unwrap();
            for (d, v) in direct.iter().zip(&viachi) {
                assert!((d - v).abs() <= 1e-8, "trial {trial}: {d} vs {v}");
            }
        }
    }

    #[test]
    fn payoff_multilinearity() {
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let basis = OperatorBasis::matrix_units(2);
        let game = random_game(2, &mut rng);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let chi = kraus_to_chi(&KrausChannel::random_cptp(2, 2, 600), &basis).unwrap();
        let xi1 = kraus_to_chi(&KrausChannel::random_cptp(2, 3, 601), &basis).unwrap();
        let xi2 = kraus_to_chi(&KrausChannel::random_cptp(2, 1, 602), &basis).unwrap();
        let mixed = ChiMatrix::new(
            Arc::clone(&basis),
            xi1.matrix().add(xi2.matrix()).scale_re(0.5),
        )
        .unwrap();
        let p1 = tensor.evaluate(&[&chi, &xi1]).unwrap()[0];
        let p2 = tensor.evaluate(&[&chi, &xi2]).unwrap()[0];
        let pm = tensor.evaluate(&[&chi, &mixed]).unwrap()[0];
        assert!((pm - 0.5 * (p1 + p2)).abs() <= 1e-10);
    }

    #[test]
    fn zero_sum_payoffs_cancel() {
        let game = constructors::bell_zero_sum_game();
        for seed in 0..10u64 {
            let ch1 = KrausChannel::random_cptp(2, 2, 700 + seed);
            let ch2 = KrausChannel::random_cptp(2, 2, 800 + seed);
            let payoffs = evaluate_payoff_direct(&game, &[ch1, ch2]).unwrap();
            assert!((payoffs[0] + payoffs[1]).abs() <= 1e-9);
        }
    }

    #[test]
    fn effective_hermitian_reproduces_payoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let basis = OperatorBasis::matrix_units(2);
        let game = random_game(2, &mut rng);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let opponent = kraus_to_chi(&KrausChannel::random_cptp(2, 2, 900), &basis).unwrap();
        for player in 0..2 {
            let h = tensor.effective_hermitian(player, &[&opponent]).unwrap();
            assert!(h.hermitian_residual() <= 1e-10);
            for seed in 0..50u64 {
                let mine =
                    kraus_to_chi(&KrausChannel::random_cptp(2, 1 + (seed as usize % 4), seed), &basis)
                        .unwrap();
                let via_h = mine.matrix().mul(&h).unwrap().trace().re;
                let profile: Vec<&ChiMatrix> = if player == 0 {
                    vec![&mine, &opponent]
                } else {
                    vec![&opponent, &mine]
                };
                let full = tensor.evaluate(&profile).unwrap()[player];
                assert!((via_h - full).abs() <= 1e-9, "player {player} seed {seed}");
            }
        }
    }

    #[test]
    fn convex_mixtures_stay_feasible() {
        let basis = OperatorBasis::matrix_units(2);
        for seed in 0..20u64 {
            let a = kraus_to_chi(&KrausChannel::random_cptp(2, 2, seed), &basis).unwrap();
            let b = kraus_to_chi(&KrausChannel::random_cptp(2, 4, 50 + seed), &basis).unwrap();
            let t = (seed as f64 + 0.5) / 21.0;
            let mix = a.matrix().scale_re(t).add(&b.matrix().scale_re(1.0 - t));
            assert!(ChiMatrix::new(Arc::clone(&basis), mix).is_ok());
        }
    }

    #[test]
    fn tensor_size_guard() {
        let mut rng = ChaCha8Rng::seed_from_u64(47);
        let game = random_game(2, &mut rng);
        let basis = OperatorBasis::matrix_units(2);
        let err = build_payoff_tensor(&game, &basis, 2).unwrap_err();
        assert!(matches!(err, GameError::TensorTooLarge { joint_dim: 4, max: 2 }));
    }

    #[test]
    fn three_player_tensor_evaluates() {
        // Classical 3-player embedding exercises the N > 2 contraction path.
        let game = constructors::classical_embedding(
            &constructors::ClassicalGame::new(
                vec![2, 2, 2],
                vec![
                    vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0],
                    vec![0.0; 8],
                    vec![0.5; 8],
                ],
            )
            .unwrap(),
        )
        .unwrap();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let id = kraus_to_chi(&KrausChannel::identity(2), &basis).unwrap();
        let payoffs = tensor.evaluate(&[&id, &id, &id]).unwrap();
        // Everyone plays move 0 deterministically: payoff row (1, 0, 0.5).
        assert!((payoffs[0] - 1.0).abs() <= 1e-9);
        assert!(payoffs[1].abs() <= 1e-9);
        assert!((payoffs[2] - 0.5).abs() <= 1e-9);
    }
}
