//! Concrete game families: the diagonal construction whose payoff tensor
//! touches every strategy parameter, the Bell-state example, embeddings of
//! finite classical games, and the qubit-vs-bit efficiency accounting.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::channels::{kraus_to_chi, ChannelError, ChiMatrix, KrausChannel, OperatorBasis};
use crate::game::{GameError, GameMetadata, PovmPayoffScheme, StaticQuantumGame};
use crate::matrix::ComplexMatrix;

/// Dummy moves introduced by padding score this far below the worst real
/// payoff, so they are strictly dominated and never change equilibria.
pub const PAD_PENALTY: f64 = 1e6;

#[derive(Debug, Clone, Error)]
pub enum ConstructorError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error("player {player} has {moves} moves; at most {max} fit in dimension {max}")]
    TooManyMoves {
        player: usize,
        moves: usize,
        max: usize,
    },
    #[error("classical game shape is inconsistent: {0}")]
    MalformedClassicalGame(&'static str),
    #[error("game is not in embedded classical form: {reason} (residual {residual:.3e})")]
    NotEmbeddedForm { reason: &'static str, residual: f64 },
}

/// A finite classical game: per-player move counts and per-player payoff
/// arrays over joint moves, flattened row-major (player 0 varies slowest).
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalGame {
    moves: Vec<usize>,
    payoffs: Vec<Vec<f64>>,
}

impl ClassicalGame {
    pub fn new(moves: Vec<usize>, payoffs: Vec<Vec<f64>>) -> Result<Self, ConstructorError> {
        if moves.len() < 2 {
            return Err(ConstructorError::MalformedClassicalGame(
                "need at least two players",
            ));
        }
        if moves.iter().any(|&m| m == 0) {
            return Err(ConstructorError::MalformedClassicalGame(
                "every player needs at least one move",
            ));
        }
        let joint: usize = moves.iter().product();
        if payoffs.len() != moves.len() {
            return Err(ConstructorError::MalformedClassicalGame(
                "one payoff array per player required",
            ));
        }
        if payoffs.iter().any(|p| p.len() != joint) {
            return Err(ConstructorError::MalformedClassicalGame(
                "payoff array length must equal the joint move count",
            ));
        }
        if payoffs.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ConstructorError::MalformedClassicalGame(
                "payoffs must be finite",
            ));
        }
        Ok(Self { moves, payoffs })
    }

    /// Two-player game from per-player payoff matrices indexed [row][col].
    pub fn from_bimatrix(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<Self, ConstructorError> {
        let rows = a.len();
        let cols = a.first().map_or(0, Vec::len);
        if rows == 0
            || cols == 0
            || a.iter().any(|r| r.len() != cols)
            || b.len() != rows
            || b.iter().any(|r| r.len() != cols)
        {
            return Err(ConstructorError::MalformedClassicalGame(
                "bimatrix shapes disagree",
            ));
        }
        let flatten = |m: &[Vec<f64>]| m.iter().flatten().copied().collect::<Vec<f64>>();
        Self::new(vec![rows, cols], vec![flatten(a), flatten(b)])
    }

    /// Zero-sum two-player game from the row player's payoff matrix.
    pub fn zero_sum_from_matrix(m: &[Vec<f64>]) -> Result<Self, ConstructorError> {
        let neg: Vec<Vec<f64>> = m
            .iter()
            .map(|row| row.iter().map(|v| -v).collect())
            .collect();
        Self::from_bimatrix(m, &neg)
    }

    pub fn players(&self) -> usize {
        self.moves.len()
    }

    pub fn moves(&self) -> &[usize] {
        &self.moves
    }

    pub fn payoff_array(&self, player: usize) -> &[f64] {
        &self.payoffs[player]
    }

    pub fn flat_index(&self, joint: &[usize]) -> usize {
        assert_eq!(joint.len(), self.moves.len());
        joint
            .iter()
            .zip(&self.moves)
            .fold(0, |acc, (&a, &m)| acc * m + a)
    }

    pub fn payoff(&self, player: usize, joint: &[usize]) -> f64 {
        self.payoffs[player][self.flat_index(joint)]
    }

    pub fn is_zero_sum(&self, tol: f64) -> bool {
        let joint: usize = self.moves.iter().product();
        (0..joint).all(|i| {
            self.payoffs.iter().map(|p| p[i]).sum::<f64>().abs() <= tol
        })
    }
}

/// Qubit-versus-bit accounting for a two-player game at q qubits per
/// player, in exact integer arithmetic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EfficiencyReport {
    pub q: u32,
    /// Real dimension of each quantum strategy set: 16^q - 4^q.
    pub quantum_dim: u128,
    /// Dimension of the classical mixed-strategy simplex reachable with the
    /// same bit budget: 4^q - 1.
    pub classical_dim: u128,
    /// Qubits exchanged in the quantum protocol: q to each player and back.
    pub qubits_exchanged: u32,
    /// Bits needed classically to address quantum_dim + 1 vertices, both
    /// directions combined.
    pub classical_bits_required: u32,
}

fn ceil_log2(x: u128) -> u32 {
    if x <= 1 {
        0
    } else {
        128 - (x - 1).leading_zeros()
    }
}

pub fn efficiency_report(q: u32) -> EfficiencyReport {
    assert!((1..=31).contains(&q), "supported range is 1 <= q <= 31");
    let quantum_dim = 16u128.pow(q) - 4u128.pow(q);
    let classical_dim = 4u128.pow(q) - 1;
    EfficiencyReport {
        q,
        quantum_dim,
        classical_dim,
        qubits_exchanged: 4 * q,
        classical_bits_required: 2 * ceil_log2(quantum_dim + 1),
    }
}

impl EfficiencyReport {
    /// quantum_dim / classical_dim; exactly 4^q since
    /// 16^q - 4^q = 4^q (4^q - 1).
    pub fn dimension_ratio(&self) -> u128 {
        self.quantum_dim / self.classical_dim
    }

    /// Per-qubit dimension advantage (dimension_ratio)^(1/q); exactly 4.
    pub fn per_qubit_ratio(&self) -> f64 {
        (self.dimension_ratio() as f64).powf(1.0 / self.q as f64)
    }

    /// classical_bits_required / qubits_exchanged; the saturated factor of
    /// 2 for every q.
    pub fn transfer_factor(&self) -> f64 {
        self.classical_bits_required as f64 / self.qubits_exchanged as f64
    }
}

/// The two-player game with rho = R^1 = R^2 supported on the maximally
/// entangled directions: value 1/n at every (row, col) in
/// {0, n+1, 2(n+1), ...}^2, zero elsewhere. Its payoff tensor in the
/// matrix-unit basis is (1/n^2) delta_{a c} delta_{b d}, so the payoff
/// touches every independent strategy parameter.
pub fn diagonal_game(n: usize) -> StaticQuantumGame {
    assert!(n >= 2);
    let joint = n * n;
    let inv = 1.0 / n as f64;
    let mut r = ComplexMatrix::zeros(joint, joint);
    for x in 0..n {
        for y in 0..n {
            r.set(x * (n + 1), y * (n + 1), Complex64::new(inv, 0.0));
        }
    }
    StaticQuantumGame::new(2, n, r.clone(), vec![r.clone(), r], false)
        .expect("diagonal construction is a valid game")
        .with_metadata(GameMetadata {
            name: Some(format!("diagonal-n{n}")),
            description: Some(
                "maximally entangled state and matching payoff projector".into(),
            ),
        })
}

/// The Bell-state example: rho = R = |psi><psi| with
/// |psi> = (|00> + |11>)/sqrt(2). Identical to diagonal_game(2).
pub fn bell_example_game() -> StaticQuantumGame {
    diagonal_game(2).with_metadata(GameMetadata {
        name: Some("bell".into()),
        description: Some("both players are paid tr(|psi><psi| pi)".into()),
    })
}

/// Zero-sum variant of the Bell example: R^1 = |psi><psi|, R^2 = -R^1.
pub fn bell_zero_sum_game() -> StaticQuantumGame {
    let base = diagonal_game(2);
    let r = base.payoff_operator(0).clone();
    let neg = r.scale_re(-1.0);
    StaticQuantumGame::new(2, 2, base.rho().clone(), vec![r, neg], true)
        .expect("negating one payoff preserves validity")
        .with_metadata(GameMetadata {
            name: Some("bell-zero-sum".into()),
            description: Some("player 1 maximizes tr(|psi><psi| pi), player 2 minimizes".into()),
        })
}

/// The referee measurement realizing the Bell example: a von Neumann
/// measurement in the basis {|psi>, |01>, |10>, |phi->} paying 1 for the
/// first outcome and 0 otherwise.
pub fn bell_povm_scheme() -> PovmPayoffScheme {
    let inv = std::f64::consts::FRAC_1_SQRT_2;
    let c = Complex64::new;
    let psi = [c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(inv, 0.0)];
    let phi_minus = [c(inv, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-inv, 0.0)];
    PovmPayoffScheme::new(
        vec![
            ComplexMatrix::outer(&psi),
            ComplexMatrix::matrix_unit(4, 1, 1),
            ComplexMatrix::matrix_unit(4, 2, 2),
            ComplexMatrix::outer(&phi_minus),
        ],
        vec![vec![1.0, 0.0, 0.0, 0.0], vec![1.0, 0.0, 0.0, 0.0]],
    )
    .expect("the Bell basis is complete")
}

/// Embeds a finite classical game: unentangled initial state |0...0> and
/// diagonal payoff operators in computational-basis order, with the
/// per-player dimension chosen as the smallest power of two holding every
/// player's moves. Missing moves are padded with a strictly dominated
/// penalty payoff.
pub fn classical_embedding(game: &ClassicalGame) -> Result<StaticQuantumGame, ConstructorError> {
    let max_moves = game.moves().iter().copied().max().unwrap_or(1);
    let n = max_moves.next_power_of_two().max(2);
    classical_embedding_with_dim(game, n)
}

/// Embedding at an explicit per-player dimension n; rejects games whose
/// move count exceeds n.
pub fn classical_embedding_with_dim(
    game: &ClassicalGame,
    n: usize,
) -> Result<StaticQuantumGame, ConstructorError> {
    assert!(n >= 2);
    for (player, &moves) in game.moves().iter().enumerate() {
        if moves > n {
            return Err(ConstructorError::TooManyMoves {
                player,
                moves,
                max: n,
            });
        }
    }
    let players = game.players();
    let joint = n.pow(players as u32);
    let padded = game.moves().iter().any(|&m| m < n);
    let pad_value = game
        .payoffs
        .iter()
        .flatten()
        .fold(f64::INFINITY, |acc, &v| acc.min(v))
        - PAD_PENALTY;

    let rho = ComplexMatrix::matrix_unit(joint, 0, 0);
    let mut payoff_ops = Vec::with_capacity(players);
    for player in 0..players {
        let mut diag = vec![0.0; joint];
        for (flat, entry) in diag.iter_mut().enumerate() {
            // Decode the joint computational index into per-player moves.
            let mut rest = flat;
            let mut tuple = vec![0usize; players];
            for d in (0..players).rev() {
                tuple[d] = rest % n;
                rest /= n;
            }
            let real = tuple
                .iter()
                .zip(game.moves())
                .all(|(&a, &m)| a < m);
            *entry = if real {
                game.payoff(player, &tuple)
            } else {
                pad_value
            };
        }
        payoff_ops.push(ComplexMatrix::from_real_diag(&diag));
    }
    let zero_sum = players == 2 && game.is_zero_sum(0.0) && !padded;
    let description = if padded {
        format!(
            "classical embedding with dummy-move padding at payoff {pad_value:.3e}"
        )
    } else {
        "classical embedding".to_string()
    };
    Ok(
        StaticQuantumGame::new(players, n, rho, payoff_ops, zero_sum)?
            .with_metadata(GameMetadata {
                name: None,
                description: Some(description),
            }),
    )
}

/// The chi matrix of a classical mixed strategy: the channel mixing
/// cyclic-shift unitaries with the given probabilities, so that move a is
/// played with probability p_a out of |0>.
pub fn mixed_to_chi(probabilities: &[f64], n: usize) -> Result<ChiMatrix, ConstructorError> {
    let channel = KrausChannel::shift_mixture(probabilities, n)?;
    Ok(kraus_to_chi(&channel, &OperatorBasis::matrix_units(n))?)
}

/// Recovers the classical game from an embedded quantum game. The structure
/// check (computational-pure initial state, diagonal payoff operators) keeps
/// the recovery honest; the diagonal entries come back exactly.
pub fn extract_classical_game(
    game: &StaticQuantumGame,
) -> Result<ClassicalGame, ConstructorError> {
    let joint = game.joint_dim();
    let pure = ComplexMatrix::matrix_unit(joint, 0, 0);
    let state_residual = game.rho().sub(&pure).frobenius_norm();
    if state_residual > 1e-9 {
        return Err(ConstructorError::NotEmbeddedForm {
            reason: "initial state is not |0...0><0...0|",
            residual: state_residual,
        });
    }
    let mut payoffs = Vec::with_capacity(game.players());
    for player in 0..game.players() {
        let r = game.payoff_operator(player);
        let mut off = 0.0f64;
        for row in 0..joint {
            for col in 0..joint {
                if row != col {
                    off += r.get(row, col).norm_sqr();
                }
            }
        }
        let off = off.sqrt();
        if off > 1e-9 {
            return Err(ConstructorError::NotEmbeddedForm {
                reason: "payoff operator is not diagonal in the computational basis",
                residual: off,
            });
        }
        payoffs.push((0..joint).map(|i| r.get(i, i).re).collect());
    }
    Ok(ClassicalGame::new(
        vec![game.dim(); game.players()],
        payoffs,
    )?)
}

/// Arc-wrapped matrix-unit basis sized for a game.
pub fn default_basis(game: &StaticQuantumGame) -> Arc<OperatorBasis> {
    OperatorBasis::matrix_units(game.dim())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::KrausChannel;
    use crate::game::{build_payoff_tensor, evaluate_payoff_direct};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn diagonal_game_matches_displayed_bell_matrices() {
        let game = diagonal_game(2);
        for (r, c) in [(0usize, 0usize), (0, 3), (3, 0), (3, 3)] {
            assert_eq!(game.rho().get(r, c).re, 0.5);
            assert_eq!(game.payoff_operator(0).get(r, c).re, 0.5);
        }
        let total: f64 = game.rho().entries().iter().map(|z| z.norm()).sum();
        assert!((total - 2.0).abs() < 1e-12, "exactly four entries of 1/2");
        assert!((game.rho().trace().re - 1.0).abs() < 1e-12);
        // Rank-1 projector: rho^2 = rho.
        let squared = game.rho().mul(game.rho()).unwrap();
        assert!(squared.sub(game.rho()).frobenius_norm() < 1e-12);
    }

    #[test]
    fn diagonal_game_tensor_is_scaled_kronecker_delta() {
        for n in [2usize, 3] {
            let game = diagonal_game(n);
            let basis = OperatorBasis::matrix_units(n);
            let tensor = build_payoff_tensor(&game, &basis, n * n).unwrap();
            let m = n * n;
            let inv = 1.0 / (n * n) as f64;
            let mut nonzero = 0;
            for alpha in 0..m {
                for beta in 0..m {
                    for gamma in 0..m {
                        for delta in 0..m {
                            let v = tensor.entry(0, &[(alpha, beta), (gamma, delta)]);
                            if alpha == gamma && beta == delta {
                                assert!(
                                    (v.re - inv).abs() <= 1e-12 && v.im.abs() <= 1e-12,
                                    "diagonal entry at {alpha},{beta}"
                                );
                                nonzero += 1;
                            } else {
                                assert!(v.norm() <= 1e-12, "off-structure entry");
                            }
                        }
                    }
                }
            }
            assert_eq!(nonzero, m * m);
        }
    }

    #[test]
    fn bell_example_equals_diagonal_and_povm_route() {
        let bell = bell_example_game();
        let diag = diagonal_game(2);
        assert_eq!(bell.rho(), diag.rho());
        assert_eq!(bell.payoff_operator(0), diag.payoff_operator(0));

        let r = bell_povm_scheme().payoff_operator(0).unwrap();
        assert!(r.sub(bell.payoff_operator(0)).frobenius_norm() < 1e-12);

        let id = KrausChannel::identity(2);
        let payoffs = evaluate_payoff_direct(&bell, &[id.clone(), id]).unwrap();
        assert!((payoffs[0] - 1.0).abs() <= 1e-9);

        assert_eq!(efficiency_report(1).quantum_dim, 12);
    }

    #[test]
    fn classical_embedding_displays_paper_matrices() {
        let game = ClassicalGame::from_bimatrix(
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
            &[vec![5.0, 6.0], vec![7.0, 8.0]],
        )
        .unwrap();
        let quantum = classical_embedding(&game).unwrap();
        assert_eq!(quantum.dim(), 2);
        let rho = quantum.rho();
        assert_eq!(rho.get(0, 0).re, 1.0);
        assert!((rho.frobenius_norm() - 1.0).abs() < 1e-12);
        let r1 = quantum.payoff_operator(0);
        for (i, want) in [1.0, 2.0, 3.0, 4.0].iter().enumerate() {
            assert_eq!(r1.get(i, i).re, *want);
        }
        // Pure strategies via identity channels land on r11.
        let id = KrausChannel::identity(2);
        let payoffs = evaluate_payoff_direct(&quantum, &[id.clone(), id]).unwrap();
        assert!((payoffs[0] - 1.0).abs() <= 1e-9);
        assert!((payoffs[1] - 5.0).abs() <= 1e-9);
    }

    #[test]
    fn matching_pennies_is_zero_sum() {
        let mp = ClassicalGame::zero_sum_from_matrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]])
            .unwrap();
        let quantum = classical_embedding(&mp).unwrap();
        assert!(quantum.zero_sum());
        let sum = quantum
            .payoff_operator(0)
            .add(quantum.payoff_operator(1))
            .frobenius_norm();
        assert!(sum <= 1e-12);
    }

    #[test]
    fn embedding_tensor_support_matches_case_split() {
        // Nonzero entries only at b=d=j=l=0 (0-based), a=c, i=k.
        let game = ClassicalGame::from_bimatrix(
            &[vec![1.0, 2.0], vec![3.0, 4.0]],
            &[vec![0.0, 0.0], vec![0.0, 0.0]],
        )
        .unwrap();
        let quantum = classical_embedding(&game).unwrap();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&quantum, &basis, 4).unwrap();
        for alpha in 0..4usize {
            for beta in 0..4usize {
                for gamma in 0..4usize {
                    for delta in 0..4usize {
                        let v = tensor.entry(0, &[(alpha, beta), (gamma, delta)]);
                        let (a, b) = (alpha / 2, alpha % 2);
                        let (cc, d) = (beta / 2, beta % 2);
                        let (i, j) = (gamma / 2, gamma % 2);
                        let (k, l) = (delta / 2, delta % 2);
                        let in_support = b == 0 && d == 0 && j == 0 && l == 0 && a == cc && i == k;
                        if in_support {
                            let want = game.payoff(0, &[a, i]);
                            assert!((v.re - want).abs() <= 1e-12);
                        } else {
                            assert!(v.norm() <= 1e-12);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn mixed_to_chi_identity_and_bitflip() {
        let basis = OperatorBasis::matrix_units(2);
        let pure = mixed_to_chi(&[1.0, 0.0], 2).unwrap();
        let id_chi = kraus_to_chi(&KrausChannel::identity(2), &basis).unwrap();
        assert!(pure.approx_eq(&id_chi, 1e-12));

        let mixed = mixed_to_chi(&[0.25, 0.75], 2).unwrap();
        let flip_chi = kraus_to_chi(&KrausChannel::bit_flip(0.25), &basis).unwrap();
        assert!(mixed.approx_eq(&flip_chi, 1e-12));
        assert!((mixed.entry(0, 0).re - 0.25).abs() <= 1e-12);
    }

    #[test]
    fn embedded_mixed_strategies_reproduce_bilinear_payoff() {
        let mut rng = ChaCha8Rng::seed_from_u64(53);
        for _ in 0..25 {
            let a: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let b: Vec<Vec<f64>> = (0..2)
                .map(|_| (0..2).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let classical = ClassicalGame::from_bimatrix(&a, &b).unwrap();
            let quantum = classical_embedding(&classical).unwrap();
            let basis = OperatorBasis::matrix_units(2);
            let tensor = build_payoff_tensor(&quantum, &basis, 4).unwrap();

            let p = rng.gen_range(0.0..1.0);
            let q = rng.gen_range(0.0..1.0);
            let chi_p = mixed_to_chi(&[p, 1.0 - p], 2).unwrap();
            let chi_q = mixed_to_chi(&[q, 1.0 - q], 2).unwrap();
            let payoffs = tensor.evaluate(&[&chi_p, &chi_q]).unwrap();
            for player in 0..2 {
                let mut expect = 0.0;
                for (ai, pa) in [(0usize, p), (1, 1.0 - p)] {
                    for (bi, qb) in [(0usize, q), (1, 1.0 - q)] {
                        expect += pa * qb * classical.payoff(player, &[ai, bi]);
                    }
                }
                assert!(
                    (payoffs[player] - expect).abs() <= 1e-10,
                    "player {player}: {} vs {expect}",
                    payoffs[player]
                );
            }
        }
    }

    #[test]
    fn extraction_roundtrips_exactly() {
        let game = ClassicalGame::from_bimatrix(
            &[vec![1.25, -2.5], vec![0.125, 4.0]],
            &[vec![-1.0, 2.0], vec![3.5, -0.75]],
        )
        .unwrap();
        let quantum = classical_embedding(&game).unwrap();
        let recovered = extract_classical_game(&quantum).unwrap();
        assert_eq!(recovered, game);
    }

    #[test]
    fn extraction_rejects_entangled_state() {
        let err = extract_classical_game(&bell_example_game()).unwrap_err();
        assert!(matches!(err, ConstructorError::NotEmbeddedForm { .. }));
    }

    #[test]
    fn three_player_roundtrip() {
        let payoffs: Vec<Vec<f64>> = (0..3)
            .map(|k| (0..8).map(|i| (k * 8 + i) as f64 / 4.0).collect())
            .collect();
        let game = ClassicalGame::new(vec![2, 2, 2], payoffs).unwrap();
        let quantum = classical_embedding(&game).unwrap();
        assert_eq!(quantum.players(), 3);
        let recovered = extract_classical_game(&quantum).unwrap();
        assert_eq!(recovered, game);
    }

    #[test]
    fn padding_adds_dominated_moves() {
        let game = ClassicalGame::from_bimatrix(
            &[vec![1.0, 2.0, 3.0], vec![4.0, 5.0, 6.0], vec![7.0, 8.0, 9.0]],
            &vec![vec![0.0; 3]; 3],
        )
        .unwrap();
        let quantum = classical_embedding(&game).unwrap();
        assert_eq!(quantum.dim(), 4);
        let recovered = extract_classical_game(&quantum).unwrap();
        assert_eq!(recovered.moves(), &[4, 4]);
        // Original payoffs survive; padded rows sit far below the minimum.
        assert_eq!(recovered.payoff(0, &[0, 0]), 1.0);
        assert_eq!(recovered.payoff(0, &[2, 2]), 9.0);
        assert!(recovered.payoff(0, &[3, 0]) <= -PAD_PENALTY + 10.0);

        let too_many = classical_embedding_with_dim(&game, 2).unwrap_err();
        assert!(matches!(too_many, ConstructorError::TooManyMoves { .. }));
    }

    #[test]
    fn efficiency_numbers_match_the_example() {
        let r1 = efficiency_report(1);
        assert_eq!(r1.quantum_dim, 12);
        assert_eq!(r1.classical_dim, 3);
        assert_eq!(r1.qubits_exchanged, 4);
        assert_eq!(r1.classical_bits_required, 8);

        let r2 = efficiency_report(2);
        assert_eq!(r2.quantum_dim, 240);
        assert_eq!(r2.classical_dim, 15);

        assert_eq!(efficiency_report(3).quantum_dim, 4032);
    }

    #[test]
    fn efficiency_ratios_are_exact() {
        for q in 1..=8u32 {
            let r = efficiency_report(q);
            // 16^q - 4^q = 4^q (4^q - 1), so the ratio is exactly 4^q and
            // the per-qubit ratio exactly 4.
            assert_eq!(r.dimension_ratio(), 4u128.pow(q));
            assert_eq!(r.quantum_dim % r.classical_dim, 0);
            assert!((r.per_qubit_ratio() - 4.0).abs() < 1e-9);
            assert!(r.quantum_dim >= 2 * r.classical_dim);
            // The bit requirement is exactly 8q: the saturated factor of 2.
            assert_eq!(r.classical_bits_required, 8 * q);
            assert!((r.transfer_factor() - 2.0).abs() < 1e-12);
        }
    }
}
