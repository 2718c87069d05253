//! Property suites behind the `verify` CLI command: exhaustive checks of
//! the diagonal construction, randomized payoff-reality and dual-path
//! sweeps, classical-embedding fidelity, and the non-redundancy witness
//! search with the strategy-set dimension count.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channels::{kraus_to_chi, KrausChannel, OperatorBasis, TracePreservation};
use crate::constructors::{classical_embedding, diagonal_game, mixed_to_chi, ClassicalGame};
use crate::game::{build_payoff_tensor, evaluate_payoff_direct, GameError, StaticQuantumGame};
use crate::matrix::ComplexMatrix;
use crate::solvers::{redundancy_witness, RedundancyOutcome, SolverError};

/// One named property with its pass flag and worst observed residual.
#[derive(Debug, Clone)]
pub struct PropertyCheck {
    pub name: String,
    pub passed: bool,
    pub worst_residual: f64,
    pub tolerance: f64,
    /// Counterexample description when the property failed.
    pub detail: Option<String>,
}

impl PropertyCheck {
    fn against(name: &str, worst: f64, tolerance: f64, detail: Option<String>) -> Self {
        Self {
            name: name.to_string(),
            passed: worst <= tolerance,
            worst_residual: worst,
            tolerance,
            detail,
        }
    }
}

/// A batch of property checks for one verification target.
#[derive(Debug, Clone)]
pub struct VerifyReport {
    pub target: String,
    pub checks: Vec<PropertyCheck>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn random_density(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    let psd = g.mul(&g.adjoint()).expect("square");
    psd.scale_re(1.0 / psd.trace().re)
}

fn random_hermitian(d: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_fn(d, d, |_, _| {
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
    });
    g.add(&g.adjoint()).scale_re(0.5)
}

/// A random two-player game at per-player dimension n.
pub fn random_game(n: usize, rng: &mut ChaCha8Rng) -> StaticQuantumGame {
    let d = n * n;
    let rho = random_density(d, rng);
    let r1 = random_hermitian(d, rng);
    let r2 = random_hermitian(d, rng);
    StaticQuantumGame::new(2, n, rho, vec![r1, r2], false).expect("construction is valid")
}

/// Exhaustive check that the diagonal game's tensor is
/// (1/n^2) delta_{alpha gamma} delta_{beta delta} over all (n^2)^4 entries.
pub fn theorem3(n: usize, max_joint_dim: usize) -> Result<VerifyReport, GameError> {
    let game = diagonal_game(n);
    let basis = OperatorBasis::matrix_units(n);
    let tensor = build_payoff_tensor(&game, &basis, max_joint_dim)?;
    let m = n * n;
    let inv = 1.0 / (n * n) as f64;
    let mut worst_diag = 0.0f64;
    let mut worst_off = 0.0f64;
    let mut diag_count = 0usize;
    let mut detail = None;
    for alpha in 0..m {
        for beta in 0..m {
            for gamma in 0..m {
                for delta in 0..m {
                    let v = tensor.entry(0, &[(alpha, beta), (gamma, delta)]);
                    if alpha == gamma && beta == delta {
                        diag_count += 1;
                        let r = (v - Complex64::new(inv, 0.0)).norm();
                        if r > worst_diag {
                            worst_diag = r;
                        }
                    } else {
                        let r = v.norm();
                        if r > worst_off {
                            worst_off = r;
                            if r > 1e-12 {
                                detail = Some(format!(
                                    "off-structure entry at ({alpha},{beta},{gamma},{delta}) = {v}"
                                ));
                            }
                        }
                    }
                }
            }
        }
    }
    let checks = vec![
        PropertyCheck::against(
            &format!("diagonal entries equal 1/{} ({} of {})", n * n, diag_count, m * m * m * m),
            worst_diag,
            1e-12,
            None,
        ),
        PropertyCheck::against("off-structure entries vanish", worst_off, 1e-12, detail),
    ];
    Ok(VerifyReport {
        target: format!("theorem3 n={n}"),
        checks,
    })
}

struct RealitySweep {
    worst_diff: f64,
    worst_imag: f64,
    detail: Option<String>,
}

fn reality_sweep_game(
    game: &StaticQuantumGame,
    draws: usize,
    seed: u64,
    max_joint_dim: usize,
    acc: &mut RealitySweep,
) -> Result<(), GameError> {
    let n = game.dim();
    let basis = OperatorBasis::matrix_units(n);
    let tensor = build_payoff_tensor(game, &basis, max_joint_dim)?;
    for draw in 0..draws {
        let k1 = 1 + (draw % (n * n));
        let k2 = 1 + ((draw / 2) % (n * n));
        let ch1 = KrausChannel::random_cptp(n, k1, seed ^ (2 * draw as u64));
        let ch2 = KrausChannel::random_cptp(n, k2, seed ^ (2 * draw as u64 + 1));
        let direct = evaluate_payoff_direct(game, &[ch1.clone(), ch2.clone()])?;
        let chi1 = kraus_to_chi(&ch1, &basis)?;
        let chi2 = kraus_to_chi(&ch2, &basis)?;
        let raw = tensor.evaluate_raw(&[&chi1, &chi2])?;
        for (player, z) in raw.iter().enumerate() {
            let diff = (direct[player] - z.re).abs();
            if diff > acc.worst_diff {
                acc.worst_diff = diff;
                if diff > 1e-8 {
                    acc.detail = Some(format!(
                        "draw {draw}, player {player}: direct {} vs chi {}",
                        direct[player], z.re
                    ));
                }
            }
            acc.worst_imag = acc.worst_imag.max(z.im.abs());
        }
    }
    Ok(())
}

fn reality_report(target: String, acc: RealitySweep) -> VerifyReport {
    VerifyReport {
        target,
        checks: vec![
            PropertyCheck::against("dual-path payoff agreement", acc.worst_diff, 1e-8, acc.detail),
            PropertyCheck::against(
                "imaginary residue of the contraction",
                acc.worst_imag,
                1e-9,
                None,
            ),
        ],
    }
}

/// Randomized dual-path and reality sweep: |direct - chi| and the imaginary
/// residue of the raw contraction over random games and channels.
pub fn payoff_reality(n: usize, draws: usize, seed: u64) -> Result<VerifyReport, GameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = RealitySweep {
        worst_diff: 0.0,
        worst_imag: 0.0,
        detail: None,
    };
    for draw in 0..draws {
        let game = random_game(n, &mut rng);
        reality_sweep_game(&game, 1, seed ^ (draw as u64) << 16, game.joint_dim(), &mut acc)?;
    }
    Ok(reality_report(format!("reality n={n} draws={draws}"), acc))
}

/// The same sweep against one fixed game, drawing only the channels.
pub fn payoff_reality_on(
    game: &StaticQuantumGame,
    draws: usize,
    seed: u64,
    max_joint_dim: usize,
) -> Result<VerifyReport, GameError> {
    let mut acc = RealitySweep {
        worst_diff: 0.0,
        worst_imag: 0.0,
        detail: None,
    };
    reality_sweep_game(game, draws, seed, max_joint_dim, &mut acc)?;
    Ok(reality_report(
        format!("reality (fixed game) draws={draws}"),
        acc,
    ))
}

/// Classical embedding fidelity: random bimatrix games and mixed strategies
/// evaluated quantum-mechanically match the bilinear payoff, and extraction
/// roundtrips exactly.
pub fn embedding_fidelity(games: usize, samples: usize, seed: u64) -> Result<VerifyReport, GameError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = OperatorBasis::matrix_units(2);
    let mut worst = 0.0f64;
    let mut roundtrip_failures = 0usize;
    let mut detail = None;
    for g in 0..games {
        let a: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let b: Vec<Vec<f64>> = (0..2)
            .map(|_| (0..2).map(|_| rng.gen_range(-3.0..3.0)).collect())
            .collect();
        let classical = ClassicalGame::from_bimatrix(&a, &b).expect("shape is valid");
        let quantum = classical_embedding(&classical).expect("2x2 games embed at n=2");
        let tensor = build_payoff_tensor(&quantum, &basis, quantum.joint_dim())?;
        if crate::constructors::extract_classical_game(&quantum)
            .map(|rec| rec != classical)
            .unwrap_or(true)
        {
            roundtrip_failures += 1;
        }
        for _ in 0..samples {
            let p = rng.gen_range(0.0..1.0);
            let q = rng.gen_range(0.0..1.0);
            let chi_p = mixed_to_chi(&[p, 1.0 - p], 2).expect("valid distribution");
            let chi_q = mixed_to_chi(&[q, 1.0 - q], 2).expect("valid distribution");
            let payoffs = tensor.evaluate(&[&chi_p, &chi_q])?;
            for player in 0..2 {
                let mut expect = 0.0;
                for (ai, pa) in [(0usize, p), (1, 1.0 - p)] {
                    for (bi, qb) in [(0usize, q), (1, 1.0 - q)] {
                        expect += pa * qb * classical.payoff(player, &[ai, bi]);
                    }
                }
                let diff = (payoffs[player] - expect).abs();
                if diff > worst {
                    worst = diff;
                    if diff > 1e-10 {
                        detail = Some(format!("game {g}: quantum {} vs bilinear {expect}", payoffs[player]));
                    }
                }
            }
        }
    }
    Ok(VerifyReport {
        target: format!("embedding games={games} samples={samples}"),
        checks: vec![
            PropertyCheck::against("quantum equals bilinear payoff", worst, 1e-10, detail),
            PropertyCheck::against(
                "extraction roundtrips exactly",
                roundtrip_failures as f64,
                0.0,
                None,
            ),
        ],
    })
}

/// Non-redundancy of the diagonal game: every random pair of distinct
/// strategies admits a constructive witness opponent, and the linearized
/// constraint system confirms the 16^q - 4^q strategy-set dimension.
pub fn nonredundancy(n: usize, pairs: usize, seed: u64) -> Result<VerifyReport, SolverError> {
    let game = diagonal_game(n);
    let basis = OperatorBasis::matrix_units(n);
    let tensor = build_payoff_tensor(&game, &basis, game.joint_dim())?;
    let mut found = 0usize;
    let mut attempted = 0usize;
    let mut smallest_separation = f64::INFINITY;
    let mut detail = None;
    let mut pair_seed = seed;
    while attempted < pairs {
        pair_seed = pair_seed.wrapping_add(1);
        let a = kraus_to_chi(
            &KrausChannel::random_cptp(n, 1 + (pair_seed % (n * n) as u64) as usize, pair_seed),
            &basis,
        )?;
        let b = kraus_to_chi(
            &KrausChannel::random_cptp(
                n,
                1 + ((pair_seed / 3) % (n * n) as u64) as usize,
                pair_seed ^ 0x9e3779b97f4a7c15,
            ),
            &basis,
        )?;
        if a.matrix().sub(b.matrix()).frobenius_norm() <= 1e-6 {
            continue;
        }
        attempted += 1;
        match redundancy_witness(&tensor, 0, &a, &b)? {
            RedundancyOutcome::Witness {
                payoff_difference, ..
            } => {
                found += 1;
                smallest_separation = smallest_separation.min(payoff_difference.abs());
            }
            RedundancyOutcome::Redundant => {
                detail = Some(format!("pair at seed {pair_seed} reported redundant"));
            }
        }
    }

    let mut checks = vec![PropertyCheck::against(
        &format!("witness found for all {attempted} distinct pairs (min separation {smallest_separation:.3e})"),
        (attempted - found) as f64,
        0.0,
        detail,
    )];
    if n.is_power_of_two() {
        let q = n.trailing_zeros();
        let tp = TracePreservation::new(&basis);
        let expected = 16u128.pow(q) - 4u128.pow(q);
        let got = tp.affine_dimension() as u128;
        checks.push(PropertyCheck::against(
            &format!("strategy-set dimension 16^{q} - 4^{q} = {expected}"),
            (got as i128 - expected as i128).unsigned_abs() as f64,
            0.0,
            Some(format!("constraint-system rank gives {got}")),
        ));
    }
    Ok(VerifyReport {
        target: format!("nonredundancy n={n} pairs={pairs}"),
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem3_passes_at_small_n() {
        for n in [2usize, 3] {
            let report = theorem3(n, 16).unwrap();
            assert!(report.passed(), "{report:?}");
        }
    }

    #[test]
    fn reality_sweep_passes() {
        let report = payoff_reality(2, 30, 11).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn embedding_sweep_passes() {
        let report = embedding_fidelity(10, 10, 13).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn nonredundancy_sweep_passes() {
        let report = nonredundancy(2, 10, 17).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
