//! Independent oracles for exercising qgame-core.
//!
//! Nothing here reuses the solver paths it checks: classical values come
//! from closed forms and enumeration, and quantum game values from payoff
//! evaluation over a fixed grid of unitary-mixing channels followed by
//! fictitious play on the resulting finite matrix game.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qgame_core::channels::{kraus_to_chi, ChiMatrix, KrausChannel};
use qgame_core::game::PayoffTensor;
use qgame_core::matrix::ComplexMatrix;

/// Value of a 2x2 zero-sum game for the row maximizer: the pure saddle
/// point when one exists, otherwise the mixed closed form
/// (ad - bc) / (a + d - b - c).
pub fn closed_form_2x2_value(m: &[[f64; 2]; 2]) -> f64 {
    let maximin = m
        .iter()
        .map(|row| row[0].min(row[1]))
        .fold(f64::NEG_INFINITY, f64::max);
    let minimax = (0..2)
        .map(|j| m[0][j].max(m[1][j]))
        .fold(f64::INFINITY, f64::min);
    if (maximin - minimax).abs() <= 1e-12 {
        return maximin;
    }
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    (a * d - b * c) / (a + d - b - c)
}

/// Row player's best-response value against a fixed column mixture, by
/// enumeration: max_a sum_i q_i r[a][i].
pub fn enumeration_best_response(matrix: &[Vec<f64>], column_mixed: &[f64]) -> f64 {
    matrix
        .iter()
        .map(|row| {
            row.iter()
                .zip(column_mixed)
                .map(|(r, q)| r * q)
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Expected payoff sum_{a,i} x_a y_i r[a][i].
pub fn bilinear_payoff(matrix: &[Vec<f64>], x: &[f64], y: &[f64]) -> f64 {
    matrix
        .iter()
        .zip(x)
        .map(|(row, &xa)| {
            xa * row
                .iter()
                .zip(y)
                .map(|(r, &yi)| r * yi)
                .sum::<f64>()
        })
        .sum()
}

fn pauli(k: usize) -> ComplexMatrix {
    let c = Complex64::new;
    match k {
        0 => ComplexMatrix::identity(2),
        1 => ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)])
            .expect("shape"),
        2 => ComplexMatrix::from_vec(2, 2, vec![c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)])
            .expect("shape"),
        _ => ComplexMatrix::from_vec(2, 2, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)])
            .expect("shape"),
    }
}

/// Rotation exp(-i theta/2 sigma_axis) about a Pauli axis.
fn rotation(axis: usize, theta: f64) -> ComplexMatrix {
    let half = theta / 2.0;
    let cos = Complex64::new(half.cos(), 0.0);
    let sin = Complex64::new(0.0, -half.sin());
    ComplexMatrix::identity(2)
        .scale(cos)
        .add(&pauli(axis).scale(sin))
}

/// A deterministic family of single-qubit channels: rotation unitaries on a
/// fixed angle grid, Pauli mixtures on a simplex grid, and seeded random
/// unitaries to fill up the requested count.
pub fn qubit_channel_grid(count: usize, seed: u64) -> Vec<KrausChannel> {
    let mut channels = Vec::new();
    for axis in 1..=3usize {
        for step in 0..12 {
            let theta = step as f64 * std::f64::consts::PI / 6.0;
            channels.push(
                KrausChannel::new(vec![rotation(axis, theta)]).expect("unitary channel"),
            );
            if channels.len() >= count {
                return channels;
            }
        }
    }
    // Pauli mixtures with weights on the simplex grid of step 1/5.
    let denom = 5i32;
    for w0 in 0..=denom {
        for w1 in 0..=(denom - w0) {
            for w2 in 0..=(denom - w0 - w1) {
                let w3 = denom - w0 - w1 - w2;
                let weights = [w0, w1, w2, w3].map(|w| w as f64 / denom as f64);
                let ops: Vec<ComplexMatrix> = weights
                    .iter()
                    .enumerate()
                    .filter(|(_, &w)| w > 0.0)
                    .map(|(k, &w)| pauli(k).scale_re(w.sqrt()))
                    .collect();
                channels.push(KrausChannel::new(ops).expect("Pauli mixture"));
                if channels.len() >= count {
                    return channels;
                }
            }
        }
    }
    let mut extra_seed = seed;
    while channels.len() < count {
        extra_seed = extra_seed.wrapping_add(1);
        channels.push(KrausChannel::random_cptp(2, 1, extra_seed));
    }
    channels
}

/// Certified value bounds of a finite zero-sum matrix game (rows maximize)
/// by fictitious play with running bounds: after every step,
/// min_j (xbar M)_j <= value <= max_i (M ybar)_i.
pub fn matrix_game_bounds(matrix: &[Vec<f64>], iterations: usize) -> (f64, f64) {
    let rows = matrix.len();
    let cols = matrix[0].len();
    let mut row_counts = vec![0.0f64; rows];
    let mut col_counts = vec![0.0f64; cols];
    // Accumulated payoffs against the opponent's empirical mixture.
    let mut row_scores = vec![0.0f64; rows];
    let mut col_scores = vec![0.0f64; cols];
    let mut best_lower = f64::NEG_INFINITY;
    let mut best_upper = f64::INFINITY;
    let mut row_pick = 0usize;
    let mut col_pick = 0usize;
    for t in 0..iterations {
        row_counts[row_pick] += 1.0;
        col_counts[col_pick] += 1.0;
        for (i, score) in row_scores.iter_mut().enumerate() {
            *score += matrix[i][col_pick];
        }
        for (j, score) in col_scores.iter_mut().enumerate() {
            *score += matrix[row_pick][j];
        }
        row_pick = argmax(&row_scores);
        col_pick = argmin(&col_scores);
        let steps = (t + 1) as f64;
        // xbar guarantees at least its worst column; ybar concedes at most
        // its best row.
        let lower = (0..cols)
            .map(|j| {
                (0..rows)
                    .map(|i| row_counts[i] / steps * matrix[i][j])
                    .sum::<f64>()
            })
            .fold(f64::INFINITY, f64::min);
        let upper = (0..rows)
            .map(|i| {
                (0..cols)
                    .map(|j| matrix[i][j] * col_counts[j] / steps)
                    .sum::<f64>()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        best_lower = best_lower.max(lower);
        best_upper = best_upper.min(upper);
    }
    (best_lower, best_upper)
}

fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

fn argmin(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x < v[best] {
            best = i;
        }
    }
    best
}

/// Value bounds for a two-player zero-sum tensor restricted to a finite
/// channel grid on each side: the payoff matrix over the grid is handed to
/// fictitious play. `grid_per_side^2` payoff evaluations feed the oracle.
pub fn grid_saddle_bounds(
    tensor: &PayoffTensor,
    grid_per_side: usize,
    fp_iterations: usize,
    seed: u64,
) -> (f64, f64) {
    let basis = tensor.basis();
    let channels = qubit_channel_grid(grid_per_side, seed);
    let chis: Vec<ChiMatrix> = channels
        .iter()
        .map(|ch| kraus_to_chi(ch, basis).expect("grid channels are feasible"))
        .collect();
    let matrix: Vec<Vec<f64>> = chis
        .iter()
        .map(|row| {
            chis.iter()
                .map(|col| {
                    tensor
                        .evaluate(&[row, col])
                        .expect("grid strategies evaluate")[0]
                })
                .collect()
        })
        .collect();
    matrix_game_bounds(&matrix, fp_iterations)
}

/// Best payoff for `player` over a sampled strategy set against a fixed
/// opponent: a sampling lower-bound oracle for best-response solvers.
pub fn grid_best_response_value(
    tensor: &PayoffTensor,
    player: usize,
    opponent: &ChiMatrix,
    samples: usize,
    seed: u64,
) -> f64 {
    let basis = tensor.basis();
    let mut best = f64::NEG_INFINITY;
    let grid = qubit_channel_grid(samples.min(128), seed);
    let mut evaluate = |chi: &ChiMatrix| {
        let payoffs = if player == 0 {
            tensor.evaluate(&[chi, opponent])
        } else {
            tensor.evaluate(&[opponent, chi])
        };
        if let Ok(p) = payoffs {
            best = best.max(p[player]);
        }
    };
    for ch in &grid {
        if let Ok(chi) = kraus_to_chi(ch, basis) {
            evaluate(&chi);
        }
    }
    let mut extra = seed;
    for _ in grid.len()..samples {
        extra = extra.wrapping_add(1);
        let kraus_count = 1 + (extra % 4) as usize;
        if let Ok(chi) = kraus_to_chi(&KrausChannel::random_cptp(2, kraus_count, extra), basis) {
            evaluate(&chi);
        }
    }
    best
}

/// Seeded random bimatrix game with entries in [-range, range].
pub fn random_bimatrix(
    rows: usize,
    cols: usize,
    range: f64,
    rng: &mut ChaCha8Rng,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut draw = |_: usize| {
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.gen_range(-range..range)).collect())
            .collect::<Vec<Vec<f64>>>()
    };
    let a = draw(0);
    let b = draw(1);
    (a, b)
}

/// Deterministic RNG for test drivers.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_handles_saddle_and_mixed() {
        assert_eq!(closed_form_2x2_value(&[[1.0, -1.0], [-1.0, 1.0]]), 0.0);
        assert!((closed_form_2x2_value(&[[3.0, 1.0], [1.0, 2.0]]) - 5.0 / 3.0).abs() < 1e-12);
        assert_eq!(closed_form_2x2_value(&[[2.0, 3.0], [1.0, 4.0]]), 2.0);
    }

    #[test]
    fn fictitious_play_brackets_matching_pennies() {
        let (lo, hi) = matrix_game_bounds(&[vec![1.0, -1.0], vec![-1.0, 1.0]], 4000);
        assert!(lo <= 0.0 + 1e-9 && 0.0 <= hi + 1e-9);
        assert!(hi - lo < 0.05);
    }

    #[test]
    fn channel_grid_is_feasible_and_deterministic() {
        let grid = qubit_channel_grid(100, 3);
        assert_eq!(grid.len(), 100);
        for ch in &grid {
            assert!(ch.trace_preservation_residual() <= 1e-9);
        }
        let again = qubit_channel_grid(100, 3);
        for (a, b) in grid.iter().zip(&again) {
            for (x, y) in a.operators().iter().zip(b.operators()) {
                assert_eq!(x, y);
            }
        }
    }
}
