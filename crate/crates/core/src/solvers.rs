//! Equilibrium machinery with numerical certificates.
//!
//! Everything here reduces to one primitive: maximizing the linear payoff
//! tr(chi H) over the strategy spectrahedron (PSD cone intersected with the
//! trace-preservation affine set). Best responses run proximal gradient
//! steps whose projection is computed by Dykstra's alternating scheme, and
//! every solve carries two certificates:
//!
//! - a projected-gradient stationarity residual, and
//! - a sound dual upper bound tr(Lambda) from a multiplier with
//!   Phi*(Lambda) >= H, recovered from the active face and shifted until
//!   feasible, so `value <= true max <= dual_upper` always holds.
//!
//! The zero-sum solver plays simultaneous best responses against the
//! running uniform averages and keeps the best certified bounds seen; the
//! Nash solver runs damped simultaneous best-response dynamics and reports
//! the residual honestly (non-convergence is a legitimate outcome).

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::channels::{
    depolarizing_chi, ChannelError, ChiMatrix, HermitianCoords, OperatorBasis, TracePreservation,
};
use crate::game::{GameError, PayoffTensor};
use crate::matrix::{ComplexMatrix, MatrixError};

/// Iteration cap for one Dykstra projection.
const DYKSTRA_CAP: usize = 5000;

/// Absolute exit threshold for the Dykstra gap between the PSD and affine
/// iterates; bounds the PSD violation of the returned point.
const DYKSTRA_EXIT: f64 = 1e-11;

#[derive(Debug, Clone, Error)]
pub enum SolverError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error("operation requires exactly {required} players, got {got}")]
    UnsupportedPlayers { required: usize, got: usize },
    #[error("tensor is not zero-sum: residual {residual:.3e}")]
    NotZeroSum { residual: f64 },
    #[error(
        "best response did not certify within tolerance: value {:.6}, dual gap {:.3e}, projected gradient {:.3e}",
        .0.value, .0.dual_gap(), .0.pg_residual
    )]
    BestResponseNonConvergence(Box<BestResponse>),
    #[error(
        "saddle solve did not reach the gap tolerance: v_lower {:.6}, v_upper {:.6}, gap {:.3e}",
        .0.v_lower, .0.v_upper, .0.gap()
    )]
    SaddleNonConvergence(Box<SaddleResult>),
    #[error("classical minimax failed: {0}")]
    ClassicalSolveFailed(&'static str),
    #[error("strategy profile has {got} entries for {expected} players")]
    WrongProfileLength { expected: usize, got: usize },
}

impl SolverError {
    fn br_value(err: &SolverError) -> Option<&BestResponse> {
        match err {
            SolverError::BestResponseNonConvergence(b) => Some(b),
            _ => None,
        }
    }
}

/// One chi matrix per player.
#[derive(Debug, Clone)]
pub struct StrategyProfile {
    chis: Vec<ChiMatrix>,
}

impl StrategyProfile {
    pub fn new(chis: Vec<ChiMatrix>) -> Self {
        assert!(!chis.is_empty());
        Self { chis }
    }

    /// All players at the full-rank depolarizing interior point.
    pub fn depolarizing(basis: &Arc<OperatorBasis>, players: usize) -> Self {
        Self::new(vec![depolarizing_chi(basis); players])
    }

    pub fn players(&self) -> usize {
        self.chis.len()
    }

    pub fn chi(&self, player: usize) -> &ChiMatrix {
        &self.chis[player]
    }

    pub fn chis(&self) -> &[ChiMatrix] {
        &self.chis
    }

    pub fn set(&mut self, player: usize, chi: ChiMatrix) {
        self.chis[player] = chi;
    }

    pub fn refs(&self) -> Vec<&ChiMatrix> {
        self.chis.iter().collect()
    }

    /// Everyone except `player`, in player order.
    pub fn without(&self, player: usize) -> Vec<&ChiMatrix> {
        self.chis
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != player)
            .map(|(_, c)| c)
            .collect()
    }
}

/// Best-response outcome: the maximizing strategy, its payoff, and the
/// certificates bracketing the true optimum.
#[derive(Debug, Clone)]
pub struct BestResponse {
    pub chi: ChiMatrix,
    /// tr(chi H): a lower bound on the optimum attained by a feasible point.
    pub value: f64,
    /// Fixed-point residual ||chi - P(chi + H/||H||)||_F.
    pub pg_residual: f64,
    /// Sound upper bound on the optimum from the dual multiplier.
    pub dual_upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BestResponse {
    pub fn dual_gap(&self) -> f64 {
        self.dual_upper - self.value
    }
}

/// Certified zero-sum outcome. `v_lower <= game value <= v_upper` holds by
/// weak duality of the two inner best responses.
#[derive(Debug, Clone)]
pub struct SaddleResult {
    pub v_lower: f64,
    pub v_upper: f64,
    pub strategies: StrategyProfile,
    pub iterations: usize,
    pub converged: bool,
    /// Certified bounds at each checkpoint; lower bounds never decrease and
    /// upper bounds never increase.
    pub history: Vec<SaddleCheckpoint>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleCheckpoint {
    pub iteration: usize,
    pub v_lower: f64,
    pub v_upper: f64,
}

impl SaddleResult {
    pub fn gap(&self) -> f64 {
        self.v_upper - self.v_lower
    }
}

/// Nash search outcome. The residual is a sound upper bound on how much any
/// player could gain by deviating from the returned profile.
#[derive(Debug, Clone)]
pub struct NashResult {
    pub profile: StrategyProfile,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Outcome of the redundancy check between two strategies of one player.
#[derive(Debug, Clone)]
pub enum RedundancyOutcome {
    /// An opponent strategy separating the two chi matrices, with the
    /// verified payoff difference it induces.
    Witness {
        opponent: ChiMatrix,
        payoff_difference: f64,
    },
    /// The payoff-difference functional vanishes on the whole strategy set
    /// (up to numerical certification), so the two strategies are
    /// interchangeable against every opponent.
    Redundant,
}

/// Shared per-basis machinery: the trace-preservation projector, the
/// interior point, and the cached dual-map images used by certificates.
#[derive(Debug, Clone)]
pub struct FeasibleSet {
    basis: Arc<OperatorBasis>,
    tp: TracePreservation,
    dep: ComplexMatrix,
    dep_min_eig: f64,
    /// Phi*(B_t) for each real coordinate direction B_t of Herm(n).
    dual_images: Vec<ComplexMatrix>,
    out_coords: HermitianCoords,
}

impl FeasibleSet {
    pub fn new(basis: &Arc<OperatorBasis>) -> Self {
        let tp = TracePreservation::new(basis);
        let dep = depolarizing_chi(basis).matrix().clone();
        let dep_min_eig = dep.min_eigenvalue().expect("dep chi is hermitian");
        let n = basis.dim();
        let m = basis.operator_count();
        let out_coords = HermitianCoords::new(n);

        // products[a][b] = E~_a^dag E~_b, then Phi*(L)_{ab} = tr(L products).
        let mut products = Vec::with_capacity(m * m);
        for a in 0..m {
            let adag = basis.element(a).adjoint();
            for b in 0..m {
                products.push(adag.mul(basis.element(b)).expect("square"));
            }
        }
        let mut dual_images = Vec::with_capacity(out_coords.real_dim());
        let mut unit = vec![0.0; out_coords.real_dim()];
        for t in 0..out_coords.real_dim() {
            unit[t] = 1.0;
            let lambda = out_coords.decode(&unit);
            unit[t] = 0.0;
            let image = ComplexMatrix::from_fn(m, m, |a, b| {
                lambda.mul(&products[a * m + b]).expect("square").trace()
            });
            dual_images.push(image);
        }

        Self {
            basis: Arc::clone(basis),
            tp,
            dep,
            dep_min_eig,
            dual_images,
            out_coords,
        }
    }

    pub fn basis(&self) -> &Arc<OperatorBasis> {
        &self.basis
    }

    pub fn trace_preservation(&self) -> &TracePreservation {
        &self.tp
    }

    pub fn depolarizing(&self) -> &ComplexMatrix {
        &self.dep
    }

    /// Projection onto PSD intersect trace-preserving, by Dykstra's
    /// alternating corrections. The returned point satisfies the affine
    /// constraint to roundoff and PSD to the exit threshold; a final nudge
    /// toward the interior point clears any residual negative eigenvalue.
    pub fn project(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut xk = x.hermitian_part();
        let m = xk.rows();
        let zero = ComplexMatrix::zeros(m, m);
        let mut p = zero.clone();
        let mut q = zero;
        let mut out = xk.clone();
        for _ in 0..DYKSTRA_CAP {
            let psd_in = xk.add(&p);
            let y = psd_in.psd_project().expect("hermitian by construction");
            p = psd_in.sub(&y);
            let aff_in = y.add(&q);
            out = self.tp.project(&aff_in);
            q = aff_in.sub(&out);
            if out.sub(&y).frobenius_norm() <= DYKSTRA_EXIT {
                break;
            }
            xk = out.clone();
        }
        // One clean alternation ending on the affine set, then a blend with
        // the interior point to clear residual negative eigenvalues.
        let out = self
            .tp
            .project(&out.psd_project().expect("hermitian by construction"));
        let min_eig = out.min_eigenvalue().expect("hermitian");
        if min_eig >= 0.0 {
            return out;
        }
        let gamma = ((-min_eig) * 2.0 / self.dep_min_eig).min(1e-3);
        out.scale_re(1.0 - gamma).add(&self.dep.scale_re(gamma))
    }

    /// Wraps a projected matrix as a validated strategy.
    pub fn wrap(&self, x: ComplexMatrix) -> Result<ChiMatrix, ChannelError> {
        ChiMatrix::new(Arc::clone(&self.basis), x)
    }

    /// A sound upper bound on max tr(chi H) over the feasible set, built
    /// from a dual multiplier Lambda with Phi*(Lambda) >= H.
    ///
    /// Candidate multipliers are least-squares solutions of the
    /// complementary-slackness equations Phi*(Lambda) w = H w on the
    /// near-active face of `primal`, swept over several rank cuts; each is
    /// shifted along the (positive definite) Gram image until feasible, so
    /// every candidate is a valid bound and the smallest is returned.
    pub fn dual_upper_bound(&self, h: &ComplexMatrix, primal: &ComplexMatrix) -> f64 {
        let n = self.basis.dim();
        let m = self.basis.operator_count();
        let gram_min = self.basis.min_gram_singular_value();
        let h_eig = h.hermitian_eig().expect("effective payoff is hermitian");
        let h_max = *h_eig.eigenvalues.last().expect("nonempty");
        // Trivial bound from Lambda = c I.
        let mut best = if h_max > 0.0 {
            h_max / gram_min * n as f64
        } else {
            // Even a maximal negative spectrum is bounded by h_max * n is
            // wrong in general; fall back to the same shift construction.
            h_max * n as f64 / gram_min
        };

        let primal_eig = primal.hermitian_eig().expect("primal is hermitian");
        let lam_max = primal_eig
            .eigenvalues
            .last()
            .copied()
            .unwrap_or(0.0)
            .max(1e-12);
        let dual_dim = self.out_coords.real_dim();

        for cut in [1e-3, 1e-5, 1e-7] {
            let threshold = lam_max * cut;
            let face: Vec<usize> = (0..m)
                .filter(|&i| primal_eig.eigenvalues[i] > threshold)
                .collect();
            if face.is_empty() {
                continue;
            }
            // Real least squares for Lambda: rows are the real and imaginary
            // parts of (Phi*(Lambda) - H) w = 0 per face vector w.
            let rows = 2 * m * face.len();
            let mut a = vec![vec![0.0; dual_dim]; rows];
            let mut rhs = vec![0.0; rows];
            for (fi, &col) in face.iter().enumerate() {
                let w = primal_eig.eigenvector(col);
                let hw: Vec<Complex64> = (0..m)
                    .map(|r| (0..m).map(|c2| h.get(r, c2) * w[c2]).sum())
                    .collect();
                for (t, image) in self.dual_images.iter().enumerate() {
                    for r in 0..m {
                        let val: Complex64 = (0..m).map(|c2| image.get(r, c2) * w[c2]).sum();
                        a[fi * 2 * m + 2 * r][t] = val.re;
                        a[fi * 2 * m + 2 * r + 1][t] = val.im;
                    }
                }
                for r in 0..m {
                    rhs[fi * 2 * m + 2 * r] = hw[r].re;
                    rhs[fi * 2 * m + 2 * r + 1] = hw[r].im;
                }
            }
            let Some(u) = least_squares(&a, &rhs) else {
                continue;
            };
            let lambda = self.out_coords.decode(&u);
            // Shift along the Gram image until Phi*(Lambda) - H >= 0.
            let mut slack = ComplexMatrix::zeros(m, m);
            for (t, image) in self.dual_images.iter().enumerate() {
                if u[t] != 0.0 {
                    slack = slack.add(&image.scale_re(u[t]));
                }
            }
            let slack = slack.sub(h).hermitian_part();
            let min_eig = match slack.min_eigenvalue() {
                Ok(v) => v,
                Err(_) => continue,
            };
            let delta = if min_eig < 0.0 {
                (-min_eig) / gram_min
            } else {
                0.0
            };
            let bound = lambda.trace().re + delta * n as f64;
            best = best.min(bound);
        }
        best
    }
}

/// Hermitian effective payoff for `player` against fixed opponents:
/// P_player(chi) = tr(chi H).
pub fn effective_hermitian_payoff(
    tensor: &PayoffTensor,
    player: usize,
    others: &[&ChiMatrix],
) -> Result<ComplexMatrix, SolverError> {
    Ok(tensor.effective_hermitian(player, others)?)
}

/// Maximizes tr(chi H) over the strategy set by proximal gradient steps
/// with Dykstra projections, anchored at the depolarizing point so that
/// near-ties resolve toward maximal entropy. Certified by the dual bound;
/// `Err(BestResponseNonConvergence)` still carries the best outcome found.
pub fn best_response(
    tensor: &PayoffTensor,
    player: usize,
    others: &[&ChiMatrix],
    tol: f64,
) -> Result<BestResponse, SolverError> {
    let fs = FeasibleSet::new(tensor.basis());
    best_response_with(&fs, tensor, player, others, tol)
}

/// [`best_response`] with a precomputed [`FeasibleSet`], for solvers that
/// amortize the per-basis setup across many inner solves.
pub fn best_response_with(
    fs: &FeasibleSet,
    tensor: &PayoffTensor,
    player: usize,
    others: &[&ChiMatrix],
    tol: f64,
) -> Result<BestResponse, SolverError> {
    assert!(tol > 0.0, "tolerance must be positive");
    let h = tensor.effective_hermitian(player, others)?.hermitian_part();
    let scale = h.frobenius_norm();
    if scale <= 1e-15 {
        // Payoff is constant over the feasible set; the interior point is
        // the canonical representative.
        let chi = fs.wrap(fs.depolarizing().clone())?;
        return Ok(BestResponse {
            value: 0.0,
            pg_residual: 0.0,
            dual_upper: 0.0,
            iterations: 0,
            converged: true,
            chi,
        });
    }
    let hn = h.scale_re(1.0 / scale);
    let anchor = fs.depolarizing().clone();
    let eta_max = (10.0 / tol).clamp(1e4, 1e6);

    let mut x = anchor.clone();
    let mut eta = 1.0;
    let mut iterations = 0usize;
    while eta < eta_max {
        x = fs.project(&x.add(&hn.scale_re(eta)));
        iterations += 1;
        eta *= 10.0;
    }
    // Anchored pass: prox of the interior point with a huge step lands on
    // the optimal face at its point closest to the anchor.
    let anchored = fs.project(&anchor.add(&hn.scale_re(eta_max)));
    iterations += 1;
    let value_of = |c: &ComplexMatrix| c.frobenius_inner(&h).re;
    if value_of(&anchored) >= value_of(&x) - 1e-12 * scale {
        x = anchored;
    }

    let mut value = value_of(&x);
    let mut dual_upper = fs.dual_upper_bound(&h, &x);
    let mut rounds = 0usize;
    while dual_upper - value > tol && rounds < 60 {
        x = fs.project(&x.add(&hn.scale_re(eta_max)));
        iterations += 1;
        rounds += 1;
        value = value_of(&x);
        if rounds % 5 == 0 || rounds == 1 {
            dual_upper = dual_upper.min(fs.dual_upper_bound(&h, &x));
        }
    }
    dual_upper = dual_upper.min(fs.dual_upper_bound(&h, &x));

    let pg_residual = x.sub(&fs.project(&x.add(&hn))).frobenius_norm();
    let converged = dual_upper - value <= tol;
    let outcome = BestResponse {
        chi: fs.wrap(x)?,
        value,
        pg_residual,
        dual_upper,
        iterations,
        converged,
    };
    if converged {
        Ok(outcome)
    } else {
        Err(SolverError::BestResponseNonConvergence(Box::new(outcome)))
    }
}

fn br_outcome(result: Result<BestResponse, SolverError>) -> Result<BestResponse, SolverError> {
    match result {
        Ok(b) => Ok(b),
        Err(e) => match SolverError::br_value(&e) {
            Some(b) => Ok(b.clone()),
            None => Err(e),
        },
    }
}

fn average_chi(
    basis: &Arc<OperatorBasis>,
    avg: &ChiMatrix,
    next: &ChiMatrix,
    t: usize,
) -> Result<ChiMatrix, ChannelError> {
    let w = 1.0 / (t as f64 + 1.0);
    let mixed = avg
        .matrix()
        .scale_re(1.0 - w)
        .add(&next.matrix().scale_re(w));
    ChiMatrix::new(Arc::clone(basis), mixed)
}

/// Certified zero-sum saddle solve for two-player tensors.
///
/// Both players best-respond to the opponent's running uniform average;
/// each inner solve's dual bound turns into a certified game-value bound
/// (v_lower from the minimizer side, v_upper from the maximizer side), and
/// the best bounds seen are kept monotone across checkpoints. Convergence
/// means the certified gap dropped below `tol`; otherwise the error carries
/// the best bracket found.
pub fn solve_zero_sum(
    tensor: &PayoffTensor,
    tol: f64,
    max_iter: usize,
) -> Result<SaddleResult, SolverError> {
    if tensor.players() != 2 {
        return Err(SolverError::UnsupportedPlayers {
            required: 2,
            got: tensor.players(),
        });
    }
    let zs_residual = tensor.zero_sum_residual().expect("two players");
    let norm: f64 = tensor.entries(0).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if zs_residual > 1e-9 * norm.max(1.0) {
        return Err(SolverError::NotZeroSum {
            residual: zs_residual,
        });
    }

    let basis = tensor.basis();
    let fs = FeasibleSet::new(basis);
    let inner_tol = (tol * 0.1).max(1e-7);
    let mut avg_max = depolarizing_chi(basis);
    let mut avg_min = depolarizing_chi(basis);
    let mut v_lower = f64::NEG_INFINITY;
    let mut v_upper = f64::INFINITY;
    let mut best_max = avg_max.clone();
    let mut best_min = avg_min.clone();
    let mut history = Vec::new();
    let mut iterations = 0usize;
    let mut converged = false;

    for t in 0..max_iter {
        iterations = t + 1;
        // Player 1 maximizes P_1; player 2 maximizes P_2 = -P_1.
        let br_max = br_outcome(best_response_with(&fs, tensor, 0, &[&avg_min], inner_tol))?;
        let br_min = br_outcome(best_response_with(&fs, tensor, 1, &[&avg_max], inner_tol))?;
        // max_chi P_1(chi, avg_min) <= br_max.dual_upper certifies an upper
        // bound; max_xi P_2(avg_max, xi) <= br_min.dual_upper certifies
        // min_xi P_1(avg_max, xi) >= -br_min.dual_upper.
        if -br_min.dual_upper > v_lower {
            v_lower = -br_min.dual_upper;
            best_max = avg_max.clone();
        }
        if br_max.dual_upper < v_upper {
            v_upper = br_max.dual_upper;
            best_min = avg_min.clone();
        }
        history.push(SaddleCheckpoint {
            iteration: iterations,
            v_lower,
            v_upper,
        });
        if v_upper - v_lower <= tol {
            converged = true;
            break;
        }
        avg_max = average_chi(basis, &avg_max, &br_max.chi, t + 1)?;
        avg_min = average_chi(basis, &avg_min, &br_min.chi, t + 1)?;
    }

    let result = SaddleResult {
        v_lower,
        v_upper,
        strategies: StrategyProfile::new(vec![best_max, best_min]),
        iterations,
        converged,
        history,
    };
    if result.converged {
        Ok(result)
    } else {
        Err(SolverError::SaddleNonConvergence(Box::new(result)))
    }
}

/// Damped simultaneous best-response dynamics for general games.
///
/// Every iteration each player moves a `damping` fraction toward their best
/// response. The residual of a profile is max_k (dual bound on player k's
/// best deviation - player k's payoff), a sound bound on the incentive to
/// deviate; both the trajectory and its uniform average are scored, and the
/// best profile seen is returned. Best-response dynamics need not converge,
/// so `converged` reports whether the tolerance was actually met.
pub fn nash_iterate(
    tensor: &PayoffTensor,
    init: StrategyProfile,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<NashResult, SolverError> {
    assert!((0.0..=1.0).contains(&damping) && damping > 0.0);
    let players = tensor.players();
    if init.players() != players {
        return Err(SolverError::WrongProfileLength {
            expected: players,
            got: init.players(),
        });
    }
    let basis = tensor.basis();
    let fs = FeasibleSet::new(basis);
    let inner_tol = (tol * 0.1).max(1e-7);

    let mut profile = init;
    let mut average = profile.clone();
    let mut best_profile = profile.clone();
    let mut best_residual = f64::INFINITY;
    let mut iterations = 0usize;
    let mut converged = false;

    let residual_of = |p: &StrategyProfile| -> Result<(f64, Vec<BestResponse>), SolverError> {
        let payoffs = tensor.evaluate(&p.refs())?;
        let mut worst = f64::NEG_INFINITY;
        let mut brs = Vec::with_capacity(players);
        for k in 0..players {
            let br = br_outcome(best_response_with(&fs, tensor, k, &p.without(k), inner_tol))?;
            worst = worst.max(br.dual_upper - payoffs[k]);
            brs.push(br);
        }
        Ok((worst, brs))
    };

    for t in 0..max_iter {
        iterations = t + 1;
        let (residual, brs) = residual_of(&profile)?;
        if residual < best_residual {
            best_residual = residual;
            best_profile = profile.clone();
        }
        if residual <= tol {
            converged = true;
            break;
        }
        // Score the uniform average as well; for cycling dynamics (matching
        // pennies) the average settles even though the trajectory does not.
        if t > 0 && t % 5 == 0 {
            let (avg_residual, _) = residual_of(&average)?;
            if avg_residual < best_residual {
                best_residual = avg_residual;
                best_profile = average.clone();
            }
            if avg_residual <= tol {
                converged = true;
                break;
            }
        }
        for k in 0..players {
            let stepped = profile
                .chi(k)
                .matrix()
                .scale_re(1.0 - damping)
                .add(&brs[k].chi.matrix().scale_re(damping));
            profile.set(k, ChiMatrix::new(Arc::clone(basis), stepped)?);
        }
        for k in 0..players {
            average.set(k, average_chi(basis, average.chi(k), profile.chi(k), t + 1)?);
        }
    }

    Ok(NashResult {
        profile: best_profile,
        residual: best_residual,
        iterations,
        converged,
    })
}

/// Searches for an opponent strategy that pays differently against `chi_a`
/// than against `chi_b` (two-player tensors).
///
/// The payoff difference is the linear functional xi -> tr(xi G) with G the
/// difference of the opponent-side effective payoffs. Projecting G onto the
/// constraint tangent space gives the steepest feasible direction T; the
/// witness xi = dep + t T stays feasible for small t and separates the two
/// strategies by t ||T||_F^2. When the projection vanishes the functional
/// is constant on the strategy set and the pair is redundant.
pub fn redundancy_witness(
    tensor: &PayoffTensor,
    player: usize,
    chi_a: &ChiMatrix,
    chi_b: &ChiMatrix,
) -> Result<RedundancyOutcome, SolverError> {
    if tensor.players() != 2 {
        return Err(SolverError::UnsupportedPlayers {
            required: 2,
            got: tensor.players(),
        });
    }
    if player > 1 {
        return Err(GameError::NoSuchPlayer(player).into());
    }
    let opponent = 1 - player;
    let g_a = tensor.effective_hermitian(opponent, &[chi_a])?;
    let g_b = tensor.effective_hermitian(opponent, &[chi_b])?;
    let g = g_a.sub(&g_b);

    let basis = tensor.basis();
    let fs = FeasibleSet::new(basis);
    let tangent = fs.trace_preservation().project_tangent(&g);
    let t_norm = tangent.frobenius_norm();
    let scale = g.frobenius_norm().max(1.0);
    if t_norm <= 1e-10 * scale {
        return Ok(RedundancyOutcome::Redundant);
    }

    let eig = tangent.hermitian_eig()?;
    let op_norm = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()))
        .max(1e-300);
    let dep = depolarizing_chi(basis);
    let dep_min = dep.min_eigenvalue();
    // Pick the perturbation sign that adds to the baseline difference.
    let baseline = dep.matrix().frobenius_inner(&g).re;
    let direction = if baseline >= 0.0 { 1.0 } else { -1.0 };
    let step = direction * 0.9 * dep_min / op_norm;
    let xi = ChiMatrix::new(
        Arc::clone(basis),
        dep.matrix().add(&tangent.scale_re(step)),
    )?;

    let diff = {
        let pa = pair_payoff(tensor, player, chi_a, &xi)?;
        let pb = pair_payoff(tensor, player, chi_b, &xi)?;
        pa - pb
    };
    if diff.abs() > 1e-8 {
        Ok(RedundancyOutcome::Witness {
            opponent: xi,
            payoff_difference: diff,
        })
    } else {
        // The tangent component is too small to certify a difference above
        // the reporting threshold.
        Ok(RedundancyOutcome::Redundant)
    }
}

fn pair_payoff(
    tensor: &PayoffTensor,
    player: usize,
    own: &ChiMatrix,
    opp: &ChiMatrix,
) -> Result<f64, SolverError> {
    let payoffs = if player == 0 {
        tensor.evaluate(&[own, opp])?
    } else {
        tensor.evaluate(&[opp, own])?
    };
    Ok(payoffs[player])
}

/// Value and optimal mixed strategies of a finite zero-sum matrix game
/// (rows maximize, columns minimize), by equal-support enumeration with an
/// explicit equilibrium verification. Exact for the small matrices used as
/// cross-check oracles.
#[derive(Debug, Clone)]
pub struct ClassicalSolution {
    pub value: f64,
    pub row_strategy: Vec<f64>,
    pub col_strategy: Vec<f64>,
    /// max_i (M y)_i - min_j (x^T M)_j: the direct certification gap.
    pub guarantee_gap: f64,
}

pub fn classical_minimax(matrix: &[Vec<f64>], tol: f64) -> Result<ClassicalSolution, SolverError> {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || matrix.iter().any(|r| r.len() != cols) {
        return Err(SolverError::ClassicalSolveFailed("matrix must be rectangular"));
    }
    if matrix.iter().flatten().any(|v| !v.is_finite()) {
        return Err(SolverError::ClassicalSolveFailed("entries must be finite"));
    }
    if rows + cols > 24 {
        return Err(SolverError::ClassicalSolveFailed(
            "support enumeration limited to small matrices",
        ));
    }
    let scale = matrix
        .iter()
        .flatten()
        .fold(1.0f64, |acc, &v| acc.max(v.abs()));
    let eps = 1e-9 * scale;

    for k in 1..=rows.min(cols) {
        for row_mask in 1u32..(1 << rows) {
            if (row_mask.count_ones() as usize) != k {
                continue;
            }
            for col_mask in 1u32..(1 << cols) {
                if (col_mask.count_ones() as usize) != k {
                    continue;
                }
                let support_rows: Vec<usize> =
                    (0..rows).filter(|i| row_mask & (1 << i) != 0).collect();
                let support_cols: Vec<usize> =
                    (0..cols).filter(|j| col_mask & (1 << j) != 0).collect();
                let Some((x, vx)) = equalizing_strategy(matrix, &support_rows, &support_cols, false)
                else {
                    continue;
                };
                let Some((y, vy)) = equalizing_strategy(matrix, &support_rows, &support_cols, true)
                else {
                    continue;
                };
                if (vx - vy).abs() > eps.max(1e-9) {
                    continue;
                }
                if x.iter().any(|&v| v < -1e-9) || y.iter().any(|&v| v < -1e-9) {
                    continue;
                }
                let mut row_strategy = vec![0.0; rows];
                for (idx, &i) in support_rows.iter().enumerate() {
                    row_strategy[i] = x[idx].max(0.0);
                }
                let mut col_strategy = vec![0.0; cols];
                for (idx, &j) in support_cols.iter().enumerate() {
                    col_strategy[j] = y[idx].max(0.0);
                }
                normalize(&mut row_strategy);
                normalize(&mut col_strategy);
                // Direct max-min / min-max verification.
                let row_guarantee = (0..cols)
                    .map(|j| {
                        (0..rows)
                            .map(|i| row_strategy[i] * matrix[i][j])
                            .sum::<f64>()
                    })
                    .fold(f64::INFINITY, f64::min);
                let col_guarantee = (0..rows)
                    .map(|i| {
                        (0..cols)
                            .map(|j| matrix[i][j] * col_strategy[j])
                            .sum::<f64>()
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
                let gap = col_guarantee - row_guarantee;
                if gap <= tol {
                    return Ok(ClassicalSolution {
                        value: 0.5 * (row_guarantee + col_guarantee),
                        row_strategy,
                        col_strategy,
                        guarantee_gap: gap,
                    });
                }
            }
        }
    }
    Err(SolverError::ClassicalSolveFailed(
        "no equalizing support pair verified; matrix may be degenerate beyond tolerance",
    ))
}

fn normalize(v: &mut [f64]) {
    let total: f64 = v.iter().sum();
    if total > 0.0 {
        for x in v.iter_mut() {
            *x /= total;
        }
    }
}

/// Solves for a strategy on `support_rows` equalizing the payoff across
/// `support_cols` (or the transpose problem when `for_cols`). Returns the
/// strategy over the support and the equalized value.
fn equalizing_strategy(
    matrix: &[Vec<f64>],
    support_rows: &[usize],
    support_cols: &[usize],
    for_cols: bool,
) -> Option<(Vec<f64>, f64)> {
    let k = support_rows.len();
    // Unknowns: k weights plus the common value v.
    let mut a = vec![vec![0.0; k + 1]; k + 1];
    let mut b = vec![0.0; k + 1];
    for (eq, &fixed) in (if for_cols { support_rows } else { support_cols })
        .iter()
        .enumerate()
    {
        for (ui, &free) in (if for_cols { support_cols } else { support_rows })
            .iter()
            .enumerate()
        {
            a[eq][ui] = if for_cols {
                matrix[fixed][free]
            } else {
                matrix[free][fixed]
            };
        }
        a[eq][k] = -1.0;
        b[eq] = 0.0;
    }
    for ui in 0..k {
        a[k][ui] = 1.0;
    }
    b[k] = 1.0;
    let sol = gaussian_solve(a, b)?;
    let (weights, value) = sol.split_at(k);
    Some((weights.to_vec(), value[0]))
}

/// Dense Gaussian elimination with partial pivoting; `None` on singularity.
fn gaussian_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = a.len();
    debug_assert!(a.iter().all(|row| row.len() == n) && b.len() == n);
    let scale = a
        .iter()
        .flatten()
        .fold(1.0f64, |acc, &v| acc.max(v.abs()));
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&r1, &r2| {
                a[r1][col]
                    .abs()
                    .partial_cmp(&a[r2][col].abs())
                    .expect("finite")
            })
            .expect("nonempty");
        if a[pivot_row][col].abs() <= 1e-12 * scale {
            return None;
        }
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        for row in (col + 1)..n {
            let factor = a[row][col] / a[col][col];
            if factor == 0.0 {
                continue;
            }
            for c2 in col..n {
                a[row][c2] -= factor * a[col][c2];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let mut acc = b[row];
        for c2 in (row + 1)..n {
            acc -= a[row][c2] * x[c2];
        }
        x[row] = acc / a[row][row];
    }
    Some(x)
}

/// Real least squares min ||A u - b||_2 via ridge-stabilized normal
/// equations; adequate for the tiny dual systems solved here.
fn least_squares(a: &[Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let rows = a.len();
    let cols = a.first()?.len();
    let mut ata = vec![vec![0.0; cols]; cols];
    let mut atb = vec![0.0; cols];
    for r in 0..rows {
        for i in 0..cols {
            let ari = a[r][i];
            if ari == 0.0 {
                continue;
            }
            atb[i] += ari * b[r];
            for j in i..cols {
                ata[i][j] += ari * a[r][j];
            }
        }
    }
    let trace: f64 = (0..cols).map(|i| ata[i][i]).sum();
    let ridge = (trace / cols as f64).max(1.0) * 1e-12;
    for i in 0..cols {
        ata[i][i] += ridge;
        for j in 0..i {
            ata[i][j] = ata[j][i];
        }
    }
    gaussian_solve(ata, atb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{kraus_to_chi, KrausChannel};
    use crate::constructors::{
        bell_example_game, bell_zero_sum_game, classical_embedding, diagonal_game, mixed_to_chi,
        ClassicalGame,
    };
    use crate::game::build_payoff_tensor;

    fn embedded_tensor(matrix: &[Vec<f64>]) -> PayoffTensor {
        let game = ClassicalGame::zero_sum_from_matrix(matrix).unwrap();
        let quantum = classical_embedding(&game).unwrap();
        let basis = OperatorBasis::matrix_units(2);
        build_payoff_tensor(&quantum, &basis, 16).unwrap()
    }

    #[test]
    fn effective_payoff_of_diagonal_game_is_scaled_conjugate() {
        let game = diagonal_game(2);
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let xi = kraus_to_chi(&KrausChannel::random_cptp(2, 3, 42), &basis).unwrap();
        let h = tensor.effective_hermitian(0, &[&xi]).unwrap();
        // A = (1/4) delta delta makes H = (1/4) conj(xi).
        let expected = xi.matrix().conj().scale_re(0.25);
        assert!(h.sub(&expected).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn constant_payoff_returns_depolarizing_point() {
        // An all-equal-payoff game: H is a multiple of the identity, the
        // payoff is constant, and the tie-break picks the interior point.
        let rho = ComplexMatrix::from_real_diag(&[1.0, 0.0, 0.0, 0.0]);
        let r = ComplexMatrix::identity(4).scale_re(0.5);
        let game =
            crate::game::StaticQuantumGame::new(2, 2, rho, vec![r.clone(), r], false).unwrap();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let opp = depolarizing_chi(&basis);
        let br = best_response(&tensor, 0, &[&opp], 1e-6).unwrap();
        assert!((br.value - 0.5).abs() <= 1e-6);
        let dep = depolarizing_chi(&basis);
        assert!(br.chi.matrix().sub(dep.matrix()).frobenius_norm() <= 1e-4);
    }

    #[test]
    fn best_response_matches_classical_enumeration() {
        let matrix = vec![vec![3.0, -1.0], vec![0.0, 2.5]];
        let tensor = embedded_tensor(&matrix);
        for &(q0, seed) in &[(0.3, 1u64), (0.5, 2), (0.85, 3)] {
            let _ = seed;
            let opp = mixed_to_chi(&[q0, 1.0 - q0], 2).unwrap();
            let br = best_response(&tensor, 0, &[&opp], 1e-5).unwrap();
            let oracle = matrix
                .iter()
                .map(|row| row[0] * q0 + row[1] * (1.0 - q0))
                .fold(f64::NEG_INFINITY, f64::max);
            assert!(
                (br.value - oracle).abs() <= 1e-4,
                "value {} vs oracle {oracle}",
                br.value
            );
            assert!(br.dual_upper >= oracle - 1e-9);
            assert!(br.dual_upper - br.value <= 1e-5);
        }
    }

    #[test]
    fn best_response_in_bell_game_reaches_one() {
        let game = bell_example_game();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let id = kraus_to_chi(&KrausChannel::identity(2), &basis).unwrap();
        let br = best_response(&tensor, 0, &[&id], 1e-5).unwrap();
        // Payoff is bounded by the largest eigenvalue of R, which is 1.
        assert!((br.value - 1.0).abs() <= 1e-4);
        assert!(br.dual_upper <= 1.0 + 1e-6);
        assert!(br.chi.constraint_residual() <= 1e-9);
        assert!(br.chi.min_eigenvalue() >= -1e-9);
    }

    #[test]
    fn best_response_dominates_random_feasible_strategies() {
        let game = bell_zero_sum_game();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let opp = kraus_to_chi(&KrausChannel::random_cptp(2, 2, 77), &basis).unwrap();
        let br = best_response(&tensor, 0, &[&opp], 1e-5).unwrap();
        for seed in 0..500u64 {
            let probe =
                kraus_to_chi(&KrausChannel::random_cptp(2, 1 + (seed % 4) as usize, seed), &basis)
                    .unwrap();
            let p = tensor.evaluate(&[&probe, &opp]).unwrap()[0];
            assert!(p <= br.value + 1e-6, "seed {seed}: {p} > {}", br.value);
            assert!(p <= br.dual_upper + 1e-9);
        }
    }

    #[test]
    fn zero_sum_matching_pennies_value_zero() {
        let tensor = embedded_tensor(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let result = solve_zero_sum(&tensor, 1e-3, 500).unwrap();
        assert!(result.converged);
        assert!(result.gap() <= 1e-3);
        assert!(result.v_lower.abs() <= 1e-3 && result.v_upper.abs() <= 1e-3);
        // Monotone certified bounds across checkpoints.
        for w in result.history.windows(2) {
            assert!(w[1].v_lower >= w[0].v_lower - 1e-12);
            assert!(w[1].v_upper <= w[0].v_upper + 1e-12);
        }
        for chi in result.strategies.chis() {
            assert!(chi.constraint_residual() <= 1e-9);
            assert!(chi.min_eigenvalue() >= -1e-9);
        }
    }

    #[test]
    fn zero_sum_closed_form_value() {
        // v = (ad - bc) / (a + d - b - c) for a 2x2 game without a saddle
        // point: [[3,1],[1,2]] gives 5/3.
        let tensor = embedded_tensor(&[vec![3.0, 1.0], vec![1.0, 2.0]]);
        let result = solve_zero_sum(&tensor, 1e-3, 500).unwrap();
        let v = 5.0 / 3.0;
        assert!(result.v_lower <= v + 1e-3 && v - 1e-3 <= result.v_upper);
        assert!((0.5 * (result.v_lower + result.v_upper) - v).abs() <= 1e-3);
    }

    #[test]
    fn zero_sum_bell_game_value_quarter() {
        // Either player can pin the payoff at 1/4 by discarding their share
        // and preparing I/2, so the value is exactly 1/4.
        let game = bell_zero_sum_game();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let result = solve_zero_sum(&tensor, 1e-3, 300).unwrap();
        assert!(result.converged);
        assert!((0.5 * (result.v_lower + result.v_upper) - 0.25).abs() <= 1e-3);
    }

    #[test]
    fn nash_dominant_strategy_game() {
        // Prisoner's dilemma: defect strictly dominates; equilibrium payoff
        // (1, 1).
        let pd = ClassicalGame::from_bimatrix(
            &[vec![3.0, 0.0], vec![5.0, 1.0]],
            &[vec![3.0, 5.0], vec![0.0, 1.0]],
        )
        .unwrap();
        let quantum = classical_embedding(&pd).unwrap();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&quantum, &basis, 16).unwrap();
        let init = StrategyProfile::depolarizing(&basis, 2);
        let result = nash_iterate(&tensor, init, 0.75, 1e-4, 200).unwrap();
        assert!(result.converged, "residual {}", result.residual);
        assert!(result.residual <= 1e-4);
        let payoffs = tensor.evaluate(&result.profile.refs()).unwrap();
        assert!((payoffs[0] - 1.0).abs() <= 1e-3);
        assert!((payoffs[1] - 1.0).abs() <= 1e-3);
        for chi in result.profile.chis() {
            assert!(chi.constraint_residual() <= 1e-9);
            assert!(chi.min_eigenvalue() >= -1e-9);
        }
    }

    #[test]
    fn nash_matching_pennies_via_averaging() {
        let mp = ClassicalGame::zero_sum_from_matrix(&[vec![1.0, -1.0], vec![-1.0, 1.0]])
            .unwrap();
        let quantum = classical_embedding(&mp).unwrap();
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&quantum, &basis, 16).unwrap();
        let init = StrategyProfile::depolarizing(&basis, 2);
        let result = nash_iterate(&tensor, init, 0.9, 1e-3, 400).unwrap();
        assert!(
            result.residual <= 1e-3,
            "averaged profile residual {}",
            result.residual
        );
    }

    #[test]
    fn redundancy_witness_on_diagonal_game() {
        let game = diagonal_game(2);
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        for seed in 0..10u64 {
            let a = kraus_to_chi(&KrausChannel::random_cptp(2, 1 + (seed % 4) as usize, seed), &basis)
                .unwrap();
            let b = kraus_to_chi(
                &KrausChannel::random_cptp(2, 1 + ((seed + 2) % 4) as usize, 100 + seed),
                &basis,
            )
            .unwrap();
            if a.matrix().sub(b.matrix()).frobenius_norm() <= 1e-9 {
                continue;
            }
            match redundancy_witness(&tensor, 0, &a, &b).unwrap() {
                RedundancyOutcome::Witness {
                    opponent,
                    payoff_difference,
                } => {
                    assert!(payoff_difference.abs() > 1e-8);
                    let pa = tensor.evaluate(&[&a, &opponent]).unwrap()[0];
                    let pb = tensor.evaluate(&[&b, &opponent]).unwrap()[0];
                    assert!(((pa - pb) - payoff_difference).abs() <= 1e-12);
                }
                RedundancyOutcome::Redundant => {
                    panic!("distinct strategies must be separable in the diagonal game")
                }
            }
        }
    }

    #[test]
    fn redundancy_identical_and_embedded_cases() {
        let game = diagonal_game(2);
        let basis = OperatorBasis::matrix_units(2);
        let tensor = build_payoff_tensor(&game, &basis, 16).unwrap();
        let chi = kraus_to_chi(&KrausChannel::random_cptp(2, 2, 5), &basis).unwrap();
        assert!(matches!(
            redundancy_witness(&tensor, 0, &chi, &chi).unwrap(),
            RedundancyOutcome::Redundant
        ));

        // In an embedded game the payoff only sees chi_{(i1)(i1)}; the
        // identity channel and the dephased identity agree there.
        let embedded = embedded_tensor(&[vec![1.0, -1.0], vec![-1.0, 1.0]]);
        let id = kraus_to_chi(&KrausChannel::identity(2), &basis).unwrap();
        let z = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        let dephased = kraus_to_chi(
            &KrausChannel::new(vec![
                ComplexMatrix::identity(2).scale_re(0.5f64.sqrt()),
                z.scale_re(0.5f64.sqrt()),
            ])
            .unwrap(),
            &basis,
        )
        .unwrap();
        assert!(id.matrix().sub(dephased.matrix()).frobenius_norm() > 0.5);
        assert!(matches!(
            redundancy_witness(&embedded, 0, &id, &dephased).unwrap(),
            RedundancyOutcome::Redundant
        ));
    }

    #[test]
    fn classical_minimax_known_games() {
        let mp = classical_minimax(&[vec![1.0, -1.0], vec![-1.0, 1.0]], 1e-9).unwrap();
        assert!(mp.value.abs() <= 1e-9);

        let g = classical_minimax(&[vec![3.0, 1.0], vec![1.0, 2.0]], 1e-9).unwrap();
        assert!((g.value - 5.0 / 3.0).abs() <= 1e-9);

        let rps = classical_minimax(
            &[
                vec![0.0, -1.0, 1.0],
                vec![1.0, 0.0, -1.0],
                vec![-1.0, 1.0, 0.0],
            ],
            1e-9,
        )
        .unwrap();
        assert!(rps.value.abs() <= 1e-9);
        for w in rps.row_strategy {
            assert!((w - 1.0 / 3.0).abs() <= 1e-9);
        }

        // Saddle-point game: value 2 at the pure (row 0, col 0).
        let saddle = classical_minimax(&[vec![2.0, 3.0], vec![1.0, 4.0]], 1e-9).unwrap();
        assert!((saddle.value - 2.0).abs() <= 1e-9);
    }

    #[test]
    fn solver_values_match_classical_on_embedded_games() {
        for matrix in [
            vec![vec![1.0, -1.0], vec![-1.0, 1.0]],
            vec![vec![3.0, 1.0], vec![1.0, 2.0]],
            vec![vec![0.0, 2.0], vec![3.0, 1.0]],
        ] {
            let classical = classical_minimax(&matrix, 1e-9).unwrap();
            let tensor = embedded_tensor(&matrix);
            let quantum = solve_zero_sum(&tensor, 1e-3, 500).unwrap();
            let mid = 0.5 * (quantum.v_lower + quantum.v_upper);
            assert!(
                (mid - classical.value).abs() <= 2e-3,
                "matrix {matrix:?}: {mid} vs {}",
                classical.value
            );
        }
    }
}
