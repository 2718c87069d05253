//! Implementations of the qgame subcommands.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde_json::json;

use qgame_core::constructors::efficiency_report;
use qgame_core::game::{build_payoff_tensor, evaluate_payoff_direct, StaticQuantumGame};
use qgame_core::solvers::{nash_iterate, solve_zero_sum, SolverError, StrategyProfile};
use qgame_core::verify::{self, VerifyReport};
use qgame_core::{ChiMatrix, KrausChannel, OperatorBasis};

use crate::format::{self, GameFile, ResultFile, StrategyFile};
use crate::{CliError, Format};

/// Joint-dimension guard for tensor construction; QGAME_MAX_DIM overrides.
pub fn max_joint_dim() -> Result<usize, CliError> {
    match std::env::var("QGAME_MAX_DIM") {
        Ok(raw) => raw.trim().parse::<usize>().map_err(|_| {
            CliError::Validation(format!("QGAME_MAX_DIM must be a positive integer, got {raw:?}"))
        }),
        Err(_) => Ok(qgame_core::DEFAULT_MAX_JOINT_DIM),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

fn load_game(path: &Path) -> Result<StaticQuantumGame, CliError> {
    let file: GameFile = read_json(path)?;
    file.to_game()
        .map_err(|e| e.with_context(&path.display().to_string()))
}

pub fn describe(path: &Path, fmt: Format) -> Result<u8, CliError> {
    let game = load_game(path)?;
    let q = game.qubits_per_player();
    let strategy_dim = q.map(|q| efficiency_report(q.max(1)).quantum_dim);
    let rho = game.rho();
    let trace_residual = (rho.trace().re - 1.0).abs().max(rho.trace().im.abs());
    let herm_residual = rho.hermitian_residual();
    let min_eig = rho
        .hermitian_part()
        .min_eigenvalue()
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let payoff_herm = game
        .payoff_operators()
        .iter()
        .map(|r| r.hermitian_residual())
        .fold(0.0f64, f64::max);
    let zero_sum_residual = (game.players() == 2).then(|| {
        game.payoff_operator(0)
            .add(game.payoff_operator(1))
            .frobenius_norm()
    });

    match fmt {
        Format::Human => {
            if let Some(name) = &game.metadata().name {
                println!("name: {name}");
            }
            if let Some(desc) = &game.metadata().description {
                println!("description: {desc}");
            }
            println!("players: {}", game.players());
            match q {
                Some(q) => println!(
                    "qubits per player: {q} (n={}, joint dimension {})",
                    game.dim(),
                    game.joint_dim()
                ),
                None => println!(
                    "per-player dimension: n={} (joint dimension {})",
                    game.dim(),
                    game.joint_dim()
                ),
            }
            println!("zero-sum: {}", game.zero_sum());
            if let (Some(q), Some(dim)) = (q, strategy_dim) {
                println!("strategy-set dimension: {dim} (16^{q} - 4^{q})");
            }
            println!("state trace residual: {trace_residual:.3e}");
            println!("state hermiticity residual: {herm_residual:.3e}");
            println!("state minimum eigenvalue: {min_eig:.3e}");
            println!("payoff hermiticity residual (worst): {payoff_herm:.3e}");
            if let Some(zs) = zero_sum_residual {
                println!("payoff-sum residual: {zs:.3e}");
            }
        }
        Format::Json => {
            let value = json!({
                "name": game.metadata().name,
                "description": game.metadata().description,
                "players": game.players(),
                "qubits_per_player": q,
                "n": game.dim(),
                "joint_dimension": game.joint_dim(),
                "zero_sum": game.zero_sum(),
                "strategy_set_dimension": strategy_dim.map(|d| d as u64),
                "residuals": {
                    "state_trace": trace_residual,
                    "state_hermiticity": herm_residual,
                    "state_min_eigenvalue": min_eig,
                    "payoff_hermiticity_worst": payoff_herm,
                    "payoff_sum": zero_sum_residual,
                },
            });
            println!("{}", serde_json::to_string_pretty(&value).expect("serializable"));
        }
    }
    Ok(0)
}

pub fn payoff(game_path: &Path, strategy_paths: &[PathBuf], fmt: Format) -> Result<u8, CliError> {
    let game = load_game(game_path)?;
    if strategy_paths.len() != game.players() {
        return Err(CliError::Validation(format!(
            "game has {} players but {} strategy files were given",
            game.players(),
            strategy_paths.len()
        )));
    }
    let basis = OperatorBasis::matrix_units(game.dim());
    let mut chis: Vec<ChiMatrix> = Vec::new();
    let mut channels: Vec<KrausChannel> = Vec::new();
    for path in strategy_paths {
        let file: StrategyFile = read_json(path)?;
        let (chi, channel) = file
            .load(&basis)
            .map_err(|e| e.with_context(&path.display().to_string()))?;
        chis.push(chi);
        channels.push(channel);
    }
    let tensor = build_payoff_tensor(&game, &basis, max_joint_dim()?)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let chi_refs: Vec<&ChiMatrix> = chis.iter().collect();
    let via_chi = tensor
        .evaluate(&chi_refs)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    let direct = evaluate_payoff_direct(&game, &channels)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    match fmt {
        Format::Human => {
            for player in 0..game.players() {
                println!(
                    "player {}: direct {:.12} | chi {:.12} | diff {:.3e}",
                    player + 1,
                    direct[player],
                    via_chi[player],
                    (direct[player] - via_chi[player]).abs()
                );
            }
        }
        Format::Json => {
            let rows: Vec<_> = (0..game.players())
                .map(|p| {
                    json!({
                        "player": p + 1,
                        "direct": direct[p],
                        "chi": via_chi[p],
                        "difference": (direct[p] - via_chi[p]).abs(),
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "payoffs": rows })).expect("serializable")
            );
        }
    }
    Ok(0)
}

pub struct SolveArgs {
    pub game: PathBuf,
    pub mode: crate::Mode,
    pub tol: Option<f64>,
    pub max_iter: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

pub fn solve(args: &SolveArgs) -> Result<u8, CliError> {
    let game = load_game(&args.game)?;
    let basis = OperatorBasis::matrix_units(game.dim());
    let tensor = build_payoff_tensor(&game, &basis, max_joint_dim()?)
        .map_err(|e| CliError::Validation(e.to_string()))?;

    match args.mode {
        crate::Mode::ZeroSum => {
            if !game.zero_sum() {
                return Err(CliError::Validation(
                    "zero-sum mode requires a game with the zero_sum flag set".into(),
                ));
            }
            let tol = args.tol.unwrap_or(1e-3);
            let (result, code) = match solve_zero_sum(&tensor, tol, args.max_iter) {
                Ok(r) => (r, 0u8),
                Err(SolverError::SaddleNonConvergence(r)) => (*r, 3u8),
                Err(e) => return Err(CliError::Validation(e.to_string())),
            };
            let file = ResultFile {
                format_version: format::FORMAT_VERSION,
                mode: "zero-sum".into(),
                game: args.game.display().to_string(),
                seed: args.seed,
                tolerance: tol,
                max_iterations: args.max_iter,
                iterations: result.iterations,
                converged: result.converged,
                v_lower: Some(result.v_lower),
                v_upper: Some(result.v_upper),
                gap: Some(result.gap()),
                residual: None,
                strategies: result
                    .strategies
                    .chis()
                    .iter()
                    .map(StrategyFile::from_chi)
                    .collect(),
            };
            emit_result(args, &file)?;
            Ok(code)
        }
        crate::Mode::Nash => {
            let tol = args.tol.unwrap_or(1e-4);
            let init = nash_init(&basis, game.players(), args.seed)?;
            let result = nash_iterate(&tensor, init, 0.75, tol, args.max_iter)
                .map_err(|e| CliError::Validation(e.to_string()))?;
            let code = if result.converged { 0u8 } else { 3u8 };
            let file = ResultFile {
                format_version: format::FORMAT_VERSION,
                mode: "nash".into(),
                game: args.game.display().to_string(),
                seed: args.seed,
                tolerance: tol,
                max_iterations: args.max_iter,
                iterations: result.iterations,
                converged: result.converged,
                v_lower: None,
                v_upper: None,
                gap: None,
                residual: Some(result.residual),
                strategies: result
                    .profile
                    .chis()
                    .iter()
                    .map(StrategyFile::from_chi)
                    .collect(),
            };
            emit_result(args, &file)?;
            Ok(code)
        }
    }
}

fn nash_init(
    basis: &Arc<OperatorBasis>,
    players: usize,
    seed: u64,
) -> Result<StrategyProfile, CliError> {
    if seed == 0 {
        return Ok(StrategyProfile::depolarizing(basis, players));
    }
    let n = basis.dim();
    let mut chis = Vec::with_capacity(players);
    for k in 0..players {
        let channel = KrausChannel::random_cptp(n, n * n, seed.wrapping_add(k as u64));
        let chi = qgame_core::channels::kraus_to_chi(&channel, basis)
            .map_err(|e| CliError::Validation(e.to_string()))?;
        chis.push(chi);
    }
    Ok(StrategyProfile::new(chis))
}

fn emit_result(args: &SolveArgs, file: &ResultFile) -> Result<(), CliError> {
    let body = serde_json::to_string_pretty(file).expect("serializable");
    match args.format {
        Format::Human => {
            println!("game: {}", file.game);
            println!("mode: {}", file.mode);
            if let (Some(lo), Some(hi), Some(gap)) = (file.v_lower, file.v_upper, file.gap) {
                println!("v_lower: {lo:.9}");
                println!("v_upper: {hi:.9}");
                println!("gap: {gap:.3e}");
            }
            if let Some(res) = file.residual {
                println!("residual: {res:.3e}");
            }
            println!("iterations: {}", file.iterations);
            println!("converged: {}", file.converged);
        }
        Format::Json => println!("{body}"),
    }
    if let Some(out) = &args.out {
        format::write_atomic(out, &format!("{body}\n"))?;
        if matches!(args.format, Format::Human) {
            println!("result written to {}", out.display());
        }
    }
    Ok(())
}

pub fn run_verify(
    what: crate::VerifyWhat,
    n: usize,
    path: Option<&Path>,
    seed: u64,
    fmt: Format,
) -> Result<u8, CliError> {
    let guard = max_joint_dim()?;
    let report: VerifyReport = match what {
        crate::VerifyWhat::Theorem3 => verify::theorem3(n, guard)
            .map_err(|e| CliError::Validation(e.to_string()))?,
        crate::VerifyWhat::Reality => {
            if let Some(p) = path {
                let game = load_game(p)?;
                verify::payoff_reality_on(&game, 200, seed, guard)
                    .map_err(|e| CliError::Validation(e.to_string()))?
            } else {
                let draws = if n <= 2 { 200 } else { 50 };
                verify::payoff_reality(n, draws, seed)
                    .map_err(|e| CliError::Validation(e.to_string()))?
            }
        }
        crate::VerifyWhat::Embedding => verify::embedding_fidelity(100, 100, seed)
            .map_err(|e| CliError::Validation(e.to_string()))?,
        crate::VerifyWhat::Nonredundancy => verify::nonredundancy(n, 50, seed)
            .map_err(|e| CliError::Validation(e.to_string()))?,
    };

    match fmt {
        Format::Human => {
            println!("target: {}", report.target);
            for check in &report.checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!(
                    "[{status}] {}: worst residual {:.3e} (tolerance {:.1e})",
                    check.name, check.worst_residual, check.tolerance
                );
                if let Some(detail) = &check.detail {
                    if !check.passed {
                        println!("        counterexample: {detail}");
                    }
                }
            }
        }
        Format::Json => {
            let checks: Vec<_> = report
                .checks
                .iter()
                .map(|c| {
                    json!({
                        "name": c.name,
                        "passed": c.passed,
                        "worst_residual": c.worst_residual,
                        "tolerance": c.tolerance,
                        "detail": c.detail,
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({
                    "target": report.target,
                    "passed": report.passed(),
                    "checks": checks,
                }))
                .expect("serializable")
            );
        }
    }
    Ok(if report.passed() { 0 } else { 4 })
}

pub fn efficiency(q_max: u32, fmt: Format) -> Result<u8, CliError> {
    if !(1..=15).contains(&q_max) {
        return Err(CliError::Validation("q must lie in 1..=15".into()));
    }
    let reports: Vec<_> = (1..=q_max).map(efficiency_report).collect();
    match fmt {
        Format::Human => {
            println!(
                "{:>3} {:>16} {:>14} {:>11} {:>10} {:>7} {:>6} {:>7}",
                "q", "quantum_dim", "classical_dim", "dim_ratio", "per_qubit", "qubits", "bits", "factor"
            );
            for r in &reports {
                println!(
                    "{:>3} {:>16} {:>14} {:>11} {:>10.2} {:>7} {:>6} {:>7.2}",
                    r.q,
                    r.quantum_dim,
                    r.classical_dim,
                    r.dimension_ratio(),
                    r.per_qubit_ratio(),
                    r.qubits_exchanged,
                    r.classical_bits_required,
                    r.transfer_factor()
                );
            }
            let one = efficiency_report(1);
            println!();
            println!(
                "At one qubit per player the strategy set has dimension {}, so a classical \
                 protocol must address {} vertices and transfer at least {} bits, while the \
                 quantum protocol exchanges only {} qubits: a factor of {:.0} in transfer cost.",
                one.quantum_dim,
                one.quantum_dim + 1,
                one.classical_bits_required,
                one.qubits_exchanged,
                one.transfer_factor()
            );
        }
        Format::Json => {
            let rows: Vec<_> = reports
                .iter()
                .map(|r| {
                    json!({
                        "q": r.q,
                        "quantum_dim": r.quantum_dim as u64,
                        "classical_dim": r.classical_dim as u64,
                        "dimension_ratio": r.dimension_ratio() as u64,
                        "per_qubit_ratio": r.per_qubit_ratio(),
                        "qubits_exchanged": r.qubits_exchanged,
                        "classical_bits_required": r.classical_bits_required,
                        "transfer_factor": r.transfer_factor(),
                    })
                })
                .collect();
            println!(
                "{}",
                serde_json::to_string_pretty(&json!({ "rows": rows })).expect("serializable")
            );
        }
    }
    Ok(0)
}
