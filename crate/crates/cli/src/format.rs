//! On-disk JSON schemas: game definitions, strategy files, and solver
//! result files.
//!
//! Complex numbers are two-element [re, im] arrays and matrices row-major
//! nested arrays, written at full double precision so files reload
//! bit-exactly. Unknown fields are rejected everywhere, and every file
//! carries a format_version.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qgame_core::channels::{chi_to_kraus, kraus_to_chi, ChiMatrix, KrausChannel, OperatorBasis};
use qgame_core::game::{GameMetadata, PovmPayoffScheme, StaticQuantumGame};
use qgame_core::matrix::ComplexMatrix;

use crate::CliError;

pub const FORMAT_VERSION: u32 = 1;

/// Row-major matrix of [re, im] pairs.
pub type MatrixData = Vec<Vec<[f64; 2]>>;

pub fn matrix_to_data(m: &ComplexMatrix) -> MatrixData {
    (0..m.rows())
        .map(|r| {
            (0..m.cols())
                .map(|c| {
                    let z = m.get(r, c);
                    [z.re, z.im]
                })
                .collect()
        })
        .collect()
}

pub fn matrix_from_data(data: &MatrixData, what: &str) -> Result<ComplexMatrix, CliError> {
    let rows = data.len();
    let cols = data.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 || data.iter().any(|r| r.len() != cols) {
        return Err(CliError::Validation(format!(
            "{what}: matrix must be rectangular and non-empty"
        )));
    }
    let entries = data
        .iter()
        .flatten()
        .map(|&[re, im]| Complex64::new(re, im))
        .collect();
    ComplexMatrix::from_vec(rows, cols, entries)
        .map_err(|e| CliError::Validation(format!("{what}: {e}")))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetadataData {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PovmData {
    pub operators: Vec<MatrixData>,
    /// payoffs[player][outcome]
    pub payoffs: Vec<Vec<f64>>,
}

/// A game definition file. Exactly one of `payoff_ops` and `povm` must be
/// present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFile {
    pub format_version: u32,
    pub players: usize,
    pub qubits_per_player: u32,
    #[serde(default)]
    pub zero_sum: bool,
    pub rho: MatrixData,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub payoff_ops: Option<Vec<MatrixData>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<PovmData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metadata: Option<MetadataData>,
}

impl GameFile {
    pub fn to_game(&self) -> Result<StaticQuantumGame, CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.qubits_per_player == 0 || self.qubits_per_player > 8 {
            return Err(CliError::Validation(
                "qubits_per_player must lie in 1..=8".into(),
            ));
        }
        let n = 1usize << self.qubits_per_player;
        let rho = matrix_from_data(&self.rho, "rho")?;
        let game = match (&self.payoff_ops, &self.povm) {
            (Some(ops), None) => {
                let payoff_ops = ops
                    .iter()
                    .enumerate()
                    .map(|(k, m)| matrix_from_data(m, &format!("payoff_ops[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                StaticQuantumGame::new(self.players, n, rho, payoff_ops, self.zero_sum)
            }
            (None, Some(povm)) => {
                let operators = povm
                    .operators
                    .iter()
                    .enumerate()
                    .map(|(m_idx, m)| matrix_from_data(m, &format!("povm.operators[{m_idx}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let scheme = PovmPayoffScheme::new(operators, povm.payoffs.clone())
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                StaticQuantumGame::from_povm(self.players, n, rho, &scheme, self.zero_sum)
            }
            (Some(_), Some(_)) => {
                return Err(CliError::Validation(
                    "specify either payoff_ops or povm, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Validation(
                    "one of payoff_ops or povm is required".into(),
                ))
            }
        }
        .map_err(|e| CliError::Validation(e.to_string()))?;
        let metadata = self.metadata.clone().unwrap_or(MetadataData {
            name: None,
            description: None,
        });
        Ok(game.with_metadata(GameMetadata {
            name: metadata.name,
            description: metadata.description,
        }))
    }
}

/// A strategy file: one player's strategy, as a chi matrix or a Kraus list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StrategyFile {
    pub format_version: u32,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<MatrixData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kraus: Option<Vec<MatrixData>>,
}

impl StrategyFile {
    pub fn from_chi(chi: &ChiMatrix) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            n: chi.dim(),
            chi: Some(matrix_to_data(chi.matrix())),
            kraus: None,
        }
    }

    /// Both representations of the strategy; the chi route validates the
    /// feasibility invariants, the Kraus route feeds the direct payoff path.
    pub fn load(
        &self,
        basis: &Arc<OperatorBasis>,
    ) -> Result<(ChiMatrix, KrausChannel), CliError> {
        if self.format_version != FORMAT_VERSION {
            return Err(CliError::Validation(format!(
                "unsupported format_version {} (expected {FORMAT_VERSION})",
                self.format_version
            )));
        }
        if self.n != basis.dim() {
            return Err(CliError::Validation(format!(
                "strategy dimension {} does not match the game dimension {}",
                self.n,
                basis.dim()
            )));
        }
        match (&self.chi, &self.kraus) {
            (Some(chi), None) => {
                let matrix = matrix_from_data(chi, "chi")?;
                let chi = ChiMatrix::new(Arc::clone(basis), matrix)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                let kraus =
                    chi_to_kraus(&chi).map_err(|e| CliError::Validation(e.to_string()))?;
                Ok((chi, kraus))
            }
            (None, Some(kraus)) => {
                let operators = kraus
                    .iter()
                    .enumerate()
                    .map(|(k, m)| matrix_from_data(m, &format!("kraus[{k}]")))
                    .collect::<Result<Vec<_>, _>>()?;
                let channel = KrausChannel::new(operators)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                let chi = kraus_to_chi(&channel, basis)
                    .map_err(|e| CliError::Validation(e.to_string()))?;
                Ok((chi, channel))
            }
            (Some(_), Some(_)) => Err(CliError::Validation(
                "specify either chi or kraus, not both".into(),
            )),
            (None, None) => Err(CliError::Validation(
                "one of chi or kraus is required".into(),
            )),
        }
    }
}

/// Machine-readable solver output with strategies at full precision.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub format_version: u32,
    pub mode: String,
    pub game: String,
    pub seed: u64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub iterations: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_lower: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_upper: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gap: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    pub strategies: Vec<StrategyFile>,
}

/// Writes through a temp file in the destination directory, then renames,
/// so readers never observe a partial file.
pub fn write_atomic(path: &std::path::Path, contents: &str) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => d.join(format!(
            ".{}.tmp",
            path.file_name()
                .map(|f| f.to_string_lossy().into_owned())
                .unwrap_or_else(|| "qgame-out".into())
        )),
        None => std::path::PathBuf::from(format!(
            ".{}.tmp",
            path.to_string_lossy()
        )),
    };
    std::fs::write(&tmp, contents)
        .map_err(|e| CliError::Io(format!("writing {}: {e}", tmp.display())))?;
    std::fs::rename(&tmp, path)
        .map_err(|e| CliError::Io(format!("renaming to {}: {e}", path.display())))?;
    Ok(())
}
