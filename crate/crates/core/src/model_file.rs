//! JSON model files.
//!
//! ```json
//! {
//!   "dim": 8,
//!   "hamiltonian": [[[0.0, 0.0], ...], ...],
//!   "dissipative_rates": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7],
//!   "dephasing_rates": [0, 0, 0, 0, 0, 0, 0],
//!   "initial_state": {"type": "site", "index": 1}
//! }
//! ```
//!
//! `hamiltonian` is optional (zero when absent) and holds `[re, im]` pairs.
//! `initial_state` is `{"type": "ground"}`, `{"type": "site", "index": j}`
//! with `j` in 1..=7, or `{"type": "density", "matrix": ...}` with an explicit
//! 8x8 matrix. The optional `gks_entries` list of `[row, col, re, im]`
//! (1-based indices) is added onto the GKS matrix derived from the rates.

use serde::{Deserialize, Serialize};

use crate::basis::{OperatorBasis, FMO_DIM};
use crate::channel::DensityMatrix;
use crate::error::{Error, Result};
use crate::linalg::{c, hermiticity_defect, ComplexMatrix};
use crate::master_eq::{GksForm, LindbladModel, SITES};

pub type ComplexRows = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum InitialState {
    Ground,
    Site { index: usize },
    Density { matrix: ComplexRows },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<ComplexRows>,
    pub dissipative_rates: Vec<f64>,
    pub dephasing_rates: Vec<f64>,
    pub initial_state: InitialState,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub gks_entries: Vec<(usize, usize, f64, f64)>,
}

fn field(name: &str, message: impl Into<String>) -> Error {
    Error::Field {
        field: name.to_string(),
        message: message.into(),
    }
}

fn to_matrix(name: &str, rows: &ComplexRows) -> Result<ComplexMatrix> {
    if rows.len() != FMO_DIM || rows.iter().any(|r| r.len() != FMO_DIM) {
        return Err(field(name, format!("expected an {FMO_DIM}x{FMO_DIM} matrix")));
    }
    let m = ComplexMatrix::from_fn(FMO_DIM, FMO_DIM, |i, j| c(rows[i][j][0], rows[i][j][1]));
    if !crate::linalg::all_finite(&m) {
        return Err(field(name, "non-finite entry"));
    }
    Ok(m)
}

/// Row-major `[re, im]` form of a matrix.
pub fn from_matrix(m: &ComplexMatrix) -> ComplexRows {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

fn check_rates(name: &str, rates: &[f64]) -> Result<()> {
    if rates.len() != SITES {
        return Err(field(name, format!("expected {SITES} rates, found {}", rates.len())));
    }
    if let Some((i, r)) = rates.iter().enumerate().find(|(_, r)| !(r.is_finite() && **r >= 0.0)) {
        return Err(field(name, format!("rate {} is {r}; rates must be finite and >= 0", i + 1)));
    }
    Ok(())
}

impl ModelFile {
    /// Parses and validates. Syntax errors carry the line number.
    pub fn parse(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            message: format!("column {}: {e}", e.column()),
        })?;
        file.validate()?;
        Ok(file)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model file serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim != FMO_DIM {
            return Err(field("dim", format!("must be {FMO_DIM}, found {}", self.dim)));
        }
        check_rates("dissipative_rates", &self.dissipative_rates)?;
        check_rates("dephasing_rates", &self.dephasing_rates)?;
        if let Some(h) = &self.hamiltonian {
            let m = to_matrix("hamiltonian", h)?;
            let defect = hermiticity_defect(&m);
            if defect > 1e-10 {
                return Err(field("hamiltonian", format!("not Hermitian (defect {defect:e})")));
            }
        }
        self.initial_state()?;
        let n = FMO_DIM * FMO_DIM - 1;
        for (k, &(r, col, re, im)) in self.gks_entries.iter().enumerate() {
            if !(1..=n).contains(&r) || !(1..=n).contains(&col) {
                return Err(field("gks_entries", format!("entry {}: index out of 1..={n}", k + 1)));
            }
            if !(re.is_finite() && im.is_finite()) {
                return Err(field("gks_entries", format!("entry {}: non-finite value", k + 1)));
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Result<ComplexMatrix> {
        match &self.hamiltonian {
            Some(h) => to_matrix("hamiltonian", h),
            None => Ok(ComplexMatrix::zeros(FMO_DIM, FMO_DIM)),
        }
    }

    pub fn model(&self) -> Result<LindbladModel> {
        LindbladModel::fmo(
            Some(self.hamiltonian()?),
            &self.dissipative_rates,
            &self.dephasing_rates,
        )
    }

    pub fn initial_state(&self) -> Result<DensityMatrix> {
        match &self.initial_state {
            InitialState::Ground => Ok(DensityMatrix::ground()),
            InitialState::Site { index } => DensityMatrix::site(*index)
                .map_err(|_| field("initial_state.index", format!("{index} is outside 1..={SITES}"))),
            InitialState::Density { matrix } => {
                let m = to_matrix("initial_state.matrix", matrix)?;
                DensityMatrix::new(m).map_err(|e| field("initial_state.matrix", e.to_string()))
            }
        }
    }

    /// GKS form of the rate model plus any extra `gks_entries`. Extra
    /// entries that break Hermiticity or positivity are invariant failures.
    pub fn gks(&self, basis: &OperatorBasis) -> Result<GksForm> {
        let gks = self.model()?.to_gks(basis)?;
        if self.gks_entries.is_empty() {
            return Ok(gks);
        }
        let mut a = gks.matrix().clone();
        for &(r, col, re, im) in &self.gks_entries {
            a[(r - 1, col - 1)] += c(re, im);
        }
        GksForm::new(gks.hamiltonian().clone(), a, basis.clone())
    }

    /// Dissipative-only or dephasing-only presets with a single-site start.
    pub fn preset(dissipative: &[f64], dephasing: &[f64], site: usize) -> Self {
        Self {
            dim: FMO_DIM,
            hamiltonian: None,
            dissipative_rates: dissipative.to_vec(),
            dephasing_rates: dephasing.to_vec(),
            initial_state: InitialState::Site { index: site },
            gks_entries: vec![],
        }
    }
}
