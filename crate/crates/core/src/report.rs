//! Machine-readable decomposition report.
//!
//! Indices in the report are 1-based. Sparse vectors are lists of
//! `[index, re, im]` (complex) or `[index, value]` (real); matrices are
//! row-major `[re, im]` pairs.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::decomposition::{decompose, CanonicalParams, RankOneGenerator, Residuals, IDENTITY_TOL};
use crate::error::Result;
use crate::linalg::{max_abs, ComplexVector, RealVector};
use crate::master_eq::{GksForm, Process};
use crate::model_file::{from_matrix, ComplexRows};

/// Entries below this magnitude are omitted from sparse listings.
pub const SPARSE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorReport {
    pub index: usize,
    pub lambda: f64,
    pub vector: Vec<(usize, f64, f64)>,
    pub psi: f64,
    pub theta: f64,
    pub a_re: Vec<(usize, f64)>,
    pub a_im: Vec<(usize, f64)>,
    pub conjugator: ComplexRows,
    pub target_re: Vec<(usize, f64)>,
    pub target_im: Vec<(usize, f64)>,
    pub spectrum: Vec<f64>,
    pub matched_element: Option<usize>,
    pub params: CanonicalParams,
    pub residuals: Residuals,
    pub flagged: Vec<String>,
}

/// Angle vectors quoted with the published decompositions, attached as
/// opaque metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PublishedAngles {
    pub generator: usize,
    pub alpha_re: Vec<f64>,
    pub alpha_im: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub dim: usize,
    pub process: Process,
    pub effective_hamiltonian_max_abs: f64,
    pub gks_nonzero: Vec<(usize, usize, f64, f64)>,
    pub eigenvalues: Vec<f64>,
    pub generators: Vec<GeneratorReport>,
    pub published_angles: Vec<PublishedAngles>,
    pub residual_tolerance: f64,
    pub flagged: usize,
}

fn sparse_complex(v: &ComplexVector) -> Vec<(usize, f64, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > SPARSE_TOL)
        .map(|(i, z)| (i + 1, z.re, z.im))
        .collect()
}

fn sparse_real(v: &RealVector) -> Vec<(usize, f64)> {
    v.iter()
        .enumerate()
        .filter(|(_, x)| x.abs() > SPARSE_TOL)
        .map(|(i, &x)| (i + 1, x))
        .collect()
}

fn dissipative_alpha() -> (Vec<f64>, Vec<f64>) {
    let mut im = vec![FRAC_PI_2; 34];
    im.push(3.0 * FRAC_PI_2);
    (vec![0.0; 35], im)
}

/// Published angle vectors by generator label. Dissipative: every
/// generator. Dephasing: labels 1..=7 as printed, which do not correspond
/// to the eigenvectors computed here.
pub fn published_angles(process: Process) -> Vec<PublishedAngles> {
    match process {
        Process::Dissipative => (1..=7)
            .map(|k| {
                let (alpha_re, alpha_im) = dissipative_alpha();
                PublishedAngles { generator: k, alpha_re, alpha_im }
            })
            .collect(),
        Process::Dephasing => (1..=7)
            .map(|k| {
                let (alpha_re, alpha_im) = match k {
                    1 | 7 => dissipative_alpha(),
                    2 | 3 => (vec![0.0; 35], vec![PI; 35]),
                    _ => (vec![PI; 35], vec![PI; 35]),
                };
                PublishedAngles { generator: k, alpha_re, alpha_im }
            })
            .collect(),
        _ => vec![],
    }
}

fn generator_report(index: usize, g: &RankOneGenerator, process: Process) -> GeneratorReport {
    let mut flagged = Vec::new();
    for (name, value) in [
        ("phase_split", g.residuals.phase_split),
        ("conjugation", g.residuals.conjugation),
        ("targets", g.residuals.targets),
    ] {
        if value.is_nan() || value > IDENTITY_TOL {
            flagged.push(name.to_string());
        }
    }
    let mut params = g.params.clone();
    if process == Process::Dissipative {
        let (re, im) = dissipative_alpha();
        params.alpha_re = Some(re);
        params.alpha_im = Some(im);
    }
    GeneratorReport {
        index,
        lambda: g.weight,
        vector: sparse_complex(&g.vector),
        psi: g.psi,
        theta: g.theta,
        a_re: sparse_real(&g.re),
        a_im: sparse_real(&g.im),
        conjugator: from_matrix(&g.conjugator),
        target_re: sparse_real(&g.target_re),
        target_im: sparse_real(&g.target_im),
        spectrum: g.spectrum.clone(),
        matched_element: g.matched_element.map(|i| i + 1),
        params,
        residuals: g.residuals,
        flagged,
    }
}

impl DecompositionReport {
    pub fn build(gks: &GksForm, process: Process) -> Result<Self> {
        let generators = decompose(gks)?;
        Ok(Self::from_generators(gks, process, &generators))
    }

    pub fn from_generators(gks: &GksForm, process: Process, generators: &[RankOneGenerator]) -> Self {
        let gens: Vec<GeneratorReport> = generators
            .iter()
            .enumerate()
            .map(|(k, g)| generator_report(k + 1, g, process))
            .collect();
        let flagged = gens.iter().filter(|g| !g.flagged.is_empty()).count();
        Self {
            dim: gks.basis().dim(),
            process,
            effective_hamiltonian_max_abs: max_abs(gks.hamiltonian()),
            gks_nonzero: gks
                .nonzero_entries(SPARSE_TOL)
                .into_iter()
                .map(|(i, j, z)| (i + 1, j + 1, z.re, z.im))
                .collect(),
            eigenvalues: generators.iter().map(|g| g.weight).collect(),
            generators: gens,
            published_angles: if process == Process::Dephasing {
                published_angles(process)
            } else {
                vec![]
            },
            residual_tolerance: IDENTITY_TOL,
            flagged,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}
