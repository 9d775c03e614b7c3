//! Rank-one decomposition of a GKS matrix and the canonical frame of each
//! rank-one generator.
//!
//! A generator `lambda a a^dagger` is brought to canonical form in three
//! steps. First a global phase `psi` makes the real and imaginary parts of
//! `e^{i psi} a` orthogonal, giving `cos(theta) aR + i sin(theta) aI` with
//! `theta` in `[0, pi/4]`. Then a unitary `U1` diagonalises the operator
//! `i sum_j aR_j F_j`, and a second unitary `U2`, block diagonal on the
//! eigenspaces of that diagonal form, diagonalises what it can of the
//! imaginary part. With `W = U2 U1` the conjugator is `U = W^dagger`, and
//! the adjoint rotation `G_U` carries the canonical vector back:
//! `a a^dagger = G_U (a~ a~^dagger) G_U^T` where `a~ = G_W e^{i psi} a`.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::basis::{Family, OperatorBasis};
use crate::error::{Error, Result};
use crate::linalg::{
    c, eigh, ensure_hermitian, fix_phase, to_complex, to_complex_vec, ComplexMatrix, ComplexVector,
    RealMatrix, RealVector, DEGENERACY_GAP,
};
use crate::master_eq::{GksForm, JumpTerm, LindbladModel, Process, PSD_TOL, RANK_CUTOFF};

/// Tolerance on the conjugation identity; larger residuals are a bug.
pub const IDENTITY_TOL: f64 = 1e-8;

const BALANCED_TOL: f64 = 1e-14;
const ZERO_PART: f64 = 1e-14;
// Real and imaginary norms closer than this count as equal: no fold.
const FOLD_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Eigenpair {
    pub weight: f64,
    pub vector: ComplexVector,
}

/// Splits a PSD matrix into `sum_k lambda_k a_k a_k^dagger`, largest weight
/// first. Each `a_k` has its first significant entry real positive, unless
/// the vector is genuinely complex, in which case that entry is rotated to
/// `-i |.|`.
pub fn spectral_decompose(a: &ComplexMatrix) -> Result<Vec<Eigenpair>> {
    ensure_hermitian(a, 1e-10)?;
    let e = eigh(a)?;
    if let Some(&min) = e.values.last() {
        if min < -PSD_TOL {
            return Err(Error::NotMarkovian(min));
        }
    }
    let mut out = Vec::new();
    for (k, &w) in e.values.iter().enumerate() {
        if w <= RANK_CUTOFF {
            continue;
        }
        let mut v = e.vectors.column(k).into_owned();
        fix_phase(&mut v);
        if v.iter().any(|z| z.im.abs() > 1e-12) {
            v *= c(0.0, -1.0);
        }
        out.push(Eigenpair { weight: w, vector: v });
    }
    Ok(out)
}

/// Phase-fixed split of a unit vector into orthonormal real parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonical {
    pub psi: f64,
    pub theta: f64,
    pub re: RealVector,
    /// Zero when `theta == 0`.
    pub im: RealVector,
}

pub fn canonicalize(a: &ComplexVector) -> Result<Canonical> {
    let norm = a.norm();
    if norm < ZERO_PART {
        return Err(Error::ZeroVector);
    }
    if (norm - 1.0).abs() > 1e-8 {
        return Err(Error::InvalidArgument(format!(
            "coefficient vector must be normalised (norm {norm})"
        )));
    }
    let s: num_complex::Complex64 = a.iter().map(|z| z * z).sum();
    let mut psi = if s.norm() < BALANCED_TOL {
        0.0
    } else {
        -s.arg() / 2.0
    };
    if psi < 0.0 {
        psi += PI;
    }
    let split = |psi: f64| {
        let b = a * num_complex::Complex64::from_polar(1.0, psi);
        (b.map(|z| z.re), b.map(|z| z.im))
    };
    let (mut x, mut y) = split(psi);
    if x.norm() + FOLD_TOL < y.norm() {
        psi += FRAC_PI_2;
        if psi >= PI {
            psi -= PI;
        }
        (x, y) = split(psi);
    }
    let (nx, ny) = (x.norm(), y.norm());
    let theta = ny.atan2(nx);
    let re = x / nx;
    let im = if ny > ZERO_PART {
        y / ny
    } else {
        RealVector::zeros(a.len())
    };
    Ok(Canonical { psi, theta, re, im })
}

/// Output of [`find_conjugator`].
#[derive(Debug, Clone, PartialEq)]
pub struct Conjugator {
    /// `U = (U2 U1)^dagger`.
    pub unitary: ComplexMatrix,
    pub stage1: ComplexMatrix,
    pub stage2: ComplexMatrix,
    pub target_re: RealVector,
    pub target_im: RealVector,
    /// Diagonal of `U1 H_R U1^dagger` in the chosen order.
    pub spectrum: Vec<f64>,
    /// Zero-based index of the diagonal basis element the real part was
    /// mapped onto, when its spectrum matches one.
    pub matched_element: Option<usize>,
}

/// Finds `U` with `G_U^T aR` supported on the diagonal family and
/// `G_U^T aI` reduced within the eigenspaces of that diagonal.
pub fn find_conjugator(
    re: &RealVector,
    im: &RealVector,
    basis: &OperatorBasis,
) -> Result<Conjugator> {
    let d = basis.dim();
    let h_re = basis.operator(&to_complex_vec(re));
    let e = eigh(&h_re)?;

    let (order, matched) = match matching_diagonal_element(&e.values, basis) {
        Some((l, order)) => (order, Some(l)),
        None => ((0..d).collect(), None),
    };
    let mut v = ComplexMatrix::zeros(d, d);
    let mut spectrum = Vec::with_capacity(d);
    for (pos, &src) in order.iter().enumerate() {
        v.set_column(pos, &e.vectors.column(src));
        spectrum.push(e.values[src]);
    }
    let stage1 = v.adjoint();

    let mut stage2 = ComplexMatrix::identity(d, d);
    if im.norm() > ZERO_PART {
        let h_im = &stage1 * basis.operator(&to_complex_vec(im)) * stage1.adjoint();
        for group in value_groups(&spectrum) {
            if group.len() < 2 {
                continue;
            }
            let block = ComplexMatrix::from_fn(group.len(), group.len(), |r, col| {
                h_im[(group[r], group[col])]
            });
            let block = crate::linalg::hermitian_part(&block);
            let be = eigh(&block)?;
            let bd = be.vectors.adjoint();
            for (r, &gr) in group.iter().enumerate() {
                for (col, &gc) in group.iter().enumerate() {
                    stage2[(gr, gc)] = bd[(r, col)];
                }
            }
        }
    }

    let w = &stage2 * &stage1;
    let g_w = basis.adjoint_rep(&w)?;
    let target_re = &g_w * re;
    let target_im = &g_w * im;
    Ok(Conjugator {
        unitary: w.adjoint(),
        stage1,
        stage2,
        target_re,
        target_im,
        spectrum,
        matched_element: matched,
    })
}

/// If the sorted spectrum equals that of some diagonal basis element, returns
/// its index and the eigenvalue order that reproduces its diagonal.
fn matching_diagonal_element(values: &[f64], basis: &OperatorBasis) -> Option<(usize, Vec<usize>)> {
    let d = basis.dim();
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    for i in 0..basis.len() {
        if !matches!(basis.family(i), Family::Diagonal { .. }) {
            continue;
        }
        let diag: Vec<f64> = (0..d).map(|p| basis.element(i)[(p, p)].re).collect();
        let mut sorted = diag.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let same = sorted
            .iter()
            .zip(values)
            .all(|(a, b)| (a - b).abs() < DEGENERACY_GAP * scale);
        if !same {
            continue;
        }
        let mut used = vec![false; d];
        let mut order = Vec::with_capacity(d);
        for &target in &diag {
            let src = (0..d)
                .find(|&k| !used[k] && (values[k] - target).abs() < DEGENERACY_GAP * scale)?;
            used[src] = true;
            order.push(src);
        }
        return Some((i, order));
    }
    None
}

fn value_groups(values: &[f64]) -> Vec<Vec<usize>> {
    let scale = values.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in values.iter().enumerate() {
        match groups
            .iter_mut()
            .find(|g| (values[g[0]] - v).abs() < DEGENERACY_GAP * scale)
        {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    groups
}

/// Canonical-frame parameters of a generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParams {
    pub theta: f64,
    /// Opaque angle vectors quoted alongside the published decompositions;
    /// carried as metadata only.
    pub alpha_re: Option<Vec<f64>>,
    pub alpha_im: Option<Vec<f64>>,
}

/// One term `lambda a a^dagger` together with its canonical frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RankOneGenerator {
    pub weight: f64,
    pub vector: ComplexVector,
    pub psi: f64,
    pub theta: f64,
    pub re: RealVector,
    pub im: RealVector,
    /// `U`, with `W = U^dagger` taking the original frame to the canonical one.
    pub conjugator: ComplexMatrix,
    /// `G_U = adjoint_rep(U)`: canonical coherence vectors to original ones.
    pub rotation: RealMatrix,
    pub target_re: RealVector,
    pub target_im: RealVector,
    pub spectrum: Vec<f64>,
    pub matched_element: Option<usize>,
    pub params: CanonicalParams,
    pub residuals: Residuals,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    /// `|e^{i psi} a - (cos theta aR + i sin theta aI)|`.
    pub phase_split: f64,
    /// `|a a^dagger - G_U a~ a~^dagger G_U^T|_F`.
    pub conjugation: f64,
    /// `|G_U a~R - aR| + |G_U a~I - aI|`.
    pub targets: f64,
}

impl RankOneGenerator {
    /// `a~ = cos(theta) a~R + i sin(theta) a~I`.
    pub fn canonical_vector(&self) -> ComplexVector {
        to_complex_vec(&self.target_re) * c(self.theta.cos(), 0.0)
            + to_complex_vec(&self.target_im) * c(0.0, self.theta.sin())
    }

    pub fn jump(&self, basis: &OperatorBasis) -> ComplexMatrix {
        basis.operator(&self.vector)
    }

    pub fn canonical_jump(&self, basis: &OperatorBasis) -> ComplexMatrix {
        basis.operator(&self.canonical_vector())
    }

    /// Single-term Lindblad model `lambda D[sum_i a_i F_i]`.
    pub fn model(&self, basis: &OperatorBasis) -> LindbladModel {
        single_jump(basis, self.weight, self.jump(basis))
    }

    /// The same dissipator written in the canonical frame.
    pub fn canonical_model(&self, basis: &OperatorBasis) -> LindbladModel {
        single_jump(basis, self.weight, self.canonical_jump(basis))
    }
}

fn single_jump(basis: &OperatorBasis, rate: f64, operator: ComplexMatrix) -> LindbladModel {
    let d = basis.dim();
    LindbladModel::new(
        ComplexMatrix::zeros(d, d),
        vec![JumpTerm { rate, operator }],
        Process::Custom,
    )
    .expect("rank-one generator is a valid model")
}

/// Canonicalises `(lambda, a)` and verifies the conjugation identity.
pub fn conjugated_form(weight: f64, a: &ComplexVector, basis: &OperatorBasis) -> Result<RankOneGenerator> {
    if !(weight.is_finite() && weight > 0.0) {
        return Err(Error::InvalidArgument(format!("weight must be positive, got {weight}")));
    }
    let can = canonicalize(a)?;
    let conj = find_conjugator(&can.re, &can.im, basis)?;
    let rotation = basis.adjoint_rep(&conj.unitary)?;

    let split = to_complex_vec(&can.re) * c(can.theta.cos(), 0.0)
        + to_complex_vec(&can.im) * c(0.0, can.theta.sin());
    let phase_split = (a * num_complex::Complex64::from_polar(1.0, can.psi) - split).norm();

    let tilde = to_complex_vec(&conj.target_re) * c(can.theta.cos(), 0.0)
        + to_complex_vec(&conj.target_im) * c(0.0, can.theta.sin());
    let g = to_complex(&rotation);
    let lhs = a * a.adjoint();
    let rhs = &g * (&tilde * tilde.adjoint()) * g.transpose();
    let conjugation = crate::linalg::frobenius(&(lhs - rhs));
    let targets = (&rotation * &conj.target_re - &can.re).norm()
        + (&rotation * &conj.target_im - &can.im).norm();
    if conjugation > IDENTITY_TOL {
        return Err(Error::Contract(format!(
            "conjugation identity residual {conjugation:e}"
        )));
    }

    Ok(RankOneGenerator {
        weight,
        vector: a.clone(),
        psi: can.psi,
        theta: can.theta,
        re: can.re,
        im: can.im,
        conjugator: conj.unitary,
        rotation,
        target_re: conj.target_re,
        target_im: conj.target_im,
        spectrum: conj.spectrum,
        matched_element: conj.matched_element,
        params: CanonicalParams {
            theta: can.theta,
            alpha_re: None,
            alpha_im: None,
        },
        residuals: Residuals {
            phase_split,
            conjugation,
            targets,
        },
    })
}

/// Full pipeline on a GKS form: spectral split then canonical frames.
pub fn decompose(gks: &GksForm) -> Result<Vec<RankOneGenerator>> {
    let pairs = spectral_decompose(gks.matrix())?;
    std::thread::scope(|scope| {
        let handles: Vec<_> = pairs
            .iter()
            .map(|p| scope.spawn(move || conjugated_form(p.weight, &p.vector, gks.basis())))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("decomposition worker panicked"))
            .collect()
    })
}
