//! Dense complex linear algebra: the matrix aliases used throughout the
//! crate, structural checks, column-stacking vectorization, a deterministic
//! Hermitian eigensolver and the matrix exponential.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
/// A square matrix of `Complex<f64>`.
pub type ComplexMatrix = DMatrix<C64>;
pub type ComplexVector = DVector<C64>;
pub type RealMatrix = DMatrix<f64>;
pub type RealVector = DVector<f64>;

/// Eigenvalues closer than this (times the spectral scale) form one cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;
const PHASE_ZERO: f64 = 1e-9;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn all_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.diagonal().iter().sum()
}

pub fn frobenius(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Largest singular value.
pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// Hilbert–Schmidt inner product `Tr(A^dagger B)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn is_hermitian(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && hermiticity_defect(m) <= tol
}

pub fn unitarity_defect(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    max_abs(&(m * m.adjoint() - ComplexMatrix::identity(n, n)))
}

pub fn is_unitary(m: &ComplexMatrix, tol: f64) -> bool {
    m.is_square() && unitarity_defect(m) <= tol
}

pub fn ensure_unitary(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    let defect = unitarity_defect(m);
    if defect > tol || !defect.is_finite() {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

pub fn ensure_hermitian(m: &ComplexMatrix, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if !all_finite(m) {
        return Err(Error::NonFinite);
    }
    let defect = hermiticity_defect(m);
    if defect > tol {
        return Err(Error::NotHermitian(defect));
    }
    Ok(())
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_part(m)
        .symmetric_eigenvalues()
        .iter()
        .fold(f64::INFINITY, |acc, &w| acc.min(w))
}

pub fn is_psd(m: &ComplexMatrix, tol: f64) -> bool {
    min_eigenvalue(m) >= -tol
}

pub fn hermitian_part(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// Column-stacking vectorization, `vec(A X B) = (B^T (x) A) vec(X)`.
pub fn vec(m: &ComplexMatrix) -> ComplexVector {
    // nalgebra storage is column-major, which is exactly column stacking.
    ComplexVector::from_column_slice(m.as_slice())
}

pub fn unvec(v: &ComplexVector, dim: usize) -> Result<ComplexMatrix> {
    if v.len() != dim * dim {
        return Err(Error::DimensionMismatch {
            expected: dim * dim,
            found: v.len(),
        });
    }
    Ok(ComplexMatrix::from_column_slice(dim, dim, v.as_slice()))
}

/// Trace distance `(1/2) ||A - B||_1` for Hermitian arguments.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let diff = hermitian_part(&(a - b));
    0.5 * diff.symmetric_eigenvalues().iter().map(|w| w.abs()).sum::<f64>()
}

pub fn to_complex(m: &RealMatrix) -> ComplexMatrix {
    m.map(|x| c(x, 0.0))
}

pub fn to_complex_vec(v: &RealVector) -> ComplexVector {
    v.map(|x| c(x, 0.0))
}

/// Result of [`eigh`]: eigenvalues in descending order and the matching
/// orthonormal eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// Index ranges of numerically degenerate eigenvalues.
    pub fn clusters(&self) -> Vec<std::ops::Range<usize>> {
        clusters_of(&self.values)
    }
}

pub(crate) fn clusters_of(values: &[f64]) -> Vec<std::ops::Range<usize>> {
    let scale = values.iter().fold(1.0_f64, |acc, w| acc.max(w.abs()));
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || (values[i - 1] - values[i]).abs() >= DEGENERACY_GAP * scale {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Hermitian eigendecomposition with reproducible conventions.
///
/// Eigenvalues come back sorted descending. Inside a degenerate cluster the
/// basis is rebuilt by pivoted Gram–Schmidt over the cluster projector's
/// columns (lowest index wins near-ties), so the result does not depend on
/// whichever basis the underlying solver happened to return. Every column
/// is then rotated so its first non-negligible entry is real and positive.
pub fn eigh(x: &ComplexMatrix) -> Result<Eigh> {
    ensure_hermitian(x, 1e-10)?;
    let n = x.nrows();
    if n == 0 {
        return Ok(Eigh {
            values: vec![],
            vectors: ComplexMatrix::zeros(0, 0),
        });
    }
    let h = hermitian_part(x);
    let decomposition = h.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        decomposition.eigenvalues[j]
            .partial_cmp(&decomposition.eigenvalues[i])
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut values: Vec<f64> = order.iter().map(|&i| decomposition.eigenvalues[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &decomposition.eigenvectors.column(src));
    }

    for range in clusters_of(&values) {
        if range.len() < 2 {
            continue;
        }
        let block = vectors.columns(range.start, range.len()).into_owned();
        let basis = projector_basis(&block);
        for (offset, v) in basis.iter().enumerate() {
            let col = range.start + offset;
            vectors.set_column(col, v);
            values[col] = (v.adjoint() * &h * v)[(0, 0)].re;
        }
    }

    for j in 0..n {
        let mut col = vectors.column(j).into_owned();
        fix_phase(&mut col);
        vectors.set_column(j, &col);
    }
    Ok(Eigh { values, vectors })
}

/// Deterministic orthonormal basis of the column space of `block`, built by
/// pivoted Gram–Schmidt on the columns of its projector.
fn projector_basis(block: &ComplexMatrix) -> Vec<ComplexVector> {
    let n = block.nrows();
    let m = block.ncols();
    let projector = block * block.adjoint();
    let mut candidates: Vec<ComplexVector> =
        (0..n).map(|i| projector.column(i).into_owned()).collect();
    let mut accepted: Vec<ComplexVector> = Vec::with_capacity(m);
    while accepted.len() < m {
        let norms: Vec<f64> = candidates.iter().map(|v| v.norm()).collect();
        let best = norms.iter().fold(0.0_f64, |a, &b| a.max(b));
        if best < 1e-12 {
            break;
        }
        let pick = norms
            .iter()
            .position(|&nrm| nrm >= 0.5 * best)
            .expect("maximum is attained");
        let mut v = candidates[pick].clone();
        for _ in 0..2 {
            for u in &accepted {
                let overlap = u.dotc(&v);
                v -= u * overlap;
            }
        }
        let norm = v.norm();
        v /= c(norm, 0.0);
        for cand in candidates.iter_mut() {
            let overlap = v.dotc(cand);
            *cand -= &v * overlap;
        }
        candidates[pick].fill(c(0.0, 0.0));
        accepted.push(v);
    }
    accepted
}

/// Rotate `v` so that its first entry above [`PHASE_ZERO`] is real positive.
pub fn fix_phase(v: &mut ComplexVector) {
    if let Some(z) = v.iter().find(|z| z.norm() > PHASE_ZERO).copied() {
        let phase = z.conj() / z.norm();
        *v *= phase;
    }
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];
const THETA13: f64 = 5.371920351148152;

fn norm1(m: &ComplexMatrix) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(x: &ComplexMatrix) -> Result<ComplexMatrix> {
    if !x.is_square() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: x.ncols(),
        });
    }
    if !all_finite(x) {
        return Err(Error::NonFinite);
    }
    let n = x.nrows();
    let id = ComplexMatrix::identity(n, n);
    let norm = norm1(x);
    if norm == 0.0 {
        return Ok(id);
    }
    let squarings = if norm > THETA13 {
        (norm / THETA13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = x.scale(0.5_f64.powi(squarings));
    let b = &PADE13;
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let cs = |k: usize| c(b[k], 0.0);
    let u_inner = &a6 * (&a6 * cs(13) + &a4 * cs(11) + &a2 * cs(9))
        + &a6 * cs(7)
        + &a4 * cs(5)
        + &a2 * cs(3)
        + &id * cs(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * cs(12) + &a4 * cs(10) + &a2 * cs(8))
        + &a6 * cs(6)
        + &a4 * cs(4)
        + &a2 * cs(2)
        + &id * cs(0);
    let numerator = &v + &u;
    let denominator = &v - &u;
    let mut r = denominator
        .lu()
        .solve(&numerator)
        .ok_or_else(|| Error::Contract("singular Padé denominator".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !all_finite(&r) {
        return Err(Error::NonFinite);
    }
    Ok(r)
}
