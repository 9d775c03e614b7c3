//! The orthonormal traceless Hermitian operator basis, the coherence-vector
//! map between `su(d)` and `R^(d^2-1)`, and the adjoint representation.
//!
//! Hilbert-space labelling for the FMO model: index 0 (printed as 1) is the
//! electronic ground state, indices 1..=7 are the single-excitation states
//! of sites 1..=7. Basis elements are numbered from 1 in every user-facing
//! string and from 0 in Rust indexing:
//!
//! * `F_1 ..= F_{d-1}`: the diagonal family
//!   `d^l = (sum_{j<=l} |j><j| - l |l+1><l+1|) / sqrt(l(l+1))`;
//! * the next `d(d-1)/2`: symmetric `(|j><k| + |k><j|)/sqrt 2`;
//! * the last `d(d-1)/2`: antisymmetric `(-i|j><k| + i|k><j|)/sqrt 2`;
//!
//! with pairs `j < k` enumerated lexicographically. For `d = 8` this puts
//! the pairs `(ground, site j)` at symmetric index `j + 7` and antisymmetric
//! index `j + 35`, so that `(F_{j+7} - i F_{j+35}) / sqrt 2 = |site j><ground|`.

use crate::error::{Error, Result};
use crate::linalg::{c, ensure_unitary, trace, ComplexMatrix, ComplexVector, RealMatrix, C64};

/// Number of levels in the FMO single-excitation model.
pub const FMO_DIM: usize = 8;

/// Tolerance for the tracelessness check of [`OperatorBasis::f_map`].
pub const TRACE_TOL: f64 = 1e-10;

/// A coherence vector: coordinates of a traceless operator in the basis.
pub type CoherenceVector = ComplexVector;

/// Which of the three families a basis element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Diagonal { l: usize },
    Symmetric { j: usize, k: usize },
    Antisymmetric { j: usize, k: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBasis {
    dim: usize,
    elements: Vec<ComplexMatrix>,
    families: Vec<Family>,
}

impl OperatorBasis {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        let mut elements = Vec::with_capacity(dim * dim - 1);
        let mut families = Vec::with_capacity(dim * dim - 1);

        for l in 1..dim {
            let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
            let mut m = ComplexMatrix::zeros(dim, dim);
            for j in 0..l {
                m[(j, j)] = c(norm, 0.0);
            }
            m[(l, l)] = c(-(l as f64) * norm, 0.0);
            elements.push(m);
            families.push(Family::Diagonal { l });
        }

        let pairs: Vec<(usize, usize)> = (0..dim)
            .flat_map(|j| (j + 1..dim).map(move |k| (j, k)))
            .collect();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for &(j, k) in &pairs {
            let mut m = ComplexMatrix::zeros(dim, dim);
            m[(j, k)] = c(s, 0.0);
            m[(k, j)] = c(s, 0.0);
            elements.push(m);
            families.push(Family::Symmetric { j, k });
        }
        for &(j, k) in &pairs {
            let mut m = ComplexMatrix::zeros(dim, dim);
            m[(j, k)] = c(0.0, -s);
            m[(k, j)] = c(0.0, s);
            elements.push(m);
            families.push(Family::Antisymmetric { j, k });
        }
        Ok(Self {
            dim,
            elements,
            families,
        })
    }

    /// The 63-element basis for the 8-level FMO model.
    pub fn fmo() -> Self {
        Self::new(FMO_DIM).expect("dimension 8 is valid")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of basis elements, `d^2 - 1`.
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Element by zero-based index.
    pub fn element(&self, i: usize) -> &ComplexMatrix {
        &self.elements[i]
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn family(&self, i: usize) -> Family {
        self.families[i]
    }

    /// Zero-based index of the symmetric element for the pair `(j, k)`.
    pub fn symmetric_index(&self, j: usize, k: usize) -> usize {
        self.pair_offset(j, k) + (self.dim - 1)
    }

    pub fn antisymmetric_index(&self, j: usize, k: usize) -> usize {
        self.symmetric_index(j, k) + self.dim * (self.dim - 1) / 2
    }

    fn pair_offset(&self, j: usize, k: usize) -> usize {
        let (j, k) = if j < k { (j, k) } else { (k, j) };
        let d = self.dim;
        // Pairs (0, *), (1, *), ... before row j.
        j * d - j * (j + 1) / 2 + (k - j - 1)
    }

    /// Expansion coefficients `Tr(F_i X)` of an operator; exact reconstruction
    /// `X = sum_i c_i F_i` for traceless `X`.
    pub fn coefficients(&self, x: &ComplexMatrix) -> ComplexVector {
        ComplexVector::from_iterator(
            self.len(),
            self.elements.iter().map(|f| trace_product(f, x)),
        )
    }

    /// `sum_i v_i F_i`.
    pub fn operator(&self, v: &ComplexVector) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.dim, self.dim);
        for (f, &vi) in self.elements.iter().zip(v.iter()) {
            if vi != C64::new(0.0, 0.0) {
                out += f * vi;
            }
        }
        out
    }

    /// The map `f`: `f(X)_i = -i Tr(F_i X)`, so `f(i F_j) = e_j`.
    pub fn f_map(&self, x: &ComplexMatrix) -> Result<CoherenceVector> {
        self.check_shape(x)?;
        let tr = trace(x).norm();
        if tr > TRACE_TOL {
            return Err(Error::NotTraceless(tr));
        }
        Ok(self.coefficients(x) * c(0.0, -1.0))
    }

    /// Inverse of [`f_map`](Self::f_map): `i sum_j v_j F_j`.
    pub fn f_inv(&self, v: &CoherenceVector) -> ComplexMatrix {
        self.operator(v) * c(0.0, 1.0)
    }

    /// Adjoint representation `(G_U)_{ij} = Tr(F_i U F_j U^dagger)`.
    ///
    /// `G_U` is real orthogonal and satisfies
    /// `f(U X U^dagger) = G_U f(X)` for traceless `X`.
    pub fn adjoint_rep(&self, u: &ComplexMatrix) -> Result<RealMatrix> {
        self.check_shape(u)?;
        ensure_unitary(u, 1e-10)?;
        let n = self.len();
        let ud = u.adjoint();
        let mut g = RealMatrix::zeros(n, n);
        for (j, fj) in self.elements.iter().enumerate() {
            let rotated = u * fj * &ud;
            for (i, fi) in self.elements.iter().enumerate() {
                g[(i, j)] = trace_product(fi, &rotated).re;
            }
        }
        Ok(g)
    }

    fn check_shape(&self, x: &ComplexMatrix) -> Result<()> {
        if x.nrows() != self.dim || x.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: x.nrows(),
            });
        }
        Ok(())
    }
}

/// `Tr(A B)` without forming the product.
pub fn trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> C64 {
    let n = a.nrows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            let x = a[(i, k)];
            if x != C64::new(0.0, 0.0) {
                acc += x * b[(k, i)];
            }
        }
    }
    acc
}

/// Unit vector `e_i` (zero-based) of length `n`.
pub fn unit(n: usize, i: usize) -> ComplexVector {
    let mut v = ComplexVector::zeros(n);
    v[i] = c(1.0, 0.0);
    v
}
