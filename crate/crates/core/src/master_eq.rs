//! Lindblad models, their GKS form, and the Liouvillian superoperator.
//!
//! Dissipators are stored canonically as `rate * (L rho L^dagger - 1/2 {L^dagger L, rho})`.
//! The coherent part follows the sign convention `i [rho, H]`.

use serde::{Deserialize, Serialize};

use crate::basis::{OperatorBasis, FMO_DIM};
use crate::error::{Error, Result};
use crate::linalg::{
    anticommutator, c, eigh, ensure_hermitian, hermitian_part, kron, min_eigenvalue, trace, unvec,
    vec, ComplexMatrix, C64,
};

/// Number of FMO sites.
pub const SITES: usize = 7;

/// Eigenvalues of the GKS matrix above this count as nonzero.
pub const RANK_CUTOFF: f64 = 1e-12;

/// Most negative GKS eigenvalue still accepted as rounding noise.
pub const PSD_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Process {
    Dissipative,
    Dephasing,
    Mixed,
    Custom,
}

#[derive(Debug, Clone, PartialEq)]
pub struct JumpTerm {
    pub rate: f64,
    pub operator: ComplexMatrix,
}

/// Hamiltonian plus weighted jump terms.
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladModel {
    hamiltonian: ComplexMatrix,
    terms: Vec<JumpTerm>,
    process: Process,
}

/// `|ground><site|`, the lowering operator of site `site` (1-based).
pub fn sigma_minus(site: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(FMO_DIM, FMO_DIM);
    m[(0, site)] = c(1.0, 0.0);
    m
}

pub fn sigma_plus(site: usize) -> ComplexMatrix {
    sigma_minus(site).adjoint()
}

/// `|site><site|`.
pub fn site_projector(site: usize) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(FMO_DIM, FMO_DIM);
    m[(site, site)] = c(1.0, 0.0);
    m
}

fn check_rates(rates: &[f64]) -> Result<()> {
    if rates.len() != SITES {
        return Err(Error::RateCount {
            expected: SITES,
            found: rates.len(),
        });
    }
    for (i, &r) in rates.iter().enumerate() {
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::InvalidRate {
                index: i + 1,
                rate: r,
            });
        }
    }
    Ok(())
}

impl LindbladModel {
    pub fn new(hamiltonian: ComplexMatrix, terms: Vec<JumpTerm>, process: Process) -> Result<Self> {
        ensure_hermitian(&hamiltonian, 1e-10)?;
        let dim = hamiltonian.nrows();
        for (i, t) in terms.iter().enumerate() {
            if !(t.rate.is_finite() && t.rate >= 0.0) {
                return Err(Error::InvalidRate {
                    index: i + 1,
                    rate: t.rate,
                });
            }
            if t.operator.nrows() != dim || t.operator.ncols() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: t.operator.nrows(),
                });
            }
            if !crate::linalg::all_finite(&t.operator) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Self {
            hamiltonian,
            terms,
            process,
        })
    }

    /// Site-local decay into the ground state, stored as
    /// canonical terms `(2 Gamma_j, sigma^-_j)`.
    pub fn fmo_dissipative(rates: &[f64]) -> Result<Self> {
        check_rates(rates)?;
        let terms = rates
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0)
            .map(|(j, &r)| JumpTerm {
                rate: 2.0 * r,
                operator: sigma_minus(j + 1),
            })
            .collect();
        Self::new(ComplexMatrix::zeros(FMO_DIM, FMO_DIM), terms, Process::Dissipative)
    }

    /// Site-local pure dephasing, canonical terms `(2 gamma_j, |j><j|)`.
    pub fn fmo_dephasing(rates: &[f64]) -> Result<Self> {
        check_rates(rates)?;
        let terms = rates
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0)
            .map(|(j, &r)| JumpTerm {
                rate: 2.0 * r,
                operator: site_projector(j + 1),
            })
            .collect();
        Self::new(ComplexMatrix::zeros(FMO_DIM, FMO_DIM), terms, Process::Dephasing)
    }

    /// Both noise processes acting together, with an optional Hamiltonian.
    pub fn fmo(
        hamiltonian: Option<ComplexMatrix>,
        dissipative: &[f64],
        dephasing: &[f64],
    ) -> Result<Self> {
        let diss = Self::fmo_dissipative(dissipative)?;
        let deph = Self::fmo_dephasing(dephasing)?;
        let h = hamiltonian.unwrap_or_else(|| ComplexMatrix::zeros(FMO_DIM, FMO_DIM));
        let process = match (diss.terms.is_empty(), deph.terms.is_empty()) {
            (false, true) => Process::Dissipative,
            (true, false) => Process::Dephasing,
            _ => Process::Mixed,
        };
        let mut terms = diss.terms;
        terms.extend(deph.terms);
        Self::new(h, terms, process)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn terms(&self) -> &[JumpTerm] {
        &self.terms
    }

    pub fn process(&self) -> Process {
        self.process
    }

    /// Applies the generator to a matrix directly, without forming a
    /// superoperator.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        let h = &self.hamiltonian;
        let mut out = (rho * h - h * rho) * c(0.0, 1.0);
        for t in &self.terms {
            let l = &t.operator;
            let ld = l.adjoint();
            let ldl = &ld * l;
            out += (l * rho * &ld - anticommutator(&ldl, rho) * c(0.5, 0.0)) * c(t.rate, 0.0);
        }
        out
    }

    /// 64x64 superoperator acting on column-stacked density matrices.
    pub fn liouvillian(&self) -> Superoperator {
        let d = self.dim();
        let id = ComplexMatrix::identity(d, d);
        let h = &self.hamiltonian;
        let mut m = (kron(&id, h) - kron(&h.transpose(), &id)) * c(0.0, -1.0);
        for t in &self.terms {
            let l = &t.operator;
            let ldl = l.adjoint() * l;
            let term = kron(&l.conjugate(), l)
                - (kron(&id, &ldl) + kron(&ldl.transpose(), &id)) * c(0.5, 0.0);
            m += term * c(t.rate, 0.0);
        }
        Superoperator { dim: d, matrix: m }
    }

    /// Expansion into GKS form over the given traceless basis.
    ///
    /// Each jump is split as `L = L0 + (Tr L / d) I`; the identity part is
    /// folded into the effective Hamiltonian as
    /// `(i/2) rate (conj(alpha) L0 - alpha L0^dagger)`.
    pub fn to_gks(&self, basis: &OperatorBasis) -> Result<GksForm> {
        let d = self.dim();
        if basis.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: basis.dim(),
            });
        }
        let n = basis.len();
        let mut a = ComplexMatrix::zeros(n, n);
        let mut h_eff = self.hamiltonian.clone();
        for t in &self.terms {
            let alpha = trace(&t.operator) / c(d as f64, 0.0);
            let mut l0 = t.operator.clone();
            for i in 0..d {
                l0[(i, i)] -= alpha;
            }
            let coeffs = basis.coefficients(&l0);
            a += (&coeffs * coeffs.adjoint()) * c(t.rate, 0.0);
            if alpha.norm() > 0.0 {
                let k = &l0 * alpha.conj() - l0.adjoint() * alpha;
                h_eff += k * c(0.0, 0.5 * t.rate);
            }
        }
        GksForm::new(hermitian_part(&h_eff), hermitian_part(&a), basis.clone())
    }
}

/// Effective Hamiltonian plus the Hermitian PSD coefficient matrix of the
/// dissipator in a fixed basis.
#[derive(Debug, Clone, PartialEq)]
pub struct GksForm {
    hamiltonian: ComplexMatrix,
    matrix: ComplexMatrix,
    basis: OperatorBasis,
}

impl GksForm {
    pub fn new(hamiltonian: ComplexMatrix, matrix: ComplexMatrix, basis: OperatorBasis) -> Result<Self> {
        ensure_hermitian(&hamiltonian, 1e-10)?;
        ensure_hermitian(&matrix, 1e-10)?;
        if matrix.nrows() != basis.len() {
            return Err(Error::DimensionMismatch {
                expected: basis.len(),
                found: matrix.nrows(),
            });
        }
        if hamiltonian.nrows() != basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: basis.dim(),
                found: hamiltonian.nrows(),
            });
        }
        let min = min_eigenvalue(&matrix);
        if min < -PSD_TOL {
            return Err(Error::NotMarkovian(min));
        }
        Ok(Self {
            hamiltonian,
            matrix,
            basis,
        })
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    /// The GKS matrix `A`.
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn basis(&self) -> &OperatorBasis {
        &self.basis
    }

    /// Nonzero entries `(row, col, value)` with zero-based indices.
    pub fn nonzero_entries(&self, tol: f64) -> Vec<(usize, usize, C64)> {
        let n = self.matrix.nrows();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let z = self.matrix[(i, j)];
                if z.norm() > tol {
                    out.push((i, j, z));
                }
            }
        }
        out
    }

    /// Back to a Lindblad model: one jump `sum_i (v_k)_i F_i` with rate
    /// `w_k` per eigenpair of `A` above [`RANK_CUTOFF`].
    pub fn to_lindblad(&self) -> Result<LindbladModel> {
        let e = eigh(&self.matrix)?;
        if let Some(&min) = e.values.last() {
            if min < -PSD_TOL {
                return Err(Error::NotMarkovian(min));
            }
        }
        let mut terms = Vec::new();
        for (k, &w) in e.values.iter().enumerate() {
            if w > RANK_CUTOFF {
                let v = e.vectors.column(k).into_owned();
                terms.push(JumpTerm {
                    rate: w,
                    operator: self.basis.operator(&v),
                });
            }
        }
        LindbladModel::new(self.hamiltonian.clone(), terms, Process::Custom)
    }

    /// Liouvillian assembled straight from the entries of `A`,
    /// `sum_{lk} A_lk (F_l rho F_k - 1/2 {F_k F_l, rho})`.
    pub fn liouvillian(&self) -> Superoperator {
        let d = self.basis.dim();
        let id = ComplexMatrix::identity(d, d);
        let h = &self.hamiltonian;
        let mut m = (kron(&id, h) - kron(&h.transpose(), &id)) * c(0.0, -1.0);
        for (l, k, a) in self.nonzero_entries(0.0) {
            let fl = self.basis.element(l);
            let fk = self.basis.element(k);
            let fkfl = fk * fl;
            let term = kron(&fk.transpose(), fl)
                - (kron(&id, &fkfl) + kron(&fkfl.transpose(), &id)) * c(0.5, 0.0);
            m += term * a;
        }
        Superoperator { dim: d, matrix: m }
    }
}

/// Linear map on column-stacked `d x d` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: ComplexMatrix,
}

impl Superoperator {
    pub fn from_matrix(dim: usize, matrix: ComplexMatrix) -> Result<Self> {
        if matrix.nrows() != dim * dim || matrix.ncols() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { dim, matrix })
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::identity(dim * dim, dim * dim),
        }
    }

    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            matrix: ComplexMatrix::zeros(dim * dim, dim * dim),
        }
    }

    /// `rho -> U rho U^dagger`.
    pub fn unitary_conjugation(u: &ComplexMatrix) -> Self {
        Self {
            dim: u.nrows(),
            matrix: kron(&u.conjugate(), u),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        unvec(&(&self.matrix * vec(rho)), self.dim).expect("dimension checked on construction")
    }

    /// `exp(t * self)`, the channel generated over time `t`.
    pub fn exp(&self, t: f64) -> Result<Self> {
        let m = crate::linalg::expm(&(&self.matrix * c(t, 0.0)))?;
        Ok(Self {
            dim: self.dim,
            matrix: m,
        })
    }

    /// `self` after `first`.
    pub fn compose(&self, first: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix * &first.matrix,
        }
    }

    /// `U^-1 self U` for the conjugation superoperator of `u`.
    pub fn conjugated_by(&self, u: &ComplexMatrix) -> Self {
        let fwd = Self::unitary_conjugation(u);
        let back = Self::unitary_conjugation(&u.adjoint());
        Self {
            dim: self.dim,
            matrix: &back.matrix * &self.matrix * &fwd.matrix,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            dim: self.dim,
            matrix: &self.matrix + &other.matrix,
        }
    }

    /// Largest `|sum_i M_{(i,i),col}|`: zero for trace-preserving generators.
    pub fn trace_row_defect(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0_f64;
        for col in 0..d * d {
            let s: C64 = (0..d).map(|i| self.matrix[(i + d * i, col)]).sum();
            worst = worst.max(s.norm());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, spectral_norm};
    use crate::testutil::{random_density, random_model};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const GAMMA: [f64; 7] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];

    #[test]
    fn dissipative_fixes_ground_state() {
        let m = LindbladModel::fmo_dissipative(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.terms().len(), 1);
        assert_eq!(m.terms()[0].operator, sigma_minus(1));
        let ground = site_projector(0);
        assert!(max_abs(&m.apply(&ground)) == 0.0);
    }

    #[test]
    fn generators_preserve_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in [
            LindbladModel::fmo_dissipative(&GAMMA).unwrap(),
            LindbladModel::fmo_dephasing(&GAMMA).unwrap(),
        ] {
            let rho = random_density(&mut rng, 8);
            assert!(trace(&m.apply(&rho)).norm() < 1e-12);
            assert!(m.liouvillian().trace_row_defect() < 1e-12);
        }
    }

    #[test]
    fn dissipative_population_rate() {
        let m = LindbladModel::fmo_dissipative(&[0.5; 7]).unwrap();
        for j in 1..=7 {
            let d = m.apply(&site_projector(j));
            assert!((d[(j, j)] - c(-1.0, 0.0)).norm() < 1e-15);
            assert!((d[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        }
        let single = LindbladModel::fmo_dissipative(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let out = single.liouvillian().apply(&site_projector(1));
        assert!((out[(1, 1)] - c(-2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn dephasing_rates_entrywise() {
        let m = LindbladModel::fmo_dephasing(&[1.0; 7]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(&mut rng, 8);
        let diag = ComplexMatrix::from_diagonal(&rho.diagonal());
        assert!(max_abs(&m.apply(&diag)) < 1e-15);
        let d = m.apply(&rho);
        for j in 1..=7 {
            // site-ground coherence decays at gamma_j
            assert!((d[(j, 0)] + rho[(j, 0)]).norm() < 1e-14);
            for k in 1..=7 {
                if k != j {
                    assert!((d[(j, k)] + rho[(j, k)] * c(2.0, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn negative_rates_rejected() {
        let mut r = GAMMA;
        r[3] = -0.1;
        assert!(matches!(
            LindbladModel::fmo_dissipative(&r),
            Err(Error::InvalidRate { index: 4, .. })
        ));
        assert!(matches!(
            LindbladModel::fmo_dephasing(&r[..5]),
            Err(Error::RateCount { expected: 7, found: 5 })
        ));
    }

    #[test]
    fn dissipative_gks_entries() {
        let basis = OperatorBasis::fmo();
        let g = LindbladModel::fmo_dissipative(&GAMMA).unwrap().to_gks(&basis).unwrap();
        let entries = g.nonzero_entries(1e-14);
        assert_eq!(entries.len(), 28);
        for (j, &gamma) in GAMMA.iter().enumerate() {
            let (s, a) = (j + 7, j + 35);
            let a_mat = g.matrix();
            assert!((a_mat[(s, s)] - c(gamma, 0.0)).norm() < 1e-12);
            assert!((a_mat[(a, a)] - c(gamma, 0.0)).norm() < 1e-12);
            assert!((a_mat[(s, a)] - c(0.0, -gamma)).norm() < 1e-12);
            assert!((a_mat[(a, s)] - c(0.0, gamma)).norm() < 1e-12);
        }
        assert!(max_abs(g.hamiltonian()) == 0.0);
    }

    #[test]
    fn single_basis_jump() {
        let basis = OperatorBasis::fmo();
        let m = LindbladModel::new(
            ComplexMatrix::zeros(8, 8),
            vec![JumpTerm {
                rate: 1.0,
                operator: basis.element(0).clone(),
            }],
            Process::Custom,
        )
        .unwrap();
        let g = m.to_gks(&basis).unwrap();
        let entries = g.nonzero_entries(1e-15);
        assert_eq!(entries.len(), 1);
        assert_eq!((entries[0].0, entries[0].1), (0, 0));
        assert!((entries[0].2 - c(1.0, 0.0)).norm() < 1e-15);
        let back = g.to_lindblad().unwrap();
        assert_eq!(back.terms().len(), 1);
        assert!((back.terms()[0].rate - 1.0).abs() < 1e-14);
        assert!(max_abs(&(&back.terms()[0].operator - basis.element(0))) < 1e-14);
    }

    #[test]
    fn dephasing_gks_lives_on_diagonal_family() {
        let basis = OperatorBasis::fmo();
        let g = LindbladModel::fmo_dephasing(&GAMMA).unwrap().to_gks(&basis).unwrap();
        for (i, j, _) in g.nonzero_entries(1e-14) {
            assert!(i < 7 && j < 7, "entry ({i},{j}) outside the diagonal family");
        }
        // Hermitian jumps: no Hamiltonian correction.
        assert!(max_abs(g.hamiltonian()) < 1e-15);
    }

    #[test]
    fn dephasing_eigenvalues_follow_gram_matrix() {
        // Oracle: nonzero spectrum of A equals that of D^1/2 (I - J/8) D^1/2, D = diag(2 gamma).
        let basis = OperatorBasis::fmo();
        let g = LindbladModel::fmo_dephasing(&[1.0; 7]).unwrap().to_gks(&basis).unwrap();
        let e = eigh(g.matrix()).unwrap();
        let nonzero: Vec<f64> = e.values.iter().copied().filter(|&w| w > RANK_CUTOFF).collect();
        assert_eq!(nonzero.len(), 7);
        for &w in &nonzero[..6] {
            assert!((w - 2.0).abs() < 1e-12);
        }
        assert!((nonzero[6] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn gks_round_trips_preserve_liouvillian() {
        let basis = OperatorBasis::fmo();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut models = vec![
            LindbladModel::fmo_dissipative(&GAMMA).unwrap(),
            LindbladModel::fmo_dephasing(&GAMMA).unwrap(),
        ];
        for _ in 0..10 {
            models.push(random_model(&mut rng, &basis));
        }
        for m in models {
            let original = m.liouvillian();
            let g = m.to_gks(&basis).unwrap();
            let direct = g.liouvillian();
            assert!(spectral_norm(&(direct.matrix() - original.matrix())) < 1e-10);
            let back = g.to_lindblad().unwrap();
            assert!(spectral_norm(&(back.liouvillian().matrix() - original.matrix())) < 1e-10);
            let again = back.to_gks(&basis).unwrap();
            assert!(max_abs(&(again.matrix() - g.matrix())) < 1e-10);
        }
    }

    #[test]
    fn gks_is_linear_in_processes() {
        let basis = OperatorBasis::fmo();
        let a = LindbladModel::fmo_dissipative(&GAMMA).unwrap().to_gks(&basis).unwrap();
        let b = LindbladModel::fmo_dephasing(&[0.3; 7]).unwrap().to_gks(&basis).unwrap();
        let both = LindbladModel::fmo(None, &GAMMA, &[0.3; 7]).unwrap().to_gks(&basis).unwrap();
        assert!(max_abs(&(both.matrix() - a.matrix() - b.matrix())) < 1e-12);
    }

    #[test]
    fn corrupted_gks_rejected() {
        let basis = OperatorBasis::fmo();
        let mut a = ComplexMatrix::zeros(63, 63);
        a[(0, 0)] = c(-0.5, 0.0);
        let err = GksForm::new(ComplexMatrix::zeros(8, 8), a, basis).unwrap_err();
        assert!(matches!(err, Error::NotMarkovian(_)));
    }

    #[test]
    fn empty_model_has_zero_liouvillian() {
        let m = LindbladModel::new(ComplexMatrix::zeros(8, 8), vec![], Process::Custom).unwrap();
        assert!(max_abs(m.liouvillian().matrix()) == 0.0);
    }

    #[test]
    fn liouvillian_agrees_with_direct_application() {
        let basis = OperatorBasis::fmo();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = random_model(&mut rng, &basis);
        let rho = random_density(&mut rng, 8);
        assert!(max_abs(&(m.liouvillian().apply(&rho) - m.apply(&rho))) < 1e-12);
    }
}
