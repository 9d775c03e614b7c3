//! Time evolution under Lindblad generators: the exact semigroup, an RK4
//! cross-check, rotate–evolve–rotate simulation of a single rank-one
//! generator, Trotter products and a CPTP checker.

use serde::{Deserialize, Serialize};

use crate::basis::OperatorBasis;
use crate::decomposition::RankOneGenerator;
use crate::error::{Error, Result};
use crate::linalg::{
    c, hermiticity_defect, min_eigenvalue, trace, trace_distance, ComplexMatrix,
};
use crate::master_eq::{GksForm, LindbladModel, Process, Superoperator};
use crate::trajectory::{Trajectory, TrajectoryRow};

/// Tolerance on the density-matrix invariants of user-supplied states.
pub const STATE_TOL: f64 = 1e-10;
/// Evolved states may drift this far before evolution is rejected.
pub const DRIFT_TOL: f64 = 1e-6;
/// Rotate–evolve–rotate must reproduce the direct channel to this accuracy.
pub const COVARIANCE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    /// Validates Hermiticity and unit trace (to 1e-10) and positivity (to
    /// -1e-8).
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        check_state(&m, STATE_TOL, 1e-8).map_err(Error::InvalidState)?;
        Ok(Self(m))
    }

    /// The pure state `|index><index|` in a `dim`-level system.
    pub fn basis_state(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::InvalidState(format!("level {index} outside 0..{dim}")));
        }
        let mut m = ComplexMatrix::zeros(dim, dim);
        m[(index, index)] = c(1.0, 0.0);
        Ok(Self(m))
    }

    pub fn ground() -> Self {
        Self::basis_state(8, 0).expect("ground level exists")
    }

    /// Single excitation on `site` (1..=7).
    pub fn site(site: usize) -> Result<Self> {
        if !(1..=7).contains(&site) {
            return Err(Error::InvalidState(format!("site index {site} outside 1..=7")));
        }
        Self::basis_state(8, site)
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    fn evolved(m: ComplexMatrix) -> Result<Self> {
        check_state(&m, DRIFT_TOL, DRIFT_TOL).map_err(Error::EvolutionDrift)?;
        Ok(Self(m))
    }
}

fn check_state(m: &ComplexMatrix, tol: f64, psd_tol: f64) -> std::result::Result<(), String> {
    if !m.is_square() {
        return Err("matrix is not square".into());
    }
    if !crate::linalg::all_finite(m) {
        return Err("non-finite entry".into());
    }
    let herm = hermiticity_defect(m);
    if herm > tol {
        return Err(format!("not Hermitian (defect {herm:e})"));
    }
    let tr = trace(m);
    if (tr - c(1.0, 0.0)).norm() > tol {
        return Err(format!("trace is {tr}, expected 1"));
    }
    let min = min_eigenvalue(m);
    if min < -psd_tol {
        return Err(format!("negative eigenvalue {min:e}"));
    }
    Ok(())
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

/// `unvec(exp(t L) vec(rho0))`.
pub fn evolve_exact(l: &Superoperator, rho0: &DensityMatrix, t: f64) -> Result<DensityMatrix> {
    check_time(t)?;
    if t == 0.0 {
        return Ok(rho0.clone());
    }
    let channel = l.exp(t)?;
    DensityMatrix::evolved(channel.apply(rho0.matrix()))
}

/// Classical fixed-step RK4 on `d rho / dt = L(rho)`, applying the model's
/// generator directly to matrices.
pub fn evolve_rk4(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    t: f64,
    steps: usize,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if steps == 0 {
        return Err(Error::InvalidArgument("step count must be at least 1".into()));
    }
    let h = t / steps as f64;
    let half = c(h / 2.0, 0.0);
    let mut rho = rho0.matrix().clone();
    for _ in 0..steps {
        let k1 = model.apply(&rho);
        let k2 = model.apply(&(&rho + &k1 * half));
        let k3 = model.apply(&(&rho + &k2 * half));
        let k4 = model.apply(&(&rho + &k3 * c(h, 0.0)));
        rho += (k1 + (k2 + k3) * c(2.0, 0.0) + k4) * c(h / 6.0, 0.0);
    }
    DensityMatrix::evolved(rho)
}

/// `exp(t L_g)` for the single-jump dissipator of `g`.
pub fn generator_channel(
    g: &RankOneGenerator,
    basis: &OperatorBasis,
    t: f64,
) -> Result<Superoperator> {
    check_time(t)?;
    g.model(basis).liouvillian().exp(t)
}

/// Rotates into the canonical frame with `W = U^dagger`, evolves under the
/// canonical generator, and rotates back. Cross-checked against the direct
/// channel.
pub fn simulate_conjugated(
    g: &RankOneGenerator,
    basis: &OperatorBasis,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    check_time(t)?;
    let w = g.conjugator.adjoint();
    let rotated = &w * rho0.matrix() * w.adjoint();
    let evolved = g.canonical_model(basis).liouvillian().exp(t)?.apply(&rotated);
    let back = w.adjoint() * evolved * &w;

    let direct = generator_channel(g, basis, t)?.apply(rho0.matrix());
    let mismatch = trace_distance(&back, &direct);
    if mismatch > COVARIANCE_TOL {
        return Err(Error::Contract(format!(
            "conjugated simulation differs from direct channel by {mismatch:e}"
        )));
    }
    DensityMatrix::evolved(back)
}

/// Generator of `g` assembled from its canonical form:
/// `W^-1 o L_canonical o W` with `W(rho) = W rho W^dagger`.
pub fn conjugated_generator(g: &RankOneGenerator, basis: &OperatorBasis) -> Superoperator {
    g.canonical_model(basis)
        .liouvillian()
        .conjugated_by(&g.conjugator.adjoint())
}

/// Trotter components of a decomposed model: the effective Hamiltonian
/// (when nonzero), then every generator in the given order.
pub fn trotter_components(gks: &GksForm, generators: &[RankOneGenerator]) -> Vec<Superoperator> {
    let basis = gks.basis();
    let mut out = Vec::with_capacity(generators.len() + 1);
    if crate::linalg::max_abs(gks.hamiltonian()) > 0.0 {
        let h = LindbladModel::new(gks.hamiltonian().clone(), vec![], Process::Custom)
            .expect("effective Hamiltonian is Hermitian");
        out.push(h.liouvillian());
    }
    out.extend(generators.iter().map(|g| conjugated_generator(g, basis)));
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Splitting {
    /// `[prod_c exp(dt L_c)]^n`.
    #[default]
    Lie,
    /// Symmetric half steps around the last component.
    Strang,
}

/// Product-formula evolution over `n` steps. Components are applied in the
/// order given.
pub fn trotter_evolve(
    components: &[Superoperator],
    rho0: &DensityMatrix,
    t: f64,
    n: usize,
    splitting: Splitting,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if n == 0 {
        return Err(Error::InvalidArgument("Trotter step count must be at least 1".into()));
    }
    let d = rho0.dim();
    if components.is_empty() || t == 0.0 {
        return Ok(rho0.clone());
    }
    let dt = t / n as f64;
    let step = match splitting {
        Splitting::Lie => {
            let mut s = Superoperator::identity(d);
            for comp in components {
                s = comp.exp(dt)?.compose(&s);
            }
            s
        }
        Splitting::Strang => {
            let (last, rest) = components.split_last().expect("non-empty");
            let halves = rest
                .iter()
                .map(|comp| comp.exp(dt / 2.0))
                .collect::<Result<Vec<_>>>()?;
            let mut s = Superoperator::identity(d);
            for h in &halves {
                s = h.compose(&s);
            }
            s = last.exp(dt)?.compose(&s);
            for h in halves.iter().rev() {
                s = h.compose(&s);
            }
            s
        }
    };
    let mut rho = rho0.matrix().clone();
    for _ in 0..n {
        rho = step.apply(&rho);
    }
    DensityMatrix::evolved(rho)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub min_choi_eigenvalue: f64,
    pub max_trace_deviation: f64,
}

/// Choi matrix `sum_ij |i><j| (x) T(|i><j|)`, unnormalised.
pub fn choi_matrix(channel: &Superoperator) -> ComplexMatrix {
    let d = channel.dim();
    let s = channel.matrix();
    ComplexMatrix::from_fn(d * d, d * d, |row, col| {
        let (i, r) = (row / d, row % d);
        let (j, k) = (col / d, col % d);
        s[(r + d * k, i + d * j)]
    })
}

/// Complete positivity via the Choi spectrum, trace preservation via the
/// matrix units `|i><j|`.
pub fn cptp_check(channel: &Superoperator) -> CptpReport {
    let d = channel.dim();
    let choi = choi_matrix(channel);
    let min = min_eigenvalue(&choi);
    let mut dev = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            let mut e = ComplexMatrix::zeros(d, d);
            e[(i, j)] = c(1.0, 0.0);
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((trace(&channel.apply(&e)) - c(want, 0.0)).norm());
        }
    }
    CptpReport {
        min_choi_eigenvalue: min,
        max_trace_deviation: dev,
    }
}

/// Populations and site–ground coherences of `exp(t L) rho0` on a time grid.
pub fn trajectory(model: &LindbladModel, rho0: &DensityMatrix, times: &[f64]) -> Result<Trajectory> {
    let l = model.liouvillian();
    trajectory_with(times, |t| evolve_exact(&l, rho0, t))
}

/// Like [`trajectory`] with a caller-supplied propagator.
pub fn trajectory_with<F>(times: &[f64], evolve: F) -> Result<Trajectory>
where
    F: Fn(f64) -> Result<DensityMatrix> + Sync,
{
    for (i, &t) in times.iter().enumerate() {
        check_time(t)?;
        if i > 0 && t < times[i - 1] {
            return Err(Error::InvalidArgument(format!(
                "times must be ascending ({} after {})",
                t,
                times[i - 1]
            )));
        }
    }
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = times.len().div_ceil(workers).max(1);
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = times
            .chunks(chunk)
            .map(|part| {
                let evolve = &evolve;
                scope.spawn(move || {
                    part.iter()
                        .map(|&t| evolve(t).map(|rho| TrajectoryRow::from_state(rho.matrix())))
                        .collect::<Result<Vec<_>>>()
                })
            })
            .collect();
        let mut rows = Vec::with_capacity(times.len());
        for h in handles {
            rows.extend(h.join().expect("trajectory worker panicked")?);
        }
        Ok::<_, Error>(rows)
    })?;
    Ok(Trajectory {
        times: times.to_vec(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomposition::{conjugated_form, decompose};
    use crate::linalg::max_abs;
    use crate::master_eq::site_projector;
    use crate::testutil::{random_density, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn coherent_state(site: usize, amplitude: f64) -> DensityMatrix {
        // Mixture keeping |rho_{site,0}| = amplitude.
        let mut m = ComplexMatrix::zeros(8, 8);
        m[(0, 0)] = c(0.5, 0.0);
        m[(site, site)] = c(0.5, 0.0);
        m[(site, 0)] = c(amplitude, 0.0);
        m[(0, site)] = c(amplitude, 0.0);
        DensityMatrix::new(m).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let l = LindbladModel::fmo_dissipative(&[0.4; 7]).unwrap().liouvillian();
        let rho = DensityMatrix::site(3).unwrap();
        assert_eq!(evolve_exact(&l, &rho, 0.0).unwrap(), rho);
        let m = LindbladModel::fmo_dissipative(&[0.4; 7]).unwrap();
        assert_eq!(evolve_rk4(&m, &rho, 0.0, 4).unwrap(), rho);
    }

    #[test]
    fn dephasing_coherence_decay() {
        let m = LindbladModel::fmo_dephasing(&[1.0; 7]).unwrap();
        let l = m.liouvillian();
        for site in 1..=7 {
            let rho = coherent_state(site, 0.5);
            for t in [0.5, 1.0, 2.0] {
                let out = evolve_exact(&l, &rho, t).unwrap();
                assert!((out.matrix()[(site, 0)].norm() - 0.5 * (-t).exp()).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dissipative_population_decay() {
        let rates = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
        let l = LindbladModel::fmo_dissipative(&rates).unwrap().liouvillian();
        for (j, &g) in rates.iter().enumerate() {
            let rho = DensityMatrix::site(j + 1).unwrap();
            let out = evolve_exact(&l, &rho, 1.5).unwrap();
            let p = (-2.0 * g * 1.5_f64).exp();
            assert!((out.matrix()[(j + 1, j + 1)].re - p).abs() < 1e-12);
            assert!((out.matrix()[(0, 0)].re - (1.0 - p)).abs() < 1e-12);
        }
    }

    #[test]
    fn semigroup_law() {
        let m = LindbladModel::fmo(None, &[0.5; 7], &[0.3; 7]).unwrap();
        let l = m.liouvillian();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = DensityMatrix::new(random_density(&mut rng, 8)).unwrap();
        let a = evolve_exact(&l, &rho, 0.7).unwrap();
        let b = evolve_exact(&l, &evolve_exact(&l, &rho, 0.3).unwrap(), 0.4).unwrap();
        assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-10);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let m = LindbladModel::fmo(None, &[0.5; 7], &[0.3; 7]).unwrap();
        let l = m.liouvillian();
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = DensityMatrix::new(random_density(&mut rng, 8)).unwrap();
        let exact = evolve_exact(&l, &rho, 1.0).unwrap();
        let e1 = trace_distance(evolve_rk4(&m, &rho, 1.0, 10).unwrap().matrix(), exact.matrix());
        let e2 = trace_distance(evolve_rk4(&m, &rho, 1.0, 20).unwrap().matrix(), exact.matrix());
        let ratio = e1 / e2;
        assert!((12.0..=20.0).contains(&ratio), "ratio {ratio}");
        let fine = evolve_rk4(&m, &rho, 1.0, 1000).unwrap();
        assert!(trace_distance(fine.matrix(), exact.matrix()) < 1e-8);
        assert!((trace(fine.matrix()) - c(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn rk4_rejects_zero_steps() {
        let m = LindbladModel::fmo_dissipative(&[0.5; 7]).unwrap();
        assert!(evolve_rk4(&m, &DensityMatrix::ground(), 1.0, 0).is_err());
    }

    #[test]
    fn single_generator_channel() {
        let basis = OperatorBasis::fmo();
        let gks = LindbladModel::fmo_dissipative(&[0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0])
            .unwrap()
            .to_gks(&basis)
            .unwrap();
        let gens = decompose(&gks).unwrap();
        assert_eq!(gens.len(), 1);
        let id = generator_channel(&gens[0], &basis, 0.0).unwrap();
        assert!(max_abs(&(id.matrix() - Superoperator::identity(8).matrix())) < 1e-15);
        let ch = generator_channel(&gens[0], &basis, 1.0).unwrap();
        let out = ch.apply(&site_projector(1));
        assert!((out[(1, 1)].re - (-1.0_f64).exp()).abs() < 1e-12);
        for t in [0.1, 1.0, 10.0] {
            let r = cptp_check(&generator_channel(&gens[0], &basis, t).unwrap());
            assert!(r.min_choi_eigenvalue >= -1e-10);
        }
    }

    #[test]
    fn conjugated_simulation_matches_direct() {
        let basis = OperatorBasis::fmo();
        let gks = LindbladModel::fmo_dissipative(&[0.5; 7]).unwrap().to_gks(&basis).unwrap();
        let gens = decompose(&gks).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let rho = DensityMatrix::new(random_density(&mut rng, 8)).unwrap();
        for g in &gens {
            let a = simulate_conjugated(g, &basis, &rho, 0.3).unwrap();
            let b = generator_channel(g, &basis, 0.3).unwrap().apply(rho.matrix());
            assert!(trace_distance(a.matrix(), &b) < 1e-10);
            let still = simulate_conjugated(g, &basis, &rho, 0.0).unwrap();
            assert!(trace_distance(still.matrix(), rho.matrix()) < 1e-14);
        }
        let a = random_unit_vector(&mut rng, 63);
        let g = conjugated_form(0.7, &a, &basis).unwrap();
        let x = simulate_conjugated(&g, &basis, &rho, 1.0).unwrap();
        let y = generator_channel(&g, &basis, 1.0).unwrap().apply(rho.matrix());
        assert!(trace_distance(x.matrix(), &y) < 1e-10);
    }

    #[test]
    fn trotter_single_component_is_exact() {
        let l = LindbladModel::fmo(None, &[0.5; 7], &[0.3; 7]).unwrap().liouvillian();
        let rho = DensityMatrix::site(2).unwrap();
        let exact = evolve_exact(&l, &rho, 1.0).unwrap();
        for n in [1, 3, 16] {
            let tr = trotter_evolve(std::slice::from_ref(&l), &rho, 1.0, n, Splitting::Lie).unwrap();
            assert!(trace_distance(tr.matrix(), exact.matrix()) < 1e-12);
        }
    }

    #[test]
    fn trotter_first_and_second_order() {
        // Non-commuting pieces: a coherent hopping term and site dissipation.
        let mut h = ComplexMatrix::zeros(8, 8);
        for j in 1..7 {
            h[(j, j + 1)] = c(0.4, 0.0);
            h[(j + 1, j)] = c(0.4, 0.0);
        }
        let ham = LindbladModel::new(h, vec![], Process::Custom).unwrap().liouvillian();
        let diss = LindbladModel::fmo(None, &[0.5; 7], &[0.3; 7]).unwrap().liouvillian();
        let comps = [ham.clone(), diss.clone()];
        let exact = evolve_exact(&ham.add(&diss), &DensityMatrix::site(1).unwrap(), 1.0).unwrap();
        let err = |n, s| {
            let r = trotter_evolve(&comps, &DensityMatrix::site(1).unwrap(), 1.0, n, s).unwrap();
            trace_distance(r.matrix(), exact.matrix())
        };
        let lie = err(64, Splitting::Lie) / err(128, Splitting::Lie);
        assert!((1.7..=2.3).contains(&lie), "lie ratio {lie}");
        let strang = err(16, Splitting::Strang) / err(32, Splitting::Strang);
        assert!((3.4..=4.6).contains(&strang), "strang ratio {strang}");
    }

    #[test]
    fn commuting_dephasing_components_are_exact() {
        let rates = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];
        let per_site: Vec<Superoperator> = (0..7)
            .map(|j| {
                let mut r = [0.0; 7];
                r[j] = rates[j];
                LindbladModel::fmo_dephasing(&r).unwrap().liouvillian()
            })
            .collect();
        let full = LindbladModel::fmo_dephasing(&rates).unwrap().liouvillian();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = DensityMatrix::new(random_density(&mut rng, 8)).unwrap();
        let exact = evolve_exact(&full, &rho, 1.0).unwrap();
        for n in [1, 5] {
            let tr = trotter_evolve(&per_site, &rho, 1.0, n, Splitting::Lie).unwrap();
            assert!(trace_distance(tr.matrix(), exact.matrix()) < 1e-11);
        }
    }

    #[test]
    fn cptp_detector() {
        let id = cptp_check(&Superoperator::identity(8));
        assert!(id.min_choi_eigenvalue.abs() < 1e-12);
        assert!(id.max_trace_deviation == 0.0);
        // Transpose map: vec(rho^T) is a permutation of vec(rho).
        let mut t = ComplexMatrix::zeros(64, 64);
        for i in 0..8 {
            for j in 0..8 {
                t[(j + 8 * i, i + 8 * j)] = c(1.0, 0.0);
            }
        }
        let r = cptp_check(&Superoperator::from_matrix(8, t).unwrap());
        assert!(r.min_choi_eigenvalue <= -0.5);
        for m in [
            LindbladModel::fmo_dissipative(&[0.5; 7]).unwrap(),
            LindbladModel::fmo_dephasing(&[0.3; 7]).unwrap(),
        ] {
            let r = cptp_check(&m.liouvillian().exp(1.0).unwrap());
            assert!(r.min_choi_eigenvalue >= -1e-10 && r.max_trace_deviation <= 1e-10);
        }
    }

    #[test]
    fn trajectory_rows() {
        let m = LindbladModel::fmo_dissipative(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        let rho = DensityMatrix::site(1).unwrap();
        let t_half = 2.0_f64.ln() / 2.0;
        let tr = trajectory(&m, &rho, &[0.0, t_half]).unwrap();
        assert_eq!(tr.rows[0].populations[1], 1.0);
        assert!((tr.rows[1].populations[1] - 0.5).abs() < 1e-12);
        for row in &tr.rows {
            assert!((row.populations.iter().sum::<f64>() - 1.0).abs() < 1e-8);
        }
        assert!(trajectory(&m, &rho, &[1.0, 0.5]).is_err());
    }

    #[test]
    fn invalid_states_rejected() {
        let mut m = ComplexMatrix::zeros(8, 8);
        m[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(DensityMatrix::new(m), Err(Error::InvalidState(_))));
        assert!(DensityMatrix::site(0).is_err());
        assert!(DensityMatrix::site(8).is_err());
    }
}
