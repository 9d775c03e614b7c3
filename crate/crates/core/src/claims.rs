//! Published claims about the FMO decomposition, recomputed from scratch.
//!
//! Every concrete value quoted for the dissipative and dephasing
//! decompositions, the two printed frame unitaries and the two drawn
//! circuits is listed here with the value derived by this crate and a
//! MATCH/MISMATCH verdict. Indices in descriptions are 1-based, as printed.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4, PI};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::basis::{unit, OperatorBasis};
use crate::circuit::{matrix_distance, published, Circuit};
use crate::decomposition::{canonicalize, decompose, spectral_decompose, RankOneGenerator};
use crate::error::Result;
use crate::linalg::{c, unitarity_defect, ComplexMatrix, ComplexVector, RealVector, C64};
use crate::master_eq::LindbladModel;

/// Absolute tolerance for scalar comparisons.
pub const VALUE_TOL: f64 = 1e-12;
/// Tolerance for matrix and vector comparisons.
pub const MATRIX_TOL: f64 = 1e-10;

/// Site rates used when checking the dissipative listing.
pub const SAMPLE_RATES: [f64; 7] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Match,
    Mismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Claim {
    pub category: String,
    pub id: String,
    pub statement: String,
    pub claimed: String,
    pub derived: String,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ClaimsReport {
    pub items: Vec<Claim>,
}

pub const CATEGORIES: [&str; 10] = [
    "dissipative-gks",
    "dissipative-gks-errata",
    "dissipative-spectrum",
    "dissipative-canonical",
    "dephasing-spectrum",
    "dephasing-vectors",
    "dephasing-canonical",
    "dissipative-frame",
    "dephasing-frame",
    "circuits",
];

impl ClaimsReport {
    fn push(&mut self, category: &str, id: String, statement: String, claimed: String, derived: String, ok: bool) {
        self.items.push(Claim {
            category: category.to_string(),
            id,
            statement,
            claimed,
            derived,
            verdict: if ok { Verdict::Match } else { Verdict::Mismatch },
        });
    }

    pub fn in_category<'a>(&'a self, category: &'a str) -> impl Iterator<Item = &'a Claim> + 'a {
        self.items.iter().filter(move |c| c.category == category)
    }

    pub fn count(&self, verdict: Verdict) -> usize {
        self.items.iter().filter(|c| c.verdict == verdict).count()
    }

    pub fn all_match(&self, category: &str) -> bool {
        self.in_category(category).all(|c| c.verdict == Verdict::Match)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for c in &self.items {
            let tag = match c.verdict {
                Verdict::Match => "MATCH",
                Verdict::Mismatch => "MISMATCH",
            };
            let _ = writeln!(
                out,
                "{tag:<8} {}/{}: {} | claimed: {} | derived: {}",
                c.category, c.id, c.statement, c.claimed, c.derived
            );
        }
        let _ = writeln!(
            out,
            "summary: {} MATCH, {} MISMATCH, {} total",
            self.count(Verdict::Match),
            self.count(Verdict::Mismatch),
            self.items.len()
        );
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("claims serialise")
    }
}

fn fmt_c(z: C64) -> String {
    let re = if z.re.abs() < 1e-15 { 0.0 } else { z.re };
    let im = if z.im.abs() < 1e-15 { 0.0 } else { z.im };
    match (re == 0.0, im == 0.0) {
        (true, true) => "0".into(),
        (false, true) => format!("{re:.12}"),
        (true, false) => format!("{im:.12}i"),
        (false, false) => format!("{re:.12}{im:+.12}i"),
    }
}

/// Nonzero entries of a coefficient vector as `{i: value, ...}` (1-based).
fn fmt_vec(v: &ComplexVector) -> String {
    let parts: Vec<String> = v
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 1e-12)
        .map(|(i, &z)| format!("{}: {}", i + 1, fmt_c(z)))
        .collect();
    format!("{{{}}}", parts.join(", "))
}

fn fmt_list(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.12}")).collect();
    format!("[{}]", parts.join(", "))
}

fn support(v: &ComplexVector) -> Vec<usize> {
    v.iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 1e-10)
        .map(|(i, _)| i + 1)
        .collect()
}

fn sparse(entries: &[(usize, C64)]) -> ComplexVector {
    let mut v = ComplexVector::zeros(63);
    for &(i, z) in entries {
        v[i - 1] = z;
    }
    v
}

/// `f(U (i F_k) U^dagger)` for a (possibly non-unitary) matrix `U`.
fn image(basis: &OperatorBasis, u: &ComplexMatrix, x: &ComplexVector) -> ComplexVector {
    let op = basis.f_inv(x);
    basis.coefficients(&(u * op * u.adjoint())) * c(0.0, -1.0)
}

/// Generator whose vector is supported on `{site + 7, site + 35}`.
fn generator_for_site(gens: &[RankOneGenerator], site: usize) -> Option<&RankOneGenerator> {
    gens.iter()
        .find(|g| support(&g.vector) == vec![site + 7, site + 35])
}

/// All published claims with their derived values.
pub fn published_claims() -> Result<ClaimsReport> {
    let basis = OperatorBasis::fmo();
    let mut r = ClaimsReport::default();
    dissipative_claims(&basis, &mut r)?;
    dephasing_claims(&basis, &mut r)?;
    frame_claims(&basis, &mut r)?;
    circuit_claims(&mut r);
    Ok(r)
}

fn dissipative_claims(basis: &OperatorBasis, r: &mut ClaimsReport) -> Result<()> {
    let gamma = SAMPLE_RATES;
    let gks = LindbladModel::fmo_dissipative(&gamma)?.to_gks(basis)?;
    let a = gks.matrix();
    let rate_label = |j: usize| format!("Gamma_{j} = {}", gamma[j - 1]);

    let mut listed = Vec::new();
    for j in 1..=7 {
        let (x, y) = (j + 7, j + 35);
        let g = gamma[j - 1];
        for (row, col, want, text) in [
            (x, x, c(g, 0.0), format!("Gamma_{j}")),
            (y, y, c(g, 0.0), format!("Gamma_{j}")),
            (x, y, c(0.0, -g), format!("-i Gamma_{j}")),
            (y, x, c(0.0, g), format!("i Gamma_{j}")),
        ] {
            listed.push((row, col));
            let got = a[(row - 1, col - 1)];
            r.push(
                "dissipative-gks",
                format!("a_{row},{col}"),
                format!("GKS entry a_{{{row},{col}}} ({})", rate_label(j)),
                format!("{text} = {}", fmt_c(want)),
                fmt_c(got),
                (got - want).norm() <= VALUE_TOL,
            );
        }
    }
    let nonzero = gks.nonzero_entries(VALUE_TOL);
    let extra = nonzero
        .iter()
        .filter(|(i, j, _)| !listed.contains(&(i + 1, j + 1)))
        .count();
    r.push(
        "dissipative-gks",
        "count".into(),
        "number of nonvanishing GKS entries".into(),
        "28".into(),
        format!("{} ({} outside the listing)", nonzero.len(), extra),
        nonzero.len() == 28 && extra == 0,
    );

    // The sixth row of the listing as literally printed.
    for (row, col, want, text) in [
        (13usize, 46usize, c(0.0, -gamma[5]), "-i Gamma_6"),
        (46, 13, c(0.0, gamma[4]), "i Gamma_5"),
    ] {
        let got = a[(row - 1, col - 1)];
        r.push(
            "dissipative-gks-errata",
            format!("a_{row},{col}-literal"),
            format!("GKS entry a_{{{row},{col}}} as printed (read above as a_{{13,41}} / a_{{41,13}} with Gamma_6)"),
            format!("{text} = {}", fmt_c(want)),
            fmt_c(got),
            (got - want).norm() <= VALUE_TOL,
        );
    }

    let pairs = spectral_decompose(a)?;
    r.push(
        "dissipative-spectrum",
        "rank".into(),
        "number of nonzero eigenvalues of A".into(),
        "7".into(),
        pairs.len().to_string(),
        pairs.len() == 7,
    );
    let gens = decompose(&gks)?;
    for k in 1..=7 {
        let want_l = 2.0 * gamma[k - 1];
        let g = generator_for_site(&gens, k);
        let got_l = g.map(|g| g.weight).unwrap_or(f64::NAN);
        r.push(
            "dissipative-spectrum",
            format!("lambda_{k}"),
            format!("lambda_{k} = 2 Gamma_{k}"),
            format!("{want_l:.12}"),
            format!("{got_l:.12}"),
            (got_l - want_l).abs() <= VALUE_TOL,
        );
        let want_v = sparse(&[(k + 7, c(0.0, -FRAC_1_SQRT_2)), (k + 35, c(FRAC_1_SQRT_2, 0.0))]);
        let (derived, ok) = match g {
            Some(g) => {
                let overlap = want_v.dotc(&g.vector).norm();
                (fmt_vec(&g.vector), (overlap - 1.0).abs() <= VALUE_TOL && (&g.vector - &want_v).norm() <= VALUE_TOL)
            }
            None => ("no eigenvector on this support".into(), false),
        };
        r.push(
            "dissipative-spectrum",
            format!("a_{k}"),
            format!("eigenvector a_{k} has a_{} = -i/sqrt2, a_{} = 1/sqrt2", k + 7, k + 35),
            fmt_vec(&want_v),
            derived,
            ok,
        );
    }

    for k in 1..=7 {
        let Some(g) = generator_for_site(&gens, k) else { continue };
        r.push(
            "dissipative-canonical",
            format!("psi_{k}"),
            format!("phase psi_{k}"),
            "0".into(),
            format!("{:.12}", g.psi),
            g.psi.abs() <= VALUE_TOL,
        );
        r.push(
            "dissipative-canonical",
            format!("theta_{k}"),
            format!("angle theta_{k}"),
            format!("pi/4 = {FRAC_PI_4:.12}"),
            format!("{:.12}", g.theta),
            (g.theta - FRAC_PI_4).abs() <= VALUE_TOL,
        );
        r.push(
            "dissipative-canonical",
            format!("orthonormal_{k}"),
            format!("real and imaginary parts of a_{k} orthonormal"),
            "aR . aI = 0, |aR| = |aI| = 1".into(),
            format!("aR . aI = {:.3e}, |aR| = {:.12}, |aI| = {:.12}", g.re.dot(&g.im), g.re.norm(), g.im.norm()),
            g.re.dot(&g.im).abs() <= VALUE_TOL && (g.re.norm() - 1.0).abs() <= VALUE_TOL && (g.im.norm() - 1.0).abs() <= VALUE_TOL,
        );
    }
    if let Some(g) = generator_for_site(&gens, 1) {
        let re_ok = (&g.re - unit_real(36)).norm() <= VALUE_TOL;
        let im_ok = (&g.im + unit_real(8)).norm() <= VALUE_TOL;
        r.push(
            "dissipative-canonical",
            "hat_a_1".into(),
            "real/imaginary parts of a_1".into(),
            "aR = e_36, aI = -e_8".into(),
            format!("aR = {}, aI = {}", fmt_real(&g.re), fmt_real(&g.im)),
            re_ok && im_ok,
        );
        let tre = (&g.target_re - unit_real(1)).norm() <= VALUE_TOL;
        let tim = (&g.target_im + unit_real(36)).norm() <= VALUE_TOL;
        r.push(
            "dissipative-canonical",
            "tilde_a_1".into(),
            "canonical-frame targets of a_1 reached by the computed conjugator".into(),
            "a~R = e_1, a~I = -e_36".into(),
            format!("a~R = {}, a~I = {}", fmt_real(&g.target_re), fmt_real(&g.target_im)),
            tre && tim,
        );
        r.push(
            "dissipative-canonical",
            "conjugation_1".into(),
            "a_1 a_1^dagger = G_U A~ G_U^T".into(),
            "identity holds".into(),
            format!("residual {:.3e}", g.residuals.conjugation),
            g.residuals.conjugation <= MATRIX_TOL,
        );
    }
    Ok(())
}

fn unit_real(i: usize) -> RealVector {
    let mut v = RealVector::zeros(63);
    v[i - 1] = 1.0;
    v
}

fn fmt_real(v: &RealVector) -> String {
    fmt_vec(&v.map(|x| c(x, 0.0)))
}

/// The dephasing eigenvectors as printed, 1-based sparse entries.
pub fn printed_dephasing_vectors() -> Vec<Vec<(usize, C64)>> {
    let n1 = (4.0 + 2.0 * 2f64.sqrt()).sqrt();
    let s5 = 5f64.sqrt();
    let s = FRAC_1_SQRT_2;
    vec![
        vec![(10, c(0.0, -(1.0 + 2f64.sqrt()) / n1)), (38, c(1.0 / n1, 0.0))],
        vec![(16, c(0.0, -2.0 / s5)), (47, c(1.0 / s5, 0.0))],
        vec![(12, c(0.0, -2.0 / s5)), (40, c(1.0 / s5, 0.0))],
        vec![(20, c(0.0, s)), (47, c(s, 0.0))],
        vec![(19, c(0.0, s)), (46, c(s, 0.0))],
        vec![(16, c(0.0, -s)), (45, c(s, 0.0))],
        vec![(11, c(0.0, -s)), (39, c(s, 0.0))],
    ]
}

fn dephasing_claims(basis: &OperatorBasis, r: &mut ClaimsReport) -> Result<()> {
    // Equal rates: the claimed weights become 4 sqrt2 and 4 (x6).
    let gks = LindbladModel::fmo_dephasing(&[1.0; 7])?.to_gks(basis)?;
    let pairs = spectral_decompose(gks.matrix())?;
    let weights: Vec<f64> = pairs.iter().map(|p| p.weight).collect();
    r.push(
        "dephasing-spectrum",
        "rank".into(),
        "number of nonzero eigenvalues of A (gamma_j = 1)".into(),
        "7".into(),
        weights.len().to_string(),
        weights.len() == 7,
    );
    let mut claimed = vec![4.0 * 2f64.sqrt()];
    claimed.extend([4.0; 6]);
    let mut sorted_claim = claimed.clone();
    sorted_claim.sort_by(|a, b| b.total_cmp(a));
    let ok = weights.len() == 7 && weights.iter().zip(&sorted_claim).all(|(a, b)| (a - b).abs() <= VALUE_TOL);
    r.push(
        "dephasing-spectrum",
        "lambda-equal-rates".into(),
        "lambda_1 = 4 sqrt2 gamma_1, lambda_k = 4 gamma_k (k = 2..7) at gamma_j = 1".into(),
        fmt_list(&sorted_claim),
        fmt_list(&weights),
        ok,
    );
    let gram = gram_oracle(&[1.0; 7]);
    r.push(
        "dephasing-spectrum",
        "gram-oracle".into(),
        "eigenvalues of 2 gamma (delta_jk - 1/8) at gamma_j = 1".into(),
        fmt_list(&sorted_claim),
        fmt_list(&gram),
        gram.iter().zip(&sorted_claim).all(|(a, b)| (a - b).abs() <= VALUE_TOL),
    );

    let gamma = SAMPLE_RATES;
    let gks = LindbladModel::fmo_dephasing(&gamma)?.to_gks(basis)?;
    let pairs = spectral_decompose(gks.matrix())?;
    let weights: Vec<f64> = pairs.iter().map(|p| p.weight).collect();
    let mut claimed: Vec<f64> = std::iter::once(4.0 * 2f64.sqrt() * gamma[0])
        .chain(gamma[1..].iter().map(|g| 4.0 * g))
        .collect();
    claimed.sort_by(|a, b| b.total_cmp(a));
    let ok = weights.len() == 7 && weights.iter().zip(&claimed).all(|(a, b)| (a - b).abs() <= VALUE_TOL);
    r.push(
        "dephasing-spectrum",
        "lambda-sample-rates".into(),
        "lambda_1 = 4 sqrt2 gamma_1, lambda_k = 4 gamma_k at gamma = (0.1, ..., 0.7)".into(),
        fmt_list(&claimed),
        fmt_list(&weights),
        ok,
    );

    let derived_support: Vec<usize> = pairs.iter().flat_map(|p| support(&p.vector)).collect();
    let mut all: Vec<usize> = derived_support.clone();
    all.sort_unstable();
    all.dedup();
    for (k, entries) in printed_dephasing_vectors().iter().enumerate() {
        let idx: Vec<usize> = entries.iter().map(|e| e.0).collect();
        let ok = idx.iter().all(|i| all.contains(i));
        r.push(
            "dephasing-vectors",
            format!("support_a_{}", k + 1),
            format!("eigenvector a_{} supported on {:?}", k + 1, idx),
            format!("{idx:?}"),
            format!("all eigenvectors supported on {all:?}"),
            ok,
        );
    }
    let printed: Vec<ComplexVector> = printed_dephasing_vectors().iter().map(|e| sparse(e)).collect();
    let mut worst = 0.0_f64;
    let mut pair = (0, 0);
    for i in 0..printed.len() {
        for j in i + 1..printed.len() {
            let o = printed[i].dotc(&printed[j]).norm();
            if o > worst {
                worst = o;
                pair = (i + 1, j + 1);
            }
        }
    }
    r.push(
        "dephasing-vectors",
        "orthogonality".into(),
        "printed eigenvectors are mutually orthogonal".into(),
        "max |<a_i, a_j>| = 0".into(),
        format!("max |<a_{}, a_{}>| = {worst:.12}", pair.0, pair.1),
        worst <= VALUE_TOL,
    );

    let psi_claim = [PI / 2.0, PI / 2.0, PI / 2.0, 0.0, 0.0, 0.0, 0.0];
    let n1 = (4.0 + 2.0 * 2f64.sqrt()).sqrt();
    let theta_1 = ((1.0 + 2f64.sqrt()) / n1).acos();
    let theta_23 = (2.0 / 5f64.sqrt()).acos();
    let theta_claim = [theta_1, theta_23, theta_23, FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, FRAC_PI_4];
    for (k, v) in printed.iter().enumerate() {
        let can = canonicalize(v)?;
        r.push(
            "dephasing-canonical",
            format!("psi_{}", k + 1),
            format!("phase psi_{} of the printed a_{}", k + 1, k + 1),
            format!("{:.12}", psi_claim[k]),
            format!("{:.12}", can.psi),
            (can.psi - psi_claim[k]).abs() <= VALUE_TOL,
        );
        r.push(
            "dephasing-canonical",
            format!("theta_{}", k + 1),
            format!("angle theta_{} of the printed a_{}", k + 1, k + 1),
            format!("{:.12}", theta_claim[k]),
            format!("{:.12}", can.theta),
            (can.theta - theta_claim[k]).abs() <= VALUE_TOL,
        );
    }
    let can = canonicalize(&printed[0])?;
    let ok = (&can.re - unit_real(10)).norm() <= VALUE_TOL && (&can.im - unit_real(38)).norm() <= VALUE_TOL;
    r.push(
        "dephasing-canonical",
        "hat_a_1".into(),
        "real/imaginary parts of the printed a_1".into(),
        "aR = e_10, aI = e_38".into(),
        format!("aR = {}, aI = {}", fmt_real(&can.re), fmt_real(&can.im)),
        ok,
    );
    Ok(())
}

/// Eigenvalues of `D^1/2 (I - J/8) D^1/2` with `D = diag(2 gamma)`, descending,
/// nonzero only.
pub fn gram_oracle(gamma: &[f64]) -> Vec<f64> {
    let n = gamma.len();
    let m = nalgebra::DMatrix::from_fn(n, n, |j, k| {
        let g = (2.0 * gamma[j]).sqrt() * (2.0 * gamma[k]).sqrt();
        g * (if j == k { 1.0 } else { 0.0 } - 1.0 / 8.0)
    });
    let mut w: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().filter(|x| *x > 1e-12).collect();
    w.sort_by(|a, b| b.total_cmp(a));
    w
}

fn frame_claims(basis: &OperatorBasis, r: &mut ClaimsReport) -> Result<()> {
    let u = published::dissipative_frame_unitary();
    r.push(
        "dissipative-frame",
        "unitary".into(),
        "printed frame matrix is unitary".into(),
        "U U^dagger = I".into(),
        format!("max |U U^dagger - I| = {:.3e}", unitarity_defect(&u)),
        unitarity_defect(&u) <= MATRIX_TOL,
    );
    for (id, x, want, text) in [
        ("image_iF36", unit(63, 35), unit(63, 0), "U (i F_36) U^dagger = i F_1"),
        ("image_-iF8", -unit(63, 7), -unit(63, 35), "U (-i F_8) U^dagger = -i F_36"),
    ] {
        let got = image(basis, &u, &x);
        r.push(
            "dissipative-frame",
            id.into(),
            text.into(),
            fmt_vec(&want),
            fmt_vec(&got),
            (&got - &want).norm() <= MATRIX_TOL,
        );
    }

    let u = published::dephasing_frame_unitary();
    r.push(
        "dephasing-frame",
        "unitary".into(),
        "printed frame matrix is unitary".into(),
        "U U^dagger = I".into(),
        format!("max |U U^dagger - I| = {:.3e}", unitarity_defect(&u)),
        unitarity_defect(&u) <= MATRIX_TOL,
    );
    for (id, x, want, text) in [
        ("image_iF10", unit(63, 9), unit(63, 0), "U (i F_10) U^dagger = i F_1"),
        ("image_iF38", unit(63, 37), unit(63, 35), "U (i F_38) U^dagger = i F_36"),
    ] {
        let got = image(basis, &u, &x);
        r.push(
            "dephasing-frame",
            id.into(),
            text.into(),
            fmt_vec(&want),
            fmt_vec(&got),
            (&got - &want).norm() <= MATRIX_TOL,
        );
    }
    Ok(())
}

fn circuit_claims(r: &mut ClaimsReport) {
    let cases: [(&str, Circuit, ComplexMatrix, &str); 4] = [
        ("dissipative-drawn", published::dissipative_circuit_drawn(), published::dissipative_frame_unitary(), "dissipative"),
        ("dissipative-prose", published::dissipative_circuit_prose(), published::dissipative_frame_unitary(), "dissipative"),
        ("dephasing-drawn", published::dephasing_circuit_drawn(), published::dephasing_frame_unitary(), "dephasing"),
        ("dephasing-prose", published::dephasing_circuit_prose(), published::dephasing_frame_unitary(), "dephasing"),
    ];
    for (id, circ, u, which) in &cases {
        let e = circ.evaluate();
        let d = matrix_distance(&e, u);
        r.push(
            "circuits",
            format!("{id}-vs-frame"),
            format!("{id} circuit implements the printed {which} frame matrix (up to phase)"),
            "distance 0".into(),
            format!("distance {d:.12}"),
            d <= MATRIX_TOL,
        );
        let d_adj = matrix_distance(&e, &u.adjoint());
        r.push(
            "circuits",
            format!("{id}-vs-frame-adjoint"),
            format!("{id} circuit implements the adjoint of the printed {which} frame matrix (up to phase)"),
            "distance 0".into(),
            format!("distance {d_adj:.12}"),
            d_adj <= MATRIX_TOL,
        );
        let n = circ.len();
        r.push(
            "circuits",
            format!("{id}-gate-count"),
            format!("{id} circuit uses two CNOTs, one R_y(-pi/2) and one X"),
            "4 gates".into(),
            format!("{n} gates"),
            n == 4,
        );
    }
    for (id, a, b) in [
        ("dissipative", &cases[0].1, &cases[1].1),
        ("dephasing", &cases[2].1, &cases[3].1),
    ] {
        let d = matrix_distance(&a.evaluate(), &b.evaluate());
        r.push(
            "circuits",
            format!("{id}-drawn-vs-prose"),
            format!("{id} drawing agrees with its condition list"),
            "distance 0".into(),
            format!("distance {d:.12}"),
            d <= MATRIX_TOL,
        );
    }
}
