//! Random fixtures shared by the unit tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::basis::OperatorBasis;
use crate::linalg::{c, hermitian_part, trace, ComplexMatrix, ComplexVector};
use crate::master_eq::{JumpTerm, LindbladModel, Process};

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    hermitian_part(&random_matrix(rng, n))
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    random_matrix(rng, n).qr().q()
}

pub fn random_density(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let m = random_matrix(rng, n);
    let p = &m * m.adjoint();
    let t = trace(&p);
    p / t
}

pub fn random_unit_vector(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
    let v = ComplexVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let norm = v.norm();
    v / c(norm, 0.0)
}

pub fn random_model(rng: &mut ChaCha8Rng, basis: &OperatorBasis) -> LindbladModel {
    let d = basis.dim();
    let h = random_hermitian(rng, d);
    let count = rng.gen_range(1..5);
    let terms = (0..count)
        .map(|_| JumpTerm {
            rate: rng.gen_range(0.05..1.0),
            operator: random_matrix(rng, d),
        })
        .collect();
    LindbladModel::new(h, terms, Process::Custom).unwrap()
}
