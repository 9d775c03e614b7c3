//! Decomposition of Markovian FMO exciton dynamics into rank-one semigroup
//! generators, each realised as a unitary conjugation of a canonical
//! generator, together with the channel simulators and three-qubit circuit
//! tools used to check the decomposition end to end.
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense complex matrices, eigensolver, matrix exponential;
//! * [`basis`]: the traceless operator basis, coherence vectors, adjoint
//!   representation;
//! * [`master_eq`]: Lindblad models, GKS form, Liouvillians;
//! * [`decomposition`]: rank-one generators and their canonical frames;
//! * [`channel`]: exact, RK4 and Trotterised evolution, CPTP checks;
//! * [`circuit`]: gate IR, unitary evaluation and two-level synthesis;
//! * [`model_file`], [`report`], [`claims`], [`trajectory`]: the file
//!   formats and reports behind the `fmo-gks` command-line tool.
//!
//! A narrative guide lives in the `book/` directory of the repository; its
//! code listings are compiled as doc-tests of this crate.

pub mod basis;
pub mod channel;
pub mod circuit;
pub mod claims;
pub mod decomposition;
pub mod error;
pub mod linalg;
pub mod master_eq;
pub mod model_file;
pub mod report;
pub mod trajectory;

#[cfg(test)]
pub(crate) mod testutil;

pub use basis::{CoherenceVector, OperatorBasis};
pub use channel::DensityMatrix;
pub use circuit::{Circuit, Gate};
pub use decomposition::RankOneGenerator;
pub use error::{Error, Result};
pub use linalg::ComplexMatrix;
pub use master_eq::{GksForm, LindbladModel, Superoperator};

// The book chapters are compiled as doc-tests so their listings stay in
// sync with the API.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/basis.md")]
    mod basis {}
    #[doc = include_str!("../../../book/src/gks.md")]
    mod gks {}
    #[doc = include_str!("../../../book/src/decomposition.md")]
    mod decomposition {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
