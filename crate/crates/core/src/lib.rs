//! Quantum granular computing on finite-dimensional Hilbert spaces.
//!
//! Granules are effects `0 ⪯ E ⪯ I`; the membership of a state `ρ` in a
//! granule is the Born probability `Tr(ρE)`. The crate is organized bottom-up:
//!
//! - [`linalg`]: dense complex matrices, Hermitian eigendecomposition, Löwner order.
//! - [`states`]: density operators, pure states, Bloch parametrization, partial trace.
//! - [`granules`]: effects, POVMs, PVMs, projector lattice operations.
//! - [`islands`]: classical representation of commuting effect families.
//! - [`measurement`]: Born statistics, Lüders updates, shot sampling.
//! - [`channels`]: Kraus channels, Heisenberg adjoint, Choi matrices.
//! - [`helstrom`]: optimal binary decision granules.
//! - [`encoding`]: classical granulation and classical-to-quantum encodings.
//! - [`vel`]: variational effect learning.
//! - [`pipeline`]: the four-stage granular decision pipeline.
//! - [`case_studies`]: sweeps and reports driven by the `qgc` binary.

#![forbid(unsafe_code)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod case_studies;
pub mod channels;
pub mod encoding;
pub mod error;
pub mod granules;
pub mod helstrom;
pub mod io;
pub mod islands;
pub mod linalg;
pub mod measurement;
pub mod pipeline;
pub mod random;
pub mod states;
pub mod vel;

pub use error::{Error, Result};
pub use linalg::{CMat, ComplexMatrix, HermitianOperator, Tolerances, C64};
