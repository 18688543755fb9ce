//! Quantum discord and entanglement dynamics of two non-interacting two-level
//! atoms, each coupled dispersively to its own leaky cavity that starts in a
//! coherent state.
//!
//! * [`matrix`]: dense complex linear algebra and von Neumann entropy.
//! * [`model`]: decoherence factor, Werner initial states, two-atom state.
//! * [`measures`]: mutual information, classical correlation, discord
//!   (closed form and numerical minimization), concurrence.
//! * [`lindblad`]: master-equation integration used to check the analytic
//!   decoherence factor.
//! * [`scan`]: time series, sudden-death intervals, decay-rate sweeps.
//! * [`output`]: CSV emission.
//!
//! The closed-form Bell-diagonal discord is `D = I − J` with
//! `I = ¼ Σ u log2 u` and `J = (1−d)/2 log2(1−d) + (1+d)/2 log2(1+d)`,
//! `d = max |d_i|`. It vanishes on the maximally mixed state and agrees
//! with the numerical minimizer over projective measurements.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod exec;
pub mod lindblad;
pub mod matrix;
pub mod measures;
pub mod model;
pub mod output;
pub mod scan;

pub use error::{Error, Result};
pub use exec::Execution;
pub use matrix::{ComplexMatrix, DensityMatrix};
pub use model::{CorrelationVector, Family, PhysicalParams, SingleAtomInit, WernerSpec};
pub use num_complex::Complex64;
