//! Simulation and analysis of multi-time quantum processes probed by
//! projective measurements.
//!
//! A process (a unitary dilation or a Markov family of maps) is evaluated on
//! sequences of interventions. The [`check`] module decides whether the
//! resulting statistics are classical (Kolmogorov consistent), whether the
//! process is ℓ-incoherent, NCGD, or invertible, and cross-checks the
//! implications between these properties.
//!
//! Linear algebra, channels, processes and checkers are generic over
//! [`Real`] (`f32` or `f64`), with single-precision aliases at the crate
//! root. The models, JSON I/O and fuzzing work in `f64`.

// `!(x <= y)` is used deliberately so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod check;
pub mod error;
pub mod fuzz;
pub mod io;
pub mod linalg;
pub mod models;
pub mod process;
pub mod random;
pub mod scalar;

pub use channel::{Intervention, Observable, Superoperator};
pub use check::{PreparationSet, Verdict, Witness};
pub use error::{Error, Result};
pub use linalg::{ComplexMatrix, DensityMatrix, SubnormalizedState};
pub use process::{DilatedProcess, MarkovProcess, Process, TimeGrid};
pub use scalar::Real;

pub type Matrix64 = linalg::ComplexMatrix<f64>;
pub type Matrix32 = linalg::ComplexMatrix<f32>;
pub type Superoperator32 = channel::Superoperator<f32>;
pub type Observable32 = channel::Observable<f32>;
pub type DensityMatrix32 = linalg::DensityMatrix<f32>;
pub type Process32 = process::Process<f32>;
