//! Three small processes that separate classicality, incoherence and
//! Markovianity from one another.
//!
//! 1. A closed qubit driven by quarter turns about `y`, prepared maximally
//!    mixed: incoherent for that preparation, yet not classical.
//! 2. A Markov qubit whose first step erases the state: Markov and
//!    incoherent for every preparation, not invertible, not classical.
//! 3. Two qubits with a swap, measured on the first qubit only: Markov,
//!    invertible and classical for every preparation, not incoherent.

use crate::channel::{unitary_channel, Intervention, Observable, Superoperator};
use crate::check::PreparationSet;
use crate::error::{Error, Result};
use crate::linalg::{c, identity, rotation, ComplexMatrix, DensityMatrix};
use crate::process::{DilatedProcess, MarkovProcess, Process, TimeGrid};
use crate::scalar::Real;

/// Verdicts each counterexample is built to produce. `None` where a check
/// does not apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpectedVerdicts {
    /// Given as a Markov family of maps.
    pub markov: bool,
    pub classical: bool,
    pub incoherent: bool,
    pub invertible: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub id: usize,
    pub name: &'static str,
    pub process: Process,
    pub observable: Observable,
    pub preparations: PreparationSet,
    pub expected: ExpectedVerdicts,
}

/// Two-qubit swap `|ab⟩ ↦ |ba⟩`.
pub fn swap_gate<T: Real>() -> ComplexMatrix<T> {
    let mut m = ComplexMatrix::zeros(4, 4);
    for a in 0..2 {
        for b in 0..2 {
            m[(b * 2 + a, a * 2 + b)] = c(1., 0.);
        }
    }
    m
}

fn quarter_turn() -> ComplexMatrix {
    rotation([0., 1., 0.], std::f64::consts::FRAC_PI_2)
}

fn up() -> DensityMatrix {
    DensityMatrix::from_bloch(0., 0., 1.).expect("pure state")
}

/// Builds counterexample `1`, `2` or `3`.
pub fn build_counterexample(id: usize) -> Result<Counterexample> {
    match id {
        1 => {
            let grid = TimeGrid::new(vec![0., 1., 2., 3.])?;
            let process = DilatedProcess::new(2, 1, up(), vec![quarter_turn(); 3], grid)?;
            let mixer = Superoperator::replacement(2, DensityMatrix::maximally_mixed(2).matrix())?;
            Ok(Counterexample {
                id,
                name: "closed qubit, maximally mixed preparation",
                process: process.into(),
                observable: Observable::sigma_z(),
                preparations: PreparationSet::Single(Intervention::Map(mixer)),
                expected: ExpectedVerdicts {
                    markov: false,
                    classical: false,
                    incoherent: true,
                    invertible: None,
                },
            })
        }
        2 => {
            let grid = TimeGrid::new(vec![0., 1., 2., 3.])?;
            let erase = Superoperator::replacement(2, DensityMatrix::maximally_mixed(2).matrix())?;
            let turn = unitary_channel(&quarter_turn())?;
            let process = MarkovProcess::new(up(), vec![erase, turn.clone(), turn], grid)?;
            Ok(Counterexample {
                id,
                name: "erasing Markov qubit",
                process: process.into(),
                observable: Observable::sigma_z(),
                preparations: PreparationSet::spanning(2),
                expected: ExpectedVerdicts {
                    markov: true,
                    classical: false,
                    incoherent: true,
                    invertible: Some(false),
                },
            })
        }
        3 => {
            let grid = TimeGrid::new(vec![0., 1., 2.])?;
            let maps = vec![Superoperator::identity(4), unitary_channel(&swap_gate())?];
            let process = MarkovProcess::new(plus_zero(), maps, grid)?;
            Ok(Counterexample {
                id,
                name: "swap with a degenerate local observable",
                process: process.into(),
                observable: Observable::sigma_z().local(2),
                preparations: PreparationSet::spanning(4),
                expected: ExpectedVerdicts {
                    markov: true,
                    classical: true,
                    incoherent: false,
                    invertible: Some(true),
                },
            })
        }
        _ => Err(Error::Index { index: id, len: 3 }),
    }
}

/// `|+⟩ ⊗ |0⟩`, the preparation exposing the coherence in counterexample 3.
pub fn plus_zero() -> DensityMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let psi = nalgebra::DVector::from_vec(vec![c(s, 0.), c(0., 0.), c(s, 0.), c(0., 0.)]);
    DensityMatrix::pure(&psi).expect("normalized")
}

/// Swap as a unitary on the two qubits, for callers that want the closed
/// form of counterexample 3.
pub fn counterexample_3_dilation() -> Result<DilatedProcess> {
    DilatedProcess::new(
        4,
        1,
        plus_zero(),
        vec![identity(4), swap_gate()],
        TimeGrid::new(vec![0., 1., 2.])?,
    )
}
