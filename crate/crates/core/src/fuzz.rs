//! Seeded random search for counterexamples to the implications between
//! classicality, incoherence, NCGD and invertibility.
//!
//! Each class draws instances from a family rich enough that the premise
//! holds for a sizeable fraction of them, then counts premises met and
//! conclusions violated. Instance `i` of class `c` uses its own ChaCha8
//! stream, so reports do not depend on thread scheduling.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::channel::{
    compose, dephasing_channel, unitary_channel, Intervention, Observable, Superoperator,
};
use crate::check::{
    check_classicality, check_incoherence, check_invertibility, check_ncgd, PreparationSet,
};
use crate::error::Result;
use crate::linalg::{self, ComplexMatrix, DensityMatrix};
use crate::process::{DilatedProcess, MarkovProcess, Process, TimeGrid};
use crate::random::{
    block_monomial_unitary, haar_unitary, monomial_unitary, random_cptp, random_density_matrix,
    random_stochastic,
};

const STEPS: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FuzzClass {
    /// Random dilations: classical ⇒ incoherent (non-degenerate observable).
    ClassicalImpliesIncoherent,
    /// Markov families that never feed coherences into populations, and are
    /// invertible ⇒ classical for every preparation of a spanning set.
    BlockFormImpliesClassical,
    /// Markov ∧ invertible ∧ incoherent for all preparations ⇒ NCGD.
    IncoherentImpliesNcgd,
    /// Markov ∧ NCGD ⇒ incoherent for preparations diagonal at `t₁`.
    NcgdImpliesDiagonalIncoherent,
}

impl FuzzClass {
    pub const ALL: [FuzzClass; 4] = [
        FuzzClass::ClassicalImpliesIncoherent,
        FuzzClass::BlockFormImpliesClassical,
        FuzzClass::IncoherentImpliesNcgd,
        FuzzClass::NcgdImpliesDiagonalIncoherent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FuzzClass::ClassicalImpliesIncoherent => "classical=>incoherent",
            FuzzClass::BlockFormImpliesClassical => "block-form&invertible=>classical",
            FuzzClass::IncoherentImpliesNcgd => "markov&invertible&incoherent=>ncgd",
            FuzzClass::NcgdImpliesDiagonalIncoherent => "markov&ncgd=>incoherent(diagonal)",
        }
    }

    fn stream(self) -> u64 {
        self as u64
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FuzzReport {
    pub class: FuzzClass,
    pub seed: u64,
    pub instances: usize,
    /// Instances discarded before checking (e.g. not invertible).
    pub skipped: usize,
    pub premises_met: usize,
    pub violations: usize,
    /// Index of the first violating instance.
    pub first_violation: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Skipped,
    Checked { premise: bool, violated: bool },
}

/// Runs `count` instances of `class`.
pub fn run_fuzz(class: FuzzClass, seed: u64, count: usize, tol: f64) -> Result<FuzzReport> {
    let outcomes = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((class.stream() << 48) | i as u64);
            instance(class, &mut rng, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut report = FuzzReport {
        class,
        seed,
        instances: count,
        skipped: 0,
        premises_met: 0,
        violations: 0,
        first_violation: None,
    };
    for (i, o) in outcomes.into_iter().enumerate() {
        match o {
            Outcome::Skipped => report.skipped += 1,
            Outcome::Checked { premise, violated } => {
                report.premises_met += usize::from(premise);
                if violated {
                    report.violations += 1;
                    report.first_violation.get_or_insert(i);
                }
            }
        }
    }
    Ok(report)
}

fn instance(class: FuzzClass, rng: &mut ChaCha8Rng, tol: f64) -> Result<Outcome> {
    match class {
        FuzzClass::ClassicalImpliesIncoherent => {
            let (process, obs, prep) = random_dilation(rng)?;
            let times: Vec<usize> = (1..=STEPS).collect();
            let classical = check_classicality(&process, &obs, &prep, &times, tol)?.holds;
            let incoherent =
                check_incoherence(&process, &obs, &PreparationSet::Single(prep), tol)?.holds;
            Ok(Outcome::Checked {
                premise: classical,
                violated: classical && !incoherent,
            })
        }
        FuzzClass::BlockFormImpliesClassical => {
            let d = pick_dim(rng);
            let (w, obs) = random_basis(d, rng);
            let maps = (0..STEPS)
                .map(|_| block_form_map(d, rng))
                .collect::<Result<Vec<_>>>()?;
            let mk = markov(d, rotate_all(&w, maps)?, rng)?;
            if !check_invertibility(&mk)?.holds {
                return Ok(Outcome::Skipped);
            }
            let process = Process::Markov(mk);
            let classical = crate::check::check_classicality_set(
                &process,
                &obs,
                &PreparationSet::spanning(d),
                tol,
            )?;
            Ok(Outcome::Checked {
                premise: true,
                violated: !classical.holds,
            })
        }
        FuzzClass::IncoherentImpliesNcgd => {
            let d = pick_dim(rng);
            let (w, obs) = random_basis(d, rng);
            let maps = (0..STEPS)
                .map(|k| {
                    if k > 0 && rng.random_bool(0.15) {
                        Ok(random_cptp(d, rng))
                    } else {
                        block_form_map(d, rng)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let mk = markov(d, rotate_all(&w, maps)?, rng)?;
            let invertible = check_invertibility(&mk)?.holds;
            let ncgd = check_ncgd(&mk, &obs, tol)?.holds;
            let process = Process::Markov(mk);
            let premise = invertible
                && check_incoherence(&process, &obs, &PreparationSet::spanning(d), tol)?.holds;
            Ok(Outcome::Checked {
                premise,
                violated: premise && !ncgd,
            })
        }
        FuzzClass::NcgdImpliesDiagonalIncoherent => {
            let d = pick_dim(rng);
            let (w, obs) = random_basis(d, rng);
            let maps = (0..STEPS)
                .map(|_| match rng.random_range(0..10) {
                    0..=1 => Ok(random_cptp(d, rng)),
                    2..=3 => classical_map(&random_stochastic(d, 0.0, rng)),
                    _ => block_form_map(d, rng),
                })
                .collect::<Result<Vec<_>>>()?;
            let mk = markov(d, rotate_all(&w, maps)?, rng)?;
            let ncgd = check_ncgd(&mk, &obs, tol)?.holds;
            let process = Process::Markov(mk);
            let premise = ncgd;
            let violated = premise
                && !check_incoherence(&process, &obs, &PreparationSet::AllDiagonal, tol)?.holds;
            Ok(Outcome::Checked { premise, violated })
        }
    }
}

fn pick_dim(rng: &mut ChaCha8Rng) -> usize {
    if rng.random_bool(0.25) {
        3
    } else {
        2
    }
}

/// Haar basis `W` (or the computational one) and the non-degenerate
/// observable diagonal in it.
fn random_basis(d: usize, rng: &mut ChaCha8Rng) -> (ComplexMatrix, Observable) {
    let w = if rng.random_bool(0.5) {
        linalg::identity(d)
    } else {
        haar_unitary(d, rng)
    };
    let eigenvalues: Vec<f64> = (0..d).map(|i| i as f64).collect();
    let obs = Observable::from_basis(&eigenvalues, &w).expect("unitary basis");
    (w, obs)
}

fn rotate_all(w: &ComplexMatrix, maps: Vec<Superoperator>) -> Result<Vec<Superoperator>> {
    let to = unitary_channel(w)?;
    let from = unitary_channel(&w.adjoint())?;
    maps.iter()
        .map(|m| compose(&to, &compose(m, &from)?))
        .collect()
}

fn markov(d: usize, maps: Vec<Superoperator>, rng: &mut ChaCha8Rng) -> Result<MarkovProcess> {
    let initial = random_density_matrix(d, rng);
    MarkovProcess::new(initial, maps, TimeGrid::uniform(STEPS, 1.0)?)
}

fn random_dilation(rng: &mut ChaCha8Rng) -> Result<(Process, Observable, Intervention)> {
    let (ds, de) = (2, 2);
    let (w, obs) = random_basis(ds, rng);
    let w_joint = linalg::tensor_product(&w, &linalg::identity(de));
    let unitaries = (0..STEPS)
        .map(|_| {
            let u = if rng.random_bool(0.3) {
                haar_unitary(ds * de, rng)
            } else {
                block_monomial_unitary(ds, de, rng)
            };
            &w_joint * u * w_joint.adjoint()
        })
        .collect();
    let initial = if rng.random_bool(0.5) {
        random_density_matrix(ds * de, rng)
    } else {
        let a: DensityMatrix = random_density_matrix(ds, rng);
        let b: DensityMatrix = random_density_matrix(de, rng);
        DensityMatrix::new(linalg::tensor_product(a.matrix(), b.matrix()))?
    };
    let prep = if rng.random_bool(0.5) {
        Intervention::Identity
    } else {
        Intervention::Map(random_cptp(ds, rng))
    };
    let process = DilatedProcess::new(ds, de, initial, unitaries, TimeGrid::uniform(STEPS, 1.0)?)?;
    Ok((process.into(), obs, prep))
}

/// `ρ ↦ Σ_ij A_ij ⟨j|ρ|j⟩ |i⟩⟨i|` for a column-stochastic `A`.
pub fn classical_map(a: &DMatrix<f64>) -> Result<Superoperator> {
    let d = a.nrows();
    let mut m = ComplexMatrix::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            m[(i * (d + 1), j * (d + 1))] = linalg::c(a[(i, j)], 0.);
        }
    }
    Superoperator::new(d, d, m, true, true)
}

/// A CPTP map in the computational basis whose output populations depend on
/// input populations only (`B = 0` in the population-first block form).
pub fn block_form_map(d: usize, rng: &mut ChaCha8Rng) -> Result<Superoperator> {
    match rng.random_range(0..5) {
        0 => classical_plus_coherent(d, rng),
        1 => unitary_channel(&monomial_unitary(d, rng)),
        2 => amplitude_damping(d, rng.random_range(0.05..0.9)),
        3 => {
            let lambda = rng.random_range(0.0..0.9);
            Ok(Superoperator::identity(d)
                .scale(1.0 - lambda)
                .add(&dephasing_channel(&Observable::computational(d)).scale(lambda))?)
        }
        _ => compose(
            &classical_plus_coherent(d, rng)?,
            &unitary_channel(&monomial_unitary(d, rng))?,
        ),
    }
}

/// Classical stochastic map plus a small perturbation that only writes
/// coherences; the perturbation is halved until the Choi matrix is PSD.
pub fn classical_plus_coherent(d: usize, rng: &mut ChaCha8Rng) -> Result<Superoperator> {
    let base = classical_map(&random_stochastic(d, 0.05, rng))?;
    let mut k = random_cptp(d, rng)
        .add(&random_cptp(d, rng).scale(-1.0))?
        .matrix()
        .clone();
    for i in 0..d {
        k.row_mut(i * (d + 1)).fill(linalg::c(0., 0.));
    }
    let k = Superoperator::new(d, d, k, false, false)?;
    let mut eps = 1.0;
    for _ in 0..40 {
        let candidate = base.add(&k.scale(eps))?;
        if candidate.choi_min_eigenvalue() >= 0.0 {
            return Superoperator::new(d, d, candidate.matrix().clone(), true, true);
        }
        eps /= 2.0;
    }
    Ok(base)
}

/// Decay of every level into `|0⟩` with probability `p`.
pub fn amplitude_damping(d: usize, p: f64) -> Result<Superoperator> {
    let mut k0 = ComplexMatrix::zeros(d, d);
    k0[(0, 0)] = linalg::c(1., 0.);
    let mut kraus = Vec::with_capacity(d);
    for i in 1..d {
        k0[(i, i)] = linalg::c((1.0 - p).sqrt(), 0.);
        let mut k = ComplexMatrix::zeros(d, d);
        k[(0, i)] = linalg::c(p.sqrt(), 0.);
        kraus.push(k);
    }
    kraus.insert(0, k0);
    Superoperator::from_kraus(&kraus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ordered_basis_matrix;
    use crate::check::check_eq12_identity;

    #[test]
    fn block_form_maps_have_zero_b_block() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            for d in [2, 3] {
                let m = block_form_map(d, &mut rng).unwrap();
                assert!(m.is_cp(1e-9) && m.is_tp(1e-10));
                let z = Observable::computational(d);
                assert!(check_eq12_identity(&m, &z, &z, 1e-10).unwrap().holds);
                let blocks = ordered_basis_matrix(&m, &z, &z).unwrap();
                assert!(linalg::max_abs(&blocks.b) < 1e-12);
                assert!(blocks.stochastic_defect() < 1e-12);
            }
        }
    }

    #[test]
    fn reports_are_deterministic() {
        for class in FuzzClass::ALL {
            let a = run_fuzz(class, 9, 40, 1e-9).unwrap();
            let b = run_fuzz(class, 9, 40, 1e-9).unwrap();
            assert_eq!(a, b);
            assert_eq!(a.violations, 0, "{}", class.name());
        }
    }

    #[test]
    fn classes_are_not_vacuous() {
        for class in FuzzClass::ALL {
            let r = run_fuzz(class, 1, 200, 1e-9).unwrap();
            assert!(r.premises_met >= 40, "{}: {r:?}", class.name());
            assert!(r.premises_met < r.instances || class == FuzzClass::BlockFormImpliesClassical);
        }
    }
}
