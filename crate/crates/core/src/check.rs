//! Decision procedures: Kolmogorov consistency, ℓ-incoherence, NCGD, the
//! population-closure identity `Σ_r 𝒫_{r'} Λ 𝒫_r = 𝒫_{r'} Λ`, invertibility,
//! and a pipeline that cross-checks the implications between them.
//!
//! Every check returns a [`Verdict`]. Sequences are enumerated in a fixed
//! order and the first violating one becomes the witness, so verdicts are
//! reproducible even though evaluation fans out over threads.

use nalgebra::DVector;
use num_complex::Complex;
use rayon::prelude::*;

use crate::channel::{
    compose, condition_number, dephasing_channel, projector_superop, Intervention, Observable,
    Superoperator, MAX_CONDITION_NUMBER,
};
use crate::error::{Error, Result};
use crate::linalg::{
    self, max_abs_diff, real, trace_distance, vectorize, ComplexMatrix, SubnormalizedState,
};
use crate::process::{MarkovProcess, Process};
use crate::scalar::Real;

/// Numeric side of a witness.
#[derive(Debug, Clone, PartialEq)]
pub enum WitnessValue<T: Real = f64> {
    Scalar(T),
    Matrix(ComplexMatrix<T>),
}

/// A concrete violation: the offending pattern, what it is compared with,
/// and by how much they differ.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness<T: Real = f64> {
    pub pattern: Vec<String>,
    pub reference: Vec<String>,
    pub lhs: WitnessValue<T>,
    pub rhs: WitnessValue<T>,
    pub distance: T,
    /// Index into the preparation list, when the check ranges over several.
    pub preparation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict<T: Real = f64> {
    pub check: String,
    pub holds: bool,
    pub tolerance: T,
    /// Largest discrepancy seen over everything enumerated.
    pub max_violation: T,
    pub witness: Option<Witness<T>>,
}

impl<T: Real> Verdict<T> {
    fn from_search(
        check: &str,
        tolerance: T,
        max_violation: T,
        witness: Option<Witness<T>>,
    ) -> Self {
        Self {
            check: check.into(),
            holds: witness.is_none(),
            tolerance,
            max_violation,
            witness,
        }
    }

    /// Conjunction; the witness of the first failing verdict wins.
    fn all(check: &str, tolerance: T, verdicts: Vec<Verdict<T>>) -> Self {
        let max_violation = verdicts
            .iter()
            .fold(T::zero(), |a, v| a.max(v.max_violation));
        let witness = verdicts.into_iter().find_map(|v| v.witness);
        Self::from_search(check, tolerance, max_violation, witness)
    }
}

/// Which preparations a check quantifies over.
#[derive(Debug, Clone, PartialEq)]
pub enum PreparationSet<T: Real = f64> {
    Single(Intervention<T>),
    /// Preparations whose outputs span the system's operator space; by
    /// linearity this stands for every preparation.
    BasisSpanning(Vec<Intervention<T>>),
    /// Every state at `t₁` that is invariant under the dephasing of the
    /// checked observable (Markov processes only).
    AllDiagonal,
}

/// `d²` pure states spanning the operator space: `|i⟩`, `(|i⟩+|j⟩)/√2` and
/// `(|i⟩+i|j⟩)/√2` for `i < j`.
pub fn spanning_states<T: Real>(d: usize) -> Vec<ComplexMatrix<T>> {
    let basis: Vec<DVector<Complex<T>>> = (0..d).map(|i| linalg::ket(d, i)).collect();
    span_within(&basis)
}

fn span_within<T: Real>(basis: &[DVector<Complex<T>>]) -> Vec<ComplexMatrix<T>> {
    let h = real(T::lit(std::f64::consts::FRAC_1_SQRT_2));
    let mut out: Vec<ComplexMatrix<T>> = basis.iter().map(linalg::outer).collect();
    for i in 0..basis.len() {
        for j in i + 1..basis.len() {
            out.push(linalg::outer(&((&basis[i] + &basis[j]) * h)));
            let phase = Complex::new(T::zero(), T::one());
            out.push(linalg::outer(&((&basis[i] + &basis[j] * phase) * h)));
        }
    }
    out
}

/// States `ρ` with `Δρ = ρ`, spanning that subspace (block-diagonal in the
/// eigenspaces of `obs`).
pub fn diagonal_spanning_states<T: Real>(obs: &Observable<T>) -> Result<Vec<ComplexMatrix<T>>> {
    let mut out = Vec::new();
    for r in 0..obs.len() {
        out.extend(span_within(&obs.eigenspace(r)?));
    }
    Ok(out)
}

impl<T: Real> PreparationSet<T> {
    /// Replacement channels onto [`spanning_states`].
    pub fn spanning(d: usize) -> Self {
        PreparationSet::BasisSpanning(
            spanning_states::<T>(d)
                .iter()
                .map(|s| Intervention::Map(Superoperator::replacement(d, s).expect("square state")))
                .collect(),
        )
    }

    /// Fails unless a `BasisSpanning` set spans the operator space when
    /// applied to `rho`.
    pub fn check_spanning(&self, rho: &ComplexMatrix<T>) -> Result<()> {
        let PreparationSet::BasisSpanning(preps) = self else {
            return Ok(());
        };
        let d = rho.nrows();
        let mut cols = ComplexMatrix::zeros(d * d, preps.len());
        for (i, p) in preps.iter().enumerate() {
            cols.set_column(i, &vectorize(&p.apply(&[], rho, 1)?));
        }
        let rank = linalg::numerical_rank(&cols, T::lit(1e-9));
        if rank < d * d {
            return Err(Error::InvalidParameters(format!(
                "preparations span rank {rank}, need {}",
                d * d
            )));
        }
        Ok(())
    }

    /// Pairs of (process, preparation) the check actually runs on.
    fn resolve(
        &self,
        process: &Process<T>,
        obs: &Observable<T>,
    ) -> Result<Vec<(Process<T>, Intervention<T>)>> {
        match self {
            PreparationSet::Single(p) => Ok(vec![(process.clone(), p.clone())]),
            PreparationSet::BasisSpanning(ps) => {
                Ok(ps.iter().map(|p| (process.clone(), p.clone())).collect())
            }
            PreparationSet::AllDiagonal => {
                let mk = process.as_markov().ok_or_else(|| {
                    Error::Unsupported("diagonal preparations need a Markov process".into())
                })?;
                diagonal_spanning_states(obs)?
                    .iter()
                    .map(|s| {
                        Ok((
                            Process::Markov(mk.with_state_at_first_time(s)?),
                            Intervention::Identity,
                        ))
                    })
                    .collect()
            }
        }
    }
}

/// Probabilities of every sequence that, at each of `times`, either does
/// nothing or post-selects an outcome of `obs`. Index digits (base
/// `outcomes + 1`, first time most significant) are `0` for the identity and
/// `r + 1` for outcome `r`. Prefixes are shared, so the cost is one step per
/// tree node.
fn probability_table<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    prep: &Intervention<T>,
    times: &[usize],
) -> Result<Vec<T>> {
    struct Walk<'a, T: Real> {
        process: &'a Process<T>,
        observables: &'a [Observable<T>],
        times: &'a [usize],
        base: usize,
        table: Vec<T>,
    }
    impl<T: Real> Walk<'_, T> {
        fn visit(
            &mut self,
            idx: usize,
            clock: usize,
            state: &ComplexMatrix<T>,
            code: usize,
        ) -> Result<()> {
            if idx == self.times.len() {
                self.table[code] = linalg::trace(state).re;
                return Ok(());
            }
            let mut s = state.clone();
            for k in clock + 1..self.times[idx] {
                s = self
                    .process
                    .step(k, &s, self.observables, &Intervention::Identity)?;
            }
            for digit in 0..self.base {
                let iv = match digit {
                    0 => Intervention::Identity,
                    r => Intervention::Outcome {
                        observable: 0,
                        outcome: r - 1,
                    },
                };
                let next = self
                    .process
                    .step(self.times[idx], &s, self.observables, &iv)?;
                self.visit(idx + 1, self.times[idx], &next, code * self.base + digit)?;
            }
            Ok(())
        }
    }
    let observables = std::slice::from_ref(obs);
    let base = obs.len() + 1;
    let start = process.prepared(observables, prep)?;
    let mut walk = Walk {
        process,
        observables,
        times,
        base,
        table: vec![T::zero(); base.pow(times.len() as u32)],
    };
    walk.visit(0, 0, &start, 0)?;
    Ok(walk.table)
}

/// Kolmogorov consistency of projective statistics at `times` (1-based).
///
/// For every subset of `times` and every member `t_k` of it, compares
/// `Σ_{r_k} p(…, r_k, …)` with the probability obtained without measuring at
/// `t_k`, for every outcome assignment at the remaining times. Subsets are
/// visited in bitmask order, then `t_k` ascending, then outcomes
/// lexicographically; the first violation is the witness.
pub fn check_classicality<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    prep: &Intervention<T>,
    times: &[usize],
    tol: T,
) -> Result<Verdict<T>> {
    let n = process.steps();
    if times.len() > n
        || times.iter().any(|&k| k == 0 || k > n)
        || times.windows(2).any(|w| w[1] <= w[0])
    {
        return Err(Error::Sequence(format!(
            "times must be strictly increasing within 1..={n}"
        )));
    }
    let table = probability_table(process, obs, prep, times)?;
    let outcomes = obs.len();
    let base = outcomes + 1;
    let m = times.len();
    let code = |digits: &[usize]| digits.iter().fold(0, |acc, &d| acc * base + d);
    let pattern = |digits: &[usize], at_k: Option<usize>| {
        let mut steps = vec!["I".to_string(); n];
        for (i, &d) in digits.iter().enumerate() {
            if d > 0 {
                steps[times[i] - 1] = format!("P{}", d - 1);
            }
        }
        if let Some(i) = at_k {
            steps[times[i] - 1] = "D".into();
        }
        steps
    };
    let mut worst = T::zero();
    let mut witness = None;
    for mask in 1u32..(1 << m) {
        let members: Vec<usize> = (0..m).filter(|b| mask & (1 << b) != 0).collect();
        for &pos in &members {
            let others: Vec<usize> = members.iter().copied().filter(|&i| i != pos).collect();
            for assignment in 0..outcomes.pow(others.len() as u32) {
                let mut digits = vec![0; m];
                let mut a = assignment;
                for &i in others.iter().rev() {
                    digits[i] = a % outcomes + 1;
                    a /= outcomes;
                }
                let rhs = table[code(&digits)];
                let mut lhs = T::zero();
                for r in 0..outcomes {
                    digits[pos] = r + 1;
                    lhs += table[code(&digits)];
                }
                digits[pos] = 0;
                let gap = (lhs - rhs).abs();
                worst = worst.max(gap);
                if gap > tol && witness.is_none() {
                    witness = Some(Witness {
                        pattern: pattern(&digits, Some(pos)),
                        reference: pattern(&digits, None),
                        lhs: WitnessValue::Scalar(lhs),
                        rhs: WitnessValue::Scalar(rhs),
                        distance: gap,
                        preparation: None,
                    });
                }
            }
        }
    }
    Ok(Verdict::from_search("classical", tol, worst, witness))
}

/// [`check_classicality`] on all times for every preparation in the set.
pub fn check_classicality_set<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    preps: &PreparationSet<T>,
    tol: T,
) -> Result<Verdict<T>> {
    let times: Vec<usize> = (1..=process.steps()).collect();
    let verdicts = preps
        .resolve(process, obs)?
        .par_iter()
        .enumerate()
        .map(|(i, (p, prep))| {
            let mut v = check_classicality(p, obs, prep, &times, tol)?;
            if let Some(w) = v.witness.as_mut() {
                w.preparation = Some(i);
            }
            Ok(v)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict::all("classical", tol, verdicts))
}

/// Outputs at `t_ℓ` of every pattern of `Δ`/identity at `t₁…t_{ℓ-1}`
/// followed by `Δ` at `t_ℓ`, for `ℓ = 1..=max_ell`. Entry `[ℓ-1][code]`;
/// bit `ℓ-1-k` of `code` set means `Δ` at `t_k`.
fn dephasing_outputs<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    prep: &Intervention<T>,
    max_ell: usize,
) -> Result<Vec<Vec<SubnormalizedState<T>>>> {
    fn visit<T: Real>(
        process: &Process<T>,
        observables: &[Observable<T>],
        reached: usize,
        state: &ComplexMatrix<T>,
        max_ell: usize,
        out: &mut Vec<Vec<SubnormalizedState<T>>>,
    ) -> Result<()> {
        let ell = reached + 1;
        let dephased = process.step(
            ell,
            state,
            observables,
            &Intervention::Dephase { observable: 0 },
        )?;
        out[ell - 1].push(process.reduce(&dephased)?);
        if ell < max_ell {
            let idle = process.step(ell, state, observables, &Intervention::Identity)?;
            visit(process, observables, ell, &idle, max_ell, out)?;
            visit(process, observables, ell, &dephased, max_ell, out)?;
        }
        Ok(())
    }
    let observables = std::slice::from_ref(obs);
    let start = process.prepared(observables, prep)?;
    let mut out = vec![Vec::new(); max_ell];
    visit(process, observables, 0, &start, max_ell, &mut out)?;
    Ok(out)
}

fn incoherence_pattern(ell: usize, code: usize) -> Vec<String> {
    let mut p: Vec<String> = (0..ell - 1)
        .map(|k| {
            if code >> (ell - 2 - k) & 1 == 1 {
                "D".into()
            } else {
                "I".into()
            }
        })
        .collect();
    p.push("D".into());
    p
}

fn incoherence_over<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    preps: &PreparationSet<T>,
    ells: std::ops::RangeInclusive<usize>,
    tol: T,
) -> Result<Verdict<T>> {
    let n = process.steps();
    if *ells.start() == 0 || *ells.end() > n {
        return Err(Error::Sequence(format!("ℓ outside 1..={n}")));
    }
    let verdicts = preps
        .resolve(process, obs)?
        .par_iter()
        .enumerate()
        .map(|(i, (p, prep))| {
            let outputs = dephasing_outputs(p, obs, prep, *ells.end())?;
            let mut worst = T::zero();
            let mut witness = None;
            for ell in ells.clone() {
                let states = &outputs[ell - 1];
                for a in 0..states.len() {
                    for b in a + 1..states.len() {
                        let dist = trace_distance(&states[a], &states[b])?;
                        worst = worst.max(dist);
                        if dist > tol && witness.is_none() {
                            witness = Some(Witness {
                                pattern: incoherence_pattern(ell, b),
                                reference: incoherence_pattern(ell, a),
                                lhs: WitnessValue::Matrix(states[b].matrix().clone()),
                                rhs: WitnessValue::Matrix(states[a].matrix().clone()),
                                distance: dist,
                                preparation: Some(i),
                            });
                        }
                    }
                }
            }
            Ok(Verdict::from_search("incoherent", tol, worst, witness))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Verdict::all("incoherent", tol, verdicts))
}

/// ℓ-incoherence: all `2^(ℓ-1)` choices of `Δ` or identity at `t₁…t_{ℓ-1}`,
/// followed by `Δ` at `t_ℓ`, give the same state (pairwise trace distance
/// at most `tol`) for every preparation in the set.
pub fn check_ell_incoherence<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    preps: &PreparationSet<T>,
    ell: usize,
    tol: T,
) -> Result<Verdict<T>> {
    incoherence_over(process, obs, preps, ell..=ell, tol)
}

/// Incoherence: ℓ-incoherence for every `ℓ ∈ 1..=n`.
pub fn check_incoherence<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    preps: &PreparationSet<T>,
    tol: T,
) -> Result<Verdict<T>> {
    incoherence_over(process, obs, preps, 1..=process.steps(), tol)
}

/// `Δ Λ_{ℓ,k} Δ Λ_{k,j} Δ = Δ Λ_{ℓ,j} Δ` for all `ℓ ≥ k ≥ j ≥ 1`, compared
/// entrywise on the superoperator matrices.
pub fn check_ncgd<T: Real>(
    markov: &MarkovProcess<T>,
    obs: &Observable<T>,
    tol: T,
) -> Result<Verdict<T>> {
    let n = markov.maps().len();
    let delta = dephasing_channel(obs);
    let sandwich = |m: &Superoperator<T>| -> Result<Superoperator<T>> {
        compose(&delta, &compose(m, &delta)?)
    };
    let mut worst = T::zero();
    let mut witness = None;
    for l in 1..=n {
        for k in 1..=l {
            for j in 1..=k {
                let lhs = compose(
                    &sandwich(&markov.propagator(l, k)?)?,
                    &compose(&markov.propagator(k, j)?, &delta)?,
                )?;
                let rhs = sandwich(&markov.propagator(l, j)?)?;
                let gap = lhs.distance(&rhs)?;
                worst = worst.max(gap);
                if gap > tol && witness.is_none() {
                    witness = Some(Witness {
                        pattern: vec![format!("l={l}"), format!("k={k}"), format!("j={j}")],
                        reference: vec![format!("l={l}"), format!("j={j}")],
                        lhs: WitnessValue::Matrix(lhs.matrix().clone()),
                        rhs: WitnessValue::Matrix(rhs.matrix().clone()),
                        distance: gap,
                        preparation: None,
                    });
                }
            }
        }
    }
    Ok(Verdict::from_search("ncgd", tol, worst, witness))
}

/// `Σ_r 𝒫_{r'} Λ 𝒫_r = 𝒫_{r'} Λ` for every output outcome `r'`.
pub fn check_eq12_identity<T: Real>(
    lambda: &Superoperator<T>,
    obs_in: &Observable<T>,
    obs_out: &Observable<T>,
    tol: T,
) -> Result<Verdict<T>> {
    if lambda.dim_in() != obs_in.dim() || lambda.dim_out() != obs_out.dim() {
        return Err(Error::Dimension("observables do not match the map".into()));
    }
    let mut worst = T::zero();
    let mut witness = None;
    for rp in 0..obs_out.len() {
        let p_out = projector_superop(obs_out, rp)?;
        let rhs = compose(&p_out, lambda)?;
        let mut lhs = ComplexMatrix::zeros(rhs.matrix().nrows(), rhs.matrix().ncols());
        for r in 0..obs_in.len() {
            lhs += compose(&rhs, &projector_superop(obs_in, r)?)?.matrix();
        }
        let gap = max_abs_diff(&lhs, rhs.matrix());
        worst = worst.max(gap);
        if gap > tol && witness.is_none() {
            witness = Some(Witness {
                pattern: vec![format!("sum_r P{rp} L P_r")],
                reference: vec![format!("P{rp} L")],
                lhs: WitnessValue::Matrix(lhs),
                rhs: WitnessValue::Matrix(rhs.matrix().clone()),
                distance: gap,
                preparation: None,
            });
        }
    }
    Ok(Verdict::from_search("eq12", tol, worst, witness))
}

/// The identity above for every step map of a Markov family, with the same
/// observable at every time.
pub fn check_eq12_family<T: Real>(
    markov: &MarkovProcess<T>,
    obs: &Observable<T>,
    tol: T,
) -> Result<Verdict<T>> {
    let mut verdicts = Vec::new();
    for (k, m) in markov.maps().iter().enumerate() {
        let mut v = check_eq12_identity(m, obs, obs, tol)?;
        if let Some(w) = v.witness.as_mut() {
            w.pattern.insert(0, format!("step={}", k + 1));
        }
        verdicts.push(v);
    }
    Ok(Verdict::all("eq12", tol, verdicts))
}

/// Every cumulative map `Λ_{k,0}` has condition number at most
/// [`MAX_CONDITION_NUMBER`]. The verdict's tolerance is that threshold and
/// its violation magnitude the worst condition number found.
pub fn check_invertibility<T: Real>(markov: &MarkovProcess<T>) -> Result<Verdict<T>> {
    let limit = T::lit(MAX_CONDITION_NUMBER);
    let mut worst = T::zero();
    let mut witness = None;
    for k in 1..=markov.maps().len() {
        let cond = condition_number(&markov.propagator(k, 0)?);
        worst = worst.max(cond);
        if !(cond <= limit) && witness.is_none() {
            witness = Some(Witness {
                pattern: vec![format!("L({k},0)")],
                reference: vec![],
                lhs: WitnessValue::Scalar(cond),
                rhs: WitnessValue::Scalar(limit),
                distance: cond,
                preparation: None,
            });
        }
    }
    Ok(Verdict::from_search("invertible", limit, worst, witness))
}

/// One implication checked on a concrete instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Implication {
    pub name: &'static str,
    /// Number of (preparation-level) cases where the premise held.
    pub premises_met: usize,
    pub violated: bool,
}

/// Verdicts of every checker on one instance plus the implications between
/// them. `None` marks checks that do not apply (non-Markov processes).
#[derive(Debug, Clone, PartialEq)]
pub struct PipelineReport {
    pub non_degenerate: bool,
    pub markov: bool,
    pub invertible: Option<bool>,
    pub ncgd: Option<bool>,
    /// Per preparation of the supplied set.
    pub classical: Vec<bool>,
    /// Per preparation of the supplied set.
    pub incoherent: Vec<bool>,
    pub classical_all_preparations: bool,
    pub incoherent_all_preparations: bool,
    pub incoherent_diagonal: Option<bool>,
    pub implications: Vec<Implication>,
}

impl PipelineReport {
    pub fn violations(&self) -> usize {
        self.implications.iter().filter(|i| i.violated).count()
    }
}

/// Runs every checker and tests, on this instance:
///
/// * classical ⇒ incoherent, per preparation, for non-degenerate observables;
/// * Markov ∧ invertible ∧ incoherent for all preparations ⇒ classical for all;
/// * Markov ∧ invertible ∧ incoherent for all preparations ⇒ NCGD;
/// * Markov ∧ NCGD ⇒ incoherent for preparations diagonal at `t₁`.
///
/// "All preparations" uses the standard spanning set regardless of `preps`.
pub fn check_theorem_pipeline<T: Real>(
    process: &Process<T>,
    obs: &Observable<T>,
    preps: &PreparationSet<T>,
    tol: T,
) -> Result<PipelineReport> {
    let non_degenerate = obs.is_non_degenerate();
    let markov_proc = process
        .as_markov()
        .filter(|m| m.origin() == crate::process::MarkovOrigin::Native);
    let markov = markov_proc.is_some();

    let resolved = preps.resolve(process, obs)?;
    let times: Vec<usize> = (1..=process.steps()).collect();
    let mut classical = Vec::with_capacity(resolved.len());
    let mut incoherent = Vec::with_capacity(resolved.len());
    for (p, prep) in &resolved {
        classical.push(check_classicality(p, obs, prep, &times, tol)?.holds);
        let single = PreparationSet::Single(prep.clone());
        incoherent.push(check_incoherence(p, obs, &single, tol)?.holds);
    }

    let spanning = PreparationSet::spanning(process.dim_s());
    let classical_all = check_classicality_set(process, obs, &spanning, tol)?.holds;
    let incoherent_all = check_incoherence(process, obs, &spanning, tol)?.holds;

    let (invertible, ncgd, incoherent_diagonal) = match markov_proc {
        Some(m) => (
            Some(check_invertibility(m)?.holds),
            Some(check_ncgd(m, obs, tol)?.holds),
            Some(check_incoherence(process, obs, &PreparationSet::AllDiagonal, tol)?.holds),
        ),
        None => (None, None, None),
    };

    let mut implications = Vec::new();
    let t31: Vec<bool> = classical.iter().map(|&c| non_degenerate && c).collect();
    implications.push(Implication {
        name: "classical => incoherent (non-degenerate)",
        premises_met: t31.iter().filter(|&&b| b).count(),
        violated: t31.iter().zip(&incoherent).any(|(&pre, &inc)| pre && !inc),
    });
    let strong = markov && invertible == Some(true) && incoherent_all;
    implications.push(Implication {
        name: "markov & invertible & incoherent(all) => classical(all)",
        premises_met: usize::from(strong),
        violated: strong && !classical_all,
    });
    implications.push(Implication {
        name: "markov & invertible & incoherent(all) => ncgd",
        premises_met: usize::from(strong),
        violated: strong && ncgd != Some(true),
    });
    let a2 = markov && ncgd == Some(true);
    implications.push(Implication {
        name: "markov & ncgd => incoherent(diagonal)",
        premises_met: usize::from(a2),
        violated: a2 && incoherent_diagonal != Some(true),
    });

    Ok(PipelineReport {
        non_degenerate,
        markov,
        invertible,
        ncgd,
        classical,
        incoherent,
        classical_all_preparations: classical_all,
        incoherent_all_preparations: incoherent_all,
        incoherent_diagonal,
        implications,
    })
}
