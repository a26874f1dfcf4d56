//! Multi-time processes and their process-tensor evaluators.
//!
//! A process is represented by what it does to intervention sequences, not
//! by an explicit comb: [`Process::evaluate`] maps a preparation plus one
//! intervention per grid time to the subnormalized system state at the last
//! time. Two backends exist: a unitary system–environment dilation, and a
//! family of CPTP maps interleaved with the interventions (the operationally
//! CP-divisible, i.e. Markovian, case).

use crate::channel::{
    compose, dephasing_channel, invert, projector_superop, Intervention, Observable, Superoperator,
};
use crate::error::{Error, Result};
use crate::linalg::{
    self, identity, max_abs_diff, partial_trace, tensor_product, ComplexMatrix, DensityMatrix,
    SubnormalizedState, Subsystem, MAX_JOINT_DIM,
};
use crate::scalar::Real;

/// Maximum number of measurement times; the checkers enumerate exponentially
/// many sequences in it.
pub const MAX_STEPS: usize = 8;

/// Strictly increasing times `t₀ < t₁ < … < t_n`; `t₀` is the preparation.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid<T: Real = f64> {
    times: Vec<T>,
}

impl<T: Real> TimeGrid<T> {
    pub fn new(times: Vec<T>) -> Result<Self> {
        if times.len() < 2 {
            return Err(Error::Sequence(
                "a time grid needs t0 and at least one measurement time".into(),
            ));
        }
        if times.len() - 1 > MAX_STEPS {
            return Err(Error::Sequence(format!(
                "{} measurement times exceed the cap of {MAX_STEPS}",
                times.len() - 1
            )));
        }
        if times.iter().any(|t| !t.is_finite()) || times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Sequence(
                "times must be finite and strictly increasing".into(),
            ));
        }
        Ok(Self { times })
    }

    /// `t_k = k·dt` for `k = 0..=n`.
    pub fn uniform(n: usize, dt: T) -> Result<Self> {
        Self::new((0..=n).map(|k| T::from_usize(k).unwrap() * dt).collect())
    }

    /// Number of measurement times `n`.
    pub fn steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn times(&self) -> &[T] {
        &self.times
    }

    pub fn time(&self, k: usize) -> T {
        self.times[k]
    }
}

/// Closed system–environment evolution with interventions on the system.
#[derive(Debug, Clone, PartialEq)]
pub struct DilatedProcess<T: Real = f64> {
    dim_s: usize,
    dim_e: usize,
    initial: DensityMatrix<T>,
    unitaries: Vec<ComplexMatrix<T>>,
    grid: TimeGrid<T>,
}

impl<T: Real> DilatedProcess<T> {
    /// `unitaries[k-1]` propagates `S ⊗ E` from `t_{k-1}` to `t_k`.
    pub fn new(
        dim_s: usize,
        dim_e: usize,
        initial: DensityMatrix<T>,
        unitaries: Vec<ComplexMatrix<T>>,
        grid: TimeGrid<T>,
    ) -> Result<Self> {
        let n = dim_s * dim_e;
        if dim_s == 0 || dim_e == 0 || n > MAX_JOINT_DIM {
            return Err(Error::Dimension(format!(
                "joint dimension {dim_s}x{dim_e} outside 1..={MAX_JOINT_DIM}"
            )));
        }
        if initial.dim() != n {
            return Err(Error::Dimension(format!(
                "initial state is {0}x{0}, expected {n}x{n}",
                initial.dim()
            )));
        }
        if unitaries.len() != grid.steps() {
            return Err(Error::Sequence(format!(
                "{} unitaries for {} time steps",
                unitaries.len(),
                grid.steps()
            )));
        }
        for (k, u) in unitaries.iter().enumerate() {
            if u.shape() != (n, n) {
                return Err(Error::Dimension(format!("unitary {k} is not {n}x{n}")));
            }
            let defect = linalg::unitarity_defect(u);
            if defect > T::validation_tolerance() {
                return Err(Error::NotUnitary {
                    deviation: defect.as_f64(),
                });
            }
        }
        Ok(Self {
            dim_s,
            dim_e,
            initial,
            unitaries,
            grid,
        })
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn dim_e(&self) -> usize {
        self.dim_e
    }

    pub fn initial(&self) -> &DensityMatrix<T> {
        &self.initial
    }

    pub fn unitaries(&self) -> &[ComplexMatrix<T>] {
        &self.unitaries
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    /// Reduced system state and environment marginal of the initial state.
    pub fn marginals(&self) -> (ComplexMatrix<T>, ComplexMatrix<T>) {
        let dims = (self.dim_s, self.dim_e);
        let rs = partial_trace(self.initial.matrix(), dims, Subsystem::A).expect("dims checked");
        let re = partial_trace(self.initial.matrix(), dims, Subsystem::B).expect("dims checked");
        (rs, re)
    }

    /// `max |ρ_SE - ρ_S ⊗ ρ_E|`.
    pub fn correlation_defect(&self) -> T {
        let (rs, re) = self.marginals();
        max_abs_diff(self.initial.matrix(), &tensor_product(&rs, &re))
    }
}

/// Where a Markov family came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarkovOrigin {
    /// Given as the process itself: interventions compose with the maps.
    Native,
    /// Reconstructed from the reduced dynamics of a dilation. Reproduces the
    /// unmeasured evolution, but not necessarily the evolution after an
    /// intervention.
    Derived,
}

/// Family `Λ_{k,k-1}` of maps between consecutive grid times.
#[derive(Debug, Clone, PartialEq)]
pub struct MarkovProcess<T: Real = f64> {
    dim_s: usize,
    initial: DensityMatrix<T>,
    maps: Vec<Superoperator<T>>,
    grid: TimeGrid<T>,
    origin: MarkovOrigin,
}

impl<T: Real> MarkovProcess<T> {
    /// Native Markov process; every map must be CPTP.
    pub fn new(
        initial: DensityMatrix<T>,
        maps: Vec<Superoperator<T>>,
        grid: TimeGrid<T>,
    ) -> Result<Self> {
        let p = Self::unchecked(initial, maps, grid, MarkovOrigin::Native)?;
        let tol = T::verdict_tolerance();
        for (k, m) in p.maps.iter().enumerate() {
            if !m.is_tp(tol) {
                return Err(Error::InvalidChannel(format!(
                    "map {} is not trace preserving",
                    k + 1
                )));
            }
            if !m.is_cp(tol) {
                return Err(Error::InvalidChannel(format!(
                    "map {} is not completely positive",
                    k + 1
                )));
            }
        }
        Ok(p)
    }

    fn unchecked(
        initial: DensityMatrix<T>,
        maps: Vec<Superoperator<T>>,
        grid: TimeGrid<T>,
        origin: MarkovOrigin,
    ) -> Result<Self> {
        let d = initial.dim();
        if maps.len() != grid.steps() {
            return Err(Error::Sequence(format!(
                "{} maps for {} time steps",
                maps.len(),
                grid.steps()
            )));
        }
        for (k, m) in maps.iter().enumerate() {
            if m.dim_in() != d || m.dim_out() != d {
                return Err(Error::Dimension(format!(
                    "map {} does not act on dimension {d}",
                    k + 1
                )));
            }
        }
        Ok(Self {
            dim_s: d,
            initial,
            maps,
            grid,
            origin,
        })
    }

    pub fn dim_s(&self) -> usize {
        self.dim_s
    }

    pub fn initial(&self) -> &DensityMatrix<T> {
        &self.initial
    }

    pub fn maps(&self) -> &[Superoperator<T>] {
        &self.maps
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        &self.grid
    }

    pub fn origin(&self) -> MarkovOrigin {
        self.origin
    }

    /// `Λ_{ℓ,k}` as the chained product of the step maps; identity for `ℓ = k`.
    pub fn propagator(&self, l: usize, k: usize) -> Result<Superoperator<T>> {
        if k > l || l > self.maps.len() {
            return Err(Error::Index {
                index: l,
                len: self.maps.len(),
            });
        }
        let mut acc = Superoperator::identity(self.dim_s);
        for m in &self.maps[k..l] {
            acc = compose(m, &acc)?;
        }
        Ok(acc)
    }

    /// Same dynamics with the state at `t₁` replaced by `state` (the first
    /// map becomes the replacement channel onto it).
    pub fn with_state_at_first_time(&self, state: &ComplexMatrix<T>) -> Result<Self> {
        let mut maps = self.maps.clone();
        maps[0] = Superoperator::replacement(self.dim_s, state)?;
        Ok(Self {
            maps,
            ..self.clone()
        })
    }
}

/// Either backend of a process tensor.
#[derive(Debug, Clone, PartialEq)]
pub enum Process<T: Real = f64> {
    Dilated(DilatedProcess<T>),
    Markov(MarkovProcess<T>),
}

impl<T: Real> From<DilatedProcess<T>> for Process<T> {
    fn from(p: DilatedProcess<T>) -> Self {
        Process::Dilated(p)
    }
}

impl<T: Real> From<MarkovProcess<T>> for Process<T> {
    fn from(p: MarkovProcess<T>) -> Self {
        Process::Markov(p)
    }
}

/// Preparation `𝒜₀` followed by one intervention per measurement time.
#[derive(Debug, Clone, PartialEq)]
pub struct InterventionSequence<T: Real = f64> {
    pub preparation: Intervention<T>,
    pub steps: Vec<Intervention<T>>,
}

impl<T: Real> InterventionSequence<T> {
    pub fn new(preparation: Intervention<T>, steps: Vec<Intervention<T>>) -> Self {
        Self { preparation, steps }
    }

    /// `n` identities after `preparation`.
    pub fn idle(preparation: Intervention<T>, n: usize) -> Self {
        Self {
            preparation,
            steps: vec![Intervention::Identity; n],
        }
    }

    pub fn labels(&self) -> Vec<String> {
        self.steps.iter().map(Intervention::label).collect()
    }
}

impl<T: Real> Process<T> {
    pub fn dim_s(&self) -> usize {
        match self {
            Process::Dilated(p) => p.dim_s,
            Process::Markov(p) => p.dim_s,
        }
    }

    pub fn steps(&self) -> usize {
        self.grid().steps()
    }

    pub fn grid(&self) -> &TimeGrid<T> {
        match self {
            Process::Dilated(p) => &p.grid,
            Process::Markov(p) => &p.grid,
        }
    }

    pub fn as_markov(&self) -> Option<&MarkovProcess<T>> {
        match self {
            Process::Markov(m) => Some(m),
            Process::Dilated(_) => None,
        }
    }

    /// Output state at `t_n` for a full-length sequence.
    pub fn evaluate(
        &self,
        observables: &[Observable<T>],
        seq: &InterventionSequence<T>,
    ) -> Result<SubnormalizedState<T>> {
        if seq.steps.len() != self.steps() {
            return Err(Error::Sequence(format!(
                "sequence has {} steps, process has {}",
                seq.steps.len(),
                self.steps()
            )));
        }
        self.evaluate_prefix(observables, seq)
    }

    /// Output state at `t_ℓ`, `ℓ = seq.steps.len() ≤ n`.
    pub fn evaluate_prefix(
        &self,
        observables: &[Observable<T>],
        seq: &InterventionSequence<T>,
    ) -> Result<SubnormalizedState<T>> {
        if seq.steps.len() > self.steps() {
            return Err(Error::Sequence(format!(
                "sequence has {} steps, process only {}",
                seq.steps.len(),
                self.steps()
            )));
        }
        check_preparation(&seq.preparation, self.dim_s())?;
        let out = match self {
            Process::Dilated(p) => {
                let mut rho = seq
                    .preparation
                    .apply(observables, p.initial.matrix(), p.dim_e)?;
                for (u, step) in p.unitaries.iter().zip(&seq.steps) {
                    rho = u * rho * u.adjoint();
                    rho = step.apply(observables, &rho, p.dim_e)?;
                }
                partial_trace(&rho, (p.dim_s, p.dim_e), Subsystem::A)?
            }
            Process::Markov(p) => {
                let mut rho = seq.preparation.apply(observables, p.initial.matrix(), 1)?;
                for (m, step) in p.maps.iter().zip(&seq.steps) {
                    rho = m.apply(&rho)?;
                    rho = step.apply(observables, &rho, 1)?;
                }
                rho
            }
        };
        Ok(SubnormalizedState::from_trusted(out))
    }

    /// Joint state (system ⊗ environment for a dilation) right after the
    /// preparation at `t₀`. Together with [`Process::step`] and
    /// [`Process::reduce`] this lets callers share evaluation prefixes.
    pub fn prepared(
        &self,
        observables: &[Observable<T>],
        prep: &Intervention<T>,
    ) -> Result<ComplexMatrix<T>> {
        check_preparation(prep, self.dim_s())?;
        match self {
            Process::Dilated(p) => prep.apply(observables, p.initial.matrix(), p.dim_e),
            Process::Markov(p) => prep.apply(observables, p.initial.matrix(), 1),
        }
    }

    /// Propagates a joint state from `t_{k-1}` to `t_k` (`k` 1-based) and
    /// applies `iv` there.
    pub fn step(
        &self,
        k: usize,
        state: &ComplexMatrix<T>,
        observables: &[Observable<T>],
        iv: &Intervention<T>,
    ) -> Result<ComplexMatrix<T>> {
        if k == 0 || k > self.steps() {
            return Err(Error::Index {
                index: k,
                len: self.steps(),
            });
        }
        match self {
            Process::Dilated(p) => {
                let u = &p.unitaries[k - 1];
                iv.apply(observables, &(u * state * u.adjoint()), p.dim_e)
            }
            Process::Markov(p) => iv.apply(observables, &p.maps[k - 1].apply(state)?, 1),
        }
    }

    /// System state of a joint state.
    pub fn reduce(&self, state: &ComplexMatrix<T>) -> Result<SubnormalizedState<T>> {
        let m = match self {
            Process::Dilated(p) if p.dim_e > 1 => {
                partial_trace(state, (p.dim_s, p.dim_e), Subsystem::A)?
            }
            _ => state.clone(),
        };
        Ok(SubnormalizedState::from_trusted(m))
    }

    /// `p(r_{k_m}, …, r_{k_1} | 𝒜₀)` for outcomes of `observable` at the
    /// 1-based times `k`; unmeasured times get the identity.
    pub fn joint_probability(
        &self,
        observables: &[Observable<T>],
        observable: usize,
        preparation: &Intervention<T>,
        outcomes: &[(usize, usize)],
    ) -> Result<T> {
        let n = self.steps();
        let mut steps = vec![Intervention::Identity; n];
        let mut last = 0;
        for &(k, r) in outcomes {
            if k <= last || k > n {
                return Err(Error::Sequence(format!(
                    "time indices must be strictly increasing within 1..={n}"
                )));
            }
            last = k;
            steps[k - 1] = Intervention::Outcome {
                observable,
                outcome: r,
            };
        }
        let seq = InterventionSequence::new(preparation.clone(), steps);
        Ok(self.evaluate(observables, &seq)?.norm())
    }
}

fn check_preparation<T: Real>(prep: &Intervention<T>, d: usize) -> Result<()> {
    match prep {
        Intervention::Identity => Ok(()),
        Intervention::Map(m) => {
            if m.dim_in() != d || m.dim_out() != d {
                return Err(Error::Dimension(format!(
                    "preparation must act on dimension {d}"
                )));
            }
            if !m.is_tp(T::verdict_tolerance()) {
                return Err(Error::Sequence(
                    "preparations must be trace preserving".into(),
                ));
            }
            Ok(())
        }
        _ => Err(Error::Sequence(
            "preparation must be the identity or a CPTP map".into(),
        )),
    }
}

/// Superoperator of an intervention acting on a `d`-dimensional system.
pub fn intervention_superop<T: Real>(
    iv: &Intervention<T>,
    observables: &[Observable<T>],
    d: usize,
) -> Result<Superoperator<T>> {
    let lookup = |i: usize| {
        observables.get(i).ok_or(Error::Index {
            index: i,
            len: observables.len(),
        })
    };
    let s = match iv {
        Intervention::Identity => Superoperator::identity(d),
        Intervention::Outcome {
            observable,
            outcome,
        } => projector_superop(lookup(*observable)?, *outcome)?,
        Intervention::Dephase { observable } => dephasing_channel(lookup(*observable)?),
        Intervention::Map(m) => m.clone(),
    };
    if s.dim_in() != d {
        return Err(Error::Dimension(format!(
            "intervention does not act on dimension {d}"
        )));
    }
    Ok(s)
}

impl<T: Real> MarkovProcess<T> {
    /// Evaluates by first multiplying out `𝒜_n Λ_{n,n-1} ⋯ Λ_{1,0} 𝒜₀` as one
    /// superoperator, then applying it to the initial state.
    pub fn evaluate_composed(
        &self,
        observables: &[Observable<T>],
        seq: &InterventionSequence<T>,
    ) -> Result<SubnormalizedState<T>> {
        if seq.steps.len() != self.maps.len() {
            return Err(Error::Sequence(
                "sequence length does not match the process".into(),
            ));
        }
        check_preparation(&seq.preparation, self.dim_s)?;
        let mut total = intervention_superop(&seq.preparation, observables, self.dim_s)?;
        for (m, step) in self.maps.iter().zip(&seq.steps) {
            total = compose(m, &total)?;
            total = compose(
                &intervention_superop(step, observables, self.dim_s)?,
                &total,
            )?;
        }
        Ok(SubnormalizedState::from_trusted(
            total.apply(self.initial.matrix())?,
        ))
    }
}

/// Reconstructs `Λ_{k,k-1} = Λ_{k,0} Λ_{k-1,0}⁻¹` from a dilation with a
/// product initial state, by tomography of the reduced maps `Λ_{k,0}` on
/// matrix units.
///
/// The result is flagged [`MarkovOrigin::Derived`]. Its maps are trace
/// preserving; complete positivity is checked and recorded per map.
pub fn markov_from_dilation<T: Real>(process: &DilatedProcess<T>) -> Result<MarkovProcess<T>> {
    let defect = process.correlation_defect();
    if defect > T::validation_tolerance() {
        return Err(Error::NotDerivable(format!(
            "initial state is correlated (max |ρ_SE - ρ_S⊗ρ_E| = {:e})",
            defect.as_f64()
        )));
    }
    let (rho_s, rho_e) = process.marginals();
    let (ds, de) = (process.dim_s, process.dim_e);
    let mut evolution = identity::<T>(ds * de);
    let mut cumulative = Vec::with_capacity(process.unitaries.len());
    for u in &process.unitaries {
        evolution = u * evolution;
        let w = evolution.clone();
        cumulative.push(Superoperator::from_linear_map(ds, ds, true, true, |x| {
            let joint = tensor_product(x, &rho_e);
            partial_trace(&(&w * joint * w.adjoint()), (ds, de), Subsystem::A).expect("dims")
        })?);
    }
    let mut maps = Vec::with_capacity(cumulative.len());
    for k in 0..cumulative.len() {
        let step = if k == 0 {
            cumulative[0].clone()
        } else {
            compose(&cumulative[k], &invert(&cumulative[k - 1])?)?
        };
        let cp = step.is_cp(T::verdict_tolerance());
        maps.push(step.with_flags(cp, true));
    }
    let initial = DensityMatrix::with_tolerance(rho_s, T::verdict_tolerance())?;
    MarkovProcess::unchecked(initial, maps, process.grid.clone(), MarkovOrigin::Derived)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::unitary_channel;
    use crate::linalg::{rotation, trace_distance};
    use crate::random::{haar_unitary, random_cptp, random_density_matrix};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn y_quarter() -> ComplexMatrix {
        rotation([0., 1., 0.], std::f64::consts::FRAC_PI_2)
    }

    fn closed_qubit(prep_state: DensityMatrix) -> Process {
        let grid = TimeGrid::uniform(3, 1.0).unwrap();
        DilatedProcess::new(2, 1, prep_state, vec![y_quarter(); 3], grid)
            .unwrap()
            .into()
    }

    fn random_dilated(rng: &mut ChaCha8Rng, n: usize, product: bool) -> DilatedProcess {
        let (ds, de) = (2, 2);
        let initial = if product {
            let a = random_density_matrix::<f64, _>(ds, rng);
            let b = random_density_matrix::<f64, _>(de, rng);
            DensityMatrix::new(tensor_product(a.matrix(), b.matrix())).unwrap()
        } else {
            random_density_matrix(ds * de, rng)
        };
        let us = (0..n).map(|_| haar_unitary(ds * de, rng)).collect();
        DilatedProcess::new(ds, de, initial, us, TimeGrid::uniform(n, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn idle_sequence_preserves_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p: Process = random_dilated(&mut rng, 3, false).into();
        let out = p
            .evaluate(&[], &InterventionSequence::idle(Intervention::Identity, 3))
            .unwrap();
        assert!((out.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_counterexample_probabilities() {
        let p = closed_qubit(DensityMatrix::maximally_mixed(2));
        let obs = [Observable::sigma_z()];
        let prob = |outs: &[(usize, usize)]| {
            p.joint_probability(&obs, 0, &Intervention::Identity, outs)
                .unwrap()
        };
        assert!((prob(&[(1, 0), (2, 0), (3, 0)]) - 0.125).abs() < 1e-15);
        assert!((prob(&[(1, 0), (2, 1), (3, 0)]) - 0.125).abs() < 1e-15);
        assert!(prob(&[(1, 0), (3, 0)]).abs() < 1e-15);
        assert!((prob(&[(1, 0)]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn probabilities_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let obs = [Observable::sigma_z()];
        for _ in 0..10 {
            let p: Process = random_dilated(&mut rng, 3, false).into();
            let mut total = 0.0;
            for code in 0..8usize {
                let outs: Vec<(usize, usize)> = (0..3).map(|k| (k + 1, (code >> k) & 1)).collect();
                let pr = p
                    .joint_probability(&obs, 0, &Intervention::Identity, &outs)
                    .unwrap();
                assert!((-1e-15..=1.0 + 1e-12).contains(&pr));
                total += pr;
            }
            assert!((total - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sequence_errors() {
        let p = closed_qubit(DensityMatrix::maximally_mixed(2));
        let obs = [Observable::sigma_z()];
        let short = InterventionSequence::idle(Intervention::Identity, 2);
        assert!(matches!(p.evaluate(&obs, &short), Err(Error::Sequence(_))));
        assert!(matches!(
            p.joint_probability(&obs, 0, &Intervention::Identity, &[(2, 0), (1, 0)]),
            Err(Error::Sequence(_))
        ));
        let bad_prep = InterventionSequence::idle(
            Intervention::Outcome {
                observable: 0,
                outcome: 0,
            },
            3,
        );
        assert!(matches!(
            p.evaluate(&obs, &bad_prep),
            Err(Error::Sequence(_))
        ));
        let qutrit = [Observable::computational(3)];
        let seq = InterventionSequence::new(
            Intervention::Identity,
            vec![
                Intervention::Dephase { observable: 0 },
                Intervention::Identity,
                Intervention::Identity,
            ],
        );
        assert!(matches!(
            p.evaluate(&qutrit, &seq),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn dephasing_equals_sum_over_outcomes() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let obs = [Observable::sigma_z()];
        for _ in 0..10 {
            let p: Process = random_dilated(&mut rng, 3, false).into();
            for k in 0..3 {
                let mut steps = vec![
                    Intervention::Outcome {
                        observable: 0,
                        outcome: 1,
                    },
                    Intervention::Outcome {
                        observable: 0,
                        outcome: 0,
                    },
                    Intervention::Outcome {
                        observable: 0,
                        outcome: 1,
                    },
                ];
                steps[k] = Intervention::Dephase { observable: 0 };
                let deph = p
                    .evaluate(
                        &obs,
                        &InterventionSequence::new(Intervention::Identity, steps.clone()),
                    )
                    .unwrap();
                let mut sum = ComplexMatrix::zeros(2, 2);
                for r in 0..2 {
                    steps[k] = Intervention::Outcome {
                        observable: 0,
                        outcome: r,
                    };
                    sum += p
                        .evaluate(
                            &obs,
                            &InterventionSequence::new(Intervention::Identity, steps.clone()),
                        )
                        .unwrap()
                        .matrix();
                }
                assert!(max_abs_diff(&sum, deph.matrix()) < 1e-12);
            }
        }
    }

    #[test]
    fn markov_two_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let obs = [Observable::sigma_z()];
        let maps = (0..3).map(|_| random_cptp(2, &mut rng)).collect();
        let p = MarkovProcess::new(
            random_density_matrix(2, &mut rng),
            maps,
            TimeGrid::uniform(3, 0.5).unwrap(),
        )
        .unwrap();
        let prep = Intervention::Map(random_cptp(2, &mut rng));
        let seq = InterventionSequence::new(
            prep,
            vec![
                Intervention::Outcome {
                    observable: 0,
                    outcome: 0,
                },
                Intervention::Map(random_cptp(2, &mut rng)),
                Intervention::Dephase { observable: 0 },
            ],
        );
        let a = Process::Markov(p.clone()).evaluate(&obs, &seq).unwrap();
        let b = p.evaluate_composed(&obs, &seq).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-12);
    }

    #[test]
    fn markov_causality() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let maps = (0..3).map(|_| random_cptp(2, &mut rng)).collect();
        let p: Process = MarkovProcess::new(
            random_density_matrix(2, &mut rng),
            maps,
            TimeGrid::uniform(3, 1.0).unwrap(),
        )
        .unwrap()
        .into();
        let before = p
            .evaluate_prefix(&[], &InterventionSequence::idle(Intervention::Identity, 1))
            .unwrap();
        let mut steps = vec![
            Intervention::Identity,
            Intervention::Map(random_cptp(2, &mut rng)),
        ];
        let with_later = p
            .evaluate_prefix(
                &[],
                &InterventionSequence::new(Intervention::Identity, steps.clone()),
            )
            .unwrap();
        steps.truncate(1);
        let again = p
            .evaluate_prefix(
                &[],
                &InterventionSequence::new(Intervention::Identity, steps),
            )
            .unwrap();
        assert!(max_abs_diff(before.matrix(), again.matrix()) < 1e-15);
        assert!((with_later.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn closed_system_derivation_gives_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let us: Vec<ComplexMatrix> = (0..3).map(|_| haar_unitary(2, &mut rng)).collect();
        let dil = DilatedProcess::new(
            2,
            1,
            random_density_matrix(2, &mut rng),
            us.clone(),
            TimeGrid::uniform(3, 1.0).unwrap(),
        )
        .unwrap();
        let mk = markov_from_dilation(&dil).unwrap();
        assert_eq!(mk.origin(), MarkovOrigin::Derived);
        for (m, u) in mk.maps().iter().zip(&us) {
            assert!(m.distance(&unitary_channel(u).unwrap()).unwrap() < 1e-12);
        }
        let obs = [Observable::sigma_z()];
        let dil: Process = dil.into();
        let mk: Process = mk.into();
        let choices = [
            Intervention::Identity,
            Intervention::Dephase { observable: 0 },
            Intervention::Outcome {
                observable: 0,
                outcome: 0,
            },
            Intervention::Outcome {
                observable: 0,
                outcome: 1,
            },
        ];
        for a in &choices {
            for b in &choices {
                for c in &choices {
                    let seq = InterventionSequence::new(
                        Intervention::Identity,
                        vec![a.clone(), b.clone(), c.clone()],
                    );
                    let x = dil.evaluate(&obs, &seq).unwrap();
                    let y = mk.evaluate(&obs, &seq).unwrap();
                    assert!(trace_distance(&x, &y).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn derived_family_composes() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let dil = random_dilated(&mut rng, 3, true);
        let mk = markov_from_dilation(&dil).unwrap();
        // Λ_{2,0} from tomography equals Λ_{2,1} Λ_{1,0}
        let l20 = mk.propagator(2, 0).unwrap();
        let direct = markov_from_dilation(
            &DilatedProcess::new(
                2,
                2,
                dil.initial().clone(),
                vec![&dil.unitaries()[1] * &dil.unitaries()[0]],
                TimeGrid::uniform(1, 1.0).unwrap(),
            )
            .unwrap(),
        )
        .unwrap();
        assert!(l20.distance(&direct.maps()[0]).unwrap() < 1e-10);
        // unmeasured dynamics agree with the dilation
        let idle = InterventionSequence::idle(Intervention::Identity, 3);
        let a = Process::Dilated(dil).evaluate(&[], &idle).unwrap();
        let b = Process::Markov(mk).evaluate(&[], &idle).unwrap();
        assert!(max_abs_diff(a.matrix(), b.matrix()) < 1e-10);
    }

    #[test]
    fn correlated_state_not_derivable() {
        let mut rng = ChaCha8Rng::seed_from_u64(18);
        let dil = random_dilated(&mut rng, 2, false);
        assert!(matches!(
            markov_from_dilation(&dil),
            Err(Error::NotDerivable(_))
        ));
    }

    #[test]
    fn grid_validation() {
        assert!(TimeGrid::new(vec![0.0]).is_err());
        assert!(TimeGrid::new(vec![0.0, 1.0, 1.0]).is_err());
        assert!(TimeGrid::uniform(9, 1.0).is_err());
        assert_eq!(TimeGrid::uniform(8, 0.5).unwrap().steps(), 8);
    }
}
