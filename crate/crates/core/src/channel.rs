//! Superoperators, projective observables and the interventions built from
//! them.
//!
//! Operators are vectorized by stacking columns, so the map `ρ ↦ AρB` has the
//! matrix `Bᵀ ⊗ A` acting on `vec(ρ)`.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};
use crate::linalg::{
    self, hermiticity_defect, identity, max_abs, max_abs_diff, real, tensor_product,
    unitarity_defect, unvectorize, vectorize, zeros, ComplexMatrix,
};
use crate::scalar::Real;

/// Condition number above which a superoperator counts as singular.
pub const MAX_CONDITION_NUMBER: f64 = 1e8;

/// Linear map on operators in column-stacked matrix form
/// (`dim_out² x dim_in²`), tagged with what is known about it.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator<T: Real = f64> {
    dim_in: usize,
    dim_out: usize,
    matrix: ComplexMatrix<T>,
    cp: bool,
    tp: bool,
}

impl<T: Real> Superoperator<T> {
    pub fn new(
        dim_in: usize,
        dim_out: usize,
        matrix: ComplexMatrix<T>,
        cp: bool,
        tp: bool,
    ) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::Dimension(
                "superoperator dimensions must be positive".into(),
            ));
        }
        if matrix.shape() != (dim_out * dim_out, dim_in * dim_in) {
            return Err(Error::Dimension(format!(
                "superoperator {dim_in}->{dim_out} needs a {}x{} matrix, got {}x{}",
                dim_out * dim_out,
                dim_in * dim_in,
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if !linalg::is_finite(&matrix) {
            return Err(Error::InvalidChannel("non-finite entries".into()));
        }
        Ok(Self {
            dim_in,
            dim_out,
            matrix,
            cp,
            tp,
        })
    }

    /// Builds the matrix of a linear map by applying it to every matrix unit.
    pub fn from_linear_map<F>(
        dim_in: usize,
        dim_out: usize,
        cp: bool,
        tp: bool,
        f: F,
    ) -> Result<Self>
    where
        F: Fn(&ComplexMatrix<T>) -> ComplexMatrix<T>,
    {
        let mut m = zeros(dim_out * dim_out, dim_in * dim_in);
        for j in 0..dim_in {
            for i in 0..dim_in {
                let out = f(&linalg::matrix_unit(dim_in, i, j));
                if out.shape() != (dim_out, dim_out) {
                    return Err(Error::Dimension(format!(
                        "map produced {:?}, expected {dim_out}x{dim_out}",
                        out.shape()
                    )));
                }
                m.set_column(i + j * dim_in, &vectorize(&out));
            }
        }
        Self::new(dim_in, dim_out, m, cp, tp)
    }

    /// `ρ ↦ Σ K ρ K†`; flagged trace-preserving when `Σ K†K = I`.
    pub fn from_kraus(kraus: &[ComplexMatrix<T>]) -> Result<Self> {
        let first = kraus
            .first()
            .ok_or_else(|| Error::InvalidChannel("empty Kraus set".into()))?;
        let (dout, din) = first.shape();
        let mut m = zeros(dout * dout, din * din);
        let mut completeness = zeros::<T>(din, din);
        for k in kraus {
            if k.shape() != (dout, din) {
                return Err(Error::Dimension("Kraus operators differ in shape".into()));
            }
            m += tensor_product(&k.conjugate(), k);
            completeness += k.adjoint() * k;
        }
        let tp = max_abs_diff(&completeness, &identity(din)) <= T::validation_tolerance();
        Self::new(din, dout, m, true, tp)
    }

    pub fn identity(d: usize) -> Self {
        Self {
            dim_in: d,
            dim_out: d,
            matrix: identity(d * d),
            cp: true,
            tp: true,
        }
    }

    /// Replacement channel `ρ ↦ tr(ρ) σ`.
    pub fn replacement(dim_in: usize, sigma: &ComplexMatrix<T>) -> Result<Self> {
        let dout = sigma.nrows();
        let vs = vectorize(sigma);
        let vi = vectorize(&identity::<T>(dim_in));
        Self::new(dim_in, dout, &vs * vi.transpose(), true, true)
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn is_flagged_cp(&self) -> bool {
        self.cp
    }

    pub fn is_flagged_tp(&self) -> bool {
        self.tp
    }

    pub(crate) fn with_flags(mut self, cp: bool, tp: bool) -> Self {
        self.cp = cp;
        self.tp = tp;
        self
    }

    pub fn apply(&self, rho: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        if rho.shape() != (self.dim_in, self.dim_in) {
            return Err(Error::Dimension(format!(
                "superoperator expects {0}x{0} input, got {1}x{2}",
                self.dim_in,
                rho.nrows(),
                rho.ncols()
            )));
        }
        Ok(unvectorize(
            &(&self.matrix * vectorize(rho)),
            self.dim_out,
            self.dim_out,
        ))
    }

    /// Applies `Λ ⊗ id_E` to an operator on `S ⊗ E` (system leftmost).
    pub fn apply_to_system(
        &self,
        rho: &ComplexMatrix<T>,
        dim_env: usize,
    ) -> Result<ComplexMatrix<T>> {
        if dim_env == 1 {
            return self.apply(rho);
        }
        let n = self.dim_in * dim_env;
        if rho.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "local map on {}x{dim_env} needs a {n}x{n} operator",
                self.dim_in
            )));
        }
        let (di, dout) = (self.dim_in, self.dim_out);
        let mut out = zeros(dout * dim_env, dout * dim_env);
        let mut block = zeros::<T>(di, di);
        for k in 0..dim_env {
            for l in 0..dim_env {
                for j in 0..di {
                    for i in 0..di {
                        block[(i, j)] = rho[(i * dim_env + k, j * dim_env + l)];
                    }
                }
                let mapped = self.apply(&block)?;
                for j in 0..dout {
                    for i in 0..dout {
                        out[(i * dim_env + k, j * dim_env + l)] = mapped[(i, j)];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Choi matrix `Σ_ij |i⟩⟨j| ⊗ Λ(|i⟩⟨j|)`.
    pub fn choi(&self) -> ComplexMatrix<T> {
        let (di, dout) = (self.dim_in, self.dim_out);
        let mut j = zeros(di * dout, di * dout);
        for b in 0..di {
            for a in 0..di {
                let out = unvectorize(&self.matrix.column(a + b * di).into_owned(), dout, dout);
                for q in 0..dout {
                    for p in 0..dout {
                        j[(a * dout + p, b * dout + q)] = out[(p, q)];
                    }
                }
            }
        }
        j
    }

    /// Smallest eigenvalue of the Choi matrix (≥ 0 iff CP).
    pub fn choi_min_eigenvalue(&self) -> T {
        linalg::hermitian_eigenvalues(&self.choi())[0]
    }

    pub fn is_cp(&self, tol: T) -> bool {
        hermiticity_defect(&self.choi()) <= tol && self.choi_min_eigenvalue() >= -tol
    }

    /// `max_ij |tr Λ(|i⟩⟨j|) - δ_ij|`.
    pub fn trace_defect(&self) -> T {
        let d = self.dim_out;
        let mut worst = T::zero();
        for col in 0..self.dim_in * self.dim_in {
            let (i, j) = (col % self.dim_in, col / self.dim_in);
            let tr = (0..d).fold(real(T::zero()), |acc, p| {
                acc + self.matrix[(p + p * d, col)]
            });
            let target = if i == j {
                real(T::one())
            } else {
                real(T::zero())
            };
            worst = worst.max((tr - target).modulus());
        }
        worst
    }

    pub fn is_tp(&self, tol: T) -> bool {
        self.trace_defect() <= tol
    }

    /// Largest entrywise difference between two superoperator matrices.
    pub fn distance(&self, other: &Self) -> Result<T> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(Error::Dimension("superoperators differ in shape".into()));
        }
        Ok(max_abs_diff(&self.matrix, &other.matrix))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.matrix.shape() != other.matrix.shape() {
            return Err(Error::Dimension("superoperators differ in shape".into()));
        }
        Self::new(
            self.dim_in,
            self.dim_out,
            &self.matrix + &other.matrix,
            self.cp && other.cp,
            false,
        )
    }

    /// Scalar multiple; flags are dropped unless `factor` is one.
    pub fn scale(&self, factor: T) -> Self {
        let same = factor == T::one();
        Self {
            matrix: &self.matrix * real(factor),
            cp: self.cp && factor >= T::zero(),
            tp: self.tp && same,
            ..self.clone()
        }
    }
}

/// `ρ ↦ UρU†`.
pub fn unitary_channel<T: Real>(u: &ComplexMatrix<T>) -> Result<Superoperator<T>> {
    let defect = unitarity_defect(u);
    if defect > T::validation_tolerance() {
        return Err(Error::NotUnitary {
            deviation: defect.as_f64(),
        });
    }
    let d = u.nrows();
    Superoperator::new(d, d, tensor_product(&u.conjugate(), u), true, true)
}

/// `a ∘ b`: apply `b` first.
pub fn compose<T: Real>(a: &Superoperator<T>, b: &Superoperator<T>) -> Result<Superoperator<T>> {
    if b.dim_out != a.dim_in {
        return Err(Error::Dimension(format!(
            "cannot compose {}->{} after {}->{}",
            a.dim_in, a.dim_out, b.dim_in, b.dim_out
        )));
    }
    Superoperator::new(
        b.dim_in,
        a.dim_out,
        &a.matrix * &b.matrix,
        a.cp && b.cp,
        a.tp && b.tp,
    )
}

/// Condition number `σ_max / σ_min` of the superoperator matrix.
pub fn condition_number<T: Real>(a: &Superoperator<T>) -> T {
    let sv = a.matrix.clone().singular_values();
    let smax = sv.iter().fold(T::zero(), |x, &y| x.max(y));
    let smin = sv
        .iter()
        .fold(T::max_value().unwrap_or_else(T::one), |x, &y| x.min(y));
    if smin <= T::zero() {
        return T::max_value().unwrap_or_else(T::one);
    }
    smax / smin
}

/// Linear inverse of a square superoperator.
///
/// Fails with [`Error::NotInvertible`] when the condition number exceeds
/// [`MAX_CONDITION_NUMBER`]. The result keeps the TP flag but is never
/// flagged CP.
pub fn invert<T: Real>(a: &Superoperator<T>) -> Result<Superoperator<T>> {
    if a.dim_in != a.dim_out {
        return Err(Error::Dimension(format!(
            "only square superoperators invert ({}->{})",
            a.dim_in, a.dim_out
        )));
    }
    let cond = condition_number(a);
    if !(cond <= T::lit(MAX_CONDITION_NUMBER)) {
        return Err(Error::NotInvertible {
            condition: cond.as_f64(),
        });
    }
    let inv = a.matrix.clone().try_inverse().ok_or(Error::NotInvertible {
        condition: f64::INFINITY,
    })?;
    Superoperator::new(a.dim_in, a.dim_out, inv, false, a.tp)
}

/// One outcome of a projective measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome<T: Real = f64> {
    pub eigenvalue: T,
    pub projector: ComplexMatrix<T>,
}

/// Projective decomposition `R = Σ r P_r`, outcomes in construction order.
#[derive(Debug, Clone, PartialEq)]
pub struct Observable<T: Real = f64> {
    dim: usize,
    outcomes: Vec<Outcome<T>>,
}

impl<T: Real> Observable<T> {
    pub fn new(outcomes: Vec<Outcome<T>>) -> Result<Self> {
        let first = outcomes
            .first()
            .ok_or_else(|| Error::InvalidObservable("no outcomes".into()))?;
        let d = first.projector.nrows();
        let tol = T::validation_tolerance();
        let mut sum = zeros::<T>(d, d);
        for (r, o) in outcomes.iter().enumerate() {
            let p = &o.projector;
            if p.shape() != (d, d) {
                return Err(Error::Dimension(format!("projector {r} is not {d}x{d}")));
            }
            if !o.eigenvalue.is_finite() || !linalg::is_finite(p) {
                return Err(Error::InvalidObservable(format!(
                    "outcome {r} is not finite"
                )));
            }
            if hermiticity_defect(p) > tol {
                return Err(Error::InvalidObservable(format!(
                    "projector {r} is not Hermitian"
                )));
            }
            if max_abs_diff(&(p * p), p) > tol {
                return Err(Error::InvalidObservable(format!(
                    "projector {r} is not idempotent"
                )));
            }
            if p.trace().re < T::lit(0.5) {
                return Err(Error::InvalidObservable(format!("projector {r} is zero")));
            }
            for (s, other) in outcomes.iter().enumerate().skip(r + 1) {
                if max_abs(&(p * &other.projector)) > tol {
                    return Err(Error::InvalidObservable(format!(
                        "projectors {r} and {s} are not orthogonal"
                    )));
                }
            }
            sum += p;
        }
        if max_abs_diff(&sum, &identity(d)) > tol {
            return Err(Error::InvalidObservable(
                "projectors do not sum to the identity".into(),
            ));
        }
        Ok(Self { dim: d, outcomes })
    }

    /// Rank-1 observable from eigenvalues and the columns of a unitary.
    pub fn from_basis(eigenvalues: &[T], basis: &ComplexMatrix<T>) -> Result<Self> {
        if basis.ncols() != eigenvalues.len() {
            return Err(Error::Dimension("one eigenvalue per basis vector".into()));
        }
        let outcomes = eigenvalues
            .iter()
            .enumerate()
            .map(|(i, &eigenvalue)| Outcome {
                eigenvalue,
                projector: linalg::outer(&basis.column(i).into_owned()),
            })
            .collect();
        Self::new(outcomes)
    }

    /// Computational-basis observable with eigenvalues `0, 1, …, d-1`.
    pub fn computational(d: usize) -> Self {
        let eig: Vec<T> = (0..d).map(|i| T::from_usize(i).unwrap()).collect();
        Self::from_basis(&eig, &identity(d)).expect("computational basis is orthonormal")
    }

    /// σ_z with outcomes `↑` (+1) then `↓` (-1).
    pub fn sigma_z() -> Self {
        Self::from_basis(&[T::one(), -T::one()], &identity(2)).expect("valid")
    }

    /// σ_x with outcomes `+` (+1) then `-` (-1).
    pub fn sigma_x() -> Self {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let basis = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                linalg::c(s, 0.),
                linalg::c(s, 0.),
                linalg::c(s, 0.),
                linalg::c(-s, 0.),
            ],
        );
        Self::from_basis(&[T::one(), -T::one()], &basis).expect("valid")
    }

    /// `R ⊗ I_B`: measures only the leftmost factor.
    pub fn local(&self, dim_rest: usize) -> Self {
        let id = identity::<T>(dim_rest);
        Self {
            dim: self.dim * dim_rest,
            outcomes: self
                .outcomes
                .iter()
                .map(|o| Outcome {
                    eigenvalue: o.eigenvalue,
                    projector: tensor_product(&o.projector, &id),
                })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[Outcome<T>] {
        &self.outcomes
    }

    pub fn projector(&self, r: usize) -> Result<&ComplexMatrix<T>> {
        self.outcomes
            .get(r)
            .map(|o| &o.projector)
            .ok_or(Error::Index {
                index: r,
                len: self.outcomes.len(),
            })
    }

    pub fn rank(&self, r: usize) -> Result<usize> {
        Ok(self.projector(r)?.trace().re.as_f64().round() as usize)
    }

    pub fn is_non_degenerate(&self) -> bool {
        (0..self.len()).all(|r| self.rank(r) == Ok(1))
    }

    fn require_non_degenerate(&self) -> Result<()> {
        for r in 0..self.len() {
            let rank = self.rank(r)?;
            if rank != 1 {
                return Err(Error::DegenerateObservable { outcome: r, rank });
            }
        }
        Ok(())
    }

    /// Outcome indices sorted by ascending eigenvalue, ties in construction order.
    pub fn population_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_by(|&a, &b| {
            self.outcomes[a]
                .eigenvalue
                .partial_cmp(&self.outcomes[b].eigenvalue)
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        idx
    }

    /// Unit vector spanning a rank-1 projector (phase fixed by its largest column).
    pub fn basis_vector(&self, r: usize) -> Result<DVector<Complex<T>>> {
        let rank = self.rank(r)?;
        if rank != 1 {
            return Err(Error::DegenerateObservable { outcome: r, rank });
        }
        let p = self.projector(r)?;
        orthonormal_range(p)
            .into_iter()
            .next()
            .ok_or_else(|| Error::InvalidObservable(format!("projector {r} has empty range")))
    }

    /// Orthonormal basis of the eigenspace of outcome `r`.
    pub fn eigenspace(&self, r: usize) -> Result<Vec<DVector<Complex<T>>>> {
        Ok(orthonormal_range(self.projector(r)?))
    }
}

/// Orthonormal basis for the range of a projector, by Gram–Schmidt on its
/// columns in order of decreasing norm.
fn orthonormal_range<T: Real>(p: &ComplexMatrix<T>) -> Vec<DVector<Complex<T>>> {
    let rank = p.trace().re.as_f64().round() as usize;
    let mut cols: Vec<DVector<Complex<T>>> =
        (0..p.ncols()).map(|j| p.column(j).into_owned()).collect();
    cols.sort_by(|a, b| {
        b.norm()
            .partial_cmp(&a.norm())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut basis: Vec<DVector<Complex<T>>> = Vec::with_capacity(rank);
    for mut v in cols {
        if basis.len() == rank {
            break;
        }
        for b in &basis {
            let overlap = b.dotc(&v);
            v -= b * overlap;
        }
        let n = v.norm();
        if n > T::lit(1e-6) {
            basis.push(v / real(n));
        }
    }
    basis
}

/// `ρ ↦ P_r ρ P_r`.
pub fn projector_superop<T: Real>(obs: &Observable<T>, r: usize) -> Result<Superoperator<T>> {
    let p = obs.projector(r)?;
    Superoperator::new(
        obs.dim,
        obs.dim,
        tensor_product(&p.conjugate(), p),
        true,
        false,
    )
}

/// `Δ = Σ_r 𝒫_r`.
pub fn dephasing_channel<T: Real>(obs: &Observable<T>) -> Superoperator<T> {
    let d = obs.dim;
    let mut m = zeros(d * d, d * d);
    for o in &obs.outcomes {
        m += tensor_product(&o.projector.conjugate(), &o.projector);
    }
    Superoperator {
        dim_in: d,
        dim_out: d,
        matrix: m,
        cp: true,
        tp: true,
    }
}

/// Blocks of a superoperator in the population-first operator basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockForm<T: Real = f64> {
    /// Populations to populations.
    pub a: DMatrix<T>,
    /// Coherences to populations.
    pub b: ComplexMatrix<T>,
    /// Populations to coherences.
    pub c: ComplexMatrix<T>,
    /// Coherences to coherences.
    pub d: ComplexMatrix<T>,
}

impl<T: Real> BlockForm<T> {
    /// Largest deviation of `A` from a column-stochastic matrix: negative
    /// entries and column sums away from one.
    pub fn stochastic_defect(&self) -> T {
        let mut worst = T::zero();
        for j in 0..self.a.ncols() {
            let col = self.a.column(j);
            let mut sum = T::zero();
            for &x in col.iter() {
                worst = worst.max(-x);
                sum += x;
            }
            worst = worst.max((sum - T::one()).abs());
        }
        worst
    }
}

/// Operator basis `|r⟩⟨r|` (ascending eigenvalue) followed by `|r⟩⟨r'|`,
/// `r ≠ r'` in lexicographic order, as vectorized columns.
fn ordered_operator_basis<T: Real>(obs: &Observable<T>) -> Result<ComplexMatrix<T>> {
    obs.require_non_degenerate()?;
    let d = obs.dim;
    let order = obs.population_order();
    let kets: Vec<DVector<Complex<T>>> = order
        .iter()
        .map(|&r| obs.basis_vector(r))
        .collect::<Result<_>>()?;
    let mut basis = zeros(d * d, d * d);
    let mut col = 0;
    let mut push = |m: ComplexMatrix<T>, col: &mut usize| {
        basis.set_column(*col, &vectorize(&m));
        *col += 1;
    };
    for k in &kets {
        push(k * k.adjoint(), &mut col);
    }
    for (a, ka) in kets.iter().enumerate() {
        for (b, kb) in kets.iter().enumerate() {
            if a != b {
                push(ka * kb.adjoint(), &mut col);
            }
        }
    }
    Ok(basis)
}

/// Re-expresses a trace-preserving map in the population-first basis of the
/// input and output observables and splits it into `[[A, B], [C, D]]`.
pub fn ordered_basis_matrix<T: Real>(
    a: &Superoperator<T>,
    obs_in: &Observable<T>,
    obs_out: &Observable<T>,
) -> Result<BlockForm<T>> {
    if obs_in.dim != a.dim_in || obs_out.dim != a.dim_out {
        return Err(Error::Dimension(
            "observables do not match the superoperator".into(),
        ));
    }
    let s_in = ordered_operator_basis(obs_in)?;
    let s_out = ordered_operator_basis(obs_out)?;
    let m = s_out.adjoint() * &a.matrix * s_in;
    let (pi, po) = (obs_in.len(), obs_out.len());
    let (ci, co) = (m.ncols() - pi, m.nrows() - po);
    Ok(BlockForm {
        a: DMatrix::from_fn(po, pi, |i, j| m[(i, j)].re),
        b: m.view((0, pi), (po, ci)).into_owned(),
        c: m.view((po, 0), (co, pi)).into_owned(),
        d: m.view((po, pi), (co, ci)).into_owned(),
    })
}

/// What an experimenter does to the system at one grid time.
#[derive(Debug, Clone, PartialEq)]
pub enum Intervention<T: Real = f64> {
    Identity,
    /// Projective measurement with a post-selected outcome.
    Outcome {
        observable: usize,
        outcome: usize,
    },
    /// Non-selective measurement `Δ`.
    Dephase {
        observable: usize,
    },
    Map(Superoperator<T>),
}

impl<T: Real> Intervention<T> {
    /// Short label used in witnesses: `I`, `D`, `P<r>` or `M`.
    pub fn label(&self) -> String {
        match self {
            Intervention::Identity => "I".into(),
            Intervention::Outcome { outcome, .. } => format!("P{outcome}"),
            Intervention::Dephase { .. } => "D".into(),
            Intervention::Map(_) => "M".into(),
        }
    }

    pub fn is_trace_preserving(&self) -> bool {
        match self {
            Intervention::Outcome { .. } => false,
            Intervention::Map(m) => m.is_flagged_tp(),
            _ => true,
        }
    }

    /// Applies the intervention to the system factor of an `S ⊗ E` operator.
    pub fn apply(
        &self,
        observables: &[Observable<T>],
        rho: &ComplexMatrix<T>,
        dim_env: usize,
    ) -> Result<ComplexMatrix<T>> {
        let lookup = |i: usize| {
            observables.get(i).ok_or(Error::Index {
                index: i,
                len: observables.len(),
            })
        };
        let local = |p: &ComplexMatrix<T>| {
            if dim_env == 1 {
                p.clone()
            } else {
                tensor_product(p, &identity(dim_env))
            }
        };
        match self {
            Intervention::Identity => Ok(rho.clone()),
            Intervention::Outcome {
                observable,
                outcome,
            } => {
                let obs = lookup(*observable)?;
                check_dim(obs.dim * dim_env, rho)?;
                let p = local(obs.projector(*outcome)?);
                Ok(&p * rho * &p)
            }
            Intervention::Dephase { observable } => {
                let obs = lookup(*observable)?;
                check_dim(obs.dim * dim_env, rho)?;
                let mut out = zeros(rho.nrows(), rho.ncols());
                for o in &obs.outcomes {
                    let p = local(&o.projector);
                    out += &p * rho * &p;
                }
                Ok(out)
            }
            Intervention::Map(m) => m.apply_to_system(rho, dim_env),
        }
    }
}

fn check_dim<T: Real>(n: usize, rho: &ComplexMatrix<T>) -> Result<()> {
    if rho.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "intervention acts on dimension {n}, state is {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(())
}
