//! Dense complex linear algebra: tensor products, partial traces, spectra,
//! distances and the validated state types built on them.
//!
//! Subsystem ordering is fixed throughout the crate: in a product space the
//! leftmost factor is the system (or qubit A), so the joint index of
//! `|i⟩⊗|k⟩` is `i * d_B + k`.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dense complex matrix over the scalar `T`.
pub type ComplexMatrix<T = f64> = DMatrix<Complex<T>>;

/// Largest joint Hilbert-space dimension any routine accepts.
pub const MAX_JOINT_DIM: usize = 64;

#[inline]
pub fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

#[inline]
pub fn real<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub fn identity<T: Real>(d: usize) -> ComplexMatrix<T> {
    ComplexMatrix::identity(d, d)
}

pub fn zeros<T: Real>(rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::zeros(rows, cols)
}

pub fn pauli_x<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z<T: Real>() -> ComplexMatrix<T> {
    ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Computational basis vector `|i⟩` in dimension `d`.
pub fn ket<T: Real>(d: usize, i: usize) -> DVector<Complex<T>> {
    let mut v = DVector::zeros(d);
    v[i] = real(T::one());
    v
}

/// `|v⟩⟨v|`.
pub fn outer<T: Real>(v: &DVector<Complex<T>>) -> ComplexMatrix<T> {
    v * v.adjoint()
}

/// Matrix unit `|i⟩⟨j|` in dimension `d`.
pub fn matrix_unit<T: Real>(d: usize, i: usize, j: usize) -> ComplexMatrix<T> {
    let mut m = zeros(d, d);
    m[(i, j)] = real(T::one());
    m
}

/// Spin-1/2 rotation `exp(-i θ n·σ / 2)` about the unit axis `(nx, ny, nz)`.
pub fn rotation<T: Real>(axis: [f64; 3], theta: f64) -> ComplexMatrix<T> {
    let (s, co) = (theta / 2.0).sin_cos();
    let [nx, ny, nz] = axis;
    ComplexMatrix::from_row_slice(
        2,
        2,
        &[
            c(co, -s * nz),
            c(-s * ny, -s * nx),
            c(s * ny, -s * nx),
            c(co, s * nz),
        ],
    )
}

/// Kronecker product `a ⊗ b`, with `(a⊗b)[(i·rb+k, j·cb+l)] = a[i,j]·b[k,l]`.
pub fn tensor_product<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> ComplexMatrix<T> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = zeros(ra * rb, ca * cb);
    for j in 0..ca {
        for i in 0..ra {
            let aij = a[(i, j)];
            if aij == Complex::new(T::zero(), T::zero()) {
                continue;
            }
            for l in 0..cb {
                for k in 0..rb {
                    out[(i * rb + k, j * cb + l)] = aij * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Which factor of a bipartite space survives a partial trace.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    A,
    B,
}

/// Traces out one factor of an operator on `C^dA ⊗ C^dB`.
pub fn partial_trace<T: Real>(
    m: &ComplexMatrix<T>,
    dims: (usize, usize),
    keep: Subsystem,
) -> Result<ComplexMatrix<T>> {
    let (da, db) = dims;
    let n = da * db;
    if m.nrows() != n || m.ncols() != n {
        return Err(Error::Dimension(format!(
            "partial trace over {da}x{db} needs a {n}x{n} matrix, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    Ok(match keep {
        Subsystem::A => ComplexMatrix::from_fn(da, da, |i, j| {
            (0..db).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                acc + m[(i * db + k, j * db + k)]
            })
        }),
        Subsystem::B => ComplexMatrix::from_fn(db, db, |k, l| {
            (0..da).fold(Complex::new(T::zero(), T::zero()), |acc, i| {
                acc + m[(i * db + k, i * db + l)]
            })
        }),
    })
}

pub fn trace<T: Real>(m: &ComplexMatrix<T>) -> Complex<T> {
    m.trace()
}

/// Largest entrywise modulus.
pub fn max_abs<T: Real>(m: &ComplexMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, z| acc.max(z.modulus()))
}

/// Largest entrywise modulus of `a - b`; shapes must agree.
pub fn max_abs_diff<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> T {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(T::zero(), |acc, (x, y)| acc.max((*x - *y).modulus()))
}

pub fn hermiticity_defect<T: Real>(m: &ComplexMatrix<T>) -> T {
    max_abs_diff(m, &m.adjoint())
}

pub fn is_finite<T: Real>(m: &ComplexMatrix<T>) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `max |U U† - I|`.
pub fn unitarity_defect<T: Real>(u: &ComplexMatrix<T>) -> T {
    if !u.is_square() {
        return T::max_value().unwrap_or_else(T::one);
    }
    max_abs_diff(&(u * u.adjoint()), &identity(u.nrows()))
}

/// Ascending eigenvalues of the Hermitian part of `m`.
pub fn hermitian_eigenvalues<T: Real>(m: &ComplexMatrix<T>) -> Vec<T> {
    let half = real(T::lit(0.5));
    let h = (m + m.adjoint()) * half;
    let mut ev: Vec<T> = h.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ev
}

/// Trace norm of the Hermitian part, `Σ |λ_i|`.
pub fn hermitian_trace_norm<T: Real>(m: &ComplexMatrix<T>) -> T {
    hermitian_eigenvalues(m)
        .into_iter()
        .fold(T::zero(), |acc, x| acc + x.abs())
}

/// `½ Σ |eig(a - b)|` on raw Hermitian matrices.
pub fn trace_distance_matrices<T: Real>(a: &ComplexMatrix<T>, b: &ComplexMatrix<T>) -> Result<T> {
    if a.shape() != b.shape() {
        return Err(Error::Dimension(format!(
            "trace distance between {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(hermitian_trace_norm(&(a - b)) * T::lit(0.5))
}

/// Trace distance between two (possibly subnormalized) states.
pub fn trace_distance<T: Real>(a: &SubnormalizedState<T>, b: &SubnormalizedState<T>) -> Result<T> {
    trace_distance_matrices(a.matrix(), b.matrix())
}

/// Column-stacking vectorization.
pub fn vectorize<T: Real>(m: &ComplexMatrix<T>) -> DVector<Complex<T>> {
    DVector::from_column_slice(m.as_slice())
}

/// Inverse of [`vectorize`] for a `rows x cols` matrix.
pub fn unvectorize<T: Real>(v: &DVector<Complex<T>>, rows: usize, cols: usize) -> ComplexMatrix<T> {
    ComplexMatrix::from_column_slice(rows, cols, v.as_slice())
}

/// Rank by singular values above `tol * σ_max`.
pub fn numerical_rank<T: Real>(m: &ComplexMatrix<T>, tol: T) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let smax = sv.iter().fold(T::zero(), |a, &b| a.max(b));
    if smax <= T::zero() {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

fn check_square<T: Real>(m: &ComplexMatrix<T>, what: &str) -> Result<usize> {
    if !m.is_square() || m.nrows() == 0 {
        return Err(Error::Dimension(format!(
            "{what} must be square and non-empty, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.nrows() > MAX_JOINT_DIM {
        return Err(Error::Dimension(format!(
            "{what} dimension {} exceeds the supported maximum {MAX_JOINT_DIM}",
            m.nrows()
        )));
    }
    if !is_finite(m) {
        return Err(Error::InvalidState(format!(
            "{what} has non-finite entries"
        )));
    }
    Ok(m.nrows())
}

/// Positive, unit-trace Hermitian matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix<T: Real = f64> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> DensityMatrix<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        Self::with_tolerance(matrix, T::validation_tolerance())
    }

    pub fn with_tolerance(matrix: ComplexMatrix<T>, tol: T) -> Result<Self> {
        check_square(&matrix, "density matrix")?;
        let herm = hermiticity_defect(&matrix);
        if herm > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {:e})",
                herm.as_f64()
            )));
        }
        let tr = matrix.trace();
        if (tr.re - T::one()).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!(
                "trace {} + {}i differs from 1",
                tr.re.as_f64(),
                tr.im.as_f64()
            )));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                min.as_f64()
            )));
        }
        Ok(Self { matrix })
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self {
            matrix: identity::<T>(d) * real(T::one() / T::from_usize(d).unwrap()),
        }
    }

    /// `|ψ⟩⟨ψ|` for a vector normalised here.
    pub fn pure(psi: &DVector<Complex<T>>) -> Result<Self> {
        let n = psi.norm();
        if n <= T::zero() {
            return Err(Error::InvalidState("zero state vector".into()));
        }
        let v = psi.map(|z| z / real(n));
        Self::new(outer(&v))
    }

    /// Qubit state with Bloch vector `(x, y, z)` in the σ_z basis.
    pub fn from_bloch(x: T, y: T, z: T) -> Result<Self> {
        let half = T::lit(0.5);
        let one = T::one();
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                real((one + z) * half),
                Complex::new(x * half, -y * half),
                Complex::new(x * half, y * half),
                real((one - z) * half),
            ],
        );
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }

    /// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)`; qubits only.
    pub fn bloch(&self) -> Result<[T; 3]> {
        bloch_vector(&self.matrix)
    }
}

/// `(tr σx ρ, tr σy ρ, tr σz ρ)` for any 2x2 operator.
pub fn bloch_vector<T: Real>(m: &ComplexMatrix<T>) -> Result<[T; 3]> {
    if m.shape() != (2, 2) {
        return Err(Error::Dimension(format!(
            "Bloch vector needs a 2x2 matrix, got {:?}",
            m.shape()
        )));
    }
    let x = (pauli_x::<T>() * m).trace().re;
    let y = (pauli_y::<T>() * m).trace().re;
    let z = (pauli_z::<T>() * m).trace().re;
    Ok([x, y, z])
}

/// Positive operator with trace in `[0, 1]`; its trace is the probability
/// of the conditioning event.
#[derive(Debug, Clone, PartialEq)]
pub struct SubnormalizedState<T: Real = f64> {
    matrix: ComplexMatrix<T>,
}

impl<T: Real> SubnormalizedState<T> {
    pub fn new(matrix: ComplexMatrix<T>) -> Result<Self> {
        let tol = T::validation_tolerance();
        check_square(&matrix, "subnormalized state")?;
        let herm = hermiticity_defect(&matrix);
        if herm > tol {
            return Err(Error::InvalidState(format!(
                "not Hermitian (defect {:e})",
                herm.as_f64()
            )));
        }
        let tr = matrix.trace().re;
        if tr < -tol || tr > T::one() + tol {
            return Err(Error::InvalidState(format!(
                "trace {} outside [0, 1]",
                tr.as_f64()
            )));
        }
        let min = hermitian_eigenvalues(&matrix)[0];
        if min < -tol {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {:e}",
                min.as_f64()
            )));
        }
        Ok(Self { matrix })
    }

    /// Wraps an evaluator output without re-validating it.
    pub(crate) fn from_trusted(matrix: ComplexMatrix<T>) -> Self {
        Self { matrix }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Trace, i.e. the probability of the realised outcomes.
    pub fn norm(&self) -> T {
        self.matrix.trace().re
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix<T> {
        self.matrix
    }
}

impl<T: Real> From<DensityMatrix<T>> for SubnormalizedState<T> {
    fn from(rho: DensityMatrix<T>) -> Self {
        Self { matrix: rho.matrix }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bell() -> ComplexMatrix {
        let mut v = DVector::zeros(4);
        v[0] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        v[3] = c(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        outer(&v)
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let i2 = identity::<f64>(2);
        assert_eq!(tensor_product(&i2, &i2), identity(4));
    }

    #[test]
    fn sigma_z_tensor_identity() {
        let m = tensor_product(&pauli_z::<f64>(), &identity(2));
        let expected = ComplexMatrix::from_diagonal(&DVector::from_vec(vec![
            c(1., 0.),
            c(1., 0.),
            c(-1., 0.),
            c(-1., 0.),
        ]));
        assert_eq!(m, expected);
    }

    #[test]
    fn basis_product_is_01() {
        let m = tensor_product(&matrix_unit::<f64>(2, 0, 0), &matrix_unit(2, 1, 1));
        assert_eq!(m, matrix_unit(4, 1, 1));
    }

    #[test]
    fn tensor_index_formula() {
        let a = ComplexMatrix::<f64>::from_fn(2, 3, |i, j| c(i as f64 + 1.0, j as f64));
        let b = ComplexMatrix::<f64>::from_fn(3, 2, |i, j| c(j as f64 - 2.0, i as f64 * 0.5));
        let ab = tensor_product(&a, &b);
        assert_eq!(ab.shape(), (6, 6));
        for i in 0..2 {
            for j in 0..3 {
                for k in 0..3 {
                    for l in 0..2 {
                        assert_eq!(ab[(i * 3 + k, j * 2 + l)], a[(i, j)] * b[(k, l)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let ra = DensityMatrix::<f64>::from_bloch(0.3, -0.2, 0.5).unwrap();
        let rb = DensityMatrix::<f64>::from_bloch(0.0, 0.6, -0.1).unwrap();
        let ab = tensor_product(ra.matrix(), rb.matrix());
        let a = partial_trace(&ab, (2, 2), Subsystem::A).unwrap();
        let b = partial_trace(&ab, (2, 2), Subsystem::B).unwrap();
        assert!(max_abs_diff(&a, ra.matrix()) < 1e-15);
        assert!(max_abs_diff(&b, rb.matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_of_bell_state_is_maximally_mixed() {
        let a = partial_trace(&bell(), (2, 2), Subsystem::A).unwrap();
        assert!(max_abs_diff(&a, DensityMatrix::<f64>::maximally_mixed(2).matrix()) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_bad_shape() {
        let m = identity::<f64>(5);
        assert!(matches!(
            partial_trace(&m, (2, 2), Subsystem::A),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn trace_distance_basics() {
        let up = DensityMatrix::<f64>::from_bloch(0., 0., 1.).unwrap().into();
        let down = DensityMatrix::<f64>::from_bloch(0., 0., -1.)
            .unwrap()
            .into();
        assert!(trace_distance(&up, &up).unwrap().abs() < 1e-15);
        assert!((trace_distance(&up, &down).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_dimension_mismatch() {
        let a = DensityMatrix::<f64>::maximally_mixed(2).into();
        let b = DensityMatrix::<f64>::maximally_mixed(3).into();
        assert!(matches!(trace_distance(&a, &b), Err(Error::Dimension(_))));
    }

    #[test]
    fn maximally_mixed_states_validate() {
        for d in [2, 3, 4, 8] {
            let m = identity::<f64>(d) * c(1.0 / d as f64, 0.0);
            assert!(DensityMatrix::new(m).is_ok(), "I/{d}");
        }
    }

    #[test]
    fn negative_eigenvalue_rejected() {
        let m =
            ComplexMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0 + 1e-6, 0.), c(-1e-6, 0.)]));
        assert!(matches!(
            DensityMatrix::<f64>::new(m),
            Err(Error::InvalidState(_))
        ));
    }

    #[test]
    fn non_hermitian_rejected() {
        let mut m = DensityMatrix::<f64>::maximally_mixed(2).into_matrix();
        m[(0, 1)] = c(0.1, 0.0);
        assert!(DensityMatrix::new(m).is_err());
    }

    #[test]
    fn rotation_matches_exponential() {
        // exp(-i π/4 σ_y) = cos(π/4) I - i sin(π/4) σ_y
        let u = rotation::<f64>([0., 1., 0.], std::f64::consts::FRAC_PI_2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let expected = identity::<f64>(2) * c(s, 0.) - pauli_y::<f64>() * c(0., s);
        assert!(max_abs_diff(&u, &expected) < 1e-15);
        assert!(unitarity_defect(&u) < 1e-15);
    }

    #[test]
    fn works_in_single_precision() {
        let ra = DensityMatrix::<f32>::from_bloch(0.3, 0.0, 0.5).unwrap();
        let rb = DensityMatrix::<f32>::maximally_mixed(2);
        let ab = tensor_product(ra.matrix(), rb.matrix());
        let a = partial_trace(&ab, (2, 2), Subsystem::A).unwrap();
        assert!(max_abs_diff(&a, ra.matrix()) < 1e-6);
        let d = trace_distance(&ra.clone().into(), &rb.into()).unwrap();
        assert!((d - 0.5 * (0.3f32.powi(2) + 0.25).sqrt()).abs() < 1e-5);
    }
}
