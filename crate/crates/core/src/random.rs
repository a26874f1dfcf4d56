//! Random states, unitaries and channels for property tests and fuzzing.

use nalgebra::{ComplexField, DVector};
use num_complex::Complex;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::Superoperator;
use crate::linalg::{
    matrix_unit, partial_trace, real, tensor_product, ComplexMatrix, DensityMatrix, Subsystem,
};
use crate::scalar::Real;

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex::new(T::lit(re), T::lit(im))
}

/// Ginibre matrix with i.i.d. standard complex normal entries.
pub fn ginibre<T: Real, R: Rng + ?Sized>(
    rows: usize,
    cols: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    ComplexMatrix::from_fn(rows, cols, |_, _| gaussian(rng))
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the phases of `R`
/// divided out).
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    let qr = ginibre::<T, R>(d, d, rng).qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        let rjj = r[(j, j)];
        let m = rjj.modulus();
        if m > T::zero() {
            let phase = rjj / real(m);
            let mut col = q.column_mut(j);
            col *= phase;
        }
    }
    q
}

pub fn random_pure_state<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<Complex<T>> {
    let v = DVector::from_fn(d, |_, _| gaussian::<T, R>(rng));
    let n = v.norm();
    v / real(n)
}

/// Full-rank random density matrix `GG† / tr(GG†)`.
pub fn random_density_matrix<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix<T> {
    let g = ginibre::<T, R>(d, d, rng);
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    DensityMatrix::new(m / real(tr)).expect("Wishart matrix is a valid state")
}

/// Random CPTP map via a Haar unitary on system ⊗ ancilla (ancilla dimension
/// equal to the system's, ancilla starting in `|0⟩`).
pub fn random_cptp<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Superoperator<T> {
    let u = haar_unitary::<T, R>(d * d, rng);
    stinespring(&u, d, d)
}

/// `ρ ↦ tr_anc[U (ρ ⊗ |0⟩⟨0|) U†]` for a unitary on `C^d ⊗ C^anc`.
pub fn stinespring<T: Real>(u: &ComplexMatrix<T>, d: usize, anc: usize) -> Superoperator<T> {
    let env0 = matrix_unit::<T>(anc, 0, 0);
    Superoperator::from_linear_map(d, d, true, true, |m| {
        let joint = tensor_product(m, &env0);
        partial_trace(&(u * joint * u.adjoint()), (d, anc), Subsystem::A).expect("dimensions agree")
    })
    .expect("dimensions agree")
}

/// Random mixture of `count` unitary channels.
pub fn random_unital<T: Real, R: Rng + ?Sized>(
    d: usize,
    count: usize,
    rng: &mut R,
) -> Superoperator<T> {
    let weights: Vec<f64> = (0..count).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let kraus: Vec<ComplexMatrix<T>> = weights
        .iter()
        .map(|w| haar_unitary::<T, R>(d, rng) * real(T::lit((w / total).sqrt())))
        .collect();
    Superoperator::from_kraus(&kraus).expect("non-empty")
}

/// Uniformly random permutation matrix times random diagonal phases.
pub fn monomial_unitary<T: Real, R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix<T> {
    let mut perm: Vec<usize> = (0..d).collect();
    for i in (1..d).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut u = ComplexMatrix::zeros(d, d);
    for (col, &row) in perm.iter().enumerate() {
        let phi: f64 = rng.random::<f64>() * std::f64::consts::TAU;
        u[(row, col)] = Complex::new(T::lit(phi.cos()), T::lit(phi.sin()));
    }
    u
}

/// Random column-stochastic matrix with every entry at least `floor`.
pub fn random_stochastic<R: Rng + ?Sized>(
    d: usize,
    floor: f64,
    rng: &mut R,
) -> nalgebra::DMatrix<f64> {
    let mut a = nalgebra::DMatrix::zeros(d, d);
    for j in 0..d {
        let raw: Vec<f64> = (0..d).map(|_| rng.random::<f64>()).collect();
        let s: f64 = raw.iter().sum();
        for i in 0..d {
            a[(i, j)] = floor + (1.0 - floor * d as f64) * raw[i] / s;
        }
    }
    a
}

/// `Σ_r |π(r)⟩⟨r| ⊗ V_r` on `C^ds ⊗ C^de`: a random permutation of system
/// basis states, each steering the environment with its own Haar unitary.
/// Never turns system populations into coherences or back.
pub fn block_monomial_unitary<T: Real, R: Rng + ?Sized>(
    ds: usize,
    de: usize,
    rng: &mut R,
) -> ComplexMatrix<T> {
    let perm = monomial_unitary::<T, R>(ds, rng);
    let mut u = ComplexMatrix::zeros(ds * de, ds * de);
    for col in 0..ds {
        let row = (0..ds)
            .find(|&r| perm[(r, col)] != Complex::new(T::zero(), T::zero()))
            .expect("one entry per column");
        let v = haar_unitary::<T, R>(de, rng) * perm[(row, col)];
        u.view_mut((row * de, col * de), (de, de)).copy_from(&v);
    }
    u
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unitarity_defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn haar_unitaries_are_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in 1..6 {
            assert!(unitarity_defect(&haar_unitary::<f64, _>(d, &mut rng)) < 1e-13);
        }
    }

    #[test]
    fn random_channels_are_cptp() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in [2, 3] {
            for _ in 0..20 {
                let ch = random_cptp::<f64, _>(d, &mut rng);
                assert!(ch.is_cp(1e-9), "Choi min {}", ch.choi_min_eigenvalue());
                assert!(ch.is_tp(1e-10));
                let rho = random_density_matrix::<f64, _>(d, &mut rng);
                let out = ch.apply(rho.matrix()).unwrap();
                assert!((out.trace().re - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn block_monomial_is_unitary_and_keeps_populations_apart() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let u = block_monomial_unitary::<f64, _>(3, 2, &mut rng);
        assert!(unitarity_defect(&u) < 1e-13);
        // |r⟩⊗|e⟩ lands in a single system block
        for col in 0..6 {
            let blocks: Vec<usize> = (0..6)
                .filter(|&r| u[(r, col)].norm() > 1e-14)
                .map(|r| r / 2)
                .collect();
            assert!(blocks.windows(2).all(|w| w[0] == w[1]));
        }
    }

    #[test]
    fn monomial_and_stochastic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = monomial_unitary::<f64, _>(4, &mut rng);
        assert!(unitarity_defect(&u) < 1e-14);
        let a = random_stochastic(3, 0.05, &mut rng);
        for j in 0..3 {
            assert!((a.column(j).sum() - 1.0).abs() < 1e-14);
            assert!(a.column(j).iter().all(|&x| x >= 0.05 - 1e-15));
        }
    }
}
