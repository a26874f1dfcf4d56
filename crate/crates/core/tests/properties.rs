//! Property tests for the invariants the checkers rely on.

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use qclassical::channel::compose;
use qclassical::check::{check_classicality, PreparationSet};
use qclassical::io::{matrix_from_doc, matrix_to_doc, ProcessDocument};
use qclassical::linalg::{
    c, max_abs_diff, partial_trace, tensor_product, trace_distance_matrices, ComplexMatrix,
    Subsystem,
};
use qclassical::models::dephasing::{
    dephased_trajectory_exact, ncgd_prediction, one_sided_limits, DephasingModelParams,
};
use qclassical::random::{
    block_monomial_unitary, haar_unitary, random_cptp, random_density_matrix,
};
use qclassical::{DilatedProcess, Intervention, MarkovProcess, Observable, Process, TimeGrid};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_matrix(rows: usize, cols: usize) -> impl Strategy<Value = ComplexMatrix> {
    proptest::collection::vec((-2.0..2.0f64, -2.0..2.0f64), rows * cols).prop_map(move |v| {
        ComplexMatrix::from_fn(rows, cols, |i, j| c(v[i * cols + j].0, v[i * cols + j].1))
    })
}

/// Random dilated qubit process over three steps; `haar_share` of the steps
/// are generic, the rest never mix populations with coherences.
fn dilated(seed: u64, haar_share: f64) -> Process {
    use rand::Rng;
    let mut r = rng(seed);
    let us = (0..3)
        .map(|_| {
            if r.random_bool(haar_share) {
                haar_unitary(4, &mut r)
            } else {
                block_monomial_unitary(2, 2, &mut r)
            }
        })
        .collect();
    let initial = random_density_matrix(4, &mut r);
    DilatedProcess::new(2, 2, initial, us, TimeGrid::uniform(3, 1.0).unwrap())
        .unwrap()
        .into()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tensor_product_is_associative(
        a in complex_matrix(2, 3),
        b in complex_matrix(2, 2),
        cm in complex_matrix(3, 1),
    ) {
        let left = tensor_product(&tensor_product(&a, &b), &cm);
        let right = tensor_product(&a, &tensor_product(&b, &cm));
        prop_assert!(max_abs_diff(&left, &right) < 1e-12);
    }

    #[test]
    fn partial_trace_of_product(seed: u64, da in 1usize..4, db in 1usize..4) {
        let mut r = rng(seed);
        let a = random_density_matrix::<f64, _>(da, &mut r);
        let b = random_density_matrix::<f64, _>(db, &mut r);
        let joint = tensor_product(a.matrix(), b.matrix());
        let keep_a = partial_trace(&joint, (da, db), Subsystem::A).unwrap();
        let keep_b = partial_trace(&joint, (da, db), Subsystem::B).unwrap();
        prop_assert!(max_abs_diff(&keep_a, a.matrix()) < 1e-13);
        prop_assert!(max_abs_diff(&keep_b, b.matrix()) < 1e-13);
    }

    #[test]
    fn trace_distance_is_a_metric(seed: u64, d in 1usize..5) {
        let mut r = rng(seed);
        let [x, y, z] = [0; 3].map(|_| random_density_matrix::<f64, _>(d, &mut r).into_matrix());
        let dxy = trace_distance_matrices(&x, &y).unwrap();
        let dyz = trace_distance_matrices(&y, &z).unwrap();
        let dxz = trace_distance_matrices(&x, &z).unwrap();
        prop_assert!(dxz <= dxy + dyz + 1e-13);
        prop_assert!((dxy - trace_distance_matrices(&y, &x).unwrap()).abs() < 1e-14);
        prop_assert!(trace_distance_matrices(&x, &x).unwrap().abs() < 1e-14);
        prop_assert!((-1e-14..=1.0 + 1e-14).contains(&dxy));
    }

    #[test]
    fn composed_channels_stay_cptp_and_contract(seed: u64, d in 2usize..4) {
        let mut r = rng(seed);
        let a = random_cptp::<f64, _>(d, &mut r);
        let b = random_cptp::<f64, _>(d, &mut r);
        let ab = compose(&a, &b).unwrap();
        prop_assert!(ab.is_cp(1e-9) && ab.is_tp(1e-10));
        let x = random_density_matrix::<f64, _>(d, &mut r).into_matrix();
        let y = random_density_matrix::<f64, _>(d, &mut r).into_matrix();
        let before = trace_distance_matrices(&x, &y).unwrap();
        let after = trace_distance_matrices(&ab.apply(&x).unwrap(), &ab.apply(&y).unwrap()).unwrap();
        prop_assert!(after <= before + 1e-12);
    }

    /// Arbitrary finite doubles, including subnormals and signed zeros,
    /// survive a trip through JSON unchanged.
    #[test]
    fn json_matrices_round_trip_bit_exactly(
        bits in proptest::collection::vec(any::<u64>(), 8),
    ) {
        let vals: Vec<f64> = bits
            .iter()
            .map(|&b| f64::from_bits(b))
            .map(|x| if x.is_finite() { x } else { 1.0 })
            .collect();
        let m = ComplexMatrix::from_fn(2, 2, |i, j| c(vals[2 * (2 * i + j)], vals[2 * (2 * i + j) + 1]));
        let text = serde_json::to_string(&matrix_to_doc(&m)).unwrap();
        let back = matrix_from_doc(&serde_json::from_str(&text).unwrap()).unwrap();
        for (x, y) in m.iter().zip(back.iter()) {
            prop_assert_eq!(x.re.to_bits(), y.re.to_bits());
            prop_assert_eq!(x.im.to_bits(), y.im.to_bits());
        }
    }

    #[test]
    fn process_documents_round_trip(seed: u64, d in 2usize..4) {
        let mut r = rng(seed);
        let maps = (0..3).map(|_| random_cptp(d, &mut r)).collect();
        let mk = MarkovProcess::new(
            random_density_matrix(d, &mut r),
            maps,
            TimeGrid::new(vec![0.0, 0.1, 0.35, 1.0]).unwrap(),
        )
        .unwrap();
        let process = Process::Markov(mk);
        let obs = Observable::computational(d);
        let prep = PreparationSet::Single(Intervention::Map(random_cptp(d, &mut r)));
        let doc = ProcessDocument::from_model(&process, &obs, &prep, None);
        let loaded = ProcessDocument::from_json(&doc.to_json()).unwrap().load().unwrap();
        prop_assert_eq!(loaded.process, process);
        prop_assert_eq!(loaded.observable, obs);
        prop_assert_eq!(loaded.preparations, prep);
    }

    /// Fewer measurement times mean fewer consistency conditions, so the
    /// worst violation can only shrink.
    #[test]
    fn classicality_is_monotone_in_the_time_set(seed: u64, haar_share in 0.0..0.6f64) {
        let process = dilated(seed, haar_share);
        let obs = Observable::sigma_z();
        let prep = Intervention::Identity;
        let full = check_classicality(&process, &obs, &prep, &[1, 2, 3], 1e-9).unwrap();
        for subset in [&[1, 2][..], &[1, 3], &[2, 3], &[2], &[3]] {
            let sub = check_classicality(&process, &obs, &prep, subset, 1e-9).unwrap();
            prop_assert!(sub.max_violation <= full.max_violation + 1e-15, "{subset:?}");
            if full.holds {
                prop_assert!(sub.holds);
            }
        }
    }

    /// Joint outcome probabilities at every set of times form a
    /// distribution.
    #[test]
    fn outcome_probabilities_sum_to_one(seed: u64) {
        let process = dilated(seed, 1.0);
        let obs = [Observable::sigma_z()];
        let mut total = 0.0;
        for r1 in 0..2 {
            for r3 in 0..2 {
                let p = process
                    .joint_probability(&obs, 0, &Intervention::Identity, &[(1, r1), (3, r3)])
                    .unwrap();
                prop_assert!(p >= -1e-15);
                total += p;
            }
        }
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    /// The divisible prediction does not know about the measurement.
    #[test]
    fn ncgd_prediction_ignores_measurement_time(
        g in 0.0..3.0f64,
        gamma in 0.01..3.0f64,
        s1 in 0.0..5.0f64,
        s2 in 0.0..5.0f64,
        x0 in -1.0..1.0f64,
        t in 0.0..10.0f64,
    ) {
        let p1 = DephasingModelParams::new(g, gamma, s1, x0).unwrap();
        let p2 = DephasingModelParams::new(g, gamma, s2, x0).unwrap();
        prop_assert_eq!(ncgd_prediction(&p1, t), ncgd_prediction(&p2, t));
        // finite-difference derivative in s is exactly zero
        let p3 = DephasingModelParams::new(g, gamma, s1 + 1e-3, x0).unwrap();
        prop_assert_eq!((ncgd_prediction(&p3, t) - ncgd_prediction(&p1, t)) / 1e-3, 0.0);
    }

    #[test]
    fn trajectory_is_continuous_around_twice_the_measurement_time(
        g in 0.1..3.0f64,
        gamma in 0.1..3.0f64,
        s in 0.1..4.0f64,
        x0 in -1.0..1.0f64,
    ) {
        let p = DephasingModelParams::new(g, gamma, s, x0).unwrap();
        let (below, above) = one_sided_limits(&p);
        prop_assert!((below - above).abs() <= 1e-15 * below.abs().max(1e-300) + 1e-300);
        let eps = 1e-9 * s;
        let l = dephased_trajectory_exact(&p, 2.0 * s - eps).unwrap();
        let r = dephased_trajectory_exact(&p, 2.0 * s + eps).unwrap();
        prop_assert!((l - below).abs() < 1e-7 && (r - above).abs() < 1e-7);
        // and at s itself the measurement leaves x unchanged
        let before = dephased_trajectory_exact(&p, s - eps).unwrap();
        let at = dephased_trajectory_exact(&p, s).unwrap();
        prop_assert!((before - at).abs() < 1e-7);
    }
}
