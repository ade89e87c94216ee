use junta_core::hypercube::{fourier_dense, fourier_transform, inverse_transform, CubeFunction};
use junta_core::linalg::ComplexMatrix;
use junta_core::qstate::{
    embed_junta, frobenius_distance, junta_projection, partial_trace, pauli_expand, pauli_reconstruct, proxy_distance,
    random_state, trace_distance, JuntaStateDescriptor,
};
use junta_core::state_learn::psd_project;
use num_complex::Complex;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_hermitian(n: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix<f64> {
    let d = 1 << n;
    let data = (0..d * d)
        .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    ComplexMatrix::from_vec(d, data).unwrap().hermitian_part()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn function_parseval_and_round_trip(n in 0usize..=10, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let f = CubeFunction::new(n, (0..1 << n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap();
        let energy: f64 = fourier_dense(&f).iter().map(|c| c * c).sum();
        prop_assert!((energy - f.mean_square()).abs() < 1e-10);
        let back = inverse_transform(&fourier_transform(&f));
        for (a, b) in back.values().iter().zip(f.values()) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_parseval_and_round_trip(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = random_hermitian(n, &mut rng);
        let spec = pauli_expand(&m).unwrap();
        let fro = m.frobenius_norm();
        prop_assert!((spec.sum_squares() - fro * fro / f64::from(1u32 << n)).abs() < 1e-10);
        prop_assert!(pauli_reconstruct(&spec).unwrap().max_abs_diff(&m) < 1e-10);
    }

    #[test]
    fn trace_norm_is_bounded_by_scaled_frobenius(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_state::<f64, _>(n, 1 + (seed as usize) % (1 << n), &mut rng).unwrap();
        let b = random_state::<f64, _>(n, 1 << n, &mut rng).unwrap();
        let tr = trace_distance(&a, &b).unwrap();
        let fr = frobenius_distance(&a, &b).unwrap();
        prop_assert!(tr <= 2f64.powf(n as f64 / 2.0) * fr + 1e-12);
        prop_assert!(fr <= tr + 1e-12);
    }

    #[test]
    fn embedding_after_tracing_is_idempotent(n in 1usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = rng.gen_range(0..=n);
        let mut qubits: Vec<usize> = (0..n).collect();
        rand::seq::SliceRandom::shuffle(qubits.as_mut_slice(), &mut rng);
        qubits.truncate(k);
        let block = random_state::<f64, _>(k, 1 << k, &mut rng).unwrap();
        let rho = embed_junta(&JuntaStateDescriptor { n, qubits: qubits.clone(), state: block.clone() }).unwrap();
        prop_assert!(partial_trace(&rho, &qubits).unwrap().matrix().max_abs_diff(block.matrix()) < 1e-12);
        let again = junta_projection(&rho, &qubits).unwrap();
        prop_assert!(again.matrix().max_abs_diff(rho.matrix()) < 1e-12);
    }

    #[test]
    fn proxy_distance_is_within_twice_any_junta(n in 2usize..=4, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state::<f64, _>(n, 2, &mut rng).unwrap();
        let (_, proxy) = proxy_distance(&rho, 1).unwrap();
        for q in 0..n {
            let block = random_state::<f64, _>(1, 2, &mut rng).unwrap();
            let sigma = embed_junta(&JuntaStateDescriptor { n, qubits: vec![q], state: block }).unwrap();
            prop_assert!(proxy <= 2.0 * trace_distance(&rho, &sigma).unwrap() + 1e-10);
        }
    }

    #[test]
    fn psd_projection_at_most_doubles_the_error(n in 1usize..=3, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rho = random_state::<f64, _>(n, 1, &mut rng).unwrap();
        // traceless Hermitian perturbation
        let mut noise = random_hermitian(n, &mut rng).scale(0.2);
        let shift = noise.trace().re / f64::from(1u32 << n);
        for i in 0..noise.dim() {
            noise[(i, i)].re -= shift;
        }
        let noisy = rho.matrix() + &noise;
        let projected = psd_project(&noisy).unwrap();
        let raw = trace_distance(&noisy, rho.matrix()).unwrap();
        prop_assert!(trace_distance(&projected, &rho).unwrap() <= 2.0 * raw + 1e-10);
    }
}
