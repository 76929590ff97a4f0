use num_complex::Complex64;
use phaseopt::linalg;
use phaseopt::measure::{density, DensityMatrix, DiagonalState};
use phaseopt::optimal::{
    canonical_channel, extremal_check, preprocess, recover_state, smear, witness_pairing, CircleMeasure,
    CovariantChannelSpec,
};
use phaseopt::phasecore::{PhaseMatrix, DEFAULT_EPS_PSD};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn diagonal_state(max_levels: usize) -> impl Strategy<Value = DiagonalState> {
    prop::collection::vec(0.01f64..1.0, 1..=max_levels).prop_map(|w| DiagonalState::normalized(w).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn recovery_round_trip(state in diagonal_state(8)) {
        let phase = PhaseMatrix::state_generated(&state, 48).unwrap();
        let r = recover_state(&phase, 22, 1e-8).unwrap();
        for s in 0..state.support() {
            prop_assert!((r.state.weight(s) - state.weight(s)).abs() < 1e-9);
        }
    }

    #[test]
    fn witnesses_annihilate_every_projector(state in diagonal_state(4)) {
        let phase = PhaseMatrix::state_generated(&state, 24).unwrap();
        let eta = phase.gram_factor(1e-9);
        let report = extremal_check(&eta, 1e-9);
        prop_assert!(!report.extremal);
        let witness = report.witness.unwrap();
        let size: f64 = witness.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        prop_assert!(size > 0.5);
        let worst = witness_pairing(&eta, &witness).iter().map(|z| z.norm()).fold(0.0, f64::max);
        prop_assert!(worst < 1e-8);
    }

    #[test]
    fn channel_reproduces_statistics(state in diagonal_state(5), seed in 0u64..500) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase = PhaseMatrix::state_generated(&state, 12).unwrap();
        let rho = DensityMatrix::random(12, &mut rng);
        let out = canonical_channel(&phase).apply(&rho).unwrap();
        prop_assert!((out.trace().re - 1.0).abs() < 1e-12);
        prop_assert!(linalg::min_eigenvalue(out.matrix()) > -1e-10);
        let a = density(&phase, &rho, 64).unwrap();
        let b = density(&PhaseMatrix::canonical(12).unwrap(), &out, 64).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn preprocessing_yields_phase_matrices(seed in 0u64..500, env in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let spec = CovariantChannelSpec::random(8, 8, env, &mut rng);
        let phase = PhaseMatrix::example5(8).unwrap();
        let pre = preprocess(&phase, &spec).unwrap();
        prop_assert!(pre.validate(DEFAULT_EPS_PSD).passed());
    }

    #[test]
    fn convolution_order_does_not_matter(a in 0.0f64..6.3, b in 0.0f64..6.3, order in 1usize..5) {
        let nu = CircleMeasure::fejer(order, a);
        let mu = CircleMeasure::dirac(b);
        let m = PhaseMatrix::example5(10).unwrap();
        let x = smear(&smear(&m, &nu), &mu).to_matrix();
        let y = smear(&smear(&m, &mu), &nu).to_matrix();
        prop_assert!(linalg::max_abs_diff(&x, &y) < 1e-12);
        prop_assert!(linalg::max_abs_diff(&x, &smear(&m, &nu.convolve(&mu)).to_matrix()) < 1e-12);
    }
}

#[test]
fn identity_preprocessing_is_identity() {
    let phase = PhaseMatrix::chessboard(Complex64::new(0.2, 0.3), 9).unwrap();
    let same = preprocess(&phase, &CovariantChannelSpec::identity(9)).unwrap();
    assert!(linalg::max_abs_diff(&same.to_matrix(), &phase.to_matrix()) < 1e-14);
}
