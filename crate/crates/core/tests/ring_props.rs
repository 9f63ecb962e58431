//! Property tests of the ring attractor.

mod common;

use proptest::prelude::*;
use ringrl::envs::ActionMapping;
use ringrl::ring::{
    build_kernels, circular_distance, decode_action, encode_actions, gaussian_input, rotate, settle,
    step_dynamics, RingAttractor, RingConfig, RingState, CONSTANT_ACTION_SIGMA,
};

fn small_config(n: usize) -> RingConfig {
    RingConfig {
        n_excitatory: n,
        ..RingConfig::default()
    }
}

proptest! {
    #[test]
    fn distance_is_symmetric_and_bounded(size in 1usize..100, a in 0usize..100, b in 0usize..100) {
        let (m, n) = (a % size, b % size);
        let d = circular_distance(m, n, size).unwrap();
        prop_assert_eq!(d, circular_distance(n, m, size).unwrap());
        prop_assert!(d <= size / 2);
        prop_assert_eq!(d == 0, m == n);
    }

    #[test]
    fn steps_keep_activity_nonnegative(
        v in prop::collection::vec(0.0f64..2.0, 16),
        u in 0.0f64..2.0,
        x in prop::collection::vec(-1.0f64..2.0, 16),
    ) {
        let c = small_config(16);
        let k = build_kernels(&c).unwrap();
        let mut s = RingState { v, u };
        for _ in 0..20 {
            s = step_dynamics(&s, &x, &k, &c).unwrap();
            prop_assert!(s.v.iter().all(|&v| v >= 0.0));
            prop_assert!(s.u >= 0.0);
        }
    }

    #[test]
    fn kernel_is_circulant(n in 2usize..40, width in 0.3f64..3.0, shift in 0usize..40) {
        let c = RingConfig { n_excitatory: n, excitatory_kernel_width: width, ..RingConfig::default() };
        let k = build_kernels(&c).unwrap();
        for m in 0..n {
            for j in 0..n {
                prop_assert_eq!(k.ee(m, j), k.ee((m + shift) % n, (j + shift) % n));
            }
        }
    }

    #[test]
    fn adding_a_constant_to_q_keeps_the_encoding(
        q in prop::collection::vec(-5.0f64..5.0, 8),
        shift in -10.0f64..10.0,
    ) {
        let mapping = ActionMapping::uniform(8);
        let sig = [CONSTANT_ACTION_SIGMA; 8];
        let a = encode_actions(&q, &sig, &mapping).unwrap();
        let shifted: Vec<f64> = q.iter().map(|v| v + shift).collect();
        let b = encode_actions(&shifted, &sig, &mapping).unwrap();
        for (a, b) in a.iter().zip(&b) {
            prop_assert!((a.amplitude - b.amplitude).abs() < 1e-9);
            prop_assert_eq!(a.center, b.center);
        }
    }

    #[test]
    fn decode_matches_nearest_slot(
        (n, actions) in prop::sample::select(vec![(64usize, 8usize), (32, 4), (16, 16), (24, 6), (60, 5)]),
        peak in 0usize..64,
    ) {
        let peak = peak % n;
        let mut s = RingState::zeros(n);
        for (i, v) in s.v.iter_mut().enumerate() {
            *v = 0.5 / (1.0 + i as f64);
        }
        s.v[peak] = 2.0;
        prop_assert_eq!(decode_action(&s, actions).unwrap(), common::decode_oracle(peak, n, actions));
    }
}

#[test]
fn rotating_the_input_rotates_the_fixed_point() {
    let c = small_config(32);
    let k = build_kernels(&c).unwrap();
    let mapping = ActionMapping::uniform(4);
    let signals = encode_actions(&[0.2, 0.9, 0.1, 0.4], &[0.4, 0.3, 0.6, 0.5], &mapping).unwrap();
    let x = gaussian_input(&signals, &c).unwrap();
    let base = settle(&RingState::zeros(32), &x, &k, &c).unwrap();
    assert!(base.converged);
    let base_action = decode_action(&base.state, 4).unwrap();
    for shift in 0..32 {
        let rotated = settle(&RingState::zeros(32), &rotate(&x, shift), &k, &c).unwrap();
        let expected = rotate(&base.state.v, shift);
        let err = rotated
            .state
            .v
            .iter()
            .zip(&expected)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-6, "shift {shift}: {err}");
        if shift % 8 == 0 {
            let moved = decode_action(&rotated.state, 4).unwrap();
            assert_eq!(moved, (base_action + shift / 8) % 4);
        }
    }
}

#[test]
fn permuted_mapping_follows_the_action() {
    let ring = RingAttractor::new(RingConfig::default()).unwrap();
    let mapping = ActionMapping::with_permutation(vec![3, 0, 6, 1, 7, 2, 5, 4]).unwrap();
    for a in 0..8 {
        let mut q = vec![0.0; 8];
        q[a] = 1.0;
        let d = ring.select(&q, &[CONSTANT_ACTION_SIGMA; 8], &mapping).unwrap();
        assert_eq!(d.action, a);
    }
}
