use nogolab_core::complexity::{acceptance_operator, composition_fidelity, generate_rohc, rohc_verify, TruthKind};
use nogolab_core::crypto::Ciphertext;
use nogolab_core::harness::{chi_square, ExperimentReport};
use nogolab_core::nogo::tasks::index_width;
use nogolab_core::nogo::{lemma_bound, telegraph_clone_bound, Bits};
use nogolab_core::nogo::lemma::random_lemma_triple;
use nogolab_core::parallel::map_trials;
use nogolab_core::qcore::matrix::inner;
use nogolab_core::qcore::random::{random_density, random_unit_vector};
use nogolab_core::qcore::{bottom_index, DimTag, PureState, Subsystem, ZERO};
use nogolab_core::rng::stream;
use nogolab_core::scheme::{full_cloning_oracle, preimage_states, ClassicalFunction, SizeLimits};
use nogolab_core::{Execution, SeedTree};
use proptest::prelude::*;
use rand::Rng;

fn table(m: usize, n: usize) -> impl Strategy<Value = ClassicalFunction> {
    proptest::collection::vec(0u32..(1 << n), 1 << m).prop_map(move |t| ClassicalFunction::new(m, n, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn report_json_round_trips(
        metrics in proptest::collection::btree_map("[a-z_]{1,8}", prop_oneof![any::<f64>().prop_filter("finite", |x| x.is_finite()), Just(f64::NAN), Just(f64::INFINITY)], 0..8),
        seed in any::<u64>(),
    ) {
        let mut r = ExperimentReport::new("x", seed);
        for (k, v) in &metrics {
            r.metric(k, *v);
        }
        if let Some(k) = metrics.keys().next() {
            r.check_at_most("c", k, 0.5);
        }
        let back = ExperimentReport::from_json(&r.to_json()).unwrap();
        let bits = |r: &ExperimentReport| r.metrics.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect::<Vec<_>>();
        prop_assert_eq!(bits(&r), bits(&back));
        prop_assert_eq!(r.passed, back.passed);
        prop_assert_eq!(r.seed, back.seed);
    }

    #[test]
    fn bits_round_trip(value in 0usize..4096, extra in 0usize..4) {
        let w = index_width(value + 1) + extra;
        let b = Bits::from_index(value, w);
        prop_assert_eq!(b.len(), w);
        prop_assert_eq!(b.to_index(), value);
    }

    #[test]
    fn lemma_inequality_holds(seed in any::<u64>(), dim in 2usize..7) {
        let s = random_lemma_triple(dim, &mut stream(seed)).evaluate().unwrap();
        prop_assert!(s.slack() >= -1e-9, "{s:?}");
    }

    #[test]
    fn composition_is_lemma_at_c_squared(c in 0.0f64..=1.0, f in 0.0f64..=1.0) {
        let a = composition_fidelity(c, f).unwrap();
        let b = lemma_bound(c * c, f).unwrap();
        prop_assert!((a - b).abs() <= 1e-15);
        prop_assert!(a <= c * c * f + 1e-15);
    }

    #[test]
    fn telegraph_bound_below_two_receives(eta in 0.0f64..=1.0) {
        prop_assert!(telegraph_clone_bound(eta) <= eta * eta + 1e-15);
    }

    #[test]
    fn cloning_oracle_invariants(f in (1usize..=3).prop_flat_map(|m| (Just(m), 1..=m)).prop_flat_map(|(m, n)| table(m, n))) {
        let c = full_cloning_oracle(&f);
        prop_assert!(c.unitarity_defect() <= 1e-9);
        prop_assert!(c.involution_defect() <= 1e-9);
        let bottom = PureState::bottom(f.m());
        let states = preimage_states(&f);
        for (i, (_, a)) in states.iter().enumerate() {
            prop_assert_eq!(a.amplitudes()[bottom_index(f.m())], ZERO);
            let out = c.matrix().mul_vec(a.tensor(&bottom).amplitudes());
            prop_assert!((inner(a.tensor(a).amplitudes(), &out).norm_sqr() - 1.0).abs() <= 1e-9);
            for (_, b) in &states[i + 1..] {
                prop_assert!(inner(a.amplitudes(), b.amplitudes()).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn chi_square_is_well_formed(counts in proptest::collection::vec(5u64..200, 2..8)) {
        let total: u64 = counts.iter().sum();
        let expected = vec![1.0 / counts.len() as f64; counts.len()];
        let min = expected[0] * total as f64;
        prop_assume!(min >= 5.0);
        let r = chi_square(&counts, &expected, total).unwrap();
        prop_assert!(r.statistic >= 0.0);
        prop_assert!((0.0..=1.0).contains(&r.p_value));
    }

    #[test]
    fn ciphertext_round_trips(id in proptest::collection::vec(any::<u8>(), 0..40), body in proptest::collection::vec(any::<u8>(), 1..64), nonce in proptest::collection::vec(any::<u8>(), 16)) {
        let c = Ciphertext { instance_id: id, body, nonce };
        prop_assert_eq!(Ciphertext::from_bytes(&c.to_bytes()).unwrap(), c);
    }

    #[test]
    fn ciphertext_parser_never_panics(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
        let _ = Ciphertext::from_bytes(&bytes);
    }

    #[test]
    fn partial_trace_keeps_unit_trace(seed in any::<u64>(), d1 in 1usize..5, d2 in 1usize..5, rank in 1usize..4) {
        let tag = DimTag::Qudit(d1).product(&DimTag::Qudit(d2));
        let rho = random_density(tag, rank, &mut stream(seed));
        for keep in [Subsystem::First, Subsystem::Second] {
            let t = rho.partial_trace(d1, d2, keep).unwrap().trace();
            prop_assert!((t - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn seeded_trials_are_order_independent(seed in any::<u64>(), trials in 1u64..64) {
        let f = |_: u64, s: SeedTree| s.stream().random::<u64>();
        let a = map_trials(trials, SeedTree::new(seed), Execution::Parallel, f);
        let b = map_trials(trials, SeedTree::new(seed), Execution::Sequential, f);
        prop_assert_eq!(&a, &b);
        let c = map_trials(trials + 1, SeedTree::new(seed), Execution::Sequential, f);
        prop_assert_eq!(&a[..], &c[..trials as usize]);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rohc_verify_is_a_quadratic_form(seed in any::<u64>(), yes in any::<bool>()) {
        let mut rng = stream(seed);
        let truth = if yes { TruthKind::Yes } else { TruthKind::No };
        let inst = generate_rohc(3, 1, truth, &SizeLimits::default(), &mut rng).unwrap();
        let a = acceptance_operator(&inst);
        let mut v = random_unit_vector(inst.aug_dim(), &mut rng);
        v[bottom_index(3)] = ZERO;
        let psi = PureState::normalized(v, DimTag::Augmented(3)).unwrap();
        let direct = rohc_verify(&inst, &psi).unwrap();
        let quad = inner(psi.amplitudes(), &a.matrix().mul_vec(psi.amplitudes())).re;
        prop_assert!((direct - quad).abs() <= 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&direct));
    }
}
