//! Library results against independent reference computations written here.

use nogolab_core::complexity::composition_fidelity;
use nogolab_core::harness::chi_square;
use nogolab_core::nogo::collisions::collision_runs;
use nogolab_core::nogo::{lemma_bound, telegraph_clone_bound};
use nogolab_core::qcore::matrix::inner;
use nogolab_core::qcore::random::random_unit_vector;
use nogolab_core::qcore::{operator_norm, CMatrix, PureState, C64};
use nogolab_core::rng::stream;
use nogolab_core::scheme::{full_cloning_oracle, preimage_states, sample_random_function, SizeLimits};

/// C_S acting on v as the swap |ψ,⊥⟩ ↔ |ψ,ψ⟩ for each ψ, identity elsewhere.
fn reference_clone(states: &[PureState], m: usize, v: &[C64]) -> Vec<C64> {
    let bottom = PureState::bottom(m);
    let mut out = v.to_vec();
    for psi in states {
        let a = psi.tensor(&bottom);
        let b = psi.tensor(psi);
        let (ca, cb) = (inner(a.amplitudes(), v), inner(b.amplitudes(), v));
        for (i, o) in out.iter_mut().enumerate() {
            *o += (cb - ca) * a.amplitudes()[i] + (ca - cb) * b.amplitudes()[i];
        }
    }
    out
}

#[test]
fn cloning_oracle_matches_swap_reference() {
    let mut rng = stream(21);
    for (m, n) in [(2, 1), (3, 1), (3, 2), (4, 2)] {
        let f = sample_random_function(m, n, &SizeLimits::default(), &mut rng).unwrap();
        let c = full_cloning_oracle(&f);
        let states: Vec<PureState> = preimage_states(&f).into_iter().map(|(_, s)| s).collect();
        for _ in 0..5 {
            let v = random_unit_vector(c.dim(), &mut rng);
            let got = c.matrix().mul_vec(&v);
            let want = reference_clone(&states, m, &v);
            let err = got.iter().zip(&want).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(err <= 1e-12, "m={m} n={n} err={err}");
        }
    }
}

#[test]
fn preimage_amplitudes_are_uniform() {
    let mut rng = stream(22);
    let f = sample_random_function(4, 2, &SizeLimits::default(), &mut rng).unwrap();
    for (z, psi) in preimage_states(&f) {
        let k = f.preimages(z).len() as f64;
        for (x, a) in psi.amplitudes().iter().enumerate() {
            let want = if x < 16 && f.eval(x) == z { 1.0 / k.sqrt() } else { 0.0 };
            assert!((a.norm() - want).abs() <= 1e-15);
        }
    }
}

#[test]
fn lemma_and_composition_worked_values() {
    // 0.81 − 2·√(0.1·0.1) = 0.61
    assert!((lemma_bound(0.9, 0.9).unwrap() - 0.61).abs() <= 1e-15);
    // 0.729 − 2·√(0.19·0.1)
    let want = 0.729 - 2.0 * (0.019f64).sqrt();
    assert!((composition_fidelity(0.9, 0.9).unwrap() - want).abs() <= 1e-15);
    assert!((want - 0.45332).abs() <= 1e-5);
    assert_eq!(lemma_bound(1.0, 1.0).unwrap(), 1.0);
    assert!(lemma_bound(1.5, 0.5).is_err());
}

#[test]
fn telegraph_and_collision_counts() {
    assert!((telegraph_clone_bound(1.0) - 4.0 / 27.0).abs() <= 1e-16);
    assert!((telegraph_clone_bound(0.5) - 4.0 / 216.0).abs() <= 1e-16);
    assert_eq!(collision_runs(4, 1.0).unwrap(), 32);
    assert_eq!(collision_runs(3, 0.25).unwrap(), 96);
}

#[test]
fn pearson_by_hand() {
    // Σ(O−E)²/E with E = 100
    let r = chi_square(&[130, 90, 90, 90], &[0.25; 4], 400).unwrap();
    assert!((r.statistic - 12.0).abs() <= 1e-12);
    let tail = chi3_tail(12.0);
    assert!((r.p_value - tail).abs() <= 1e-10, "{} vs {tail}", r.p_value);
}

/// Upper tail of χ² with 3 degrees of freedom: erfc(√(x/2)) + √(2x/π)·e^{−x/2}.
fn chi3_tail(x: f64) -> f64 {
    let s = (x / 2.0).sqrt();
    erfc(s) + (2.0 * x / std::f64::consts::PI).sqrt() * (-x / 2.0).exp()
}

/// erfc by its continued fraction, accurate to ~1e-14 for s ≥ 2.
fn erfc(s: f64) -> f64 {
    let mut f = 0.0;
    for k in (1..200).rev() {
        f = (k as f64 / 2.0) / (s + f);
    }
    (-s * s).exp() / std::f64::consts::PI.sqrt() / (s + f)
}

#[test]
fn operator_norm_of_rank_one() {
    let mut rng = stream(23);
    let u = random_unit_vector(6, &mut rng);
    let v = random_unit_vector(6, &mut rng);
    let a = CMatrix::outer(&u, &v).scale(C64::new(2.5, 0.0));
    assert!((operator_norm(&a) - 2.5).abs() <= 1e-12);
    assert_eq!(operator_norm(&CMatrix::zeros(4, 4)), 0.0);
}
