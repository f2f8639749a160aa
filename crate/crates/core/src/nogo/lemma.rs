//! Measuring an approximation ρ of a pure state ψ with a binary projective test.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::matrix::{CMatrix, C64};
use crate::qcore::random::{random_density, random_orthogonal_to, random_orthonormal, random_unit_vector, superpose, orthonormalize_against};
use crate::qcore::{DensityMatrix, DimTag, PureState, QuantumState};

/// p₁p₂ − 2√((1−p₁)(1−p₂)). Not clamped: the value can be negative.
pub fn lemma_bound(p1: f64, p2: f64) -> Result<f64> {
    for (name, v) in [("p1", p1), ("p2", p2)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { name, value: v });
        }
    }
    Ok(p1 * p2 - 2.0 * ((1.0 - p1) * (1.0 - p2)).sqrt())
}

/// A state ψ, an approximation ρ, and a projector Π.
#[derive(Clone, Debug, PartialEq)]
pub struct LemmaTriple {
    pub psi: PureState,
    pub rho: DensityMatrix,
    pub pi: CMatrix,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaSample {
    /// ⟨ψ|ρ|ψ⟩
    pub p1: f64,
    /// ⟨ψ|Π|ψ⟩
    pub p2: f64,
    /// tr(Πρ)
    pub accept: f64,
    pub bound: f64,
}

impl LemmaSample {
    pub fn slack(&self) -> f64 {
        self.accept - self.bound
    }
}

impl LemmaTriple {
    pub fn evaluate(&self) -> Result<LemmaSample> {
        let clamp = |x: f64| x.clamp(0.0, 1.0);
        let p1 = clamp(self.rho.fidelity_with(&self.psi)?);
        let v = self.psi.amplitudes();
        let p2 = clamp(crate::qcore::matrix::inner(v, &self.pi.mul_vec(v)).re);
        let accept = self.rho.expectation(&self.pi)?.re;
        Ok(LemmaSample { p1, p2, accept, bound: lemma_bound(p1, p2)? })
    }
}

/// Random triple in dimension `dim`. ρ is ψ mixed with a random state, and
/// half the time Π contains a direction tilted from ψ, so that both p₁ and p₂
/// are often large and the bound is not vacuous.
pub fn random_lemma_triple<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> LemmaTriple {
    let tag = DimTag::Qudit(dim);
    let psi = random_unit_vector(dim, rng);
    let sigma = random_density(tag.clone(), rng.random_range(1..=dim), rng);
    let t = rng.random::<f64>().powi(2);
    let pure = CMatrix::outer(&psi, &psi);
    let mixed = &pure.scale(C64::new(1.0 - t, 0.0)) + &sigma.matrix().scale(C64::new(t, 0.0));
    let rho = DensityMatrix::from_parts(mixed, tag.clone());

    let rank = rng.random_range(1..dim.max(2));
    let vecs = if rng.random::<bool>() {
        let a = rng.random_range(0.0..std::f64::consts::FRAC_PI_2);
        let phi = random_orthogonal_to(&psi, rng);
        let lead = superpose(C64::new(a.cos(), 0.0), &psi, C64::new(a.sin(), 0.0), &phi);
        let mut vs = vec![lead];
        while vs.len() < rank {
            let g = random_unit_vector(dim, rng);
            if let Some(w) = orthonormalize_against(&g, &vs) {
                vs.push(w);
            }
        }
        vs
    } else {
        random_orthonormal(dim, rank, rng)
    };
    let mut pi = CMatrix::zeros(dim, dim);
    for v in &vecs {
        pi = &pi + &CMatrix::outer(v, v);
    }
    LemmaTriple { psi: PureState::from_parts(psi, tag), rho, pi }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    #[test]
    fn bound_examples() {
        assert_eq!(lemma_bound(1.0, 1.0).unwrap(), 1.0);
        assert!((lemma_bound(0.9, 0.9).unwrap() - 0.61).abs() < 1e-12);
        assert_eq!(lemma_bound(1.0, 0.3).unwrap(), 0.3);
        assert!(lemma_bound(0.0, 0.0).unwrap() < 0.0);
        assert!(matches!(lemma_bound(1.1, 0.5), Err(Error::OutOfRange { name: "p1", .. })));
        assert!(matches!(lemma_bound(0.5, -0.1), Err(Error::OutOfRange { name: "p2", .. })));
    }

    #[test]
    fn exact_state_gives_p2() {
        let mut rng = stream(1);
        let mut t = random_lemma_triple(4, &mut rng);
        t.rho = t.psi.density();
        let s = t.evaluate().unwrap();
        assert!((s.p1 - 1.0).abs() < 1e-12);
        assert!((s.accept - s.p2).abs() < 1e-12);
    }

    #[test]
    fn inequality_on_random_triples() {
        let mut rng = stream(2);
        let mut informative = 0;
        for i in 0..500 {
            let s = random_lemma_triple(2 + i % 5, &mut rng).evaluate().unwrap();
            assert!(s.slack() >= -1e-9, "{s:?}");
            informative += (s.bound > 0.0) as usize;
        }
        assert!(informative > 50);
    }
}
