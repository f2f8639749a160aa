//! Random states, unitaries, density matrices and projectors.

use rand::Rng;
use rand_distr::StandardNormal;

use super::matrix::{inner, norm, CMatrix, C64};
use super::state::{DensityMatrix, DimTag, PureState};

pub fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn gaussian_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    (0..dim).map(|_| gaussian(rng)).collect()
}

/// Haar-random unit vector.
pub fn random_unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v = gaussian_vector(dim, rng);
        let n = norm(&v);
        if n > 1e-12 {
            return v.into_iter().map(|a| a / n).collect();
        }
    }
}

pub fn random_state<R: Rng + ?Sized>(tag: DimTag, rng: &mut R) -> PureState {
    let v = random_unit_vector(tag.dim(), rng);
    PureState::from_parts(v, tag)
}

/// Orthonormalizes `v` against `basis` (two passes of Gram–Schmidt).
/// Returns `None` if nothing is left.
pub fn orthonormalize_against(v: &[C64], basis: &[Vec<C64>]) -> Option<Vec<C64>> {
    let mut w = v.to_vec();
    for _ in 0..2 {
        for b in basis {
            let c = inner(b, &w);
            for (x, y) in w.iter_mut().zip(b) {
                *x -= c * y;
            }
        }
    }
    let n = norm(&w);
    if n < 1e-10 {
        return None;
    }
    Some(w.into_iter().map(|a| a / n).collect())
}

/// `count` orthonormal vectors obtained from Gaussian draws.
pub fn random_orthonormal<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<Vec<C64>> {
    assert!(count <= dim, "cannot draw {count} orthonormal vectors in dimension {dim}");
    let mut out: Vec<Vec<C64>> = Vec::with_capacity(count);
    while out.len() < count {
        let g = gaussian_vector(dim, rng);
        if let Some(v) = orthonormalize_against(&g, &out) {
            out.push(v);
        }
    }
    out
}

/// Random unitary from Gram–Schmidt on Gaussian columns.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> CMatrix {
    let cols = random_orthonormal(dim, dim, rng);
    CMatrix::from_fn(dim, dim, |i, j| cols[j][i])
}

/// Random density matrix of the given rank with Dirichlet-like weights.
pub fn random_density<R: Rng + ?Sized>(tag: DimTag, rank: usize, rng: &mut R) -> DensityMatrix {
    let d = tag.dim();
    let rank = rank.clamp(1, d);
    let vecs = random_orthonormal(d, rank, rng);
    let weights: Vec<f64> = (0..rank).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(d, d);
    for (v, w) in vecs.iter().zip(&weights) {
        let outer = CMatrix::outer(v, v).scale(C64::new(w / total, 0.0));
        m = &m + &outer;
    }
    DensityMatrix::from_parts(m, tag)
}

/// Projector onto a random `rank`-dimensional subspace.
pub fn random_projector<R: Rng + ?Sized>(dim: usize, rank: usize, rng: &mut R) -> CMatrix {
    let vecs = random_orthonormal(dim, rank, rng);
    let mut m = CMatrix::zeros(dim, dim);
    for v in &vecs {
        m = &m + &CMatrix::outer(v, v);
    }
    m
}

/// Unit vector orthogonal to `v` (random direction in the complement).
pub fn random_orthogonal_to<R: Rng + ?Sized>(v: &[C64], rng: &mut R) -> Vec<C64> {
    loop {
        let g = gaussian_vector(v.len(), rng);
        if let Some(w) = orthonormalize_against(&g, &[v.to_vec()]) {
            return w;
        }
    }
}

/// a·v + b·w for unit v ⟂ w, with |a|² + |b|² = 1.
pub fn superpose(a: C64, v: &[C64], b: C64, w: &[C64]) -> Vec<C64> {
    v.iter().zip(w).map(|(x, y)| a * x + b * y).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::operator::unitarity_defect;
    use crate::qcore::state::QuantumState;
    use crate::rng::stream;

    #[test]
    fn random_unitary_is_unitary() {
        let mut rng = stream(3);
        for d in [1, 2, 5, 17] {
            assert!(unitarity_defect(&random_unitary(d, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn random_density_is_valid() {
        let mut rng = stream(4);
        let rho = random_density(DimTag::Qudit(6), 3, &mut rng);
        assert!(DensityMatrix::new(rho.matrix().clone(), rho.tag().clone()).is_ok());
    }

    #[test]
    fn orthogonal_draw() {
        let mut rng = stream(5);
        let v = random_unit_vector(4, &mut rng);
        let w = random_orthogonal_to(&v, &mut rng);
        assert!(inner(&v, &w).norm() < 1e-12);
        assert!((norm(&w) - 1.0).abs() < 1e-12);
    }
}
