use rand::Rng;

use super::linalg::{norm_at_most, tolerance};
use super::matrix::{inner, CMatrix, C64, ONE, ZERO};
use super::state::{check_dim, QuantumState};
use crate::error::{Error, Result};

/// A projector in whichever form is cheapest to apply.
#[derive(Clone, Debug, PartialEq)]
pub enum Projector {
    /// Diagonal projector onto the listed computational basis states.
    Basis { dim: usize, indices: Vec<usize> },
    /// |v⟩⟨v| for a unit vector v.
    Rank1(Vec<C64>),
    /// Explicit Hermitian idempotent matrix.
    Dense(CMatrix),
    /// I − P.
    Complement(Box<Projector>),
}

impl Projector {
    pub fn basis(dim: usize, indices: Vec<usize>) -> Self {
        assert!(indices.iter().all(|&i| i < dim), "basis index out of range");
        Projector::Basis { dim, indices }
    }

    /// Rank-one projector onto `v`, which is normalized here.
    pub fn rank1(v: &[C64]) -> Result<Self> {
        let n = super::matrix::norm(v);
        if n < 1e-300 {
            return Err(Error::InvalidMeasurement("zero vector".into()));
        }
        Ok(Projector::Rank1(v.iter().map(|a| a / n).collect()))
    }

    /// Wraps a matrix after checking Π = Π† and Π² = Π.
    pub fn dense(p: CMatrix) -> Result<Self> {
        let tol = tolerance();
        if !p.is_square() {
            return Err(Error::InvalidMeasurement("projector must be square".into()));
        }
        let herm = p.hermitian_defect();
        if herm > tol {
            return Err(Error::WrongKind { expected: "a projector", residual: herm });
        }
        let (ok, residual) = norm_at_most(&(&(&p * &p) - &p), tol);
        if !ok {
            return Err(Error::WrongKind { expected: "a projector", residual });
        }
        Ok(Projector::Dense(p))
    }

    pub fn complement(self) -> Self {
        match self {
            Projector::Complement(inner) => *inner,
            p => Projector::Complement(Box::new(p)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Projector::Basis { dim, .. } => *dim,
            Projector::Rank1(v) => v.len(),
            Projector::Dense(m) => m.rows(),
            Projector::Complement(p) => p.dim(),
        }
    }

    pub fn to_matrix(&self) -> CMatrix {
        match self {
            Projector::Basis { dim, indices } => {
                let mut m = CMatrix::zeros(*dim, *dim);
                for &i in indices {
                    m[(i, i)] = ONE;
                }
                m
            }
            Projector::Rank1(v) => CMatrix::outer(v, v),
            Projector::Dense(m) => m.clone(),
            Projector::Complement(p) => &CMatrix::identity(p.dim()) - &p.to_matrix(),
        }
    }

    pub fn apply_vec(&self, v: &[C64]) -> Vec<C64> {
        match self {
            Projector::Basis { dim, indices } => {
                let mut out = vec![ZERO; *dim];
                for &i in indices {
                    out[i] = v[i];
                }
                out
            }
            Projector::Rank1(u) => {
                let c = inner(u, v);
                u.iter().map(|a| a * c).collect()
            }
            Projector::Dense(m) => m.mul_vec(v),
            Projector::Complement(p) => {
                let pv = p.apply_vec(v);
                v.iter().zip(pv).map(|(a, b)| a - b).collect()
            }
        }
    }

    /// ⟨v|Π|v⟩
    pub fn expectation_pure(&self, v: &[C64]) -> f64 {
        match self {
            Projector::Basis { indices, .. } => indices.iter().map(|&i| v[i].norm_sqr()).sum(),
            Projector::Rank1(u) => inner(u, v).norm_sqr(),
            Projector::Dense(m) => inner(v, &m.mul_vec(v)).re,
            Projector::Complement(p) => super::matrix::norm(v).powi(2) - p.expectation_pure(v),
        }
    }

    /// tr(Πρ)
    pub fn expectation_density(&self, rho: &CMatrix) -> f64 {
        match self {
            Projector::Basis { indices, .. } => indices.iter().map(|&i| rho[(i, i)].re).sum(),
            Projector::Rank1(u) => inner(u, &rho.mul_vec(u)).re,
            Projector::Dense(m) => {
                let d = m.rows();
                let mut acc = 0.0;
                for i in 0..d {
                    for k in 0..d {
                        acc += (m[(i, k)] * rho[(k, i)]).re;
                    }
                }
                acc
            }
            Projector::Complement(p) => rho.trace().re - p.expectation_density(rho),
        }
    }

    /// ΠρΠ
    pub fn sandwich(&self, rho: &CMatrix) -> CMatrix {
        match self {
            Projector::Basis { dim, indices } => {
                let mut out = CMatrix::zeros(*dim, *dim);
                for &i in indices {
                    for &j in indices {
                        out[(i, j)] = rho[(i, j)];
                    }
                }
                out
            }
            Projector::Rank1(u) => {
                let w = inner(u, &rho.mul_vec(u));
                CMatrix::outer(u, u).scale(w)
            }
            Projector::Dense(m) => &(m * rho) * m,
            Projector::Complement(p) => {
                let pm = p.to_matrix();
                let prho = &pm * rho;
                let rhop = rho * &pm;
                let prhop = &prho * &pm;
                &(&(rho - &prho) - &rhop) + &prhop
            }
        }
    }
}

/// Complete set of mutually orthogonal projectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Pvm {
    dim: usize,
    projectors: Vec<Projector>,
}

impl Pvm {
    /// Checks completeness and pairwise orthogonality.
    pub fn new(projectors: Vec<Projector>) -> Result<Self> {
        let dim = projectors
            .first()
            .map(Projector::dim)
            .ok_or_else(|| Error::InvalidMeasurement("no projectors".into()))?;
        for p in &projectors {
            check_dim(dim, p.dim())?;
        }
        let all_basis = projectors.iter().all(|p| matches!(p, Projector::Basis { .. }));
        if all_basis {
            let mut seen = vec![0u32; dim];
            for p in &projectors {
                if let Projector::Basis { indices, .. } = p {
                    for &i in indices {
                        seen[i] += 1;
                    }
                }
            }
            if seen.iter().any(|&c| c != 1) {
                return Err(Error::InvalidMeasurement("basis projectors do not partition the basis".into()));
            }
            return Ok(Pvm { dim, projectors });
        }
        let tol = tolerance();
        let mats: Vec<CMatrix> = projectors.iter().map(Projector::to_matrix).collect();
        let mut sum = CMatrix::zeros(dim, dim);
        for m in &mats {
            sum = &sum + m;
        }
        let (ok, residual) = norm_at_most(&(&sum - &CMatrix::identity(dim)), tol);
        if !ok {
            return Err(Error::InvalidMeasurement(format!("incomplete (residual {residual:.3e})")));
        }
        for j in 0..mats.len() {
            for k in j + 1..mats.len() {
                let (ok, residual) = norm_at_most(&(&mats[j] * &mats[k]), tol);
                if !ok {
                    return Err(Error::InvalidMeasurement(format!(
                        "projectors {j} and {k} overlap (residual {residual:.3e})"
                    )));
                }
            }
        }
        Ok(Pvm { dim, projectors })
    }

    pub fn computational(dim: usize) -> Self {
        Pvm { dim, projectors: (0..dim).map(|i| Projector::basis(dim, vec![i])).collect() }
    }

    /// {Π, I − Π}; always complete.
    pub fn binary(p: Projector) -> Self {
        let dim = p.dim();
        let q = p.clone().complement();
        Pvm { dim, projectors: vec![p, q] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn projectors(&self) -> &[Projector] {
        &self.projectors
    }

    pub fn len(&self) -> usize {
        self.projectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projectors.is_empty()
    }
}

/// Outcome probabilities tr(Π_k ρ), clamped at zero.
pub fn exact_distribution<S: QuantumState>(pvm: &Pvm, s: &S) -> Result<Vec<f64>> {
    check_dim(pvm.dim, s.dim())?;
    Ok(pvm.projectors.iter().map(|p| s.probability(p).max(0.0)).collect())
}

/// Samples an outcome and returns it with the collapsed state.
pub fn measure<S: QuantumState, R: Rng + ?Sized>(pvm: &Pvm, s: &S, rng: &mut R) -> Result<(usize, S)> {
    let probs = exact_distribution(pvm, s)?;
    let k = sample_index(&probs, rng);
    let p = probs[k];
    if p < 1e-12 {
        return Err(Error::DegenerateOutcome { outcome: k, probability: p });
    }
    Ok((k, s.collapse(&pvm.projectors[k], p)))
}

/// Inverse-CDF draw from nonnegative weights (need not be normalized).
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let u = rng.random::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            last_positive = i;
        }
        acc += w;
        if u < acc {
            return i;
        }
    }
    last_positive
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::state::{DimTag, PureState};
    use crate::rng::stream;

    #[test]
    fn computational_on_zero() {
        let s = PureState::basis(DimTag::Qubits(1), 0);
        let pvm = Pvm::computational(2);
        let (k, post) = measure(&pvm, &s, &mut stream(1)).unwrap();
        assert_eq!(k, 0);
        assert_eq!(post, s);
        assert_eq!(exact_distribution(&pvm, &s).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn plus_state_distribution() {
        let h = 1.0 / 2f64.sqrt();
        let s = PureState::new(vec![C64::new(h, 0.), C64::new(h, 0.)], DimTag::Qubits(1)).unwrap();
        let d = exact_distribution(&Pvm::computational(2), &s).unwrap();
        assert!((d[0] - 0.5).abs() < 1e-15 && (d[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn pvm_validation() {
        let p = Projector::basis(3, vec![0, 1]);
        assert!(Pvm::new(vec![p.clone(), Projector::basis(3, vec![2])]).is_ok());
        assert!(Pvm::new(vec![p.clone(), Projector::basis(3, vec![1, 2])]).is_err());
        let h = 1.0 / 2f64.sqrt();
        let plus = Projector::rank1(&[C64::new(h, 0.), C64::new(h, 0.), ZERO]).unwrap();
        assert!(Pvm::new(vec![plus.clone(), Projector::basis(3, vec![1, 2])]).is_err());
        let binary = Pvm::binary(plus);
        let dense: Vec<Projector> =
            binary.projectors().iter().map(|p| Projector::dense(p.to_matrix()).unwrap()).collect();
        assert!(Pvm::new(dense).is_ok());
    }

    #[test]
    fn complement_sandwich_matches_dense() {
        let h = 1.0 / 2f64.sqrt();
        let p = Projector::rank1(&[C64::new(h, 0.), C64::new(0., h)]).unwrap();
        let rho = CMatrix::from_vec(2, 2, vec![C64::new(0.7, 0.), C64::new(0.1, 0.2), C64::new(0.1, -0.2), C64::new(0.3, 0.)]);
        let q = p.complement();
        let qm = q.to_matrix();
        let expect = &(&qm * &rho) * &qm;
        assert!((&q.sandwich(&rho) - &expect).max_abs() < 1e-15);
        assert!((q.expectation_density(&rho) - (&qm * &rho).trace().re).abs() < 1e-15);
    }
}
