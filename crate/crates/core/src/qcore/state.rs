use std::fmt;

use super::linalg::{hermitian_eigenvalues, tolerance};
use super::matrix::{inner, kron_vec, norm, CMatrix, C64, ONE, ZERO};
use super::measure::Projector;
use crate::error::{Error, Result};

/// Register layout attached to states and operators.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DimTag {
    /// Plain d-level system.
    Qudit(usize),
    /// k qubits, dimension 2^k.
    Qubits(usize),
    /// m-bit register plus the blank symbol ⊥ at index 2^m.
    Augmented(usize),
    Product(Vec<DimTag>),
}

impl DimTag {
    pub fn dim(&self) -> usize {
        match self {
            DimTag::Qudit(d) => *d,
            DimTag::Qubits(k) => 1 << k,
            DimTag::Augmented(m) => (1 << m) + 1,
            DimTag::Product(parts) => parts.iter().map(DimTag::dim).product(),
        }
    }

    pub fn product(&self, other: &DimTag) -> DimTag {
        let mut parts = Vec::new();
        for t in [self, other] {
            match t {
                DimTag::Product(p) => parts.extend(p.iter().cloned()),
                t => parts.push(t.clone()),
            }
        }
        DimTag::Product(parts)
    }

    /// Top-level factors (a non-product tag is its own single factor).
    pub fn factors(&self) -> Vec<DimTag> {
        match self {
            DimTag::Product(p) => p.clone(),
            t => vec![t.clone()],
        }
    }

    pub fn pair(m: usize) -> DimTag {
        DimTag::Product(vec![DimTag::Augmented(m), DimTag::Augmented(m)])
    }
}

impl fmt::Display for DimTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DimTag::Qudit(d) => write!(f, "qudit({d})"),
            DimTag::Qubits(k) => write!(f, "qubits({k})"),
            DimTag::Augmented(m) => write!(f, "augmented({m})"),
            DimTag::Product(p) => {
                let parts: Vec<String> = p.iter().map(|t| t.to_string()).collect();
                write!(f, "{}", parts.join(" ⊗ "))
            }
        }
    }
}

/// Index of ⊥ in an augmented(m) register.
pub fn bottom_index(m: usize) -> usize {
    1 << m
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

/// Operations shared by pure and mixed states.
pub trait QuantumState: Sized + Clone {
    fn dim(&self) -> usize;
    fn tag(&self) -> &DimTag;
    /// Applies `u` without any kind or dimension checks.
    fn evolve_unchecked(&self, u: &CMatrix) -> Self;
    /// ⟨ψ|ρ|ψ⟩, or |⟨ψ|φ⟩|² for a pure state.
    fn fidelity_with(&self, psi: &PureState) -> Result<f64>;
    fn probability(&self, p: &Projector) -> f64;
    /// Post-measurement state for outcome `p`, renormalized by `prob`.
    fn collapse(&self, p: &Projector, prob: f64) -> Self;
    fn to_density(&self) -> DensityMatrix;
}

/// Normalized amplitude vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amps: Vec<C64>,
    tag: DimTag,
}

impl PureState {
    pub fn new(amps: Vec<C64>, tag: DimTag) -> Result<Self> {
        check_dim(tag.dim(), amps.len())?;
        let n = norm(&amps);
        if (n - 1.0).abs() > tolerance() {
            return Err(Error::InvalidState(format!("norm {n} is not 1")));
        }
        Ok(PureState { amps, tag })
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalized(amps: Vec<C64>, tag: DimTag) -> Result<Self> {
        check_dim(tag.dim(), amps.len())?;
        let n = norm(&amps);
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        let amps = amps.into_iter().map(|a| a / n).collect();
        Ok(PureState { amps, tag })
    }

    pub(crate) fn from_parts(amps: Vec<C64>, tag: DimTag) -> Self {
        debug_assert_eq!(amps.len(), tag.dim());
        PureState { amps, tag }
    }

    pub fn basis(tag: DimTag, index: usize) -> Self {
        let d = tag.dim();
        assert!(index < d, "basis index {index} out of range for dimension {d}");
        let mut amps = vec![ZERO; d];
        amps[index] = ONE;
        PureState { amps, tag }
    }

    /// The blank state |⊥⟩ of an augmented(m) register.
    pub fn bottom(m: usize) -> Self {
        Self::basis(DimTag::Augmented(m), bottom_index(m))
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amps
    }

    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState { amps: kron_vec(&self.amps, &other.amps), tag: self.tag.product(&other.tag) }
    }

    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        check_dim(self.dim(), other.dim())?;
        Ok(inner(&self.amps, &other.amps))
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amps)
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { mat: CMatrix::outer(&self.amps, &self.amps), tag: self.tag.clone() }
    }

    pub fn with_tag(mut self, tag: DimTag) -> Result<Self> {
        check_dim(tag.dim(), self.dim())?;
        self.tag = tag;
        Ok(self)
    }
}

impl QuantumState for PureState {
    fn dim(&self) -> usize {
        self.amps.len()
    }

    fn tag(&self) -> &DimTag {
        &self.tag
    }

    fn evolve_unchecked(&self, u: &CMatrix) -> Self {
        PureState { amps: u.mul_vec(&self.amps), tag: self.tag.clone() }
    }

    fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        Ok(self.overlap(psi)?.norm_sqr())
    }

    fn probability(&self, p: &Projector) -> f64 {
        p.expectation_pure(&self.amps)
    }

    fn collapse(&self, p: &Projector, prob: f64) -> Self {
        let v = p.apply_vec(&self.amps);
        let s = prob.sqrt();
        PureState { amps: v.into_iter().map(|a| a / s).collect(), tag: self.tag.clone() }
    }

    fn to_density(&self) -> DensityMatrix {
        self.density()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    First,
    Second,
}

/// Positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    tag: DimTag,
}

impl DensityMatrix {
    /// Validates hermiticity, trace and positivity.
    pub fn new(mat: CMatrix, tag: DimTag) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        check_dim(tag.dim(), mat.rows())?;
        let tol = tolerance();
        let defect = mat.hermitian_defect();
        if defect > tol {
            return Err(Error::InvalidState(format!("not Hermitian (defect {defect:.3e})")));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > tol || tr.im.abs() > tol {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let low = hermitian_eigenvalues(&mat).first().copied().unwrap_or(0.0);
        if low < -tol {
            return Err(Error::InvalidState(format!("negative eigenvalue {low:.3e}")));
        }
        Ok(DensityMatrix { mat, tag })
    }

    pub(crate) fn from_parts(mat: CMatrix, tag: DimTag) -> Self {
        debug_assert_eq!(mat.rows(), tag.dim());
        DensityMatrix { mat, tag }
    }

    pub fn maximally_mixed(tag: DimTag) -> Self {
        let d = tag.dim();
        DensityMatrix { mat: CMatrix::identity(d).scale(C64::new(1.0 / d as f64, 0.0)), tag }
    }

    /// Convex combination Σ pᵢρᵢ. Weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::InvalidState("empty mixture".into()))?;
        let d = first.1.dim();
        let mut mat = CMatrix::zeros(d, d);
        let mut total = 0.0;
        for (p, rho) in parts {
            check_dim(d, rho.dim())?;
            if *p < 0.0 {
                return Err(Error::InvalidState(format!("negative weight {p}")));
            }
            total += p;
            if *p == 0.0 {
                continue;
            }
            let w = C64::new(*p, 0.0);
            for (o, a) in mat.as_mut_slice().iter_mut().zip(rho.mat.as_slice()) {
                *o += w * a;
            }
        }
        if (total - 1.0).abs() > tolerance() {
            return Err(Error::InvalidState(format!("mixture weights sum to {total}")));
        }
        Ok(DensityMatrix { mat, tag: first.1.tag.clone() })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn trace(&self) -> f64 {
        self.mat.trace().re
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        DensityMatrix { mat: self.mat.kron(&other.mat), tag: self.tag.product(&other.tag) }
    }

    /// tr(Aρ)
    pub fn expectation(&self, a: &CMatrix) -> Result<C64> {
        check_dim(self.dim(), a.rows())?;
        check_dim(self.dim(), a.cols())?;
        let d = self.dim();
        let mut acc = ZERO;
        for i in 0..d {
            for k in 0..d {
                let x = a[(i, k)];
                if x != ZERO {
                    acc += x * self.mat[(k, i)];
                }
            }
        }
        Ok(acc)
    }

    /// Traces out one factor of a two-factor space `d_first × d_second`.
    pub fn partial_trace(&self, d_first: usize, d_second: usize, keep: Subsystem) -> Result<DensityMatrix> {
        check_dim(self.dim(), d_first * d_second)?;
        let factors = self.tag.factors();
        let kept = |idx: usize, d: usize| {
            if factors.len() == 2 && factors[idx].dim() == d {
                factors[idx].clone()
            } else {
                DimTag::Qudit(d)
            }
        };
        let (d, tag) = match keep {
            Subsystem::First => (d_first, kept(0, d_first)),
            Subsystem::Second => (d_second, kept(1, d_second)),
        };
        let mut out = CMatrix::zeros(d, d);
        let n = self.dim();
        for i in 0..d {
            for j in 0..d {
                let mut acc = ZERO;
                match keep {
                    Subsystem::First => {
                        for k in 0..d_second {
                            acc += self.mat.as_slice()[(i * d_second + k) * n + j * d_second + k];
                        }
                    }
                    Subsystem::Second => {
                        for k in 0..d_first {
                            acc += self.mat.as_slice()[(k * d_second + i) * n + k * d_second + j];
                        }
                    }
                }
                out[(i, j)] = acc;
            }
        }
        Ok(DensityMatrix { mat: out, tag })
    }

    pub fn with_tag(mut self, tag: DimTag) -> Result<Self> {
        check_dim(tag.dim(), self.dim())?;
        self.tag = tag;
        Ok(self)
    }
}

impl QuantumState for DensityMatrix {
    fn dim(&self) -> usize {
        self.mat.rows()
    }

    fn tag(&self) -> &DimTag {
        &self.tag
    }

    fn evolve_unchecked(&self, u: &CMatrix) -> Self {
        let mat = &(u * &self.mat) * &u.adjoint();
        DensityMatrix { mat, tag: self.tag.clone() }
    }

    fn fidelity_with(&self, psi: &PureState) -> Result<f64> {
        check_dim(self.dim(), psi.dim())?;
        let v = self.mat.mul_vec(psi.amplitudes());
        Ok(inner(psi.amplitudes(), &v).re)
    }

    fn probability(&self, p: &Projector) -> f64 {
        p.expectation_density(&self.mat)
    }

    fn collapse(&self, p: &Projector, prob: f64) -> Self {
        let m = p.sandwich(&self.mat).scale(C64::new(1.0 / prob, 0.0));
        DensityMatrix { mat: m, tag: self.tag.clone() }
    }

    fn to_density(&self) -> DensityMatrix {
        self.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(k: usize) -> DimTag {
        DimTag::Qubits(k)
    }

    #[test]
    fn basis_product() {
        let s = PureState::basis(q(1), 0).tensor(&PureState::basis(q(1), 1));
        assert_eq!(s.dim(), 4);
        assert_eq!(s.amplitudes()[1], ONE);
    }

    #[test]
    fn plus_times_zero() {
        let h = 1.0 / 2f64.sqrt();
        let plus = PureState::new(vec![C64::new(h, 0.), C64::new(h, 0.)], q(1)).unwrap();
        let s = plus.tensor(&PureState::basis(q(1), 0));
        let a = s.amplitudes();
        assert!((a[0].re - h).abs() < 1e-15 && (a[2].re - h).abs() < 1e-15);
        assert_eq!(a[1], ZERO);
        assert_eq!(a[3], ZERO);
    }

    #[test]
    fn rejects_unnormalized() {
        assert!(PureState::new(vec![ONE, ONE], q(1)).is_err());
        assert!(matches!(
            PureState::new(vec![ONE], q(1)),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
    }

    #[test]
    fn fidelity_examples() {
        let zero = PureState::basis(q(1), 0);
        let one = PureState::basis(q(1), 1);
        assert!((zero.density().fidelity_with(&zero).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(zero.density().fidelity_with(&one).unwrap(), 0.0);
        let mixed = DensityMatrix::maximally_mixed(DimTag::Qudit(5));
        let psi = PureState::basis(DimTag::Qudit(5), 3);
        assert!((mixed.fidelity_with(&psi).unwrap() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn density_validation() {
        let bad = CMatrix::from_diagonal(&[C64::new(1.5, 0.), C64::new(-0.5, 0.)]);
        assert!(DensityMatrix::new(bad, q(1)).is_err());
        let ok = CMatrix::from_diagonal(&[C64::new(0.25, 0.), C64::new(0.75, 0.)]);
        assert!(DensityMatrix::new(ok, q(1)).is_ok());
    }

    #[test]
    fn partial_trace_of_product() {
        let a = PureState::basis(q(1), 1).density();
        let b = DensityMatrix::maximally_mixed(q(1));
        let ab = a.tensor(&b);
        let ra = ab.partial_trace(2, 2, Subsystem::First).unwrap();
        let rb = ab.partial_trace(2, 2, Subsystem::Second).unwrap();
        assert!((ra.matrix() - a.matrix()).max_abs() < 1e-15);
        assert!((rb.matrix() - b.matrix()).max_abs() < 1e-15);
        assert_eq!(ra.tag(), &q(1));
    }

    #[test]
    fn augmented_dims() {
        assert_eq!(DimTag::Augmented(3).dim(), 9);
        assert_eq!(DimTag::pair(2).dim(), 25);
        assert_eq!(DimTag::pair(2).to_string(), "augmented(2) ⊗ augmented(2)");
        assert_eq!(PureState::bottom(2).amplitudes()[4], ONE);
    }
}
