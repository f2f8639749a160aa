//! Perfect cloning, perfect telegraphing, and orthogonality with duplication
//! coincide for finite sets of pure states.

use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::matrix::{inner, C64, ONE, ZERO};
use crate::qcore::measure::sample_index;
use crate::qcore::random::{orthonormalize_against, random_orthonormal, random_unit_vector};
use crate::qcore::{DensityMatrix, DimTag, PureState, QuantumState};
use crate::rng::Stream;

use super::tasks::{clone_via_telegraph, index_width, telegraph_fidelity, Bits, TelegraphProtocol};

/// Whether every pairwise |⟨ψᵢ|ψⱼ⟩|² is within `tol` of 0 or of 1.
pub fn is_orthogonal_with_duplication(states: &[PureState], tol: f64) -> bool {
    first_violating_pair(states, tol).is_none()
}

/// First pair (i, j) whose squared overlap is neither 0 nor 1, with its overlap.
pub fn first_violating_pair(states: &[PureState], tol: f64) -> Option<(usize, usize, C64)> {
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let Ok(s) = states[i].overlap(&states[j]) else {
                return Some((i, j, C64::new(f64::NAN, 0.0)));
            };
            let p = s.norm_sqr();
            if p > tol && (1.0 - p).abs() > tol {
                return Some((i, j, s));
            }
        }
    }
    None
}

/// What a unitary cloner would need for a pair with overlap s = ⟨ψᵢ|ψⱼ⟩:
/// s = s²·⟨χᵢ|χⱼ⟩ for some ancilla states χ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InnerProductConstraint {
    pub overlap: C64,
    /// |⟨χᵢ|χⱼ⟩| forced by the constraint; `None` when s = 0 leaves it free.
    pub required_ancilla_overlap: Option<f64>,
    /// Whether some ancilla overlap of modulus at most 1 satisfies it.
    pub solvable: bool,
}

pub fn inner_product_constraint(overlap: C64, tol: f64) -> InnerProductConstraint {
    let a = overlap.norm();
    if a <= tol {
        return InnerProductConstraint { overlap, required_ancilla_overlap: None, solvable: true };
    }
    let need = 1.0 / a;
    InnerProductConstraint { overlap, required_ancilla_overlap: Some(need), solvable: need <= 1.0 + tol }
}

/// Measures in an orthonormal basis, sends the outcome index, and prepares
/// the indexed basis vector.
#[derive(Clone, Debug, PartialEq)]
pub struct BasisTelegraph {
    basis: Vec<Vec<C64>>,
    tag: DimTag,
    width: usize,
    /// For each input state, the basis index it collapses to.
    assignment: Vec<usize>,
}

impl BasisTelegraph {
    pub fn basis(&self) -> &[Vec<C64>] {
        &self.basis
    }

    /// Basis index of the i-th input state; duplicates share an index.
    pub fn index_of(&self, i: usize) -> usize {
        self.assignment[i]
    }
}

impl TelegraphProtocol for BasisTelegraph {
    fn send(&self, psi: &PureState, rng: &mut Stream) -> Result<Bits> {
        if psi.dim() != self.tag.dim() {
            return Err(Error::DimensionMismatch { expected: self.tag.dim(), found: psi.dim() });
        }
        let probs: Vec<f64> = self.basis.iter().map(|b| inner(b, psi.amplitudes()).norm_sqr()).collect();
        Ok(Bits::from_index(sample_index(&probs, rng), self.width))
    }

    fn receive(&self, message: &Bits, _rng: &mut Stream) -> Result<DensityMatrix> {
        let k = message.to_index();
        let v = self.basis.get(k).ok_or_else(|| Error::InvalidMeasurement(format!("no basis vector {k}")))?;
        Ok(PureState::normalized(v.clone(), self.tag.clone())?.density())
    }

    fn message_budget(&self) -> usize {
        self.width
    }
}

/// Builds the basis-measurement protocol: one basis vector per class of
/// duplicated states, completed to a full basis with computational vectors.
pub fn perfect_telegraph_for_orthogonal(states: &[PureState], tol: f64) -> Result<BasisTelegraph> {
    let first = states.first().ok_or_else(|| Error::InvalidConfig("empty state set".into()))?;
    if !is_orthogonal_with_duplication(states, tol) {
        return Err(Error::NotOrthogonal);
    }
    let tag = first.tag().clone();
    let dim = tag.dim();
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut assignment = Vec::with_capacity(states.len());
    for s in states {
        let hit = basis.iter().position(|b| inner(b, s.amplitudes()).norm_sqr() > 0.5);
        match hit {
            Some(k) => assignment.push(k),
            None => {
                assignment.push(basis.len());
                basis.push(s.amplitudes().to_vec());
            }
        }
    }
    for k in 0..dim {
        if basis.len() == dim {
            break;
        }
        let mut e = vec![ZERO; dim];
        e[k] = ONE;
        if let Some(v) = orthonormalize_against(&e, &basis) {
            basis.push(v);
        }
    }
    let width = index_width(basis.len());
    Ok(BasisTelegraph { basis, tag, width, assignment })
}

/// `classes` orthonormal vectors in dimension `dim`, each repeated a random
/// number of times with a random global phase, then shuffled.
pub fn random_orthogonal_set<R: Rng + ?Sized>(dim: usize, classes: usize, max_copies: usize, rng: &mut R) -> Vec<PureState> {
    let vs = random_orthonormal(dim, classes.min(dim), rng);
    let mut out = Vec::new();
    for v in &vs {
        for _ in 0..rng.random_range(1..=max_copies.max(1)) {
            let phase = C64::from_polar(1.0, rng.random_range(0.0..std::f64::consts::TAU));
            out.push(PureState::from_parts(v.iter().map(|a| a * phase).collect(), DimTag::Qudit(dim)));
        }
    }
    for i in (1..out.len()).rev() {
        out.swap(i, rng.random_range(0..=i));
    }
    out
}

/// Haar-random states; generic overlaps are strictly between 0 and 1.
pub fn random_non_orthogonal_set<R: Rng + ?Sized>(dim: usize, count: usize, rng: &mut R) -> Vec<PureState> {
    (0..count.max(2)).map(|_| PureState::from_parts(random_unit_vector(dim, rng), DimTag::Qudit(dim))).collect()
}

/// One pass over a state set: predicate, protocol fidelities, and the
/// analytic constraint for the violating pair.
#[derive(Clone, Debug, PartialEq)]
pub struct EquivalenceOutcome {
    pub orthogonal: bool,
    /// Minimum over members; `None` when no protocol could be built.
    pub min_telegraph_fidelity: Option<f64>,
    pub min_clone_fidelity: Option<f64>,
    /// For a non-orthogonal set: the violating pair's constraint.
    pub constraint: Option<InnerProductConstraint>,
}

pub fn equivalence_trial(states: &[PureState], tol: f64, rng: &mut Stream) -> EquivalenceOutcome {
    let orthogonal = is_orthogonal_with_duplication(states, tol);
    let constraint = first_violating_pair(states, tol).map(|(_, _, s)| inner_product_constraint(s, tol));
    let (mut tele, mut clone) = (None, None);
    if let Ok(p) = perfect_telegraph_for_orthogonal(states, tol) {
        let t = states.iter().map(|s| telegraph_fidelity(&p, s, rng)).fold(f64::INFINITY, f64::min);
        let c = states.iter().map(|s| clone_via_telegraph(&p, s, rng).fidelity(s)).fold(f64::INFINITY, f64::min);
        tele = Some(t);
        clone = Some(c);
    }
    EquivalenceOutcome { orthogonal, min_telegraph_fidelity: tele, min_clone_fidelity: clone, constraint }
}
