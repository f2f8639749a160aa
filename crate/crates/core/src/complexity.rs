//! The hidden-cloning oracle problem (ROHC), its verifier and cloner, and the
//! verifier-then-cloner composition.

use rand::Rng;

use crate::error::{Error, Result};
use crate::harness::report::ExperimentReport;
use crate::nogo::lemma::lemma_bound;
use crate::nogo::tasks::Bits;
use crate::qcore::matrix::{inner, CMatrix, C64, ONE, ZERO};
use crate::qcore::random::{orthonormalize_against, random_orthogonal_to, random_orthonormal, random_unit_vector, superpose};
use crate::qcore::state::check_dim;
use crate::qcore::{
    bottom_index, hermitian_eigen, operator_norm, DensityMatrix, DimTag, OperatorKind, OperatorMatrix, Projector, PureState,
    QuantumState,
};
use crate::rng::Stream;
use crate::scheme::{preimage_state, sample_label_of, sample_random_function, z_cloning_oracle, ClassicalFunction, Label, SizeLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Truth {
    Yes(Label),
    No,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TruthKind {
    Yes,
    No,
}

/// H with a hidden oracle C: the z-cloning oracle (YES) or the identity (NO).
#[derive(Clone, Debug, PartialEq)]
pub struct RohcInstance {
    pub h: ClassicalFunction,
    pub c: OperatorMatrix,
    pub truth: Truth,
}

impl RohcInstance {
    pub fn m(&self) -> usize {
        self.h.m()
    }

    pub fn aug_dim(&self) -> usize {
        self.h.aug_dim()
    }
}

pub fn generate_rohc<R: Rng + ?Sized>(m: usize, n: usize, truth: TruthKind, limits: &SizeLimits, rng: &mut R) -> Result<RohcInstance> {
    let h = sample_random_function(m, n, limits, rng)?;
    Ok(match truth {
        TruthKind::Yes => {
            let z = sample_label_of(&h, rng);
            let c = z_cloning_oracle(&h, z)?;
            RohcInstance { h, c, truth: Truth::Yes(z) }
        }
        TruthKind::No => {
            let c = OperatorMatrix::identity(DimTag::pair(m));
            RohcInstance { h, c, truth: Truth::No }
        }
    })
}

fn with_blank(inst: &RohcInstance, witness: &PureState) -> Result<Vec<C64>> {
    let d = inst.aug_dim();
    check_dim(d, witness.dim())?;
    let bot = bottom_index(inst.m());
    let mut v = vec![ZERO; d * d];
    for (x, a) in witness.amplitudes().iter().enumerate() {
        v[x * d + bot] = *a;
    }
    Ok(v)
}

/// C(|ψ⟩|⊥⟩) as a vector.
fn clone_vector(inst: &RohcInstance, witness: &PureState) -> Result<Vec<C64>> {
    Ok(inst.c.matrix().mul_vec(&with_blank(inst, witness)?))
}

/// ‖(I − |⊥⟩⟨⊥|)₂ · C(|ψ⟩|⊥⟩)‖²: the probability that the second register is
/// found non-blank.
pub fn rohc_verify(inst: &RohcInstance, witness: &PureState) -> Result<f64> {
    let d = inst.aug_dim();
    let bot = bottom_index(inst.m());
    let leak = witness.amplitudes().get(bot).map_or(0.0, |a| a.norm());
    if leak > 1e-9 {
        return Err(Error::InvalidState(format!("witness has weight {leak} on the blank state")));
    }
    let out = clone_vector(inst, witness)?;
    Ok(out.iter().enumerate().filter(|(i, _)| i % d != bot).map(|(_, a)| a.norm_sqr()).sum())
}

/// C(|ψ⟩|⊥⟩) as a two-register state.
pub fn rohc_clone(inst: &RohcInstance, witness: &PureState) -> Result<DensityMatrix> {
    let out = clone_vector(inst, witness)?;
    Ok(PureState::from_parts(out, DimTag::pair(inst.m())).density())
}

/// M = A†A with A = (I − |⊥⟩⟨⊥|)₂ · C · (· ⊗ |⊥⟩); ⟨ψ|M|ψ⟩ is the acceptance
/// probability of ψ and the top eigenvalue is the best achievable.
pub fn acceptance_operator(inst: &RohcInstance) -> OperatorMatrix {
    let d = inst.aug_dim();
    let bot = bottom_index(inst.m());
    let c = inst.c.matrix();
    let a = CMatrix::from_fn(d * d, d, |i, x| if i % d == bot { ZERO } else { c[(i, x * d + bot)] });
    let mut m = a.adjoint().matmul(&a);
    // exact symmetry
    let mh = m.adjoint();
    for (x, y) in m.as_mut_slice().iter_mut().zip(mh.as_slice()) {
        *x = (*x + *y) * 0.5;
    }
    OperatorMatrix::hermitian(m, DimTag::Augmented(inst.m())).expect("A†A is Hermitian")
}

/// Top eigenvalue of M with its eigenvector.
pub fn best_witness(inst: &RohcInstance) -> (f64, PureState) {
    let m = acceptance_operator(inst);
    let (vals, vecs) = hermitian_eigen(m.matrix());
    let k = vals.len() - 1;
    let v = vecs.column(k);
    (vals[k], PureState::from_parts(v, DimTag::Augmented(inst.m())))
}

/// Completeness and soundness numbers for one instance.
pub fn rohc_report(inst: &RohcInstance, random_witnesses: usize, rng: &mut Stream) -> Result<ExperimentReport> {
    let mut r = ExperimentReport::new("rohc", 0);
    let m_op = acceptance_operator(inst);
    let d = inst.aug_dim();
    let bot = bottom_index(inst.m());
    let mut consistency = 0.0f64;
    for _ in 0..random_witnesses {
        let mut v = random_unit_vector(d, rng);
        v[bot] = ZERO;
        let psi = PureState::normalized(v, DimTag::Augmented(inst.m()))?;
        let direct = rohc_verify(inst, &psi)?;
        let via_m = inner(psi.amplitudes(), &m_op.matrix().mul_vec(psi.amplitudes())).re;
        consistency = consistency.max((direct - via_m).abs());
    }
    r.metric("operator_consistency", consistency).metric("acceptance_norm", m_op.operator_norm());
    r.metric("acceptance_trace", m_op.matrix().trace().re);
    match inst.truth {
        Truth::Yes(z) => {
            let psi = preimage_state(&inst.h, z)?;
            let acc = rohc_verify(inst, &psi)?;
            let fid = rohc_clone(inst, &psi)?.fidelity_with(&psi.tensor(&psi))?;
            r.metric("completeness", acc).metric("clone_fidelity", fid);
        }
        Truth::No => {}
    }
    Ok(r)
}

/// c²f − 2√((1−c²)(1−f)).
pub fn composition_fidelity(c: f64, f: f64) -> Result<f64> {
    for (name, v) in [("c", c), ("f", f)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfRange { name, value: v });
        }
    }
    Ok(c * c * f - 2.0 * ((1.0 - c * c) * (1.0 - f)).sqrt())
}

/// A channel from one register to two.
pub trait Cloner: Sync {
    fn clone_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix>;
}

/// ρ ↦ U (ρ ⊗ |b⟩⟨b|) U†.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitaryCloner {
    pub u: OperatorMatrix,
    pub blank: PureState,
}

impl Cloner for UnitaryCloner {
    fn clone_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let joint = rho.tensor(&self.blank.density());
        check_dim(self.u.dim(), joint.dim())?;
        let u = self.u.matrix();
        let out = u.matmul(joint.matrix()).matmul(&u.adjoint());
        DensityMatrix::new(out, self.u.tag().clone())
    }
}

/// The ROHC cloner: feed the witness and |⊥⟩ to the hidden oracle.
pub fn rohc_cloner(inst: &RohcInstance) -> UnitaryCloner {
    UnitaryCloner { u: inst.c.clone(), blank: PureState::bottom(inst.m()) }
}

/// Completeness / fidelity / soundness targets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Params {
    pub c: f64,
    pub f: f64,
    pub s: f64,
}

/// A verifier given as a projector on the witness space, with a cloner.
pub struct VerifierCloner<C> {
    accept: Projector,
    pub cloner: C,
    pub params: Params,
    /// Instance description for instance-aware cloners.
    pub instance: Option<String>,
}

impl<C: Cloner> VerifierCloner<C> {
    pub fn new(accept: &OperatorMatrix, cloner: C, params: Params) -> Result<Self> {
        if accept.kind() != OperatorKind::Projector {
            return Err(Error::WrongKind { expected: "projector", residual: f64::NAN });
        }
        Ok(VerifierCloner { accept: Projector::dense(accept.matrix().clone())?, cloner, params, instance: None })
    }

    pub fn accept_projector(&self) -> &Projector {
        &self.accept
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CombinedMode {
    /// Clone the unconditional post-measurement state ρ̃.
    Exact,
    /// Clone the branch selected by the sampled outcome.
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CombinedOutcome {
    pub accept: bool,
    /// ⟨ψ|Π_v|ψ⟩
    pub accept_probability: f64,
    /// The state handed to the cloner.
    pub measured: DensityMatrix,
    pub copies: DensityMatrix,
}

/// Measures {Π_v, I − Π_v} on the witness, then runs the cloner on the
/// post-measurement state.
pub fn combined_verifier_cloner<C: Cloner>(
    vc: &VerifierCloner<C>,
    witness: &PureState,
    mode: CombinedMode,
    rng: &mut Stream,
) -> Result<CombinedOutcome> {
    check_dim(vc.accept.dim(), witness.dim())?;
    let rho = witness.density();
    let p = vc.accept.expectation_pure(witness.amplitudes()).clamp(0.0, 1.0);
    let accept = rng.random::<f64>() < p;
    let pass = vc.accept.sandwich(rho.matrix());
    let reject = vc.accept.clone().complement().sandwich(rho.matrix());
    let tag = witness.tag().clone();
    let measured = match mode {
        CombinedMode::Exact => DensityMatrix::new(&pass + &reject, tag)?,
        CombinedMode::Sampled => {
            let (branch, w) = if accept { (pass, p) } else { (reject, 1.0 - p) };
            DensityMatrix::new(branch.scale(C64::new(1.0 / w, 0.0)), tag)?
        }
    };
    let copies = vc.cloner.clone_state(&measured)?;
    Ok(CombinedOutcome { accept, accept_probability: p, measured, copies })
}

/// A random verifier/witness pair on a YES instance: the witness is tilted
/// away from ψ_z, and Π_v has a leading direction tilted away from the witness.
pub struct CompositionCase {
    pub vc: VerifierCloner<UnitaryCloner>,
    pub witness: PureState,
    /// ⟨ψ|Π_v|ψ⟩
    pub c: f64,
    /// Cloner fidelity on the bare witness.
    pub f: f64,
}

pub fn random_composition_case<R: Rng + ?Sized>(inst: &RohcInstance, rng: &mut R) -> Result<CompositionCase> {
    let Truth::Yes(z) = inst.truth else {
        return Err(Error::InvalidConfig("composition cases need a YES instance".into()));
    };
    let m = inst.m();
    let d = inst.aug_dim();
    let bot = bottom_index(m);
    let psi_z = preimage_state(&inst.h, z)?;
    let mut e_bot = vec![ZERO; d];
    e_bot[bot] = ONE;
    // a direction orthogonal to both ψ_z and ⊥
    let phi = loop {
        let g = random_unit_vector(d, rng);
        if let Some(v) = orthonormalize_against(&g, &[psi_z.amplitudes().to_vec(), e_bot.clone()]) {
            break v;
        }
    };
    let a: f64 = rng.random_range(0.0..0.35);
    let w = superpose(C64::new(a.cos(), 0.0), psi_z.amplitudes(), C64::new(a.sin(), 0.0), &phi);
    let witness = PureState::normalized(w, DimTag::Augmented(m))?;

    let b: f64 = rng.random_range(0.0..0.5);
    let perp = random_orthogonal_to(witness.amplitudes(), rng);
    let lead = superpose(C64::new(b.cos(), 0.0), witness.amplitudes(), C64::new(b.sin(), 0.0), &perp);
    let rank = rng.random_range(1..=3usize);
    let mut vs = vec![lead];
    for v in random_orthonormal(d, rank + 1, rng) {
        if vs.len() >= rank {
            break;
        }
        if let Some(u) = orthonormalize_against(&v, &vs) {
            vs.push(u);
        }
    }
    let mut pi = CMatrix::zeros(d, d);
    for v in &vs {
        pi = &pi + &CMatrix::outer(v, v);
    }
    let accept = OperatorMatrix::projector(pi, DimTag::Augmented(m))?;
    let cloner = rohc_cloner(inst);
    let f = cloner.clone_state(&witness.density())?.fidelity_with(&witness.tensor(&witness))?;
    let vc = VerifierCloner::new(&accept, cloner, Params { c: 0.0, f, s: 0.0 })?;
    let c = vc.accept.expectation_pure(witness.amplitudes());
    let vc = VerifierCloner { params: Params { c, f, s: 0.0 }, ..vc };
    Ok(CompositionCase { vc, witness, c, f })
}

/// Exact-mode numbers for one case: ⟨ψ|ρ̃|ψ⟩, the clone fidelity on ρ̃, and
/// the bound lemma_bound(c², f).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CompositionSample {
    pub c: f64,
    pub f: f64,
    pub measured_fidelity: f64,
    pub clone_fidelity: f64,
    pub bound: f64,
}

pub fn composition_sample(case: &CompositionCase, rng: &mut Stream) -> Result<CompositionSample> {
    let out = combined_verifier_cloner(&case.vc, &case.witness, CombinedMode::Exact, rng)?;
    let measured_fidelity = out.measured.fidelity_with(&case.witness)?;
    let clone_fidelity = out.copies.fidelity_with(&case.witness.tensor(&case.witness))?;
    let c2 = (case.c * case.c).clamp(0.0, 1.0);
    Ok(CompositionSample {
        c: case.c,
        f: case.f,
        measured_fidelity,
        clone_fidelity,
        bound: lemma_bound(c2, case.f.clamp(0.0, 1.0))?,
    })
}

/// How an ℓ-bit classical witness becomes a quantum witness.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessDecoding {
    /// The string names a basis state |x⟩ (taken mod 2^m).
    BasisIndex,
    /// The string is a subset mask over the first ℓ inputs; the witness is
    /// the uniform superposition over that subset.
    SubsetMask,
}

pub fn decode_witness(bits: &Bits, m: usize, decoding: WitnessDecoding) -> Option<PureState> {
    let dom = 1usize << m;
    let d = dom + 1;
    let mut amps = vec![ZERO; d];
    match decoding {
        WitnessDecoding::BasisIndex => amps[bits.to_index() % dom] = ONE,
        WitnessDecoding::SubsetMask => {
            let set: Vec<usize> = bits.0.iter().enumerate().filter(|(i, &b)| b && *i < dom).map(|(i, _)| i).collect();
            if set.is_empty() {
                return None;
            }
            let a = C64::new(1.0 / (set.len() as f64).sqrt(), 0.0);
            for x in set {
                amps[x] = a;
            }
        }
    }
    Some(PureState::from_parts(amps, DimTag::Augmented(m)))
}

pub const MAX_SWEEP_BITS: usize = 12;

/// Best acceptance over every ℓ-bit classical witness, for ℓ = 0..=max_bits.
/// Entry ℓ is (ℓ, best acceptance, a best string).
pub fn classical_witness_sweep(inst: &RohcInstance, max_bits: usize, decoding: WitnessDecoding) -> Result<Vec<(usize, f64, Bits)>> {
    if max_bits > MAX_SWEEP_BITS {
        return Err(Error::OutOfRange { name: "advice bits", value: max_bits as f64 });
    }
    let mut out = Vec::new();
    for l in 0..=max_bits {
        let mut best = (0.0, Bits::from_index(0, l));
        for s in 0..1usize << l {
            let bits = Bits::from_index(s, l);
            let Some(w) = decode_witness(&bits, inst.m(), decoding) else { continue };
            let acc = rohc_verify(inst, &w)?;
            if acc > best.0 {
                best = (acc, bits);
            }
        }
        out.push((l, best.0, best.1));
    }
    Ok(out)
}

/// Operator norm of the NO-instance acceptance operator.
pub fn soundness_gap(inst: &RohcInstance) -> f64 {
    operator_norm(acceptance_operator(inst).matrix())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::apply;
    use crate::rng::stream;

    fn limits() -> SizeLimits {
        SizeLimits::default()
    }

    #[test]
    fn no_instance_is_identity_and_rejects() {
        let mut rng = stream(1);
        let inst = generate_rohc(3, 1, TruthKind::No, &limits(), &mut rng).unwrap();
        assert_eq!(inst.c.matrix(), &CMatrix::identity(81));
        assert!(soundness_gap(&inst) <= 1e-9);
        let w = decode_witness(&Bits::from_index(3, 3), 3, WitnessDecoding::BasisIndex).unwrap();
        assert_eq!(rohc_verify(&inst, &w).unwrap(), 0.0);
        let out = rohc_clone(&inst, &w).unwrap();
        assert!((out.fidelity_with(&w.tensor(&PureState::bottom(3))).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn yes_instance_accepts_and_clones() {
        let mut rng = stream(2);
        let inst = generate_rohc(4, 2, TruthKind::Yes, &limits(), &mut rng).unwrap();
        let Truth::Yes(z) = inst.truth else { panic!() };
        let psi = preimage_state(&inst.h, z).unwrap();
        assert!((rohc_verify(&inst, &psi).unwrap() - 1.0).abs() < 1e-9);
        let out = apply(&inst.c, &psi.tensor(&PureState::bottom(4))).unwrap();
        assert!((out.fidelity_with(&psi.tensor(&psi)).unwrap() - 1.0).abs() < 1e-9);
        assert!(inst.c.involution_defect() < 1e-9);
        // orthogonal witness: untouched, rejected
        let other = inst.h.image().into_iter().find(|&y| y != z);
        if let Some(y) = other {
            let phi = preimage_state(&inst.h, y).unwrap();
            assert!(rohc_verify(&inst, &phi).unwrap() < 1e-12);
            let out = rohc_clone(&inst, &phi).unwrap();
            assert!((out.fidelity_with(&phi.tensor(&PureState::bottom(4))).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn acceptance_operator_structure() {
        let mut rng = stream(3);
        let inst = generate_rohc(3, 1, TruthKind::Yes, &limits(), &mut rng).unwrap();
        let Truth::Yes(z) = inst.truth else { panic!() };
        let m = acceptance_operator(&inst);
        assert!((m.matrix().trace().re - 1.0).abs() < 1e-9);
        let (top, v) = best_witness(&inst);
        assert!((top - 1.0).abs() < 1e-9);
        let psi = preimage_state(&inst.h, z).unwrap();
        assert!((v.overlap(&psi).unwrap().norm() - 1.0).abs() < 1e-9);
        let r = rohc_report(&inst, 50, &mut rng).unwrap();
        assert!(r.get("operator_consistency").unwrap() < 1e-9);
        assert!(rohc_verify(&inst, &PureState::bottom(3)).is_err());
    }

    #[test]
    fn composition_formula() {
        assert_eq!(composition_fidelity(1.0, 1.0).unwrap(), 1.0);
        assert!((composition_fidelity(0.9, 0.9).unwrap() - 0.45332).abs() < 1e-5);
        assert!((composition_fidelity(0.7, 1.0).unwrap() - 0.49).abs() < 1e-12);
        assert!(composition_fidelity(1.2, 0.5).is_err());
        assert_eq!(composition_fidelity(0.9, 0.9).unwrap(), lemma_bound(0.81, 0.9).unwrap());
    }

    #[test]
    fn exact_projector_leaves_witness_alone() {
        let mut rng = stream(4);
        let inst = generate_rohc(3, 1, TruthKind::Yes, &limits(), &mut rng).unwrap();
        let Truth::Yes(z) = inst.truth else { panic!() };
        let psi = preimage_state(&inst.h, z).unwrap();
        let pi = OperatorMatrix::projector(psi.density().matrix().clone(), DimTag::Augmented(3)).unwrap();
        let vc = VerifierCloner::new(&pi, rohc_cloner(&inst), Params { c: 1.0, f: 1.0, s: 0.0 }).unwrap();
        let out = combined_verifier_cloner(&vc, &psi, CombinedMode::Exact, &mut rng).unwrap();
        assert!(out.accept);
        assert!((out.measured.fidelity_with(&psi).unwrap() - 1.0).abs() < 1e-12);
        assert!((out.copies.fidelity_with(&psi.tensor(&psi)).unwrap() - 1.0).abs() < 1e-9);
        // orthogonal projector never accepts
        let phi = random_orthogonal_to(psi.amplitudes(), &mut rng);
        let perp = OperatorMatrix::projector(CMatrix::outer(&phi, &phi), DimTag::Augmented(3)).unwrap();
        let vc = VerifierCloner::new(&perp, rohc_cloner(&inst), Params { c: 0.0, f: 1.0, s: 0.0 }).unwrap();
        let out = combined_verifier_cloner(&vc, &psi, CombinedMode::Sampled, &mut rng).unwrap();
        assert!(!out.accept);
        assert!(out.accept_probability < 1e-12);
    }

    #[test]
    fn random_cases_respect_bound() {
        let mut rng = stream(5);
        let inst = generate_rohc(3, 1, TruthKind::Yes, &limits(), &mut rng).unwrap();
        for _ in 0..20 {
            let case = random_composition_case(&inst, &mut rng).unwrap();
            let s = composition_sample(&case, &mut rng).unwrap();
            assert!(s.measured_fidelity >= s.c * s.c - 1e-9);
            assert!(s.clone_fidelity >= s.bound - 1e-9, "{s:?}");
        }
    }

    #[test]
    fn sweep_finds_subset_witness() {
        let mut rng = stream(6);
        let inst = generate_rohc(3, 1, TruthKind::Yes, &limits(), &mut rng).unwrap();
        let sweep = classical_witness_sweep(&inst, 8, WitnessDecoding::SubsetMask).unwrap();
        assert!((sweep[8].1 - 1.0).abs() < 1e-9);
        let basis = classical_witness_sweep(&inst, 3, WitnessDecoding::BasisIndex).unwrap();
        assert!(basis[3].1 < 1.0 - 1e-6 || inst.h.preimages(match inst.truth { Truth::Yes(z) => z, _ => 0 }).len() == 1);
        assert!(classical_witness_sweep(&inst, 13, WitnessDecoding::BasisIndex).is_err());
    }
}
