//! Public-key encryption whose secret key is a clonable quantum witness, over
//! abstract witness-encryption and instance-sampler interfaces.
//!
//! [`ToyWitnessEncryption`] is **INSECURE**. It simulates a trusted party that
//! releases the message pad whenever the verifier accepts the offered key; it
//! exists so that the construction can be exercised end to end, and offers no
//! secrecy whatsoever.

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::complexity::{
    acceptance_operator, combined_verifier_cloner, generate_rohc, rohc_cloner, rohc_verify, CombinedMode, Params, RohcInstance,
    TruthKind, VerifierCloner,
};
use crate::error::{Error, Result};
use crate::harness::report::ExperimentReport;
use crate::nogo::tasks::Bits;
use crate::parallel::{map_trials, Execution};
use crate::qcore::{DensityMatrix, OperatorKind, OperatorMatrix, PureState, QuantumState, Subsystem};
use crate::rng::{SeedTree, Stream};
use crate::scheme::{preimage_state, SizeLimits};

/// Public instance plus a digest that names it inside ciphertexts.
#[derive(Clone, Debug, PartialEq)]
pub struct PublicKey {
    pub instance: RohcInstance,
    pub id: [u8; 32],
}

impl PublicKey {
    pub fn new(instance: RohcInstance) -> Self {
        let id = instance_id(&instance);
        PublicKey { instance, id }
    }
}

/// SHA-256 over the function table and the oracle entries.
pub fn instance_id(inst: &RohcInstance) -> [u8; 32] {
    let mut h = Sha256::new();
    h.update(inst.h.to_text().as_bytes());
    for c in inst.c.matrix().as_slice() {
        h.update(c.re.to_le_bytes());
        h.update(c.im.to_le_bytes());
    }
    let mut out = [0u8; 32];
    out.copy_from_slice(h.finalize().as_slice());
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct KeyPair {
    pub pk: PublicKey,
    pub sk: PureState,
}

/// Draws YES instances with a witness.
pub trait InstanceSampler: Sync {
    fn sample(&self, rng: &mut Stream) -> Result<(RohcInstance, PureState)>;
}

/// YES instances of the hidden-cloning problem with witness ψ_z.
#[derive(Clone, Debug, PartialEq)]
pub struct RohcSampler {
    pub m: usize,
    pub n: usize,
    pub limits: SizeLimits,
}

impl InstanceSampler for RohcSampler {
    fn sample(&self, rng: &mut Stream) -> Result<(RohcInstance, PureState)> {
        let inst = generate_rohc(self.m, self.n, TruthKind::Yes, &self.limits, rng)
            .map_err(|e| Error::SamplerFailure(e.to_string()))?;
        let crate::complexity::Truth::Yes(z) = inst.truth else {
            return Err(Error::SamplerFailure("sampler produced a NO instance".into()));
        };
        let w = preimage_state(&inst.h, z).map_err(|e| Error::SamplerFailure(e.to_string()))?;
        Ok((inst, w))
    }
}

pub fn ne_gen<S: InstanceSampler + ?Sized>(sampler: &S, rng: &mut Stream) -> Result<KeyPair> {
    let (inst, sk) = sampler.sample(rng)?;
    Ok(KeyPair { pk: PublicKey::new(inst), sk })
}

/// Result of a decryption attempt: the message (None for ⊥) and the key left behind.
#[derive(Clone, Debug, PartialEq)]
pub struct Decryption {
    pub message: Option<Vec<u8>>,
    pub key: DensityMatrix,
    /// Probability that this key is accepted.
    pub accept_probability: f64,
}

pub trait WitnessEncryption: Sync {
    fn enc(&self, pk: &PublicKey, message: &[u8], rng: &mut Stream) -> Result<Vec<u8>>;
    fn dec(&self, pk: &PublicKey, ciphertext: &[u8], witness: &DensityMatrix, rng: &mut Stream) -> Result<Decryption>;
}

pub const CIPHERTEXT_VERSION: u8 = 1;
pub const NONCE_LEN: usize = 16;

/// Wire format: version byte, then instance id, masked message and nonce,
/// each as a u32 little-endian length followed by the bytes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    pub instance_id: Vec<u8>,
    pub body: Vec<u8>,
    pub nonce: Vec<u8>,
}

impl Ciphertext {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = vec![CIPHERTEXT_VERSION];
        for field in [&self.instance_id, &self.body, &self.nonce] {
            out.extend_from_slice(&(field.len() as u32).to_le_bytes());
            out.extend_from_slice(field);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let (&version, mut rest) = bytes.split_first().ok_or_else(|| Error::MalformedCiphertext("empty".into()))?;
        if version != CIPHERTEXT_VERSION {
            return Err(Error::MalformedCiphertext(format!("unknown version {version}")));
        }
        let mut fields = Vec::with_capacity(3);
        for name in ["instance id", "body", "nonce"] {
            if rest.len() < 4 {
                return Err(Error::MalformedCiphertext(format!("truncated {name} length")));
            }
            let len = u32::from_le_bytes(rest[..4].try_into().expect("4 bytes")) as usize;
            rest = &rest[4..];
            if rest.len() < len {
                return Err(Error::MalformedCiphertext(format!("truncated {name}")));
            }
            fields.push(rest[..len].to_vec());
            rest = &rest[len..];
        }
        if !rest.is_empty() {
            return Err(Error::MalformedCiphertext(format!("{} trailing bytes", rest.len())));
        }
        let nonce = fields.pop().expect("three fields");
        let body = fields.pop().expect("three fields");
        let instance_id = fields.pop().expect("three fields");
        Ok(Ciphertext { instance_id, body, nonce })
    }
}

/// SHA-256 in counter mode over (id ‖ nonce ‖ counter).
fn keystream(id: &[u8], nonce: &[u8], len: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(len + 32);
    let mut counter = 0u64;
    while out.len() < len {
        let mut h = Sha256::new();
        h.update(id);
        h.update(nonce);
        h.update(counter.to_le_bytes());
        out.extend_from_slice(h.finalize().as_slice());
        counter += 1;
    }
    out.truncate(len);
    out
}

/// INSECURE toy witness encryption: anyone holding the ciphertext and the
/// public instance can recompute the pad. Decryption measures the verifier on
/// the offered key and releases the message on acceptance.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ToyWitnessEncryption;

impl WitnessEncryption for ToyWitnessEncryption {
    fn enc(&self, pk: &PublicKey, message: &[u8], rng: &mut Stream) -> Result<Vec<u8>> {
        if message.is_empty() {
            return Err(Error::EmptyMessage);
        }
        let mut nonce = [0u8; NONCE_LEN];
        rng.fill(&mut nonce);
        let pad = keystream(&pk.id, &nonce, message.len());
        let body = message.iter().zip(&pad).map(|(a, b)| a ^ b).collect();
        Ok(Ciphertext { instance_id: pk.id.to_vec(), body, nonce: nonce.to_vec() }.to_bytes())
    }

    fn dec(&self, pk: &PublicKey, ciphertext: &[u8], witness: &DensityMatrix, rng: &mut Stream) -> Result<Decryption> {
        let ct = Ciphertext::from_bytes(ciphertext)?;
        let vc = verifier_cloner(pk)?;
        let out = combined_verifier_cloner_mixed(&vc, witness, rng)?;
        let message = (out.0 && ct.instance_id == pk.id).then(|| {
            let pad = keystream(&pk.id, &ct.nonce, ct.body.len());
            ct.body.iter().zip(&pad).map(|(a, b)| a ^ b).collect()
        });
        Ok(Decryption { message, key: out.1, accept_probability: out.2 })
    }
}

/// The instance's verifier projector paired with its cloner.
pub fn verifier_cloner(pk: &PublicKey) -> Result<VerifierCloner<crate::complexity::UnitaryCloner>> {
    let m = acceptance_operator(&pk.instance);
    let p = OperatorMatrix::projector(m.into_matrix(), crate::qcore::DimTag::Augmented(pk.instance.m()))?;
    debug_assert_eq!(p.kind(), OperatorKind::Projector);
    VerifierCloner::new(&p, rohc_cloner(&pk.instance), Params { c: 1.0, f: 1.0, s: 0.0 })
}

/// Sampled verifier-then-cloner on a possibly mixed key. Returns the accept
/// bit, the post-measurement key, and the acceptance probability.
fn combined_verifier_cloner_mixed<C: crate::complexity::Cloner>(
    vc: &VerifierCloner<C>,
    key: &DensityMatrix,
    rng: &mut Stream,
) -> Result<(bool, DensityMatrix, f64)> {
    // purify by eigen-decomposition so the shared routine applies
    let (vals, vecs) = crate::qcore::hermitian_eigen(key.matrix());
    let weights: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
    let k = crate::qcore::measure::sample_index(&weights, rng);
    let pure = PureState::normalized(vecs.column(k), key.tag().clone())?;
    let p = vc.accept_projector().expectation_density(key.matrix()).clamp(0.0, 1.0);
    if weights.iter().filter(|&&w| w > 1e-12).count() == 1 {
        let out = combined_verifier_cloner(vc, &pure, CombinedMode::Sampled, rng)?;
        return Ok((out.accept, out.measured, p));
    }
    // mixed key: measure the mixture directly
    let accept = rng.random::<f64>() < p;
    let proj = if accept { vc.accept_projector().clone() } else { vc.accept_projector().clone().complement() };
    let w = if accept { p } else { 1.0 - p };
    let post = proj.sandwich(key.matrix()).scale(crate::qcore::C64::new(1.0 / w.max(1e-300), 0.0));
    Ok((accept, DensityMatrix::new(post, key.tag().clone())?, p))
}

pub fn ne_enc<W: WitnessEncryption + ?Sized>(we: &W, pk: &PublicKey, message: &[u8], rng: &mut Stream) -> Result<Vec<u8>> {
    we.enc(pk, message, rng)
}

/// Decrypts with the key, returning the message (or ⊥) and the key left over.
pub fn ne_dec<W: WitnessEncryption + ?Sized>(
    we: &W,
    sk: &DensityMatrix,
    pk: &PublicKey,
    ciphertext: &[u8],
    rng: &mut Stream,
) -> Result<Decryption> {
    if sk.dim() != pk.instance.aug_dim() {
        return Err(Error::DimensionMismatch { expected: pk.instance.aug_dim(), found: sk.dim() });
    }
    we.dec(pk, ciphertext, sk, rng)
}

/// Runs the instance's cloner on a key and returns the two marginals.
pub fn clone_key(pk: &PublicKey, sk: &DensityMatrix) -> Result<(DensityMatrix, DensityMatrix)> {
    use crate::complexity::Cloner;
    let joint = rohc_cloner(&pk.instance).clone_state(sk)?;
    let d = pk.instance.aug_dim();
    let tag = sk.tag().clone();
    let a = joint.partial_trace(d, d, Subsystem::First)?.with_tag(tag.clone())?;
    let b = joint.partial_trace(d, d, Subsystem::Second)?.with_tag(tag)?;
    Ok((a, b))
}

/// `steps` sequential decryptions of fresh ciphertexts with one evolving key.
/// Reports the exact probability that all succeed and whether the sampled
/// run recovered every message.
pub fn decryption_chain<W: WitnessEncryption + ?Sized>(we: &W, kp: &KeyPair, steps: usize, rng: &mut Stream) -> Result<(f64, bool)> {
    let mut key = kp.sk.density();
    let mut p_all = 1.0;
    let mut ok = true;
    for _ in 0..steps {
        let msg: Vec<u8> = (0..16).map(|_| rng.random()).collect();
        let ct = ne_enc(we, &kp.pk, &msg, rng)?;
        let d = ne_dec(we, &key, &kp.pk, &ct, rng)?;
        p_all *= d.accept_probability;
        ok &= d.message.as_deref() == Some(msg.as_slice());
        key = d.key;
    }
    Ok((p_all, ok))
}

/// Clones the key into 2^levels copies and decrypts one ciphertext with each.
pub fn parallel_decryption<W: WitnessEncryption + ?Sized>(we: &W, kp: &KeyPair, levels: u32, rng: &mut Stream) -> Result<(f64, bool, usize)> {
    let mut keys = vec![kp.sk.density()];
    for _ in 0..levels {
        let mut next = Vec::with_capacity(keys.len() * 2);
        for k in &keys {
            let (a, b) = clone_key(&kp.pk, k)?;
            next.push(a);
            next.push(b);
        }
        keys = next;
    }
    let msg: Vec<u8> = (0..16).map(|_| rng.random()).collect();
    let ct = ne_enc(we, &kp.pk, &msg, rng)?;
    let mut p_all = 1.0;
    let mut ok = true;
    for k in &keys {
        let d = ne_dec(we, k, &kp.pk, &ct, rng)?;
        p_all *= d.accept_probability;
        ok &= d.message.as_deref() == Some(msg.as_slice());
    }
    Ok((p_all, ok, keys.len()))
}

type SendAdversary = dyn Fn(&DensityMatrix, &PublicKey, &mut Stream) -> Bits + Sync;
type ReceiveAdversary = dyn Fn(&Bits, &PublicKey, &[u8], &mut Stream) -> bool + Sync;

/// Exfiltration game: Send sees the secret key and emits a classical string;
/// Receive sees only that string, the public key and an encryption of m_b,
/// and outputs a guess. Reports W₀, W₁ (probability of outputting 1 given b)
/// and the advantage |W₀ − W₁|. No hardness is claimed.
#[allow(clippy::too_many_arguments)]
pub fn exfiltration_game<W: WitnessEncryption + ?Sized, S: InstanceSampler + ?Sized>(
    we: &W,
    sampler: &S,
    send: &SendAdversary,
    receive: &ReceiveAdversary,
    m0: &[u8],
    m1: &[u8],
    trials: u64,
    seeds: SeedTree,
    exec: Execution,
) -> Result<ExperimentReport> {
    let outcomes = map_trials(trials, seeds, exec, |_, s| -> Result<(bool, bool)> {
        let mut rng = s.stream();
        let kp = ne_gen(sampler, &mut rng)?;
        let b = rng.random::<bool>();
        let msg = if b { m1 } else { m0 };
        let advice = send(&kp.sk.density(), &kp.pk, &mut rng);
        let ct = ne_enc(we, &kp.pk, msg, &mut rng)?;
        Ok((b, receive(&advice, &kp.pk, &ct, &mut rng)))
    });
    let (mut n, mut ones) = ([0u64; 2], [0u64; 2]);
    for o in outcomes {
        let (b, guess) = o?;
        n[b as usize] += 1;
        ones[b as usize] += guess as u64;
    }
    let w = |i: usize| if n[i] == 0 { f64::NAN } else { ones[i] as f64 / n[i] as f64 };
    let mut r = ExperimentReport::new("exfiltration", seeds.raw());
    r.param("trials", trials);
    r.metric("w0", w(0)).metric("w1", w(1)).metric("advantage", (w(0) - w(1)).abs());
    r.note("advantage is measured for the supplied adversary only");
    Ok(r)
}

/// Send measures the key in the computational basis; Receive rebuilds that
/// basis state and tries to decrypt with it.
pub fn basis_exfiltration_adversary() -> (Box<SendAdversary>, Box<ReceiveAdversary>) {
    let send = |key: &DensityMatrix, pk: &PublicKey, rng: &mut Stream| -> Bits {
        let weights: Vec<f64> = (0..key.dim()).map(|i| key.matrix()[(i, i)].re.max(0.0)).collect();
        let x = crate::qcore::measure::sample_index(&weights, rng);
        Bits::from_index(x, crate::nogo::tasks::index_width(pk.instance.aug_dim()))
    };
    let receive = |advice: &Bits, pk: &PublicKey, ct: &[u8], rng: &mut Stream| -> bool {
        let x = advice.to_index().min(pk.instance.h.domain_size() - 1);
        let key = PureState::basis(crate::qcore::DimTag::Augmented(pk.instance.m()), x).density();
        match ToyWitnessEncryption.dec(pk, ct, &key, rng) {
            Ok(Decryption { message: Some(m), .. }) => m.first().is_some_and(|b| b & 1 == 1),
            _ => rng.random(),
        }
    };
    (Box::new(send), Box::new(receive))
}

/// Exact probability that a key is accepted by the instance's verifier.
pub fn key_acceptance(pk: &PublicKey, sk: &PureState) -> Result<f64> {
    rohc_verify(&pk.instance, sk)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    fn sampler(m: usize, n: usize) -> RohcSampler {
        RohcSampler { m, n, limits: SizeLimits::default() }
    }

    #[test]
    fn keys_verify_and_differ_by_seed() {
        let a = ne_gen(&sampler(4, 1), &mut stream(1)).unwrap();
        let b = ne_gen(&sampler(4, 1), &mut stream(2)).unwrap();
        assert!((key_acceptance(&a.pk, &a.sk).unwrap() - 1.0).abs() < 1e-9);
        assert_ne!(a.pk.id, b.pk.id);
        let again = ne_gen(&sampler(4, 1), &mut stream(1)).unwrap();
        assert_eq!(again.pk.id, a.pk.id);
    }

    #[test]
    fn cloned_keys_verify() {
        let kp = ne_gen(&sampler(3, 1), &mut stream(3)).unwrap();
        let (a, b) = clone_key(&kp.pk, &kp.sk.density()).unwrap();
        for k in [&a, &b] {
            assert!((k.fidelity_with(&kp.sk).unwrap() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ciphertext_format() {
        let ct = Ciphertext { instance_id: vec![1, 2], body: vec![3], nonce: vec![] };
        let bytes = ct.to_bytes();
        assert_eq!(bytes, vec![1, 2, 0, 0, 0, 1, 2, 1, 0, 0, 0, 3, 0, 0, 0, 0]);
        assert_eq!(Ciphertext::from_bytes(&bytes).unwrap(), ct);
        assert!(Ciphertext::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        assert!(Ciphertext::from_bytes(&[2]).is_err());
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(Ciphertext::from_bytes(&extra).is_err());
    }

    #[test]
    fn round_trip_and_randomized() {
        let mut rng = stream(4);
        let kp = ne_gen(&sampler(3, 1), &mut rng).unwrap();
        let we = ToyWitnessEncryption;
        let c1 = ne_enc(&we, &kp.pk, b"hello", &mut rng).unwrap();
        let c2 = ne_enc(&we, &kp.pk, b"hello", &mut rng).unwrap();
        assert_ne!(c1, c2);
        let d = ne_dec(&we, &kp.sk.density(), &kp.pk, &c1, &mut rng).unwrap();
        assert_eq!(d.message.as_deref(), Some(&b"hello"[..]));
        assert!((d.key.fidelity_with(&kp.sk).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(ne_enc(&we, &kp.pk, b"", &mut rng).unwrap_err(), Error::EmptyMessage);
    }

    #[test]
    fn junk_key_yields_bottom() {
        let mut rng = stream(5);
        let kp = ne_gen(&sampler(3, 1), &mut rng).unwrap();
        let we = ToyWitnessEncryption;
        let ct = ne_enc(&we, &kp.pk, b"x", &mut rng).unwrap();
        let junk = PureState::bottom(3).density();
        for _ in 0..20 {
            let d = ne_dec(&we, &junk, &kp.pk, &ct, &mut rng).unwrap();
            assert!(d.message.is_none());
            assert_eq!(d.accept_probability, 0.0);
        }
    }

    #[test]
    fn chains_and_parallel_keys() {
        let mut rng = stream(6);
        let kp = ne_gen(&sampler(3, 1), &mut rng).unwrap();
        let (p, ok) = decryption_chain(&ToyWitnessEncryption, &kp, 8, &mut rng).unwrap();
        assert!(ok && (p - 1.0).abs() < 1e-9);
        let (p, ok, n) = parallel_decryption(&ToyWitnessEncryption, &kp, 2, &mut rng).unwrap();
        assert_eq!(n, 4);
        assert!(ok && (p - 1.0).abs() < 1e-9);
    }

    #[test]
    fn mixed_key_acceptance() {
        let mut rng = stream(7);
        let kp = ne_gen(&sampler(3, 1), &mut rng).unwrap();
        let mix = DensityMatrix::mixture(&[(0.5, &kp.sk.density()), (0.5, &PureState::bottom(3).density())]).unwrap();
        let ct = ne_enc(&ToyWitnessEncryption, &kp.pk, b"m", &mut rng).unwrap();
        let d = ne_dec(&ToyWitnessEncryption, &mix, &kp.pk, &ct, &mut rng).unwrap();
        assert!((d.accept_probability - 0.5).abs() < 1e-9);
    }

    #[test]
    fn exfiltration_game_runs() {
        let (s, r) = basis_exfiltration_adversary();
        let rep = exfiltration_game(
            &ToyWitnessEncryption,
            &sampler(2, 1),
            s.as_ref(),
            r.as_ref(),
            &[0],
            &[1],
            200,
            SeedTree::new(8),
            Execution::Sequential,
        )
        .unwrap();
        let adv = rep.get("advantage").unwrap();
        assert!((0.0..=1.0).contains(&adv));
    }
}
