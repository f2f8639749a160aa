//! Telegraphing protocols, reconstructors, and the reductions that turn a
//! telegraphing protocol into a cloner or a reconstructor.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::harness::stats::MeanEstimate;
use crate::parallel::{map_trials, Execution};
use crate::qcore::{DensityMatrix, PureState, QuantumState};
use crate::rng::{SeedTree, Stream};

/// A classical bit string.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Bits(pub Vec<bool>);

impl Bits {
    /// `value` written big-endian in `width` bits.
    pub fn from_index(value: usize, width: usize) -> Self {
        Bits((0..width).rev().map(|b| (value >> b) & 1 == 1).collect())
    }

    pub fn to_index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Bits needed to write indices `0..count`.
pub fn index_width(count: usize) -> usize {
    (usize::BITS - count.saturating_sub(1).leading_zeros()) as usize
}

/// A Send / Receive pair over a classical channel.
///
/// Implementations must be reentrant: all randomness comes from the stream
/// passed in, so trials can run concurrently.
pub trait TelegraphProtocol: Sync {
    fn send(&self, psi: &PureState, rng: &mut Stream) -> Result<Bits>;
    fn receive(&self, message: &Bits, rng: &mut Stream) -> Result<DensityMatrix>;
    /// Longest message, in bits.
    fn message_budget(&self) -> usize;
}

type SendFn = dyn Fn(&PureState, &mut Stream) -> Result<Bits> + Send + Sync;
type ReceiveFn = dyn Fn(&Bits, &mut Stream) -> Result<DensityMatrix> + Send + Sync;

/// A protocol built from two closures.
pub struct FnProtocol {
    send: Box<SendFn>,
    receive: Box<ReceiveFn>,
    budget: usize,
}

impl FnProtocol {
    pub fn new<S, R>(budget: usize, send: S, receive: R) -> Self
    where
        S: Fn(&PureState, &mut Stream) -> Result<Bits> + Send + Sync + 'static,
        R: Fn(&Bits, &mut Stream) -> Result<DensityMatrix> + Send + Sync + 'static,
    {
        FnProtocol { send: Box::new(send), receive: Box::new(receive), budget }
    }
}

impl TelegraphProtocol for FnProtocol {
    fn send(&self, psi: &PureState, rng: &mut Stream) -> Result<Bits> {
        (self.send)(psi, rng)
    }

    fn receive(&self, message: &Bits, rng: &mut Stream) -> Result<DensityMatrix> {
        (self.receive)(message, rng)
    }

    fn message_budget(&self) -> usize {
        self.budget
    }
}

/// Wraps a protocol so that receive succeeds only with probability η; otherwise
/// it outputs `junk`, which should be orthogonal to every state of interest.
pub struct NoisedProtocol<P> {
    inner: P,
    eta: f64,
    junk: DensityMatrix,
}

impl<P: TelegraphProtocol> NoisedProtocol<P> {
    pub fn new(inner: P, eta: f64, junk: &PureState) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::OutOfRange { name: "eta", value: eta });
        }
        Ok(NoisedProtocol { inner, eta, junk: junk.density() })
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn inner(&self) -> &P {
        &self.inner
    }
}

impl<P: TelegraphProtocol> TelegraphProtocol for NoisedProtocol<P> {
    fn send(&self, psi: &PureState, rng: &mut Stream) -> Result<Bits> {
        self.inner.send(psi, rng)
    }

    fn receive(&self, message: &Bits, rng: &mut Stream) -> Result<DensityMatrix> {
        // draw first so the stream advances the same way on both branches
        let keep = rng.random::<f64>() < self.eta;
        if keep {
            self.inner.receive(message, rng)
        } else {
            Ok(self.junk.clone())
        }
    }

    fn message_budget(&self) -> usize {
        self.inner.message_budget()
    }
}

/// Single-shot result of running a protocol's sender once and its receiver twice.
#[derive(Clone, Debug, PartialEq)]
pub enum CloneOutcome {
    Copies { message: Bits, first: DensityMatrix, second: DensityMatrix },
    Failed(String),
}

impl CloneOutcome {
    /// ⟨ψψ| ρ₁⊗ρ₂ |ψψ⟩, zero for a failed run.
    pub fn fidelity(&self, psi: &PureState) -> f64 {
        match self {
            CloneOutcome::Copies { first, second, .. } => match (first.fidelity_with(psi), second.fidelity_with(psi)) {
                (Ok(a), Ok(b)) => a * b,
                _ => 0.0,
            },
            CloneOutcome::Failed(_) => 0.0,
        }
    }

    /// The two-register state ρ₁ ⊗ ρ₂.
    pub fn state(&self) -> Option<DensityMatrix> {
        match self {
            CloneOutcome::Copies { first, second, .. } => Some(first.tensor(second)),
            CloneOutcome::Failed(_) => None,
        }
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, CloneOutcome::Failed(_))
    }
}

fn send_checked<P: TelegraphProtocol + ?Sized>(p: &P, psi: &PureState, rng: &mut Stream) -> Result<Bits> {
    let c = p.send(psi, rng)?;
    if c.len() > p.message_budget() {
        return Err(Error::InvalidConfig(format!("message of {} bits exceeds budget {}", c.len(), p.message_budget())));
    }
    Ok(c)
}

fn receive_checked<P: TelegraphProtocol + ?Sized>(p: &P, c: &Bits, psi: &PureState, rng: &mut Stream) -> Result<DensityMatrix> {
    let rho = p.receive(c, rng)?;
    if rho.dim() != psi.dim() {
        return Err(Error::DimensionMismatch { expected: psi.dim(), found: rho.dim() });
    }
    Ok(rho)
}

/// Sends ψ once and receives the message twice with independent randomness.
/// Any protocol error becomes a failed outcome.
pub fn clone_via_telegraph<P: TelegraphProtocol + ?Sized>(p: &P, psi: &PureState, rng: &mut Stream) -> CloneOutcome {
    let run = |rng: &mut Stream| -> Result<CloneOutcome> {
        let message = send_checked(p, psi, rng)?;
        let first = receive_checked(p, &message, psi, rng)?;
        let second = receive_checked(p, &message, psi, rng)?;
        Ok(CloneOutcome::Copies { message, first, second })
    };
    run(rng).unwrap_or_else(|e| CloneOutcome::Failed(e.to_string()))
}

/// Fidelity of Receive(Send(ψ)) with ψ; zero when the protocol fails.
pub fn telegraph_fidelity<P: TelegraphProtocol + ?Sized>(p: &P, psi: &PureState, rng: &mut Stream) -> f64 {
    let run = |rng: &mut Stream| -> Result<f64> {
        let c = send_checked(p, psi, rng)?;
        receive_checked(p, &c, psi, rng)?.fidelity_with(psi)
    };
    run(rng).unwrap_or(0.0)
}

/// Monte-Carlo single-copy telegraph fidelity and two-copy clone fidelity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReductionEstimate {
    pub telegraph: MeanEstimate,
    pub clone: MeanEstimate,
}

pub fn estimate_reduction<P: TelegraphProtocol + ?Sized>(
    p: &P,
    psi: &PureState,
    trials: u64,
    seeds: SeedTree,
    exec: Execution,
) -> ReductionEstimate {
    let pairs = map_trials(trials, seeds, exec, |_, s| {
        let mut rng = s.stream();
        let t = telegraph_fidelity(p, psi, &mut rng);
        let c = clone_via_telegraph(p, psi, &mut rng).fidelity(psi);
        (t, c)
    });
    let (t, c): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    ReductionEstimate { telegraph: MeanEstimate::from_samples(&t), clone: MeanEstimate::from_samples(&c) }
}

/// Produces a state from classical advice alone.
pub trait Reconstructor: Sync {
    fn reconstruct(&self, advice: &Bits, rng: &mut Stream) -> Result<DensityMatrix>;
    fn advice(&self) -> &Bits;
    /// ℓ, in bits.
    fn advice_budget(&self) -> usize;

    /// Runs on the stored advice.
    fn run(&self, rng: &mut Stream) -> Result<DensityMatrix> {
        if self.advice().len() > self.advice_budget() {
            return Err(Error::InvalidConfig(format!(
                "advice of {} bits exceeds budget {}",
                self.advice().len(),
                self.advice_budget()
            )));
        }
        self.reconstruct(self.advice(), rng)
    }
}

type ReconstructFn = dyn Fn(&Bits, &mut Stream) -> Result<DensityMatrix> + Send + Sync;

pub struct FnReconstructor {
    advice: Bits,
    budget: usize,
    f: Box<ReconstructFn>,
}

impl FnReconstructor {
    pub fn new<F>(advice: Bits, budget: usize, f: F) -> Self
    where
        F: Fn(&Bits, &mut Stream) -> Result<DensityMatrix> + Send + Sync + 'static,
    {
        FnReconstructor { advice, budget, f: Box::new(f) }
    }

    /// Ignores its (empty) advice and always outputs `state`.
    pub fn constant(state: DensityMatrix) -> Self {
        FnReconstructor::new(Bits::default(), 0, move |_, _| Ok(state.clone()))
    }
}

impl Reconstructor for FnReconstructor {
    fn reconstruct(&self, advice: &Bits, rng: &mut Stream) -> Result<DensityMatrix> {
        (self.f)(advice, rng)
    }

    fn advice(&self) -> &Bits {
        &self.advice
    }

    fn advice_budget(&self) -> usize {
        self.budget
    }
}

/// A protocol's receiver with a fixed message as advice.
pub struct ReceiverReconstructor<'a, P: ?Sized> {
    protocol: &'a P,
    advice: Bits,
}

impl<'a, P: TelegraphProtocol + ?Sized> ReceiverReconstructor<'a, P> {
    pub fn new(protocol: &'a P, advice: Bits) -> Self {
        ReceiverReconstructor { protocol, advice }
    }
}

impl<P: TelegraphProtocol + ?Sized> Reconstructor for ReceiverReconstructor<'_, P> {
    fn reconstruct(&self, advice: &Bits, rng: &mut Stream) -> Result<DensityMatrix> {
        self.protocol.receive(advice, rng)
    }

    fn advice(&self) -> &Bits {
        &self.advice
    }

    fn advice_budget(&self) -> usize {
        self.protocol.message_budget()
    }
}

/// Best message found by sampling the sender.
#[derive(Clone, Debug, PartialEq)]
pub struct AdviceChoice {
    pub advice: Bits,
    /// Mean receive fidelity of `advice` over its occurrences.
    pub fidelity: f64,
    pub std_err: f64,
    /// Mean fidelity over all sampled runs, i.e. the protocol's telegraph fidelity.
    pub mean_fidelity: f64,
    pub distinct_messages: usize,
}

/// Samples Send(ψ) `trials` times, scores each distinct message by the mean
/// fidelity of Receive on it, and returns the best one.
pub fn reconstructor_via_telegraph<P: TelegraphProtocol + ?Sized>(
    p: &P,
    psi: &PureState,
    trials: u64,
    rng: &mut Stream,
) -> Result<AdviceChoice> {
    if trials == 0 {
        return Err(Error::NoMessageObserved);
    }
    let mut scores: BTreeMap<Bits, Vec<f64>> = BTreeMap::new();
    let mut all = Vec::with_capacity(trials as usize);
    for _ in 0..trials {
        let Ok(c) = send_checked(p, psi, rng) else {
            all.push(0.0);
            continue;
        };
        let fid = receive_checked(p, &c, psi, rng).and_then(|rho| rho.fidelity_with(psi)).unwrap_or(0.0);
        all.push(fid);
        scores.entry(c).or_default().push(fid);
    }
    let mean_fidelity = all.iter().sum::<f64>() / all.len() as f64;
    let distinct_messages = scores.len();
    let (advice, est) = scores
        .into_iter()
        .map(|(c, xs)| (c, MeanEstimate::from_samples(&xs)))
        .fold(None::<(Bits, MeanEstimate)>, |best, (c, e)| match best {
            Some((bc, be)) if be.mean >= e.mean => Some((bc, be)),
            _ => Some((c, e)),
        })
        .ok_or(Error::NoMessageObserved)?;
    Ok(AdviceChoice { advice, fidelity: est.mean, std_err: est.std_err, mean_fidelity, distinct_messages })
}
