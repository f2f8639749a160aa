//! Oracle algorithms as explicit circuits, query magnitudes, and the effect
//! of swapping oracle answers on a set of (call, input) pairs.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use crate::error::{Error, Result};
use crate::harness::report::ExperimentReport;
use crate::parallel::{map_trials, Execution};
use crate::qcore::matrix::{norm, CMatrix, C64, ONE, ZERO};
use crate::qcore::random::{orthonormalize_against, random_unitary};
use crate::qcore::state::check_dim;
use crate::qcore::{apply_to_registers, bottom_index, exact_distribution, DimTag, OperatorKind, OperatorMatrix, PureState, Pvm, QuantumState};
use crate::rng::SeedTree;
use crate::scheme::{preimage_state, sample_label_of, sample_random_function, xor_oracle, ClassicalFunction, Label, SizeLimits};

pub type SlotId = usize;

#[derive(Clone, Debug, PartialEq)]
pub enum Step {
    /// A unitary on the whole register file.
    FixedUnitary(OperatorMatrix),
    /// A unitary on the listed registers, in that order.
    Local { op: OperatorMatrix, registers: Vec<usize> },
    /// One query to the oracle in `slot` on the listed registers.
    OracleCall { slot: SlotId, registers: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdversaryCircuit {
    dims: Vec<usize>,
    initial: PureState,
    steps: Vec<Step>,
    final_measurement: Pvm,
}

fn check_registers(dims: &[usize], registers: &[usize]) -> Result<usize> {
    let mut seen = BTreeSet::new();
    let mut sub = 1;
    for &r in registers {
        if r >= dims.len() || !seen.insert(r) {
            return Err(Error::InvalidConfig(format!("bad register list {registers:?} for {} registers", dims.len())));
        }
        sub *= dims[r];
    }
    Ok(sub)
}

impl AdversaryCircuit {
    pub fn new(dims: Vec<usize>, initial: PureState, steps: Vec<Step>, final_measurement: Pvm) -> Result<Self> {
        let total: usize = dims.iter().product();
        check_dim(total, initial.dim())?;
        check_dim(total, final_measurement.dim())?;
        for s in &steps {
            match s {
                Step::FixedUnitary(u) => {
                    check_dim(total, u.dim())?;
                    if u.kind() != OperatorKind::Unitary {
                        return Err(Error::WrongKind { expected: "unitary", residual: f64::NAN });
                    }
                }
                Step::Local { op, registers } => {
                    check_dim(check_registers(&dims, registers)?, op.dim())?;
                    if op.kind() != OperatorKind::Unitary {
                        return Err(Error::WrongKind { expected: "unitary", residual: f64::NAN });
                    }
                }
                Step::OracleCall { registers, .. } => {
                    check_registers(&dims, registers)?;
                }
            }
        }
        Ok(AdversaryCircuit { dims, initial, steps, final_measurement })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// T, the number of oracle calls.
    pub fn num_calls(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::OracleCall { .. })).count()
    }

    /// Slot of each call, in call order.
    pub fn call_slots(&self) -> Vec<SlotId> {
        self.steps
            .iter()
            .filter_map(|s| match s {
                Step::OracleCall { slot, .. } => Some(*slot),
                _ => None,
            })
            .collect()
    }
}

/// An oracle as seen by a circuit. A classical oracle is a permutation that
/// only rewrites answer bits; `query_of[j]` names the oracle input queried by
/// basis state j of the called registers.
#[derive(Clone, Debug, PartialEq)]
pub struct CircuitOracle {
    op: OperatorMatrix,
    query_of: Option<Vec<usize>>,
}

impl CircuitOracle {
    pub fn quantum(op: OperatorMatrix) -> Self {
        CircuitOracle { op, query_of: None }
    }

    pub fn classical(op: OperatorMatrix, query_of: Vec<usize>) -> Result<Self> {
        check_dim(op.dim(), query_of.len())?;
        if op.kind() != OperatorKind::Unitary || !op.is_permutation() {
            return Err(Error::InvalidConfig("classical oracle must be a permutation".into()));
        }
        let m = op.matrix();
        for j in 0..op.dim() {
            let i = (0..op.dim()).find(|&i| m[(i, j)] != ZERO).expect("permutation column");
            if query_of[i] != query_of[j] {
                return Err(Error::InvalidConfig(format!("oracle moves query {} to {}", query_of[j], query_of[i])));
            }
        }
        Ok(CircuitOracle { op, query_of: Some(query_of) })
    }

    /// |x⟩|y⟩ → |x⟩|y ⊕ f(x)⟩; the query is x.
    pub fn xor(f: &ClassicalFunction) -> Self {
        let n = f.n();
        let query_of = (0..f.domain_size() << n).map(|i| i >> n).collect();
        CircuitOracle { op: xor_oracle(f), query_of: Some(query_of) }
    }

    /// On registers of dimensions (d1, d2): flips the low bit of the second
    /// register when (first, second >> 1) = `target`. The query is
    /// (first, second >> 1); an unpaired top value of an odd d2 is its own query.
    pub fn indicator(d1: usize, d2: usize, target: Option<(usize, usize)>) -> Self {
        let half = d2.div_ceil(2);
        let mut perm: Vec<usize> = (0..d1 * d2).collect();
        if let Some((a, b)) = target {
            let (lo, hi) = (2 * b, 2 * b + 1);
            assert!(a < d1 && hi < d2, "indicator target out of range");
            perm[a * d2 + lo] = a * d2 + hi;
            perm[a * d2 + hi] = a * d2 + lo;
        }
        let query_of = (0..d1 * d2).map(|i| (i / d2) * half + (i % d2) / 2).collect();
        let tag = DimTag::Product(vec![DimTag::Qudit(d1), DimTag::Qudit(d2)]);
        CircuitOracle { op: OperatorMatrix::unitary_unchecked(CMatrix::permutation(&perm), tag), query_of: Some(query_of) }
    }

    pub fn op(&self) -> &OperatorMatrix {
        &self.op
    }

    pub fn is_classical(&self) -> bool {
        self.query_of.is_some()
    }

    pub fn query_labels(&self) -> Option<&[usize]> {
        self.query_of.as_deref()
    }
}

pub type OracleTable = BTreeMap<SlotId, CircuitOracle>;

/// Pre-call states of a run, and its final state.
#[derive(Clone, Debug, PartialEq)]
pub struct RunTrace {
    /// (slot, registers, state just before the call) for each call.
    pub calls: Vec<(SlotId, Vec<usize>, Vec<C64>)>,
    pub final_state: PureState,
    pub distribution: Vec<f64>,
}

pub fn trace_circuit(c: &AdversaryCircuit, oracles: &OracleTable) -> Result<RunTrace> {
    let mut v = c.initial.amplitudes().to_vec();
    let mut calls = Vec::new();
    for s in &c.steps {
        v = match s {
            Step::FixedUnitary(u) => u.matrix().mul_vec(&v),
            Step::Local { op, registers } => apply_to_registers(&v, &c.dims, registers, op.matrix())?,
            Step::OracleCall { slot, registers } => {
                let o = oracles.get(slot).ok_or(Error::UnknownSlot(*slot))?;
                let out = apply_to_registers(&v, &c.dims, registers, o.op.matrix())?;
                calls.push((*slot, registers.clone(), v));
                out
            }
        };
    }
    let final_state = PureState::from_parts(v, c.initial.tag().clone());
    let distribution = exact_distribution(&c.final_measurement, &final_state)?;
    Ok(RunTrace { calls, final_state, distribution })
}

/// Final state and exact outcome distribution.
pub fn run_circuit(c: &AdversaryCircuit, oracles: &OracleTable) -> Result<(PureState, Vec<f64>)> {
    let t = trace_circuit(c, oracles)?;
    Ok((t.final_state, t.distribution))
}

/// Probability of each basis state of `targets` in `amps`.
pub fn register_marginal(amps: &[C64], dims: &[usize], targets: &[usize]) -> Vec<f64> {
    let mut strides = vec![1usize; dims.len()];
    for r in (0..dims.len().saturating_sub(1)).rev() {
        strides[r] = strides[r + 1] * dims[r + 1];
    }
    let sub: usize = targets.iter().map(|&t| dims[t]).product();
    let mut out = vec![0.0; sub];
    for (i, a) in amps.iter().enumerate() {
        let k = targets.iter().fold(0, |acc, &t| acc * dims[t] + (i / strides[t]) % dims[t]);
        out[k] += a.norm_sqr();
    }
    out
}

fn magnitudes_at(trace: &RunTrace, dims: &[usize], oracles: &OracleTable, call: usize) -> Result<BTreeMap<usize, f64>> {
    let (slot, regs, v) = &trace.calls[call];
    let labels = oracles[slot].query_of.as_ref().ok_or(Error::NotClassicalOracle(*slot))?;
    let mut q = BTreeMap::new();
    for (j, p) in register_marginal(v, dims, regs).into_iter().enumerate() {
        *q.entry(labels[j]).or_insert(0.0) += p;
    }
    Ok(q)
}

/// q_y at every call time. Calls to other slots contribute 0.
pub fn query_magnitude(c: &AdversaryCircuit, oracles: &OracleTable, slot: SlotId, y: usize) -> Result<Vec<f64>> {
    let o = oracles.get(&slot).ok_or(Error::UnknownSlot(slot))?;
    if !o.is_classical() {
        return Err(Error::NotClassicalOracle(slot));
    }
    let trace = trace_circuit(c, oracles)?;
    (0..trace.calls.len())
        .map(|t| {
            if trace.calls[t].0 != slot {
                return Ok(0.0);
            }
            Ok(magnitudes_at(&trace, &c.dims, oracles, t)?.get(&y).copied().unwrap_or(0.0))
        })
        .collect()
}

/// Every (call, input) at which the two assignments answer differently.
fn modified_pairs(c: &AdversaryCircuit, oracles: &OracleTable, modified: &OracleTable) -> Result<BTreeSet<(usize, usize)>> {
    let mut out = BTreeSet::new();
    for (t, slot) in c.call_slots().into_iter().enumerate() {
        let a = oracles.get(&slot).ok_or(Error::UnknownSlot(slot))?;
        let b = modified.get(&slot).ok_or(Error::UnknownSlot(slot))?;
        if a.op.matrix() == b.op.matrix() {
            continue;
        }
        let labels = a.query_of.as_ref().ok_or(Error::NotClassicalOracle(slot))?;
        check_dim(a.op.dim(), b.op.dim())?;
        let (ma, mb) = (a.op.matrix(), b.op.matrix());
        for j in 0..a.op.dim() {
            if (0..a.op.dim()).any(|i| ma[(i, j)] != mb[(i, j)]) {
                out.insert((t, labels[j]));
            }
        }
    }
    Ok(out)
}

/// Runs the circuit under both assignments and compares the exact final
/// distance and outcome TV distance with ε = √(T·Σ_F q_y(φ_t)), where the
/// query magnitudes come from the run under `oracles`.
pub fn oracle_swap_check(
    c: &AdversaryCircuit,
    oracles: &OracleTable,
    modified: &OracleTable,
    f_set: &BTreeSet<(usize, usize)>,
) -> Result<ExperimentReport> {
    for (t, y) in modified_pairs(c, oracles, modified)? {
        if !f_set.contains(&(t, y)) {
            return Err(Error::InconsistentModification { call: t, input: y });
        }
    }
    let trace = trace_circuit(c, oracles)?;
    let big_t = trace.calls.len();
    let mut mass = 0.0;
    let mut per_call: BTreeMap<usize, BTreeMap<usize, f64>> = BTreeMap::new();
    for &(t, y) in f_set {
        if t >= big_t {
            return Err(Error::InvalidConfig(format!("call {t} out of range; circuit makes {big_t} calls")));
        }
        let at = match per_call.entry(t) {
            std::collections::btree_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::btree_map::Entry::Vacant(e) => e.insert(magnitudes_at(&trace, &c.dims, oracles, t)?),
        };
        mass += at.get(&y).copied().unwrap_or(0.0);
    }
    let eps = (big_t as f64 * mass).sqrt();
    let other = trace_circuit(c, modified)?;
    let diff: Vec<C64> = trace.final_state.amplitudes().iter().zip(other.final_state.amplitudes()).map(|(a, b)| a - b).collect();
    let distance = norm(&diff);
    let tv = 0.5 * trace.distribution.iter().zip(&other.distribution).map(|(p, q)| (p - q).abs()).sum::<f64>();

    let mut r = ExperimentReport::new("bbbv-swap", 0);
    r.param("calls", big_t).param("modified_pairs", f_set.len());
    r.metric("calls", big_t as f64)
        .metric("query_mass", mass)
        .metric("epsilon", eps)
        .metric("distance", distance)
        .metric("tv", tv)
        .metric("distance_excess", distance - eps)
        .metric("tv_excess", tv - 4.0 * eps)
        .metric("tv_minus_4_distance", tv - 4.0 * distance)
        .metric("distance_excess_2eps", distance - 2.0 * eps);
    r.bound(eps);
    r.check_at_most("distance_within_eps", "distance_excess", ROUNDOFF)
        .check_at_most("tv_within_4eps", "tv_excess", ROUNDOFF)
        .check_at_most("tv_within_4_distance", "tv_minus_4_distance", ROUNDOFF);
    Ok(r)
}

/// Absolute slack for comparing exact quantities that can tie.
pub const ROUNDOFF: f64 = 1e-12;

/// One-register change of basis B with B|⊥⟩ = |0⟩, B|ψ⟩ = |1⟩, completed by
/// Gram–Schmidt over the computational basis.
pub fn bottom_psi_basis_change(m: usize, psi: &PureState) -> Result<CMatrix> {
    let d = (1usize << m) + 1;
    check_dim(d, psi.dim())?;
    let bot = bottom_index(m);
    if psi.amplitudes()[bot].norm() > 1e-12 {
        return Err(Error::NotOrthonormal { deviation: psi.amplitudes()[bot].norm() });
    }
    let mut e_bot = vec![ZERO; d];
    e_bot[bot] = ONE;
    let mut chi = vec![e_bot, psi.amplitudes().to_vec()];
    for k in 0..d {
        if chi.len() == d {
            break;
        }
        let mut e = vec![ZERO; d];
        e[k] = ONE;
        if let Some(v) = orthonormalize_against(&e, &chi) {
            chi.push(v);
        }
    }
    // row i is ⟨χ_i|
    Ok(CMatrix::from_fn(d, d, |i, j| chi[i][j].conj()))
}

/// Circuit, dummy and z-clone assignments, and F for the setting where an
/// adversary's z-cloning queries are answered by the identity instead.
#[derive(Clone, Debug)]
pub struct Stage2Config {
    pub circuit: AdversaryCircuit,
    pub dummy: OracleTable,
    pub z_clone: OracleTable,
    pub f_set: BTreeSet<(usize, usize)>,
    /// Call indices of the cloning queries.
    pub clone_calls: Vec<usize>,
    /// D = B ⊗ B on the two cloning registers.
    pub basis_change: CMatrix,
}

pub const SLOT_H: SlotId = 0;
pub const SLOT_CLONE: SlotId = 1;

/// Registers: two augmented(m) cloning registers, then the H query and
/// answer registers. One H query, then `clone_queries` cloning queries, each
/// wrapped in D and D† and interleaved with random local unitaries.
pub fn stage2_configuration<R: Rng + ?Sized>(f: &ClassicalFunction, z: Label, clone_queries: usize, rng: &mut R) -> Result<Stage2Config> {
    let m = f.m();
    let d = f.aug_dim();
    let psi = preimage_state(f, z)?;
    let b = bottom_psi_basis_change(m, &psi)?;
    let pair = DimTag::pair(m);
    let dd = OperatorMatrix::unitary(b.kron(&b), pair.clone())?;
    let dims = vec![d, d, f.domain_size(), f.codomain_size()];
    let local = |regs: &[usize], rng: &mut R| -> Result<Step> {
        let sub: usize = regs.iter().map(|&r| dims[r]).product();
        Ok(Step::Local { op: OperatorMatrix::unitary(random_unitary(sub, rng), DimTag::Qudit(sub))?, registers: regs.to_vec() })
    };
    let mut steps = vec![local(&[0, 2], rng)?, Step::OracleCall { slot: SLOT_H, registers: vec![2, 3] }, local(&[0, 2], rng)?];
    let mut clone_calls = Vec::new();
    for q in 0..clone_queries {
        steps.push(Step::Local { op: dd.clone(), registers: vec![0, 1] });
        steps.push(Step::OracleCall { slot: SLOT_CLONE, registers: vec![0, 1] });
        clone_calls.push(1 + q);
        steps.push(Step::Local { op: dd.adjoint(), registers: vec![0, 1] });
        steps.push(local(&[1, 3], rng)?);
        steps.push(local(&[0, 2], rng)?);
    }
    let total: usize = dims.iter().product();
    // second register starts blank
    let start = bottom_index(m) * f.domain_size() * f.codomain_size();
    let initial = PureState::basis(DimTag::Qudit(total), start);
    let circuit = AdversaryCircuit::new(dims, initial, steps, Pvm::computational(total))?;
    let h = CircuitOracle::xor(f);
    let mut dummy = OracleTable::new();
    dummy.insert(SLOT_H, h.clone());
    dummy.insert(SLOT_CLONE, CircuitOracle::indicator(d, d, None));
    let mut z_clone = dummy.clone();
    z_clone.insert(SLOT_CLONE, CircuitOracle::indicator(d, d, Some((1, 0))));
    let target = CircuitOracle::indicator(d, d, None).query_of.expect("classical")[d];
    let f_set = clone_calls.iter().map(|&t| (t, target)).collect();
    Ok(Stage2Config { circuit, dummy, z_clone, f_set, clone_calls, basis_change: b.kron(&b) })
}

/// Oracle-swap report for a Stage-2 configuration, plus the per-query
/// verification probabilities η'_t of the first cloning register in the dummy
/// run and the bound 4√(q·Ση'_t) built from them.
pub fn stage2_swap_check(cfg: &Stage2Config) -> Result<ExperimentReport> {
    let mut r = oracle_swap_check(&cfg.circuit, &cfg.dummy, &cfg.z_clone, &cfg.f_set)?;
    let trace = trace_circuit(&cfg.circuit, &cfg.dummy)?;
    let mut etas = Vec::new();
    for &t in &cfg.clone_calls {
        let (_, regs, v) = &trace.calls[t];
        // after D, ψ_z sits at index 1 of the first register
        let first = register_marginal(v, &cfg.circuit.dims, &regs[..1]);
        etas.push(first[1]);
    }
    let q = etas.len() as f64;
    let eps_ver = (q * etas.iter().sum::<f64>()).sqrt();
    r.metric("clone_queries", q).metric("eta_sum", etas.iter().sum()).metric("epsilon_verification", eps_ver);
    let tv = r.get("tv").unwrap_or(f64::NAN);
    r.metric("tv_excess_verification", tv - 4.0 * eps_ver);
    r.check_at_most("tv_within_4eps_verification", "tv_excess_verification", ROUNDOFF);
    Ok(r)
}

/// A circuit, the original and modified oracle tables, and the changed (call, input) set.
pub type ToySwap = (AdversaryCircuit, OracleTable, OracleTable, BTreeSet<(usize, usize)>);

/// Random circuit on registers x (2^m), y (2^n), w (2): random full-space
/// unitaries around `calls` XOR-oracle queries. The modified oracle flips the
/// answers on `changed` random inputs, at every call.
pub fn random_toy_swap<R: Rng + ?Sized>(m: usize, n: usize, calls: usize, changed: usize, rng: &mut R) -> Result<ToySwap> {
    let f = ClassicalFunction::sample_table(m, n, rng)?;
    let dom = f.domain_size();
    let mut inputs: Vec<usize> = (0..dom).collect();
    for i in (1..dom).rev() {
        inputs.swap(i, rng.random_range(0..=i));
    }
    inputs.truncate(changed.clamp(1, dom));
    let mut table = f.table().to_vec();
    for &x in &inputs {
        let flip = rng.random_range(1..f.codomain_size() as Label);
        table[x] ^= flip;
    }
    let g = ClassicalFunction::new(m, n, table)?;
    let dims = vec![dom, 1 << n, 2];
    let total: usize = dims.iter().product();
    let tag = DimTag::Qudit(total);
    let mut steps = vec![Step::FixedUnitary(OperatorMatrix::unitary(random_unitary(total, rng), tag.clone())?)];
    for _ in 0..calls {
        steps.push(Step::OracleCall { slot: 0, registers: vec![0, 1] });
        steps.push(Step::FixedUnitary(OperatorMatrix::unitary(random_unitary(total, rng), tag.clone())?));
    }
    let c = AdversaryCircuit::new(dims, PureState::basis(tag, 0), steps, Pvm::computational(total))?;
    let a = OracleTable::from([(0, CircuitOracle::xor(&f))]);
    let b = OracleTable::from([(0, CircuitOracle::xor(&g))]);
    let f_set = (0..calls).flat_map(|t| inputs.iter().map(move |&y| (t, y))).collect();
    Ok((c, a, b, f_set))
}

/// `circuits` randomized checks: every tenth is a Stage-2 configuration at
/// the given m (n = 1), the rest are toy circuits with m ≤ 3 and ≤ 3 queries.
pub fn bbbv_sweep(circuits: u64, stage2_m: usize, seeds: SeedTree, exec: Execution) -> Result<ExperimentReport> {
    let results = map_trials(circuits, seeds, exec, |i, s| -> Result<(bool, ExperimentReport)> {
        let mut rng = s.stream();
        if i % 10 == 9 {
            let limits = SizeLimits::default();
            let f = sample_random_function(stage2_m, 1, &limits, &mut rng)?;
            let z = sample_label_of(&f, &mut rng);
            let q = rng.random_range(1..=2);
            let cfg = stage2_configuration(&f, z, q, &mut rng)?;
            Ok((true, stage2_swap_check(&cfg)?))
        } else {
            let m = rng.random_range(1..=3);
            let calls = rng.random_range(1..=3);
            let changed = rng.random_range(1..=2);
            let (c, a, b, fs) = random_toy_swap(m, 1, calls, changed, &mut rng)?;
            Ok((false, oracle_swap_check(&c, &a, &b, &fs)?))
        }
    });
    let mut r = ExperimentReport::new("bbbv-swap", seeds.raw());
    r.param("circuits", circuits).param("stage2_m", stage2_m);
    let (mut worst_d, mut worst_tv, mut worst_tv_d, mut worst_2eps, mut worst_ver) = (f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let (mut violations, mut stage2, mut max_ratio) = (0usize, 0usize, 0.0f64);
    for res in results {
        let (is_stage2, rep) = res?;
        let get = |k: &str| rep.get(k).unwrap_or(f64::NAN);
        worst_d = worst_d.max(get("distance_excess"));
        worst_tv = worst_tv.max(get("tv_excess"));
        worst_tv_d = worst_tv_d.max(get("tv_minus_4_distance"));
        worst_2eps = worst_2eps.max(get("distance_excess_2eps"));
        violations += (get("distance_excess") > ROUNDOFF) as usize;
        if get("epsilon") > 0.0 {
            max_ratio = max_ratio.max(get("distance") / get("epsilon"));
        }
        if is_stage2 {
            stage2 += 1;
            worst_ver = worst_ver.max(get("tv_excess_verification"));
        }
    }
    r.metric("circuits", circuits as f64)
        .metric("stage2_circuits", stage2 as f64)
        .metric("max_distance_excess", worst_d)
        .metric("max_tv_excess", worst_tv)
        .metric("max_tv_minus_4_distance", worst_tv_d)
        .metric("max_distance_excess_2eps", worst_2eps)
        .metric("max_distance_over_eps", max_ratio)
        .metric("distance_violations", violations as f64);
    if stage2 > 0 {
        r.metric("max_tv_excess_verification", worst_ver);
        r.check_at_most("stage2_tv_within_4eps_verification", "max_tv_excess_verification", ROUNDOFF);
    }
    r.check_at_most("distance_within_eps", "max_distance_excess", ROUNDOFF)
        .check_at_most("tv_within_4eps", "max_tv_excess", ROUNDOFF)
        .check_at_most("tv_within_4_distance", "max_tv_minus_4_distance", ROUNDOFF);
    Ok(r)
}

/// ‖D†·O·D − C‖ for a configuration's basis change and indicator oracle.
pub fn basis_change_residual(cfg: &Stage2Config, clone_oracle: &CMatrix) -> f64 {
    let o = cfg.z_clone[&SLOT_CLONE].op.matrix();
    let conj = cfg.basis_change.adjoint().matmul(o).matmul(&cfg.basis_change);
    (&conj - clone_oracle).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;
    use crate::scheme::z_cloning_oracle;

    fn qubit_circuit(initial: PureState, steps: Vec<Step>) -> AdversaryCircuit {
        AdversaryCircuit::new(vec![2, 2], initial, steps, Pvm::computational(4)).unwrap()
    }

    fn not_oracle(f0: u32, f1: u32) -> CircuitOracle {
        CircuitOracle::xor(&ClassicalFunction::new(1, 1, vec![f0, f1]).unwrap())
    }

    #[test]
    fn empty_circuit_measures_initial_state() {
        let psi = PureState::basis(DimTag::Qudit(4), 2);
        let (fin, dist) = run_circuit(&qubit_circuit(psi.clone(), vec![]), &OracleTable::new()).unwrap();
        assert_eq!(fin, psi);
        assert_eq!(dist, vec![0.0, 0.0, 1.0, 0.0]);
    }

    #[test]
    fn identity_oracle_is_noop_and_slots_checked() {
        let psi = PureState::basis(DimTag::Qudit(4), 3);
        let c = qubit_circuit(psi.clone(), vec![Step::OracleCall { slot: 7, registers: vec![0, 1] }]);
        let table = OracleTable::from([(7, CircuitOracle::quantum(OperatorMatrix::identity(DimTag::Qudit(4))))]);
        assert_eq!(run_circuit(&c, &table).unwrap().0, psi);
        assert_eq!(run_circuit(&c, &OracleTable::new()).unwrap_err(), Error::UnknownSlot(7));
        assert_eq!(query_magnitude(&c, &table, 7, 0).unwrap_err(), Error::NotClassicalOracle(7));
    }

    #[test]
    fn phase_kickback_amplitudes() {
        // H⊗H, XOR oracle for f = (0, 1), H⊗H on |0⟩|1⟩: Deutsch with balanced f → |1⟩|1⟩.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let had = CMatrix::from_vec(2, 2, vec![C64::new(h, 0.0), C64::new(h, 0.0), C64::new(h, 0.0), C64::new(-h, 0.0)]);
        let hh = OperatorMatrix::unitary(had.kron(&had), DimTag::Qudit(4)).unwrap();
        let c = qubit_circuit(
            PureState::basis(DimTag::Qudit(4), 1),
            vec![Step::FixedUnitary(hh.clone()), Step::OracleCall { slot: 0, registers: vec![0, 1] }, Step::FixedUnitary(hh)],
        );
        let (fin, dist) = run_circuit(&c, &OracleTable::from([(0, not_oracle(0, 1))])).unwrap();
        assert!((fin.amplitudes()[3] - ONE).norm() < 1e-12);
        assert!((dist[3] - 1.0).abs() < 1e-12);
        // constant f → |0⟩|1⟩
        let (_, dist) = run_circuit(&c, &OracleTable::from([(0, not_oracle(1, 1))])).unwrap();
        assert!((dist[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn query_magnitude_examples() {
        let call = vec![Step::OracleCall { slot: 0, registers: vec![0, 1] }];
        let table = OracleTable::from([(0, not_oracle(0, 1))]);
        let c = qubit_circuit(PureState::basis(DimTag::Qudit(4), 2), call.clone());
        assert_eq!(query_magnitude(&c, &table, 0, 1).unwrap(), vec![1.0]);
        assert_eq!(query_magnitude(&c, &table, 0, 0).unwrap(), vec![0.0]);
        // uniform over 2^m inputs with m = 2
        let f = ClassicalFunction::new(2, 1, vec![0, 1, 1, 0]).unwrap();
        let amps = vec![C64::new(0.5, 0.0), ZERO, C64::new(0.5, 0.0), ZERO, C64::new(0.5, 0.0), ZERO, C64::new(0.5, 0.0), ZERO];
        let psi = PureState::new(amps, DimTag::Qudit(8)).unwrap();
        let c = AdversaryCircuit::new(vec![4, 2], psi, call, Pvm::computational(8)).unwrap();
        let t = OracleTable::from([(0, CircuitOracle::xor(&f))]);
        for y in 0..4 {
            assert!((query_magnitude(&c, &t, 0, y).unwrap()[0] - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn unqueried_modification_changes_nothing() {
        let call = vec![Step::OracleCall { slot: 0, registers: vec![0, 1] }];
        let c = qubit_circuit(PureState::basis(DimTag::Qudit(4), 0), call);
        let a = OracleTable::from([(0, not_oracle(0, 0))]);
        let b = OracleTable::from([(0, not_oracle(0, 1))]);
        let r = oracle_swap_check(&c, &a, &b, &BTreeSet::from([(0, 1)])).unwrap();
        assert_eq!(r.get("distance"), Some(0.0));
        assert_eq!(r.get("epsilon"), Some(0.0));
        assert!(r.passed);
        let err = oracle_swap_check(&c, &a, &b, &BTreeSet::new()).unwrap_err();
        assert_eq!(err, Error::InconsistentModification { call: 0, input: 1 });
    }

    #[test]
    fn half_amplitude_single_query() {
        // amplitude α = 1/2 on the modified input, answer register |0⟩:
        // the flip moves that branch to an orthogonal answer, distance √2·|α|.
        let a_amp = 0.5f64;
        let b_amp = (1.0 - a_amp * a_amp).sqrt();
        let amps = vec![C64::new(b_amp, 0.0), ZERO, C64::new(a_amp, 0.0), ZERO];
        let c = qubit_circuit(PureState::new(amps, DimTag::Qudit(4)).unwrap(), vec![Step::OracleCall { slot: 0, registers: vec![0, 1] }]);
        let a = OracleTable::from([(0, not_oracle(0, 0))]);
        let b = OracleTable::from([(0, not_oracle(0, 1))]);
        let r = oracle_swap_check(&c, &a, &b, &BTreeSet::from([(0, 1)])).unwrap();
        assert!((r.get("epsilon").unwrap() - 0.5).abs() < 1e-12);
        assert!((r.get("distance").unwrap() - 2f64.sqrt() * 0.5).abs() < 1e-12);
        assert!((r.get("tv").unwrap() - 0.25).abs() < 1e-12);
        // distance exceeds ε here but stays within 2ε; TV stays within 4ε
        assert!(!r.holds("distance_within_eps"));
        assert!(r.get("distance_excess_2eps").unwrap() <= 0.0);
        assert!(r.holds("tv_within_4eps"));
    }

    #[test]
    fn kickback_reaches_twice_epsilon() {
        // |1⟩|−⟩ with the answer on input 1 flipped: φ' = −φ.
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let amps = vec![ZERO, ZERO, C64::new(h, 0.0), C64::new(-h, 0.0)];
        let c = qubit_circuit(PureState::new(amps, DimTag::Qudit(4)).unwrap(), vec![Step::OracleCall { slot: 0, registers: vec![0, 1] }]);
        let r = oracle_swap_check(&c, &OracleTable::from([(0, not_oracle(0, 0))]), &OracleTable::from([(0, not_oracle(0, 1))]), &BTreeSet::from([(0, 1)])).unwrap();
        assert!((r.get("distance").unwrap() - 2.0).abs() < 1e-12);
        assert!((r.get("epsilon").unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.get("tv"), Some(0.0));
    }

    #[test]
    fn stage2_basis_change_reproduces_z_clone() {
        let mut rng = stream(9);
        let f = sample_random_function(3, 1, &SizeLimits::default(), &mut rng).unwrap();
        let z = sample_label_of(&f, &mut rng);
        let cfg = stage2_configuration(&f, z, 2, &mut rng).unwrap();
        let cz = z_cloning_oracle(&f, z).unwrap();
        assert!(basis_change_residual(&cfg, cz.matrix()) < 1e-12);
        let r = stage2_swap_check(&cfg).unwrap();
        assert!(r.holds("tv_within_4eps"), "{}", r.summary());
        assert!(r.holds("tv_within_4eps_verification"), "{}", r.summary());
        assert!(r.get("epsilon").unwrap() <= (3.0f64 / 2.0).sqrt() * r.get("epsilon_verification").unwrap() + 1e-12);
    }

    #[test]
    fn classical_oracle_validation() {
        let op = OperatorMatrix::unitary(CMatrix::permutation(&[1, 0, 2, 3]), DimTag::Qudit(4)).unwrap();
        assert!(CircuitOracle::classical(op.clone(), vec![0, 0, 1, 1]).is_ok());
        assert!(CircuitOracle::classical(op, vec![0, 1, 1, 1]).is_err());
    }
}
