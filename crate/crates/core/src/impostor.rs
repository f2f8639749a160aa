//! Impostor oracles: a resampled function that agrees with H exactly on the
//! preimages of a target label z, and the cloner built from it.
//!
//! Operators here act on ancilla ⊗ augmented(m) ⊗ augmented(m), indexed
//! b·d² + x·d + y with d = 2^m + 1.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::harness::report::ExperimentReport;
use crate::harness::stats::{chi_square, chi_square_homogeneity};
use crate::parallel::{map_trials, Execution};
use crate::qcore::matrix::{inner, CMatrix, C64, ZERO};
use crate::qcore::{apply_to_registers, bottom_index, operator_norm, DimTag, OperatorMatrix, PureState};
use crate::rng::SeedTree;
use crate::scheme::{
    cloning_oracle_for_set, full_cloning_oracle, preimage_state, sample_label_of, sample_random_function,
    ClassicalFunction, Label, SizeLimits,
};

/// Queries one application of the efficient cloner makes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueryBudget {
    pub h_queries: usize,
    pub z_clone_queries: usize,
}

pub const EFFICIENT_CLONER_BUDGET: QueryBudget = QueryBudget { h_queries: 2, z_clone_queries: 1 };

#[derive(Clone, Debug, PartialEq)]
pub struct ImpostorBundle {
    pub h: ClassicalFunction,
    pub h_private: ClassicalFunction,
    pub h_impostor: ClassicalFunction,
    pub z: Label,
    /// |H⁻¹(z)|
    pub k_z: usize,
    /// Per label i: #{x : H(x) ≠ z, H_private(x) = i}.
    pub k_i: Vec<usize>,
    /// Per label i: #{x : H(x) = z, H_private(x) = i}.
    pub k_z_to_i: Vec<usize>,
}

/// Table with entries uniform over {0,1}^n \ {z}.
pub fn sample_private_function<R: Rng + ?Sized>(h: &ClassicalFunction, z: Label, rng: &mut R) -> Result<ClassicalFunction> {
    let size = h.codomain_size();
    if size < 2 {
        return Err(Error::CodomainTooSmall { size });
    }
    if z as usize >= size {
        return Err(Error::InconsistentInputs(format!("label {z} outside codomain of size {size}")));
    }
    let table = (0..h.domain_size())
        .map(|_| {
            let r = rng.random_range(0..size as Label - 1);
            if r >= z {
                r + 1
            } else {
                r
            }
        })
        .collect();
    ClassicalFunction::new(h.m(), h.n(), table)
}

/// H_impostor(x) = z if H(x) = z, else H_private(x).
pub fn build_impostor(h: &ClassicalFunction, h_private: &ClassicalFunction, z: Label) -> Result<ClassicalFunction> {
    if h.m() != h_private.m() || h.n() != h_private.n() {
        return Err(Error::InconsistentInputs("h and h_private have different widths".into()));
    }
    if h_private.in_image(z) {
        return Err(Error::InconsistentInputs(format!("h_private outputs the target label {z}")));
    }
    let table = h.table().iter().zip(h_private.table()).map(|(&a, &b)| if a == z { z } else { b }).collect();
    ClassicalFunction::new(h.m(), h.n(), table)
}

impl ImpostorBundle {
    pub fn new(h: ClassicalFunction, h_private: ClassicalFunction, z: Label) -> Result<Self> {
        let h_impostor = build_impostor(&h, &h_private, z)?;
        let size = h.codomain_size();
        let mut k_i = vec![0usize; size];
        let mut k_z_to_i = vec![0usize; size];
        let mut k_z = 0;
        for (&a, &b) in h.table().iter().zip(h_private.table()) {
            if a == z {
                k_z += 1;
                k_z_to_i[b as usize] += 1;
            } else {
                k_i[b as usize] += 1;
            }
        }
        Ok(ImpostorBundle { h, h_private, h_impostor, z, k_z, k_i, k_z_to_i })
    }

    /// Fresh private function for a given (H, z).
    pub fn sample<R: Rng + ?Sized>(h: ClassicalFunction, z: Label, rng: &mut R) -> Result<Self> {
        let p = sample_private_function(&h, z, rng)?;
        Self::new(h, p, z)
    }

    /// Random H within the size limits, z drawn as the image of a random input.
    pub fn sample_random<R: Rng + ?Sized>(m: usize, n: usize, limits: &SizeLimits, rng: &mut R) -> Result<Self> {
        let h = sample_random_function(m, n, limits, rng)?;
        let z = sample_label_of(&h, rng);
        Self::sample(h, z, rng)
    }

    /// As [`sample_random`](Self::sample_random) but without the matrix cap;
    /// only the tables and counts are used afterwards.
    pub fn sample_counts_only<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Result<Self> {
        let h = ClassicalFunction::sample_table(m, n, rng)?;
        let z = sample_label_of(&h, rng);
        Self::sample(h, z, rng)
    }

    pub fn m(&self) -> usize {
        self.h.m()
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }

    /// 2^m + 1
    pub fn aug_dim(&self) -> usize {
        self.h.aug_dim()
    }

    pub fn ancilla_tag(&self) -> DimTag {
        DimTag::Product(vec![DimTag::Qubits(1), DimTag::Augmented(self.m()), DimTag::Augmented(self.m())])
    }
}

/// Cloning oracle relative to H_impostor.
pub fn exact_impostor_cloner(b: &ImpostorBundle) -> OperatorMatrix {
    full_cloning_oracle(&b.h_impostor)
}

/// Cloning oracle relative to H_private.
pub fn private_cloner(b: &ImpostorBundle) -> OperatorMatrix {
    full_cloning_oracle(&b.h_private)
}

/// z-cloning oracle; the identity when z has no preimage.
pub fn z_cloner(b: &ImpostorBundle) -> OperatorMatrix {
    let states: Vec<PureState> = preimage_state(&b.h, b.z).into_iter().collect();
    cloning_oracle_for_set(b.m(), &states).expect("single normalized state")
}

/// Flips the ancilla when the first register holds a preimage of z.
pub fn build_u1(b: &ImpostorBundle) -> OperatorMatrix {
    let d = b.aug_dim();
    let d2 = d * d;
    let bot = bottom_index(b.m());
    let perm: Vec<usize> = (0..2 * d2)
        .map(|i| {
            let x = (i % d2) / d;
            if x != bot && b.h.eval(x) == b.z {
                (i + d2) % (2 * d2)
            } else {
                i
            }
        })
        .collect();
    OperatorMatrix::unitary_unchecked(CMatrix::permutation(&perm), b.ancilla_tag())
}

fn controlled(b: &ImpostorBundle, zero_block: &OperatorMatrix, one_block: &OperatorMatrix) -> OperatorMatrix {
    let m = CMatrix::direct_sum(&[zero_block.matrix(), one_block.matrix()]);
    OperatorMatrix::unitary_unchecked(m, b.ancilla_tag())
}

/// C_impostor on ancilla 0, C_z on ancilla 1.
pub fn build_u2(b: &ImpostorBundle) -> OperatorMatrix {
    controlled(b, &exact_impostor_cloner(b), &z_cloner(b))
}

/// C_private on ancilla 0, C_z on ancilla 1.
pub fn build_u2_hat(b: &ImpostorBundle) -> OperatorMatrix {
    controlled(b, &private_cloner(b), &z_cloner(b))
}

/// The cloner that needs only H, H_private and the z-cloning oracle.
#[derive(Clone, Debug)]
pub struct EfficientCloner {
    pub op: OperatorMatrix,
    pub budget: QueryBudget,
}

/// U₁ Û₂ U₁.
pub fn efficient_impostor_cloner(b: &ImpostorBundle) -> EfficientCloner {
    let u1 = build_u1(b);
    let op = OperatorMatrix::product(&[&u1, &build_u2_hat(b), &u1]).expect("same dimensions");
    EfficientCloner { op, budget: EFFICIENT_CLONER_BUDGET }
}

/// One rotation plane span(ψ_i, ψ_{z→i}) with ψ̂_i = cos θ ψ_i + sin θ ψ_{z→i}.
#[derive(Clone, Debug, PartialEq)]
pub struct RotationPlane {
    pub label: Label,
    pub k_i: usize,
    pub k_z_to_i: usize,
    pub theta: f64,
    /// √(2(1 − cos θ))
    pub lambda: f64,
    /// √(k_i / (k_i + k_{z→i}))
    pub overlap_closed: f64,
    /// ⟨ψ_i|ψ̂_i⟩ from the explicit states (0 when ψ_i does not exist).
    pub overlap_explicit: f64,
    /// √(2(1 − ⟨ψ_i|ψ̂_i⟩))
    pub lambda_explicit: f64,
}

pub fn rotation_spectrum(b: &ImpostorBundle) -> Vec<RotationPlane> {
    let mut out = Vec::new();
    for i in 0..b.h.codomain_size() as Label {
        let (ki, kzi) = (b.k_i[i as usize], b.k_z_to_i[i as usize]);
        if i == b.z || ki + kzi == 0 {
            continue;
        }
        let cos = (ki as f64 / (ki + kzi) as f64).sqrt();
        let theta = cos.clamp(-1.0, 1.0).acos();
        let lambda = (2.0 * (1.0 - cos)).max(0.0).sqrt();
        let hat = preimage_state(&b.h_private, i).expect("k_i + k_z_to_i > 0");
        let overlap_explicit = match preimage_state(&b.h_impostor, i) {
            Ok(psi) => inner(psi.amplitudes(), hat.amplitudes()).re,
            Err(_) => 0.0,
        };
        let lambda_explicit = (2.0 * (1.0 - overlap_explicit)).max(0.0).sqrt();
        out.push(RotationPlane {
            label: i,
            k_i: ki,
            k_z_to_i: kzi,
            theta,
            lambda,
            overlap_closed: cos,
            overlap_explicit,
            lambda_explicit,
        });
    }
    out
}

/// Rotation of each plane taking ψ̂_i to ψ_i; identity elsewhere.
///
/// Planes with k_i = 0 have no ψ_i and are left alone; planes with
/// k_{z→i} = 0 have θ = 0.
pub fn build_u3(b: &ImpostorBundle) -> OperatorMatrix {
    let d = b.aug_dim();
    let mut u = CMatrix::identity(d);
    for plane in rotation_spectrum(b) {
        if plane.k_i == 0 || plane.k_z_to_i == 0 {
            continue;
        }
        let i = plane.label;
        let (c, s) = (plane.theta.cos(), plane.theta.sin());
        let psi = preimage_state(&b.h_impostor, i).expect("k_i > 0");
        let moved: Vec<usize> = (0..b.h.domain_size()).filter(|&x| b.h.eval(x) == b.z && b.h_private.eval(x) == i).collect();
        let a = C64::new(1.0 / (moved.len() as f64).sqrt(), 0.0);
        let mut phi = vec![ZERO; d];
        for &x in &moved {
            phi[x] = a;
        }
        let p = psi.amplitudes();
        // U = I + (c−1)(|ψ⟩⟨ψ| + |φ⟩⟨φ|) − s|φ⟩⟨ψ| + s|ψ⟩⟨φ|
        for r in 0..d {
            for col in 0..d {
                let delta = C64::new(c - 1.0, 0.0) * (p[r] * p[col].conj() + phi[r] * phi[col].conj())
                    + C64::new(s, 0.0) * (p[r] * phi[col].conj() - phi[r] * p[col].conj());
                if delta != ZERO {
                    u[(r, col)] += delta;
                }
            }
        }
    }
    OperatorMatrix::unitary_unchecked(u, DimTag::Augmented(b.m()))
}

/// All Stage-3 operators for one bundle.
#[derive(Clone, Debug)]
pub struct Stage3 {
    pub u1: OperatorMatrix,
    pub u2: OperatorMatrix,
    pub u2_hat: OperatorMatrix,
    pub u3: OperatorMatrix,
    /// I ⊗ C_impostor
    pub exact: OperatorMatrix,
    /// U₁ Û₂ U₁
    pub efficient: OperatorMatrix,
}

impl Stage3 {
    pub fn build(b: &ImpostorBundle) -> Self {
        let u1 = build_u1(b);
        let u2 = build_u2(b);
        let u2_hat = build_u2_hat(b);
        let c_imp = exact_impostor_cloner(b);
        let exact = controlled(b, &c_imp, &c_imp);
        let efficient = OperatorMatrix::product(&[&u1, &u2_hat, &u1]).expect("same dimensions");
        Stage3 { u1, u2, u2_hat, u3: build_u3(b), exact, efficient }
    }

    /// U₁ (I ⊗ U₃† ⊗ U₃†) U₂ (I ⊗ U₃ ⊗ U₃) U₁, or with U₃ and U₃† exchanged.
    pub fn five_factor(&self, swapped: bool) -> OperatorMatrix {
        let id = CMatrix::identity(2);
        let w = self.u3.matrix().kron(self.u3.matrix());
        let inner_w = id.kron(&w);
        let outer_w = inner_w.adjoint();
        let (left, right) = if swapped { (inner_w, outer_w) } else { (outer_w, inner_w) };
        let m = self.u1.matrix().matmul(&left).matmul(self.u2.matrix()).matmul(&right).matmul(self.u1.matrix());
        OperatorMatrix::unitary_unchecked(m, self.u1.tag().clone())
    }
}

/// ‖(A − B)·(|0⟩⟨0| ⊗ I)‖_op: the difference on inputs with ancilla 0.
pub fn ancilla_zero_distance(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    let half = a.dim() / 2;
    let rows: Vec<usize> = (0..a.dim()).collect();
    let cols: Vec<usize> = (0..half).collect();
    operator_norm(&(a.matrix() - b.matrix()).select(&rows, &cols))
}

/// Norm of the block taking ancilla 0 to ancilla 1.
pub fn ancilla_leakage(a: &OperatorMatrix) -> f64 {
    let half = a.dim() / 2;
    let rows: Vec<usize> = (half..a.dim()).collect();
    let cols: Vec<usize> = (0..half).collect();
    operator_norm(&a.matrix().select(&rows, &cols))
}

fn commutator_norm(a: &OperatorMatrix, b: &OperatorMatrix) -> f64 {
    operator_norm(&(&(a.matrix() * b.matrix()) - &(b.matrix() * a.matrix())))
}

/// Decomposition and distance metrics for one bundle.
///
/// Residuals named `*_anc0` are restricted to inputs whose ancilla is |0⟩, the
/// case the cloner is used in; the `*_full` versions are over the whole space
/// and are only computed when `full_space` is set (they dominate the cost).
/// The 4·max|λ| envelope for Δ is this crate's own derivation.
pub fn hat_distance_check(b: &ImpostorBundle) -> ExperimentReport {
    hat_distance_report(b, &Stage3::build(b), true)
}

pub fn hat_distance_report(b: &ImpostorBundle, s: &Stage3, full_space: bool) -> ExperimentReport {
    let tol = crate::qcore::tolerance();
    let mut r = ExperimentReport::new("impostor-identity", 0);
    r.param("m", b.m()).param("n", b.n()).param("z", b.z).param("k_z", b.k_z);

    let decomposition = OperatorMatrix::product(&[&s.u1, &s.u2, &s.u1]).expect("same dimensions");
    r.metric("decomposition_residual_anc0", ancilla_zero_distance(&decomposition, &s.exact));
    let delta = ancilla_zero_distance(&s.efficient, &s.exact);
    r.metric("delta_anc0", delta);

    let spectrum = rotation_spectrum(b);
    let max_lambda = spectrum.iter().map(|p| p.lambda).fold(0.0, f64::max);
    let spectrum_residual = spectrum
        .iter()
        .map(|p| (p.lambda - p.lambda_explicit).abs().max((p.overlap_closed - p.overlap_explicit).abs()))
        .fold(0.0, f64::max);
    r.metric("max_lambda", max_lambda);
    r.metric("delta_envelope", 4.0 * max_lambda);
    r.metric("delta_envelope_gap", delta - 4.0 * max_lambda);
    r.metric("spectrum_residual", spectrum_residual);
    r.metric("planes", spectrum.len() as f64);
    r.bound(4.0 * max_lambda);

    r.metric("u3_unitarity_defect", s.u3.unitarity_defect());
    let five = s.five_factor(false);
    r.metric("five_factor_residual_anc0", ancilla_zero_distance(&s.efficient, &five));
    let five_swapped = s.five_factor(true);
    r.metric("five_factor_swapped_residual_anc0", ancilla_zero_distance(&s.efficient, &five_swapped));

    r.metric("ancilla_leakage", ancilla_leakage(&s.efficient));
    r.metric("efficient_unitarity_defect", s.efficient.unitarity_defect());
    r.metric("commutator_u1_exact", commutator_norm(&s.u1, &s.exact));
    r.metric("commutator_u1_u2", commutator_norm(&s.u1, &s.u2));

    if full_space {
        r.metric("decomposition_residual_full", decomposition.distance(&s.exact).expect("same dimensions"));
        r.metric("delta_full", s.efficient.distance(&s.exact).expect("same dimensions"));
        r.metric("five_factor_residual_full", s.efficient.distance(&five).expect("same dimensions"));
    }

    r.check_at_most("decomposition", "decomposition_residual_anc0", tol);
    r.check_at_most("delta_within_envelope", "delta_envelope_gap", tol);
    r.check_at_most("spectrum_matches", "spectrum_residual", tol);
    r.check_at_most("u3_unitary", "u3_unitarity_defect", tol);
    r.check_at_most("five_factor", "five_factor_residual_anc0", tol);
    r
}

/// Ratio k_{z→i}/(k_i + k_{z→i}) against 72n·2⁻ⁿ, from counts only.
pub fn ratio_bound_report(b: &ImpostorBundle) -> ExperimentReport {
    let (m, n) = (b.m() as i32, b.n() as i32);
    let mut r = ExperimentReport::new("ratio-bound", 0);
    r.param("m", m).param("n", n).param("z", b.z);
    let bound = 72.0 * n as f64 * 2f64.powi(-n);
    let base = 2f64.powi(m - n);
    let mut max_ratio = 0.0f64;
    let mut a_holds = true;
    let mut c_holds = true;
    for i in 0..b.h.codomain_size() {
        if i == b.z as usize {
            continue;
        }
        let (ki, kzi) = (b.k_i[i] as f64, b.k_z_to_i[i] as f64);
        if ki + kzi > 0.0 {
            max_ratio = max_ratio.max(kzi / (ki + kzi));
        }
        a_holds &= ki > 0.5 * base;
        c_holds &= kzi < 36.0 * n as f64 * 2f64.powi(m - 2 * n);
    }
    let kz = b.k_z as f64;
    let b_holds = 0.5 * base < kz && kz < 3.0 * base;
    r.metric("max_ratio", max_ratio);
    r.metric("ratio_bound", bound);
    r.metric("sub_bound_a", a_holds as u8 as f64);
    r.metric("sub_bound_b", b_holds as u8 as f64);
    r.metric("sub_bound_c", c_holds as u8 as f64);
    r.metric("vacuous", (bound > 1.0) as u8 as f64);
    r.bound(bound);
    r.check_at_most("ratio_within_bound", "max_ratio", bound);
    r
}

/// Which arms the sampling-equivalence experiment compares.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingArm {
    /// (z, H) with H uniform conditioned on z ∈ image(H).
    Conditioned,
    /// (z, H_impostor) built from such a draw.
    Construction,
    /// Construction whose private function may also output z.
    Broken,
}

fn pack(z: Label, f: &ClassicalFunction) -> u64 {
    f.table().iter().fold(z as u64, |acc, &y| (acc << f.n()) | y as u64)
}

fn conditioned_draw<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> (Label, ClassicalFunction) {
    loop {
        let z = rng.random_range(0..1u32 << n);
        let h = ClassicalFunction::sample_table(m, n, rng).expect("widths checked by caller");
        if h.in_image(z) {
            return (z, h);
        }
    }
}

fn draw_arm<R: Rng + ?Sized>(arm: SamplingArm, m: usize, n: usize, rng: &mut R) -> u64 {
    let (z, h) = conditioned_draw(m, n, rng);
    match arm {
        SamplingArm::Conditioned => pack(z, &h),
        SamplingArm::Construction => {
            let p = sample_private_function(&h, z, rng).expect("n ≥ 1");
            pack(z, &build_impostor(&h, &p, z).expect("private avoids z"))
        }
        SamplingArm::Broken => {
            let p = ClassicalFunction::sample_table(m, n, rng).expect("widths checked by caller");
            let table = h.table().iter().zip(p.table()).map(|(&a, &b)| if a == z { z } else { b }).collect();
            pack(z, &ClassicalFunction::new(m, n, table).expect("valid entries"))
        }
    }
}

/// Number of (z, table) pairs with z in the table's image.
pub fn valid_bin_count(m: usize, n: usize) -> f64 {
    let labels = 2f64.powi(n as i32);
    let inputs = 1i32 << m;
    labels * (labels.powi(inputs) - (labels - 1.0).powi(inputs))
}

/// Two-sample chi-square over joint (z, full table) outcomes.
///
/// Arm A is `arm_a`, arm B is `arm_b`, each drawn `trials` times on disjoint
/// seed branches. Also reports a goodness-of-fit test of arm A against the
/// exact uniform distribution over valid bins.
pub fn sampling_equivalence_test(
    m: usize,
    n: usize,
    trials: u64,
    seeds: SeedTree,
    arm_a: SamplingArm,
    arm_b: SamplingArm,
    exec: Execution,
) -> Result<ExperimentReport> {
    if n == 0 || n > m || (1usize << m) * n + n > 60 {
        return Err(Error::InvalidWidths { m, n, reason: "joint outcome space too large to bin" });
    }
    let bins = valid_bin_count(m, n);
    let per_bin = trials as f64 / bins;
    if per_bin < 5.0 {
        return Err(Error::InsufficientTrials { bin: 0, expected: per_bin, min: 5.0 });
    }
    let draws = |arm: SamplingArm, branch: &str| {
        map_trials(trials, seeds.named(branch), exec, move |_, s| draw_arm(arm, m, n, &mut s.stream()))
    };
    let a = draws(arm_a, "arm-a");
    let b = draws(arm_b, "arm-b");
    let mut counts: BTreeMap<u64, (u64, u64)> = BTreeMap::new();
    for k in &a {
        counts.entry(*k).or_default().0 += 1;
    }
    for k in &b {
        counts.entry(*k).or_default().1 += 1;
    }
    let ca: Vec<u64> = counts.values().map(|c| c.0).collect();
    let cb: Vec<u64> = counts.values().map(|c| c.1).collect();
    let homogeneity = chi_square_homogeneity(&ca, &cb)?;

    // Goodness of fit of arm A; unseen valid bins contribute their expected count.
    let bins_i = bins.round() as usize;
    let mut observed: Vec<u64> = a.iter().fold(BTreeMap::<u64, u64>::new(), |mut acc, k| {
        *acc.entry(*k).or_default() += 1;
        acc
    })
    .into_values()
    .collect();
    let outside = observed.len() > bins_i;
    observed.resize(bins_i.max(observed.len()), 0);
    let gof = if outside {
        None
    } else {
        Some(chi_square(&observed, &vec![1.0 / bins_i as f64; bins_i], trials)?)
    };

    let mut r = ExperimentReport::new("impostor-dist", 0);
    r.param("m", m).param("n", n).param("trials", trials).param("arm_a", format!("{arm_a:?}")).param("arm_b", format!("{arm_b:?}"));
    r.metric("valid_bins", bins);
    r.metric("observed_bins", counts.len() as f64);
    r.metric("chi2", homogeneity.statistic);
    r.metric("dof", homogeneity.dof as f64);
    r.metric("p_value", homogeneity.p_value);
    match gof {
        Some(g) => {
            r.metric("gof_chi2", g.statistic);
            r.metric("gof_p_value", g.p_value);
        }
        None => {
            r.metric("gof_p_value", 0.0);
            r.note("arm A produced outcomes outside the valid support");
        }
    }
    r.bound(0.001);
    Ok(r)
}

/// Controlled C_z realized from an uncontrolled C_z by swapping the working
/// pair with a blank |⊥⟩|⊥⟩ pair when the control is 0. Returns the largest
/// deviation from blockdiag(I, C_z) over all basis inputs with the extra
/// pair blank (including leakage out of that subspace).
pub fn footnote_controlled_clone_deviation(f: &ClassicalFunction, z: Label) -> Result<f64> {
    let cz = crate::scheme::z_cloning_oracle(f, z)?;
    let d = f.aug_dim();
    let d2 = d * d;
    let bot = bottom_index(f.m());
    let dims = [2, d, d, d, d];
    let total = 2 * d2 * d2;
    let blank = bot * d + bot;
    // controlled on b = 0: swap registers (1,2) with (3,4)
    let cswap = |v: &[C64]| {
        let mut out = vec![ZERO; total];
        for (i, &a) in v.iter().enumerate() {
            if a == ZERO {
                continue;
            }
            let (b, main, extra) = (i / (d2 * d2), (i / d2) % d2, i % d2);
            let j = if b == 0 { (b * d2 + extra) * d2 + main } else { i };
            out[j] += a;
        }
        out
    };
    let mut worst = 0.0f64;
    for b in 0..2 {
        for main in 0..d2 {
            let mut v = vec![ZERO; total];
            v[(b * d2 + main) * d2 + blank] = C64::new(1.0, 0.0);
            let v = cswap(&v);
            let v = apply_to_registers(&v, &dims, &[1, 2], cz.matrix())?;
            let v = cswap(&v);
            for (i, a) in v.iter().enumerate() {
                let (bb, mm, extra) = (i / (d2 * d2), (i / d2) % d2, i % d2);
                let want = if extra != blank || bb != b {
                    ZERO
                } else if b == 0 {
                    if mm == main { C64::new(1.0, 0.0) } else { ZERO }
                } else {
                    cz.matrix()[(mm, main)]
                };
                worst = worst.max((a - want).norm());
            }
        }
    }
    Ok(worst)
}
