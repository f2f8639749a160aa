//! The experiment catalog: each name maps to a suite over seeded trials whose
//! metrics are aggregated in index order.

use std::time::Instant;

use rand::Rng;

use crate::complexity::{composition_fidelity, composition_sample, generate_rohc, random_composition_case, rohc_report, TruthKind};
use crate::crypto::{basis_exfiltration_adversary, decryption_chain, exfiltration_game, ne_gen, parallel_decryption, RohcSampler, ToyWitnessEncryption};
use crate::error::{Error, Result};
use crate::impostor::{hat_distance_report, ratio_bound_report, sampling_equivalence_test, ImpostorBundle, SamplingArm, Stage3};
use crate::nogo::bbbv::bbbv_sweep;
use crate::nogo::collisions::collision_meta;
use crate::nogo::equivalence::{equivalence_trial, random_non_orthogonal_set, random_orthogonal_set};
use crate::nogo::lemma::random_lemma_triple;
use crate::nogo::tasks::{estimate_reduction, reconstructor_via_telegraph};
use crate::nogo::{lemma_bound, perfect_telegraph_for_orthogonal, telegraph_clone_bound, FnReconstructor, NoisedProtocol};
use crate::parallel::map_trials;
use crate::qcore::PureState;
use crate::rng::SeedTree;
use crate::scheme::{full_cloning_oracle, preimage_state, preimage_states, sample_label_of, sample_random_function};

use super::config::{RunConfig, P_FLOOR};
use super::report::ExperimentReport;

/// Every name `run_experiment` accepts.
pub const CATALOG: [&str; 13] = [
    "clone-check",
    "impostor-identity",
    "impostor-dist",
    "impostor-bound",
    "ratio-bound",
    "nogo-equiv",
    "lemma-a",
    "bbbv-swap",
    "telegraph-reductions",
    "collisions",
    "rohc",
    "composition",
    "nepke-demo",
];

/// Widths swept by clone-check when none are given.
pub const CLONE_CHECK_WIDTHS: [(usize, usize); 3] = [(2, 1), (4, 2), (5, 2)];
pub const REDUCTION_ETAS: [f64; 3] = [0.25, 0.5, 1.0];

/// Runs one catalog experiment. Deterministic in `cfg.seed` apart from `runtime_ms`.
pub fn run_experiment(cfg: &RunConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let start = Instant::now();
    let mut r = match cfg.experiment.as_str() {
        "clone-check" => clone_check(cfg),
        "impostor-identity" => impostor_stage3(cfg, false),
        "impostor-bound" => impostor_stage3(cfg, true),
        "impostor-dist" => impostor_dist(cfg),
        "ratio-bound" => ratio_bound(cfg),
        "nogo-equiv" => nogo_equiv(cfg),
        "lemma-a" => lemma_a(cfg),
        "bbbv-swap" => bbbv_swap(cfg),
        "telegraph-reductions" => telegraph_reductions(cfg),
        "collisions" => collisions(cfg),
        "rohc" => rohc(cfg),
        "composition" => composition(cfg),
        "nepke-demo" => nepke_demo(cfg),
        other => Err(Error::UnknownExperiment(other.to_string())),
    }?;
    r.name = cfg.experiment.clone();
    r.seed = cfg.seed;
    r.param("exec", format!("{:?}", cfg.exec));
    r.evaluate();
    r.runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(r)
}

fn widths(cfg: &RunConfig, m: usize, n: usize) -> Result<(usize, usize)> {
    let (m, n) = (cfg.m.unwrap_or(m), cfg.n.unwrap_or(n));
    cfg.limits.check(m, n)?;
    Ok((m, n))
}

fn seeds(cfg: &RunConfig) -> SeedTree {
    SeedTree::new(cfg.seed).named(&cfg.experiment)
}

fn fold_max(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::NEG_INFINITY, f64::max)
}

fn fold_min(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(f64::INFINITY, f64::min)
}

fn clone_check(cfg: &RunConfig) -> Result<ExperimentReport> {
    let pairs: Vec<(usize, usize)> = match (cfg.m, cfg.n) {
        (None, None) => CLONE_CHECK_WIDTHS.to_vec(),
        _ => vec![(cfg.m.unwrap_or(4), cfg.n.unwrap_or(2))],
    };
    for &(m, n) in &pairs {
        cfg.limits.check(m, n)?;
    }
    let trials = cfg.trials.unwrap_or(50);
    let tol = cfg.tolerance();
    let mut r = ExperimentReport::new("clone-check", cfg.seed);
    r.param("widths", pairs.iter().map(|(m, n)| format!("{m}x{n}")).collect::<Vec<_>>().join(",")).param("trials", trials);
    let (mut fid, mut uni, mut inv, mut states) = (f64::INFINITY, 0.0f64, 0.0f64, 0usize);
    for &(m, n) in &pairs {
        let limits = cfg.limits;
        let rows = map_trials(trials, seeds(cfg).child(m as u64).child(n as u64), cfg.exec, |_, s| -> Result<(f64, f64, f64, usize)> {
            let f = sample_random_function(m, n, &limits, &mut s.stream())?;
            let c = full_cloning_oracle(&f);
            let bottom = PureState::bottom(m);
            let mut worst = f64::INFINITY;
            let all = preimage_states(&f);
            for (_, psi) in &all {
                let out = c.matrix().mul_vec(psi.tensor(&bottom).amplitudes());
                let target = psi.tensor(psi);
                let ov = crate::qcore::matrix::inner(target.amplitudes(), &out);
                worst = worst.min(ov.norm_sqr());
            }
            Ok((worst, c.unitarity_defect(), c.involution_defect(), all.len()))
        });
        let (mut f_min, mut u_max, mut i_max) = (f64::INFINITY, 0.0f64, 0.0f64);
        for row in rows {
            let (a, b, c, k) = row?;
            f_min = f_min.min(a);
            u_max = u_max.max(b);
            i_max = i_max.max(c);
            states += k;
        }
        r.metric(&format!("min_clone_fidelity_{m}x{n}"), f_min);
        fid = fid.min(f_min);
        uni = uni.max(u_max);
        inv = inv.max(i_max);
    }
    r.metric("min_clone_fidelity", fid)
        .metric("clone_fidelity_deficit", 1.0 - fid)
        .metric("max_unitarity_defect", uni)
        .metric("max_involution_defect", inv)
        .metric("states_checked", states as f64);
    r.check_at_least("clone_fidelity", "min_clone_fidelity", 1.0 - tol)
        .check_at_most("unitary", "max_unitarity_defect", tol)
        .check_at_most("self_inverse", "max_involution_defect", tol);
    Ok(r)
}

/// Stage-3 bundles. `envelope_only` keeps just the Δ envelope and spectrum checks.
fn impostor_stage3(cfg: &RunConfig, envelope_only: bool) -> Result<ExperimentReport> {
    let (m, n) = widths(cfg, 4, 1)?;
    let trials = cfg.trials.unwrap_or(20);
    let tol = cfg.tolerance();
    let limits = cfg.limits;
    let reps = map_trials(trials, seeds(cfg), cfg.exec, |_, s| -> Result<ExperimentReport> {
        let b = ImpostorBundle::sample_random(m, n, &limits, &mut s.stream())?;
        let st = Stage3::build(&b);
        Ok(hat_distance_report(&b, &st, false))
    });
    let reps: Vec<ExperimentReport> = reps.into_iter().collect::<Result<_>>()?;
    let worst = |k: &str| fold_max(reps.iter().map(|x| x.get(k).unwrap_or(f64::NAN)));
    let mut r = ExperimentReport::new(&cfg.experiment, cfg.seed);
    r.param("m", m).param("n", n).param("trials", trials);
    for k in [
        "decomposition_residual_anc0",
        "five_factor_residual_anc0",
        "five_factor_swapped_residual_anc0",
        "spectrum_residual",
        "delta_envelope_gap",
        "u3_unitarity_defect",
        "ancilla_leakage",
        "efficient_unitarity_defect",
        "max_lambda",
        "delta_anc0",
    ] {
        r.metric(&format!("max_{k}"), worst(k));
    }
    r.metric("min_delta_anc0", fold_min(reps.iter().map(|x| x.get("delta_anc0").unwrap_or(f64::NAN))));
    r.check_at_most("spectrum_matches", "max_spectrum_residual", tol)
        .check_at_most("delta_within_envelope", "max_delta_envelope_gap", tol);
    if !envelope_only {
        r.check_at_most("decomposition", "max_decomposition_residual_anc0", tol)
            .check_at_most("five_factor", "max_five_factor_residual_anc0", tol)
            .check_at_most("u3_unitary", "max_u3_unitarity_defect", tol);
    }
    Ok(r)
}

fn impostor_dist(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (m, n) = (cfg.m.unwrap_or(3), cfg.n.unwrap_or(1));
    let trials = cfg.trials.unwrap_or(100_000);
    let s = seeds(cfg);
    let equiv = sampling_equivalence_test(m, n, trials, s.named("equivalence"), SamplingArm::Conditioned, SamplingArm::Construction, cfg.exec)?;
    let broken = sampling_equivalence_test(m, n, trials, s.named("broken"), SamplingArm::Conditioned, SamplingArm::Broken, cfg.exec)?;
    let mut r = ExperimentReport::new("impostor-dist", cfg.seed);
    r.param("m", m).param("n", n).param("trials", trials);
    r.absorb("construction", &equiv).absorb("broken", &broken);
    r.bound(P_FLOOR);
    r.check_at_least("construction_equivalent", "construction.p_value", P_FLOOR)
        .check_at_least("conditioned_uniform", "construction.gof_p_value", P_FLOOR)
        .check_at_most("broken_rejected", "broken.p_value", P_FLOOR);
    Ok(r)
}

fn ratio_bound(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (m, n) = (cfg.m.unwrap_or(12), cfg.n.unwrap_or(3));
    let trials = cfg.trials.unwrap_or(100);
    let reps = map_trials(trials, seeds(cfg), cfg.exec, |_, s| -> Result<ExperimentReport> {
        Ok(ratio_bound_report(&ImpostorBundle::sample_counts_only(m, n, &mut s.stream())?))
    });
    let reps: Vec<ExperimentReport> = reps.into_iter().collect::<Result<_>>()?;
    let frac = |k: &str| reps.iter().filter(|x| x.get(k) == Some(1.0)).count() as f64 / reps.len() as f64;
    let mut r = ExperimentReport::new("ratio-bound", cfg.seed);
    r.param("m", m).param("n", n).param("trials", trials);
    let bound = 72.0 * n as f64 * 2f64.powi(-(n as i32));
    r.metric("max_ratio", fold_max(reps.iter().map(|x| x.get("max_ratio").unwrap_or(f64::NAN))))
        .metric("ratio_bound", bound)
        .metric("vacuous", (bound > 1.0) as u8 as f64)
        .metric("sub_bound_a_fraction", frac("sub_bound_a"))
        .metric("sub_bound_b_fraction", frac("sub_bound_b"))
        .metric("sub_bound_c_fraction", frac("sub_bound_c"))
        .metric("within_bound_fraction", reps.iter().filter(|x| x.passed).count() as f64 / reps.len() as f64);
    r.bound(bound);
    r.check_at_most("ratio_within_bound", "max_ratio", bound);
    if bound > 1.0 {
        r.note("72n·2^-n exceeds 1 at this n, so the bound holds trivially");
    }
    Ok(r)
}

fn nogo_equiv(cfg: &RunConfig) -> Result<ExperimentReport> {
    let trials = cfg.trials.unwrap_or(1000);
    let tol = cfg.tolerance();
    let s = seeds(cfg);
    let orth = map_trials(trials, s.named("orthogonal"), cfg.exec, |_, s| {
        let mut rng = s.stream();
        let dim = rng.random_range(2..=6);
        let classes = rng.random_range(1..=dim);
        let states = random_orthogonal_set(dim, classes, 3, &mut rng);
        equivalence_trial(&states, tol, &mut rng)
    });
    let non = map_trials(trials, s.named("non-orthogonal"), cfg.exec, |_, s| {
        let mut rng = s.stream();
        let dim = rng.random_range(2..=6);
        let count = rng.random_range(2..=4);
        let states = random_non_orthogonal_set(dim, count, &mut rng);
        equivalence_trial(&states, tol, &mut rng)
    });
    let defect = |x: Option<f64>| x.map_or(f64::INFINITY, |f| (1.0 - f).abs());
    let mut r = ExperimentReport::new("nogo-equiv", cfg.seed);
    r.param("trials", trials);
    r.metric("orthogonal_rejected", orth.iter().filter(|o| !o.orthogonal).count() as f64)
        .metric("max_telegraph_defect", fold_max(orth.iter().map(|o| defect(o.min_telegraph_fidelity))))
        .metric("max_clone_defect", fold_max(orth.iter().map(|o| defect(o.min_clone_fidelity))))
        .metric("non_orthogonal_accepted", non.iter().filter(|o| o.orthogonal).count() as f64)
        .metric(
            "constraint_solvable",
            non.iter().filter(|o| o.constraint.as_ref().is_none_or(|c| c.solvable)).count() as f64,
        )
        .metric(
            "min_required_ancilla_overlap",
            fold_min(non.iter().map(|o| o.constraint.as_ref().and_then(|c| c.required_ancilla_overlap).unwrap_or(f64::INFINITY))),
        );
    r.check_at_most("orthogonal_sets_accepted", "orthogonal_rejected", 0.0)
        .check_at_most("telegraph_round_trip", "max_telegraph_defect", tol)
        .check_at_most("two_copy_clone", "max_clone_defect", tol)
        .check_at_most("non_orthogonal_rejected", "non_orthogonal_accepted", 0.0)
        .check_at_most("constraint_violated", "constraint_solvable", 0.0);
    Ok(r)
}

/// Worked instance for the lemma: (0.9, 0.9) ↦ 0.61.
pub const LEMMA_INSTANCE: (f64, f64, f64) = (0.9, 0.9, 0.61);

fn lemma_a(cfg: &RunConfig) -> Result<ExperimentReport> {
    let trials = cfg.trials.unwrap_or(10_000);
    let tol = cfg.tolerance();
    let samples = map_trials(trials, seeds(cfg), cfg.exec, |_, s| {
        let mut rng = s.stream();
        let dim = rng.random_range(2..=6);
        random_lemma_triple(dim, &mut rng).evaluate()
    });
    let samples: Vec<_> = samples.into_iter().collect::<Result<_>>()?;
    let (p1, p2, expected) = LEMMA_INSTANCE;
    let value = lemma_bound(p1, p2)?;
    let mut r = ExperimentReport::new("lemma-a", cfg.seed);
    r.param("trials", trials);
    r.metric("min_slack", fold_min(samples.iter().map(|s| s.slack())))
        .metric("non_vacuous", samples.iter().filter(|s| s.bound > 0.0).count() as f64)
        .metric("instance_value", value)
        .metric("instance_error", (value - expected).abs());
    r.check_at_least("inequality", "min_slack", -tol).check_at_most("instance", "instance_error", 4.0 * f64::EPSILON);
    Ok(r)
}

fn bbbv_swap(cfg: &RunConfig) -> Result<ExperimentReport> {
    let m = cfg.m.unwrap_or(3);
    cfg.limits.check(m, 1)?;
    let trials = cfg.trials.unwrap_or(100);
    let mut r = bbbv_sweep(trials, m, seeds(cfg), cfg.exec)?;
    r.param("trials", trials);
    Ok(r)
}

fn telegraph_reductions(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (m, n) = widths(cfg, 3, 1)?;
    let trials = cfg.trials.unwrap_or(10_000);
    let etas: Vec<f64> = cfg.eta.map_or(REDUCTION_ETAS.to_vec(), |e| vec![e]);
    let s = seeds(cfg);
    let mut setup = s.named("setup").stream();
    let f = sample_random_function(m, n, &cfg.limits, &mut setup)?;
    let z = sample_label_of(&f, &mut setup);
    let states: Vec<PureState> = preimage_states(&f).into_iter().map(|(_, p)| p).collect();
    let psi = preimage_state(&f, z)?;
    let junk = PureState::bottom(m);
    let mut r = ExperimentReport::new("telegraph-reductions", cfg.seed);
    r.param("m", m).param("n", n).param("trials", trials).param("z", z);
    for (i, &eta) in etas.iter().enumerate() {
        let inner = perfect_telegraph_for_orthogonal(&states, cfg.tolerance())?;
        let p = NoisedProtocol::new(inner, eta, &junk)?;
        let est = estimate_reduction(&p, &psi, trials, s.named("reduction").child(i as u64), cfg.exec);
        let choice = reconstructor_via_telegraph(&p, &psi, trials, &mut s.named("advice").child(i as u64).stream())?;
        let key = format!("eta_{eta}");
        let bound = telegraph_clone_bound(eta);
        r.metric(&format!("{key}.telegraph_fidelity"), est.telegraph.mean)
            .metric(&format!("{key}.clone_fidelity"), est.clone.mean)
            .metric(&format!("{key}.clone_sigma"), est.clone.std_err)
            .metric(&format!("{key}.clone_bound"), bound)
            .metric(&format!("{key}.clone_margin"), est.clone.mean - (bound - 3.0 * est.clone.std_err))
            .metric(&format!("{key}.reconstruction_fidelity"), choice.fidelity)
            .metric(&format!("{key}.reconstruction_sigma"), choice.std_err)
            .metric(&format!("{key}.reconstruction_margin"), choice.fidelity - (eta - 3.0 * choice.std_err))
            .metric(&format!("{key}.distinct_messages"), choice.distinct_messages as f64);
        r.check_at_least(&format!("{key}.clone"), &format!("{key}.clone_margin"), 0.0)
            .check_at_least(&format!("{key}.reconstruction"), &format!("{key}.reconstruction_margin"), 0.0);
    }
    Ok(r)
}

fn collisions(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (m, n) = widths(cfg, 6, 2)?;
    let k = cfg.k.unwrap_or(4);
    let eta = cfg.eta.unwrap_or(1.0);
    let trials = cfg.trials.unwrap_or(100);
    let limits = cfg.limits;
    let runs = collision_meta(trials, k, eta, seeds(cfg), cfg.exec, move |rng| {
        let f = sample_random_function(m, n, &limits, rng)?;
        let z = sample_label_of(&f, rng);
        let psi = preimage_state(&f, z)?;
        Ok((f, z, FnReconstructor::constant(psi.density())))
    })?;
    let successes = runs.iter().filter(|c| c.succeeded(k)).count();
    let mut r = ExperimentReport::new("collisions", cfg.seed);
    r.param("m", m).param("n", n).param("k", k).param("eta", eta).param("trials", trials);
    r.metric("runs_per_meta", runs.first().map_or(0.0, |c| c.runs as f64))
        .metric("successes", successes as f64)
        .metric("success_fraction", successes as f64 / trials as f64)
        .metric("mean_distinct", runs.iter().map(|c| c.distinct.len() as f64).sum::<f64>() / trials as f64)
        .metric("min_valid_samples", fold_min(runs.iter().map(|c| c.valid_samples as f64)));
    r.check_at_least("majority_succeed", "success_fraction", 0.5);
    Ok(r)
}

fn rohc(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (m, n) = widths(cfg, 4, 2)?;
    let trials = cfg.trials.unwrap_or(100);
    let tol = cfg.tolerance();
    let limits = cfg.limits;
    let rows = map_trials(trials, seeds(cfg), cfg.exec, |_, s| -> Result<(ExperimentReport, ExperimentReport)> {
        let mut rng = s.stream();
        let yes = generate_rohc(m, n, TruthKind::Yes, &limits, &mut rng)?;
        let no = generate_rohc(m, n, TruthKind::No, &limits, &mut rng)?;
        Ok((rohc_report(&yes, 5, &mut rng)?, rohc_report(&no, 5, &mut rng)?))
    });
    let rows: Vec<_> = rows.into_iter().collect::<Result<_>>()?;
    let yes = |k: &'static str| rows.iter().map(move |(y, _)| y.get(k).unwrap_or(f64::NAN));
    let mut r = ExperimentReport::new("rohc", cfg.seed);
    r.param("m", m).param("n", n).param("trials", trials);
    r.metric("max_completeness_deficit", fold_max(yes("completeness").map(|c| (1.0 - c).abs())))
        .metric("min_clone_fidelity", fold_min(yes("clone_fidelity")))
        .metric("max_no_acceptance_norm", fold_max(rows.iter().map(|(_, x)| x.get("acceptance_norm").unwrap_or(f64::NAN))))
        .metric("min_yes_acceptance_norm", fold_min(yes("acceptance_norm")))
        .metric(
            "max_operator_consistency",
            fold_max(rows.iter().flat_map(|(y, x)| [y, x]).map(|x| x.get("operator_consistency").unwrap_or(f64::NAN))),
        );
    r.check_at_most("completeness", "max_completeness_deficit", tol)
        .check_at_most("soundness", "max_no_acceptance_norm", tol)
        .check_at_most("operator_consistency", "max_operator_consistency", tol);
    Ok(r)
}

/// Worked instance for the composed fidelity: (0.9, 0.9) ↦ 0.45332.
pub const COMPOSITION_INSTANCE: (f64, f64, f64) = (0.9, 0.9, 0.45332);

fn composition(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (m, n) = widths(cfg, 3, 1)?;
    let trials = cfg.trials.unwrap_or(100);
    let tol = cfg.tolerance();
    let limits = cfg.limits;
    let rows = map_trials(trials, seeds(cfg), cfg.exec, |_, s| {
        let mut rng = s.stream();
        let inst = generate_rohc(m, n, TruthKind::Yes, &limits, &mut rng)?;
        let case = random_composition_case(&inst, &mut rng)?;
        composition_sample(&case, &mut rng)
    });
    let rows: Vec<_> = rows.into_iter().collect::<Result<_>>()?;
    let (c, f, expected) = COMPOSITION_INSTANCE;
    let value = composition_fidelity(c, f)?;
    let mut r = ExperimentReport::new("composition", cfg.seed);
    r.param("m", m).param("n", n).param("trials", trials);
    r.metric("instance_value", value)
        .metric("instance_error", (value - expected).abs())
        .metric("min_slack", fold_min(rows.iter().map(|s| s.clone_fidelity - s.bound)))
        .metric("min_measured_minus_c2", fold_min(rows.iter().map(|s| s.measured_fidelity - s.c * s.c)))
        .metric("non_vacuous", rows.iter().filter(|s| s.bound > 0.0).count() as f64)
        .metric("min_c", fold_min(rows.iter().map(|s| s.c)))
        .metric("min_f", fold_min(rows.iter().map(|s| s.f)));
    r.check_at_most("instance", "instance_error", 1e-5).check_at_least("clone_bound", "min_slack", -tol);
    Ok(r)
}

fn nepke_demo(cfg: &RunConfig) -> Result<ExperimentReport> {
    let (m, n) = widths(cfg, 4, 1)?;
    let trials = cfg.trials.unwrap_or(10);
    let steps = cfg.k.unwrap_or(8);
    let tol = cfg.tolerance();
    let sampler = RohcSampler { m, n, limits: cfg.limits };
    let we = ToyWitnessEncryption;
    let rows = map_trials(trials, seeds(cfg).named("keys"), cfg.exec, |_, s| -> Result<(f64, bool, f64, bool, usize)> {
        let mut rng = s.stream();
        let kp = ne_gen(&sampler, &mut rng)?;
        let (pc, okc) = decryption_chain(&we, &kp, steps, &mut rng)?;
        let (pp, okp, keys) = parallel_decryption(&we, &kp, 2, &mut rng)?;
        Ok((pc, okc, pp, okp, keys))
    });
    let rows: Vec<_> = rows.into_iter().collect::<Result<_>>()?;
    let (send, receive) = basis_exfiltration_adversary();
    let game = exfiltration_game(&we, &sampler, &*send, &*receive, b"zero", b"one!", trials.max(100), seeds(cfg).named("game"), cfg.exec)?;
    let mut r = ExperimentReport::new("nepke-demo", cfg.seed);
    r.param("m", m).param("n", n).param("trials", trials).param("chain_steps", steps);
    r.metric("max_chain_deviation", fold_max(rows.iter().map(|x| (1.0 - x.0).abs())))
        .metric("chain_failures", rows.iter().filter(|x| !x.1).count() as f64)
        .metric("max_parallel_deviation", fold_max(rows.iter().map(|x| (1.0 - x.2).abs())))
        .metric("parallel_failures", rows.iter().filter(|x| !x.3).count() as f64)
        .metric("parallel_keys", rows.first().map_or(0.0, |x| x.4 as f64))
        .metric("exfiltration_advantage", game.get("advantage").unwrap_or(f64::NAN));
    r.check_at_most("chain", "max_chain_deviation", tol)
        .check_at_most("chain_messages", "chain_failures", 0.0)
        .check_at_most("parallel", "max_parallel_deviation", tol)
        .check_at_most("parallel_messages", "parallel_failures", 0.0);
    r.note("the witness encryption is a toy and is not secure");
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parallel::Execution;

    #[test]
    fn unknown_name() {
        assert_eq!(run_experiment(&RunConfig::new("nope", 1)).unwrap_err(), Error::UnknownExperiment("nope".into()));
    }

    #[test]
    fn cap_is_enforced() {
        let mut cfg = RunConfig::new("rohc", 1).with_m(9).with_n(2);
        cfg.limits.cap = 6;
        assert_eq!(run_experiment(&cfg).unwrap_err(), Error::CapExceeded { m: 9, cap: 6 });
    }

    #[test]
    fn clone_check_example() {
        let cfg = RunConfig::new("clone-check", 7).with_m(4).with_n(2).with_trials(5);
        let r = run_experiment(&cfg).unwrap();
        assert!(r.passed, "{}", r.summary());
        assert!(r.get("min_clone_fidelity").unwrap() >= 1.0 - 1e-9);
    }

    #[test]
    fn rohc_no_norm_is_zero() {
        let r = run_experiment(&RunConfig::new("rohc", 3).with_trials(4)).unwrap();
        assert!(r.get("max_no_acceptance_norm").unwrap() <= 1e-9, "{}", r.summary());
    }

    #[test]
    fn sequential_matches_parallel() {
        let base = RunConfig::new("lemma-a", 11).with_trials(200);
        let a = run_experiment(&base.clone().with_exec(Execution::Parallel)).unwrap();
        let b = run_experiment(&base.with_exec(Execution::Sequential)).unwrap();
        assert_eq!(a.metrics, b.metrics);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(matches!(run_experiment(&RunConfig::new("lemma-a", 1).with_trials(0)), Err(Error::InvalidConfig(_))));
    }
}
