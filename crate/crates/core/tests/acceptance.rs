//! Acceptance criteria 1–13, one line each. Runs as a plain binary so the
//! lines are printed even when every criterion passes.

use std::collections::BTreeMap;
use std::process::ExitCode;

use nogolab_core::harness::{run_experiment, ExperimentReport, RunConfig};
use nogolab_core::Execution;

const SEED: u64 = 1;

struct Line {
    id: u32,
    title: &'static str,
    ok: bool,
    detail: String,
}

fn run(name: &str) -> ExperimentReport {
    run_experiment(&RunConfig::new(name, SEED)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn metric(r: &ExperimentReport, k: &str) -> f64 {
    r.get(k).unwrap_or(f64::NAN)
}

fn checks(r: &ExperimentReport, names: &[&str]) -> (bool, String) {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in names {
        let c = r.check(n).unwrap_or_else(|| panic!("{}: no check {n}", r.name));
        ok &= c.holds;
        parts.push(format!("{}{}={:.3e}{}{:.1e}", if c.holds { "" } else { "!" }, n, metric(r, &c.metric), c.relation, c.threshold));
    }
    (ok, parts.join(" "))
}

fn within(r: &ExperimentReport, seconds: f64) -> (bool, String) {
    (r.runtime_ms < seconds * 1e3, format!("{:.1}s<{seconds}s", r.runtime_ms / 1e3))
}

fn line(id: u32, title: &'static str, parts: &[(bool, String)]) -> Line {
    Line {
        id,
        title,
        ok: parts.iter().all(|p| p.0),
        detail: parts.iter().map(|p| p.1.as_str()).collect::<Vec<_>>().join(" "),
    }
}

fn bits(r: &ExperimentReport) -> BTreeMap<String, u64> {
    r.metrics.iter().map(|(k, v)| (k.clone(), v.to_bits())).collect()
}

fn main() -> ExitCode {
    let mut reports: BTreeMap<&'static str, ExperimentReport> = BTreeMap::new();
    let mut lines = Vec::new();

    let r = reports.entry("clone-check").or_insert_with(|| run("clone-check"));
    lines.push(line(1, "perfect clonability", &[checks(r, &["clone_fidelity", "unitary", "self_inverse"]), within(r, 60.0)]));

    let r = reports.entry("impostor-identity").or_insert_with(|| run("impostor-identity"));
    lines.push(line(2, "stage-3 decomposition", &[checks(r, &["decomposition", "five_factor"]), within(r, 120.0)]));
    lines.push(line(3, "rotation spectrum and delta envelope", &[checks(r, &["spectrum_matches", "delta_within_envelope"])]));

    let r = reports.entry("impostor-dist").or_insert_with(|| run("impostor-dist"));
    let p = metric(r, "construction.p_value");
    let pb = metric(r, "broken.p_value");
    lines.push(line(
        4,
        "sampling equivalence",
        &[(p > 0.001, format!("p={p:.4}>0.001")), (pb < 0.001, format!("broken p={pb:.3e}<0.001")), within(r, 60.0)],
    ));

    let r = reports.entry("lemma-a").or_insert_with(|| run("lemma-a"));
    lines.push(line(5, "projector lemma", &[checks(r, &["inequality", "instance"])]));

    let r = reports.entry("nogo-equiv").or_insert_with(|| run("nogo-equiv"));
    lines.push(line(
        6,
        "orthogonality equivalence",
        &[checks(r, &["orthogonal_sets_accepted", "telegraph_round_trip", "two_copy_clone", "non_orthogonal_rejected", "constraint_violated"])],
    ));

    let r = reports.entry("telegraph-reductions").or_insert_with(|| run("telegraph-reductions"));
    let names: Vec<String> = ["0.25", "0.5", "1"].iter().flat_map(|e| [format!("eta_{e}.clone"), format!("eta_{e}.reconstruction")]).collect();
    let names: Vec<&str> = names.iter().map(String::as_str).collect();
    lines.push(line(7, "noised reductions", &[checks(r, &names)]));

    let r = reports.entry("bbbv-swap").or_insert_with(|| run("bbbv-swap"));
    let stage2 = metric(r, "stage2_circuits");
    lines.push(line(
        8,
        "oracle swap bounds",
        &[
            checks(r, &["distance_within_eps", "tv_within_4eps", "stage2_tv_within_4eps_verification"]),
            (stage2 >= 1.0, format!("stage2_circuits={stage2}")),
        ],
    ));

    let r = reports.entry("collisions").or_insert_with(|| run("collisions"));
    let s = metric(r, "successes");
    lines.push(line(9, "collision finding", &[(s >= 50.0, format!("successes={s}>=50 of 100"))]));

    let r = reports.entry("rohc").or_insert_with(|| run("rohc"));
    lines.push(line(10, "rohc completeness and soundness", &[checks(r, &["completeness", "soundness"])]));

    let r = reports.entry("composition").or_insert_with(|| run("composition"));
    lines.push(line(11, "verifier-cloner composition", &[checks(r, &["instance", "clone_bound"])]));

    let r = reports.entry("nepke-demo").or_insert_with(|| run("nepke-demo"));
    let keys = metric(r, "parallel_keys");
    lines.push(line(
        12,
        "nepke correctness",
        &[checks(r, &["chain", "chain_messages", "parallel", "parallel_messages"]), (keys == 4.0, format!("keys={keys}"))],
    ));

    let mut differing = Vec::new();
    for (name, first) in &reports {
        let again = run_experiment(&RunConfig::new(*name, SEED).with_exec(Execution::Sequential)).expect("reruns");
        if bits(first) != bits(&again) || first.checks != again.checks {
            differing.push(*name);
        }
    }
    lines.push(line(
        13,
        "reproducibility",
        &[(differing.is_empty(), format!("{} experiments re-run sequentially, differing: {:?}", reports.len(), differing))],
    ));

    println!();
    for l in &lines {
        println!("criterion {:>2} {} {}: {}", l.id, if l.ok { "PASS" } else { "FAIL" }, l.title, l.detail);
    }
    let failed: Vec<u32> = lines.iter().filter(|l| !l.ok).map(|l| l.id).collect();
    println!("{} of {} criteria pass", lines.len() - failed.len(), lines.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failing: {failed:?}");
        ExitCode::FAILURE
    }
}
