//! Turning a reconstructor for ψ_z into disjoint collisions of f.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::harness::report::ExperimentReport;
use crate::parallel::{map_trials, Execution};
use crate::qcore::{measure, Pvm, QuantumState};
use crate::rng::{SeedTree, Stream};
use crate::scheme::{ClassicalFunction, Label};

use super::tasks::Reconstructor;

/// Outcome of one collision run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CollisionRun {
    pub runs: usize,
    /// Measurement outcomes x with f(x) = z.
    pub valid_samples: usize,
    pub distinct: BTreeSet<usize>,
}

impl CollisionRun {
    /// ⌊distinct / 2⌋ disjoint pairs.
    pub fn disjoint_collisions(&self) -> usize {
        self.distinct.len() / 2
    }

    pub fn succeeded(&self, k: usize) -> bool {
        self.distinct.len() >= 2 * k
    }
}

/// ⌈8k/η⌉
pub fn collision_runs(k: usize, eta: f64) -> Result<usize> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::OutOfRange { name: "eta", value: eta });
    }
    Ok((8.0 * k as f64 / eta).ceil() as usize)
}

/// Runs the reconstructor ⌈8k/η⌉ times, measuring each output in the
/// computational basis. Failed runs and outcomes outside f⁻¹(z) are discarded.
pub fn collision_run<R: Reconstructor + ?Sized>(
    r: &R,
    f: &ClassicalFunction,
    z: Label,
    k: usize,
    eta: f64,
    rng: &mut Stream,
) -> Result<CollisionRun> {
    if !f.in_image(z) {
        return Err(Error::NoPreimage { z });
    }
    let runs = collision_runs(k, eta)?;
    let pvm = Pvm::computational(f.aug_dim());
    let mut distinct = BTreeSet::new();
    let mut valid = 0;
    for _ in 0..runs {
        let Ok(rho) = r.run(rng) else { continue };
        if rho.dim() != f.aug_dim() {
            continue;
        }
        let Ok((x, _)) = measure(&pvm, &rho, rng) else { continue };
        if x < f.domain_size() && f.eval(x) == z {
            valid += 1;
            distinct.insert(x);
        }
    }
    Ok(CollisionRun { runs, valid_samples: valid, distinct })
}

/// A single run as a report.
pub fn collision_experiment<R: Reconstructor + ?Sized>(
    r: &R,
    f: &ClassicalFunction,
    z: Label,
    k: usize,
    eta: f64,
    rng: &mut Stream,
) -> Result<ExperimentReport> {
    let run = collision_run(r, f, z, k, eta, rng)?;
    let mut rep = ExperimentReport::new("collisions", 0);
    rep.param("m", f.m()).param("n", f.n()).param("k", k).param("eta", eta).param("z", z);
    rep.metric("runs", run.runs as f64)
        .metric("preimages", f.preimages(z).len() as f64)
        .metric("valid_samples", run.valid_samples as f64)
        .metric("distinct", run.distinct.len() as f64)
        .metric("disjoint_collisions", run.disjoint_collisions() as f64)
        .metric("success", run.succeeded(k) as u8 as f64);
    rep.check_at_least("found_k_collisions", "distinct", (2 * k) as f64);
    if f.preimages(z).len() < 2 * k {
        rep.note("fewer than 2k preimages exist; success is impossible");
    }
    Ok(rep)
}

/// Repeats the experiment over `meta_runs` seed branches; `setup` builds the
/// function, target and reconstructor for each branch.
pub fn collision_meta<F, R>(meta_runs: u64, k: usize, eta: f64, seeds: SeedTree, exec: Execution, setup: F) -> Result<Vec<CollisionRun>>
where
    F: Fn(&mut Stream) -> Result<(ClassicalFunction, Label, R)> + Sync + Send,
    R: Reconstructor,
{
    map_trials(meta_runs, seeds, exec, |_, s| {
        let mut rng = s.stream();
        let (f, z, r) = setup(&mut rng)?;
        collision_run(&r, &f, z, k, eta, &mut rng)
    })
    .into_iter()
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nogo::tasks::FnReconstructor;
    use crate::qcore::{DimTag, PureState};
    use crate::rng::stream;
    use crate::scheme::preimage_state;

    fn f() -> ClassicalFunction {
        ClassicalFunction::new(3, 1, vec![0, 1, 0, 0, 1, 0, 1, 0]).unwrap()
    }

    #[test]
    fn fixed_basis_preimage() {
        let r = FnReconstructor::constant(PureState::basis(DimTag::Augmented(3), 2).density());
        let run = collision_run(&r, &f(), 0, 2, 1.0, &mut stream(1)).unwrap();
        assert_eq!(run.runs, 16);
        assert_eq!(run.distinct.len(), 1);
        assert_eq!(run.disjoint_collisions(), 0);
    }

    #[test]
    fn orthogonal_output_finds_nothing() {
        let r = FnReconstructor::constant(PureState::bottom(3).density());
        let run = collision_run(&r, &f(), 0, 2, 1.0, &mut stream(2)).unwrap();
        assert_eq!(run.valid_samples, 0);
        let r = FnReconstructor::constant(preimage_state(&f(), 1).unwrap().density());
        assert_eq!(collision_run(&r, &f(), 0, 2, 1.0, &mut stream(2)).unwrap().valid_samples, 0);
    }

    #[test]
    fn exact_state_collects_preimages() {
        let psi = preimage_state(&f(), 0).unwrap();
        let r = FnReconstructor::constant(psi.density());
        let rep = collision_experiment(&r, &f(), 0, 2, 1.0, &mut stream(3)).unwrap();
        assert_eq!(rep.get("valid_samples"), Some(16.0));
        assert!(rep.passed, "{}", rep.summary());
        let bad = ClassicalFunction::constant(3, 1, 0).unwrap();
        assert_eq!(collision_run(&r, &bad, 1, 1, 1.0, &mut stream(3)).unwrap_err(), Error::NoPreimage { z: 1 });
        assert!(collision_runs(1, 0.0).is_err());
        assert_eq!(collision_runs(4, 0.5).unwrap(), 64);
    }
}
