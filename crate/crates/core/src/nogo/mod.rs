//! No-go machinery: cloning, telegraphing and reconstruction as procedures,
//! the reductions between them, and oracle-swap bounds.

pub mod bbbv;
pub mod collisions;
pub mod equivalence;
pub mod lemma;
pub mod tasks;

pub use bbbv::{
    oracle_swap_check, query_magnitude, run_circuit, AdversaryCircuit, CircuitOracle, OracleTable, SlotId, Step,
};
pub use collisions::{collision_experiment, collision_run, CollisionRun};
pub use equivalence::{inner_product_constraint, is_orthogonal_with_duplication, perfect_telegraph_for_orthogonal, BasisTelegraph};
pub use lemma::lemma_bound;
pub use tasks::{
    clone_via_telegraph, reconstructor_via_telegraph, Bits, CloneOutcome, FnProtocol, FnReconstructor, NoisedProtocol,
    Reconstructor, TelegraphProtocol,
};

/// (4/27)·η³, the two-copy fidelity guaranteed from single-copy success η.
pub fn telegraph_clone_bound(eta: f64) -> f64 {
    4.0 / 27.0 * eta.powi(3)
}
