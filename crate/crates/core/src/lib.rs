//! Exact simulation of cloning oracles, preimage superposition states and the
//! reductions between cloning, telegraphing and reconstruction.
//!
//! Everything is dense linear algebra over the ⊥-augmented space of an m-bit
//! register, so sizes stay at desk scale (m ≤ 6 by default). Randomness comes
//! from explicit seeded streams; see [`rng`].

pub mod complexity;
pub mod crypto;
pub mod error;
pub mod harness;
pub mod impostor;
pub mod nogo;
pub mod parallel;
pub mod qcore;
pub mod rng;
pub mod scheme;

pub use error::{Error, Result};
pub use parallel::Execution;
pub use rng::{SeedTree, Stream};
