//! Merging costs of Union-Find algorithms driven by the additive
//! Marcus-Lushnikov coalescent.
//!
//! The crate is split along the lines of the experiment pipeline:
//!
//! * [`process`] generates merge events through three equivalent embeddings
//!   (direct predator/prey chain, random spanning tree, parking scheme).
//! * [`cost`] turns events into per-functional costs and checkpoint curves.
//! * [`smoluchowski`] evaluates the deterministic limit (the additive
//!   Smoluchowski solution and the partial-cost curves built on it).
//! * [`exact`] holds exact combinatorial formulas and brute-force enumerators.
//! * [`stats`] and [`experiment`] run seeded Monte Carlo replications and the
//!   goodness-of-fit machinery.
//! * [`verify`] encodes the acceptance criteria; [`cli`] is the configuration
//!   and table layer shared by the binary.

pub mod cli;
pub mod cost;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod process;
pub mod rng;
pub mod smoluchowski;
mod special;
pub mod stats;
pub mod verify;

pub use cost::{CheckpointGrid, CostTrace, Functional, TraceSet};
pub use error::{Error, Result};
pub use process::{ClusterState, EmbeddingKind, MergeEvent};
pub use stats::SummaryStats;
