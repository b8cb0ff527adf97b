//! Merge-event generation for the additive coalescent.
//!
//! Three embeddings produce the same law on merge-event sequences:
//! the direct predator/prey chain on a [`ClusterState`], a uniform random
//! spanning tree with a uniform edge order, and the circular parking scheme.

mod event;
mod parking;
mod state;
mod tree;

pub use event::MergeEvent;
pub use parking::{simulate_parking, simulate_parking_with};
pub use state::{ClusterState, DisjointSets};
pub use tree::{
    orient_from_root, prufer_decode, replay_oriented_edges, simulate_spanning_tree,
    simulate_spanning_tree_with,
};

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EmbeddingKind {
    DirectChain,
    SpanningTree,
    Parking,
}

impl EmbeddingKind {
    pub const ALL: [EmbeddingKind; 3] = [
        EmbeddingKind::DirectChain,
        EmbeddingKind::SpanningTree,
        EmbeddingKind::Parking,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EmbeddingKind::DirectChain => "direct",
            EmbeddingKind::SpanningTree => "tree",
            EmbeddingKind::Parking => "parking",
        }
    }

    /// Runs one full coalescence (n-1 merges) and feeds every event to `sink`.
    pub fn simulate_with<R, F>(self, n: usize, rng: &mut R, sink: F) -> Result<()>
    where
        R: Rng + ?Sized,
        F: FnMut(&MergeEvent),
    {
        match self {
            EmbeddingKind::DirectChain => simulate_direct_with(n, rng, sink),
            EmbeddingKind::SpanningTree => simulate_spanning_tree_with(n, rng, sink),
            EmbeddingKind::Parking => simulate_parking_with(n, rng, sink),
        }
    }

    pub fn simulate<R: Rng + ?Sized>(self, n: usize, rng: &mut R) -> Result<Vec<MergeEvent>> {
        let mut events = Vec::with_capacity(n.saturating_sub(1));
        self.simulate_with(n, rng, |e| events.push(*e))?;
        Ok(events)
    }
}

impl fmt::Display for EmbeddingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EmbeddingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "direct" | "directchain" | "chain" => Ok(EmbeddingKind::DirectChain),
            "tree" | "spanningtree" | "spanning-tree" => Ok(EmbeddingKind::SpanningTree),
            "parking" => Ok(EmbeddingKind::Parking),
            other => Err(Error::InvalidArgument(format!(
                "unknown embedding '{other}'"
            ))),
        }
    }
}

/// Direct chain from the monodisperse state until one cluster remains.
pub fn simulate_direct_with<R, F>(n: usize, rng: &mut R, mut sink: F) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&MergeEvent),
{
    let mut state = ClusterState::monodisperse(n)?;
    while state.clusters() > 1 {
        let event = state.step_direct(rng)?;
        sink(&event);
    }
    Ok(())
}

/// `floor(u * predator)` for a fresh uniform `u`.
pub(crate) fn draw_displacement<R: Rng + ?Sized>(rng: &mut R, predator: usize) -> usize {
    let u: f64 = rng.random();
    ((u * predator as f64) as usize).min(predator - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn every_embedding_conserves_mass() {
        for kind in EmbeddingKind::ALL {
            for n in [2usize, 3, 7, 50, 500] {
                let mut rng = rng_from_seed(n as u64);
                let events = kind.simulate(n, &mut rng).unwrap();
                assert_eq!(events.len(), n - 1, "{kind} n={n}");
                // Only the sizes are observable, so check the last merge covers n.
                assert_eq!(events.last().unwrap().merged_size(), n);
                for (i, e) in events.iter().enumerate() {
                    assert_eq!(e.step, i + 1);
                    assert!(e.smaller >= 1 && e.smaller <= e.larger);
                    assert!(e.smaller + e.larger <= n);
                    assert!(e.displacement < e.predator);
                }
            }
        }
    }

    #[test]
    fn same_seed_same_stream() {
        for kind in EmbeddingKind::ALL {
            let a = kind.simulate(300, &mut rng_from_seed(11)).unwrap();
            let b = kind.simulate(300, &mut rng_from_seed(11)).unwrap();
            assert_eq!(a.len(), b.len());
            for (x, y) in a.iter().zip(&b) {
                assert_eq!(x, y);
                assert_eq!(x.coin.to_bits(), y.coin.to_bits());
            }
        }
    }

    #[test]
    fn n_two_is_forced() {
        for kind in EmbeddingKind::ALL {
            let events = kind.simulate(2, &mut rng_from_seed(3)).unwrap();
            assert_eq!(events.len(), 1);
            let e = events[0];
            assert_eq!(
                (e.step, e.smaller, e.larger, e.predator, e.prey),
                (1, 1, 1, 1, 1)
            );
            assert_eq!(e.displacement, 0);
        }
    }

    #[test]
    fn embedding_names_parse() {
        for kind in EmbeddingKind::ALL {
            assert_eq!(kind.name().parse::<EmbeddingKind>().unwrap(), kind);
        }
        assert!("graph".parse::<EmbeddingKind>().is_err());
    }
}
