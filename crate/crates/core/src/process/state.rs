use std::collections::BTreeMap;

use rand::Rng;

use super::{draw_displacement, MergeEvent};
use crate::error::{Error, Result};

/// Plain union-by-size disjoint sets with path halving.
#[derive(Debug, Clone)]
pub struct DisjointSets {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSets {
    pub fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            let grandparent = self.parent[self.parent[x]];
            self.parent[x] = grandparent;
            x = grandparent;
        }
        x
    }

    /// Size of the set rooted at `root`. Only meaningful for roots.
    pub fn root_size(&self, root: usize) -> usize {
        self.size[root]
    }

    /// Links two distinct roots; returns `(new_root, absorbed_root)`.
    /// Ties keep `a` as the root.
    pub fn link(&mut self, a: usize, b: usize) -> (usize, usize) {
        debug_assert_ne!(a, b);
        let (keep, drop) = if self.size[a] >= self.size[b] {
            (a, b)
        } else {
            (b, a)
        };
        self.parent[drop] = keep;
        self.size[keep] += self.size[drop];
        (keep, drop)
    }
}

/// Current partition of `n` unit particles, with a dense index of live roots
/// so that a uniform cluster can be drawn in O(1).
#[derive(Debug, Clone)]
pub struct ClusterState {
    sets: DisjointSets,
    roots: Vec<usize>,
    /// Position of each live root inside `roots`.
    root_pos: Vec<usize>,
    largest: usize,
}

impl ClusterState {
    pub fn monodisperse(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        Ok(ClusterState {
            sets: DisjointSets::new(n),
            roots: (0..n).collect(),
            root_pos: (0..n).collect(),
            largest: 1,
        })
    }

    pub fn n(&self) -> usize {
        self.sets.len()
    }

    pub fn clusters(&self) -> usize {
        self.roots.len()
    }

    /// Number of merges performed so far.
    pub fn merges(&self) -> usize {
        self.n() - self.clusters()
    }

    pub fn largest_cluster(&self) -> usize {
        self.largest
    }

    pub fn find(&mut self, element: usize) -> usize {
        self.sets.find(element)
    }

    pub fn live_roots(&self) -> &[usize] {
        &self.roots
    }

    pub fn cluster_size(&self, root: usize) -> usize {
        self.sets.root_size(root)
    }

    /// size -> number of clusters of that size.
    pub fn cluster_spectrum(&self) -> BTreeMap<usize, usize> {
        let mut spectrum = BTreeMap::new();
        for &r in &self.roots {
            *spectrum.entry(self.sets.root_size(r)).or_insert(0) += 1;
        }
        spectrum
    }

    fn swap_slots(&mut self, i: usize, j: usize) {
        if i != j {
            self.roots.swap(i, j);
            self.root_pos[self.roots[i]] = i;
            self.root_pos[self.roots[j]] = j;
        }
    }

    /// Merges the clusters rooted at `a` and `b`; returns the surviving root.
    pub fn merge_roots(&mut self, a: usize, b: usize) -> Result<usize> {
        if a == b || self.sets.find(a) != a || self.sets.find(b) != b {
            return Err(Error::Precondition(format!(
                "merge_roots needs two distinct live roots, got {a} and {b}"
            )));
        }
        let (keep, drop) = self.sets.link(a, b);
        let last = self.roots.len() - 1;
        self.swap_slots(self.root_pos[drop], last);
        self.roots.pop();
        self.largest = self.largest.max(self.sets.root_size(keep));
        Ok(keep)
    }

    /// One step of the direct chain: a size-biased predator (uniform element,
    /// then its root) eats a prey drawn uniformly among the other clusters.
    pub fn step_direct<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<MergeEvent> {
        let clusters = self.clusters();
        if clusters < 2 {
            return Err(Error::Precondition(
                "step_direct needs at least two clusters".into(),
            ));
        }
        let element = rng.random_range(0..self.n());
        let predator = self.sets.find(element);

        let last = clusters - 1;
        let pos = self.root_pos[predator];
        self.swap_slots(pos, last);
        let prey = self.roots[rng.random_range(0..last)];
        self.swap_slots(pos, last);

        let predator_size = self.sets.root_size(predator);
        let prey_size = self.sets.root_size(prey);
        let coin: f64 = rng.random();
        let displacement = draw_displacement(rng, predator_size);
        self.merge_roots(predator, prey)?;

        Ok(MergeEvent::new(
            self.merges(),
            predator_size,
            prey_size,
            coin,
            displacement,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn monodisperse_shapes() {
        assert!(ClusterState::monodisperse(0).is_err());

        let one = ClusterState::monodisperse(1).unwrap();
        assert_eq!(one.clusters(), 1);
        assert_eq!(one.largest_cluster(), 1);

        let five = ClusterState::monodisperse(5).unwrap();
        assert_eq!(five.clusters(), 5);
        assert_eq!(five.cluster_spectrum(), BTreeMap::from([(1, 5)]));

        let hundred = ClusterState::monodisperse(100).unwrap();
        assert_eq!(hundred.cluster_spectrum(), BTreeMap::from([(1, 100)]));
    }

    #[test]
    fn single_cluster_cannot_step() {
        let mut s = ClusterState::monodisperse(1).unwrap();
        let mut rng = rng_from_seed(1);
        assert!(matches!(
            s.step_direct(&mut rng),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn invariants_hold_along_a_run() {
        let n = 400;
        let mut s = ClusterState::monodisperse(n).unwrap();
        let mut rng = rng_from_seed(99);
        assert_eq!(s.largest_cluster(), 1);
        while s.clusters() > 1 {
            let before = s.clusters();
            let e = s.step_direct(&mut rng).unwrap();
            assert_eq!(s.clusters(), before - 1);
            assert_eq!(e.step, n - s.clusters());

            let spectrum = s.cluster_spectrum();
            let mass: usize = spectrum.iter().map(|(size, count)| size * count).sum();
            assert_eq!(mass, n);
            assert_eq!(s.largest_cluster(), *spectrum.keys().next_back().unwrap());

            let mut seen = s.live_roots().to_vec();
            seen.sort_unstable();
            seen.dedup();
            assert_eq!(seen.len(), s.clusters());
            for r in seen {
                assert_eq!(s.find(r), r);
            }
        }
        assert_eq!(s.cluster_spectrum(), BTreeMap::from([(n, 1)]));
        assert_eq!(s.largest_cluster(), n);
    }

    #[test]
    fn final_state_n4() {
        let mut s = ClusterState::monodisperse(4).unwrap();
        let mut rng = rng_from_seed(5);
        for _ in 0..3 {
            s.step_direct(&mut rng).unwrap();
        }
        assert_eq!(s.cluster_spectrum(), BTreeMap::from([(4, 1)]));
    }

    #[test]
    fn n3_second_step_merges_one_and_two() {
        for seed in 0..50 {
            let mut s = ClusterState::monodisperse(3).unwrap();
            let mut rng = rng_from_seed(seed);
            s.step_direct(&mut rng).unwrap();
            let e = s.step_direct(&mut rng).unwrap();
            assert_eq!((e.smaller, e.larger), (1, 2));
        }
    }

    #[test]
    fn merge_roots_rejects_non_roots() {
        let mut s = ClusterState::monodisperse(3).unwrap();
        let kept = s.merge_roots(0, 1).unwrap();
        let other = if kept == 0 { 1 } else { 0 };
        assert!(s.merge_roots(other, 2).is_err());
        assert!(s.merge_roots(kept, kept).is_err());
    }
}
