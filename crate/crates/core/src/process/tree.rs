//! Spanning-tree embedding: a uniform labeled tree (Prüfer decoding), a
//! uniform order on its edges, and vertex 0 as the fixed root. When an edge
//! is inserted, the component holding its bottom vertex (the one closer to
//! the root) is the size-biased pick.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{draw_displacement, DisjointSets, MergeEvent};
use crate::error::{Error, Result};

/// Decodes a Prüfer sequence of length `n - 2` over `0..n` into the edge list
/// of the corresponding labeled tree. Linear time.
pub fn prufer_decode(code: &[usize], n: usize) -> Vec<(usize, usize)> {
    assert!(
        n >= 2 && code.len() == n - 2,
        "Prüfer code must have length n-2"
    );
    let mut degree = vec![1usize; n];
    for &v in code {
        degree[v] += 1;
    }
    let mut ptr = (0..n).find(|&i| degree[i] == 1).expect("a tree has a leaf");
    let mut leaf = ptr;
    let mut edges = Vec::with_capacity(n - 1);
    for &v in code {
        edges.push((leaf, v));
        degree[v] -= 1;
        if degree[v] == 1 && v < ptr {
            leaf = v;
        } else {
            ptr += 1;
            while degree[ptr] != 1 {
                ptr += 1;
            }
            leaf = ptr;
        }
    }
    edges.push((leaf, n - 1));
    edges
}

/// Rewrites every edge as `(bottom, top)` with respect to `root`.
pub fn orient_from_root(n: usize, edges: &[(usize, usize)], root: usize) -> Vec<(usize, usize)> {
    let mut adjacency = vec![Vec::new(); n];
    for &(a, b) in edges {
        adjacency[a].push(b);
        adjacency[b].push(a);
    }
    let mut parent = vec![usize::MAX; n];
    parent[root] = root;
    let mut queue = VecDeque::from([root]);
    while let Some(v) = queue.pop_front() {
        for &w in &adjacency[v] {
            if parent[w] == usize::MAX {
                parent[w] = v;
                queue.push_back(w);
            }
        }
    }
    edges
        .iter()
        .map(|&(a, b)| if parent[b] == a { (a, b) } else { (b, a) })
        .collect()
}

/// Inserts oriented edges in the given order. `extra` supplies the
/// (coin, displacement) pair for each event given the predator size.
pub fn replay_oriented_edges<F, G>(
    n: usize,
    oriented: impl IntoIterator<Item = (usize, usize)>,
    mut extra: G,
    mut sink: F,
) where
    F: FnMut(&MergeEvent),
    G: FnMut(usize) -> (f64, usize),
{
    let mut sets = DisjointSets::new(n);
    for (step, (bottom, top)) in oriented.into_iter().enumerate() {
        let rb = sets.find(bottom);
        let rt = sets.find(top);
        let predator = sets.root_size(rb);
        let prey = sets.root_size(rt);
        let (coin, displacement) = extra(predator);
        sets.link(rb, rt);
        sink(&MergeEvent::new(
            step + 1,
            predator,
            prey,
            coin,
            displacement,
        ));
    }
}

pub fn simulate_spanning_tree_with<R, F>(n: usize, rng: &mut R, sink: F) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&MergeEvent),
{
    if n < 2 {
        return Err(Error::InvalidArgument(
            "spanning-tree embedding needs n >= 2".into(),
        ));
    }
    let code: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    let mut oriented = orient_from_root(n, &prufer_decode(&code, n), 0);
    oriented.shuffle(rng);
    replay_oriented_edges(
        n,
        oriented,
        |predator| {
            let coin: f64 = rng.random();
            (coin, draw_displacement(rng, predator))
        },
        sink,
    );
    Ok(())
}

pub fn simulate_spanning_tree<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<MergeEvent>> {
    let mut events = Vec::with_capacity(n.saturating_sub(1));
    simulate_spanning_tree_with(n, rng, |e| events.push(*e))?;
    Ok(events)
}
