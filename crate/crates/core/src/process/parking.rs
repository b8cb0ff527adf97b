//! Parking embedding: `n` places on a circle, `n - 1` cars with uniform first
//! tries probing clockwise. A block is an empty place together with the run
//! of occupied places just before it; its size counts the empty place.
//!
//! When a car fills the empty place `e`, the block that ended at `e` (the
//! predator, it contains the first try) merges with the block ending at the
//! next empty place clockwise (the prey). The displacement is the probe
//! distance from the first try to `e`.

use rand::Rng;

use super::MergeEvent;
use crate::error::{Error, Result};

/// Next-empty-place pointers on the circle, compressed by path halving.
struct EmptyFinder {
    next: Vec<usize>,
}

impl EmptyFinder {
    fn new(n: usize) -> Self {
        EmptyFinder {
            next: (0..n).collect(),
        }
    }

    /// First empty place at or after `place`, going clockwise.
    fn find(&mut self, mut place: usize) -> usize {
        while self.next[place] != place {
            let hop = self.next[self.next[place]];
            self.next[place] = hop;
            place = hop;
        }
        place
    }

    fn occupy(&mut self, place: usize) {
        self.next[place] = (place + 1) % self.next.len();
    }
}

pub fn simulate_parking_with<R, F>(n: usize, rng: &mut R, mut sink: F) -> Result<()>
where
    R: Rng + ?Sized,
    F: FnMut(&MergeEvent),
{
    if n < 2 {
        return Err(Error::InvalidArgument(
            "parking embedding needs n >= 2".into(),
        ));
    }
    let mut empty = EmptyFinder::new(n);
    // block size indexed by the empty place that closes the block
    let mut block = vec![1usize; n];
    for step in 1..n {
        let first_try = rng.random_range(0..n);
        let filled = empty.find(first_try);
        let displacement = (filled + n - first_try) % n;
        empty.occupy(filled);
        let next_empty = empty.find((filled + 1) % n);
        let predator = block[filled];
        let prey = block[next_empty];
        block[next_empty] += predator;
        let coin: f64 = rng.random();
        sink(&MergeEvent::new(step, predator, prey, coin, displacement));
    }
    Ok(())
}

pub fn simulate_parking<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Vec<MergeEvent>> {
    let mut events = Vec::with_capacity(n.saturating_sub(1));
    simulate_parking_with(n, rng, |e| events.push(*e))?;
    Ok(events)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn total_displacement_scale() {
        // E[D_n] ~ sqrt(pi/8) n^{3/2} for a full table minus one slot
        let n = 20_000;
        let mut rng = rng_from_seed(17);
        let mut sum = 0.0;
        let reps = 40;
        for _ in 0..reps {
            let d: usize = simulate_parking(n, &mut rng)
                .unwrap()
                .iter()
                .map(|e| e.displacement)
                .sum();
            sum += d as f64 / (n as f64).powf(1.5);
        }
        let mean = sum / reps as f64;
        assert!(
            (mean - (std::f64::consts::PI / 8.0).sqrt()).abs() < 0.1,
            "{mean}"
        );
    }

    #[test]
    fn rejects_n_below_two() {
        assert!(simulate_parking(1, &mut rng_from_seed(0)).is_err());
    }
}
