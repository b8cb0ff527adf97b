/// One coalescence: the sizes that merged at `step`, which side was the
/// size-biased pick, and the auxiliary randomness the cost functionals use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MergeEvent {
    /// 1-based merge index.
    pub step: usize,
    pub smaller: usize,
    pub larger: usize,
    /// Size of the size-biased pick (`L`).
    pub predator: usize,
    /// Size of the complementary cluster (`R = s + S - L`).
    pub prey: usize,
    /// Uniform in [0, 1); drives the Quick-Find coin.
    pub coin: f64,
    /// In `0..predator`.
    pub displacement: usize,
}

impl MergeEvent {
    pub fn new(step: usize, predator: usize, prey: usize, coin: f64, displacement: usize) -> Self {
        debug_assert!(predator >= 1 && prey >= 1);
        debug_assert!(displacement < predator);
        MergeEvent {
            step,
            smaller: predator.min(prey),
            larger: predator.max(prey),
            predator,
            prey,
            coin,
            displacement,
        }
    }

    pub fn merged_size(&self) -> usize {
        self.smaller + self.larger
    }
}
