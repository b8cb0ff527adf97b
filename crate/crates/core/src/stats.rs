//! Mergeable summaries and the two goodness-of-fit tests used by the
//! verification suite.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};

/// Count, mean, sum of squared deviations, min and max. Updates use Welford's
/// recurrence; merges use the pairwise (Chan et al.) combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SummaryStats {
    count: u64,
    mean: f64,
    m2: f64,
    min: f64,
    max: f64,
}

impl Default for SummaryStats {
    fn default() -> Self {
        SummaryStats {
            count: 0,
            mean: 0.0,
            m2: 0.0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        }
    }
}

impl SummaryStats {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
        self.min = self.min.min(x);
        self.max = self.max.max(x);
    }

    pub fn merge(&mut self, other: &SummaryStats) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let total = self.count + other.count;
        let delta = other.mean - self.mean;
        let (na, nb, n) = (self.count as f64, other.count as f64, total as f64);
        self.mean += delta * nb / n;
        self.m2 += other.m2 + delta * delta * na * nb / n;
        self.count = total;
        self.min = self.min.min(other.min);
        self.max = self.max.max(other.max);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        if self.count == 0 {
            f64::NAN
        } else {
            self.mean
        }
    }

    pub fn m2(&self) -> f64 {
        self.m2
    }

    pub fn min(&self) -> f64 {
        self.min
    }

    pub fn max(&self) -> f64 {
        self.max
    }

    /// Sample variance `M2 / (count − 1)`.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            f64::NAN
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Standard error of the mean; 0 for a single observation.
    pub fn std_error(&self) -> f64 {
        match self.count {
            0 => f64::NAN,
            1 => 0.0,
            n => (self.variance() / n as f64).sqrt(),
        }
    }

    /// Normal-approximation interval `mean ± z · stderr`.
    pub fn confidence_interval(&self, z: f64) -> (f64, f64) {
        let half = z * self.std_error();
        (self.mean() - half, self.mean() + half)
    }
}

impl FromIterator<f64> for SummaryStats {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = SummaryStats::new();
        for x in iter {
            s.push(x);
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestOutcome {
    pub statistic: f64,
    pub p_value: f64,
    pub level: f64,
    /// Degrees of freedom (chi-square only).
    pub dof: Option<usize>,
}

impl TestOutcome {
    pub fn rejected(&self) -> bool {
        self.p_value < self.level
    }
}

/// Survival function of the Kolmogorov distribution,
/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2 j² λ²}`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    if lambda < 1.18 {
        // small-λ form converges faster: P(K ≤ λ) = √(2π)/λ Σ e^{−(2j−1)²π²/(8λ²)}
        let mut cdf = 0.0;
        for j in 1..=20 {
            let a = (2 * j - 1) as f64 * std::f64::consts::PI / lambda;
            cdf += (-a * a / 8.0).exp();
        }
        cdf *= (2.0 * std::f64::consts::PI).sqrt() / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=100 {
        let jf = j as f64;
        let term = (-2.0 * jf * jf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Two-sample Kolmogorov–Smirnov test with the asymptotic p-value (and the
/// usual small-sample correction to the scaled statistic).
pub fn ks_two_sample(a: &[f64], b: &[f64], level: f64) -> Result<TestOutcome> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidArgument(
            "KS test needs two nonempty samples".into(),
        ));
    }
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len(), ys.len());
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < n && j < m {
        let v = xs[i].min(ys[j]);
        while i < n && xs[i] <= v {
            i += 1;
        }
        while j < m && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let ne = (n * m) as f64 / (n + m) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    Ok(TestOutcome {
        statistic: d,
        p_value: kolmogorov_q(lambda),
        level,
        dof: None,
    })
}

/// Minimum expected count per bin after pooling.
pub const MIN_EXPECTED: f64 = 5.0;

/// Pearson chi-square goodness of fit. Bins with expected count below
/// [`MIN_EXPECTED`] are pooled into their inner neighbour, working in from
/// both tails.
pub fn chi_square_gof(observed: &[u64], expected_probs: &[f64], level: f64) -> Result<TestOutcome> {
    if observed.len() != expected_probs.len() || observed.is_empty() {
        return Err(Error::InvalidArgument(
            "observed and expected must be nonempty and the same length".into(),
        ));
    }
    if expected_probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return Err(Error::InvalidArgument(
            "expected probabilities must be >= 0".into(),
        ));
    }
    let total: u64 = observed.iter().sum();
    let mass: f64 = expected_probs.iter().sum();
    if total == 0 || mass <= 0.0 {
        return Err(Error::InvalidArgument(
            "no observations or no expected mass".into(),
        ));
    }
    let mut bins: Vec<(f64, f64)> = observed
        .iter()
        .zip(expected_probs)
        .map(|(&o, &p)| (o as f64, p / mass * total as f64))
        .collect();

    // right tail inward
    while bins.len() > 1 && bins[bins.len() - 1].1 < MIN_EXPECTED {
        let (o, e) = bins.pop().unwrap();
        let last = bins.last_mut().unwrap();
        last.0 += o;
        last.1 += e;
    }
    // left tail inward
    while bins.len() > 1 && bins[0].1 < MIN_EXPECTED {
        let (o, e) = bins.remove(0);
        bins[0].0 += o;
        bins[0].1 += e;
    }
    // interior stragglers merge rightward
    let mut pooled: Vec<(f64, f64)> = Vec::with_capacity(bins.len());
    let mut carry = (0.0, 0.0);
    for (o, e) in bins {
        carry.0 += o;
        carry.1 += e;
        if carry.1 >= MIN_EXPECTED {
            pooled.push(carry);
            carry = (0.0, 0.0);
        }
    }
    if carry.1 > 0.0 || carry.0 > 0.0 {
        match pooled.last_mut() {
            Some(last) => {
                last.0 += carry.0;
                last.1 += carry.1;
            }
            None => pooled.push(carry),
        }
    }
    if pooled.len() < 2 {
        return Err(Error::DegeneratePooling { bins: pooled.len() });
    }
    let statistic: f64 = pooled.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    let dof = pooled.len() - 1;
    let dist = ChiSquared::new(dof as f64).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok(TestOutcome {
        statistic,
        p_value: dist.sf(statistic),
        level,
        dof: Some(dof),
    })
}

/// Least-squares fit of `y ≈ a + b·x`; returns `(a, b)`.
pub fn linear_fit(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("linear fit needs two points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument(
            "linear fit needs distinct abscissae".into(),
        ));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = sxy / sxx;
    Ok((my - b * mx, b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn welford_basics() {
        let s: SummaryStats = [2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]
            .into_iter()
            .collect();
        assert_eq!(s.count(), 8);
        assert!((s.mean() - 5.0).abs() < 1e-15);
        assert!((s.variance() - 32.0 / 7.0).abs() < 1e-12);
        assert_eq!((s.min(), s.max()), (2.0, 9.0));
        assert!(SummaryStats::new().mean().is_nan());
        let one: SummaryStats = [3.0].into_iter().collect();
        assert_eq!(one.std_error(), 0.0);
    }

    proptest! {
        #[test]
        fn merge_is_order_independent(
            xs in proptest::collection::vec(-1e6f64..1e6, 1..60),
            split in 0usize..60,
            split2 in 0usize..60,
        ) {
            let all: SummaryStats = xs.iter().copied().collect();
            let cut = split.min(xs.len());
            let cut2 = split2.min(xs.len());
            let (lo, hi) = (cut.min(cut2), cut.max(cut2));
            let parts: Vec<SummaryStats> = [&xs[..lo], &xs[lo..hi], &xs[hi..]]
                .iter()
                .map(|p| p.iter().copied().collect())
                .collect();
            let mut fwd = SummaryStats::new();
            for p in &parts { fwd.merge(p); }
            let mut rev = SummaryStats::new();
            for p in parts.iter().rev() { rev.merge(p); }
            for s in [&fwd, &rev] {
                prop_assert_eq!(s.count(), all.count());
                let scale = all.mean().abs().max(1.0);
                prop_assert!((s.mean() - all.mean()).abs() <= 1e-12 * scale * 1e3);
                if all.count() > 1 {
                    let v = all.variance().max(1e-300);
                    prop_assert!(((s.variance() - all.variance()) / v).abs() < 1e-9
                        || (s.variance() - all.variance()).abs() < 1e-6);
                }
                prop_assert_eq!(s.min(), all.min());
                prop_assert_eq!(s.max(), all.max());
            }
        }
    }

    #[test]
    fn ks_identical_and_shuffled() {
        let a: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let out = ks_two_sample(&a, &a, 0.05).unwrap();
        assert_eq!(out.statistic, 0.0);
        assert!(!out.rejected());
        let mut b = a.clone();
        b.reverse();
        b.swap(3, 70);
        assert_eq!(ks_two_sample(&a, &b, 0.05).unwrap().statistic, 0.0);
        assert!(ks_two_sample(&[], &a, 0.05).is_err());
    }

    #[test]
    fn ks_detects_shift() {
        let a: Vec<f64> = (0..500).map(|i| i as f64 / 500.0).collect();
        let b: Vec<f64> = (150..650).map(|i| i as f64 / 500.0).collect();
        let out = ks_two_sample(&a, &b, 0.001).unwrap();
        assert!((out.statistic - 0.3).abs() < 1e-9);
        assert!(out.rejected());
    }

    #[test]
    fn kolmogorov_reference_points() {
        // classic critical values: Q(1.36) ≈ 0.05, Q(1.63) ≈ 0.01, Q(1.95) ≈ 0.001
        assert!((kolmogorov_q(1.358) - 0.05).abs() < 1e-3);
        assert!((kolmogorov_q(1.628) - 0.01).abs() < 5e-4);
        assert!((kolmogorov_q(1.949) - 0.001).abs() < 1e-4);
        // both branches agree at the switch
        let below = kolmogorov_q(1.18 - 1e-12);
        let above = kolmogorov_q(1.18);
        assert!((below - above).abs() < 1e-10);
    }

    #[test]
    fn chi_square_proportional_is_zero() {
        let out = chi_square_gof(&[10, 20, 30, 40], &[0.1, 0.2, 0.3, 0.4], 0.01).unwrap();
        assert!(out.statistic.abs() < 1e-12);
        assert_eq!(out.dof, Some(3));
        assert!((out.p_value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chi_square_pools_tails() {
        let out = chi_square_gof(&[1, 50, 48, 1], &[0.01, 0.49, 0.49, 0.01], 0.01).unwrap();
        assert_eq!(out.dof, Some(1));
        assert!(matches!(
            chi_square_gof(&[3, 2], &[0.5, 0.5], 0.01),
            Err(Error::DegeneratePooling { .. })
        ));
    }

    #[test]
    fn chi_square_rejects_wrong_law() {
        let out = chi_square_gof(&[700, 300], &[0.5, 0.5], 0.01).unwrap();
        assert!(out.rejected());
    }

    #[test]
    fn line_fit() {
        let (a, b) = linear_fit(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
        assert!(linear_fit(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }
}
