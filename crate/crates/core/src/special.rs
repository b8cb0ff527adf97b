//! Log-space helpers for the tree-count terms `k^{k-1}/(k-1)!` that appear in
//! the Smoluchowski solution, the Borel law and the predator-size formula.

use std::f64::consts::PI;

/// Below this the exact sum of logs is used instead of Stirling's series.
const SERIES_FROM: u64 = 12;

/// `ln(k^{k-1}/(k-1)!) - k`, stable for large `k` (the `k` cancels exactly).
pub(crate) fn ln_tree_count_minus_k(k: u64) -> f64 {
    debug_assert!(k >= 1);
    if k < SERIES_FROM {
        let kf = k as f64;
        let ln_fact: f64 = (2..k).map(|i| (i as f64).ln()).sum();
        (kf - 1.0) * kf.ln() - ln_fact - kf
    } else {
        let kf = k as f64;
        -0.5 * (2.0 * PI * kf).ln() - stirling_tail(kf)
    }
}

/// `ln Γ(x) - [(x - 1/2) ln x - x + ln(2π)/2]`.
fn stirling_tail(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    inv * (1.0 / 12.0
        - inv2
            * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 * (1.0 / 1188.0)))))
}

/// `ln(1 - y) + y` for `y` in [0, 1).
pub(crate) fn ln1m_plus(y: f64) -> f64 {
    if y < 0.05 {
        // -(y^2/2 + y^3/3 + ...); 20 terms reach 1e-26 relative at y = 0.05
        let mut term = y * y;
        let mut sum = 0.0;
        for j in 2..22 {
            sum += term / j as f64;
            term *= y;
        }
        -sum
    } else {
        (-y).ln_1p() + y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::function::gamma::ln_gamma;

    #[test]
    fn tree_count_matches_direct_form() {
        for k in 1..200u64 {
            let kf = k as f64;
            let direct = (kf - 1.0) * kf.ln() - ln_gamma(kf) - kf;
            let ours = ln_tree_count_minus_k(k);
            assert!(
                (direct - ours).abs() < 1e-11 * kf.max(1.0),
                "k={k}: {direct} vs {ours}"
            );
        }
        // continuity across the switch point
        let a = ln_tree_count_minus_k(SERIES_FROM - 1);
        let b = ln_tree_count_minus_k(SERIES_FROM);
        assert!((a - b).abs() < 0.1);
    }

    #[test]
    fn series_switch_is_seamless() {
        for k in [SERIES_FROM, SERIES_FROM + 1, 30] {
            let kf = k as f64;
            let ln_fact: f64 = (2..k).map(|i| (i as f64).ln()).sum();
            let exact = (kf - 1.0) * kf.ln() - ln_fact - kf;
            assert!((exact - ln_tree_count_minus_k(k)).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn ln1m_plus_matches() {
        for y in [1e-8f64, 1e-3, 0.01, 0.049, 0.05, 0.3, 0.9] {
            let want = (-y).ln_1p() + y;
            let got = ln1m_plus(y);
            assert!(
                (got - want).abs() <= 1e-15 + 1e-12 * want.abs(),
                "{y}: {got} {want}"
            );
        }
    }
}
