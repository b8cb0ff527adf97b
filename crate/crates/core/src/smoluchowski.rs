//! The additive Smoluchowski solution
//!
//! ```text
//! q(k, t) = (1/k) · [k(1 − e^{−t})]^{k−1} / (k−1)! · exp(−t − k(1 − e^{−t}))
//! ```
//!
//! and the deterministic partial-cost curves built on it,
//!
//! ```text
//! φ^c(α) = ∫_0^{−log(1−α)} Σ_k Σ_l c(k,l) · (k+l)/2 · q(k,t) q(l,t) dt.
//! ```
//!
//! The `(k+l)/2` factor is the merge rate of a `(k, l)` pair per unit mass
//! once the step index is mapped to time by `t = −log(1 − α)`. All curves are
//! normalized so that `φ(0) = 0`.

use crate::cost::{ConditionalCost, Functional};
use crate::error::{Error, Result};
use statrs::function::factorial::ln_factorial;

use crate::special::{ln1m_plus, ln_tree_count_minus_k};

/// Residual first-moment mass allowed when truncating size sums.
pub const MASS_TAIL: f64 = 1e-10;

/// Hard cap on truncation points; reached only for t far beyond any α < 1 - 1e-6.
const MAX_TRUNCATION: usize = 50_000_000;

/// `ln q(k, t)`; `-inf` where `q` vanishes.
pub fn ln_q(k: u64, t: f64) -> f64 {
    assert!(k >= 1, "cluster sizes start at 1");
    assert!(t >= 0.0, "time must be nonnegative");
    if t == 0.0 {
        return if k == 1 { 0.0 } else { f64::NEG_INFINITY };
    }
    let y = (-t).exp();
    let ln_x = (-y).ln_1p();
    let kf = k as f64;
    ln_tree_count_minus_k(k) - kf.ln() + kf * ln1m_plus(y) - ln_x - t
}

pub fn q(k: u64, t: f64) -> f64 {
    ln_q(k, t).exp()
}

/// Closed-form moments `Σ_k k^p q(k, t)` for `p ∈ {0, 1, 2}`.
pub fn moment(t: f64, p: u32) -> Result<f64> {
    if t < 0.0 {
        return Err(Error::InvalidArgument(format!("t = {t} < 0")));
    }
    match p {
        0 => Ok((-t).exp()),
        1 => Ok(1.0),
        2 => Ok((2.0 * t).exp()),
        _ => Err(Error::InvalidArgument(format!(
            "moment order {p} not in {{0, 1, 2}}"
        ))),
    }
}

/// Smallest `K` such that `Σ_{k>K} k^degree q(k,t) < tol`, certified by a
/// ratio-test majorization of the tail, and such that the residual unit
/// mass `1 − Σ_{k≤K} k q(k,t)` is below [`MASS_TAIL`].
pub fn truncation_point(t: f64, degree: u32, tol: f64) -> usize {
    if t == 0.0 {
        return 1;
    }
    let x = -(-t).exp_m1();
    // limiting ratio q(k+1)/q(k) -> x e^{1-x}
    let rho = x * (1.0 - x).exp();
    let mut mass = 0.0;
    let mut prev = 0.0;
    let mut k = 1usize;
    loop {
        let kf = k as f64;
        let qk = q(k as u64, t);
        mass += kf * qk;
        let term = kf.powi(degree as i32) * qk;
        if k > 1 && prev > 0.0 {
            let ratio = (term / prev).max(rho);
            if ratio < 1.0 && term < prev {
                let tail = term * ratio / (1.0 - ratio);
                if tail < tol && 1.0 - mass < MASS_TAIL {
                    return k;
                }
            }
        }
        if term == 0.0 && k > 1 || k >= MAX_TRUNCATION {
            return k;
        }
        prev = term;
        k += 1;
    }
}

/// `q(1..=K, t)` for the truncation point at the given tail degree.
pub fn spectrum_weights(t: f64, degree: u32, tol: f64) -> Vec<f64> {
    let k_max = truncation_point(t, degree, tol);
    (1..=k_max as u64).map(|k| q(k, t)).collect()
}

/// `Σ_{k≤K} k^p q(k, t)` with `K` adapted so the neglected tail is below `tol`.
pub fn truncated_moment(t: f64, p: u32, tol: f64) -> f64 {
    spectrum_weights(t, p, tol)
        .iter()
        .enumerate()
        .map(|(i, &w)| ((i + 1) as f64).powi(p as i32) * w)
        .sum()
}

/// Right-hand side of the Smoluchowski system at `(k, t)`:
/// `½ Σ_{j<k} k q(j) q(k−j) − q(k) Σ_j (j+k) q(j)`, the `j` sum truncated so
/// its tail is below `tail_tol`.
pub fn smoluchowski_rhs(k: u64, t: f64, tail_tol: f64) -> f64 {
    let kf = k as f64;
    let gain: f64 = (1..k).map(|j| kf * q(j, t) * q(k - j, t)).sum::<f64>() * 0.5;
    let weights = spectrum_weights(t, 1, tail_tol);
    let loss: f64 = weights
        .iter()
        .enumerate()
        .map(|(i, &w)| ((i + 1) as f64 + kf) * w)
        .sum();
    gain - q(k, t) * loss
}

pub fn alpha_to_time(alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside [0, 1)"
        )));
    }
    Ok(-(-alpha).ln_1p())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// |S_{2N} − S_N| at the accepted refinement.
    pub error_estimate: f64,
    pub panels: usize,
}

pub const INITIAL_PANELS: usize = 64;
pub const MAX_PANELS: usize = 1 << 16;
pub const DEFAULT_TOL: f64 = 1e-8;

/// Integrand `t ↦ Σ_k Σ_l c(k,l)·(k+l)/2·q(k,t)q(l,t)`.
pub fn phi_integrand(c: &dyn ConditionalCost, t: f64) -> f64 {
    let degree = c.growth().degree() + 1;
    let w = spectrum_weights(t, degree, MASS_TAIL);
    c.kernel_sum(&w)
}

/// `φ^c(α)` by composite Simpson with panel doubling.
pub fn phi_quadrature(c: &dyn ConditionalCost, alpha: f64, tol: f64) -> Result<Quadrature> {
    if tol <= 0.0 || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "tolerance {tol} must be > 0"
        )));
    }
    let horizon = alpha_to_time(alpha)?;
    if horizon == 0.0 {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            panels: 0,
        });
    }
    let f = |t: f64| phi_integrand(c, t);

    let mut panels = INITIAL_PANELS;
    let mut h = horizon / panels as f64;
    let ends = f(0.0) + f(horizon);
    let mut odd: f64 = (0..panels / 2).map(|i| f((2 * i + 1) as f64 * h)).sum();
    let mut even: f64 = (1..panels / 2).map(|i| f((2 * i) as f64 * h)).sum();
    let mut estimate = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
    let mut last_change = f64::INFINITY;

    while panels < MAX_PANELS {
        panels *= 2;
        h /= 2.0;
        even += odd;
        odd = (0..panels / 2).map(|i| f((2 * i + 1) as f64 * h)).sum();
        let refined = h / 3.0 * (ends + 4.0 * odd + 2.0 * even);
        last_change = (refined - estimate).abs();
        estimate = refined;
        if last_change < tol {
            return Ok(Quadrature {
                value: estimate,
                error_estimate: last_change,
                panels,
            });
        }
    }
    Err(Error::QuadratureDiverged {
        tol,
        panels,
        last_change,
    })
}

/// Closed-form `φ(α)` (normalized so `φ(0) = 0`).
pub fn phi_closed_form(functional: Functional, alpha: f64) -> Result<f64> {
    let t = alpha_to_time(alpha)?;
    let ratio = alpha / (1.0 - alpha);
    match functional {
        Functional::QuickFind => Ok(0.5 * ratio + 0.5 * t),
        Functional::Prey | Functional::QuickFindBiased => Ok(t),
        Functional::Predator => Ok(ratio),
        // D uniform on 0..L: E[D | x, y] = E[L | x, y]/2 − 1/2
        Functional::Displacement => Ok(0.5 * ratio - 0.5 * alpha),
        Functional::QuickFindWeighted => Err(Error::NoClosedForm("qfw")),
    }
}

/// The tabulated curve without the `φ(0) = 0` normalization, where one is
/// tabulated. Differs from [`phi_closed_form`] by a constant for QF and the
/// predator size, and by the displacement convention for `D`.
pub fn phi_reference_table(functional: Functional, alpha: f64) -> Result<Option<f64>> {
    let t = alpha_to_time(alpha)?;
    let inv = 1.0 / (1.0 - alpha);
    Ok(match functional {
        Functional::QuickFind => Some(0.5 * (inv + t)),
        Functional::Prey => Some(t),
        Functional::Predator => Some(inv),
        Functional::Displacement => Some(0.5 * inv),
        Functional::QuickFindBiased | Functional::QuickFindWeighted => None,
    })
}

/// `(α, φ(α))` pairs for one conditional cost.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitCurve {
    pub label: String,
    pub points: Vec<(f64, Quadrature)>,
    pub tol: f64,
}

pub fn limit_curve(
    label: impl Into<String>,
    c: &dyn ConditionalCost,
    alphas: &[f64],
    tol: f64,
) -> Result<LimitCurve> {
    let points = alphas
        .iter()
        .map(|&a| phi_quadrature(c, a, tol).map(|q| (a, q)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LimitCurve {
        label: label.into(),
        points,
        tol,
    })
}

/// Asymptotic probability that the first parked car sits in a size-`k`
/// cluster after `⌈αn⌉` arrivals:
/// `(1−α) α^{k−2} k^{k−2}/(k−2)! e^{−αk}`. Zero for `k = 1` (the first car
/// is parked, so its cluster has at least two places).
pub fn tagged_size_prob(k: u64, alpha: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha = {alpha} outside [0, 1)"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    if k == 1 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let mut ln = (-alpha).ln_1p() - alpha * kf;
    if k > 2 {
        let m = (k - 2) as f64;
        ln += m * alpha.ln() + m * kf.ln() - ln_factorial(k - 2);
    }
    Ok(ln.exp())
}

/// Same probability through the Smoluchowski solution:
/// `(k−1)/α · q(k, −log(1−α))`.
pub fn tagged_size_prob_via_q(k: u64, alpha: f64) -> Result<f64> {
    let t = alpha_to_time(alpha)?;
    if alpha == 0.0 {
        return Err(Error::InvalidArgument("alpha must be > 0".into()));
    }
    Ok((k as f64 - 1.0) / alpha * q(k, t))
}
