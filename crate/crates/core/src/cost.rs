//! Cost functionals and cumulative cost traces.
//!
//! Every functional maps a [`MergeEvent`] to an integer cost. Traces keep the
//! running sum in a `u128` and record it at a fixed grid of checkpoints:
//! step `⌈αn⌉` for each α, and step `⌊n − β√n⌋` for each β.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::process::MergeEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Functional {
    /// Quick-Find: relabel an arbitrary side, `s` or `S` on a fair coin.
    QuickFind,
    /// Quick-Find-Weighted: relabel the smaller side.
    QuickFindWeighted,
    /// Quick-Find-Biased: relabel the uniformly picked side, `R`.
    QuickFindBiased,
    /// Size of the uniformly picked cluster, `R`.
    Prey,
    /// Size of the size-biased cluster, `L`.
    Predator,
    /// `D`, uniform on `0..L`.
    Displacement,
}

impl Functional {
    pub const ALL: [Functional; 6] = [
        Functional::QuickFind,
        Functional::QuickFindWeighted,
        Functional::QuickFindBiased,
        Functional::Prey,
        Functional::Predator,
        Functional::Displacement,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Functional::QuickFind => "qf",
            Functional::QuickFindWeighted => "qfw",
            Functional::QuickFindBiased => "qfb",
            Functional::Prey => "prey",
            Functional::Predator => "predator",
            Functional::Displacement => "displacement",
        }
    }

    pub fn index(self) -> usize {
        Functional::ALL.iter().position(|&f| f == self).unwrap()
    }

    /// Realized cost of one event.
    pub fn instantaneous_cost(self, event: &MergeEvent) -> u64 {
        let v = match self {
            Functional::QuickFind => {
                if event.coin < 0.5 {
                    event.smaller
                } else {
                    event.larger
                }
            }
            Functional::QuickFindWeighted => event.smaller,
            Functional::QuickFindBiased | Functional::Prey => event.prey,
            Functional::Predator => event.predator,
            Functional::Displacement => event.displacement,
        };
        v as u64
    }

    /// Conditional mean cost given the merged sizes `{x, y}`, as an exact
    /// fraction `(numerator, denominator)`.
    pub fn conditional_mean_ratio(self, x: u64, y: u64) -> (u64, u64) {
        match self {
            Functional::QuickFind => (x + y, 2),
            Functional::QuickFindWeighted => (x.min(y), 1),
            Functional::QuickFindBiased | Functional::Prey => (2 * x * y, x + y),
            Functional::Predator => (x * x + y * y, x + y),
            // E[L] / 2 - 1/2 for D uniform on 0..L
            Functional::Displacement => (x * x + y * y - x - y, 2 * (x + y)),
        }
    }
}

impl fmt::Display for Functional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Functional {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        Functional::ALL
            .into_iter()
            .find(|f| f.tag() == lower)
            .or(match lower.as_str() {
                "quickfind" | "quick-find" => Some(Functional::QuickFind),
                "quickfindweighted" | "quick-find-weighted" => Some(Functional::QuickFindWeighted),
                "quickfindbiased" | "quick-find-biased" => Some(Functional::QuickFindBiased),
                "d" => Some(Functional::Displacement),
                _ => None,
            })
            .ok_or_else(|| Error::InvalidArgument(format!("unknown functional '{s}'")))
    }
}

/// Declared growth `c(x, y) <= coeff · x^p · y^q` of a conditional cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolyBound {
    pub coeff: f64,
    pub p: u32,
    pub q: u32,
}

impl PolyBound {
    pub fn degree(&self) -> u32 {
        self.p.max(self.q)
    }
}

/// A conditional cost `c(x, y)`, symmetric in its arguments.
///
/// `kernel_sum` evaluates `Σ_k Σ_l c(k,l)·(k+l)/2·w_k·w_l` where `w[i]` is the
/// weight of size `i + 1`. The default is the plain double loop; the built-in
/// functionals override it with moment or prefix-sum forms.
pub trait ConditionalCost: Sync {
    fn mean(&self, x: usize, y: usize) -> f64;

    fn growth(&self) -> PolyBound;

    fn kernel_sum(&self, w: &[f64]) -> f64 {
        let mut total = 0.0;
        for (i, &wi) in w.iter().enumerate() {
            if wi == 0.0 {
                continue;
            }
            let k = i + 1;
            let mut row = 0.0;
            for (j, &wj) in w.iter().enumerate() {
                let l = j + 1;
                row += self.mean(k, l) * (k + l) as f64 * 0.5 * wj;
            }
            total += wi * row;
        }
        total
    }
}

fn truncated_moments(w: &[f64]) -> [f64; 3] {
    let mut m = [0.0; 3];
    for (i, &wi) in w.iter().enumerate() {
        let k = (i + 1) as f64;
        m[0] += wi;
        m[1] += k * wi;
        m[2] += k * k * wi;
    }
    m
}

impl ConditionalCost for Functional {
    fn mean(&self, x: usize, y: usize) -> f64 {
        let (num, den) = self.conditional_mean_ratio(x as u64, y as u64);
        num as f64 / den as f64
    }

    fn growth(&self) -> PolyBound {
        match self {
            Functional::QuickFindBiased | Functional::Prey => PolyBound {
                coeff: 2.0,
                p: 1,
                q: 0,
            },
            _ => PolyBound {
                coeff: 1.0,
                p: 1,
                q: 1,
            },
        }
    }

    fn kernel_sum(&self, w: &[f64]) -> f64 {
        let [m0, m1, m2] = truncated_moments(w);
        match self {
            Functional::QuickFind => 0.5 * (m2 * m0 + m1 * m1),
            Functional::QuickFindBiased | Functional::Prey => m1 * m1,
            Functional::Predator => m2 * m0,
            Functional::Displacement => 0.5 * (m2 * m0 - m1 * m0),
            Functional::QuickFindWeighted => MinCost.kernel_sum(w),
        }
    }
}

/// `c(x, y) = min(x, y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MinCost;

/// `c(x, y) = max(x, y)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct MaxCost;

/// `Σ_k Σ_l c(k,l)·(k+l)/2·w_k·w_l` for `c = min` or `c = max`, in one pass
/// with prefix sums over the smaller index.
fn ordered_pair_sum(w: &[f64], pick_smaller: bool) -> f64 {
    // prefix sums of w_l, l*w_l, l^2*w_l over l < k
    let (mut p0, mut p1, mut p2) = (0.0, 0.0, 0.0);
    let mut total = 0.0;
    for (i, &wk) in w.iter().enumerate() {
        let k = (i + 1) as f64;
        // pairs (k, l), l < k, counted twice for (l, k)
        let cross = if pick_smaller {
            // min = l: l(k+l)/2
            0.5 * (k * p1 + p2)
        } else {
            // max = k: k(k+l)/2
            0.5 * (k * k * p0 + k * p1)
        };
        total += 2.0 * wk * cross + wk * wk * k * k;
        p0 += wk;
        p1 += k * wk;
        p2 += k * k * wk;
    }
    total
}

impl ConditionalCost for MinCost {
    fn mean(&self, x: usize, y: usize) -> f64 {
        x.min(y) as f64
    }

    fn growth(&self) -> PolyBound {
        PolyBound {
            coeff: 1.0,
            p: 1,
            q: 0,
        }
    }

    fn kernel_sum(&self, w: &[f64]) -> f64 {
        ordered_pair_sum(w, true)
    }
}

impl ConditionalCost for MaxCost {
    fn mean(&self, x: usize, y: usize) -> f64 {
        x.max(y) as f64
    }

    fn growth(&self) -> PolyBound {
        PolyBound {
            coeff: 1.0,
            p: 1,
            q: 1,
        }
    }

    fn kernel_sum(&self, w: &[f64]) -> f64 {
        ordered_pair_sum(w, false)
    }
}

/// User-supplied conditional cost with a declared growth bound.
pub struct FnCost<F> {
    pub f: F,
    pub bound: PolyBound,
}

impl<F: Fn(usize, usize) -> f64 + Sync> ConditionalCost for FnCost<F> {
    fn mean(&self, x: usize, y: usize) -> f64 {
        (self.f)(x, y)
    }

    fn growth(&self) -> PolyBound {
        self.bound
    }
}

/// Which checkpoints a trace records.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointGrid {
    pub alphas: Vec<f64>,
    pub betas: Vec<f64>,
}

impl Default for CheckpointGrid {
    fn default() -> Self {
        CheckpointGrid {
            alphas: (1..=19).map(|i| i as f64 * 0.05).collect(),
            betas: (0..=16).map(|i| i as f64 * 0.25).collect(),
        }
    }
}

impl CheckpointGrid {
    pub fn validate(&self) -> Result<()> {
        if let Some(a) = self.alphas.iter().find(|a| !(0.0..1.0).contains(*a)) {
            return Err(Error::InvalidArgument(format!("alpha {a} outside [0, 1)")));
        }
        if let Some(b) = self.betas.iter().find(|b| !b.is_finite() || **b < 0.0) {
            return Err(Error::InvalidArgument(format!("beta {b} must be >= 0")));
        }
        Ok(())
    }

    /// `⌈αn⌉`, clamped to the last merge.
    pub fn alpha_step(alpha: f64, n: usize) -> usize {
        let x = alpha * n as f64;
        let r = x.round();
        let step = if (x - r).abs() <= 1e-9 * (n as f64).max(1.0) {
            r
        } else {
            x.ceil()
        };
        (step.max(0.0) as usize).min(n.saturating_sub(1))
    }

    /// `⌊n − β√n⌋`, clamped to `0..=n-1`.
    pub fn beta_step(beta: f64, n: usize) -> usize {
        let x = n as f64 - beta * (n as f64).sqrt();
        if x <= 0.0 {
            0
        } else {
            (x.floor() as usize).min(n.saturating_sub(1))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub at: f64,
    pub step: usize,
    pub value: Option<u128>,
}

/// Cumulative cost of one functional along one coalescence.
#[derive(Debug, Clone)]
pub struct CostTrace {
    functional: Functional,
    n: usize,
    steps: usize,
    cumulative: u128,
    alpha: Vec<Checkpoint>,
    beta: Vec<Checkpoint>,
    /// (step, is_beta, index), sorted by step; `cursor` points at the first
    /// entry not yet recorded.
    schedule: Vec<(usize, bool, usize)>,
    cursor: usize,
}

impl CostTrace {
    pub fn new(functional: Functional, n: usize, grid: &CheckpointGrid) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be at least 1".into()));
        }
        grid.validate()?;
        let alpha: Vec<Checkpoint> = grid
            .alphas
            .iter()
            .map(|&a| Checkpoint {
                at: a,
                step: CheckpointGrid::alpha_step(a, n),
                value: None,
            })
            .collect();
        let beta: Vec<Checkpoint> = grid
            .betas
            .iter()
            .map(|&b| Checkpoint {
                at: b,
                step: CheckpointGrid::beta_step(b, n),
                value: None,
            })
            .collect();
        let mut schedule: Vec<(usize, bool, usize)> = alpha
            .iter()
            .enumerate()
            .map(|(i, c)| (c.step, false, i))
            .chain(beta.iter().enumerate().map(|(i, c)| (c.step, true, i)))
            .collect();
        schedule.sort_unstable();
        let mut trace = CostTrace {
            functional,
            n,
            steps: 0,
            cumulative: 0,
            alpha,
            beta,
            schedule,
            cursor: 0,
        };
        trace.record_due();
        Ok(trace)
    }

    fn record_due(&mut self) {
        while let Some(&(step, is_beta, i)) = self.schedule.get(self.cursor) {
            if step != self.steps {
                break;
            }
            let slot = if is_beta {
                &mut self.beta[i]
            } else {
                &mut self.alpha[i]
            };
            slot.value = Some(self.cumulative);
            self.cursor += 1;
        }
    }

    pub fn functional(&self) -> Functional {
        self.functional
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn cumulative(&self) -> u128 {
        self.cumulative
    }

    pub fn is_complete(&self) -> bool {
        self.steps + 1 == self.n
    }

    pub fn accumulate(&mut self, event: &MergeEvent) -> Result<()> {
        if event.step != self.steps + 1 || event.step >= self.n {
            return Err(Error::OutOfOrder {
                expected: self.steps + 1,
                got: event.step,
            });
        }
        self.cumulative += u128::from(self.functional.instantaneous_cost(event));
        self.steps = event.step;
        self.record_due();
        Ok(())
    }

    fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::IncompleteTrace {
                n: self.n,
                steps: self.steps,
            })
        }
    }

    /// `C_{n,n-1}`.
    pub fn total(&self) -> Result<u128> {
        self.require_complete()?;
        Ok(self.cumulative)
    }

    pub fn alpha_checkpoints(&self) -> &[Checkpoint] {
        &self.alpha
    }

    pub fn beta_checkpoints(&self) -> &[Checkpoint] {
        &self.beta
    }

    /// `(α, C_{n,⌈αn⌉} / n)` over the α-grid.
    pub fn partial_cost_curve(&self) -> Result<Vec<(f64, f64)>> {
        self.require_complete()?;
        let n = self.n as f64;
        Ok(self
            .alpha
            .iter()
            .map(|c| (c.at, c.value.unwrap_or(0) as f64 / n))
            .collect())
    }

    /// `(β, n^{-3/2} C_{n,⌊n−β√n⌋})` over the β-grid.
    pub fn w_curve(&self) -> Result<Vec<(f64, f64)>> {
        self.require_complete()?;
        let scale = (self.n as f64).powf(1.5);
        Ok(self
            .beta
            .iter()
            .map(|c| (c.at, c.value.unwrap_or(0) as f64 / scale))
            .collect())
    }
}

/// Traces for several functionals fed by one event stream.
#[derive(Debug, Clone)]
pub struct TraceSet {
    traces: Vec<CostTrace>,
}

impl TraceSet {
    pub fn new(functionals: &[Functional], n: usize, grid: &CheckpointGrid) -> Result<Self> {
        let traces = functionals
            .iter()
            .map(|&f| CostTrace::new(f, n, grid))
            .collect::<Result<Vec<_>>>()?;
        Ok(TraceSet { traces })
    }

    pub fn accumulate(&mut self, event: &MergeEvent) -> Result<()> {
        for t in &mut self.traces {
            t.accumulate(event)?;
        }
        Ok(())
    }

    pub fn traces(&self) -> &[CostTrace] {
        &self.traces
    }

    pub fn get(&self, functional: Functional) -> Option<&CostTrace> {
        self.traces.iter().find(|t| t.functional == functional)
    }
}
