//! The acceptance suite. Each criterion runs at a fixed seed and reports the
//! measured value next to its target and tolerance. Monte Carlo criteria are
//! probabilistic: at the stated levels a correct implementation fails a
//! given seed with probability about 0.1% (KS) or 1% (chi-square).

use std::time::Instant;

use num_traits::{One, Zero};

use crate::cli::{cmd_simulate, Format, RunConfig};
use crate::cost::{CheckpointGrid, Functional, MaxCost, MinCost};
use crate::error::{Error, Result};
use crate::exact::{self, ratio, Ratio};
use crate::experiment::{
    fit_inverse_log, regime_sweep, run_monte_carlo, run_replications, ExperimentSpec,
};
use crate::process::EmbeddingKind;
use crate::smoluchowski::{
    moment, phi_closed_form, phi_quadrature, q, smoluchowski_rhs, truncated_moment,
};
use crate::stats::{chi_square_gof, ks_two_sample, SummaryStats};

/// √(π/8), the mean Brownian excursion area.
pub const EXCURSION_AREA_MEAN: f64 = 0.626_657_068_657_750_1;

#[derive(Debug, Clone, Default)]
pub struct VerifyOptions {
    /// Criterion ids to run; empty runs all.
    pub only: Vec<String>,
    /// Replace `p_mk` by a perturbed law in the chi-square check.
    pub mutate: bool,
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: &'static str,
    pub title: &'static str,
    /// Informative only; never fails the suite.
    pub conjecture: bool,
    pub passed: bool,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn status(&self) -> &'static str {
        match (self.conjecture, self.passed) {
            (false, true) => "pass",
            (false, false) => "fail",
            (true, true) => "informative-pass",
            (true, false) => "informative-fail",
        }
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:<22} measured={:.6e} target={:.6e} tol={:.3e} ({:.1}s) {}",
            self.status().to_uppercase(),
            self.id,
            self.measured,
            self.target,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

struct Measured {
    passed: bool,
    measured: f64,
    target: f64,
    tolerance: f64,
    detail: String,
}

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub conjecture: bool,
    run: fn(&VerifyOptions) -> Result<Measured>,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        id: "oracle-equivalence",
        title: "three embeddings give the same sequence law",
        conjecture: false,
        run: oracle_equivalence,
    },
    Criterion {
        id: "pmk-exact",
        title: "final predator law equals p_mk",
        conjecture: false,
        run: pmk_exact,
    },
    Criterion {
        id: "borel-limit",
        title: "final prey size tends to Borel(1)",
        conjecture: false,
        run: borel_limit,
    },
    Criterion {
        id: "conditional-prey",
        title: "E[R | L] = (n - L)/(n - k)",
        conjecture: false,
        run: conditional_prey,
    },
    Criterion {
        id: "smoluchowski",
        title: "moments, ODE residual, prey curve",
        conjecture: false,
        run: smoluchowski_identities,
    },
    Criterion {
        id: "partial-cost-curves",
        title: "C/n tracks the limit curves",
        conjecture: false,
        run: partial_cost_curves,
    },
    Criterion {
        id: "excursion-area",
        title: "QF total and probe total share the excursion-area law",
        conjecture: false,
        run: excursion_area,
    },
    Criterion {
        id: "qfb-constant",
        title: "QFB / (n log n) extrapolates to 1/2",
        conjecture: false,
        run: qfb_constant,
    },
    Criterion {
        id: "qfw-conjecture",
        title: "QFW / (n log n) extrapolates to 1/pi",
        conjecture: true,
        run: qfw_conjecture,
    },
    Criterion {
        id: "phase-transition",
        title: "QF cost before the last n^0.75 merges vanishes",
        conjecture: false,
        run: phase_transition,
    },
    Criterion {
        id: "regime-sweep",
        title: "largest cluster: sparse -> 0, dense -> 1",
        conjecture: false,
        run: regime_sweep_check,
    },
    Criterion {
        id: "determinism",
        title: "simulate is byte-identical across runs and workers",
        conjecture: false,
        run: determinism,
    },
    Criterion {
        id: "pmk-chi-square",
        title: "simulated final predator fits p_mk",
        conjecture: false,
        run: pmk_chi_square,
    },
];

pub fn find(id: &str) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

pub fn run_criterion(c: &Criterion, opts: &VerifyOptions) -> Outcome {
    let start = Instant::now();
    let measured = (c.run)(opts);
    let seconds = start.elapsed().as_secs_f64();
    let m = measured.unwrap_or_else(|e| Measured {
        passed: false,
        measured: f64::NAN,
        target: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {e}"),
    });
    Outcome {
        id: c.id,
        title: c.title,
        conjecture: c.conjecture,
        passed: m.passed,
        measured: m.measured,
        target: m.target,
        tolerance: m.tolerance,
        detail: m.detail,
        seconds,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub outcomes: Vec<Outcome>,
    pub mutate: bool,
}

impl Report {
    /// True when every non-conjecture criterion passed.
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.conjecture || o.passed)
    }

    pub fn to_json(&self) -> String {
        let num = |x: f64| {
            if x.is_finite() {
                serde_json::json!(x)
            } else {
                serde_json::Value::Null
            }
        };
        let criteria: Vec<serde_json::Value> = self
            .outcomes
            .iter()
            .map(|o| {
                serde_json::json!({
                    "id": o.id,
                    "title": o.title,
                    "status": o.status(),
                    "measured": num(o.measured),
                    "target": num(o.target),
                    "tolerance": num(o.tolerance),
                    "detail": o.detail,
                    "seconds": o.seconds,
                })
            })
            .collect();
        let report = serde_json::json!({
            "version": crate::cli::VERSION,
            "mutate": self.mutate,
            "passed": self.passed(),
            "criteria": criteria,
        });
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n"
    }
}

pub fn run_suite(opts: &VerifyOptions) -> Result<Report> {
    for id in &opts.only {
        if find(id).is_none() {
            let known: Vec<&str> = CRITERIA.iter().map(|c| c.id).collect();
            return Err(Error::InvalidArgument(format!(
                "unknown criterion `{id}`; known: {}",
                known.join(", ")
            )));
        }
    }
    let outcomes = CRITERIA
        .iter()
        .filter(|c| opts.only.is_empty() || opts.only.iter().any(|id| id == c.id))
        .map(|c| run_criterion(c, opts))
        .collect();
    Ok(Report {
        outcomes,
        mutate: opts.mutate,
    })
}

fn exact_check(mismatches: usize, detail: String) -> Measured {
    Measured {
        passed: mismatches == 0,
        measured: mismatches as f64,
        target: 0.0,
        tolerance: 0.0,
        detail,
    }
}

fn oracle_equivalence(_: &VerifyOptions) -> Result<Measured> {
    let mut worst = Ratio::zero();
    for n in 2..=6 {
        let parking = exact::enumerate_parking(n)?;
        let trees = exact::enumerate_spanning_trees(n)?;
        let chain = exact::chain_sequence_law(n)?;
        for tv in [
            parking.total_variation(&trees),
            parking.total_variation(&chain),
            trees.total_variation(&chain),
        ] {
            if tv > worst {
                worst = tv;
            }
        }
    }
    let measured = exact::ratio_to_f64(&worst);
    Ok(Measured {
        passed: measured < 1e-12,
        measured,
        target: 0.0,
        tolerance: 1e-12,
        detail: "max pairwise total variation, n = 2..6".into(),
    })
}

fn pmk_exact(_: &VerifyOptions) -> Result<Measured> {
    let mut mismatches = 0;
    for m in 2..=8 {
        let law = exact::enumerate_parking(m)?;
        let marginal = law.predator_marginal(m - 1);
        for k in 1..m {
            let enumerated = marginal.get(&k).cloned().unwrap_or_else(Ratio::zero);
            if enumerated != exact::p_mk_exact(m, k)? {
                mismatches += 1;
            }
        }
    }
    for m in 2..=30 {
        let total: Ratio = (1..m)
            .map(|k| exact::p_mk_exact(m, k))
            .sum::<Result<Ratio>>()?;
        if !total.is_one() {
            mismatches += 1;
        }
    }
    Ok(exact_check(
        mismatches,
        "rational mismatches: enumeration m <= 8, row sums m <= 30".into(),
    ))
}

fn borel_limit(_: &VerifyOptions) -> Result<Measured> {
    let m = 10_000;
    let mut worst: f64 = 0.0;
    for k in 1..=10 {
        worst = worst.max((exact::p_mk(m, m - k)? - exact::borel_pmf(k as u64)?).abs());
    }
    Ok(Measured {
        passed: worst < 1e-3,
        measured: worst,
        target: 0.0,
        tolerance: 1e-3,
        detail: "max |p_mk(1e4, 1e4-k) - borel(k)|, k = 1..10".into(),
    })
}

fn conditional_prey(_: &VerifyOptions) -> Result<Measured> {
    let mut mismatches = 0;
    let mut checked = 0;
    for n in 2..=8 {
        let law = exact::enumerate_parking(n)?;
        for k in 1..n {
            for (l, mean) in law.conditional_prey_mean(k) {
                checked += 1;
                if mean != ratio((n - l) as u64, (n - k) as u64) {
                    mismatches += 1;
                }
            }
        }
    }
    Ok(exact_check(
        mismatches,
        format!("{checked} reachable (n, k, l) checked, n <= 8"),
    ))
}

fn smoluchowski_identities(_: &VerifyOptions) -> Result<Measured> {
    let mut moment_err: f64 = 0.0;
    for t in [0.1, 1.0, 3.0] {
        for p in 0..=2 {
            moment_err = moment_err.max((truncated_moment(t, p, 1e-10) - moment(t, p)?).abs());
        }
    }
    // central difference, h^2 error far below the bound
    let (t, h) = (1.0, 1e-4);
    let mut ode_err: f64 = 0.0;
    for k in 1..=20 {
        let dq = (q(k, t + h) - q(k, t - h)) / (2.0 * h);
        ode_err = ode_err.max((dq - smoluchowski_rhs(k, t, 1e-14)).abs());
    }
    let mut curve_err: f64 = 0.0;
    for &alpha in &CheckpointGrid::default().alphas {
        let quad = phi_quadrature(&Functional::Prey, alpha, 1e-10)?;
        curve_err = curve_err.max((quad.value - (1.0 / (1.0 - alpha)).ln()).abs());
    }
    let passed = moment_err < 1e-8 && ode_err < 1e-6 && curve_err < 1e-6;
    Ok(Measured {
        passed,
        measured: moment_err.max(ode_err).max(curve_err),
        target: 0.0,
        tolerance: 1e-6,
        detail: format!("moments {moment_err:.2e} (tol 1e-8), ode {ode_err:.2e} (tol 1e-6), prey curve {curve_err:.2e} (tol 1e-6)"),
    })
}

const CURVE_SEED: u64 = 0x5eed_0006;

fn partial_cost_curves(opts: &VerifyOptions) -> Result<Measured> {
    let n = 100_000;
    let alphas: Vec<f64> = (1..=18).map(|i| i as f64 * 0.05).collect();
    let spec = ExperimentSpec {
        reps: 100,
        seed: CURVE_SEED,
        grid: CheckpointGrid {
            alphas: alphas.clone(),
            betas: vec![],
        },
        workers: opts.workers,
        ..ExperimentSpec::new(n, EmbeddingKind::DirectChain)
    };
    let result = run_monte_carlo(&spec)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for f in [
        Functional::Prey,
        Functional::Predator,
        Functional::Displacement,
        Functional::QuickFind,
        Functional::QuickFindWeighted,
    ] {
        let summary = result.get(f).expect("all functionals simulated");
        let mut f_worst: f64 = 0.0;
        for c in &summary.alpha {
            let phi = match f {
                Functional::QuickFindWeighted => phi_quadrature(&MinCost, c.at, 1e-10)?.value,
                _ => phi_closed_form(f, c.at)?,
            };
            f_worst = f_worst.max((c.stats.mean() - phi).abs() / (1.0 + phi));
        }
        parts.push(format!("{}={f_worst:.4}", f.tag()));
        worst = worst.max(f_worst);
    }
    // informative: the max-cost curve, for contrast with min
    let qfw = result
        .get(Functional::QuickFindWeighted)
        .expect("simulated");
    let last = qfw.alpha.last().expect("nonempty grid");
    let max_phi = phi_quadrature(&MaxCost, last.at, 1e-10)?.value;
    let min_phi = phi_quadrature(&MinCost, last.at, 1e-10)?.value;
    parts.push(format!(
        "qfw at alpha={}: mean {:.4}, min-curve {min_phi:.4}, max-curve {max_phi:.4}",
        last.at,
        last.stats.mean()
    ));
    Ok(Measured {
        passed: worst < 0.02,
        measured: worst,
        target: 0.0,
        tolerance: 0.02,
        detail: format!(
            "sup |C/n - phi| / (1 + phi) over alpha <= 0.9: {}",
            parts.join(", ")
        ),
    })
}

fn run_totals(
    n: usize,
    reps: usize,
    seed: u64,
    embedding: EmbeddingKind,
    functional: Functional,
    workers: Option<usize>,
) -> Result<Vec<f64>> {
    let spec = ExperimentSpec {
        functionals: vec![functional],
        reps,
        seed,
        grid: CheckpointGrid {
            alphas: vec![],
            betas: vec![],
        },
        workers,
        ..ExperimentSpec::new(n, embedding)
    };
    let result = run_monte_carlo(&spec)?;
    Ok(result.functionals[0]
        .totals
        .iter()
        .map(|&t| t as f64)
        .collect())
}

fn excursion_area(opts: &VerifyOptions) -> Result<Measured> {
    let n = 100_000;
    let scale = (n as f64).powf(1.5);
    let qf = run_totals(
        n,
        200,
        0x5eed_0007,
        EmbeddingKind::DirectChain,
        Functional::QuickFind,
        opts.workers,
    )?;
    let mean = qf
        .iter()
        .map(|t| t / scale)
        .collect::<SummaryStats>()
        .mean();
    let rel = (mean / EXCURSION_AREA_MEAN - 1.0).abs();

    let a: Vec<f64> = run_totals(
        n,
        500,
        0x5eed_0107,
        EmbeddingKind::DirectChain,
        Functional::QuickFind,
        opts.workers,
    )?
    .iter()
    .map(|t| t / scale)
    .collect();
    let b: Vec<f64> = run_totals(
        n,
        500,
        0x5eed_0207,
        EmbeddingKind::Parking,
        Functional::Displacement,
        opts.workers,
    )?
    .iter()
    .map(|t| t / scale)
    .collect();
    let ks = ks_two_sample(&a, &b, 0.001)?;
    Ok(Measured {
        passed: rel < 0.05 && !ks.rejected(),
        measured: mean,
        target: EXCURSION_AREA_MEAN,
        tolerance: 0.05 * EXCURSION_AREA_MEAN,
        detail: format!(
            "mean n^-1.5 C_QF (200 reps) rel err {rel:.4} (tol 0.05); KS QF vs parking probe total (500 + 500): D={:.4}, p={:.4}, level 0.001",
            ks.statistic, ks.p_value
        ),
    })
}

const LOG_FIT_NS: [usize; 3] = [1_000, 10_000, 100_000];

fn log_extrapolation(
    functional: Functional,
    seed: u64,
    opts: &VerifyOptions,
) -> Result<(f64, String)> {
    let mut points = Vec::new();
    for n in LOG_FIT_NS {
        let totals = run_totals(
            n,
            100,
            seed ^ n as u64,
            EmbeddingKind::DirectChain,
            functional,
            opts.workers,
        )?;
        let norm = n as f64 * (n as f64).ln();
        points.push((
            n,
            totals
                .iter()
                .map(|t| t / norm)
                .collect::<SummaryStats>()
                .mean(),
        ));
    }
    let (a, b) = fit_inverse_log(&points)?;
    let raw: Vec<String> = points
        .iter()
        .map(|(n, y)| format!("n={n}: {y:.4}"))
        .collect();
    Ok((
        a,
        format!("fit a + b/ln n: a={a:.4}, b={b:.4}; raw {}", raw.join(", ")),
    ))
}

fn qfb_constant(opts: &VerifyOptions) -> Result<Measured> {
    let (a, detail) = log_extrapolation(Functional::QuickFindBiased, 0x5eed_0008, opts)?;
    Ok(Measured {
        passed: (a - 0.5).abs() < 0.05,
        measured: a,
        target: 0.5,
        tolerance: 0.05,
        detail,
    })
}

fn qfw_conjecture(opts: &VerifyOptions) -> Result<Measured> {
    let target = 1.0 / std::f64::consts::PI;
    let (a, detail) = log_extrapolation(Functional::QuickFindWeighted, 0x5eed_0009, opts)?;
    Ok(Measured {
        passed: (a - target).abs() < 0.15 * target,
        measured: a,
        target,
        tolerance: 0.15 * target,
        detail,
    })
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] < w[0])
}

fn phase_transition(opts: &VerifyOptions) -> Result<Measured> {
    let mut means = Vec::new();
    for n in LOG_FIT_NS {
        let nf = n as f64;
        let step = (nf - nf.powf(0.75)).floor() as usize;
        let mut stats = SummaryStats::new();
        run_replications(
            100,
            0x5eed_0010 ^ n as u64,
            opts.workers,
            |_, rng| {
                let mut cost: u64 = 0;
                EmbeddingKind::DirectChain.simulate_with(n, rng, |e| {
                    if e.step <= step {
                        cost += Functional::QuickFind.instantaneous_cost(e);
                    }
                })?;
                Ok(cost)
            },
            |_, cost| {
                stats.push(cost as f64 / nf.powf(1.5));
                Ok(())
            },
        )?;
        means.push(stats.mean());
    }
    let last = *means.last().expect("three sizes");
    Ok(Measured {
        passed: strictly_decreasing(&means) && last < 0.05,
        measured: last,
        target: 0.0,
        tolerance: 0.05,
        detail: format!("means over n = 1e3, 1e4, 1e5: {means:.4?}; must strictly decrease"),
    })
}

fn regime_sweep_check(opts: &VerifyOptions) -> Result<Measured> {
    let rows = regime_sweep(
        &LOG_FIT_NS,
        0.15,
        200,
        0x5eed_0011,
        EmbeddingKind::DirectChain,
        opts.workers,
    )?;
    let sparse: Vec<f64> = rows.iter().map(|r| r.sparse.mean()).collect();
    let dense: Vec<f64> = rows.iter().map(|r| r.dense.mean()).collect();
    let neg_dense: Vec<f64> = dense.iter().map(|x| -x).collect();
    let gap = dense.last().expect("rows") - sparse.last().expect("rows");
    Ok(Measured {
        passed: strictly_decreasing(&sparse) && strictly_decreasing(&neg_dense) && gap > 0.5,
        measured: gap,
        target: 1.0,
        tolerance: 0.5,
        detail: format!("B/n sparse {sparse:.4?} (decreasing), dense {dense:.4?} (increasing), gap at 1e5 > 0.5"),
    })
}

fn determinism(_: &VerifyOptions) -> Result<Measured> {
    let base = RunConfig {
        n: 2_000,
        reps: 48,
        seed: 0x5eed_0012,
        ..RunConfig::default()
    };
    let render = |workers: usize, format: Format| -> Result<String> {
        let c = RunConfig {
            workers: Some(workers),
            format,
            ..base.clone()
        };
        Ok(cmd_simulate(&c)?.render(format))
    };
    let mut differing = 0;
    for format in [Format::Csv, Format::Json] {
        let first = render(1, format)?;
        for other in [render(1, format)?, render(8, format)?] {
            if other != first {
                differing += 1;
            }
        }
    }
    Ok(exact_check(
        differing,
        "outputs differing from the first run (csv + json; 1 vs 1 vs 8 workers)".into(),
    ))
}

/// `p_mk(m, ·)` tilted by `1 ± 10%` on alternate `k`, renormalized.
fn perturbed_pmk(m: usize) -> Result<Vec<f64>> {
    let raw: Vec<f64> = (1..m)
        .map(|k| exact::p_mk(m, k).map(|p| p * if k % 2 == 0 { 1.1 } else { 0.9 }))
        .collect::<Result<_>>()?;
    let total: f64 = raw.iter().sum();
    Ok(raw.into_iter().map(|p| p / total).collect())
}

fn pmk_chi_square(opts: &VerifyOptions) -> Result<Measured> {
    let m = 50;
    let mut counts = vec![0u64; m - 1];
    run_replications(
        100_000,
        0x5eed_0013,
        opts.workers,
        |_, rng| {
            let mut last = 0;
            EmbeddingKind::DirectChain.simulate_with(m, rng, |e| last = e.predator)?;
            Ok(last)
        },
        |_, l| {
            counts[l - 1] += 1;
            Ok(())
        },
    )?;
    let expected = if opts.mutate {
        perturbed_pmk(m)?
    } else {
        (1..m)
            .map(|k| exact::p_mk(m, k))
            .collect::<Result<Vec<_>>>()?
    };
    let test = chi_square_gof(&counts, &expected, 0.01)?;
    Ok(Measured {
        passed: !test.rejected(),
        measured: test.p_value,
        target: 1.0,
        tolerance: 0.01,
        detail: format!(
            "final predator at m = 50, 1e5 runs; chi2 = {:.2}, dof = {}, p = {:.4}{}",
            test.statistic,
            test.dof.unwrap_or(0),
            test.p_value,
            if opts.mutate { " (mutated null)" } else { "" }
        ),
    })
}
