//! Seeded Monte Carlo replications.
//!
//! Replication `i` draws from its own stream seeded by
//! `substream_seed(master, i)`. Replications run on a rayon pool in chunks;
//! each chunk is collected in index order and folded sequentially, so the
//! output does not depend on the number of workers.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use rayon::prelude::*;

use crate::cost::{CheckpointGrid, Functional, TraceSet};
use crate::error::{Error, Result};
use crate::process::EmbeddingKind;
use crate::rng::{replication_rng, SimRng};
use crate::stats::{linear_fit, SummaryStats};

/// Replications handed to the pool at once.
const CHUNK: usize = 1024;

/// Runs `reps` replications of `job` and feeds the results to `fold` in index
/// order. `workers = None` uses the global rayon pool.
pub fn run_replications<T, J, F>(
    reps: usize,
    seed: u64,
    workers: Option<usize>,
    job: J,
    mut fold: F,
) -> Result<()>
where
    T: Send,
    J: Fn(usize, &mut SimRng) -> Result<T> + Sync,
    F: FnMut(usize, T) -> Result<()>,
{
    let pool = match workers {
        None => None,
        Some(w) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?,
        ),
    };
    let run_chunk = |start: usize, end: usize| -> Vec<Result<T>> {
        (start..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = replication_rng(seed, i as u64);
                job(i, &mut rng)
            })
            .collect()
    };
    let mut start = 0;
    while start < reps {
        let end = (start + CHUNK).min(reps);
        let chunk = match &pool {
            Some(p) => p.install(|| run_chunk(start, end)),
            None => run_chunk(start, end),
        };
        for (offset, out) in chunk.into_iter().enumerate() {
            let index = start + offset;
            let value = out.map_err(|e| Error::Replication {
                index,
                source: Box::new(e),
            })?;
            fold(index, value)?;
        }
        start = end;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub n: usize,
    pub embedding: EmbeddingKind,
    pub functionals: Vec<Functional>,
    pub reps: usize,
    pub seed: u64,
    pub grid: CheckpointGrid,
    pub workers: Option<usize>,
    /// Directory for newline-delimited per-replication totals, one file per
    /// functional.
    pub raw_samples: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn new(n: usize, embedding: EmbeddingKind) -> Self {
        ExperimentSpec {
            n,
            embedding,
            functionals: Functional::ALL.to_vec(),
            reps: 1,
            seed: 0,
            grid: CheckpointGrid::default(),
            workers: None,
            raw_samples: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidArgument(format!("n = {} < 2", self.n)));
        }
        if self.reps == 0 {
            return Err(Error::InvalidArgument("reps must be at least 1".into()));
        }
        if self.functionals.is_empty() {
            return Err(Error::InvalidArgument("no functionals selected".into()));
        }
        // β beyond √n is accepted and clamps to step 0
        self.grid.validate()
    }
}

/// Per-checkpoint summary.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckpointSummary {
    pub at: f64,
    pub step: usize,
    pub stats: SummaryStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalSummary {
    pub functional: Functional,
    /// `C_{n,n-1}`.
    pub total: SummaryStats,
    /// `C_{n,⌈αn⌉} / n`.
    pub alpha: Vec<CheckpointSummary>,
    /// `n^{-3/2} C_{n,⌊n−β√n⌋}`.
    pub beta: Vec<CheckpointSummary>,
    /// Per-replication totals in replication order.
    pub totals: Vec<u128>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloResult {
    pub spec: ExperimentSpec,
    pub functionals: Vec<FunctionalSummary>,
}

impl MonteCarloResult {
    pub fn get(&self, functional: Functional) -> Option<&FunctionalSummary> {
        self.functionals.iter().find(|f| f.functional == functional)
    }
}

fn write_raw_samples(dir: &PathBuf, result: &MonteCarloResult) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for f in &result.functionals {
        let path = dir.join(format!("{}_total.txt", f.functional.tag()));
        let mut out = BufWriter::new(File::create(&path)?);
        for (index, v) in f.totals.iter().enumerate() {
            writeln!(out, "{v}").map_err(|e| Error::Replication {
                index,
                source: Box::new(e.into()),
            })?;
        }
        out.flush()?;
    }
    Ok(())
}

pub fn run_monte_carlo(spec: &ExperimentSpec) -> Result<MonteCarloResult> {
    spec.validate()?;
    let n = spec.n;
    let template = TraceSet::new(&spec.functionals, n, &spec.grid)?;
    let mut functionals: Vec<FunctionalSummary> = template
        .traces()
        .iter()
        .map(|t| FunctionalSummary {
            functional: t.functional(),
            total: SummaryStats::new(),
            alpha: t
                .alpha_checkpoints()
                .iter()
                .map(|c| CheckpointSummary {
                    at: c.at,
                    step: c.step,
                    stats: SummaryStats::new(),
                })
                .collect(),
            beta: t
                .beta_checkpoints()
                .iter()
                .map(|c| CheckpointSummary {
                    at: c.at,
                    step: c.step,
                    stats: SummaryStats::new(),
                })
                .collect(),
            totals: Vec::with_capacity(spec.reps),
        })
        .collect();

    let embedding = spec.embedding;
    run_replications(
        spec.reps,
        spec.seed,
        spec.workers,
        |_, rng| {
            let mut traces = template.clone();
            let mut failure = None;
            embedding.simulate_with(n, rng, |e| {
                if failure.is_none() {
                    if let Err(err) = traces.accumulate(e) {
                        failure = Some(err);
                    }
                }
            })?;
            match failure {
                Some(err) => Err(err),
                None => Ok(traces),
            }
        },
        |_, traces| {
            for (summary, trace) in functionals.iter_mut().zip(traces.traces()) {
                let total = trace.total()?;
                summary.total.push(total as f64);
                summary.totals.push(total);
                for (s, (_, v)) in summary.alpha.iter_mut().zip(trace.partial_cost_curve()?) {
                    s.stats.push(v);
                }
                for (s, (_, v)) in summary.beta.iter_mut().zip(trace.w_curve()?) {
                    s.stats.push(v);
                }
            }
            Ok(())
        },
    )?;

    let result = MonteCarloResult {
        spec: spec.clone(),
        functionals,
    };
    if let Some(dir) = &spec.raw_samples {
        write_raw_samples(dir, &result)?;
    }
    Ok(result)
}

/// Checkpoints of the regime sweep for one `n`: `k = ⌊n − n^{1/2+ε}⌋` and
/// `k = ⌊n − n^{1/2−ε}⌋`, clamped to `0..=n-1`.
pub fn regime_steps(n: usize, epsilon: f64) -> (usize, usize) {
    let nf = n as f64;
    let clamp = |x: f64| {
        if x <= 0.0 {
            0
        } else {
            (x.floor() as usize).min(n - 1)
        }
    };
    (
        clamp(nf - nf.powf(0.5 + epsilon)),
        clamp(nf - nf.powf(0.5 - epsilon)),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub sparse_step: usize,
    pub dense_step: usize,
    /// `B/n` after `sparse_step` merges (largest cluster fraction).
    pub sparse: SummaryStats,
    pub dense: SummaryStats,
}

/// Largest cluster fraction at the two regime checkpoints over each `n`.
pub fn regime_sweep(
    n_list: &[usize],
    epsilon: f64,
    reps: usize,
    seed: u64,
    embedding: EmbeddingKind,
    workers: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "epsilon = {epsilon} outside (0, 1/2)"
        )));
    }
    if reps == 0 {
        return Err(Error::InvalidArgument("reps must be at least 1".into()));
    }
    let mut rows = Vec::with_capacity(n_list.len());
    for &n in n_list {
        if n < 2 {
            return Err(Error::InvalidArgument(format!("n = {n} < 2")));
        }
        let (sparse_step, dense_step) = regime_steps(n, epsilon);
        let mut row = SweepRow {
            n,
            sparse_step,
            dense_step,
            sparse: SummaryStats::new(),
            dense: SummaryStats::new(),
        };
        run_replications(
            reps,
            seed ^ (n as u64).rotate_left(32),
            workers,
            |_, rng| {
                let mut largest = 1;
                let (mut at_sparse, mut at_dense) = (1, 1);
                embedding.simulate_with(n, rng, |e| {
                    largest = largest.max(e.merged_size());
                    if e.step == sparse_step {
                        at_sparse = largest;
                    }
                    if e.step == dense_step {
                        at_dense = largest;
                    }
                })?;
                Ok((at_sparse, at_dense))
            },
            |_, (a, b)| {
                row.sparse.push(a as f64 / n as f64);
                row.dense.push(b as f64 / n as f64);
                Ok(())
            },
        )?;
        rows.push(row);
    }
    Ok(rows)
}

/// Fits `y ≈ a + b / ln n` to `(n, y)` points; returns `(a, b)`.
pub fn fit_inverse_log(points: &[(usize, f64)]) -> Result<(f64, f64)> {
    let xs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(n, y)| (1.0 / (n as f64).ln(), y))
        .collect();
    linear_fit(&xs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(n: usize, reps: usize) -> ExperimentSpec {
        ExperimentSpec {
            reps,
            seed: 17,
            ..ExperimentSpec::new(n, EmbeddingKind::DirectChain)
        }
    }

    #[test]
    fn n2_totals() {
        let r = run_monte_carlo(&spec(2, 1)).unwrap();
        for f in &r.functionals {
            let want = if f.functional == Functional::Displacement {
                0.0
            } else {
                1.0
            };
            assert_eq!(f.total.mean(), want, "{}", f.functional);
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let mut a = spec(300, 40);
        a.workers = Some(1);
        let mut b = a.clone();
        b.workers = Some(4);
        let (ra, rb) = (run_monte_carlo(&a).unwrap(), run_monte_carlo(&b).unwrap());
        assert_eq!(ra.functionals, rb.functionals);
    }

    #[test]
    fn replication_order_is_preserved_across_chunks() {
        let mut seen = Vec::new();
        run_replications(
            2 * CHUNK + 3,
            1,
            Some(3),
            |i, _| Ok(i),
            |i, v| {
                assert_eq!(i, v);
                seen.push(v);
                Ok(())
            },
        )
        .unwrap();
        assert_eq!(seen.len(), 2 * CHUNK + 3);
    }

    #[test]
    fn errors_carry_the_replication_index() {
        let err = run_replications(
            10,
            1,
            None,
            |i, _| {
                if i == 7 {
                    Err(Error::Precondition("boom".into()))
                } else {
                    Ok(())
                }
            },
            |_, _| Ok(()),
        )
        .unwrap_err();
        assert!(matches!(err, Error::Replication { index: 7, .. }), "{err}");
    }

    #[test]
    fn raw_samples_are_written() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = spec(20, 5);
        s.raw_samples = Some(dir.path().to_path_buf());
        let r = run_monte_carlo(&s).unwrap();
        let text = std::fs::read_to_string(dir.path().join("qf_total.txt")).unwrap();
        let vals: Vec<u128> = text.lines().map(|l| l.parse().unwrap()).collect();
        assert_eq!(vals, r.get(Functional::QuickFind).unwrap().totals);
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(run_monte_carlo(&spec(1, 1)).is_err());
        assert!(run_monte_carlo(&spec(5, 0)).is_err());
        let mut s = spec(4, 1);
        s.grid.alphas = vec![1.0];
        assert!(run_monte_carlo(&s).is_err());
    }

    #[test]
    fn regime_steps_clamp() {
        assert_eq!(regime_steps(2, 0.15), (0, 0));
        let (a, b) = regime_steps(10_000, 0.15);
        assert!(a < b && b < 10_000);
        let rows = regime_sweep(&[2], 0.15, 3, 1, EmbeddingKind::DirectChain, None).unwrap();
        assert_eq!(rows[0].sparse.mean(), 0.5);
        assert!(regime_sweep(&[10], 0.5, 1, 1, EmbeddingKind::DirectChain, None).is_err());
    }

    #[test]
    fn inverse_log_fit_recovers_line() {
        let pts: Vec<(usize, f64)> = [1000usize, 10_000, 100_000]
            .iter()
            .map(|&n| (n, 0.5 + 2.0 / (n as f64).ln()))
            .collect();
        let (a, b) = fit_inverse_log(&pts).unwrap();
        assert!((a - 0.5).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }
}
