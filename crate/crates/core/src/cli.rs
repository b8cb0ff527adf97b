//! Configuration, tables and the command bodies behind the `coalcost` binary.
//!
//! Config files are flat `key = value` text whose keys are the long flag
//! names. Every output row starts with the provenance columns
//! `seed, n, reps, embedding, version`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::cost::{CheckpointGrid, Functional, MinCost};
use crate::error::{Error, Result};
use crate::exact::{self, ratio, ratio_string, ratio_to_f64};
use crate::experiment::{regime_sweep, run_monte_carlo, ExperimentSpec};
use crate::process::EmbeddingKind;
use crate::smoluchowski::{phi_closed_form, phi_quadrature, phi_reference_table, DEFAULT_TOL};

pub const VERSION: &str = concat!("coalcost ", env!("CARGO_PKG_VERSION"));

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const USAGE: i32 = 1;
    pub const VERIFY_FAILED: i32 = 2;
    pub const RUNTIME: i32 = 3;
}

/// Exit code for an error: bad input is a usage error, anything else is a
/// runtime failure.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::InvalidArgument(_) | Error::Config(_) | Error::OracleCap { .. } => exit::USAGE,
        _ => exit::RUNTIME,
    }
}

/// Machine-readable error record.
pub fn error_record(err: &Error) -> String {
    let kind = match err {
        Error::InvalidArgument(_) => "invalid_argument",
        Error::Config(_) => "config",
        Error::OracleCap { .. } => "oracle_cap",
        Error::Io(_) => "io",
        Error::Replication { .. } => "replication",
        Error::QuadratureDiverged { .. } => "quadrature",
        _ => "runtime",
    };
    serde_json::json!({ "error": kind, "message": err.to_string(), "exit_code": exit_code(err) })
        .to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Limit,
    Exact,
    Verify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Limit => "limit",
            Command::Exact => "exact",
            Command::Verify => "verify",
            Command::Sweep => "sweep",
        }
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "simulate" => Command::Simulate,
            "limit" => Command::Limit,
            "exact" => Command::Exact,
            "verify" => Command::Verify,
            "sweep" => Command::Sweep,
            _ => return Err(Error::Config(format!("unknown subcommand `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err(Error::Config(format!("unknown format `{s}` (csv|json)"))),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
        })
    }
}

/// Queries served by `exact`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Oracle {
    /// `p_{m,k}` for `m = n`.
    #[default]
    Pmk,
    /// Borel masses `k = 1..=n`.
    Borel,
    /// `E[R_k | L_k = ℓ]` from parking enumeration.
    ConditionalPrey,
    /// Expected totals from the partition DP.
    Dp,
    /// Per-step `(L, R)` law from parking enumeration.
    Parking,
    /// Per-step `(L, R)` law from spanning-tree enumeration.
    Trees,
}

impl Oracle {
    pub const ALL: [Oracle; 6] = [
        Oracle::Pmk,
        Oracle::Borel,
        Oracle::ConditionalPrey,
        Oracle::Dp,
        Oracle::Parking,
        Oracle::Trees,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Oracle::Pmk => "pmk",
            Oracle::Borel => "borel",
            Oracle::ConditionalPrey => "conditional-r",
            Oracle::Dp => "dp",
            Oracle::Parking => "parking",
            Oracle::Trees => "trees",
        }
    }
}

impl FromStr for Oracle {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Oracle::ALL
            .into_iter()
            .find(|o| o.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown oracle `{s}`")))
    }
}

/// Everything a subcommand needs. Round-trips through [`RunConfig::to_text`]
/// and [`RunConfig::parse`].
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: Option<Command>,
    pub n: usize,
    pub embedding: EmbeddingKind,
    pub functionals: Vec<Functional>,
    pub reps: usize,
    pub seed: u64,
    pub alpha_grid: Vec<f64>,
    pub beta_grid: Vec<f64>,
    pub tol: f64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
    pub raw_samples: Option<PathBuf>,
    pub oracle: Oracle,
    pub n_list: Vec<usize>,
    pub epsilon: f64,
    pub only: Vec<String>,
    pub mutate: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let grid = CheckpointGrid::default();
        RunConfig {
            subcommand: None,
            n: 1000,
            embedding: EmbeddingKind::DirectChain,
            functionals: Functional::ALL.to_vec(),
            reps: 100,
            seed: 1,
            alpha_grid: grid.alphas,
            beta_grid: grid.betas,
            tol: DEFAULT_TOL,
            out: None,
            format: Format::Csv,
            workers: None,
            raw_samples: None,
            oracle: Oracle::default(),
            n_list: vec![1000, 10_000, 100_000],
            epsilon: 0.15,
            only: Vec::new(),
            mutate: false,
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(key, s))
        .collect()
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(Error::Config(format!(
            "{key}: expected true|false, got `{value}`"
        ))),
    }
}

impl RunConfig {
    pub const KEYS: [&'static str; 18] = [
        "subcommand",
        "n",
        "embedding",
        "functional",
        "reps",
        "seed",
        "alpha-grid",
        "beta-grid",
        "tol",
        "out",
        "format",
        "workers",
        "raw-samples",
        "oracle",
        "n-list",
        "epsilon",
        "only",
        "mutate",
    ];

    /// Sets one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let cfg = |e: Error| match e {
            Error::Config(m) => Error::Config(m),
            other => Error::Config(format!("{key}: {other}")),
        };
        match key {
            "subcommand" => self.subcommand = Some(value.parse()?),
            "n" => self.n = parse_num(key, value)?,
            "embedding" => self.embedding = value.parse().map_err(cfg)?,
            "functional" => {
                self.functionals = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<Functional>().map_err(cfg))
                    .collect::<Result<_>>()?
            }
            "reps" => self.reps = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "alpha-grid" => self.alpha_grid = parse_list(key, value)?,
            "beta-grid" => self.beta_grid = parse_list(key, value)?,
            "tol" => self.tol = parse_num(key, value)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "format" => self.format = value.parse()?,
            "workers" => self.workers = Some(parse_num(key, value)?),
            "raw-samples" => self.raw_samples = Some(PathBuf::from(value)),
            "oracle" => self.oracle = value.parse()?,
            "n-list" => self.n_list = parse_list(key, value)?,
            "epsilon" => self.epsilon = parse_num(key, value)?,
            "only" => {
                self.only = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "mutate" => self.mutate = parse_bool(key, value)?,
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Parses `key = value` lines; `#` starts a comment line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = RunConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Config(format!(
                    "line {}: duplicate key `{key}`",
                    lineno + 1
                )));
            }
            config.set(key, value)?;
        }
        Ok(config)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut lines = Vec::new();
        let mut push = |k: &str, v: String| lines.push(format!("{k} = {v}"));
        if let Some(c) = self.subcommand {
            push("subcommand", c.name().into());
        }
        push("n", self.n.to_string());
        push("embedding", self.embedding.name().into());
        push(
            "functional",
            self.functionals
                .iter()
                .map(|f| f.tag())
                .collect::<Vec<_>>()
                .join(","),
        );
        push("reps", self.reps.to_string());
        push("seed", self.seed.to_string());
        push("alpha-grid", join(&self.alpha_grid));
        push("beta-grid", join(&self.beta_grid));
        push("tol", self.tol.to_string());
        if let Some(p) = &self.out {
            push("out", p.display().to_string());
        }
        push("format", self.format.to_string());
        if let Some(w) = self.workers {
            push("workers", w.to_string());
        }
        if let Some(p) = &self.raw_samples {
            push("raw-samples", p.display().to_string());
        }
        push("oracle", self.oracle.name().into());
        push("n-list", join(&self.n_list));
        push("epsilon", self.epsilon.to_string());
        push("only", self.only.join(","));
        push("mutate", self.mutate.to_string());
        lines.join("\n") + "\n"
    }

    pub fn grid(&self) -> CheckpointGrid {
        CheckpointGrid {
            alphas: self.alpha_grid.clone(),
            betas: self.beta_grid.clone(),
        }
    }

    pub fn experiment_spec(&self) -> ExperimentSpec {
        ExperimentSpec {
            n: self.n,
            embedding: self.embedding,
            functionals: self.functionals.clone(),
            reps: self.reps,
            seed: self.seed,
            grid: self.grid(),
            workers: self.workers,
            raw_samples: self.raw_samples.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i128),
    Float(f64),
    Text(String),
    Null,
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i128)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Null, Into::into)
    }
}

/// 17 significant digits.
fn float_text(x: f64) -> Option<String> {
    x.is_finite().then(|| format!("{x:.16e}"))
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row
                .iter()
                .map(|c| match c {
                    Cell::Int(v) => v.to_string(),
                    Cell::Float(x) => {
                        float_text(*x).unwrap_or_else(|| x.to_string().to_lowercase())
                    }
                    Cell::Text(s) => csv_escape(s),
                    Cell::Null => String::new(),
                })
                .collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Array of row objects. Floats use the same decimal text as the CSV;
    /// non-finite values become `null`.
    pub fn to_json(&self) -> String {
        let mut out = String::from("[\n");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str("  {");
            for (j, (name, cell)) in self.columns.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                out.push_str(&serde_json::Value::from(name.as_str()).to_string());
                out.push_str(": ");
                match cell {
                    Cell::Int(v) => out.push_str(&v.to_string()),
                    Cell::Float(x) => {
                        out.push_str(&float_text(*x).unwrap_or_else(|| "null".into()))
                    }
                    Cell::Text(s) => out.push_str(&serde_json::Value::from(s.as_str()).to_string()),
                    Cell::Null => out.push_str("null"),
                }
            }
            out.push('}');
            if i + 1 < self.rows.len() {
                out.push(',');
            }
            out.push('\n');
        }
        out.push_str("]\n");
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

const PROVENANCE: [&str; 5] = ["seed", "n", "reps", "embedding", "version"];

fn with_provenance(extra: &[&str]) -> Table {
    let cols: Vec<&str> = PROVENANCE.iter().chain(extra).copied().collect();
    Table::new(&cols)
}

fn provenance(
    seed: Option<u64>,
    n: Option<usize>,
    reps: Option<usize>,
    embedding: Option<&str>,
) -> Vec<Cell> {
    vec![
        seed.into(),
        n.into(),
        reps.into(),
        embedding.into(),
        VERSION.into(),
    ]
}

/// Per-checkpoint means: one `total` row per functional, then the α and β
/// checkpoints.
pub fn cmd_simulate(config: &RunConfig) -> Result<Table> {
    let result = run_monte_carlo(&config.experiment_spec())?;
    let mut table = with_provenance(&[
        "checkpoint",
        "alpha_or_beta",
        "step",
        "functional",
        "mean",
        "stderr",
        "min",
        "max",
    ]);
    let prov = || {
        provenance(
            Some(config.seed),
            Some(config.n),
            Some(config.reps),
            Some(config.embedding.name()),
        )
    };
    let mut row = |kind: &str, at: Cell, step: usize, f: Functional, s: &crate::SummaryStats| {
        let mut r = prov();
        r.extend([
            kind.into(),
            at,
            step.into(),
            f.tag().into(),
            s.mean().into(),
            s.std_error().into(),
            s.min().into(),
            s.max().into(),
        ]);
        table.push(r);
    };
    for f in &result.functionals {
        row("total", Cell::Null, config.n - 1, f.functional, &f.total);
    }
    for f in &result.functionals {
        for c in &f.alpha {
            row("alpha", c.at.into(), c.step, f.functional, &c.stats);
        }
    }
    for f in &result.functionals {
        for c in &f.beta {
            row("beta", c.at.into(), c.step, f.functional, &c.stats);
        }
    }
    Ok(table)
}

/// `φ(α)` by quadrature next to the closed form and the tabulated curve.
/// A quadrature failure is reported in the row's `status`.
pub fn cmd_limit(config: &RunConfig) -> Result<Table> {
    if let Some(a) = config.alpha_grid.iter().find(|a| !(0.0..1.0).contains(*a)) {
        return Err(Error::InvalidArgument(format!("alpha {a} outside [0, 1)")));
    }
    let mut table = with_provenance(&[
        "alpha",
        "functional",
        "phi_normalized",
        "phi_closed_form",
        "phi_reference_table",
        "quadrature_error_estimate",
        "panels",
        "status",
    ]);
    for &f in &config.functionals {
        for &alpha in &config.alpha_grid {
            let quad = if f == Functional::QuickFindWeighted {
                phi_quadrature(&MinCost, alpha, config.tol)
            } else {
                phi_quadrature(&f, alpha, config.tol)
            };
            let closed = phi_closed_form(f, alpha).ok();
            let table_value = phi_reference_table(f, alpha)?;
            let mut r = provenance(None, None, None, None);
            r.extend([alpha.into(), f.tag().into()]);
            match quad {
                Ok(q) => r.extend([
                    q.value.into(),
                    closed.into(),
                    table_value.into(),
                    q.error_estimate.into(),
                    q.panels.into(),
                    "ok".into(),
                ]),
                Err(e) => r.extend([
                    Cell::Null,
                    closed.into(),
                    table_value.into(),
                    Cell::Null,
                    Cell::Null,
                    e.to_string().into(),
                ]),
            }
            table.push(r);
        }
    }
    Ok(table)
}

/// Exact tables; rationals as `p/q` strings next to their decimal value.
pub fn cmd_exact(config: &RunConfig) -> Result<Table> {
    let n = config.n;
    let prov = || provenance(None, Some(n), None, None);
    let table = match config.oracle {
        Oracle::Pmk => {
            if n < 2 {
                return Err(Error::InvalidArgument(format!(
                    "p_mk needs m >= 2, got {n}"
                )));
            }
            let mut t = with_provenance(&["k", "p_exact", "p"]);
            for k in 1..n {
                let (text, value) = if n <= exact::PMK_EXACT_MAX_M {
                    let r = exact::p_mk_exact(n, k)?;
                    (Cell::Text(ratio_string(&r)), ratio_to_f64(&r))
                } else {
                    (Cell::Null, exact::p_mk(n, k)?)
                };
                let mut r = prov();
                r.extend([k.into(), text, value.into()]);
                t.push(r);
            }
            t
        }
        Oracle::Borel => {
            let mut t = with_provenance(&["k", "p"]);
            for k in 1..=n as u64 {
                let mut r = prov();
                r.extend([k.into(), exact::borel_pmf(k)?.into()]);
                t.push(r);
            }
            t
        }
        Oracle::ConditionalPrey => {
            let law = exact::enumerate_parking(n)?;
            let mut t = with_provenance(&[
                "k",
                "l",
                "e_r_given_l",
                "formula",
                "matches",
                "e_r_given_l_decimal",
            ]);
            for k in 1..n {
                for (l, mean) in law.conditional_prey_mean(k) {
                    let formula = ratio((n - l) as u64, (n - k) as u64);
                    let mut r = prov();
                    r.extend([
                        k.into(),
                        l.into(),
                        ratio_string(&mean).into(),
                        ratio_string(&formula).into(),
                        (if mean == formula { "true" } else { "false" }).into(),
                        ratio_to_f64(&mean).into(),
                    ]);
                    t.push(r);
                }
            }
            t
        }
        Oracle::Dp => {
            let dp = exact::partition_dp(n)?;
            let mut t = with_provenance(&["functional", "e_total", "e_total_decimal"]);
            for &f in &config.functionals {
                let total = dp.expected_total(f, n - 1);
                let mut r = prov();
                r.extend([
                    f.tag().into(),
                    ratio_string(&total).into(),
                    ratio_to_f64(&total).into(),
                ]);
                t.push(r);
            }
            t
        }
        Oracle::Parking | Oracle::Trees => {
            let law = if config.oracle == Oracle::Parking {
                exact::enumerate_parking(n)?
            } else {
                exact::enumerate_spanning_trees(n)?
            };
            let mut t = with_provenance(&["k", "l", "r", "p_exact", "p"]);
            for (i, step) in law.predator_prey.iter().enumerate() {
                for ((l, rr), p) in step {
                    let mut r = prov();
                    r.extend([
                        (i + 1).into(),
                        (*l).into(),
                        (*rr).into(),
                        ratio_string(p).into(),
                        ratio_to_f64(p).into(),
                    ]);
                    t.push(r);
                }
            }
            t
        }
    };
    Ok(table)
}

/// Largest-cluster fraction at the two regime checkpoints.
pub fn cmd_sweep(config: &RunConfig) -> Result<Table> {
    let rows = regime_sweep(
        &config.n_list,
        config.epsilon,
        config.reps,
        config.seed,
        config.embedding,
        config.workers,
    )?;
    let mut table = with_provenance(&[
        "epsilon",
        "sparse_step",
        "sparse_mean",
        "sparse_stderr",
        "dense_step",
        "dense_mean",
        "dense_stderr",
    ]);
    for row in rows {
        let mut r = provenance(
            Some(config.seed),
            Some(row.n),
            Some(config.reps),
            Some(config.embedding.name()),
        );
        r.extend([
            config.epsilon.into(),
            row.sparse_step.into(),
            row.sparse.mean().into(),
            row.sparse.std_error().into(),
            row.dense_step.into(),
            row.dense.mean().into(),
            row.dense.std_error().into(),
        ]);
        table.push(r);
    }
    Ok(table)
}

/// Runs a table-producing subcommand and renders it.
pub fn run_table_command(config: &RunConfig) -> Result<String> {
    let table = match config.subcommand {
        Some(Command::Simulate) => cmd_simulate(config)?,
        Some(Command::Limit) => cmd_limit(config)?,
        Some(Command::Exact) => cmd_exact(config)?,
        Some(Command::Sweep) => cmd_sweep(config)?,
        Some(Command::Verify) | None => {
            return Err(Error::Config(
                "no table-producing subcommand selected".into(),
            ))
        }
    };
    Ok(table.render(config.format))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip() {
        let mut c = RunConfig {
            subcommand: Some(Command::Sweep),
            n: 777,
            embedding: EmbeddingKind::Parking,
            functionals: vec![Functional::QuickFind, Functional::Displacement],
            reps: 3,
            seed: u64::MAX,
            alpha_grid: vec![0.1, 1.0 / 3.0, 0.9],
            beta_grid: vec![],
            tol: 1e-9,
            out: Some("a b/out.csv".into()),
            format: Format::Json,
            workers: Some(8),
            raw_samples: Some("raw".into()),
            oracle: Oracle::ConditionalPrey,
            n_list: vec![10, 20],
            epsilon: 0.1,
            only: vec!["determinism".into()],
            mutate: true,
        };
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
        c = RunConfig::default();
        assert_eq!(RunConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn config_rejects_unknown_and_duplicate_keys() {
        assert!(matches!(
            RunConfig::parse("colour = red"),
            Err(Error::Config(_))
        ));
        assert!(RunConfig::parse("n = 3\nn = 4").is_err());
        assert!(RunConfig::parse("n = three").is_err());
        assert!(RunConfig::parse("just text").is_err());
        let c = RunConfig::parse("# comment\n\n n = 12 \n").unwrap();
        assert_eq!(c.n, 12);
    }

    #[test]
    fn every_key_is_settable() {
        let c = RunConfig {
            out: Some("x".into()),
            workers: Some(1),
            raw_samples: Some("r".into()),
            subcommand: Some(Command::Limit),
            ..RunConfig::default()
        };
        let text = c.to_text();
        for key in RunConfig::KEYS {
            assert!(
                text.lines().any(|l| l.starts_with(&format!("{key} ="))),
                "{key}"
            );
        }
    }

    #[test]
    fn csv_and_json_carry_identical_numbers() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![0.1f64.into(), Cell::Int(3), "x,y".into()]);
        t.push(vec![(1.0f64 / 3.0).into(), Cell::Null, f64::NAN.into()]);
        let csv = t.to_csv();
        let json: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        let csv_a: Vec<f64> = csv
            .lines()
            .skip(1)
            .map(|l| l.split(',').next().unwrap().parse().unwrap())
            .collect();
        let json_a: Vec<f64> = json
            .as_array()
            .unwrap()
            .iter()
            .map(|r| r["a"].as_f64().unwrap())
            .collect();
        assert_eq!(csv_a, json_a);
        assert_eq!(csv_a, vec![0.1, 1.0 / 3.0]);
        assert!(csv.contains("\"x,y\""));
        assert!(json[1]["c"].is_null());
    }

    #[test]
    fn simulate_n2() {
        let c = RunConfig {
            n: 2,
            reps: 1,
            ..RunConfig::default()
        };
        let t = cmd_simulate(&c).unwrap();
        let (kind, f, mean) = (
            t.column("checkpoint").unwrap(),
            t.column("functional").unwrap(),
            t.column("mean").unwrap(),
        );
        let totals: Vec<_> = t
            .rows
            .iter()
            .filter(|r| r[kind] == Cell::Text("total".into()))
            .collect();
        assert_eq!(totals.len(), 6);
        for r in totals {
            let want = if r[f] == Cell::Text("displacement".into()) {
                0.0
            } else {
                1.0
            };
            assert_eq!(r[mean], Cell::Float(want));
        }
        assert_eq!(&t.columns[..5], &PROVENANCE.map(String::from));
    }

    #[test]
    fn limit_rows() {
        let c = RunConfig {
            alpha_grid: vec![0.0, 0.5],
            ..RunConfig::default()
        };
        let t = cmd_limit(&c).unwrap();
        let (a, f, phi) = (
            t.column("alpha").unwrap(),
            t.column("functional").unwrap(),
            t.column("phi_normalized").unwrap(),
        );
        let err = t.column("quadrature_error_estimate").unwrap();
        for r in &t.rows {
            let Cell::Float(v) = r[phi] else {
                panic!("missing value")
            };
            if r[a] == Cell::Float(0.0) {
                assert_eq!(v, 0.0);
            }
            if r[a] == Cell::Float(0.5) && r[f] == Cell::Text("prey".into()) {
                assert!((v - std::f64::consts::LN_2).abs() < 1e-6);
            }
            if r[f] == Cell::Text("qfw".into()) {
                let Cell::Float(e) = r[err] else { panic!() };
                assert!(e < 1e-8);
            }
        }
        assert!(cmd_limit(&RunConfig {
            alpha_grid: vec![1.0],
            ..RunConfig::default()
        })
        .is_err());
    }

    #[test]
    fn exact_tables() {
        let c = RunConfig {
            n: 3,
            oracle: Oracle::Pmk,
            ..RunConfig::default()
        };
        let t = cmd_exact(&c).unwrap();
        let p = t.column("p_exact").unwrap();
        assert_eq!(
            t.rows.iter().map(|r| r[p].clone()).collect::<Vec<_>>(),
            vec!["1/3".into(), "2/3".into()]
        );

        let c = RunConfig {
            n: 4,
            oracle: Oracle::ConditionalPrey,
            ..RunConfig::default()
        };
        let t = cmd_exact(&c).unwrap();
        let m = t.column("matches").unwrap();
        assert!(!t.rows.is_empty() && t.rows.iter().all(|r| r[m] == "true".into()));

        let c = RunConfig {
            n: 3,
            oracle: Oracle::Dp,
            functionals: vec![Functional::Predator],
            ..RunConfig::default()
        };
        let t = cmd_exact(&c).unwrap();
        assert_eq!(t.rows[0][t.column("e_total").unwrap()], "8/3".into());

        let c = RunConfig {
            n: 9,
            oracle: Oracle::Parking,
            ..RunConfig::default()
        };
        assert!(matches!(cmd_exact(&c), Err(Error::OracleCap { .. })));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Config("x".into())), exit::USAGE);
        assert_eq!(exit_code(&Error::Precondition("x".into())), exit::RUNTIME);
        let rec: serde_json::Value =
            serde_json::from_str(&error_record(&Error::Config("bad".into()))).unwrap();
        assert_eq!(rec["error"], "config");
    }
}
