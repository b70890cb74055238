//! Seeded Monte Carlo sweeps and figure tables.
//!
//! A sweep is the product `n_values x lambda_values x tau_values`; each cell
//! is replicated `replicates` times. Replicate `k` of cell `c` samples with
//! seed `derive_seed(base_seed, [c, k])`, so records never depend on thread
//! count or scheduling.

use std::fmt;
use std::io::{self, Write};
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::exec::{compensated_sum, Exec};
use crate::fmt_f64;
use crate::limits::{self, Radii};
use crate::model::{derive_seed, GbmParams, SampledGraph};

/// The six `lambda` values of the `h` versus `g` comparison figure.
pub const FIGURE2_LAMBDAS: [f64; 6] = [1.5, 2.0, 5.0, 10.0, 25.0, 50.0];

/// How the between-community radius depends on `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RadiusRule {
    /// Same `r_d` for every `n`.
    Fixed(f64),
    /// `r_d = c / n^alpha`.
    Power { c: f64, alpha: f64 },
    /// `r_d = b ln(n) / n`.
    Log { b: f64 },
}

impl RadiusRule {
    pub fn radius(&self, n: usize) -> f64 {
        let n = n as f64;
        match *self {
            RadiusRule::Fixed(r) => r,
            RadiusRule::Power { c, alpha } => c / n.powf(alpha),
            RadiusRule::Log { b } => b * n.ln() / n,
        }
    }
}

impl fmt::Display for RadiusRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusRule::Fixed(r) => write!(f, "{r}"),
            RadiusRule::Power { c, alpha } => write!(f, "power:{c}:{alpha}"),
            RadiusRule::Log { b } => write!(f, "log:{b}"),
        }
    }
}

impl FromStr for RadiusRule {
    type Err = String;

    /// Accepts `0.01`, `fixed:0.01`, `power:C:ALPHA` or `log:B`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| parse_finite(t);
        let rule = match parts.as_slice() {
            [r] | ["fixed", r] => RadiusRule::Fixed(num(r)?),
            ["power", c, alpha] => RadiusRule::Power {
                c: num(c)?,
                alpha: num(alpha)?,
            },
            ["log", b] => RadiusRule::Log { b: num(b)? },
            _ => return Err(format!("unrecognised radius rule '{s}'")),
        };
        let positive = match rule {
            RadiusRule::Fixed(r) => r > 0.0,
            RadiusRule::Power { c, .. } => c > 0.0,
            RadiusRule::Log { b } => b > 0.0,
        };
        if positive {
            Ok(rule)
        } else {
            Err(format!("radius rule '{s}' must give a positive radius"))
        }
    }
}

/// Parses a float and rejects NaN and infinities.
pub fn parse_finite(s: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|e| format!("'{s}' is not a number: {e}"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{s}' is not finite"))
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("missing key '{0}'")]
    Missing(&'static str),
    #[error("{0}")]
    Invalid(String),
}

/// A Monte Carlo sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub n_values: Vec<usize>,
    pub lambda_values: Vec<f64>,
    pub tau_values: Vec<f64>,
    pub r_d: RadiusRule,
    pub replicates: usize,
    pub base_seed: u64,
    pub output_path: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let invalid = |m: String| Err(ConfigError::Invalid(m));
        if self.n_values.is_empty() || self.lambda_values.is_empty() || self.tau_values.is_empty() {
            return invalid("n_values, lambda_values and tau_values must be non-empty".into());
        }
        if self.replicates < 1 {
            return invalid("replicates must be at least 1".into());
        }
        if let Some(&n) = self.n_values.iter().find(|&&n| n < 1) {
            return invalid(format!("n_values: node count must be at least 1 (got {n})"));
        }
        if let Some(&l) = self.lambda_values.iter().find(|l| !(l.is_finite() && **l >= 1.0)) {
            return invalid(format!("lambda_values: lambda must be >= 1 (got {l})"));
        }
        if let Some(&t) = self.tau_values.iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return invalid(format!("tau_values: tau must lie in [0, 1] (got {t})"));
        }
        Ok(())
    }

    /// Cells in sweep order (`n` outermost, then `lambda`, then `tau`).
    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for &n in &self.n_values {
            let r_d = self.r_d.radius(n);
            for &lambda in &self.lambda_values {
                for &tau in &self.tau_values {
                    cells.push(Cell {
                        index: cells.len(),
                        n,
                        lambda,
                        tau,
                        r_d,
                        r_s: lambda * r_d,
                    });
                }
            }
        }
        cells
    }

    /// Parses the flat `key = value` format. Lists are comma separated, `#`
    /// starts a comment.
    ///
    /// ```text
    /// n_values = 1024, 4096
    /// lambda_values = 1, 2, 4
    /// tau_values = 0.5
    /// r_d = 0.01            # or power:C:ALPHA, log:B
    /// replicates = 20
    /// base_seed = 42
    /// output_path = sweep.csv
    /// ```
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut n_values = None;
        let mut lambda_values = None;
        let mut tau_values = None;
        let mut r_d = None;
        let mut replicates = None;
        let mut base_seed = None;
        let mut output_path = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let syntax = |message: String| ConfigError::Syntax { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| syntax(format!("expected key = value, got '{content}'")))?;
            let (key, value) = (key.trim(), value.trim());
            let floats = || -> Result<Vec<f64>, ConfigError> {
                value.split(',').map(|v| parse_finite(v).map_err(syntax)).collect()
            };
            match key {
                "n_values" => {
                    let ns = value
                        .split(',')
                        .map(|v| v.trim().parse::<usize>().map_err(|e| syntax(format!("n_values: {e}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    n_values = Some(ns);
                }
                "lambda_values" => lambda_values = Some(floats()?),
                "tau_values" => tau_values = Some(floats()?),
                "r_d" => r_d = Some(value.parse::<RadiusRule>().map_err(syntax)?),
                "replicates" => {
                    replicates = Some(value.parse::<usize>().map_err(|e| syntax(format!("replicates: {e}")))?)
                }
                "base_seed" => base_seed = Some(value.parse::<u64>().map_err(|e| syntax(format!("base_seed: {e}")))?),
                "output_path" => output_path = Some(PathBuf::from(value)),
                other => return Err(syntax(format!("unknown key '{other}'"))),
            }
        }
        let config = ExperimentConfig {
            n_values: n_values.ok_or(ConfigError::Missing("n_values"))?,
            lambda_values: lambda_values.ok_or(ConfigError::Missing("lambda_values"))?,
            tau_values: tau_values.ok_or(ConfigError::Missing("tau_values"))?,
            r_d: r_d.ok_or(ConfigError::Missing("r_d"))?,
            replicates: replicates.ok_or(ConfigError::Missing("replicates"))?,
            base_seed: base_seed.unwrap_or(0),
            output_path,
        };
        config.validate()?;
        Ok(config)
    }
}

/// One `(n, lambda, tau)` combination of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cell {
    pub index: usize,
    pub n: usize,
    pub lambda: f64,
    pub tau: f64,
    pub r_d: f64,
    pub r_s: f64,
}

/// A cell that could not be run, e.g. because `lambda * r_d > 0.5`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InfeasibleCell {
    pub cell: Cell,
    pub reason: String,
}

/// One Monte Carlo replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub cell: usize,
    pub n: usize,
    pub tau: f64,
    pub lambda: f64,
    pub r_s: f64,
    pub r_d: f64,
    pub replicate: usize,
    pub seed: u64,
    /// `None` when the sampled graph had no 2-path.
    pub global_cc: Option<f64>,
    pub average_cc: f64,
    pub global_limit: f64,
    pub average_limit: f64,
    pub global_abs_err: Option<f64>,
    pub average_abs_err: f64,
}

impl ExperimentRecord {
    pub fn undefined(&self) -> bool {
        self.global_cc.is_none()
    }
}

/// Records of the feasible cells plus the cells that were skipped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutcome {
    pub records: Vec<ExperimentRecord>,
    pub infeasible: Vec<InfeasibleCell>,
}

struct ReadyCell {
    cell: Cell,
    params: GbmParams,
    global_limit: f64,
    average_limit: f64,
}

fn prepare(cell: Cell) -> Result<ReadyCell, String> {
    let params = GbmParams::new(cell.n, cell.tau, cell.r_s, cell.r_d, 0).map_err(|e| e.to_string())?;
    let radii = Radii::new(cell.r_s, cell.r_d).map_err(|e| e.to_string())?;
    Ok(ReadyCell {
        cell,
        params,
        global_limit: limits::global_cc_limit(radii, cell.tau).map_err(|e| e.to_string())?,
        average_limit: limits::avg_cc_limit(radii, cell.tau).map_err(|e| e.to_string())?,
    })
}

/// Runs a sweep with the default execution strategy.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome, ConfigError> {
    run_experiment_with(config, Exec::default())
}

/// Runs a sweep. Replicates are independent jobs; the output is ordered by
/// `(cell, replicate)` whatever the strategy.
pub fn run_experiment_with(config: &ExperimentConfig, exec: Exec) -> Result<ExperimentOutcome, ConfigError> {
    config.validate()?;
    let mut ready = Vec::new();
    let mut infeasible = Vec::new();
    for cell in config.cells() {
        match prepare(cell) {
            Ok(r) => ready.push(r),
            Err(reason) => infeasible.push(InfeasibleCell { cell, reason }),
        }
    }
    let reps = config.replicates;
    let records = exec.map(ready.len() * reps, |job| {
        let rc = &ready[job / reps];
        let replicate = job % reps;
        let seed = derive_seed(config.base_seed, &[rc.cell.index as u64, replicate as u64]);
        let graph = SampledGraph::sample(&rc.params.with_seed(seed));
        // Nested parallelism would only contend with the replicate loop.
        let stats = crate::stats::compute_stats_with(&graph.build_adjacency(), Exec::Sequential);
        ExperimentRecord {
            cell: rc.cell.index,
            n: rc.cell.n,
            tau: rc.cell.tau,
            lambda: rc.cell.lambda,
            r_s: rc.cell.r_s,
            r_d: rc.cell.r_d,
            replicate,
            seed,
            global_cc: stats.global_cc,
            average_cc: stats.average_cc,
            global_limit: rc.global_limit,
            average_limit: rc.average_limit,
            global_abs_err: stats.global_cc.map(|c| (c - rc.global_limit).abs()),
            average_abs_err: (stats.average_cc - rc.average_limit).abs(),
        }
    });
    Ok(ExperimentOutcome { records, infeasible })
}

/// Column names of the record CSV.
pub const RECORD_HEADER: &str = "n,tau,lambda,r_s,r_d,replicate,seed,global_cc,average_cc,\
global_limit,average_limit,global_abs_err,average_abs_err,undefined";

/// Writes records as CSV. Undefined global values are empty fields and the
/// last column is `1` for such rows.
pub fn write_records_csv<W: Write>(records: &[ExperimentRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{RECORD_HEADER}")?;
    let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            fmt_f64(r.tau),
            fmt_f64(r.lambda),
            fmt_f64(r.r_s),
            fmt_f64(r.r_d),
            r.replicate,
            r.seed,
            opt(r.global_cc),
            fmt_f64(r.average_cc),
            fmt_f64(r.global_limit),
            fmt_f64(r.average_limit),
            opt(r.global_abs_err),
            fmt_f64(r.average_abs_err),
            u8::from(r.undefined()),
        )?;
    }
    out.flush()
}

/// Per-cell means over the defined replicates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub cell: usize,
    pub n: usize,
    pub lambda: f64,
    pub tau: f64,
    pub replicates: usize,
    pub undefined: usize,
    pub mean_global_cc: f64,
    pub mean_average_cc: f64,
    pub global_limit: f64,
    pub average_limit: f64,
}

impl CellSummary {
    pub fn global_gap(&self) -> f64 {
        (self.mean_global_cc - self.global_limit).abs()
    }
    pub fn average_gap(&self) -> f64 {
        (self.mean_average_cc - self.average_limit).abs()
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.into_iter().collect();
    if v.is_empty() {
        f64::NAN
    } else {
        compensated_sum(v.iter().copied()) / v.len() as f64
    }
}

/// Groups records by cell. Undefined replicates are counted and left out of
/// every mean.
pub fn summarize(records: &[ExperimentRecord]) -> Vec<CellSummary> {
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.cell, r.replicate));
    sorted
        .chunk_by(|a, b| a.cell == b.cell)
        .map(|group| {
            let first = group[0];
            let defined: Vec<&&ExperimentRecord> = group.iter().filter(|r| !r.undefined()).collect();
            CellSummary {
                cell: first.cell,
                n: first.n,
                lambda: first.lambda,
                tau: first.tau,
                replicates: group.len(),
                undefined: group.len() - defined.len(),
                mean_global_cc: mean(defined.iter().filter_map(|r| r.global_cc)),
                mean_average_cc: mean(defined.iter().map(|r| r.average_cc)),
                global_limit: first.global_limit,
                average_limit: first.average_limit,
            }
        })
        .collect()
}

/// Mean absolute errors at one `n`, pooled over all cells with that `n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub mean_abs_err_global: f64,
    pub mean_abs_err_average: f64,
    pub used: usize,
    pub undefined: usize,
}

/// Runs the sweep and tabulates the error against `n`.
pub fn convergence_study(config: &ExperimentConfig) -> Result<Vec<ConvergenceRow>, ConfigError> {
    Ok(convergence_table(&run_experiment(config)?.records))
}

/// Error table from existing records, one row per distinct `n` in
/// increasing order.
pub fn convergence_table(records: &[ExperimentRecord]) -> Vec<ConvergenceRow> {
    let mut sorted: Vec<&ExperimentRecord> = records.iter().collect();
    sorted.sort_by_key(|r| (r.n, r.cell, r.replicate));
    sorted
        .chunk_by(|a, b| a.n == b.n)
        .map(|group| {
            let defined: Vec<&&ExperimentRecord> = group.iter().filter(|r| !r.undefined()).collect();
            ConvergenceRow {
                n: group[0].n,
                mean_abs_err_global: mean(defined.iter().filter_map(|r| r.global_abs_err)),
                mean_abs_err_average: mean(defined.iter().map(|r| r.average_abs_err)),
                used: defined.len(),
                undefined: group.len() - defined.len(),
            }
        })
        .collect()
}

/// `(lambda, f(lambda))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure1Row {
    pub lambda: f64,
    pub f: f64,
}

/// `(lambda, tau, h, g)`; the reference level is [`RGG_LIMIT`](crate::limits::RGG_LIMIT).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Figure2Row {
    pub lambda: f64,
    pub tau: f64,
    pub h: f64,
    pub g: f64,
}

/// `lambda` from 1 to 10 in steps of 0.01. Each point is computed as an
/// exact quotient so that landmarks such as 4.00 are hit exactly.
pub fn default_lambda_grid() -> Vec<f64> {
    (100..=1000).map(|i| i as f64 / 100.0).collect()
}

/// `tau` from 0.01 to 0.99 in steps of 0.01.
pub fn default_tau_grid() -> Vec<f64> {
    (1..=99).map(|i| i as f64 / 100.0).collect()
}

/// Rows of `f` over `lambda_grid`; points below 1 are skipped.
pub fn figure1_data(lambda_grid: &[f64]) -> Vec<Figure1Row> {
    lambda_grid
        .iter()
        .filter_map(|&lambda| limits::f_of(lambda).ok().map(|f| Figure1Row { lambda, f }))
        .collect()
}

/// Rows of `h` and `g` for each `lambda` (outer) and `tau` (inner); invalid
/// points are skipped.
pub fn figure2_data(lambdas: &[f64], taus: &[f64]) -> Vec<Figure2Row> {
    lambdas
        .iter()
        .flat_map(|&lambda| {
            taus.iter().filter_map(move |&tau| {
                let h = limits::h_of(lambda, tau).ok()?;
                let g = limits::g_of(lambda, tau).ok()?;
                Some(Figure2Row { lambda, tau, h, g })
            })
        })
        .collect()
}

pub fn write_figure1_csv<W: Write>(rows: &[Figure1Row], mut out: W) -> io::Result<()> {
    writeln!(out, "lambda,f")?;
    for r in rows {
        writeln!(out, "{},{}", fmt_f64(r.lambda), fmt_f64(r.f))?;
    }
    out.flush()
}

pub fn write_figure2_csv<W: Write>(rows: &[Figure2Row], mut out: W) -> io::Result<()> {
    writeln!(out, "lambda,tau,h,g")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(r.lambda),
            fmt_f64(r.tau),
            fmt_f64(r.h),
            fmt_f64(r.g)
        )?;
    }
    out.flush()
}
