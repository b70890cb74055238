//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when arguments or inputs fail validation, 2
//! when a run fails (an oracle tolerance breach, nothing feasible to run, or
//! an I/O error after validation).

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::json;

use crate::experiment::{self, parse_finite, ExperimentConfig};
use crate::limits::{self, Radii, TwoPathPattern};
use crate::model::{read_dump, Community, GbmParams, SampledGraph};
use crate::quadrature::{self, QuadratureConfig};
use crate::stats::compute_stats;

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "GBM_LAB_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "gbm-lab",
    version,
    about = "Clustering coefficients of the geometric block model"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample one graph and write its node/edge dump.
    Sample {
        #[command(flatten)]
        model: ModelArgs,
        /// Output file for the dump.
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact statistics of a sampled or dumped graph.
    Stats {
        #[command(flatten)]
        model: OptionalModelArgs,
        /// Read a graph dump instead of sampling.
        #[arg(long, conflicts_with_all = ["n", "tau", "rs", "rd", "seed"])]
        graph: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate the closed-form limits.
    Limits {
        #[arg(long, value_parser = finite_arg, conflicts_with_all = ["rs", "rd"])]
        lambda: Option<f64>,
        #[arg(long, value_parser = finite_arg)]
        tau: f64,
        #[arg(long, value_parser = finite_arg, requires = "rd")]
        rs: Option<f64>,
        #[arg(long, value_parser = finite_arg, requires = "rs")]
        rd: Option<f64>,
        #[arg(long)]
        json: bool,
    },
    /// Check the triangle and 2-path probabilities against quadrature.
    OracleCheck {
        #[arg(long, default_value_t = quadrature::DEFAULT_GRID_M)]
        grid_m: usize,
    },
    /// Run a Monte Carlo sweep described by a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        /// Overrides `output_path` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: available parallelism).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Write fig1.csv and fig2.csv.
    Figures {
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_parser = finite_arg)]
    pub tau: f64,
    #[arg(long, value_parser = finite_arg)]
    pub rs: f64,
    #[arg(long, value_parser = finite_arg)]
    pub rd: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OptionalModelArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_parser = finite_arg)]
    pub tau: Option<f64>,
    #[arg(long, value_parser = finite_arg)]
    pub rs: Option<f64>,
    #[arg(long, value_parser = finite_arg)]
    pub rd: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

fn finite_arg(s: &str) -> Result<f64, String> {
    parse_finite(s)
}

/// A failed invocation and its exit code.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 1,
            CliError::Runtime(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Invalid(m) | CliError::Runtime(m) => m,
        }
    }
}

fn invalid(e: impl ToString) -> CliError {
    CliError::Invalid(e.to_string())
}

fn runtime(e: impl ToString) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Parses `args` (program name first) and runs the command, returning the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(cli.command, &mut out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Runs one command, printing its report to `out`.
pub fn execute<W: Write>(command: Command, out: &mut W) -> Result<(), CliError> {
    match command {
        Command::Sample { model, out: path } => cmd_sample(model, &path, out),
        Command::Stats { model, graph, json } => cmd_stats(model, graph, json, out),
        Command::Limits {
            lambda,
            tau,
            rs,
            rd,
            json,
        } => cmd_limits(lambda, tau, rs.zip(rd), json, out),
        Command::OracleCheck { grid_m } => cmd_oracle_check(grid_m, out),
        Command::Experiment {
            config,
            out: path,
            threads,
        } => cmd_experiment(&config, path, threads, out),
        Command::Figures { out_dir } => cmd_figures(&out_dir, out),
    }
}

fn create_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| invalid(format!("cannot write {}: {e}", path.display())))
}

fn cmd_sample<W: Write>(model: ModelArgs, path: &Path, out: &mut W) -> Result<(), CliError> {
    let params = GbmParams::new(model.n, model.tau, model.rs, model.rd, model.seed).map_err(invalid)?;
    let file = create_file(path)?;
    let graph = SampledGraph::sample(&params);
    let adj = graph.build_adjacency();
    graph.write_dump(&adj, file).map_err(runtime)?;
    writeln!(out, "nodes: {}", adj.len()).map_err(runtime)?;
    writeln!(out, "edges: {}", adj.edge_count()).map_err(runtime)?;
    writeln!(out, "mean_degree: {}", 2.0 * adj.edge_count() as f64 / adj.len() as f64).map_err(runtime)?;
    Ok(())
}

#[derive(Serialize)]
struct StatsReport {
    nodes: usize,
    edges: usize,
    triangles: u64,
    twopath_sum: u64,
    global_cc: Option<f64>,
    average_cc: f64,
    mean_degree: f64,
}

fn cmd_stats<W: Write>(
    model: OptionalModelArgs,
    graph: Option<PathBuf>,
    json: bool,
    out: &mut W,
) -> Result<(), CliError> {
    let adj = match graph {
        Some(path) => {
            let file = File::open(&path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
            read_dump(BufReader::new(file)).map_err(invalid)?.adjacency
        }
        None => {
            let missing = |f: &str| invalid(format!("{f}: required unless --graph is given"));
            let params = GbmParams::new(
                model.n.ok_or_else(|| missing("n"))?,
                model.tau.ok_or_else(|| missing("tau"))?,
                model.rs.ok_or_else(|| missing("rs"))?,
                model.rd.ok_or_else(|| missing("rd"))?,
                model.seed.unwrap_or(0),
            )
            .map_err(invalid)?;
            SampledGraph::sample(&params).build_adjacency()
        }
    };
    let stats = compute_stats(&adj);
    let report = StatsReport {
        nodes: adj.len(),
        edges: adj.edge_count(),
        triangles: stats.triangle_count,
        twopath_sum: stats.twopath_sum,
        global_cc: stats.global_cc,
        average_cc: stats.average_cc,
        mean_degree: if adj.is_empty() {
            0.0
        } else {
            2.0 * adj.edge_count() as f64 / adj.len() as f64
        },
    };
    if json {
        writeln!(out, "{}", serde_json::to_string(&report).map_err(runtime)?).map_err(runtime)?;
    } else {
        let global = report
            .global_cc
            .map_or_else(|| "undefined (no 2-paths)".to_string(), |g| g.to_string());
        writeln!(
            out,
            "nodes: {}\nedges: {}\ntriangles: {}\ntwopath_sum: {}\nglobal_cc: {global}\naverage_cc: {}\nmean_degree: {}",
            report.nodes, report.edges, report.triangles, report.twopath_sum, report.average_cc, report.mean_degree
        )
        .map_err(runtime)?;
    }
    Ok(())
}

fn cmd_limits<W: Write>(
    lambda: Option<f64>,
    tau: f64,
    radii: Option<(f64, f64)>,
    json: bool,
    out: &mut W,
) -> Result<(), CliError> {
    let report = match (lambda, radii) {
        (Some(lambda), _) => {
            let g = limits::g_of(lambda, tau).map_err(invalid)?;
            let h = limits::h_of(lambda, tau).map_err(invalid)?;
            let regime = if lambda < 2.0 {
                limits::Regime::Weak
            } else {
                limits::Regime::Strong
            };
            let star = limits::lambda_star(tau).ok();
            json!({
                "lambda": lambda,
                "tau": tau,
                "regime": regime,
                "global_limit": g,
                "average_limit": h,
                "lambda_star": star,
            })
        }
        (None, Some((r_s, r_d))) => {
            let radii = Radii::new(r_s, r_d).map_err(invalid)?;
            let eval = limits::evaluate(radii, tau).map_err(invalid)?;
            json!({
                "r_s": r_s,
                "r_d": r_d,
                "tau": tau,
                "regime": eval.regime,
                "global_limit": eval.global_limit,
                "average_limit": eval.average_limit,
                "triangle_prob_same": eval.triangle_prob_same,
                "triangle_prob_mixed": eval.triangle_prob_mixed,
                "twopath_prob_all_same": eval.twopath_probs[0],
                "twopath_prob_center_shares_one": eval.twopath_probs[1],
                "twopath_prob_leaves_share": eval.twopath_probs[2],
            })
        }
        (None, None) => return Err(invalid("give either --lambda or both --rs and --rd")),
    };
    if json {
        writeln!(out, "{report}").map_err(runtime)?;
    } else if let Some(fields) = report.as_object() {
        for (key, value) in fields {
            let text = match value {
                serde_json::Value::Null => "undefined".to_string(),
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            writeln!(out, "{key}: {text}").map_err(runtime)?;
        }
    }
    Ok(())
}

/// One comparison of the oracle suite.
#[derive(Debug, Clone, Serialize)]
pub struct OracleCase {
    pub name: String,
    pub estimate: f64,
    pub expected: f64,
    pub tolerance: f64,
}

impl OracleCase {
    pub fn deviation(&self) -> f64 {
        (self.estimate - self.expected).abs()
    }
    pub fn passed(&self) -> bool {
        self.deviation() <= self.tolerance
    }
}

/// Absolute tolerance of quadrature versus closed form.
pub const ORACLE_TOLERANCE: f64 = 5e-3;
/// Largest allowed spread of the triangle estimate across anchors.
pub const ANCHOR_TOLERANCE: f64 = 1e-3;
/// Radius pairs covering both regimes and the structure-free case.
pub const ORACLE_RADII: [(f64, f64); 4] = [(0.1, 0.1), (0.1, 0.08), (0.2, 0.08), (0.15, 0.05)];

/// The full quadrature suite: triangles with all-same and mixed labels
/// (conditioned on a same-label node and on the odd one out), every 2-path
/// pattern, and anchor invariance for the mixed triangle.
pub fn oracle_suite(grid_m: usize) -> Result<Vec<OracleCase>, quadrature::QuadratureError> {
    use Community::{One, Two};
    let base = QuadratureConfig::with_grid(grid_m);
    base.validate()?;
    let mut cases = Vec::new();
    for (r_s, r_d) in ORACLE_RADII {
        let radii = Radii::new(r_s, r_d).expect("suite radii are valid");
        for (labels, conditioned, same) in [
            ([One, One, One], 0, true),
            ([One, One, Two], 0, false),
            ([One, One, Two], 2, false),
        ] {
            let cfg = QuadratureConfig { conditioned, ..base };
            cases.push(OracleCase {
                name: format!("triangle r_s={r_s} r_d={r_d} labels={labels:?} pinned=node{conditioned}"),
                estimate: quadrature::triangle_prob_quadrature(r_s, r_d, labels, &cfg)?,
                expected: limits::triangle_prob(radii, same),
                tolerance: ORACLE_TOLERANCE,
            });
        }
        for pattern in TwoPathPattern::ALL {
            let labels = pattern.representative();
            cases.push(OracleCase {
                name: format!("2-path r_s={r_s} r_d={r_d} pattern={pattern}"),
                estimate: quadrature::twopath_prob_quadrature(r_s, r_d, labels, &base)?,
                expected: limits::twopath_prob(radii, pattern),
                tolerance: ORACLE_TOLERANCE,
            });
        }
        cases.push(OracleCase {
            name: format!("anchor spread r_s={r_s} r_d={r_d} anchors=[0.1, 0.5, 0.9]"),
            estimate: quadrature::anchor_invariance_check(r_s, r_d, [One, One, Two], &[0.1, 0.5, 0.9], &base)?,
            expected: 0.0,
            tolerance: ANCHOR_TOLERANCE,
        });
    }
    Ok(cases)
}

fn cmd_oracle_check<W: Write>(grid_m: usize, out: &mut W) -> Result<(), CliError> {
    let cases = oracle_suite(grid_m).map_err(invalid)?;
    let mut failures = Vec::new();
    for case in &cases {
        let verdict = if case.passed() { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "{verdict} {} estimate={:.6e} expected={:.6e} deviation={:.3e}",
            case.name,
            case.estimate,
            case.expected,
            case.deviation()
        )
        .map_err(runtime)?;
        if !case.passed() {
            failures.push(case.name.clone());
        }
    }
    let max = cases.iter().map(OracleCase::deviation).fold(0.0, f64::max);
    writeln!(out, "grid_m: {grid_m}\nmax_deviation: {max:.3e}").map_err(runtime)?;
    if failures.is_empty() {
        writeln!(out, "result: pass").map_err(runtime)?;
        Ok(())
    } else {
        writeln!(out, "result: fail").map_err(runtime)?;
        Err(runtime(format!("tolerance breached in: {}", failures.join("; "))))
    }
}

/// Thread count: the environment variable wins over the flag, which wins
/// over available parallelism.
pub fn resolve_threads(flag: Option<usize>) -> Result<usize, CliError> {
    if let Ok(value) = std::env::var(THREADS_ENV) {
        return match value.trim().parse::<usize>() {
            Ok(t) if t >= 1 => Ok(t),
            _ => Err(invalid(format!(
                "{THREADS_ENV}: expected a positive integer, got '{value}'"
            ))),
        };
    }
    match flag {
        Some(0) => Err(invalid("threads: must be at least 1")),
        Some(t) => Ok(t),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn cmd_experiment<W: Write>(
    config_path: &Path,
    out_path: Option<PathBuf>,
    threads: Option<usize>,
    out: &mut W,
) -> Result<(), CliError> {
    let text =
        fs::read_to_string(config_path).map_err(|e| invalid(format!("cannot read {}: {e}", config_path.display())))?;
    let config = ExperimentConfig::parse(&text).map_err(invalid)?;
    let threads = resolve_threads(threads)?;
    let path = out_path
        .or_else(|| config.output_path.clone())
        .ok_or_else(|| invalid("no output path: set output_path in the config or pass --out"))?;
    let file = create_file(&path)?;
    let outcome = crate::exec::with_threads(threads, || experiment::run_experiment(&config)).map_err(invalid)?;
    for skipped in &outcome.infeasible {
        eprintln!(
            "warning: skipped cell n={} lambda={} tau={}: {}",
            skipped.cell.n, skipped.cell.lambda, skipped.cell.tau, skipped.reason
        );
    }
    if outcome.records.is_empty() {
        drop(file);
        let _ = fs::remove_file(&path);
        return Err(runtime("every cell of the sweep is infeasible"));
    }
    experiment::write_records_csv(&outcome.records, file).map_err(runtime)?;
    let summaries = experiment::summarize(&outcome.records);
    writeln!(out, "records: {}", outcome.records.len()).map_err(runtime)?;
    writeln!(out, "infeasible_cells: {}", outcome.infeasible.len()).map_err(runtime)?;
    for s in &summaries {
        writeln!(
            out,
            "n={} lambda={} tau={} mean_global={:.6} limit={:.6} mean_average={:.6} limit={:.6} undefined={}",
            s.n, s.lambda, s.tau, s.mean_global_cc, s.global_limit, s.mean_average_cc, s.average_limit, s.undefined
        )
        .map_err(runtime)?;
    }
    writeln!(out, "wrote: {}", path.display()).map_err(runtime)?;
    Ok(())
}

fn cmd_figures<W: Write>(dir: &Path, out: &mut W) -> Result<(), CliError> {
    if !dir.is_dir() {
        fs::create_dir_all(dir).map_err(|e| invalid(format!("cannot create {}: {e}", dir.display())))?;
    }
    let fig1_path = dir.join("fig1.csv");
    let fig2_path = dir.join("fig2.csv");
    let fig1_file = create_file(&fig1_path)?;
    let fig2_file = create_file(&fig2_path)?;
    let fig1 = experiment::figure1_data(&experiment::default_lambda_grid());
    let fig2 = experiment::figure2_data(&experiment::FIGURE2_LAMBDAS, &experiment::default_tau_grid());
    experiment::write_figure1_csv(&fig1, fig1_file).map_err(runtime)?;
    experiment::write_figure2_csv(&fig2, fig2_file).map_err(runtime)?;
    writeln!(out, "wrote: {} ({} rows)", fig1_path.display(), fig1.len()).map_err(runtime)?;
    writeln!(out, "wrote: {} ({} rows)", fig2_path.display(), fig2.len()).map_err(runtime)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn capture(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("gbm-lab").chain(args.iter().copied()))
            .map_err(|e| CliError::Invalid(e.to_string()))?;
        let mut buf = Vec::new();
        execute(cli.command, &mut buf)?;
        Ok(String::from_utf8(buf).unwrap())
    }

    #[test]
    fn limits_lambda_form() {
        let text = capture(&["limits", "--lambda", "4", "--tau", "0.5"]).unwrap();
        assert!(text.contains("global_limit: 0.6"), "{text}");
        assert!(text.contains("lambda_star: 4"), "{text}");
        let text = capture(&["limits", "--lambda", "1", "--tau", "0.3"]).unwrap();
        assert!(text.contains("global_limit: 0.75"), "{text}");
    }

    #[test]
    fn limits_radius_form() {
        let text = capture(&["limits", "--rs", "0.1", "--rd", "0.1", "--tau", "0.2"]).unwrap();
        assert!(text.contains("regime: weak"), "{text}");
        let raw = capture(&["limits", "--rs", "0.1", "--rd", "0.1", "--tau", "0.2", "--json"]).unwrap();
        let value: serde_json::Value = serde_json::from_str(raw.trim()).unwrap();
        assert!((value["global_limit"].as_f64().unwrap() - 0.75).abs() < 1e-12);
        assert!((value["average_limit"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    }

    #[test]
    fn limits_json_contains_printed_fields() {
        let human = capture(&["limits", "--lambda", "3", "--tau", "0.2"]).unwrap();
        let raw = capture(&["limits", "--lambda", "3", "--tau", "0.2", "--json"]).unwrap();
        let value: serde_json::Value = serde_json::from_str(raw.trim()).unwrap();
        let obj = value.as_object().unwrap();
        for line in human.lines() {
            let key = line.split(':').next().unwrap();
            assert!(obj.contains_key(key), "missing {key}");
        }
    }

    #[test]
    fn limits_validation() {
        let err = capture(&["limits", "--lambda", "0.5", "--tau", "0.5"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        let err = capture(&["limits", "--rs", "0.05", "--rd", "0.1", "--tau", "0.5"]).unwrap_err();
        assert!(err.message().contains("radius-order violation"));
        assert!(capture(&["limits", "--lambda", "NaN", "--tau", "0.5"]).is_err());
        assert!(capture(&["limits", "--tau", "0.5"]).is_err());
    }

    #[test]
    fn oracle_check_rejects_small_grid() {
        let err = capture(&["oracle-check", "--grid-m", "63"]).unwrap_err();
        assert_eq!(err.exit_code(), 1);
    }

    #[test]
    fn stats_reports_undefined() {
        let text = capture(&["stats", "--n", "3", "--tau", "1", "--rs", "0", "--rd", "0"]).unwrap();
        assert!(text.contains("global_cc: undefined"), "{text}");
        let raw = capture(&["stats", "--n", "3", "--tau", "1", "--rs", "0", "--rd", "0", "--json"]).unwrap();
        let value: serde_json::Value = serde_json::from_str(raw.trim()).unwrap();
        assert!(value["global_cc"].is_null());
    }

    #[test]
    fn thread_flag_zero_is_rejected() {
        if std::env::var(THREADS_ENV).is_err() {
            assert!(resolve_threads(Some(0)).is_err());
            assert_eq!(resolve_threads(Some(3)).unwrap(), 3);
        }
    }
}
