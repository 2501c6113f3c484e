//! The `pmi` command-line front end. Every command prints one JSON report;
//! the process exit code is 0 on success, 2 on unreadable or malformed
//! input, 3 on validation or hypothesis failures and 4 on numerical failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::bounds::{best_upper_bound, lower_bound, DEFAULT_ALPHAS};
use crate::clifford::CliffordEncoding;
use crate::ensemble::{DistributionKind, Ensemble, DEFAULT_MAX_VECTORS};
use crate::error::{Error, Result};
use crate::games::{no_relabeling_check, strategy_from_discrimination};
use crate::linalg::MatrixRepr;
use crate::oracles::{classical_ml_decode, helstrom_two_state, qubit_grid_search, Mode, DEFAULT_SEED, DEFAULT_STEPS};
use crate::sdp::{certify, delta, solve_pmi, solve_standard, MeasurementItem, SolverOptions, DEFAULT_TOL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_INVALID: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "pmi", version, about = "State discrimination with post-measurement information")]
pub struct Cli {
    /// Solver and certification tolerance.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    pub json_out: Option<PathBuf>,
    /// Seed for randomized oracles.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    pub seed: u64,
    /// Largest number of answer vectors to enumerate.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_VECTORS)]
    pub max_vectors: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an ensemble file.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Optimal success probability and measurement.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Pmi)]
        mode: ModeArg,
    },
    /// Partition lower bound and α-power upper bound.
    Bound {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = BoundMode::Sandwich)]
        mode: BoundMode,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_ALPHAS.to_vec())]
        alpha: Vec<f64>,
    },
    /// Closed-form analysis of a Clifford encoding.
    Clifford {
        #[arg(value_enum)]
        action: CliffordAction,
        #[arg(long)]
        input: PathBuf,
    },
    /// CHSH strategy from the two partition problems.
    Chsh {
        #[arg(long)]
        input: PathBuf,
    },
    /// Compare the solver with a brute-force oracle.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        oracle: OracleArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Pmi)]
        mode: ModeArg,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Pmi,
    Standard,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Pmi => Mode::Pmi,
            ModeArg::Standard => Mode::Standard,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundMode {
    Lower,
    Upper,
    Sandwich,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CliffordAction {
    Analyze,
    Measure,
    MakeUseless,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OracleArg {
    Helstrom,
    Classical,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorReport {
    pub kind: String,
    pub message: String,
    pub exit_code: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_dual_bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub results: Value,
    pub timings_ms: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorReport>,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) => EXIT_PARSE,
        e if e.is_numerical() => EXIT_NUMERICAL,
        _ => EXIT_INVALID,
    }
}

fn error_kind(err: &Error) -> String {
    let debug = format!("{err:?}");
    debug
        .split(|c: char| !c.is_alphanumeric())
        .next()
        .unwrap_or_default()
        .to_string()
}

struct Run {
    report: RunReport,
    phase: Instant,
}

impl Run {
    fn new(command: &str, tol: f64) -> Self {
        let mut tolerances = BTreeMap::new();
        tolerances.insert("tol".to_string(), tol);
        Run {
            report: RunReport {
                command: command.to_string(),
                inputs: Vec::new(),
                results: json!({}),
                timings_ms: BTreeMap::new(),
                tolerances,
                error: None,
            },
            phase: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        let ms = (now - self.phase).as_secs_f64() * 1e3;
        *self.report.timings_ms.entry(name.to_string()).or_insert(0.0) += ms;
        self.phase = now;
    }

    fn read(&mut self, path: &Path) -> Result<String> {
        let bytes = std::fs::read(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let sha256 = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
        self.report.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256,
        });
        let text = String::from_utf8(bytes).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        self.lap("read");
        Ok(text)
    }

    fn ensemble(&mut self, path: &Path) -> Result<Ensemble> {
        let text = self.read(path)?;
        let e = Ensemble::from_json(&text)?;
        self.lap("load");
        Ok(e)
    }

    fn clifford(&mut self, path: &Path) -> Result<CliffordEncoding> {
        let text = self.read(path)?;
        let c = CliffordEncoding::from_json(&text)?;
        self.lap("load");
        Ok(c)
    }
}

/// Parses `args`, runs the command, emits the report and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_PARSE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let (report, code) = run(&cli);
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    if let Some(err) = &report.error {
        eprintln!("error: {}", err.message);
    }
    match &cli.json_out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text + "\n") {
                eprintln!("error: cannot write {}: {e}", path.display());
                return EXIT_PARSE;
            }
        }
        None => {
            // a closed pipe (e.g. `| head`) is not worth a panic
            let _ = writeln!(std::io::stdout(), "{text}");
        }
    }
    code
}

/// Runs a parsed command. Failures are recorded in the report.
pub fn run(cli: &Cli) -> (RunReport, i32) {
    let name = match &cli.command {
        Command::Validate { .. } => "validate",
        Command::Solve { .. } => "solve",
        Command::Bound { .. } => "bound",
        Command::Clifford { .. } => "clifford",
        Command::Chsh { .. } => "chsh",
        Command::Verify { .. } => "verify",
    };
    let mut run = Run::new(name, cli.tol);
    let opts = SolverOptions {
        tol: cli.tol,
        max_vectors: cli.max_vectors,
    };
    let outcome = dispatch(cli, &opts, &mut run);
    let mut report = run.report;
    match outcome {
        Ok(results) => {
            report.results = results;
            (report, EXIT_OK)
        }
        Err(err) => {
            let code = exit_code(&err);
            let last_dual_bound = match err {
                Error::SolverStalled { last_dual_bound } => Some(last_dual_bound),
                _ => None,
            };
            report.error = Some(ErrorReport {
                kind: error_kind(&err),
                message: err.to_string(),
                exit_code: code,
                last_dual_bound,
            });
            (report, code)
        }
    }
}

fn dispatch(cli: &Cli, opts: &SolverOptions, run: &mut Run) -> Result<Value> {
    if !(cli.tol > 0.0) || !cli.tol.is_finite() {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", cli.tol)));
    }
    match &cli.command {
        Command::Validate { input } => cmd_validate(input, run),
        Command::Solve { input, mode } => cmd_solve(input, *mode, opts, run),
        Command::Bound { input, mode, alpha } => cmd_bound(input, *mode, alpha, opts, run),
        Command::Clifford { action, input } => cmd_clifford(input, *action, opts, run),
        Command::Chsh { input } => cmd_chsh(input, opts, run),
        Command::Verify {
            input,
            oracle,
            mode,
            steps,
        } => cmd_verify(input, *oracle, (*mode).into(), *steps, cli.seed, opts, run),
    }
}

fn cmd_validate(input: &Path, run: &mut Run) -> Result<Value> {
    let e = run.ensemble(input)?;
    let s = e.structure();
    let distribution = match s.kind {
        DistributionKind::ProductUniformX => "product_uniform_x",
        DistributionKind::General => "general",
    };
    let classical = e.is_classical();
    run.lap("validate");
    Ok(json!({
        "valid": true,
        "dimension": e.dim(),
        "strings": e.strings(),
        "encodings": e.encodings(),
        "distribution": distribution,
        "marginal_b": s.marginal_b,
        "classical": classical,
    }))
}

fn cmd_solve(input: &Path, mode: ModeArg, opts: &SolverOptions, run: &mut Run) -> Result<Value> {
    let e = run.ensemble(input)?;
    let sol = match mode {
        ModeArg::Pmi => solve_pmi(&e, opts)?,
        ModeArg::Standard => solve_standard(&e, opts)?,
    };
    run.lap("solve");
    let report = certify(&e, &sol.measurement, opts.tol)?;
    run.lap("certify");
    Ok(json!({
        "mode": mode_name(mode),
        "solution": sol.to_file(),
        "certificate": report,
    }))
}

fn mode_name(mode: ModeArg) -> &'static str {
    match mode {
        ModeArg::Pmi => "pmi",
        ModeArg::Standard => "standard",
    }
}

fn cmd_bound(input: &Path, mode: BoundMode, alphas: &[f64], opts: &SolverOptions, run: &mut Run) -> Result<Value> {
    let e = run.ensemble(input)?;
    let mut out = serde_json::Map::new();
    let mut lower = None;
    let mut upper = None;
    if matches!(mode, BoundMode::Lower | BoundMode::Sandwich) {
        let (value, t) = lower_bound(&e, opts)?;
        out.insert("lower".into(), json!(value));
        out.insert("argmax_partition".into(), json!(t.label));
        lower = Some(value);
        run.lap("lower");
    }
    if matches!(mode, BoundMode::Upper | BoundMode::Sandwich) {
        let (value, alpha) = best_upper_bound(&e, alphas, opts.max_vectors)?;
        out.insert("upper".into(), json!(value));
        out.insert("argmin_alpha".into(), json!(alpha));
        out.insert("alphas".into(), json!(alphas));
        upper = Some(value);
        run.lap("upper");
    }
    if let (Some(lo), Some(hi)) = (lower, upper) {
        let sdp = solve_pmi(&e, opts)?.primal_value;
        run.lap("solve");
        out.insert("sdp".into(), json!(sdp));
        let slack = 2.0 * opts.tol;
        out.insert("verdict".into(), json!(lo - slack <= sdp && sdp <= hi + slack));
    }
    Ok(Value::Object(out))
}

fn cmd_clifford(input: &Path, action: CliffordAction, opts: &SolverOptions, run: &mut Run) -> Result<Value> {
    let c = run.clifford(input)?;
    match action {
        CliffordAction::Analyze => {
            let a = c.analyze()?;
            run.lap("analyze");
            Ok(serde_json::to_value(a)?)
        }
        CliffordAction::Measure => {
            let a = c.analyze()?;
            let m = c.closed_form_measurement(&a.best)?;
            let q = c.q_certificate(&a.best)?;
            run.lap("measure");
            let report = certify(&c.to_ensemble()?, &m.povm, opts.tol)?;
            run.lap("certify");
            let measurement: Vec<MeasurementItem> = m
                .povm
                .outcomes()
                .iter()
                .map(|(key, op)| MeasurementItem {
                    key: key.clone(),
                    matrix: MatrixRepr::from(op),
                })
                .collect();
            Ok(json!({
                "best": a.best,
                "p_pmi": a.p_pmi,
                "degenerate": m.degenerate,
                "measurement": measurement,
                "Q": MatrixRepr::from(&q),
                "certificate": report,
            }))
        }
        CliffordAction::MakeUseless => {
            let before = c.analyze()?;
            let (relabeled, v) = c.make_useless()?;
            let after = relabeled.analyze()?;
            run.lap("relabel");
            let d = delta(&relabeled.to_ensemble()?, opts)?;
            run.lap("delta");
            let output = useless_path(input);
            std::fs::write(&output, relabeled.to_json() + "\n")
                .map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", output.display())))?;
            Ok(json!({
                "relabeling": v,
                "output": output.display().to_string(),
                "p_pmi_before": before.p_pmi,
                "p_pmi_after": after.p_pmi,
                "useless_before": before.useless,
                "useless_after": after.useless,
                "delta_after": d,
            }))
        }
    }
}

/// `dir/name.json` becomes `dir/name.useless.json`.
pub fn useless_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    input.with_file_name(format!("{stem}.useless.json"))
}

fn cmd_chsh(input: &Path, opts: &SolverOptions, run: &mut Run) -> Result<Value> {
    let e = run.ensemble(input)?;
    let s = strategy_from_discrimination(&e, opts)?;
    run.lap("strategy");
    let classical_bound = 0.75;
    let violation = s.value - classical_bound;
    let mut out = json!({
        "p1": s.p1,
        "p2": s.p2,
        "game_value": s.value,
        "classical_bound": classical_bound,
        "violation": violation,
        "violates_classical_bound": violation > 2.0 * opts.tol,
        "classical": false,
        "relabeling_useless_possible": Value::Null,
    });
    if e.is_classical() {
        let r = no_relabeling_check(&e, opts)?;
        run.lap("relabelings");
        out["classical"] = json!(true);
        out["relabeling_useless_possible"] = json!(r.relabeling_useless_possible);
        out["hypothesis"] = json!(r.hypothesis);
        out["p2_bound"] = json!(r.p2_bound);
        out["p_pmi"] = json!(r.p_pmi);
        out["relabelings"] = serde_json::to_value(&r.relabelings)?;
    }
    Ok(out)
}

fn cmd_verify(
    input: &Path,
    oracle: OracleArg,
    mode: Mode,
    steps: usize,
    seed: u64,
    opts: &SolverOptions,
    run: &mut Run,
) -> Result<Value> {
    let e = run.ensemble(input)?;
    let (oracle_name, mode, value, extra) = match oracle {
        OracleArg::Helstrom => {
            let s = e.without_encoding_info();
            if s.strings() != 2 {
                return Err(Error::NotBinary(s.strings()));
            }
            let p0 = s.prob(0, 0);
            let (r0, r1) = (s.state(0, 0), s.state(1, 0));
            let value = if p0 > 0.0 && p0 < 1.0 {
                helstrom_two_state(r0, r1, p0)?
            } else {
                p0.max(1.0 - p0)
            };
            ("helstrom", Mode::Standard, value, Value::Null)
        }
        OracleArg::Classical => ("classical", mode, classical_ml_decode(&e, mode, seed)?, json!({ "seed": seed })),
        OracleArg::Grid => {
            let g = qubit_grid_search(&e, steps, mode)?;
            ("grid", mode, g.value, json!({ "steps": steps, "axis": g.axis }))
        }
    };
    run.lap("oracle");
    let sdp = match mode {
        Mode::Pmi => solve_pmi(&e, opts)?,
        Mode::Standard => solve_standard(&e, opts)?,
    };
    run.lap("solve");
    Ok(json!({
        "oracle": oracle_name,
        "mode": mode,
        "oracle_value": value,
        "sdp": sdp.primal_value,
        "difference": value - sdp.primal_value,
        "details": extra,
    }))
}
