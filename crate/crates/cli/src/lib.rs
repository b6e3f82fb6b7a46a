//! Subcommand implementations behind the `rqc` binary.
//!
//! Every run produces a [`RunRecord`]. The record carries the full parameter
//! set, so feeding it back through [`replay`] reproduces the payload.

mod bound_names;
pub mod sweep;

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use rqc_core::bounds::BoundReport;
use rqc_core::haar_mc::{self, EstimatorResult, GateSet, TqoRecord};
use rqc_core::moment_op::MatrixFreeOperator;
use rqc_core::permgroup::{self, MAX_FRAME_T};
use rqc_core::spectra::{self, Method, Quantity, SolverOptions, SpectralReport};

pub use bound_names::{run_bound, BOUND_NAMES};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Failure of a run, with the process exit code it maps to.
#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad parameters, guards, unreadable or malformed files: exit 1.
    Usage(String),
    /// The eigensolver stopped short of the tolerance: exit 2.
    NoConvergence(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::NoConvergence(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::NoConvergence(m) => f.write_str(m),
        }
    }
}

impl From<rqc_core::Error> for CliError {
    fn from(e: rqc_core::Error) -> Self {
        match e {
            rqc_core::Error::Convergence { .. } => CliError::NoConvergence(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Usage(msg.into()))
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    1_000_000
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WalkModel {
    /// Local random circuit: one gate on a random neighbouring pair per step.
    #[default]
    Lr,
    /// Parallel random circuit: a full brickwork layer per step.
    Plr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolverMethod {
    #[default]
    Auto,
    Power,
    Lanczos,
}

impl From<SolverMethod> for Method {
    fn from(m: SolverMethod) -> Self {
        match m {
            SolverMethod::Auto => Method::Auto,
            SolverMethod::Power => Method::Power,
            SolverMethod::Lanczos => Method::Lanczos,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct GapArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long, value_enum, default_value_t = WalkModel::Lr)]
    #[serde(default)]
    pub model: WalkModel,
    /// Residual tolerance `‖Av − λv‖`.
    #[arg(long, default_value_t = 1e-8)]
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    /// Seed of the random start vector.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = SolverMethod::Auto)]
    #[serde(default)]
    pub method: SolverMethod,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct FrameArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub d: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum McModel {
    #[default]
    Lr,
    Plr,
    /// Local walk with gates drawn uniformly from `--gates`.
    Gset,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct McArgs {
    #[arg(long, value_enum, default_value_t = McModel::Lr)]
    #[serde(default)]
    pub model: McModel,
    /// Gate-set file for `--model gset`.
    #[arg(long)]
    #[serde(default)]
    pub gates: Option<PathBuf>,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct TqoArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub steps: usize,
    #[arg(long)]
    pub l: usize,
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Args, Serialize, Deserialize)]
pub struct BoundsArgs {
    /// One of the names listed by `rqc bounds --help`.
    #[arg(value_parser = clap::builder::PossibleValuesParser::new(BOUND_NAMES))]
    pub name: String,
    /// Parameters as `key=value`.
    #[arg(value_parser = parse_key_value)]
    #[serde(default)]
    pub args: Vec<(String, String)>,
}

fn parse_key_value(s: &str) -> std::result::Result<(String, String), String> {
    match s.split_once('=') {
        Some((k, v)) if !k.is_empty() => Ok((k.to_string(), v.to_string())),
        _ => Err(format!("expected key=value, got {s:?}")),
    }
}

/// A single runnable computation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "subcommand", content = "params", rename_all = "lowercase")]
pub enum Run {
    Gap(GapArgs),
    Frame(FrameArgs),
    Mc(McArgs),
    Tqo(TqoArgs),
    Bounds(BoundsArgs),
}

impl Run {
    pub fn name(&self) -> &'static str {
        match self {
            Run::Gap(_) => "gap",
            Run::Frame(_) => "frame",
            Run::Mc(_) => "mc",
            Run::Tqo(_) => "tqo",
            Run::Bounds(_) => "bounds",
        }
    }

    fn seed(&self) -> Option<u64> {
        match self {
            Run::Gap(a) => Some(a.seed),
            Run::Mc(a) => Some(a.seed),
            Run::Tqo(a) => Some(a.seed),
            Run::Frame(_) | Run::Bounds(_) => None,
        }
    }
}

/// Exact quantities of the permutation frame at `(n, t, d)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameDiagnostics {
    pub n: usize,
    pub t: usize,
    pub d: u64,
    /// `t² ≤ d^n`; the bounds below are reported only when it holds.
    pub quasi_orthogonal: bool,
    /// Dimension of `span{ψ_π^{⊗n}}`; `None` above the dense frame limit.
    pub rank: Option<usize>,
    pub column_sum: f64,
    /// `1 + t²/d^n`
    pub column_sum_bound: Option<f64>,
    pub column_sum_pass: Option<bool>,
    /// `‖A − G‖_∞`; `None` above the dense frame limit.
    pub deviation: Option<f64>,
    /// `t²/d^n`
    pub deviation_bound: Option<f64>,
    pub deviation_pass: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payload {
    Spectral(Vec<SpectralReport>),
    Frame(FrameDiagnostics),
    Estimator(EstimatorResult),
    Tqo(TqoRecord),
    Bound(BoundReport),
}

/// One JSON object per run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub run: Run,
    pub seed: Option<u64>,
    pub wall_time_s: f64,
    pub result: Payload,
    pub version: String,
}

impl RunRecord {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn from_json(text: &str) -> CliResult<Self> {
        serde_json::from_str(text).or_else(|e| usage(format!("not a run record: {e}")))
    }

    /// Short human-readable rendering.
    pub fn render_text(&self) -> String {
        let mut out = Vec::new();
        match &self.result {
            Payload::Spectral(reports) => {
                for r in reports {
                    let name = match r.quantity {
                        Quantity::GLocal => "g_local",
                        Quantity::GParallel => "lambda2_parallel",
                        Quantity::GapH => "gap_H",
                        Quantity::DetectabilityNorm => "detectability_norm",
                        Quantity::RhoHaarMinEig => "rho_haar_min_eig",
                    };
                    out.push(format!(
                        "{name} = {:.12} (residual {:.1e}, {} iterations)",
                        r.value, r.residual, r.iterations
                    ));
                }
            }
            Payload::Frame(f) => {
                out.push(format!("column_sum = {:.12}", f.column_sum));
                match (f.column_sum_bound, f.column_sum_pass) {
                    (Some(b), Some(p)) => out.push(format!("column_sum_bound = {b:.12} ({})", verdict(p))),
                    _ => out.push("column_sum_bound: not applicable (t² > d^n)".into()),
                }
                match f.deviation {
                    Some(d) => out.push(format!("deviation = {d:.12}")),
                    None => out.push("deviation: not computed".into()),
                }
                match (f.deviation_bound, f.deviation_pass) {
                    (Some(b), Some(p)) => out.push(format!("deviation_bound = {b:.12} ({})", verdict(p))),
                    (Some(b), None) => out.push(format!("deviation_bound = {b:.12}")),
                    _ => out.push("deviation_bound: not applicable (t² > d^n)".into()),
                }
                if let Some(r) = f.rank {
                    out.push(format!("rank = {r}"));
                }
            }
            Payload::Estimator(e) => {
                out.push(format!("frame_potential = {:.8} ± {:.8} ({} samples)", e.estimate, e.std_error, e.samples));
                if let Some(h) = e.haar_reference {
                    out.push(format!("haar_reference = {h}"));
                }
            }
            Payload::Tqo(r) => {
                out.push(format!("max_deviation_0 = {:.8}", r.max_deviation_0));
                out.push(format!("max_deviation_1 = {:.8}", r.max_deviation_1));
                out.push(format!("max_cross = {:.8}", r.max_cross));
                out.push(format!(
                    "threshold = {:.8} ({})",
                    r.threshold,
                    verdict(r.within_threshold)
                ));
            }
            Payload::Bound(b) => {
                for ev in &b.evaluations {
                    let value = match ev.value {
                        Some(v) => format!("{v:.12e}"),
                        None => format!("10^{:.6}", ev.log10),
                    };
                    let flag = if ev.vacuous { " [vacuous]" } else { "" };
                    out.push(format!("{} ({:?}) = {value}{flag}", ev.label, ev.convention));
                }
                for p in &b.preconditions {
                    let state = match p.met {
                        Some(true) => "met",
                        Some(false) => "NOT met",
                        None => "not checked",
                    };
                    out.push(format!("precondition: {} [{state}]", p.description));
                }
                out.extend(b.notes.iter().map(|n| format!("note: {n}")));
            }
        }
        out.join("\n")
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "FAIL"
    }
}

fn run_gap(a: &GapArgs) -> CliResult<Payload> {
    if a.tol.is_nan() || a.tol <= 0.0 {
        return usage(format!("--tol must be positive, got {}", a.tol));
    }
    let opts = SolverOptions {
        tol: a.tol,
        max_iter: a.max_iter,
        seed: a.seed,
        method: a.method.into(),
        ..SolverOptions::default()
    };
    let reports = match a.model {
        WalkModel::Lr => {
            let gap = spectra::hamiltonian_gap(a.n, a.t, a.d, &opts)?;
            let scale = (a.n - 1) as f64;
            let g = SpectralReport {
                quantity: Quantity::GLocal,
                value: 1.0 - gap.value / scale,
                residual: gap.residual / scale,
                ..gap.clone()
            };
            vec![g, gap]
        }
        WalkModel::Plr => {
            let op = MatrixFreeOperator::parallel_moment(a.n, a.t, a.d)?;
            vec![spectra::second_eigenvalue(&op, &opts)?]
        }
    };
    Ok(Payload::Spectral(reports))
}

fn run_frame(a: &FrameArgs) -> CliResult<Payload> {
    let column_sum = permgroup::column_sum(a.t, a.d, a.n)?;
    let quasi_orthogonal = permgroup::quasi_orthogonal_regime(a.n, a.t, a.d);
    let dense = a.t <= MAX_FRAME_T;
    let (rank, deviation) = if dense {
        (
            Some(permgroup::ground_space_basis(a.n, a.t, a.d)?.rank),
            Some(permgroup::frame_operator_deviation(a.n, a.t, a.d)?),
        )
    } else {
        (None, None)
    };
    let ratio = (a.t * a.t) as f64 * (-(a.n as f64) * (a.d as f64).ln()).exp();
    let (column_sum_bound, deviation_bound) = if quasi_orthogonal {
        (Some(1.0 + ratio), Some(ratio))
    } else {
        (None, None)
    };
    Ok(Payload::Frame(FrameDiagnostics {
        n: a.n,
        t: a.t,
        d: a.d,
        quasi_orthogonal,
        rank,
        column_sum,
        column_sum_bound,
        column_sum_pass: column_sum_bound.map(|b| column_sum <= b),
        deviation,
        deviation_bound,
        deviation_pass: deviation_bound.zip(deviation).map(|(b, d)| d <= b),
    }))
}

fn run_mc(a: &McArgs) -> CliResult<Payload> {
    let model = match (a.model, &a.gates) {
        (McModel::Lr, None) => haar_mc::Model::Lr,
        (McModel::Plr, None) => haar_mc::Model::Plr,
        (McModel::Gset, Some(path)) => haar_mc::Model::GLocal(Arc::new(GateSet::from_file(path)?)),
        (McModel::Gset, None) => return usage("--model gset needs --gates FILE"),
        (_, Some(_)) => return usage("--gates is only used with --model gset"),
    };
    let r = haar_mc::frame_potential(&model, a.n, a.d, a.steps, a.t, a.samples, a.seed)?;
    Ok(Payload::Estimator(r))
}

fn run_tqo(a: &TqoArgs) -> CliResult<Payload> {
    let (psi0, psi1) = haar_mc::default_pair(a.n, a.d)?;
    Ok(Payload::Tqo(haar_mc::tqo_experiment(a.n, a.d, a.steps, a.l, a.seed, &psi0, &psi1)?))
}

/// Runs one computation and wraps it in a record.
pub fn execute(run: &Run) -> CliResult<RunRecord> {
    let start = Instant::now();
    let result = match run {
        Run::Gap(a) => run_gap(a)?,
        Run::Frame(a) => run_frame(a)?,
        Run::Mc(a) => run_mc(a)?,
        Run::Tqo(a) => run_tqo(a)?,
        Run::Bounds(a) => Payload::Bound(run_bound(&a.name, &a.args)?),
    };
    Ok(RunRecord {
        run: run.clone(),
        seed: run.seed(),
        wall_time_s: start.elapsed().as_secs_f64(),
        result,
        version: VERSION.to_string(),
    })
}

/// Re-runs a record and checks that the payload is reproduced exactly.
pub fn replay(record: &RunRecord) -> CliResult<RunRecord> {
    let fresh = execute(&record.run)?;
    if fresh.result != record.result {
        return usage(format!("replay of {} produced a different result", record.run.name()));
    }
    Ok(fresh)
}

/// Builds a run from a subcommand name and a JSON parameter object.
pub fn run_from_value(subcommand: &str, params: Value) -> CliResult<Run> {
    let wrapped = serde_json::json!({ "subcommand": subcommand, "params": params });
    serde_json::from_value(wrapped).or_else(|e| usage(format!("invalid {subcommand} parameters: {e}")))
}
