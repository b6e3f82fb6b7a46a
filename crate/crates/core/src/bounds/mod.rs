//! Closed-form bounds and conversions for random-circuit convergence.
//!
//! Every calculator returns a [`BoundReport`]. Whenever the formula contains
//! a logarithm of unspecified base it is evaluated twice, once with the
//! natural log and once with `log₂`, and both results are reported. Values
//! are computed as natural logarithms internally; reports carry `log10` of
//! each value and the value itself when it is below `10^300`.

mod float_serde;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{param, Error, Result};

/// Values at or above this magnitude are reported through `log10` only.
pub const DIRECT_LIMIT_LOG10: f64 = 300.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Upper,
    Lower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogConvention {
    Natural,
    Base2,
    /// The formula has no logarithm or only ratios of logarithms.
    Independent,
}

impl LogConvention {
    /// The logarithm of `x` under this convention.
    pub fn log(self, x: f64) -> f64 {
        match self {
            LogConvention::Base2 => x.log2(),
            LogConvention::Natural | LogConvention::Independent => x.ln(),
        }
    }
}

const BOTH: [LogConvention; 2] = [LogConvention::Natural, LogConvention::Base2];

/// What a value bounds, which decides when it says nothing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    /// Vacuous at or above 1.
    Probability,
    /// An operator-norm distance of a contraction; vacuous at or above 1.
    Contraction,
    /// A length, size or count lower bound; vacuous at or below 1.
    Count,
    /// A spectral-gap lower bound; vacuous at or below 0.
    Gap,
    /// Auxiliary numbers (thresholds, intervals); never flagged.
    Other,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub label: String,
    pub convention: LogConvention,
    /// `None` when `|value| ≥ 10^300`.
    #[serde(with = "float_serde::option")]
    pub value: Option<f64>,
    #[serde(with = "float_serde::plain")]
    pub log10: f64,
    pub kind: Kind,
    pub vacuous: bool,
}

impl Evaluation {
    /// From the natural log of a nonnegative value.
    fn from_ln(label: &str, convention: LogConvention, ln_value: f64, kind: Kind) -> Self {
        let log10 = ln_value / std::f64::consts::LN_10;
        let value = (log10 < DIRECT_LIMIT_LOG10).then(|| ln_value.exp());
        let vacuous = match kind {
            Kind::Probability | Kind::Contraction => ln_value >= 0.0,
            Kind::Count => ln_value <= 0.0,
            Kind::Gap => ln_value == f64::NEG_INFINITY,
            Kind::Other => false,
        };
        Self {
            label: label.to_string(),
            convention,
            value,
            log10,
            kind,
            vacuous,
        }
    }

    /// From a value small enough to evaluate directly (may be negative).
    fn direct(label: &str, convention: LogConvention, value: f64, kind: Kind) -> Self {
        let vacuous = match kind {
            Kind::Probability | Kind::Contraction => value >= 1.0,
            Kind::Count => value <= 1.0,
            Kind::Gap => value <= 0.0,
            Kind::Other => false,
        };
        Self {
            label: label.to_string(),
            convention,
            value: Some(value),
            log10: value.abs().log10(),
            kind,
            vacuous,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Precondition {
    pub description: String,
    /// `None` when the inputs needed to decide it were not supplied.
    pub met: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    #[serde(with = "float_serde::map")]
    pub inputs: BTreeMap<String, f64>,
    pub direction: Direction,
    pub evaluations: Vec<Evaluation>,
    pub preconditions: Vec<Precondition>,
    pub notes: Vec<String>,
}

impl BoundReport {
    fn new(name: &str, direction: Direction, inputs: &[(&str, f64)]) -> Self {
        Self {
            name: name.to_string(),
            inputs: inputs.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            direction,
            evaluations: Vec::new(),
            preconditions: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn push(&mut self, e: Evaluation) {
        self.evaluations.push(e);
    }

    fn require(&mut self, description: &str, met: Option<bool>) {
        self.preconditions.push(Precondition {
            description: description.to_string(),
            met,
        });
    }

    /// True unless some precondition is known to fail.
    pub fn preconditions_met(&self) -> bool {
        self.preconditions.iter().all(|p| p.met != Some(false))
    }

    /// The evaluation with this label and convention.
    pub fn get(&self, label: &str, convention: LogConvention) -> Option<&Evaluation> {
        self.evaluations
            .iter()
            .find(|e| e.label == label && e.convention == convention)
    }

    /// Shorthand for the value of `get`.
    pub fn value(&self, label: &str, convention: LogConvention) -> Option<f64> {
        self.get(label, convention).and_then(|e| e.value)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CircuitModel {
    Lr,
    Plr,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Conversion {
    /// From `g(ν, t)` to an interval for the design error `G(ν, t)`.
    TpeToDesign,
    /// From `G(ν, t)` to an interval for `g(ν, t)`.
    DesignToTpe,
    /// From an ε-design to a diamond-norm distance.
    DesignToDiamond,
    /// From a diamond-norm distance to a design error.
    DiamondToDesign,
}

fn finite_nonnegative(name: &str, x: f64) -> Result<()> {
    if !(x.is_finite() && x >= 0.0) {
        return param(format!("{name} must be finite and nonnegative, got {x}"));
    }
    Ok(())
}

/// `ln C(a + b, b)` for real `a ≥ 0` and integer `b`, summed term by term.
fn ln_binomial(a: f64, b: u64) -> f64 {
    (1..=b).map(|j| ((a + j as f64) / j as f64).ln()).sum()
}

/// Upper bound on `g(ν, t)` for one step of the local (`1 − 1/(n t⁴ log t)`)
/// or parallel (`1 − 1/(12 t⁴ log t)`) walk.
pub fn tpe_gap_bound(n: usize, t: usize, d: usize, model: CircuitModel) -> Result<BoundReport> {
    if n < 2 || d < 2 {
        return param(format!("need n >= 2 and d >= 2, got n = {n}, d = {d}"));
    }
    if t < 2 {
        return Err(Error::Precondition(format!("t = {t}: log t must be positive, need t >= 2")));
    }
    let mut r = BoundReport::new(
        "tpe_gap",
        Direction::Upper,
        &[("n", n as f64), ("t", t as f64), ("d", d as f64)],
    );
    r.notes.push(format!("model {model:?}"));
    let prefactor = match model {
        CircuitModel::Lr => n as f64,
        CircuitModel::Plr => 12.0,
    };
    for c in BOTH {
        let value = 1.0 - 1.0 / (prefactor * (t as f64).powi(4) * c.log(t as f64));
        r.push(Evaluation::direct("g", c, value, Kind::Contraction));
    }
    Ok(r)
}

/// Circuit length after which the walk is an ε-approximate t-design:
/// `log(t) t⁴ n (2nt log d + log(1/ε))` for LR and the same with `12`
/// in place of `n` for PLR.
pub fn design_length(n: usize, t: usize, d: usize, eps: f64, model: CircuitModel) -> Result<BoundReport> {
    if n < 2 || d < 2 {
        return param(format!("need n >= 2 and d >= 2, got n = {n}, d = {d}"));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return param(format!("eps must lie in (0, 1), got {eps}"));
    }
    if t < 2 {
        return Err(Error::Precondition(format!("t = {t}: log t must be positive, need t >= 2")));
    }
    let mut r = BoundReport::new(
        "design_length",
        Direction::Upper,
        &[("n", n as f64), ("t", t as f64), ("d", d as f64), ("eps", eps)],
    );
    r.notes.push(format!("model {model:?}"));
    let prefactor = match model {
        CircuitModel::Lr => n as f64,
        CircuitModel::Plr => 12.0,
    };
    let (nf, tf, df) = (n as f64, t as f64, d as f64);
    for c in BOTH {
        let ln_value = c.log(tf).ln() + 4.0 * tf.ln() + prefactor.ln()
            + (2.0 * nf * tf * c.log(df) + c.log(1.0 / eps)).ln();
        r.push(Evaluation::from_ln("length", c, ln_value, Kind::Count));
    }
    Ok(r)
}

/// Converts between the tensor-product-expander value `g`, the design error
/// `G` and the diamond distance on `U(N)`:
/// `g/(2N^{t/2}) ≤ G ≤ N^{2t} g`; an ε-design is within `2ε` in diamond
/// norm; a diamond distance ε gives an `εN^{2t}`-design.
pub fn g_design_conversion(value: f64, big_n: f64, t: usize, direction: Conversion) -> Result<BoundReport> {
    finite_nonnegative("input", value)?;
    if !(big_n >= 1.0 && big_n.is_finite()) || t == 0 {
        return param(format!("need N >= 1 and t >= 1, got N = {big_n}, t = {t}"));
    }
    let mut r = BoundReport::new(
        "g_design",
        Direction::Upper,
        &[("value", value), ("N", big_n), ("t", t as f64)],
    );
    r.notes.push(format!("{direction:?}"));
    let c = LogConvention::Independent;
    let ln_v = value.ln();
    let ln_n = big_n.ln();
    let tf = t as f64;
    let (lower, upper) = match direction {
        Conversion::TpeToDesign => (ln_v - 2f64.ln() - 0.5 * tf * ln_n, ln_v + 2.0 * tf * ln_n),
        Conversion::DesignToTpe => (ln_v - 2.0 * tf * ln_n, ln_v + 2f64.ln() + 0.5 * tf * ln_n),
        Conversion::DesignToDiamond => (f64::NEG_INFINITY, ln_v + 2f64.ln()),
        Conversion::DiamondToDesign => (f64::NEG_INFINITY, ln_v + 2.0 * tf * ln_n),
    };
    r.push(Evaluation::from_ln("lower", c, lower, Kind::Other));
    r.push(Evaluation::from_ln("upper", c, upper, Kind::Other));
    Ok(r)
}

/// Lower bound `Δ(H_{n,t}) ≥ Δ(H_{m,t}) / (8 log_d t)` from the gap of a
/// chain of `m = ⌈2 log_d t⌉` sites. The premise on `n` is stated as
/// `n ≥ ⌈10 log t⌉` in one place and `n ≥ ⌈2t log t⌉` in another; both are
/// reported under both log conventions.
pub fn nachtergaele_compose(gap_small: f64, t: usize, d: usize, n: Option<usize>) -> Result<BoundReport> {
    finite_nonnegative("gap_small", gap_small)?;
    if d < 2 {
        return param(format!("need d >= 2, got {d}"));
    }
    if t < 2 {
        return Err(Error::Precondition(format!("t = {t}: log_d t must be positive, need t >= 2")));
    }
    let mut inputs = vec![("gap_small", gap_small), ("t", t as f64), ("d", d as f64)];
    if let Some(n) = n {
        inputs.push(("n", n as f64));
    }
    let mut r = BoundReport::new("nachtergaele", Direction::Lower, &inputs);
    let tf = t as f64;
    let log_d_t = tf.ln() / (d as f64).ln();
    let m = (2.0 * log_d_t).ceil();
    r.push(Evaluation::direct(
        "gap",
        LogConvention::Independent,
        gap_small / (8.0 * log_d_t),
        Kind::Gap,
    ));
    r.push(Evaluation::direct("small_chain_length", LogConvention::Independent, m, Kind::Other));
    if m < 2.0 {
        r.notes.push(format!(
            "small chain length m = {m} < 2: H_m has no interaction terms"
        ));
    }
    r.require("small chain length m = ⌈2 log_d t⌉ >= 2", Some(m >= 2.0));
    for c in BOTH {
        let ten_log = (10.0 * c.log(tf)).ceil();
        let two_t_log = (2.0 * tf * c.log(tf)).ceil();
        r.push(Evaluation::direct("threshold_10_log_t", c, ten_log, Kind::Other));
        r.push(Evaluation::direct("threshold_2t_log_t", c, two_t_log, Kind::Other));
        let tag = match c {
            LogConvention::Base2 => "log2",
            _ => "ln",
        };
        r.require(
            &format!("n >= ⌈10 {tag} t⌉ = {ten_log}"),
            n.map(|n| n as f64 >= ten_log),
        );
        r.require(
            &format!("n >= ⌈2t {tag} t⌉ = {two_t_log}"),
            n.map(|n| n as f64 >= two_t_log),
        );
    }
    Ok(r)
}

/// Wasserstein distance to Haar after `(n−1)k` local steps:
/// `(1 − 1/(eⁿ (d²+1)^{n−2}))^{k/(n−1)} √2 d^{n/2}`.
pub fn path_coupling_contraction(n: usize, d: usize, k: f64) -> Result<BoundReport> {
    if n < 2 || d < 2 {
        return param(format!("need n >= 2 and d >= 2, got n = {n}, d = {d}"));
    }
    finite_nonnegative("k", k)?;
    let mut r = BoundReport::new(
        "path_coupling",
        Direction::Upper,
        &[("n", n as f64), ("d", d as f64), ("k", k)],
    );
    let (nf, df) = (n as f64, d as f64);
    let ln_inv = -nf - (nf - 2.0) * (df * df + 1.0).ln();
    let ln_base = (-ln_inv.exp()).ln_1p();
    let ln_value = k / (nf - 1.0) * ln_base + 0.5 * 2f64.ln() + 0.5 * nf * df.ln();
    let c = LogConvention::Independent;
    r.push(Evaluation::from_ln("wasserstein", c, ln_value, Kind::Other));
    r.push(Evaluation::from_ln("base", c, ln_base, Kind::Other));
    Ok(r)
}

/// `g(ν, t) ≤ 2t W(ν, μ_Haar)`.
pub fn wasserstein_to_g(w: f64, t: usize) -> Result<BoundReport> {
    finite_nonnegative("W", w)?;
    if t == 0 {
        return param("t must be positive");
    }
    let mut r = BoundReport::new("wasserstein", Direction::Upper, &[("W", w), ("t", t as f64)]);
    r.push(Evaluation::direct(
        "g",
        LogConvention::Independent,
        2.0 * t as f64 * w,
        Kind::Contraction,
    ));
    Ok(r)
}

/// Minimum circuit size of any ε-approximate t-design on n qudits,
/// `r ≥ nt/(5d⁴ ln(nt))`. The premises `ε ≤ 1/4` and `t ≤ d^{n/2}` are
/// flagged, not enforced.
pub fn converse_lower_bound(n: usize, t: usize, d: usize, eps: f64) -> Result<BoundReport> {
    if d < 2 || n == 0 || t == 0 {
        return param(format!("need n, t >= 1 and d >= 2, got n = {n}, t = {t}, d = {d}"));
    }
    if n * t < 2 {
        return param("need nt >= 2 so that log(nt) > 0");
    }
    finite_nonnegative("eps", eps)?;
    let mut r = BoundReport::new(
        "converse",
        Direction::Lower,
        &[("n", n as f64), ("t", t as f64), ("d", d as f64), ("eps", eps)],
    );
    let (nf, tf, df) = (n as f64, t as f64, d as f64);
    r.require("eps <= 1/4", Some(eps <= 0.25));
    r.require("t <= d^(n/2)", Some(tf.ln() <= 0.5 * nf * df.ln() + 1e-12));
    r.notes.push("stated with the natural log".into());
    for c in BOTH {
        let ln_value = (nf * tf).ln() - 5f64.ln() - 4.0 * df.ln() - c.log(nf * tf).ln();
        r.push(Evaluation::from_ln("size", c, ln_value, Kind::Count));
    }
    Ok(r)
}

/// `|supp ν| ≥ (1−ε) C(N+t−1, t)²` for an ε-approximate t-design on `U(N)`.
pub fn design_support_lb(big_n: f64, t: u64, eps: f64) -> Result<BoundReport> {
    if !(big_n >= 1.0 && big_n.is_finite()) || t == 0 {
        return param(format!("need N >= 1 and t >= 1, got N = {big_n}, t = {t}"));
    }
    if !(0.0..=1.0).contains(&eps) {
        return param(format!("eps must lie in [0, 1], got {eps}"));
    }
    let mut r = BoundReport::new(
        "support",
        Direction::Lower,
        &[("N", big_n), ("t", t as f64), ("eps", eps)],
    );
    let ln_value = (-eps).ln_1p() + 2.0 * ln_binomial(big_n - 1.0, t);
    r.push(Evaluation::from_ln("support", LogConvention::Independent, ln_value, Kind::Count));
    Ok(r)
}

/// Size of an ε-covering in diamond norm of the circuits with at most `r`
/// two-qudit gates on `n` qudits: `C(n,2)^r (10r/ε)^{r d⁴}`.
pub fn covering_size(n: usize, r_gates: f64, d: usize, eps: f64) -> Result<BoundReport> {
    if n < 2 || d < 2 {
        return param(format!("need n >= 2 and d >= 2, got n = {n}, d = {d}"));
    }
    if !(r_gates >= 1.0 && r_gates.is_finite()) {
        return param(format!("r must be at least 1, got {r_gates}"));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return param(format!("eps must be positive, got {eps}"));
    }
    let mut r = BoundReport::new(
        "covering",
        Direction::Upper,
        &[("n", n as f64), ("r", r_gates), ("d", d as f64), ("eps", eps)],
    );
    let nf = n as f64;
    let d4 = (d as f64).powi(4);
    let ln_value = r_gates * (nf * (nf - 1.0) / 2.0).ln() + r_gates * d4 * (10.0 * r_gates / eps).ln();
    r.push(Evaluation::from_ln("size", LogConvention::Independent, ln_value, Kind::Other));
    Ok(r)
}

/// Probability that some circuit of size `r` distinguishes `U|0ⁿ⟩` from the
/// maximally mixed state by `δ`, for `U` a local circuit of size `s`:
/// `(r/δ)^{2rd⁴} · 3 (560t/(dⁿδ²))^{t/4}` with
/// `t = (s/(n³ log d log s))^{1/6}` taken as a real number.
pub fn hiding_bound(n: usize, d: usize, s: f64, r_size: f64, delta: f64) -> Result<BoundReport> {
    if n < 1 || d < 2 {
        return param(format!("need n >= 1 and d >= 2, got n = {n}, d = {d}"));
    }
    if !(s > 1.0 && s.is_finite()) {
        return param(format!("s must exceed 1, got {s}"));
    }
    if !(r_size >= 1.0 && r_size.is_finite()) {
        return param(format!("r must be at least 1, got {r_size}"));
    }
    if !(delta > 0.0 && delta.is_finite()) {
        return param(format!("delta must be positive, got {delta}"));
    }
    let mut r = BoundReport::new(
        "hiding",
        Direction::Upper,
        &[("n", n as f64), ("d", d as f64), ("s", s), ("r", r_size), ("delta", delta)],
    );
    let (nf, df) = (n as f64, d as f64);
    let d4 = df.powi(4);
    let mut usable = 0;
    for c in BOTH {
        let t = (s / (nf.powi(3) * c.log(df) * c.log(s))).powf(1.0 / 6.0);
        r.push(Evaluation::direct("t", c, t, Kind::Other));
        let ok = t >= 1.0;
        r.require(
            &format!("t >= 1 under {}", if c == LogConvention::Base2 { "log2" } else { "ln" }),
            Some(ok),
        );
        if ok {
            usable += 1;
            let ln_value = 2.0 * r_size * d4 * (r_size / delta).ln()
                + 3f64.ln()
                + t / 4.0 * (560.0 * t / delta.powi(2)).ln()
                - t / 4.0 * nf * df.ln();
            r.push(Evaluation::from_ln("probability", c, ln_value, Kind::Probability));
        }
    }
    if usable == 0 {
        return Err(Error::Precondition(format!(
            "t < 1 under both log conventions for s = {s}"
        )));
    }
    Ok(r)
}

/// `g` implied by a Hamiltonian gap, under the paper's `1 − Δ/n` and the
/// walk's own `1 − Δ/(n−1)` normalizations.
pub fn g_from_gap(gap: f64, n: usize) -> Result<BoundReport> {
    finite_nonnegative("gap", gap)?;
    if n < 2 {
        return param(format!("need n >= 2, got {n}"));
    }
    let mut r = BoundReport::new("g_from_gap", Direction::Upper, &[("gap", gap), ("n", n as f64)]);
    let c = LogConvention::Independent;
    r.push(Evaluation::direct("g_over_n", c, 1.0 - gap / n as f64, Kind::Contraction));
    r.push(Evaluation::direct(
        "g_over_n_minus_1",
        c,
        1.0 - gap / (n - 1) as f64,
        Kind::Contraction,
    ));
    Ok(r)
}

/// Detectability chain: `‖P_odd P_even − P_c‖ ≤ (1 + Δ/2)^{−1/3}` and
/// `λ₂(M) ≤ ½ + ½‖P_odd P_even − P_c‖`.
pub fn detectability_bound(gap: f64) -> Result<BoundReport> {
    finite_nonnegative("gap", gap)?;
    let mut r = BoundReport::new("detectability", Direction::Upper, &[("gap", gap)]);
    let c = LogConvention::Independent;
    let x = (1.0 + gap / 2.0).powf(-1.0 / 3.0);
    r.push(Evaluation::direct("norm", c, x, Kind::Contraction));
    r.push(Evaluation::direct("lambda2", c, 0.5 + 0.5 * x, Kind::Contraction));
    Ok(r)
}

/// `λ₂(M) ≤ ½ + ½x` for a measured detectability norm `x`.
pub fn parallel_from_detectability(norm: f64) -> Result<BoundReport> {
    finite_nonnegative("norm", norm)?;
    let mut r = BoundReport::new("parallel_from_detectability", Direction::Upper, &[("norm", norm)]);
    r.push(Evaluation::direct(
        "lambda2",
        LogConvention::Independent,
        0.5 + 0.5 * norm,
        Kind::Contraction,
    ));
    Ok(r)
}

/// Gap floors: `Δ(H_{n,t}) ≥ 1/(t⁴ log t)` (both conventions), the
/// intermediate `e^{−2 log_d t} (d²+1)^{−2 log_d t} / (8 log_d t)`, and for a
/// chain of `m` sites `m^{−2} e^{−m} (d²+1)^{−m}`.
pub fn gap_floor(t: usize, d: usize, m: Option<usize>) -> Result<BoundReport> {
    if d < 2 {
        return param(format!("need d >= 2, got {d}"));
    }
    if t < 2 {
        return Err(Error::Precondition(format!("t = {t}: log t must be positive, need t >= 2")));
    }
    let mut inputs = vec![("t", t as f64), ("d", d as f64)];
    if let Some(m) = m {
        inputs.push(("m", m as f64));
    }
    let mut r = BoundReport::new("gap_floor", Direction::Lower, &inputs);
    let (tf, df) = (t as f64, d as f64);
    for c in BOTH {
        let ln_value = -4.0 * tf.ln() - c.log(tf).ln();
        r.push(Evaluation::from_ln("t4_log_t", c, ln_value, Kind::Gap));
    }
    let log_d_t = tf.ln() / df.ln();
    let ln_mid = -2.0 * log_d_t - 2.0 * log_d_t * (df * df + 1.0).ln() - (8.0 * log_d_t).ln();
    r.push(Evaluation::from_ln("intermediate", LogConvention::Independent, ln_mid, Kind::Gap));
    if let Some(m) = m {
        if m == 0 {
            return param("m must be positive");
        }
        let mf = m as f64;
        let ln_small = -2.0 * mf.ln() - mf - mf * (df * df + 1.0).ln();
        r.push(Evaluation::from_ln("small_chain", LogConvention::Independent, ln_small, Kind::Gap));
    }
    Ok(r)
}
