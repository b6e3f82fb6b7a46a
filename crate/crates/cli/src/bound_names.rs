use std::collections::BTreeMap;

use rqc_core::bounds::{self, BoundReport, CircuitModel, Conversion};

use crate::{usage, CliResult};

pub const BOUND_NAMES: [&str; 14] = [
    "tpe_gap",
    "design_length",
    "g_design",
    "nachtergaele",
    "path_coupling",
    "wasserstein",
    "converse",
    "support",
    "covering",
    "hiding",
    "g_from_gap",
    "detectability",
    "parallel_from_detectability",
    "gap_floor",
];

/// Typed access to `key=value` arguments; every key must be consumed.
struct KeyValues {
    name: String,
    values: BTreeMap<String, String>,
}

impl KeyValues {
    fn new(name: &str, args: &[(String, String)]) -> CliResult<Self> {
        let mut values = BTreeMap::new();
        for (k, v) in args {
            if values.insert(k.clone(), v.clone()).is_some() {
                return usage(format!("{name}: key {k} given twice"));
            }
        }
        Ok(Self {
            name: name.to_string(),
            values,
        })
    }

    fn take_str(&mut self, key: &str) -> CliResult<Option<String>> {
        Ok(self.values.remove(key))
    }

    fn parse<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<Option<T>> {
        match self.values.remove(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse()
                .map(Some)
                .or_else(|_| usage(format!("{}: cannot parse {key}={raw}", self.name))),
        }
    }

    fn req<T: std::str::FromStr>(&mut self, key: &str) -> CliResult<T> {
        match self.parse(key)? {
            Some(v) => Ok(v),
            None => usage(format!("{}: missing {key}=...", self.name)),
        }
    }

    fn model(&mut self) -> CliResult<CircuitModel> {
        match self.take_str("model")?.as_deref() {
            None | Some("lr") => Ok(CircuitModel::Lr),
            Some("plr") => Ok(CircuitModel::Plr),
            Some(other) => usage(format!("{}: model must be lr or plr, got {other}", self.name)),
        }
    }

    fn finish(self) -> CliResult<()> {
        match self.values.keys().next() {
            None => Ok(()),
            Some(k) => usage(format!("{}: unknown key {k}", self.name)),
        }
    }
}

fn conversion(raw: &str) -> CliResult<Conversion> {
    Ok(match raw {
        "tpe_to_design" => Conversion::TpeToDesign,
        "design_to_tpe" => Conversion::DesignToTpe,
        "design_to_diamond" => Conversion::DesignToDiamond,
        "diamond_to_design" => Conversion::DiamondToDesign,
        other => {
            return usage(format!(
                "direction must be tpe_to_design, design_to_tpe, design_to_diamond or diamond_to_design, got {other}"
            ))
        }
    })
}

/// Evaluates a named bound from `key=value` arguments.
pub fn run_bound(name: &str, args: &[(String, String)]) -> CliResult<BoundReport> {
    let mut kv = KeyValues::new(name, args)?;
    let report = match name {
        "tpe_gap" => {
            let (n, t, d) = (kv.req("n")?, kv.req("t")?, kv.req("d")?);
            bounds::tpe_gap_bound(n, t, d, kv.model()?)
        }
        "design_length" => {
            let (n, t, d, eps) = (kv.req("n")?, kv.req("t")?, kv.req("d")?, kv.req("eps")?);
            bounds::design_length(n, t, d, eps, kv.model()?)
        }
        "g_design" => {
            let (value, big_n, t) = (kv.req("value")?, kv.req("N")?, kv.req("t")?);
            let direction = match kv.take_str("direction")? {
                Some(raw) => conversion(&raw)?,
                None => Conversion::TpeToDesign,
            };
            bounds::g_design_conversion(value, big_n, t, direction)
        }
        "nachtergaele" => {
            let (gap, t, d) = (kv.req("gap")?, kv.req("t")?, kv.req("d")?);
            bounds::nachtergaele_compose(gap, t, d, kv.parse("n")?)
        }
        "path_coupling" => {
            let (n, d, k) = (kv.req("n")?, kv.req("d")?, kv.req("k")?);
            bounds::path_coupling_contraction(n, d, k)
        }
        "wasserstein" => {
            let (w, t) = (kv.req("w")?, kv.req("t")?);
            bounds::wasserstein_to_g(w, t)
        }
        "converse" => {
            let (n, t, d, eps) = (kv.req("n")?, kv.req("t")?, kv.req("d")?, kv.req("eps")?);
            bounds::converse_lower_bound(n, t, d, eps)
        }
        "support" => {
            let (big_n, t, eps) = (kv.req("N")?, kv.req("t")?, kv.req("eps")?);
            bounds::design_support_lb(big_n, t, eps)
        }
        "covering" => {
            let (n, r, d, eps) = (kv.req("n")?, kv.req("r")?, kv.req("d")?, kv.req("eps")?);
            bounds::covering_size(n, r, d, eps)
        }
        "hiding" => {
            let (n, d, s, r, delta) = (kv.req("n")?, kv.req("d")?, kv.req("s")?, kv.req("r")?, kv.req("delta")?);
            bounds::hiding_bound(n, d, s, r, delta)
        }
        "g_from_gap" => {
            let (gap, n) = (kv.req("gap")?, kv.req("n")?);
            bounds::g_from_gap(gap, n)
        }
        "detectability" => bounds::detectability_bound(kv.req("gap")?),
        "parallel_from_detectability" => bounds::parallel_from_detectability(kv.req("norm")?),
        "gap_floor" => {
            let (t, d) = (kv.req("t")?, kv.req("d")?);
            bounds::gap_floor(t, d, kv.parse("m")?)
        }
        other => return usage(format!("unknown bound {other}; expected one of {}", BOUND_NAMES.join(", "))),
    };
    kv.finish()?;
    Ok(report?)
}
