//! Run configuration: flat `key = value` files, flag overrides, and the
//! resolved-config echo embedded in every output.

use std::collections::BTreeMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::params::Parameters;
use crate::scaling::Quantity;
use crate::state::StepMode;
use crate::trajectory::geometric_checkpoints;

/// Build identifier embedded in outputs.
pub const BUILD_ID: &str = concat!("buffet-lab ", env!("CARGO_PKG_VERSION"));

/// Every key the configuration understands, with the subcommand that
/// consumes the specialized ones (`None` = shared by all subcommands).
const KEYS: &[(&str, Option<&str>)] = &[
    ("alpha", None),
    ("beta", None),
    ("theta", None),
    ("w", None),
    ("iota", None),
    ("horizon", None),
    ("master-seed", None),
    ("n-tagged", None),
    ("mode", None),
    ("points-per-decade", None),
    ("checkpoints", None),
    ("output", None),
    ("replicas", None),
    ("quantities", Some("ensemble")),
    ("lil-c", Some("ensemble")),
    ("t-check", Some("clt")),
    ("t-max", Some("clt")),
    ("fit-decades", Some("estimate")),
    ("epsilon", Some("recursion-lab")),
    ("gap-fraction", Some("report")),
];

/// An unresolved set of `key = value` assignments (from a file or from
/// command-line flags). Later insertions override earlier ones.
#[derive(Debug, Clone, Default)]
pub struct ConfigDraft {
    values: BTreeMap<String, String>,
}

impl ConfigDraft {
    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.values.insert(key.to_string(), value.to_string());
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut draft = ConfigDraft::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::InvalidConfig(format!(
                    "line {}: expected `key = value`, got `{raw}`",
                    lineno + 1
                )));
            };
            draft.set(key.trim(), value.trim());
        }
        Ok(draft)
    }

    /// Overlays `flags` on top of `self` (flags win).
    pub fn merged_with(mut self, flags: &ConfigDraft) -> ConfigDraft {
        for (k, v) in &flags.values {
            self.values.insert(k.clone(), v.clone());
        }
        self
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: Parameters,
    pub horizon: u64,
    pub master_seed: u64,
    pub n_tagged: usize,
    pub mode: StepMode,
    pub points_per_decade: u32,
    /// Explicit checkpoint list; empty means "geometric grid".
    pub explicit_checkpoints: Vec<u64>,
    pub output: Option<String>,
    pub replicas: usize,
    pub quantities: Vec<Quantity>,
    pub lil_c: f64,
    pub t_check: u64,
    pub t_max: u64,
    pub fit_decades: f64,
    pub epsilon: f64,
    pub gap_fraction: f64,
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse::<T>()
        .map_err(|_| Error::InvalidConfig(format!("key `{key}`: cannot parse `{value}`")))
}

fn parse_quantity(token: &str) -> Result<Quantity> {
    Ok(match token {
        "D" => Quantity::D,
        "Z" => Quantity::Z,
        "Tbar" => Quantity::Tbar,
        "Pbar" => Quantity::Pbar,
        "Kbar" => Quantity::Kbar,
        "K_tagged" => Quantity::KTagged,
        "P_tagged" => Quantity::PTagged,
        other => {
            return Err(Error::InvalidConfig(format!(
                "unknown quantity `{other}` (expected D, Z, Tbar, Pbar, Kbar, K_tagged, P_tagged)"
            )))
        }
    })
}

/// Resolves a draft for `subcommand`, applying defaults, rejecting
/// unknown keys and keys that belong to a different subcommand.
pub fn resolve(draft: &ConfigDraft, subcommand: &str) -> Result<RunConfig> {
    for key in draft.values.keys() {
        match KEYS.iter().find(|(k, _)| k == key) {
            None => {
                return Err(Error::InvalidConfig(format!("unknown key `{key}`")));
            }
            Some((_, Some(owner))) if *owner != subcommand => {
                return Err(Error::InvalidConfig(format!(
                    "key `{key}` belongs to subcommand `{owner}`, not `{subcommand}`"
                )));
            }
            _ => {}
        }
    }
    let get = |key: &str| draft.values.get(key).map(String::as_str);

    let alpha = get("alpha").map(|v| parse_num("alpha", v)).transpose()?.unwrap_or(1.0);
    let beta = get("beta").map(|v| parse_num("beta", v)).transpose()?.unwrap_or(0.5);
    let theta = get("theta").map(|v| parse_num("theta", v)).transpose()?.unwrap_or(1.0);
    let w = get("w").map(|v| parse_num("w", v)).transpose()?.unwrap_or(1.0);
    let iota = get("iota").map(|v| parse_num("iota", v)).transpose()?.unwrap_or(0.0);
    let params = Parameters::new(alpha, beta, theta, w, iota)
        .map_err(|e| Error::InvalidConfig(e.to_string()))?;

    let master_seed: u64 = match get("master-seed") {
        Some(v) => parse_num("master-seed", v)?,
        None => {
            return Err(Error::InvalidConfig(
                "missing `master-seed` (required; runs must be reproducible)".into(),
            ))
        }
    };

    let horizon: u64 = get("horizon").map(|v| parse_num("horizon", v)).transpose()?.unwrap_or(100_000);
    if horizon < 1 {
        return Err(Error::InvalidConfig("key `horizon`: must be >= 1".into()));
    }
    let t_max: u64 = get("t-max").map(|v| parse_num("t-max", v)).transpose()?.unwrap_or(horizon);
    let t_check: u64 = get("t-check").map(|v| parse_num("t-check", v)).transpose()?.unwrap_or(t_max / 100);

    let mode = match get("mode").unwrap_or("histogram") {
        "histogram" => StepMode::Histogram,
        "naive" => StepMode::Naive,
        other => {
            return Err(Error::InvalidConfig(format!(
                "key `mode`: expected histogram|naive, got `{other}`"
            )))
        }
    };

    let explicit_checkpoints = match get("checkpoints") {
        None => Vec::new(),
        Some(list) => {
            let mut cps = Vec::new();
            for token in list.split(',') {
                cps.push(parse_num::<u64>("checkpoints", token.trim())?);
            }
            cps
        }
    };

    let quantities = match get("quantities") {
        None => vec![Quantity::D, Quantity::Z, Quantity::Tbar, Quantity::Pbar, Quantity::Kbar],
        Some(list) => {
            let mut qs = Vec::new();
            for token in list.split(',') {
                qs.push(parse_quantity(token.trim())?);
            }
            qs
        }
    };

    Ok(RunConfig {
        params,
        horizon,
        master_seed,
        n_tagged: get("n-tagged").map(|v| parse_num("n-tagged", v)).transpose()?.unwrap_or(8),
        mode,
        points_per_decade: get("points-per-decade")
            .map(|v| parse_num("points-per-decade", v))
            .transpose()?
            .unwrap_or(40),
        explicit_checkpoints,
        output: get("output").map(str::to_string),
        replicas: get("replicas").map(|v| parse_num("replicas", v)).transpose()?.unwrap_or(50),
        quantities,
        lil_c: get("lil-c").map(|v| parse_num("lil-c", v)).transpose()?.unwrap_or(3.0),
        t_check,
        t_max,
        fit_decades: get("fit-decades").map(|v| parse_num("fit-decades", v)).transpose()?.unwrap_or(2.0),
        epsilon: get("epsilon").map(|v| parse_num("epsilon", v)).transpose()?.unwrap_or(1e-3),
        gap_fraction: get("gap-fraction").map(|v| parse_num("gap-fraction", v)).transpose()?.unwrap_or(0.05),
    })
}

impl RunConfig {
    /// The checkpoint schedule: explicit list if given, else geometric.
    pub fn checkpoints(&self) -> Vec<u64> {
        if self.explicit_checkpoints.is_empty() {
            geometric_checkpoints(self.horizon, self.points_per_decade)
        } else {
            self.explicit_checkpoints.clone()
        }
    }

    /// The fully resolved configuration as ordered key/value pairs, for
    /// embedding into outputs.
    pub fn echo(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("build".into(), BUILD_ID.to_string()),
            ("alpha".into(), self.params.alpha.to_string()),
            ("beta".into(), self.params.beta.to_string()),
            ("theta".into(), self.params.theta.to_string()),
            ("w".into(), self.params.w.to_string()),
            ("iota".into(), self.params.iota.to_string()),
            ("horizon".into(), self.horizon.to_string()),
            ("master-seed".into(), self.master_seed.to_string()),
            ("n-tagged".into(), self.n_tagged.to_string()),
            (
                "mode".into(),
                match self.mode {
                    StepMode::Histogram => "histogram".into(),
                    StepMode::Naive => "naive".to_string(),
                },
            ),
            ("points-per-decade".into(), self.points_per_decade.to_string()),
            ("replicas".into(), self.replicas.to_string()),
            ("lil-c".into(), self.lil_c.to_string()),
            ("t-check".into(), self.t_check.to_string()),
            ("t-max".into(), self.t_max.to_string()),
            ("fit-decades".into(), self.fit_decades.to_string()),
            ("epsilon".into(), self.epsilon.to_string()),
            ("gap-fraction".into(), self.gap_fraction.to_string()),
        ];
        if !self.explicit_checkpoints.is_empty() {
            let list = self
                .explicit_checkpoints
                .iter()
                .map(u64::to_string)
                .collect::<Vec<_>>()
                .join(",");
            out.push(("checkpoints".into(), list));
        }
        out
    }
}
