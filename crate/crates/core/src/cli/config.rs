use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    App1,
    App2,
    ComparePeq2,
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "app1" => Ok(Experiment::App1),
            "app2" => Ok(Experiment::App2),
            "compare-p2" => Ok(Experiment::ComparePeq2),
            other => Err(format!("unknown experiment `{other}` (expected app1, app2 or compare-p2)")),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Experiment::App1 => "app1",
            Experiment::App2 => "app2",
            Experiment::ComparePeq2 => "compare-p2",
        })
    }
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub mesh: usize,
    pub p: f64,
    pub iters: usize,
    pub seed: u64,
    pub beta: f64,
    pub tau: f64,
    pub alpha: f64,
    pub kmax: usize,
    pub t0: f64,
    pub gamma: f64,
    /// 0 disables energy logging.
    pub energy_every: usize,
    pub mc_samples: usize,
    pub out: PathBuf,
}

impl RunConfig {
    /// Defaults for `experiment` with the given seed.
    pub fn defaults(experiment: Experiment, seed: u64) -> Self {
        let (p, alpha) = match experiment {
            Experiment::App1 => (4.0, 3.0),
            Experiment::App2 => (4.0, 2.0),
            Experiment::ComparePeq2 => (2.0, 2.0),
        };
        Self {
            experiment,
            mesh: 32,
            p,
            iters: 200,
            seed,
            beta: 1e-2,
            tau: 1.0,
            alpha,
            kmax: 10,
            t0: 1.0,
            gamma: 1.0,
            energy_every: 10,
            mc_samples: 20,
            out: PathBuf::from(format!("out/{experiment}")),
        }
    }
}

pub const KEYS: [&str; 14] = [
    "experiment",
    "mesh",
    "p",
    "iters",
    "seed",
    "beta",
    "tau",
    "alpha",
    "kmax",
    "t0",
    "gamma",
    "energy_every",
    "mc_samples",
    "out",
];

/// Parses `key = value` lines; `#` starts a comment. Dashes in keys are
/// normalized to underscores.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| Error::Config {
            field: format!("line {}", idx + 1),
            message: format!("expected `key = value`, got `{line}`"),
        })?;
        map.insert(normalize_key(key), value.trim().to_string());
    }
    Ok(map)
}

pub(crate) fn normalize_key(key: &str) -> String {
    key.trim().trim_start_matches("--").replace('-', "_")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl fmt::Display for FieldError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub config: Option<RunConfig>,
    pub errors: Vec<FieldError>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn into_result(self) -> Result<RunConfig> {
        match (self.config, self.errors.into_iter().next()) {
            (Some(c), None) => Ok(c),
            (_, Some(e)) => Err(Error::Config {
                field: e.field,
                message: e.message,
            }),
            (None, None) => unreachable!("a report without config carries errors"),
        }
    }
}

struct Collector<'a> {
    raw: &'a BTreeMap<String, String>,
    errors: Vec<FieldError>,
}

impl Collector<'_> {
    fn fail(&mut self, field: &str, message: impl Into<String>) {
        self.errors.push(FieldError {
            field: field.to_string(),
            message: message.into(),
        });
    }

    fn parse<T: FromStr>(&mut self, field: &str, default: T) -> T
    where
        T::Err: fmt::Display,
    {
        match self.raw.get(field) {
            None => default,
            Some(s) => match s.parse() {
                Ok(v) => v,
                Err(e) => {
                    self.fail(field, format!("cannot parse `{s}`: {e}"));
                    default
                }
            },
        }
    }
}

/// Resolves raw key-value pairs into a [`RunConfig`], collecting every
/// problem with the field it concerns.
pub fn validate(raw: &BTreeMap<String, String>) -> ValidationReport {
    let mut c = Collector {
        raw,
        errors: Vec::new(),
    };
    for key in raw.keys() {
        if !KEYS.contains(&key.as_str()) {
            c.fail(key, "unknown key");
        }
    }

    let experiment = match raw.get("experiment") {
        None => {
            c.fail("experiment", "missing (app1, app2 or compare-p2)");
            Experiment::App1
        }
        Some(s) => s.parse().unwrap_or_else(|e: String| {
            c.fail("experiment", e);
            Experiment::App1
        }),
    };
    let seed = match raw.get("seed") {
        None => {
            c.fail("seed", "missing; every run needs an explicit seed");
            0
        }
        Some(_) => c.parse("seed", 0u64),
    };
    let d = RunConfig::defaults(experiment, seed);
    let cfg = RunConfig {
        experiment,
        seed,
        mesh: c.parse("mesh", d.mesh),
        p: c.parse("p", d.p),
        iters: c.parse("iters", d.iters),
        beta: c.parse("beta", d.beta),
        tau: c.parse("tau", d.tau),
        alpha: c.parse("alpha", d.alpha),
        kmax: c.parse("kmax", d.kmax),
        t0: c.parse("t0", d.t0),
        gamma: c.parse("gamma", d.gamma),
        energy_every: c.parse("energy_every", d.energy_every),
        mc_samples: c.parse("mc_samples", d.mc_samples),
        out: c.parse("out", d.out),
    };

    if cfg.mesh == 0 {
        c.fail("mesh", "must be at least 1");
    }
    if !(cfg.p >= 2.0 && cfg.p.is_finite()) {
        c.fail("p", format!("must satisfy p >= 2, got {}", cfg.p));
    }
    if experiment == Experiment::ComparePeq2 && cfg.p != 2.0 {
        c.fail("p", "compare-p2 runs in the Hilbert case p = 2");
    }
    if !(cfg.beta > 0.0 && cfg.beta.is_finite()) {
        c.fail("beta", format!("must be positive, got {}", cfg.beta));
    }
    if !(cfg.tau > 0.0 && cfg.tau.is_finite()) {
        c.fail("tau", format!("must be positive, got {}", cfg.tau));
    }
    if !(cfg.alpha > 1.0 && cfg.alpha.is_finite()) {
        c.fail("alpha", format!("must exceed 1 for continuous draws in 2d, got {}", cfg.alpha));
    }
    if !(cfg.t0 > 0.0 && cfg.t0.is_finite()) {
        c.fail("t0", format!("must be positive, got {}", cfg.t0));
    }
    if !(cfg.gamma > 0.0 && cfg.gamma <= 1.0) {
        c.fail("gamma", format!("must lie in (0, 1] for the rate condition, got {}", cfg.gamma));
    }
    if cfg.mc_samples == 0 {
        c.fail("mc_samples", "must be at least 1");
    }

    let errors = c.errors;
    ValidationReport {
        config: errors.is_empty().then_some(cfg),
        errors,
    }
}
