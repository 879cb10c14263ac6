//! Flat `key = value` configuration with `#` comments.

use std::collections::BTreeMap;
use std::path::PathBuf;

use anisotrap::propagator::{Method, StepPolicy};
use anisotrap::trap::{resolve_geometry, CouplingGeometry, LambdaConvention, LaserDirection, SecondMode};

use crate::error::{CliError, CliResult};

/// Every key the parser accepts.
pub const KNOWN_KEYS: &[&str] = &[
    "nu_a",
    "nu_b",
    "dnu_over_lambda",
    "alpha",
    "theta",
    "k",
    "mass",
    "rabi_omega",
    "lambda_convention",
    "n",
    "n_max",
    "method",
    "loop_samples",
    "steps_density",
    "steps_tolerance",
    "steps_max",
    "n_list",
    "evolve_methods",
    "sweep_dnu_over_lambda",
    "sweep_n",
    "sweep_theta",
    "format",
    "out",
    "precision",
];

/// Keys left as they were written, before any interpretation.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawConfig {
    entries: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if cfg.entries.contains_key(key) {
                return Err(CliError::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
            cfg.set(key, value.trim())?;
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(CliError::Config(format!("unknown key `{key}`")));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn remove(&mut self, key: &str) {
        self.entries.remove(key);
    }

    /// Apply a `key=value` override.
    pub fn apply_override(&mut self, spec: &str) -> CliResult<()> {
        let (key, value) = spec
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("override `{spec}` is not `key=value`")))?;
        self.set(key.trim(), value.trim())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    /// Canonical one-line rendering, `key=value` pairs in key order joined by
    /// `;`. Output-only keys are omitted so the string identifies the physics.
    pub fn fingerprint(&self) -> String {
        self.entries
            .iter()
            .filter(|(k, _)| !matches!(k.as_str(), "out" | "format"))
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(";")
    }

    /// Inverse of [`RawConfig::fingerprint`].
    pub fn from_fingerprint(s: &str) -> CliResult<Self> {
        let mut cfg = Self::default();
        for pair in s.split(';').filter(|p| !p.is_empty()) {
            cfg.apply_override(pair)?;
        }
        Ok(cfg)
    }

    fn number(&self, key: &str) -> CliResult<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::Config(format!("`{key}` = `{v}` is not a finite number")))
            })
            .transpose()
    }

    fn required(&self, key: &str) -> CliResult<f64> {
        self.number(key)?.ok_or_else(|| CliError::Config(format!("missing required key `{key}`")))
    }

    fn integer(&self, key: &str) -> CliResult<Option<usize>> {
        self.get(key)
            .map(|v| v.parse::<usize>().map_err(|_| CliError::Config(format!("`{key}` = `{v}` is not a non-negative integer"))))
            .transpose()
    }

    fn list<T: std::str::FromStr>(&self, key: &str) -> CliResult<Option<Vec<T>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| s.parse::<T>().map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{s}`"))))
                    .collect()
            })
            .transpose()
    }

    fn one_of(&self, a: &str, b: &str) -> CliResult<()> {
        match (self.get(a).is_some(), self.get(b).is_some()) {
            (true, false) | (false, true) => Ok(()),
            (true, true) => Err(CliError::Config(format!("give exactly one of `{a}` and `{b}`, not both"))),
            (false, false) => Err(CliError::Config(format!("give exactly one of `{a}` and `{b}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = CliError;

    fn from_str(s: &str) -> CliResult<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(CliError::Config(format!("unknown format `{other}` (expected csv or json)"))),
        }
    }
}

/// Physical inputs, resolved lazily because the geometry may fail for
/// physics reasons rather than syntax.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalInputs {
    pub nu_a: f64,
    pub second: SecondMode,
    pub direction: LaserDirection,
    pub k: f64,
    pub mass: f64,
    pub rabi_omega: f64,
    pub convention: LambdaConvention,
}

impl PhysicalInputs {
    pub fn geometry(&self) -> anisotrap::Result<CouplingGeometry> {
        resolve_geometry(self.nu_a, self.second, self.direction, self.k, self.rabi_omega, self.mass, self.convention)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub physical: PhysicalInputs,
    pub n: usize,
    pub n_max: usize,
    pub method: Method,
    pub loop_samples: usize,
    pub steps: StepPolicy,
    pub n_list: Vec<usize>,
    pub evolve_methods: Vec<Method>,
    pub sweep_dnu_over_lambda: Vec<f64>,
    pub sweep_n: Vec<usize>,
    pub sweep_theta: Vec<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub precision: usize,
}

impl RunConfig {
    pub fn resolve(raw: RawConfig) -> CliResult<Self> {
        raw.one_of("alpha", "theta")?;
        raw.one_of("nu_b", "dnu_over_lambda")?;
        let direction = match raw.number("alpha")? {
            Some(a) => LaserDirection::Alpha(a),
            None => LaserDirection::Theta(raw.required("theta")?),
        };
        let second = match raw.number("nu_b")? {
            Some(nu_b) => SecondMode::NuB(nu_b),
            None => SecondMode::DnuOverLambda(raw.required("dnu_over_lambda")?),
        };
        let convention = match raw.get("lambda_convention").unwrap_or("standard") {
            "standard" => LambdaConvention::Standard,
            "literal" => LambdaConvention::Literal,
            other => return Err(CliError::Config(format!("unknown lambda_convention `{other}`"))),
        };
        let physical = PhysicalInputs {
            nu_a: raw.required("nu_a")?,
            second,
            direction,
            k: raw.required("k")?,
            mass: raw.required("mass")?,
            rabi_omega: raw.required("rabi_omega")?,
            convention,
        };

        let n = raw.integer("n")?.unwrap_or(4);
        let n_max = raw.integer("n_max")?.unwrap_or(n + 1);
        if n_max < n + 1 {
            return Err(CliError::Config(format!("n_max = {n_max} must be at least N + 1 = {}", n + 1)));
        }
        let method = raw.get("method").unwrap_or("closed").parse::<Method>().map_err(|e| CliError::Config(e.to_string()))?;
        let loop_samples = raw.integer("loop_samples")?.unwrap_or(2048);
        if loop_samples < 3 {
            return Err(CliError::Config(format!("loop_samples = {loop_samples} must be at least 3")));
        }
        let defaults = StepPolicy::default();
        let steps = StepPolicy {
            density: raw.number("steps_density")?.unwrap_or(defaults.density),
            tolerance: raw.number("steps_tolerance")?.unwrap_or(defaults.tolerance),
            max_steps: raw.integer("steps_max")?.unwrap_or(defaults.max_steps),
        };
        if !(steps.density > 0.0 && steps.tolerance > 0.0 && steps.max_steps >= 1) {
            return Err(CliError::Config("step policy needs positive density, tolerance and steps_max".into()));
        }
        let evolve_methods = match raw.get("evolve_methods") {
            Some(v) => v
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<Method>().map_err(|e| CliError::Config(e.to_string())))
                .collect::<CliResult<Vec<_>>>()?,
            None => vec![Method::Closed, Method::Stepped, Method::Adiabatic],
        };
        let precision = raw.integer("precision")?.unwrap_or(17);
        if !(1..=17).contains(&precision) {
            return Err(CliError::Config(format!("precision = {precision} must lie in 1..=17")));
        }

        Ok(Self {
            physical,
            n,
            n_max,
            method,
            loop_samples,
            steps,
            n_list: raw.list("n_list")?.unwrap_or_else(|| (2..=n).collect()),
            evolve_methods,
            sweep_dnu_over_lambda: raw.list("sweep_dnu_over_lambda")?.unwrap_or_default(),
            sweep_n: raw.list("sweep_n")?.unwrap_or_default(),
            sweep_theta: raw.list("sweep_theta")?.unwrap_or_default(),
            format: raw.get("format").unwrap_or("csv").parse()?,
            out: raw.get("out").map(PathBuf::from),
            precision,
            raw,
        })
    }
}
