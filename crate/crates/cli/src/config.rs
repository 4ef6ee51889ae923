//! Flat `key = value` run configuration.
//!
//! Every key has a default matching the reference setup (TK preferences with
//! `gamma = 0.61`, N(0.045, 1.69) excess returns, Ho–Lee style rates around
//! 3%, fraction bounds [-5, 5], ten periods, `W0 = 0.8`), so an empty file is
//! a valid configuration.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cpt_alloc_core::{
    CdfSettings, Constraints, CptError, CptPreferences, DiscreteEmpirical, Distribution, RateModel,
    ReturnModel, SolverSettings, DEFAULT_GAMMA,
};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given twice")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: cannot parse `{value}` ({reason})")]
    BadValue {
        key: String,
        value: String,
        reason: String,
    },
    #[error("`{key}`: {reason}")]
    Constraint { key: String, reason: String },
    #[error("missing required key `{key}`: {reason}")]
    MissingKey { key: String, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

/// Which rate model drives `r_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMode {
    Deterministic,
    GaussianSqrtT,
}

impl RateMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            RateMode::Deterministic => "deterministic",
            RateMode::GaussianSqrtT => "gaussian_sqrt_t",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "deterministic" => Some(RateMode::Deterministic),
            "gaussian_sqrt_t" | "sqrt_t" => Some(RateMode::GaussianSqrtT),
            _ => None,
        }
    }
}

/// Everything a command needs, validated.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub alpha: f64,
    pub lambda: f64,
    pub gamma: f64,
    pub delta: f64,
    pub lo_frac: f64,
    pub hi_frac: f64,
    /// Mean of `y_{t+1}`; one value or one per period.
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
    /// Replaces the normal law by atoms loaded from a CSV file.
    pub atoms_file: Option<PathBuf>,
    pub rate_mode: RateMode,
    pub rate: f64,
    pub rate_vol: f64,
    pub horizon: usize,
    pub w0: f64,
    pub grid_points: usize,
    pub z_tol: f64,
    pub refine: bool,
    pub y_nodes: usize,
    pub r_nodes: usize,
    pub cdf_tol: f64,
    pub tail_mass: f64,
    pub n_paths: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub r_low: f64,
    pub r_high: f64,
    pub demo_grid_points: usize,
    atoms: Option<DiscreteEmpirical>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha: 0.88,
            lambda: 2.20,
            gamma: DEFAULT_GAMMA,
            delta: 0.69,
            lo_frac: -5.0,
            hi_frac: 5.0,
            mu: vec![0.045],
            sigma: vec![1.69],
            atoms_file: None,
            rate_mode: RateMode::GaussianSqrtT,
            rate: 0.03,
            rate_vol: 0.003,
            horizon: 10,
            w0: 0.8,
            grid_points: 1001,
            z_tol: 1e-6,
            refine: true,
            y_nodes: 64,
            r_nodes: 16,
            cdf_tol: 1e-9,
            tail_mass: 1e-10,
            n_paths: 10_000,
            seed: 20_240_601,
            out_dir: PathBuf::from("out"),
            r_low: 0.0,
            r_high: 0.5,
            demo_grid_points: 101,
            atoms: None,
        }
    }
}

/// Keys in canonical order.
pub const KEYS: &[&str] = &[
    "alpha",
    "lambda",
    "gamma",
    "delta",
    "lo_frac",
    "hi_frac",
    "mu",
    "sigma",
    "atoms_file",
    "rate_mode",
    "rate",
    "rate_vol",
    "horizon",
    "w0",
    "grid_points",
    "z_tol",
    "refine",
    "y_nodes",
    "r_nodes",
    "cdf_tol",
    "tail_mass",
    "n_paths",
    "seed",
    "out_dir",
    "r_low",
    "r_high",
    "demo_grid_points",
];

fn bad(key: &str, value: &str, reason: impl ToString) -> ConfigError {
    ConfigError::BadValue {
        key: key.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let x: f64 = value.parse().map_err(|e| bad(key, value, e))?;
    if !x.is_finite() {
        return Err(bad(key, value, "not a finite number"));
    }
    Ok(x)
}

fn parse_list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    value.split(',').map(|v| parse_f64(key, v.trim())).collect()
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value.parse().map_err(|e| bad(key, value, e))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(bad(key, value, "expected true or false")),
    }
}

impl RunConfig {
    /// Parses config text. Relative `atoms_file` paths resolve against
    /// `base_dir`, or the working directory when it is `None`.
    pub fn parse(text: &str, base_dir: Option<&Path>) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        let mut seen: Vec<&str> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.to_string(),
            })?;
            let key = key.trim();
            let value = value.trim();
            let known = KEYS.iter().find(|k| **k == key).ok_or_else(|| ConfigError::UnknownKey {
                line,
                key: key.to_string(),
            })?;
            if seen.contains(known) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(known);
            cfg.set(key, value, base_dir)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        Self::parse(&text, path.parent())
    }

    /// Sets one key from its text form without re-validating.
    pub fn set(&mut self, key: &str, value: &str, base_dir: Option<&Path>) -> Result<(), ConfigError> {
        match key {
            "alpha" => self.alpha = parse_f64(key, value)?,
            "lambda" => self.lambda = parse_f64(key, value)?,
            "gamma" => self.gamma = parse_f64(key, value)?,
            "delta" => self.delta = parse_f64(key, value)?,
            "lo_frac" => self.lo_frac = parse_f64(key, value)?,
            "hi_frac" => self.hi_frac = parse_f64(key, value)?,
            "mu" => self.mu = parse_list(key, value)?,
            "sigma" => self.sigma = parse_list(key, value)?,
            "atoms_file" => {
                self.atoms_file = if value.is_empty() {
                    None
                } else {
                    let p = PathBuf::from(value);
                    Some(match base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p,
                    })
                };
                self.atoms = None;
            }
            "rate_mode" => {
                self.rate_mode = RateMode::parse(value)
                    .ok_or_else(|| bad(key, value, "expected deterministic or gaussian_sqrt_t"))?
            }
            "rate" => self.rate = parse_f64(key, value)?,
            "rate_vol" => self.rate_vol = parse_f64(key, value)?,
            "horizon" => self.horizon = parse_usize(key, value)?,
            "w0" => self.w0 = parse_f64(key, value)?,
            "grid_points" => self.grid_points = parse_usize(key, value)?,
            "z_tol" => self.z_tol = parse_f64(key, value)?,
            "refine" => self.refine = parse_bool(key, value)?,
            "y_nodes" => self.y_nodes = parse_usize(key, value)?,
            "r_nodes" => self.r_nodes = parse_usize(key, value)?,
            "cdf_tol" => self.cdf_tol = parse_f64(key, value)?,
            "tail_mass" => self.tail_mass = parse_f64(key, value)?,
            "n_paths" => self.n_paths = parse_usize(key, value)?,
            "seed" => self.seed = value.parse().map_err(|e| bad(key, value, e))?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            "r_low" => self.r_low = parse_f64(key, value)?,
            "r_high" => self.r_high = parse_f64(key, value)?,
            "demo_grid_points" => self.demo_grid_points = parse_usize(key, value)?,
            _ => {
                return Err(ConfigError::UnknownKey {
                    line: 0,
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    /// Re-checks every model invariant and loads the atom file, if any.
    pub fn validate(&mut self) -> Result<(), ConfigError> {
        self.preferences()?;
        self.constraints()?;
        self.rate_model()?;
        if self.horizon == 0 {
            return Err(constraint("horizon", "must be >= 1"));
        }
        if self.mu.is_empty() || self.sigma.is_empty() {
            return Err(constraint("mu", "needs at least one value"));
        }
        for (key, len) in [("mu", self.mu.len()), ("sigma", self.sigma.len())] {
            if len != 1 && len != self.horizon {
                return Err(constraint(
                    key,
                    format!("has {len} values; expected 1 or horizon = {}", self.horizon),
                ));
            }
        }
        if !self.w0.is_finite() {
            return Err(constraint("w0", "must be finite"));
        }
        if self.n_paths == 0 {
            return Err(constraint("n_paths", "must be >= 1"));
        }
        if self.demo_grid_points < 3 {
            return Err(constraint("demo_grid_points", format!("{} is below 3", self.demo_grid_points)));
        }
        for (key, r) in [("r_low", self.r_low), ("r_high", self.r_high)] {
            if r <= -1.0 {
                return Err(constraint(key, format!("{r} must be > -1")));
            }
        }
        self.solver_settings().validate().map_err(from_core)?;
        self.atoms = match &self.atoms_file {
            Some(path) => Some(DiscreteEmpirical::from_csv_path(path).map_err(|e| ConfigError::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?),
            None => None,
        };
        self.returns()?;
        Ok(())
    }

    pub fn preferences(&self) -> Result<CptPreferences, ConfigError> {
        CptPreferences::from_params(self.alpha, self.lambda, self.gamma, self.delta).map_err(from_core)
    }

    pub fn constraints(&self) -> Result<Constraints, ConfigError> {
        Constraints::new(self.lo_frac, self.hi_frac).map_err(from_core)
    }

    pub fn rate_model(&self) -> Result<RateModel, ConfigError> {
        match self.rate_mode {
            RateMode::Deterministic => RateModel::deterministic(self.rate),
            RateMode::GaussianSqrtT => RateModel::gaussian_sqrt_t(self.rate, self.rate_vol),
        }
        .map_err(from_core)
    }

    /// Discrete law loaded from `atoms_file`, when one is configured.
    pub fn atoms(&self) -> Option<&DiscreteEmpirical> {
        self.atoms.as_ref()
    }

    pub fn returns(&self) -> Result<ReturnModel, ConfigError> {
        if let Some(atoms) = &self.atoms {
            return Ok(ReturnModel::stationary(Distribution::Discrete(atoms.clone())));
        }
        let n = self.mu.len().max(self.sigma.len());
        let pick = |v: &Vec<f64>, i: usize| if v.len() == 1 { v[0] } else { v[i] };
        let laws = (0..n)
            .map(|i| Distribution::normal(pick(&self.mu, i), pick(&self.sigma, i)))
            .collect::<Result<Vec<_>, CptError>>()
            .map_err(from_core)?;
        ReturnModel::schedule(laws).map_err(from_core)
    }

    pub fn solver_settings(&self) -> SolverSettings {
        SolverSettings {
            grid_points: self.grid_points,
            z_tol: self.z_tol,
            refine: self.refine,
            y_nodes: self.y_nodes,
            r_nodes: self.r_nodes,
            cdf: CdfSettings {
                rel_tol: self.cdf_tol,
                tail_mass: self.tail_mass,
                ..CdfSettings::default()
            },
        }
    }

    /// Canonical text: every key, in [`KEYS`] order.
    pub fn to_config_string(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("alpha", self.alpha.to_string());
        put("lambda", self.lambda.to_string());
        put("gamma", self.gamma.to_string());
        put("delta", self.delta.to_string());
        put("lo_frac", self.lo_frac.to_string());
        put("hi_frac", self.hi_frac.to_string());
        put("mu", list(&self.mu));
        put("sigma", list(&self.sigma));
        put(
            "atoms_file",
            self.atoms_file.as_ref().map(|p| p.display().to_string()).unwrap_or_default(),
        );
        put("rate_mode", self.rate_mode.as_str().to_string());
        put("rate", self.rate.to_string());
        put("rate_vol", self.rate_vol.to_string());
        put("horizon", self.horizon.to_string());
        put("w0", self.w0.to_string());
        put("grid_points", self.grid_points.to_string());
        put("z_tol", self.z_tol.to_string());
        put("refine", self.refine.to_string());
        put("y_nodes", self.y_nodes.to_string());
        put("r_nodes", self.r_nodes.to_string());
        put("cdf_tol", self.cdf_tol.to_string());
        put("tail_mass", self.tail_mass.to_string());
        put("n_paths", self.n_paths.to_string());
        put("seed", self.seed.to_string());
        put("out_dir", self.out_dir.display().to_string());
        put("r_low", self.r_low.to_string());
        put("r_high", self.r_high.to_string());
        put("demo_grid_points", self.demo_grid_points.to_string());
        s
    }
}

fn constraint(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Constraint {
        key: key.to_string(),
        reason: reason.into(),
    }
}

fn from_core(e: CptError) -> ConfigError {
    match e {
        CptError::InvalidParameter { name, reason } => constraint(name, reason),
        CptError::IllPosed { alpha, bound } => constraint(
            "alpha",
            format!("alpha = {alpha} violates alpha < 2*min(gamma, delta) = {bound}"),
        ),
        other => constraint("config", other.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_gives_reference_setup() {
        let cfg = RunConfig::parse("", None).unwrap();
        assert_eq!(cfg, RunConfig::default());
        assert_eq!(
            (cfg.alpha, cfg.lambda, cfg.gamma, cfg.delta),
            (0.88, 2.20, 0.61, 0.69)
        );
        assert_eq!((cfg.lo_frac, cfg.hi_frac), (-5.0, 5.0));
        assert_eq!((cfg.mu.as_slice(), cfg.sigma.as_slice()), (&[0.045][..], &[1.69][..]));
        assert_eq!((cfg.horizon, cfg.w0), (10, 0.8));
    }

    #[test]
    fn alpha_out_of_range_names_the_bound() {
        let err = RunConfig::parse("alpha = 1.5", None).unwrap_err();
        match err {
            ConfigError::Constraint { key, reason } => {
                assert_eq!(key, "alpha");
                assert!(reason.contains("(0, 1)"), "{reason}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ill_posed_preferences_rejected() {
        let err = RunConfig::parse("alpha = 0.9\ngamma = 0.4", None).unwrap_err();
        assert!(matches!(err, ConfigError::Constraint { ref key, .. } if key == "alpha"));
        assert!(err.to_string().contains("2*min(gamma, delta)"));
    }

    #[test]
    fn syntax_and_key_errors() {
        assert!(matches!(
            RunConfig::parse("alpha 0.5", None),
            Err(ConfigError::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("# c\nbeta = 0.5", None),
            Err(ConfigError::UnknownKey { line: 2, .. })
        ));
        assert!(matches!(
            RunConfig::parse("mu = 0.1\nmu = 0.2", None),
            Err(ConfigError::Duplicate { .. })
        ));
        assert!(matches!(RunConfig::parse("horizon = -3", None), Err(ConfigError::BadValue { .. })));
        assert!(matches!(RunConfig::parse("sigma = 0", None), Err(ConfigError::Constraint { .. })));
        assert!(matches!(
            RunConfig::parse("mu = 0.1,0.2,0.3", None),
            Err(ConfigError::Constraint { .. })
        ));
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = RunConfig::parse("  lambda=2.5   # stronger loss aversion\n\n# all else default\n", None)
            .unwrap();
        assert_eq!(cfg.lambda, 2.5);
    }

    #[test]
    fn round_trip_is_idempotent() {
        let cfg = RunConfig::parse("lambda = 2.2\nmu = 0.01,0.02,0.03\nhorizon = 3", None).unwrap();
        let once = cfg.to_config_string();
        let reparsed = RunConfig::parse(&once, None).unwrap();
        assert_eq!(reparsed, cfg);
        assert_eq!(reparsed.to_config_string(), once);
    }

    #[test]
    fn schedules_become_per_period_laws() {
        let cfg = RunConfig::parse("horizon = 2\nmu = 0.01,0.02\nsigma = 0.5", None).unwrap();
        let returns = cfg.returns().unwrap();
        assert_eq!(returns.len(), 2);
        assert_eq!(*returns.at(1), Distribution::normal(0.02, 0.5).unwrap());
    }

    #[test]
    fn missing_atom_file_is_an_io_error() {
        let err = RunConfig::parse("atoms_file = /nonexistent/atoms.csv", None).unwrap_err();
        assert!(matches!(err, ConfigError::Io { .. }));
    }
}
