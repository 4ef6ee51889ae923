//! Command implementations. Each returns the paths it wrote so callers and
//! tests can inspect them.

use std::io::Write;
use std::path::{Path, PathBuf};

use cpt_alloc_core::{
    backward_induction, cpt_of_scaled_position, fmt17, inconsistency_demo, simulate_paths, CptError,
    CptValue, DemoReport, Ensemble, PolicyTable,
};
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::config::{ConfigError, RunConfig};

#[derive(Debug, Error)]
pub enum AppError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] CptError),
    #[error("cannot write {path}: {reason}")]
    Io { path: String, reason: String },
}

impl AppError {
    /// 1 for bad input, 2 for failures while computing or writing.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Config(_) => 1,
            AppError::Core(e) if e.is_numerical() => 2,
            AppError::Core(_) => 1,
            AppError::Io { .. } => 2,
        }
    }
}

/// Parameters `sweep` can vary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    Alpha,
    Mu,
    Sigma,
    Delta,
    RateMode,
}

impl SweepParam {
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "alpha" => Some(SweepParam::Alpha),
            "mu" => Some(SweepParam::Mu),
            "sigma" => Some(SweepParam::Sigma),
            "delta" => Some(SweepParam::Delta),
            "rate-mode" | "rate_mode" => Some(SweepParam::RateMode),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Alpha => "alpha",
            SweepParam::Mu => "mu",
            SweepParam::Sigma => "sigma",
            SweepParam::Delta => "delta",
            SweepParam::RateMode => "rate-mode",
        }
    }

    fn key(&self) -> &'static str {
        match self {
            SweepParam::RateMode => "rate_mode",
            other => other.name(),
        }
    }
}

/// SHA-256 of the canonical config text plus the loaded atoms, if any.
pub fn config_hash(cfg: &RunConfig) -> String {
    let mut h = Sha256::new();
    h.update(cfg.to_config_string().as_bytes());
    if let Some(atoms) = cfg.atoms() {
        for (x, p) in atoms.atoms() {
            h.update(x.to_le_bytes());
            h.update(p.to_le_bytes());
        }
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn header(cfg: &RunConfig, command: &str) -> String {
    format!(
        "# cpt-alloc {} command={command} config_sha256={}\n",
        env!("CARGO_PKG_VERSION"),
        config_hash(cfg)
    )
}

fn io_err(path: &Path, e: impl ToString) -> AppError {
    AppError::Io {
        path: path.display().to_string(),
        reason: e.to_string(),
    }
}

/// Writes `path` through a temp file in the same directory, then renames.
pub fn write_atomic<F>(path: &Path, body: F) -> Result<(), AppError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| io_err(dir, e))?;
    {
        let mut buf = std::io::BufWriter::new(tmp.as_file_mut());
        body(&mut buf).map_err(|e| io_err(path, e))?;
        buf.flush().map_err(|e| io_err(path, e))?;
    }
    tmp.persist(path).map_err(|e| io_err(path, e.error))?;
    Ok(())
}

pub fn solve(cfg: &RunConfig) -> Result<PolicyTable, AppError> {
    Ok(backward_induction(
        &cfg.preferences()?,
        &cfg.constraints()?,
        &cfg.rate_model()?,
        &cfg.returns()?,
        cfg.horizon,
        &cfg.solver_settings(),
    )?)
}

/// `solve`: writes `policy.csv`.
pub fn run_solve(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf, AppError> {
    let table = solve(cfg)?;
    let path = out_dir.join("policy.csv");
    let head = header(cfg, "solve");
    write_atomic(&path, |w| {
        w.write_all(head.as_bytes())?;
        table.write_csv(w)
    })?;
    Ok(path)
}

pub fn simulate(cfg: &RunConfig, seed: u64) -> Result<Ensemble, AppError> {
    let table = solve(cfg)?;
    Ok(simulate_paths(
        &table,
        &cfg.rate_model()?,
        &cfg.returns()?,
        cfg.w0,
        cfg.n_paths,
        seed,
    )?)
}

/// `simulate`: writes `paths.csv` and `summary.csv`.
pub fn run_simulate(cfg: &RunConfig, out_dir: &Path) -> Result<Vec<PathBuf>, AppError> {
    let ensemble = simulate(cfg, cfg.seed)?;
    for p in &ensemble.paths {
        p.check_self_financing()?;
    }
    let head = header(cfg, "simulate");
    let paths = out_dir.join("paths.csv");
    write_atomic(&paths, |w| {
        w.write_all(head.as_bytes())?;
        ensemble.write_paths_csv(w)
    })?;
    let summary = out_dir.join("summary.csv");
    write_atomic(&summary, |w| {
        w.write_all(head.as_bytes())?;
        ensemble.write_summary_csv(w)
    })?;
    Ok(vec![paths, summary])
}

/// One solved grid point.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub value: String,
    pub table: PolicyTable,
}

/// Builds every grid config first so a bad value aborts before any solve.
pub fn sweep(cfg: &RunConfig, param: SweepParam, grid: &[String]) -> Result<Vec<SweepPoint>, AppError> {
    if grid.is_empty() {
        return Err(ConfigError::Constraint {
            key: "grid".into(),
            reason: "needs at least one value".into(),
        }
        .into());
    }
    let configs = grid
        .iter()
        .map(|v| {
            let mut c = cfg.clone();
            c.set(param.key(), v.trim(), None)?;
            c.validate()?;
            Ok((v.trim().to_string(), c))
        })
        .collect::<Result<Vec<_>, ConfigError>>()?;
    configs
        .into_par_iter()
        .map(|(value, c)| Ok(SweepPoint { value, table: solve(&c)? }))
        .collect()
}

/// `sweep`: writes `sweep_<param>.csv`.
pub fn run_sweep(
    cfg: &RunConfig,
    param: SweepParam,
    grid: &[String],
    out_dir: &Path,
) -> Result<PathBuf, AppError> {
    let points = sweep(cfg, param, grid)?;
    let path = out_dir.join(format!("sweep_{}.csv", param.key()));
    let head = header(cfg, &format!("sweep param={} grid={}", param.name(), grid.join(",")));
    write_atomic(&path, |w| {
        w.write_all(head.as_bytes())?;
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["param", "value", "t", "kStar", "kHatStar", "A_t", "B_t"])?;
        for p in &points {
            for row in p.table.rows() {
                wtr.write_record([
                    param.name().to_string(),
                    p.value.clone(),
                    row.t.to_string(),
                    fmt17(row.k_star),
                    fmt17(row.k_hat_star),
                    fmt17(row.a_coef),
                    fmt17(row.b_coef),
                ])?;
            }
        }
        wtr.flush()
    })?;
    Ok(path)
}

/// `value`: CPT value of `amount * y_1`.
pub fn run_value(cfg: &RunConfig, amount: f64) -> Result<CptValue, AppError> {
    if !amount.is_finite() {
        return Err(ConfigError::BadValue {
            key: "amount".into(),
            value: amount.to_string(),
            reason: "not a finite number".into(),
        }
        .into());
    }
    let returns = cfg.returns()?;
    Ok(cpt_of_scaled_position(
        &cfg.preferences()?,
        returns.at(0),
        amount,
        &cfg.solver_settings().cdf,
    )?)
}

pub fn demo(cfg: &RunConfig) -> Result<DemoReport, AppError> {
    let atoms = cfg.atoms().ok_or_else(|| ConfigError::MissingKey {
        key: "atoms_file".into(),
        reason: "demo needs a discrete excess-return law".into(),
    })?;
    Ok(inconsistency_demo(
        &cfg.preferences()?,
        &cfg.constraints()?,
        atoms,
        cfg.r_low,
        cfg.r_high,
        cfg.demo_grid_points,
        cfg.w0,
    )?)
}

/// `demo`: writes `demo.txt`.
pub fn run_demo(cfg: &RunConfig, out_dir: &Path) -> Result<PathBuf, AppError> {
    let report = demo(cfg)?;
    let path = out_dir.join("demo.txt");
    let head = header(cfg, "demo");
    write_atomic(&path, |w| {
        w.write_all(head.as_bytes())?;
        report.write_kv(w)
    })?;
    Ok(path)
}
