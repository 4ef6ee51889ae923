//! Backward induction for the CPT-optimal fraction policy.
//!
//! With the last-period benchmark the optimal prospect value from time `t`
//! is `A_t * W^alpha` for `W >= 0` and `-B_t * (-W)^alpha` for `W < 0`. The
//! terminal pair comes from the CPT values of a unit long and a unit short
//! position in `y_T`; every earlier pair is a plain expectation of the next
//! one over `(r_t, y_{t+1})`, maximised over the admissible fraction.

use std::io::Write;

use rayon::prelude::*;

use crate::choquet::{cpt_value, CdfSettings};
use crate::dist::{Distribution, RateModel};
use crate::error::{CptError, Result};
use crate::prefs::CptPreferences;

/// Fraction bounds `A <= 0 < B`: a trade `v` is admissible at wealth `W`
/// when `A |W| <= v <= B |W|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Constraints {
    lo_frac: f64,
    hi_frac: f64,
}

impl Constraints {
    pub fn new(lo_frac: f64, hi_frac: f64) -> Result<Self> {
        if !lo_frac.is_finite() || lo_frac > 0.0 {
            return Err(CptError::invalid("lo_frac", format!("{lo_frac} must be finite and <= 0")));
        }
        if !hi_frac.is_finite() || hi_frac <= 0.0 {
            return Err(CptError::invalid("hi_frac", format!("{hi_frac} must be finite and > 0")));
        }
        Ok(Self { lo_frac, hi_frac })
    }

    pub fn lo_frac(&self) -> f64 {
        self.lo_frac
    }

    pub fn hi_frac(&self) -> f64 {
        self.hi_frac
    }

    /// `v` is admissible at wealth `w`, with a relative slack for rounding.
    pub fn admits(&self, w: f64, v: f64) -> bool {
        let slack = 1e-12 * (w.abs() * self.lo_frac.abs().max(self.hi_frac)).max(f64::MIN_POSITIVE);
        self.lo_frac * w.abs() - slack <= v && v <= self.hi_frac * w.abs() + slack
    }
}

/// CPT values of a unit long (`k`) and unit short (`h`) position in `y_T`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TerminalStats {
    pub k: f64,
    pub h: f64,
}

/// One row of the policy table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyCoefficients {
    pub t: usize,
    /// Optimal value per unit `W^alpha` when `W_t >= 0`.
    pub a_coef: f64,
    /// Optimal value is `-b_coef * (-W)^alpha` when `W_t < 0`.
    pub b_coef: f64,
    /// Fraction of wealth traded when `W_t >= 0`, in `[A, B]`.
    pub k_star: f64,
    /// Fraction of wealth traded when `W_t < 0`, in `[-B, -A]`.
    pub k_hat_star: f64,
}

/// Numerical settings of the backward induction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Uniform scan points over each fraction interval (zero is always added).
    pub grid_points: usize,
    /// Golden-section stopping width, also the value tolerance for ties.
    pub z_tol: f64,
    /// Refine the best grid point by golden-section search.
    pub refine: bool,
    /// Gauss–Hermite nodes for a normal excess return.
    pub y_nodes: usize,
    /// Gauss–Hermite nodes for a stochastic rate.
    pub r_nodes: usize,
    pub cdf: CdfSettings,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            grid_points: 1001,
            z_tol: 1e-6,
            refine: true,
            y_nodes: 64,
            r_nodes: 16,
            cdf: CdfSettings::default(),
        }
    }
}

impl SolverSettings {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(CptError::invalid("grid_points", format!("{} must be >= 2", self.grid_points)));
        }
        if !(self.z_tol > 0.0) || !self.z_tol.is_finite() {
            return Err(CptError::invalid("z_tol", format!("{} must be > 0", self.z_tol)));
        }
        if self.y_nodes == 0 {
            return Err(CptError::invalid("y_nodes", "must be positive"));
        }
        if self.r_nodes == 0 {
            return Err(CptError::invalid("r_nodes", "must be positive"));
        }
        self.cdf.validate()
    }
}

/// Excess-return law per period: either one law for every period or one
/// per period, where entry `t` is the law of `y_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnModel {
    laws: Vec<Distribution>,
}

impl ReturnModel {
    pub fn stationary(law: Distribution) -> Self {
        Self { laws: vec![law] }
    }

    pub fn schedule(laws: Vec<Distribution>) -> Result<Self> {
        if laws.is_empty() {
            return Err(CptError::invalid("returns", "schedule is empty"));
        }
        Ok(Self { laws })
    }

    /// Law of `y_{t+1}`.
    pub fn at(&self, t: usize) -> &Distribution {
        if self.laws.len() == 1 {
            &self.laws[0]
        } else {
            &self.laws[t.min(self.laws.len() - 1)]
        }
    }

    pub fn is_stationary(&self) -> bool {
        self.laws.len() == 1
    }

    pub fn len(&self) -> usize {
        self.laws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.laws.is_empty()
    }

    fn check_horizon(&self, horizon: usize) -> Result<()> {
        if self.laws.len() != 1 && self.laws.len() != horizon {
            return Err(CptError::invalid(
                "returns",
                format!("schedule has {} periods but horizon is {horizon}", self.laws.len()),
            ));
        }
        Ok(())
    }
}

impl From<Distribution> for ReturnModel {
    fn from(d: Distribution) -> Self {
        ReturnModel::stationary(d)
    }
}

/// Policy coefficients for periods `0..T`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyTable {
    rows: Vec<PolicyCoefficients>,
    settings: SolverSettings,
}

impl PolicyTable {
    pub fn new(rows: Vec<PolicyCoefficients>, settings: SolverSettings) -> Result<Self> {
        if rows.is_empty() {
            return Err(CptError::invalid("rows", "a policy table needs at least one period"));
        }
        if let Some((i, _)) = rows.iter().enumerate().find(|(i, r)| r.t != *i) {
            return Err(CptError::invalid("rows", format!("row {i} is out of order")));
        }
        Ok(Self { rows, settings })
    }

    pub fn horizon(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[PolicyCoefficients] {
        &self.rows
    }

    pub fn row(&self, t: usize) -> Result<&PolicyCoefficients> {
        self.rows
            .get(t)
            .ok_or_else(|| CptError::IndexOutOfRange(format!("period {t} >= horizon {}", self.rows.len())))
    }

    /// Rows an investor starting at period `s` uses; identical to the tail
    /// of the table since each row depends only on its period.
    pub fn from_time(&self, s: usize) -> Result<&[PolicyCoefficients]> {
        if s >= self.rows.len() {
            return Err(CptError::IndexOutOfRange(format!("start {s} >= horizon {}", self.rows.len())));
        }
        Ok(&self.rows[s..])
    }

    pub fn settings(&self) -> &SolverSettings {
        &self.settings
    }

    /// Writes `t,A_t,B_t,kStar,kHatStar` rows with 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "A_t", "B_t", "kStar", "kHatStar"])?;
        for r in &self.rows {
            wtr.write_record([
                r.t.to_string(),
                fmt17(r.a_coef),
                fmt17(r.b_coef),
                fmt17(r.k_star),
                fmt17(r.k_hat_star),
            ])?;
        }
        wtr.flush()
    }
}

/// Decimal text with 17 significant digits, enough to round-trip any `f64`.
/// Negative zero prints as zero.
pub fn fmt17(x: f64) -> String {
    format!("{:.16e}", x + 0.0)
}

/// CPT values `k = U(y)` and `h = U(-y)` of the unit positions.
pub fn terminal_stats(prefs: &CptPreferences, y: &Distribution, cdf: &CdfSettings) -> Result<TerminalStats> {
    let k = cpt_value(prefs, y, cdf)?.value();
    let h = cpt_value(prefs, &y.negated(), cdf)?.value();
    Ok(TerminalStats { k, h })
}

/// Last-period row. `g(z) = z^alpha k` on `[0, B]` and `(-z)^alpha h` on
/// `[A, 0]` is monotone on each side, so only `{A, 0, B}` can be optimal;
/// exact ties go to the smallest `|z|`.
pub fn terminal_coefficients(
    prefs: &CptPreferences,
    constraints: &Constraints,
    stats: &TerminalStats,
    period: usize,
) -> PolicyCoefficients {
    let lo = constraints.lo_frac;
    let hi = constraints.hi_frac;
    let long = hi.powf(prefs.alpha()) * stats.k;
    let short = (-lo).powf(prefs.alpha()) * stats.h;

    let (k_star, a_coef) = best_corner(&[(0.0, 0.0), (lo, short), (hi, long)]);
    let (k_hat_star, l_max) = best_corner(&[(0.0, 0.0), (-hi, long), (-lo, short)]);
    PolicyCoefficients {
        t: period,
        a_coef,
        b_coef: -l_max,
        k_star,
        k_hat_star,
    }
}

fn best_corner(candidates: &[(f64, f64)]) -> (f64, f64) {
    let mut sorted = candidates.to_vec();
    sorted.sort_by(|a, b| a.0.abs().total_cmp(&b.0.abs()));
    let mut best = sorted[0];
    for &c in &sorted[1..] {
        if c.1 > best.1 {
            best = c;
        }
    }
    best
}

/// Joint quadrature grid for `(r_t, y_{t+1})`: `(1 + r, y, weight)`.
fn joint_nodes(rates: &RateModel, y: &Distribution, t: usize, settings: &SolverSettings) -> Vec<(f64, f64, f64)> {
    let r_nodes = rates.expectation_nodes(t, settings.r_nodes);
    let y_nodes = y.expectation_nodes(settings.y_nodes);
    let mut nodes = Vec::with_capacity(r_nodes.len() * y_nodes.len());
    for &(r, wr) in &r_nodes {
        for &(yv, wy) in &y_nodes {
            nodes.push((1.0 + r, yv, wr * wy));
        }
    }
    nodes
}

/// `g_t(z)`: expected next-period value per unit `W_t^alpha` for `W_t >= 0`.
fn expected_long(nodes: &[(f64, f64, f64)], next: &PolicyCoefficients, alpha: f64, z: f64) -> f64 {
    let mut acc = 0.0;
    for &(gross, y, w) in nodes {
        let x = gross + y * z;
        acc += if x >= 0.0 {
            w * next.a_coef * x.powf(alpha)
        } else {
            -w * next.b_coef * (-x).powf(alpha)
        };
    }
    acc
}

/// `l_t(z)`: the same for `W_t < 0`, where wealth growth flips sign.
fn expected_short(nodes: &[(f64, f64, f64)], next: &PolicyCoefficients, alpha: f64, z: f64) -> f64 {
    let mut acc = 0.0;
    for &(gross, y, w) in nodes {
        let x = gross + y * z;
        acc += if x < 0.0 {
            w * next.a_coef * (-x).powf(alpha)
        } else {
            -w * next.b_coef * x.powf(alpha)
        };
    }
    acc
}

/// Scan points: `grid_points` uniform points on `[lo, hi]` plus zero when
/// it lies inside and is not already a grid point.
pub fn fraction_grid(lo: f64, hi: f64, grid_points: usize) -> Vec<f64> {
    let n = grid_points.max(2);
    let step = (hi - lo) / (n - 1) as f64;
    let mut grid: Vec<f64> = (0..n)
        .map(|i| if i == n - 1 { hi } else { lo + step * i as f64 })
        .collect();
    if lo <= 0.0 && 0.0 <= hi && !grid.contains(&0.0) {
        let at = grid.partition_point(|&z| z < 0.0);
        grid.insert(at, 0.0);
    }
    grid
}

/// Global scan then golden-section refinement around the best grid point.
/// Returns the chosen fraction and the maximal value found.
fn maximize<F>(f: F, lo: f64, hi: f64, settings: &SolverSettings) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync,
{
    let grid = fraction_grid(lo, hi, settings.grid_points);
    let values: Vec<f64> = grid.par_iter().map(|&z| f(z)).collect();
    let best = values
        .iter()
        .enumerate()
        .fold(0, |b, (i, v)| if *v > values[b] { i } else { b });

    let mut candidates: Vec<(f64, f64)> = grid.iter().copied().zip(values.iter().copied()).collect();
    if settings.refine {
        let left = grid[best.saturating_sub(1)];
        let right = grid[(best + 1).min(grid.len() - 1)];
        if right > left {
            candidates.push(golden_section_max(&f, left, right, settings.z_tol));
        }
    }

    let (z_top, top) = candidates
        .iter()
        .copied()
        .fold((0.0, f64::NEG_INFINITY), |b, c| if c.1 > b.1 { c } else { b });
    // Near-ties go to the least exposure, unless the saving is below z_tol.
    let chosen = candidates
        .iter()
        .filter(|c| c.1 >= top - settings.z_tol)
        .min_by(|a, b| a.0.abs().total_cmp(&b.0.abs()).then(a.0.total_cmp(&b.0)))
        .map(|c| c.0)
        .filter(|z| z.abs() < z_top.abs() - settings.z_tol)
        .unwrap_or(z_top);
    (chosen, top)
}

fn golden_section_max<F: Fn(f64) -> f64>(f: &F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > tol {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Period-`t` row from the period-`t + 1` row.
///
/// The expectation runs jointly over `y_{t+1}` and, for a stochastic rate
/// model, `r_t`, on one node set shared by every `z`.
pub fn recursion_step(
    prefs: &CptPreferences,
    constraints: &Constraints,
    next: &PolicyCoefficients,
    rates: &RateModel,
    y: &Distribution,
    t: usize,
    settings: &SolverSettings,
) -> Result<PolicyCoefficients> {
    settings.validate()?;
    let alpha = prefs.alpha();
    let nodes = joint_nodes(rates, y, t, settings);
    let lo = constraints.lo_frac;
    let hi = constraints.hi_frac;

    let (k_star, a_coef) = maximize(|z| expected_long(&nodes, next, alpha, z), lo, hi, settings);
    let (k_hat_star, l_max) = maximize(|z| expected_short(&nodes, next, alpha, z), -hi, -lo, settings);
    if !a_coef.is_finite() || !l_max.is_finite() {
        return Err(CptError::invalid("coefficients", format!("non-finite value at period {t}")));
    }
    Ok(PolicyCoefficients {
        t,
        a_coef,
        b_coef: -l_max,
        k_star,
        k_hat_star,
    })
}

/// Full table for horizon `T`: the terminal row, then `T - 1` recursion
/// steps backwards to period 0.
pub fn backward_induction(
    prefs: &CptPreferences,
    constraints: &Constraints,
    rates: &RateModel,
    returns: &ReturnModel,
    horizon: usize,
    settings: &SolverSettings,
) -> Result<PolicyTable> {
    if horizon == 0 {
        return Err(CptError::invalid("horizon", "must be >= 1"));
    }
    settings.validate()?;
    returns.check_horizon(horizon)?;

    let last = horizon - 1;
    let at_period = |period: usize| move |e: CptError| CptError::Period { period, source: Box::new(e) };
    let stats = terminal_stats(prefs, returns.at(last), &settings.cdf).map_err(at_period(last))?;
    let mut rows = vec![terminal_coefficients(prefs, constraints, &stats, last)];
    for t in (0..last).rev() {
        let next = rows.last().expect("terminal row");
        let row = recursion_step(prefs, constraints, next, rates, returns.at(t), t, settings)
            .map_err(at_period(t))?;
        rows.push(row);
    }
    rows.reverse();
    PolicyTable::new(rows, *settings)
}

/// Dollar amount in the risky asset at wealth `w`.
pub fn optimal_trade(row: &PolicyCoefficients, w: f64) -> f64 {
    if w >= 0.0 {
        row.k_star * w
    } else {
        row.k_hat_star * w
    }
}
