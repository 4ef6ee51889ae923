//! Wealth dynamics under a fraction policy, benchmarked wealth, and the
//! precommitment comparison that shows why the full benchmark is time
//! inconsistent.

use std::io::Write;

use rayon::prelude::*;

use crate::choquet::cpt_discrete;
use crate::dist::{rng_stream, DiscreteEmpirical, RateModel};
use crate::error::{CptError, Result};
use crate::prefs::CptPreferences;
use crate::solver::{
    fmt17, fraction_grid, optimal_trade, terminal_coefficients, terminal_stats, Constraints,
    PolicyTable, ReturnModel,
};
use crate::CdfSettings;

/// Self-financing update `W' = (1 + r) W + v y`.
#[inline]
pub fn step_wealth(w: f64, v: f64, r: f64, y: f64) -> f64 {
    debug_assert!(r > -1.0, "rate {r} <= -1");
    (1.0 + r) * w + v * y
}

/// Growth of one dollar held in the risk-free asset from `t` to `k`.
pub fn compound_factor(rates: &[f64], t: usize, k: usize) -> Result<f64> {
    if t > k || k > rates.len() {
        return Err(CptError::IndexOutOfRange(format!(
            "compound factor over [{t}, {k}) with {} rates",
            rates.len()
        )));
    }
    Ok(rates[t..k].iter().map(|r| 1.0 + r).product())
}

/// One simulated trajectory. `trades[t]`, `rates[t]` and
/// `excess_returns[t]` drive the step from `wealth[t]` to `wealth[t + 1]`,
/// so `excess_returns[t]` holds `y_{t+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WealthPath {
    pub path_id: u64,
    pub seed: u64,
    pub wealth: Vec<f64>,
    pub trades: Vec<f64>,
    pub rates: Vec<f64>,
    pub excess_returns: Vec<f64>,
}

impl WealthPath {
    pub fn horizon(&self) -> usize {
        self.trades.len()
    }

    /// Replays every step and reports the first one that is not
    /// self-financing.
    pub fn check_self_financing(&self) -> Result<()> {
        let n = self.trades.len();
        if self.wealth.len() != n + 1 || self.rates.len() != n || self.excess_returns.len() != n {
            return Err(CptError::InconsistentPath(format!(
                "lengths: {} wealth, {} trades, {} rates, {} returns",
                self.wealth.len(),
                n,
                self.rates.len(),
                self.excess_returns.len()
            )));
        }
        for t in 0..n {
            let replay = step_wealth(self.wealth[t], self.trades[t], self.rates[t], self.excess_returns[t]);
            let scale = ((1.0 + self.rates[t]) * self.wealth[t]).abs()
                + (self.trades[t] * self.excess_returns[t]).abs();
            if (replay - self.wealth[t + 1]).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
                return Err(CptError::InconsistentPath(format!(
                    "step {t}: recorded {} but (1+r)W + v y = {replay}",
                    self.wealth[t + 1]
                )));
            }
        }
        Ok(())
    }
}

/// Terminal wealth against the two benchmarks, for an investor starting at
/// period `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkReport {
    /// `W_T` minus the risk-free roll-up of `W_t`.
    pub full_benchmark: f64,
    /// Benchmarking at `T - 1` only: `v_{T-1} y_T`.
    pub last_period_benchmark: f64,
}

/// Computes both benchmarked wealths. The full benchmark is evaluated as
/// `sum_j R_{j+1}^T v_j y_{j+1}` and checked against `W_T - R_t^T W_t`.
pub fn benchmarked_wealth(path: &WealthPath, t: usize) -> Result<BenchmarkReport> {
    path.check_self_financing()?;
    let horizon = path.horizon();
    if t >= horizon {
        return Err(CptError::IndexOutOfRange(format!("start {t} >= horizon {horizon}")));
    }
    let mut full = 0.0;
    let mut scale = 0.0;
    for j in t..horizon {
        let term = compound_factor(&path.rates, j + 1, horizon)? * path.trades[j] * path.excess_returns[j];
        full += term;
        scale += term.abs();
    }
    let rolled = compound_factor(&path.rates, t, horizon)? * path.wealth[t];
    let identity = path.wealth[horizon] - rolled;
    scale += path.wealth[horizon].abs() + rolled.abs();
    if (full - identity).abs() > 1e-12 * scale.max(f64::MIN_POSITIVE) {
        return Err(CptError::InconsistentPath(format!(
            "benchmark sum {full} differs from W_T - R W_t = {identity}"
        )));
    }
    Ok(BenchmarkReport {
        full_benchmark: full,
        last_period_benchmark: path.trades[horizon - 1] * path.excess_returns[horizon - 1],
    })
}

/// Per-period cross-section of an ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodSummary {
    pub t: usize,
    pub mean_wealth: f64,
    pub q05_wealth: f64,
    pub q50_wealth: f64,
    pub q95_wealth: f64,
    /// Mean of `v_t / W_t` over paths with non-zero wealth; `None` at `T`.
    pub mean_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub periods: Vec<PeriodSummary>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub paths: Vec<WealthPath>,
    pub summary: EnsembleSummary,
}

impl Ensemble {
    /// `path,t,W,v,r,y` rows; the final row of each path carries only `W_T`.
    pub fn write_paths_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["path", "t", "W", "v", "r", "y"])?;
        for p in &self.paths {
            for t in 0..=p.horizon() {
                let (v, r, y) = if t < p.horizon() {
                    (fmt17(p.trades[t]), fmt17(p.rates[t]), fmt17(p.excess_returns[t]))
                } else {
                    (String::new(), String::new(), String::new())
                };
                wtr.write_record([p.path_id.to_string(), t.to_string(), fmt17(p.wealth[t]), v, r, y])?;
            }
        }
        wtr.flush()
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(out);
        wtr.write_record(["t", "mean_W", "q05_W", "q50_W", "q95_W", "mean_fraction"])?;
        for s in &self.summary.periods {
            wtr.write_record([
                s.t.to_string(),
                fmt17(s.mean_wealth),
                fmt17(s.q05_wealth),
                fmt17(s.q50_wealth),
                fmt17(s.q95_wealth),
                s.mean_fraction.map(fmt17).unwrap_or_default(),
            ])?;
        }
        wtr.flush()
    }
}

fn simulate_one(
    policy: &PolicyTable,
    rates: &RateModel,
    returns: &ReturnModel,
    w0: f64,
    seed: u64,
    path_id: u64,
) -> WealthPath {
    let horizon = policy.horizon();
    let mut rng = rng_stream(seed, path_id);
    let mut path = WealthPath {
        path_id,
        seed,
        wealth: Vec::with_capacity(horizon + 1),
        trades: Vec::with_capacity(horizon),
        rates: Vec::with_capacity(horizon),
        excess_returns: Vec::with_capacity(horizon),
    };
    let mut w = w0;
    path.wealth.push(w);
    for (t, row) in policy.rows().iter().enumerate() {
        let r = rates.sample(t, &mut rng);
        let y = returns.at(t).sample(&mut rng);
        let v = optimal_trade(row, w);
        w = step_wealth(w, v, r, y);
        path.trades.push(v);
        path.rates.push(r);
        path.excess_returns.push(y);
        path.wealth.push(w);
    }
    path
}

/// Simulates `n_paths` trajectories. Path `i` draws from stream `i` of
/// `seed`, so the ensemble does not depend on how work is scheduled.
pub fn simulate_paths(
    policy: &PolicyTable,
    rates: &RateModel,
    returns: &ReturnModel,
    w0: f64,
    n_paths: usize,
    seed: u64,
) -> Result<Ensemble> {
    if n_paths == 0 {
        return Err(CptError::invalid("n_paths", "must be >= 1"));
    }
    if !w0.is_finite() {
        return Err(CptError::invalid("w0", format!("{w0} is not finite")));
    }
    let paths: Vec<WealthPath> = (0..n_paths as u64)
        .into_par_iter()
        .map(|id| simulate_one(policy, rates, returns, w0, seed, id))
        .collect();
    let summary = summarize(&paths, policy.horizon());
    Ok(Ensemble { paths, summary })
}

fn summarize(paths: &[WealthPath], horizon: usize) -> EnsembleSummary {
    let periods = (0..=horizon)
        .map(|t| {
            let mut w: Vec<f64> = paths.iter().map(|p| p.wealth[t]).collect();
            w.sort_by(f64::total_cmp);
            let mean_wealth = w.iter().sum::<f64>() / w.len() as f64;
            let mean_fraction = (t < horizon).then(|| {
                let fr: Vec<f64> = paths
                    .iter()
                    .filter(|p| p.wealth[t] != 0.0)
                    .map(|p| p.trades[t] / p.wealth[t])
                    .collect();
                if fr.is_empty() {
                    0.0
                } else {
                    fr.iter().sum::<f64>() / fr.len() as f64
                }
            });
            PeriodSummary {
                t,
                mean_wealth,
                q05_wealth: sorted_quantile(&w, 0.05),
                q50_wealth: sorted_quantile(&w, 0.5),
                q95_wealth: sorted_quantile(&w, 0.95),
                mean_fraction,
            }
        })
        .collect();
    EnsembleSummary { periods }
}

/// Linear interpolation between order statistics.
fn sorted_quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Best precommitted fraction pair for one deterministic rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrecommittedPlan {
    pub rate: f64,
    /// Fraction of `|W_{T-2}|` traded at `T - 2`.
    pub z0: f64,
    /// Fraction of `|W_{T-1}|` traded at `T - 1`.
    pub z1: f64,
    /// CPT value of the full benchmarked wealth under `(z0, z1)`.
    pub value: f64,
    /// Time-consistent last-period fraction for the same rate.
    pub k_star_terminal: f64,
}

/// Outcome of [`inconsistency_demo`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DemoReport {
    pub grid_points: usize,
    pub resolution: f64,
    pub low: PrecommittedPlan,
    pub high: PrecommittedPlan,
}

impl DemoReport {
    pub fn gap_across_rates(&self) -> f64 {
        self.high.z1 - self.low.z1
    }

    pub fn gap_low_vs_consistent(&self) -> f64 {
        self.low.z1 - self.low.k_star_terminal
    }

    pub fn gap_high_vs_consistent(&self) -> f64 {
        self.high.z1 - self.high.k_star_terminal
    }

    /// Flat `key = value` report.
    pub fn write_kv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let mut line = |k: &str, v: String| writeln!(out, "{k} = {v}");
        line("grid_points", self.grid_points.to_string())?;
        line("grid_resolution", fmt17(self.resolution))?;
        for (tag, plan) in [("low", &self.low), ("high", &self.high)] {
            line(&format!("rate_{tag}"), fmt17(plan.rate))?;
            line(&format!("precommitted_z0_{tag}"), fmt17(plan.z0))?;
            line(&format!("precommitted_z1_{tag}"), fmt17(plan.z1))?;
            line(&format!("precommitted_value_{tag}"), fmt17(plan.value))?;
            line(&format!("kstar_terminal_{tag}"), fmt17(plan.k_star_terminal))?;
        }
        line("gap_z1_high_minus_low", fmt17(self.gap_across_rates()))?;
        line("gap_z1_low_minus_kstar", fmt17(self.gap_low_vs_consistent()))?;
        line("gap_z1_high_minus_kstar", fmt17(self.gap_high_vs_consistent()))?;
        Ok(())
    }
}

/// Two-period comparison between the plan an investor precommits to at
/// `T - 2` under the full benchmark and the time-consistent last-period
/// choice.
///
/// Fraction policies `v_{T-2} = z0 |W_{T-2}|`, `v_{T-1} = z1 |W_{T-1}|` are
/// enumerated on a `grid_points`-square grid; for each pair the exact law of
/// `R y_{T-1} v_{T-2} + v_{T-1} y_T` is built from the atoms of `y` and
/// valued with [`cpt_discrete`].
pub fn inconsistency_demo(
    prefs: &CptPreferences,
    constraints: &Constraints,
    y: &DiscreteEmpirical,
    r_low: f64,
    r_high: f64,
    grid_points: usize,
    w0: f64,
) -> Result<DemoReport> {
    if grid_points < 3 {
        return Err(CptError::invalid("grid_points", format!("{grid_points} is too coarse, need >= 3")));
    }
    if y.len() > 20 {
        return Err(CptError::invalid("atoms", format!("{} atoms, at most 20 allowed", y.len())));
    }
    for (name, r) in [("r_low", r_low), ("r_high", r_high)] {
        if !(r > -1.0) || !r.is_finite() {
            return Err(CptError::invalid(name, format!("{r} must be finite and > -1")));
        }
    }
    if !(w0 > 0.0) || !w0.is_finite() {
        return Err(CptError::invalid("w0", format!("{w0} must be finite and > 0")));
    }
    let grid = fraction_grid(constraints.lo_frac(), constraints.hi_frac(), grid_points);
    let resolution = (constraints.hi_frac() - constraints.lo_frac()) / (grid_points - 1) as f64;
    let low = precommit(prefs, constraints, y, r_low, &grid, w0)?;
    let high = precommit(prefs, constraints, y, r_high, &grid, w0)?;
    Ok(DemoReport {
        grid_points,
        resolution,
        low,
        high,
    })
}

fn precommit(
    prefs: &CptPreferences,
    constraints: &Constraints,
    y: &DiscreteEmpirical,
    r: f64,
    grid: &[f64],
    w0: f64,
) -> Result<PrecommittedPlan> {
    let gross = 1.0 + r;
    let atoms: Vec<(f64, f64)> = y.atoms().collect();
    let scores: Vec<(f64, f64, f64)> = grid
        .par_iter()
        .flat_map_iter(|&z0| {
            let atoms = &atoms;
            grid.iter().map(move |&z1| {
                let mut outcomes = Vec::with_capacity(atoms.len() * atoms.len());
                for &(y1, p1) in atoms {
                    let w1 = w0 * (gross + z0 * y1);
                    for &(y2, p2) in atoms {
                        outcomes.push((gross * z0 * w0 * y1 + z1 * w1.abs() * y2, p1 * p2));
                    }
                }
                let law = DiscreteEmpirical::new(outcomes).expect("product of valid laws");
                (z0, z1, cpt_discrete(prefs, &law).value())
            })
        })
        .collect();

    let top = scores.iter().map(|s| s.2).fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-12 * top.abs().max(1.0);
    let best = scores
        .iter()
        .filter(|s| s.2 >= top - tol)
        .min_by(|a, b| {
            (a.0.abs() + a.1.abs())
                .total_cmp(&(b.0.abs() + b.1.abs()))
                .then(a.1.abs().total_cmp(&b.1.abs()))
                .then(a.0.total_cmp(&b.0))
                .then(a.1.total_cmp(&b.1))
        })
        .expect("non-empty grid");

    let stats = terminal_stats(prefs, &y.clone().into(), &CdfSettings::default())?;
    let terminal = terminal_coefficients(prefs, constraints, &stats, 1);
    Ok(PrecommittedPlan {
        rate: r,
        z0: best.0,
        z1: best.1,
        value: top,
        k_star_terminal: terminal.k_star,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::Distribution;
    use crate::solver::{PolicyCoefficients, SolverSettings};
    use approx::assert_abs_diff_eq;

    fn flat_policy(horizon: usize, k: f64) -> PolicyTable {
        let rows = (0..horizon)
            .map(|t| PolicyCoefficients {
                t,
                a_coef: 0.0,
                b_coef: 0.0,
                k_star: k,
                k_hat_star: -k,
            })
            .collect();
        PolicyTable::new(rows, SolverSettings::default()).unwrap()
    }

    #[test]
    fn step_examples() {
        assert_abs_diff_eq!(step_wealth(1.0, 0.5, 0.03, 0.05), 1.055, epsilon = 1e-15);
        assert_eq!(step_wealth(2.0, 0.0, 0.03, 0.7), 2.0 * 1.03);
        assert_eq!(step_wealth(0.0, 0.0, 0.03, 0.7), 0.0);
    }

    #[test]
    fn compound_examples() {
        let rates = [0.03, 0.03, 0.03];
        assert_eq!(compound_factor(&rates, 2, 2).unwrap(), 1.0);
        assert_abs_diff_eq!(compound_factor(&rates, 0, 2).unwrap(), 1.0609, epsilon = 1e-15);
        assert_abs_diff_eq!(compound_factor(&[0.01, 0.02], 0, 2).unwrap(), 1.0302, epsilon = 1e-15);
        assert!(compound_factor(&rates, 2, 1).is_err());
        assert!(compound_factor(&rates, 0, 4).is_err());
    }

    fn two_step_path() -> WealthPath {
        let mut wealth = vec![1.0];
        let rates = vec![0.03, 0.03];
        let trades = vec![1.0, 1.0];
        let ys = vec![0.1, 0.1];
        for t in 0..2 {
            let w = step_wealth(wealth[t], trades[t], rates[t], ys[t]);
            wealth.push(w);
        }
        WealthPath {
            path_id: 0,
            seed: 0,
            wealth,
            trades,
            rates,
            excess_returns: ys,
        }
    }

    #[test]
    fn benchmark_examples() {
        let path = two_step_path();
        let b = benchmarked_wealth(&path, 0).unwrap();
        assert_abs_diff_eq!(b.full_benchmark, 0.203, epsilon = 1e-14);
        assert_abs_diff_eq!(b.last_period_benchmark, 0.1, epsilon = 1e-15);
        let b = benchmarked_wealth(&path, 1).unwrap();
        assert_abs_diff_eq!(b.full_benchmark, b.last_period_benchmark, epsilon = 1e-15);
        assert!(benchmarked_wealth(&path, 2).is_err());

        let mut idle = path.clone();
        idle.trades = vec![0.0, 0.0];
        idle.wealth = vec![1.0, 1.03, 1.03 * 1.03];
        let b = benchmarked_wealth(&idle, 0).unwrap();
        assert_eq!(b.full_benchmark, 0.0);
        assert_eq!(b.last_period_benchmark, 0.0);
    }

    #[test]
    fn tampered_path_is_rejected() {
        let mut path = two_step_path();
        path.wealth[2] += 1e-6;
        assert!(matches!(benchmarked_wealth(&path, 0), Err(CptError::InconsistentPath(_))));
    }

    #[test]
    fn risk_free_policy_compounds() {
        let policy = flat_policy(10, 0.0);
        let returns: ReturnModel = Distribution::normal(0.045, 1.69).unwrap().into();
        let rates = RateModel::deterministic(0.03).unwrap();
        let ens = simulate_paths(&policy, &rates, &returns, 0.8, 50, 9).unwrap();
        let expected = 0.8 * 1.03f64.powi(10);
        for p in &ens.paths {
            assert_abs_diff_eq!(p.wealth[10], expected, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(expected, 1.0751, epsilon = 1e-4);
    }

    #[test]
    fn simulation_is_reproducible() {
        let policy = flat_policy(4, 0.7);
        let returns: ReturnModel = Distribution::normal(0.045, 1.69).unwrap().into();
        let rates = RateModel::gaussian_sqrt_t(0.03, 0.003).unwrap();
        let a = simulate_paths(&policy, &rates, &returns, 0.8, 1, 42).unwrap();
        let b = simulate_paths(&policy, &rates, &returns, 0.8, 1, 42).unwrap();
        assert_eq!(a, b);
        let c = simulate_paths(&policy, &rates, &returns, 0.8, 1, 43).unwrap();
        assert_ne!(a.paths[0].wealth, c.paths[0].wealth);
        assert!(simulate_paths(&policy, &rates, &returns, 0.8, 0, 42).is_err());
    }

    #[test]
    fn degenerate_return_follows_recurrence() {
        let policy = flat_policy(5, 1.5);
        let returns: ReturnModel = Distribution::discrete([(0.02, 1.0)]).unwrap().into();
        let rates = RateModel::deterministic(0.01).unwrap();
        let ens = simulate_paths(&policy, &rates, &returns, 0.8, 3, 1).unwrap();
        let mut w = 0.8f64;
        for _ in 0..5 {
            w = 1.01 * w + 1.5 * w * 0.02;
        }
        for p in &ens.paths {
            assert_eq!(p.wealth[5], w);
        }
    }

    #[test]
    fn paths_satisfy_identity_and_constraints() {
        let policy = flat_policy(6, 3.0);
        let returns: ReturnModel = Distribution::normal(0.045, 1.69).unwrap().into();
        let rates = RateModel::gaussian_sqrt_t(0.03, 0.003).unwrap();
        let c = Constraints::new(-5.0, 5.0).unwrap();
        let ens = simulate_paths(&policy, &rates, &returns, 0.8, 200, 3).unwrap();
        for p in &ens.paths {
            for t in 0..6 {
                assert!(c.admits(p.wealth[t], p.trades[t]));
                benchmarked_wealth(p, t).unwrap();
            }
        }
        assert_eq!(ens.summary.periods.len(), 7);
        assert!(ens.summary.periods[6].mean_fraction.is_none());
    }

    #[test]
    fn csv_writers() {
        let policy = flat_policy(2, 0.5);
        let returns: ReturnModel = Distribution::normal(0.0, 1.0).unwrap().into();
        let ens = simulate_paths(&policy, &RateModel::deterministic(0.0).unwrap(), &returns, 1.0, 2, 0)
            .unwrap();
        let mut buf = Vec::new();
        ens.write_paths_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * 3);
        assert!(text.starts_with("path,t,W,v,r,y\n"));
        let mut buf = Vec::new();
        ens.write_summary_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 4);
    }

    #[test]
    fn demo_equal_rates_coincide() {
        let p = CptPreferences::tversky_kahneman();
        let c = Constraints::new(-5.0, 5.0).unwrap();
        let y = DiscreteEmpirical::new([(-1.0, 0.4), (2.0, 0.6)]).unwrap();
        let report = inconsistency_demo(&p, &c, &y, 0.1, 0.1, 21, 0.8).unwrap();
        assert_eq!(report.low.z0, report.high.z0);
        assert_eq!(report.low.z1, report.high.z1);
        assert_eq!(report.gap_across_rates(), 0.0);
    }

    #[test]
    fn demo_zero_return_ties_to_zero() {
        let p = CptPreferences::tversky_kahneman();
        let c = Constraints::new(-5.0, 5.0).unwrap();
        let y = DiscreteEmpirical::degenerate(0.0).unwrap();
        let report = inconsistency_demo(&p, &c, &y, 0.0, 0.5, 11, 0.8).unwrap();
        for plan in [report.low, report.high] {
            assert_eq!((plan.z0, plan.z1, plan.value, plan.k_star_terminal), (0.0, 0.0, 0.0, 0.0));
        }
    }

    #[test]
    fn demo_rejects_bad_inputs() {
        let p = CptPreferences::tversky_kahneman();
        let c = Constraints::new(-5.0, 5.0).unwrap();
        let y = DiscreteEmpirical::new([(-1.0, 0.4), (1.0, 0.6)]).unwrap();
        assert!(inconsistency_demo(&p, &c, &y, 0.0, 0.5, 2, 0.8).is_err());
        assert!(inconsistency_demo(&p, &c, &y, -1.0, 0.5, 5, 0.8).is_err());
        let wide = DiscreteEmpirical::new((0..21).map(|i| (i as f64, 1.0 / 21.0))).unwrap();
        assert!(inconsistency_demo(&p, &c, &wide, 0.0, 0.5, 5, 0.8).is_err());
    }

    #[test]
    fn demo_kv_report() {
        let p = CptPreferences::tversky_kahneman();
        let c = Constraints::new(-5.0, 5.0).unwrap();
        let y = DiscreteEmpirical::new([(-1.0, 0.4), (1.0, 0.6)]).unwrap();
        let report = inconsistency_demo(&p, &c, &y, 0.0, 0.5, 11, 0.8).unwrap();
        let mut buf = Vec::new();
        report.write_kv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        for key in ["precommitted_z1_low", "precommitted_z1_high", "kstar_terminal_low", "gap_z1_high_minus_low"] {
            assert!(text.contains(key), "missing {key}");
        }
    }
}
