//! Distributions for the per-period excess return and the risk-free rate.

use std::io::Read;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use libm::erfc;

use crate::error::{CptError, Result};
use crate::quadrature::{compensated_sum, gauss_hermite_standard_normal};

/// Lowest rate a stochastic rate model may emit; keeps `1 + r` positive.
pub const RATE_FLOOR: f64 = -1.0 + 1e-9;

const PROBABILITY_SUM_TOL: f64 = 1e-12;

/// Normal law with mean `mu` and standard deviation `sigma` per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normal {
    mu: f64,
    sigma: f64,
}

impl Normal {
    pub fn new(mu: f64, sigma: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(CptError::invalid("mu", format!("{mu} is not finite")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(CptError::invalid("sigma", format!("{sigma} must be finite and > 0")));
        }
        Ok(Self { mu, sigma })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    fn cdf(&self, x: f64) -> f64 {
        0.5 * erfc(-(x - self.mu) / (self.sigma * std::f64::consts::SQRT_2))
    }

    fn survival(&self, x: f64) -> f64 {
        0.5 * erfc((x - self.mu) / (self.sigma * std::f64::consts::SQRT_2))
    }

    fn quantile(&self, p: f64) -> f64 {
        self.mu + self.sigma * standard_normal_quantile(p)
    }
}

/// Inverse of the standard normal CDF: Acklam's rational approximation
/// (relative error below 1.2e-9) polished by Halley steps on whichever tail
/// avoids cancellation.
fn standard_normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let tail = |q: f64| {
        let r = (-2.0 * q.ln()).sqrt();
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    };
    let mut z = if p < P_LOW {
        tail(p)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        -tail(1.0 - p)
    };

    let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
    for _ in 0..2 {
        let residual = if p < 0.5 {
            0.5 * erfc(-z / std::f64::consts::SQRT_2) - p
        } else {
            (1.0 - p) - 0.5 * erfc(z / std::f64::consts::SQRT_2)
        };
        let u = residual * sqrt_2pi * (0.5 * z * z).exp();
        z -= u / (1.0 + 0.5 * z * u);
    }
    z
}

/// Finite distribution on sorted, distinct atoms with positive weights.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteEmpirical {
    values: Vec<f64>,
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl DiscreteEmpirical {
    /// Builds from `(value, probability)` pairs in any order; equal values are
    /// merged.
    pub fn new(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        let mut atoms: Vec<(f64, f64)> = atoms.into_iter().collect();
        if atoms.is_empty() {
            return Err(CptError::invalid("atoms", "at least one atom is required"));
        }
        for &(v, p) in &atoms {
            if !v.is_finite() {
                return Err(CptError::invalid("atoms", format!("value {v} is not finite")));
            }
            if !(p > 0.0) || !p.is_finite() {
                return Err(CptError::invalid(
                    "atoms",
                    format!("probability {p} of atom {v} must be > 0"),
                ));
            }
        }
        let total = compensated_sum(atoms.iter().map(|a| a.1));
        if (total - 1.0).abs() > PROBABILITY_SUM_TOL {
            return Err(CptError::invalid(
                "atoms",
                format!("probabilities sum to {total}, expected 1"),
            ));
        }
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut values: Vec<f64> = Vec::with_capacity(atoms.len());
        let mut probs: Vec<f64> = Vec::with_capacity(atoms.len());
        for (v, p) in atoms {
            match values.last() {
                Some(&last) if last == v => *probs.last_mut().expect("paired") += p,
                _ => {
                    values.push(v);
                    probs.push(p);
                }
            }
        }
        let cumulative = running_cumulative(&probs);
        Ok(Self {
            values,
            probs,
            cumulative,
        })
    }

    /// A point mass.
    pub fn degenerate(value: f64) -> Result<Self> {
        Self::new([(value, 1.0)])
    }

    /// Loads a two-column `value,probability` CSV with a header row.
    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| CptError::Io(format!("{}: {e}", path.display())))?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(reader);
        let headers = rdr.headers().map_err(|e| CptError::Io(e.to_string()))?.clone();
        if headers.len() != 2 || headers.iter().any(|h| h.parse::<f64>().is_ok()) {
            return Err(CptError::Io(
                "expected a header row with two columns (value, probability)".into(),
            ));
        }
        let mut atoms = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| CptError::Io(e.to_string()))?;
            let parse = |i: usize| -> Result<f64> {
                record
                    .get(i)
                    .ok_or_else(|| CptError::Io(format!("row {}: missing column {i}", line + 1)))?
                    .parse::<f64>()
                    .map_err(|e| CptError::Io(format!("row {}: {e}", line + 1)))
            };
            atoms.push((parse(0)?, parse(1)?));
        }
        Self::new(atoms)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.atoms().map(|(v, p)| v * p))
    }

    /// The law of `c * X`.
    pub fn scaled(&self, c: f64) -> Self {
        if c == 0.0 {
            return Self::degenerate(0.0).expect("point mass");
        }
        let atoms: Vec<(f64, f64)> = self.atoms().map(|(v, p)| (c * v, p)).collect();
        let mut values: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let mut probs: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        if c < 0.0 {
            values.reverse();
            probs.reverse();
        }
        let cumulative = running_cumulative(&probs);
        Self {
            values,
            probs,
            cumulative,
        }
    }

    fn cdf(&self, x: f64) -> f64 {
        let idx = self.values.partition_point(|&v| v <= x);
        if idx == 0 {
            0.0
        } else {
            self.cumulative[idx - 1]
        }
    }

    fn quantile(&self, p: f64) -> f64 {
        let idx = self.cumulative.partition_point(|&c| c < p);
        self.values[idx.min(self.values.len() - 1)]
    }
}

fn running_cumulative(probs: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut out: Vec<f64> = probs
        .iter()
        .map(|p| {
            acc += p;
            acc.min(1.0)
        })
        .collect();
    if let Some(last) = out.last_mut() {
        *last = 1.0;
    }
    out
}

/// Law of the per-period excess return.
#[derive(Debug, Clone, PartialEq)]
pub enum Distribution {
    Normal(Normal),
    Discrete(DiscreteEmpirical),
}

impl From<Normal> for Distribution {
    fn from(n: Normal) -> Self {
        Distribution::Normal(n)
    }
}

impl From<DiscreteEmpirical> for Distribution {
    fn from(d: DiscreteEmpirical) -> Self {
        Distribution::Discrete(d)
    }
}

impl Distribution {
    pub fn normal(mu: f64, sigma: f64) -> Result<Self> {
        Ok(Normal::new(mu, sigma)?.into())
    }

    pub fn discrete(atoms: impl IntoIterator<Item = (f64, f64)>) -> Result<Self> {
        Ok(DiscreteEmpirical::new(atoms)?.into())
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(CptError::invalid("x", format!("{x} is not finite")));
        }
        Ok(self.cdf_unchecked(x))
    }

    pub(crate) fn cdf_unchecked(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal(n) => n.cdf(x),
            Distribution::Discrete(d) => d.cdf(x),
        }
    }

    /// `P(X > x)`, computed without cancellation for the normal law.
    pub(crate) fn survival_unchecked(&self, x: f64) -> f64 {
        match self {
            Distribution::Normal(n) => n.survival(x),
            Distribution::Discrete(d) => 1.0 - d.cdf(x),
        }
    }

    /// Generalized inverse `inf { x : F(x) >= p }`.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(CptError::invalid("p", format!("{p} is outside (0, 1)")));
        }
        Ok(match self {
            Distribution::Normal(n) => n.quantile(p),
            Distribution::Discrete(d) => d.quantile(p),
        })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Distribution::Normal(n) => n.mu,
            Distribution::Discrete(d) => d.mean(),
        }
    }

    /// Equiprobable atoms at the quantile midpoints `q((i - 0.5) / n)`.
    /// A discrete input with at most `n` atoms is returned unchanged.
    pub fn discretize(&self, n: usize) -> Result<DiscreteEmpirical> {
        if n < 2 {
            return Err(CptError::invalid("n", format!("{n} atoms requested, need >= 2")));
        }
        if let Distribution::Discrete(d) = self {
            if d.len() <= n {
                return Ok(d.clone());
            }
        }
        let w = 1.0 / n as f64;
        let atoms = (1..=n).map(|i| {
            let p = (i as f64 - 0.5) * w;
            let x = match self {
                Distribution::Normal(nd) => nd.quantile(p),
                Distribution::Discrete(d) => d.quantile(p),
            };
            (x, w)
        });
        DiscreteEmpirical::new(atoms.collect::<Vec<_>>())
    }

    /// The law of `c * X`; `c = 0` gives a point mass at zero.
    pub fn scaled(&self, c: f64) -> Distribution {
        match self {
            _ if c == 0.0 => Distribution::Discrete(DiscreteEmpirical::degenerate(0.0).expect("point mass")),
            Distribution::Normal(n) => Distribution::Normal(Normal {
                mu: c * n.mu,
                sigma: c.abs() * n.sigma,
            }),
            Distribution::Discrete(d) => Distribution::Discrete(d.scaled(c)),
        }
    }

    pub fn negated(&self) -> Distribution {
        self.scaled(-1.0)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Distribution::Normal(n) => {
                let z: f64 = rng.sample(StandardNormal);
                n.mu + n.sigma * z
            }
            Distribution::Discrete(d) => {
                let u: f64 = rng.random();
                let idx = d.cumulative.partition_point(|&c| c <= u);
                d.values[idx.min(d.len() - 1)]
            }
        }
    }

    /// Nodes and weights for expectations: the atoms themselves for a
    /// discrete law, an `n`-point Gauss–Hermite rule for a normal one.
    pub fn expectation_nodes(&self, n: usize) -> Vec<(f64, f64)> {
        match self {
            Distribution::Normal(nd) => gauss_hermite_standard_normal(n.max(1))
                .into_iter()
                .map(|(z, w)| (nd.mu + nd.sigma * z, w))
                .collect(),
            Distribution::Discrete(d) => d.atoms().collect(),
        }
    }

    /// Points where the CDF has a jump or most of its curvature.
    pub(crate) fn breakpoints(&self) -> Vec<f64> {
        match self {
            Distribution::Normal(n) => (-4..=4).map(|k| n.mu + k as f64 * n.sigma).collect(),
            Distribution::Discrete(d) => d.values.clone(),
        }
    }

    pub fn as_discrete(&self) -> Option<&DiscreteEmpirical> {
        match self {
            Distribution::Discrete(d) => Some(d),
            Distribution::Normal(_) => None,
        }
    }
}

/// Risk-free rate for the period `[t, t + 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateModel {
    Deterministic { r: f64 },
    /// `r_t = base + vol * sqrt(t) * Z`, truncated below at [`RATE_FLOOR`].
    GaussianSqrtT { base: f64, vol: f64 },
}

impl RateModel {
    pub fn deterministic(r: f64) -> Result<Self> {
        if !(r > -1.0) || !r.is_finite() {
            return Err(CptError::invalid("rate", format!("{r} must be finite and > -1")));
        }
        Ok(RateModel::Deterministic { r })
    }

    pub fn gaussian_sqrt_t(base: f64, vol: f64) -> Result<Self> {
        if !(base > -1.0) || !base.is_finite() {
            return Err(CptError::invalid("rate", format!("{base} must be finite and > -1")));
        }
        if !(vol >= 0.0) || !vol.is_finite() {
            return Err(CptError::invalid("rate_vol", format!("{vol} must be finite and >= 0")));
        }
        Ok(RateModel::GaussianSqrtT { base, vol })
    }

    pub fn is_deterministic(&self) -> bool {
        match *self {
            RateModel::Deterministic { .. } => true,
            RateModel::GaussianSqrtT { vol, .. } => vol == 0.0,
        }
    }

    /// Draws `r_t`.
    pub fn sample<R: Rng + ?Sized>(&self, t: usize, rng: &mut R) -> f64 {
        match *self {
            RateModel::Deterministic { r } => r,
            RateModel::GaussianSqrtT { base, vol } => {
                let z: f64 = rng.sample(StandardNormal);
                (base + vol * (t as f64).sqrt() * z).max(RATE_FLOOR)
            }
        }
    }

    /// Quadrature nodes for the law of `r_t`: a single node when `r_t` is
    /// certain, otherwise an `n`-point Gauss–Hermite rule, floored like
    /// sampling.
    pub fn expectation_nodes(&self, t: usize, n: usize) -> Vec<(f64, f64)> {
        match *self {
            RateModel::Deterministic { r } => vec![(r, 1.0)],
            RateModel::GaussianSqrtT { base, vol } => {
                let scale = vol * (t as f64).sqrt();
                if scale == 0.0 {
                    return vec![(base, 1.0)];
                }
                gauss_hermite_standard_normal(n.max(1))
                    .into_iter()
                    .map(|(z, w)| ((base + scale * z).max(RATE_FLOOR), w))
                    .collect()
            }
        }
    }
}

/// Independent, reproducible random stream number `stream` under `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
