//! The CPT functional: a Choquet integral of `u+` against the distorted gain
//! tail minus one of `u-` against the distorted loss tail.
//!
//! [`cpt_discrete`] evaluates it exactly by sorting atoms and is the reference
//! every other path is checked against. [`cpt_cdf`] integrates the CDF form
//! after substituting `s = x^alpha`, which turns `du(x)` into `ds` and leaves a
//! bounded integrand with no endpoint singularity.

use std::ops::Mul;

use crate::dist::{DiscreteEmpirical, Distribution};
use crate::error::{CptError, Result};
use crate::prefs::{CptPreferences, Side};
use crate::quadrature::{integrate, AdaptiveSettings};

/// Prospect value split into its gain and loss legs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptValue {
    value: f64,
    gain_part: f64,
    loss_part: f64,
}

impl CptValue {
    pub const ZERO: CptValue = CptValue {
        value: 0.0,
        gain_part: 0.0,
        loss_part: 0.0,
    };

    pub(crate) fn from_parts(gain_part: f64, loss_part: f64) -> Self {
        let gain_part = gain_part.max(0.0);
        let loss_part = loss_part.max(0.0);
        Self {
            value: gain_part - loss_part,
            gain_part,
            loss_part,
        }
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// The gain-side Choquet integral.
    pub fn gain_part(&self) -> f64 {
        self.gain_part
    }

    /// The loss-side Choquet integral including `lambda`, reported as a
    /// non-negative number that is subtracted from `gain_part`.
    pub fn loss_part(&self) -> f64 {
        self.loss_part
    }
}

impl Mul<f64> for CptValue {
    type Output = CptValue;

    fn mul(self, c: f64) -> CptValue {
        debug_assert!(c >= 0.0);
        CptValue::from_parts(self.gain_part * c, self.loss_part * c)
    }
}

/// Settings for [`cpt_cdf`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CdfSettings {
    /// Relative tolerance of each leg.
    pub rel_tol: f64,
    /// Probability mass cut from each unbounded tail.
    pub tail_mass: f64,
    pub max_panels: usize,
}

impl Default for CdfSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            tail_mass: 1e-10,
            max_panels: 4000,
        }
    }
}

impl CdfSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !self.rel_tol.is_finite() {
            return Err(CptError::invalid("cdf_tol", format!("{} must be > 0", self.rel_tol)));
        }
        if !(self.tail_mass > 0.0 && self.tail_mass < 0.5) {
            return Err(CptError::invalid(
                "tail_mass",
                format!("{} is outside (0, 0.5)", self.tail_mass),
            ));
        }
        if self.max_panels == 0 {
            return Err(CptError::invalid("max_panels", "must be positive"));
        }
        Ok(())
    }
}

/// Exact CPT value of a finite distribution.
///
/// Gains `x1 > x2 > ... > 0` get decision weights
/// `T+(P(X >= x_i)) - T+(P(X >= x_{i-1}))`, losses are handled the same way
/// from the bottom of the support with `T-` and `P(X <= x_i)`.
pub fn cpt_discrete(prefs: &CptPreferences, d: &DiscreteEmpirical) -> CptValue {
    let values = d.values();
    let probs = d.probabilities();

    let mut gain = 0.0;
    let mut tail = 0.0;
    let mut prev_weight = 0.0;
    for i in (0..values.len()).rev() {
        let x = values[i];
        if x <= 0.0 {
            break;
        }
        tail = (tail + probs[i]).min(1.0);
        let w = prefs.weight(Side::Gain, tail);
        gain += (w - prev_weight) * prefs.pow_alpha(x);
        prev_weight = w;
    }

    let mut loss = 0.0;
    let mut lower = 0.0;
    let mut prev_weight = 0.0;
    for i in 0..values.len() {
        let x = values[i];
        if x >= 0.0 {
            break;
        }
        lower = (lower + probs[i]).min(1.0);
        let w = prefs.weight(Side::Loss, lower);
        loss += (w - prev_weight) * prefs.pow_alpha(-x);
        prev_weight = w;
    }

    CptValue::from_parts(gain, prefs.lambda() * loss)
}

/// CPT value by adaptive quadrature of the CDF form.
///
/// Unbounded tails are cut at the `tail_mass` and `1 - tail_mass` quantiles;
/// a finite distribution is integrated over its whole support, with its atoms
/// as breakpoints so every panel sees a constant integrand.
pub fn cpt_cdf(prefs: &CptPreferences, d: &Distribution, settings: &CdfSettings) -> Result<CptValue> {
    settings.validate()?;
    let alpha = prefs.alpha();
    let bound = 2.0 * prefs.gamma().min(prefs.delta());
    if alpha >= bound {
        return Err(CptError::IllPosed { alpha, bound });
    }

    let (lowest, highest) = match d {
        Distribution::Discrete(disc) => (disc.values()[0], disc.values()[disc.len() - 1]),
        Distribution::Normal(_) => (
            d.quantile(settings.tail_mass)?,
            d.quantile(1.0 - settings.tail_mass)?,
        ),
    };
    let inv_alpha = 1.0 / alpha;
    let quad = AdaptiveSettings {
        rel_tol: settings.rel_tol,
        abs_tol: 1e-15,
        max_panels: settings.max_panels,
    };
    let breaks = d.breakpoints();

    let gain = if highest > 0.0 {
        let cuts: Vec<f64> = breaks.iter().filter(|b| **b > 0.0).map(|b| b.powf(alpha)).collect();
        let integrand = |s: f64| prefs.weight(Side::Gain, d.survival_unchecked(s.powf(inv_alpha)));
        integrate(integrand, 0.0, highest.powf(alpha), &cuts, &quad)?.0
    } else {
        0.0
    };

    let loss = if lowest < 0.0 {
        let cuts: Vec<f64> = breaks.iter().filter(|b| **b < 0.0).map(|b| (-b).powf(alpha)).collect();
        let integrand = |s: f64| prefs.weight(Side::Loss, d.cdf_unchecked(-s.powf(inv_alpha)));
        integrate(integrand, 0.0, (-lowest).powf(alpha), &cuts, &quad)?.0
    } else {
        0.0
    };

    Ok(CptValue::from_parts(gain, prefs.lambda() * loss))
}

/// CPT value of `X`, exact for finite laws and by quadrature otherwise.
pub fn cpt_value(prefs: &CptPreferences, d: &Distribution, settings: &CdfSettings) -> Result<CptValue> {
    match d {
        Distribution::Discrete(disc) => Ok(cpt_discrete(prefs, disc)),
        Distribution::Normal(_) => cpt_cdf(prefs, d, settings),
    }
}

/// CPT value of holding `amount` dollars of the excess return `y`, i.e. of
/// `amount * y`, computed as `|amount|^alpha * U(sign(amount) * y)`.
pub fn cpt_of_scaled_position(
    prefs: &CptPreferences,
    d: &Distribution,
    amount: f64,
    settings: &CdfSettings,
) -> Result<CptValue> {
    if !amount.is_finite() {
        return Err(CptError::invalid("amount", format!("{amount} is not finite")));
    }
    if amount == 0.0 {
        return Ok(CptValue::ZERO);
    }
    let unit = if amount > 0.0 {
        cpt_value(prefs, d, settings)?
    } else {
        cpt_value(prefs, &d.negated(), settings)?
    };
    Ok(unit * amount.abs().powf(prefs.alpha()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;

    fn tk() -> CptPreferences {
        CptPreferences::tversky_kahneman()
    }

    fn disc(atoms: &[(f64, f64)]) -> DiscreteEmpirical {
        DiscreteEmpirical::new(atoms.iter().copied()).unwrap()
    }

    #[test]
    fn discrete_examples() {
        let p = tk();
        assert_eq!(cpt_discrete(&p, &disc(&[(0.0, 1.0)])).value(), 0.0);
        assert_eq!(cpt_discrete(&p, &disc(&[(1.0, 1.0)])).value(), 1.0);
        let v = cpt_discrete(&p, &disc(&[(-1.0, 0.5), (1.0, 0.5)]));
        let w_gain = p.distort(Side::Gain, 0.5).unwrap();
        let w_loss = p.distort(Side::Loss, 0.5).unwrap();
        assert_abs_diff_eq!(v.gain_part(), w_gain, epsilon = 1e-15);
        assert_abs_diff_eq!(v.loss_part(), 2.2 * w_loss, epsilon = 1e-15);
        assert_abs_diff_eq!(v.value(), -0.578, epsilon = 1e-3);
        assert_eq!(v.value(), v.gain_part() - v.loss_part());
    }

    #[test]
    fn three_gain_atoms_by_hand() {
        // gains 3 > 2 > 1 with P(X >= x) = 0.2, 0.5, 1.0
        let p = tk();
        let d = disc(&[(1.0, 0.5), (2.0, 0.3), (3.0, 0.2)]);
        let w = |q: f64| p.distort(Side::Gain, q).unwrap();
        let a = 0.88f64;
        let expected = w(0.2) * 3f64.powf(a) + (w(0.5) - w(0.2)) * 2f64.powf(a) + (1.0 - w(0.5));
        assert_abs_diff_eq!(cpt_discrete(&p, &d).value(), expected, epsilon = 1e-14);
    }

    #[test]
    fn quadrature_near_degenerate_normal() {
        let d = Distribution::normal(1.0, 1e-9).unwrap();
        let v = cpt_cdf(&tk(), &d, &CdfSettings::default()).unwrap();
        assert_abs_diff_eq!(v.value(), 1.0, epsilon = 1e-6);
    }

    #[test]
    fn quadrature_matches_fine_discretization() {
        let p = tk();
        let d = Distribution::normal(0.045, 1.69).unwrap();
        let quad = cpt_cdf(&p, &d, &CdfSettings::default()).unwrap().value();
        let exact = cpt_discrete(&p, &d.discretize(1_000_000).unwrap()).value();
        assert_relative_eq!(quad, exact, max_relative = 1e-3);
    }

    #[test]
    fn quadrature_homogeneity() {
        let p = tk();
        let s = CdfSettings::default();
        let d = Distribution::normal(0.045, 1.69).unwrap();
        let base = cpt_cdf(&p, &d, &s).unwrap().value();
        let doubled = cpt_cdf(&p, &d.scaled(2.0), &s).unwrap().value();
        let expected = 2f64.powf(0.88) * base;
        assert!((doubled - expected).abs() <= 2.0 * s.rel_tol * expected.abs().max(1.0) * 10.0);
    }

    #[test]
    fn scaled_position_examples() {
        let p = tk();
        let s = CdfSettings::default();
        let y = Distribution::discrete([(-1.0, 0.4), (2.0, 0.6)]).unwrap();
        assert_eq!(cpt_of_scaled_position(&p, &y, 0.0, &s).unwrap(), CptValue::ZERO);
        let unit = cpt_of_scaled_position(&p, &y, 1.0, &s).unwrap();
        assert_eq!(unit, cpt_discrete(&p, y.as_discrete().unwrap()));

        let short = cpt_of_scaled_position(&p, &y, -3.0, &s).unwrap();
        let reflected = disc(&[(3.0, 0.4), (-6.0, 0.6)]);
        assert_relative_eq!(short.value(), cpt_discrete(&p, &reflected).value(), max_relative = 1e-13);
        assert!(cpt_of_scaled_position(&p, &y, f64::NAN, &s).is_err());
    }

    #[test]
    fn loss_aversion_on_symmetric_gambles() {
        let p = CptPreferences::from_params(0.7, 1.5, 0.65, 0.65).unwrap();
        for a in [0.1, 1.0, 7.5] {
            let d = disc(&[(-a, 0.25), (-a / 2.0, 0.25), (a / 2.0, 0.25), (a, 0.25)]);
            assert!(cpt_discrete(&p, &d).value() < 0.0);
        }
    }

    #[test]
    fn refinement_differences_shrink() {
        let p = tk();
        let d = Distribution::normal(0.045, 1.69).unwrap();
        let values: Vec<f64> = [250usize, 500, 1000, 2000, 4000, 8000]
            .iter()
            .map(|n| cpt_discrete(&p, &d.discretize(*n).unwrap()).value())
            .collect();
        let diffs: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        assert!(diffs.windows(2).all(|w| w[1] < w[0]), "{diffs:?}");
    }

    #[test]
    fn tail_truncation_rejects_bad_settings() {
        let d = Distribution::normal(0.0, 1.0).unwrap();
        let bad = CdfSettings {
            tail_mass: 0.0,
            ..CdfSettings::default()
        };
        assert!(cpt_cdf(&tk(), &d, &bad).is_err());
    }

    fn atoms_strategy() -> impl Strategy<Value = Vec<(f64, f64)>> {
        proptest::collection::vec((-5.0f64..5.0, 0.05f64..1.0), 2..30).prop_map(|raw| {
            let total: f64 = raw.iter().map(|a| a.1).sum();
            let mut atoms: Vec<(f64, f64)> = raw.iter().map(|(v, w)| (*v, w / total)).collect();
            let head: f64 = atoms[1..].iter().map(|a| a.1).sum();
            atoms[0].1 = 1.0 - head;
            atoms
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn quadrature_agrees_with_exact_on_step_cdfs(atoms in atoms_strategy()) {
            let p = tk();
            let d = DiscreteEmpirical::new(atoms).unwrap();
            let exact = cpt_discrete(&p, &d);
            let quad = cpt_cdf(&p, &Distribution::Discrete(d), &CdfSettings::default()).unwrap();
            prop_assert!((exact.value() - quad.value()).abs() < 1e-9);
            prop_assert!(exact.gain_part() >= 0.0 && exact.loss_part() >= 0.0);
        }

        #[test]
        fn exact_path_is_homogeneous(atoms in atoms_strategy(), c in 0.01f64..50.0) {
            let p = tk();
            let d = DiscreteEmpirical::new(atoms).unwrap();
            let base = cpt_discrete(&p, &d).value();
            let scaled = cpt_discrete(&p, &d.scaled(c)).value();
            let expected = c.powf(p.alpha()) * base;
            prop_assert!((scaled - expected).abs() <= 1e-10 * expected.abs().max(1.0));
        }

        #[test]
        fn dominance_never_lowers_value(
            base in proptest::collection::vec(-5.0f64..5.0, 1..25),
            bumps in proptest::collection::vec(0.0f64..2.0, 25),
        ) {
            let p = tk();
            let n = base.len() as f64;
            let low = DiscreteEmpirical::new(base.iter().map(|v| (*v, 1.0 / n))).unwrap();
            let high = DiscreteEmpirical::new(base.iter().zip(&bumps).map(|(v, b)| (v + b, 1.0 / n))).unwrap();
            prop_assert!(cpt_discrete(&p, &high).value() >= cpt_discrete(&p, &low).value() - 1e-12);
        }
    }
}
