//! CPT preference parameters: the S-shaped power value function and the
//! inverse-S probability distortions applied to gain and loss tails.

use crate::error::{CptError, Result};

/// Default gain-side distortion exponent when a configuration omits it.
pub const DEFAULT_GAMMA: f64 = 0.61;

/// Power value function parameters: `u(x) = x^alpha` on gains and
/// `-lambda * (-x)^alpha` on losses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValueParams {
    alpha: f64,
    lambda: f64,
}

impl ValueParams {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CptError::invalid("alpha", format!("{alpha} is outside (0, 1)")));
        }
        if !(lambda > 1.0) || !lambda.is_finite() {
            return Err(CptError::invalid("lambda", format!("{lambda} must be finite and > 1")));
        }
        Ok(Self { alpha, lambda })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Exponents of the gain-side and loss-side probability distortions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistortionParams {
    gamma: f64,
    delta: f64,
}

impl DistortionParams {
    pub fn new(gamma: f64, delta: f64) -> Result<Self> {
        if !(gamma > 0.28 && gamma < 1.0) {
            return Err(CptError::invalid("gamma", format!("{gamma} is outside (0.28, 1)")));
        }
        if !(delta > 0.28 && delta < 1.0) {
            return Err(CptError::invalid("delta", format!("{delta} is outside (0.28, 1)")));
        }
        Ok(Self { gamma, delta })
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Which tail a distortion is applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Gain,
    Loss,
}

/// Validated CPT preferences.
///
/// Construction enforces `alpha < 2 * min(gamma, delta)`, which is what keeps
/// both Choquet integrals finite for distributions with normal-like tails.
/// After that every evaluation is infallible apart from domain checks on the
/// argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CptPreferences {
    value: ValueParams,
    distortion: DistortionParams,
}

impl CptPreferences {
    pub fn new(value: ValueParams, distortion: DistortionParams) -> Result<Self> {
        let bound = 2.0 * distortion.gamma.min(distortion.delta);
        if value.alpha >= bound {
            return Err(CptError::IllPosed {
                alpha: value.alpha,
                bound,
            });
        }
        Ok(Self { value, distortion })
    }

    /// Shorthand for building from the four scalars.
    pub fn from_params(alpha: f64, lambda: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self::new(
            ValueParams::new(alpha, lambda)?,
            DistortionParams::new(gamma, delta)?,
        )
    }

    /// Tversky–Kahneman style parameters used throughout the examples and
    /// the shipped default configuration.
    pub fn tversky_kahneman() -> Self {
        Self::from_params(0.88, 2.20, DEFAULT_GAMMA, 0.69).expect("valid defaults")
    }

    pub fn value_params(&self) -> &ValueParams {
        &self.value
    }

    pub fn distortion_params(&self) -> &DistortionParams {
        &self.distortion
    }

    pub fn alpha(&self) -> f64 {
        self.value.alpha
    }

    pub fn lambda(&self) -> f64 {
        self.value.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.distortion.gamma
    }

    pub fn delta(&self) -> f64 {
        self.distortion.delta
    }

    /// Value of a signed deviation from the benchmark.
    pub fn value(&self, x: f64) -> Result<f64> {
        if !x.is_finite() {
            return Err(CptError::invalid("x", format!("{x} is not finite")));
        }
        Ok(self.u(x))
    }

    /// Distorted weight of a tail probability.
    pub fn distort(&self, side: Side, p: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&p) {
            return Err(CptError::invalid("p", format!("{p} is outside [0, 1]")));
        }
        Ok(self.weight(side, p))
    }

    #[inline]
    pub(crate) fn u(&self, x: f64) -> f64 {
        if x >= 0.0 {
            x.powf(self.value.alpha)
        } else {
            -self.value.lambda * (-x).powf(self.value.alpha)
        }
    }

    /// `x^alpha` for `x >= 0`.
    #[inline]
    pub(crate) fn pow_alpha(&self, x: f64) -> f64 {
        x.powf(self.value.alpha)
    }

    #[inline]
    pub(crate) fn weight(&self, side: Side, p: f64) -> f64 {
        let exponent = match side {
            Side::Gain => self.distortion.gamma,
            Side::Loss => self.distortion.delta,
        };
        tk_weight(p, exponent)
    }
}

/// `p^c / (p^c + (1-p)^c)^(1/c)`, with exact fixed points at 0 and 1.
#[inline]
fn tk_weight(p: f64, c: f64) -> f64 {
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let a = p.powf(c);
    let b = (1.0 - p).powf(c);
    (a / (a + b).powf(1.0 / c)).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn tk() -> CptPreferences {
        CptPreferences::tversky_kahneman()
    }

    #[test]
    fn value_examples() {
        let p = tk();
        assert_eq!(p.value(0.0).unwrap(), 0.0);
        assert_eq!(p.value(1.0).unwrap(), 1.0);
        assert_abs_diff_eq!(p.value(-1.0).unwrap(), -2.20, epsilon = 1e-15);
        assert!(p.value(f64::NAN).is_err());
        assert!(p.value(f64::INFINITY).is_err());
    }

    #[test]
    fn distort_examples() {
        let p = tk();
        assert_eq!(p.distort(Side::Gain, 0.0).unwrap(), 0.0);
        assert_eq!(p.distort(Side::Gain, 1.0).unwrap(), 1.0);
        // 0.5^c / (2 * 0.5^c)^(1/c) evaluated in extended precision
        assert_abs_diff_eq!(p.distort(Side::Gain, 0.5).unwrap(), 0.420_66, epsilon = 1e-4);
        assert_abs_diff_eq!(p.distort(Side::Loss, 0.5).unwrap(), 0.454_03, epsilon = 1e-4);
        assert!(p.distort(Side::Loss, -0.1).is_err());
        assert!(p.distort(Side::Loss, 1.000_1).is_err());
    }

    #[test]
    fn construction_bounds() {
        assert!(ValueParams::new(1.5, 2.2).is_err());
        assert!(ValueParams::new(0.0, 2.2).is_err());
        assert!(ValueParams::new(0.5, 1.0).is_err());
        assert!(DistortionParams::new(0.28, 0.5).is_err());
        assert!(DistortionParams::new(0.5, 1.0).is_err());
        // alpha = 0.9 >= 2 * 0.4
        let err = CptPreferences::from_params(0.9, 2.2, 0.4, 0.69).unwrap_err();
        assert!(matches!(err, CptError::IllPosed { .. }));
        assert!(CptPreferences::from_params(0.79, 2.2, 0.4, 0.69).is_ok());
    }

    proptest! {
        #[test]
        fn value_sign_and_homogeneity(x in -50.0f64..50.0, c in 0.01f64..20.0, alpha in 0.05f64..0.55) {
            let p = CptPreferences::from_params(alpha, 2.5, 0.61, 0.69).unwrap();
            let v = p.value(x).unwrap();
            if x != 0.0 {
                prop_assert_eq!(v.signum(), x.signum());
            }
            let scaled = p.value(c * x).unwrap();
            let expected = c.powf(alpha) * v;
            prop_assert!((scaled - expected).abs() <= 1e-12 * expected.abs().max(1.0));
        }

        #[test]
        fn value_strictly_increasing(a in -20.0f64..20.0, d in 1e-6f64..5.0) {
            let p = tk();
            prop_assert!(p.value(a + d).unwrap() > p.value(a).unwrap());
        }

        #[test]
        fn distort_monotone_in_unit_interval(c in 0.2801f64..0.9999, p1 in 0.0f64..1.0, d in 1e-6f64..0.5) {
            let p2 = (p1 + d).min(1.0);
            let w1 = tk_weight(p1, c);
            let w2 = tk_weight(p2, c);
            prop_assert!((0.0..=1.0).contains(&w1));
            if p2 > p1 {
                prop_assert!(w2 > w1, "w({p2})={w2} <= w({p1})={w1}");
            }
        }
    }
}
