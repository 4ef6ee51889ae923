//! Numerical integration: adaptive Gauss–Kronrod over a finite interval with
//! user breakpoints, and Gauss–Hermite rules for normal expectations.

use crate::error::{CptError, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// 7-point Gauss weights at XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn kronrod15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Panel { a, b, value, error }
}

/// Tolerances for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveSettings {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for AdaptiveSettings {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_panels: 4000,
        }
    }
}

/// Integrates `f` over `[a, b]`, starting from one panel per breakpoint
/// interval and bisecting the worst panel until the summed error estimate is
/// below `max(abs_tol, rel_tol * |I|)`.
///
/// Breakpoints outside `(a, b)` are ignored. Returns `(integral, error)`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    settings: &AdaptiveSettings,
) -> Result<(f64, f64)> {
    if !(b > a) {
        return Ok((0.0, 0.0));
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| x.is_finite() && *x > a && *x < b)
        .collect();
    cuts.sort_by(|x, y| x.total_cmp(y));
    cuts.dedup();

    let mut panels = Vec::with_capacity(cuts.len() + 64);
    let mut left = a;
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        panels.push(kronrod15(&f, left, c));
        left = c;
    }

    loop {
        let value: f64 = panels.iter().map(|p| p.value).sum();
        let error: f64 = panels.iter().map(|p| p.error).sum();
        if error <= settings.abs_tol.max(settings.rel_tol * value.abs()) {
            return Ok((value, error));
        }
        if panels.len() >= settings.max_panels {
            return Err(CptError::NonConvergence {
                subdivisions: panels.len(),
                estimate: value,
                error,
            });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .map(|(i, _)| i)
            .expect("at least one panel");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // interval can no longer be split in floating point
            return Err(CptError::NonConvergence {
                subdivisions: panels.len() + 1,
                estimate: value,
                error,
            });
        }
        panels.push(kronrod15(&f, p.a, mid));
        panels.push(kronrod15(&f, mid, p.b));
    }
}

/// Gauss–Hermite rule for `E[g(Z)]`, `Z ~ N(0, 1)`.
///
/// Returns `n` nodes and weights with `sum(w) == 1`, ordered ascending by node.
pub fn gauss_hermite_standard_normal(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
    if n == 1 {
        return vec![(0.0, 1.0)];
    }
    const PIM4: f64 = 0.751_125_544_464_942_5;
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.855_75 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = PIM4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let norm = std::f64::consts::PI.sqrt();
    let sqrt2 = std::f64::consts::SQRT_2;
    let mut rule: Vec<(f64, f64)> = x
        .into_iter()
        .zip(w)
        .map(|(xi, wi)| (sqrt2 * xi, wi / norm))
        .collect();
    if n % 2 == 1 {
        rule[n / 2].0 = 0.0;
    }
    rule.reverse();
    rule
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
