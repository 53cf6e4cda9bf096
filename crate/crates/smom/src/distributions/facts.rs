//! Distribution-specific facts: existence criteria, moment formulas and
//! data preprocessing helpers.

use super::invalid;
use super::trunc_normal::window_mass;
use crate::error::Result;
use crate::numeric::{mean, mean_of, safeguarded_newton};
use crate::specfun::raw;

/// True when the Lomax maximum likelihood estimator exists, which happens
/// exactly when the mean of squares exceeds twice the squared mean.
pub fn lomax_mle_exists(sample: &[f64]) -> bool {
    if sample.is_empty() {
        return false;
    }
    let m1 = mean(sample);
    let m2 = mean_of(sample, |x| x * x);
    m2 - 2.0 * m1 * m1 > 0.0
}

/// First and second moments `(E[X], E[X²])` of the normal `N(μ, σ²)`
/// truncated to `(a, b)`; `theta = (μ, σ)`.
pub fn trunc_normal_moments(theta: &[f64], a: f64, b: f64) -> Result<(f64, f64)> {
    if theta.len() != 2 || !(theta[1] > 0.0) || !theta[0].is_finite() {
        return Err(invalid(format!(
            "invalid truncated normal parameters {theta:?}"
        )));
    }
    if !(a.is_finite() && b.is_finite() && a < b) {
        return Err(invalid(format!(
            "truncation bounds ({a}, {b}) must be finite and ordered"
        )));
    }
    let (mu, s) = (theta[0], theta[1]);
    let al = (a - mu) / s;
    let be = (b - mu) / s;
    let z = window_mass(al, be);
    let (pa, pb) = (raw::norm_pdf(al), raw::norm_pdf(be));
    let r1 = (pa - pb) / z;
    let r2 = (al * pa - be * pb) / z;
    let m1 = mu + s * r1;
    let var = s * s * (1.0 + r2 - r1 * r1);
    Ok((m1, var + m1 * m1))
}

/// Langevin function `coth(x) − 1/x`, accurate near zero.
pub fn langevin(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x / 3.0 * (1.0 - x2 / 15.0 * (1.0 - 2.0 * x2 / 21.0))
    } else {
        1.0 / x.tanh() - 1.0 / x
    }
}

fn langevin_dx(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        1.0 / 3.0 - x * x / 15.0
    } else {
        let s = x.sinh();
        1.0 / (x * x) - 1.0 / (s * s)
    }
}

/// Solves `coth(x) − 1/x = y` for `|y| < 1`.
pub fn inverse_langevin(y: f64) -> Option<f64> {
    if !(y.abs() < 1.0) {
        return None;
    }
    if y == 0.0 {
        return Some(0.0);
    }
    let t = y.abs();
    let hi = 2.0 / (1.0 - t) + 3.0;
    let x = safeguarded_newton(|x| (langevin(x) - t, langevin_dx(x)), 0.0, hi, 1e-15, 200).ok()?;
    Some(x.copysign(y))
}

/// Existence test for the truncated normal maximum likelihood estimator.
///
/// Observations are coded as `Y = 2(X − a)/(b − a) − 1 ∈ (−1, 1)`; the
/// estimator exists iff `Ȳ² < mean(Y²) < 1 − 2Ȳ/x*` where
/// `coth(x*) − 1/x* = Ȳ`. At `Ȳ = 0` the ratio `Ȳ/x*` takes its limit `1/3`.
pub fn trunc_normal_mle_exists(sample: &[f64], a: f64, b: f64) -> bool {
    if sample.len() < 2 || !(a < b) {
        return false;
    }
    let ys: Vec<f64> = sample
        .iter()
        .map(|x| 2.0 * (x - a) / (b - a) - 1.0)
        .collect();
    let y1 = mean(&ys);
    let y2 = mean_of(&ys, |y| y * y);
    let ratio = if y1.abs() < 1e-12 {
        1.0 / 3.0
    } else {
        match inverse_langevin(y1) {
            Some(x) => y1 / x,
            None => return false,
        }
    };
    y1 * y1 < y2 && y2 < 1.0 - 2.0 * ratio
}

/// Rounds to `decimals` places with ties going to the even neighbour.
pub fn round_half_even(x: f64, decimals: u32) -> f64 {
    let scale = 10f64.powi(decimals as i32);
    let y = x * scale;
    let r = y.round();
    let rounded = if (y - y.trunc()).abs() == 0.5 {
        2.0 * (y / 2.0).round()
    } else {
        r
    };
    rounded / scale
}

/// Rounds every observation, keeping zeros in the sample.
pub fn round_sample(sample: &[f64], decimals: u32) -> Vec<f64> {
    sample
        .iter()
        .map(|&x| round_half_even(x, decimals))
        .collect()
}
