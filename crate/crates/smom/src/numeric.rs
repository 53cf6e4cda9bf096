//! Small numerical utilities shared across modules: compensated sums,
//! order statistics and safeguarded scalar root finding.

use crate::error::{Result, SmomError};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    /// Empty accumulator.
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds one term.
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Current compensated total.
    pub fn total(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of a slice in index order.
pub fn kahan_sum(xs: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(x);
    }
    acc.total()
}

/// Compensated mean of a slice; NaN for an empty slice.
pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    kahan_sum(xs) / xs.len() as f64
}

/// Compensated mean of `f(x)` over a slice.
pub fn mean_of(xs: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add(f(x));
    }
    acc.total() / xs.len() as f64
}

/// Sorted copy of a slice using the IEEE total order.
pub fn sorted(xs: &[f64]) -> Vec<f64> {
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Median with the even-length convention of averaging the two central
/// order statistics.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let s = sorted(xs);
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}

/// Unbiased sample variance; NaN for fewer than two points.
pub fn variance(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return f64::NAN;
    }
    let m = mean(xs);
    let mut acc = KahanSum::new();
    for &x in xs {
        acc.add((x - m) * (x - m));
    }
    acc.total() / (xs.len() - 1) as f64
}

/// Finds a root of `f` in `[lo, hi]` by bisection polished with Newton
/// steps where they stay inside the current bracket.
///
/// `f` returns `(value, derivative)`. The bracket must change sign.
pub fn safeguarded_newton<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    max_iter: usize,
) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let (mut flo, _) = f(lo);
    let (fhi, _) = f(hi);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if !(flo.is_finite() && fhi.is_finite()) || flo.signum() == fhi.signum() {
        return Err(SmomError::Config(format!(
            "root bracket [{lo}, {hi}] does not change sign"
        )));
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x);
        if fx == 0.0 {
            return Ok(x);
        }
        if fx.signum() == flo.signum() {
            lo = x;
            flo = fx;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton.is_finite() && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= tol * (1.0 + x.abs()) || (hi - lo) <= tol * (1.0 + x.abs()) {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Expands `[lo, hi]` geometrically until `f` changes sign, keeping the
/// lower end above `floor`.
pub fn expand_bracket<F>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    floor: f64,
    max_iter: usize,
) -> Option<(f64, f64)>
where
    F: Fn(f64) -> f64,
{
    let mut flo = f(lo);
    let mut fhi = f(hi);
    for _ in 0..max_iter {
        if flo.is_finite() && fhi.is_finite() && flo.signum() != fhi.signum() {
            return Some((lo, hi));
        }
        if !flo.is_finite() || (fhi.is_finite() && flo.abs() < fhi.abs()) {
            lo = floor + (lo - floor) * 0.5;
            flo = f(lo);
        } else {
            hi *= 2.0;
            fhi = f(hi);
        }
    }
    None
}

/// Numeric derivative `d f / d x` by central differences.
pub fn central_diff(f: impl Fn(f64) -> f64, x: f64) -> f64 {
    let h = f64::EPSILON.cbrt() * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}
