//! Adaptive Gauss–Kronrod quadrature on finite and infinite intervals.

use crate::error::{Result, SmomError};

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
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances and limits for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Absolute error target.
    pub abs_tol: f64,
    /// Relative error target.
    pub rel_tol: f64,
    /// Maximum number of interval bisections.
    pub max_subdivisions: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_subdivisions: 2000,
        }
    }
}

/// One Gauss–Kronrod 7/15 panel: returns the Kronrod estimate and the
/// absolute difference to the embedded Gauss rule.
pub fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = clean(f(c));
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let f1 = clean(f(c - dx));
        let f2 = clean(f(c + dx));
        k += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            g += WG[j / 2] * (f1 + f2);
        }
    }
    (k * h, ((k - g) * h).abs())
}

fn clean(v: f64) -> f64 {
    if v.is_finite() {
        v
    } else {
        0.0
    }
}

/// Integrates `f` over `[a, b]`, where either limit may be infinite.
///
/// Infinite ranges are mapped onto bounded ones by `x = a + t/(1−t)` and
/// its mirror images. Non-finite integrand values at points where the
/// substitution itself overflows are treated as zero.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
    integrate_dyn(&f, a, b, cfg)
}

fn integrate_dyn(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
    if a.is_nan() || b.is_nan() {
        return Err(SmomError::Quadrature { a, b });
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_dyn(f, b, a, cfg).map(|v| -v);
    }
    match (a.is_finite(), b.is_finite()) {
        (true, true) => adaptive(f, a, b, cfg),
        (true, false) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = a + t / s;
                if x.is_finite() {
                    f(x) / (s * s)
                } else {
                    0.0
                }
            };
            adaptive(&g, 0.0, 1.0, cfg).map_err(|_| SmomError::Quadrature { a, b })
        }
        (false, true) => {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = b - t / s;
                if x.is_finite() {
                    f(x) / (s * s)
                } else {
                    0.0
                }
            };
            adaptive(&g, 0.0, 1.0, cfg).map_err(|_| SmomError::Quadrature { a, b })
        }
        (false, false) => {
            let left = integrate_dyn(f, f64::NEG_INFINITY, 0.0, cfg)?;
            let right = integrate_dyn(f, 0.0, f64::INFINITY, cfg)?;
            Ok(left + right)
        }
    }
}

fn adaptive(f: &dyn Fn(f64) -> f64, a: f64, b: f64, cfg: QuadConfig) -> Result<f64> {
    let (k, e) = gk15(f, a, b);
    let mut panels = vec![(a, b, k, e)];
    let mut total = k;
    let mut err = e;
    for _ in 0..cfg.max_subdivisions {
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(total);
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("panel list is never empty");
        let (pa, pb, pk, pe) = panels.swap_remove(idx);
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            return if err <= 1e3 * cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
                Ok(total)
            } else {
                Err(SmomError::Quadrature { a, b })
            };
        }
        let (k1, e1) = gk15(f, pa, mid);
        let (k2, e2) = gk15(f, mid, pb);
        total += k1 + k2 - pk;
        err += e1 + e2 - pe;
        panels.push((pa, mid, k1, e1));
        panels.push((mid, pb, k2, e2));
    }
    let total: f64 = panels.iter().map(|p| p.2).sum();
    let err: f64 = panels.iter().map(|p| p.3).sum();
    if err <= 1e3 * cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
        Ok(total)
    } else {
        Err(SmomError::Quadrature { a, b })
    }
}

/// Integrates with the default configuration.
pub fn integrate_default(f: impl Fn(f64) -> f64, a: f64, b: f64) -> Result<f64> {
    integrate(f, a, b, QuadConfig::default())
}

/// Composite adaptive Simpson rule, kept as an independent cross-check.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(&f, a, b, fa, fm, fb, whole, tol, 40)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let v = integrate_default(|x| x * x, 0.0, 3.0).unwrap();
        assert!((v - 9.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_on_real_line() {
        let v =
            integrate_default(|x| (-0.5 * x * x).exp(), f64::NEG_INFINITY, f64::INFINITY).unwrap();
        assert!((v - (2.0 * std::f64::consts::PI).sqrt()).abs() < 1e-10);
    }

    #[test]
    fn cauchy_density_has_unit_mass() {
        let v = integrate_default(
            |x| 1.0 / (std::f64::consts::PI * (1.0 + x * x)),
            f64::NEG_INFINITY,
            f64::INFINITY,
        )
        .unwrap();
        assert!((v - 1.0).abs() < 1e-9);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let v = integrate_default(|x| x.exp(), 1.0, 0.0).unwrap();
        assert!((v + (1f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn simpson_agrees() {
        let v = simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }
}
