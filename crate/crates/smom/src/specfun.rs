//! Special functions and numerical differentiation.
//!
//! The checked functions at module level validate their arguments and
//! return [`SmomError::Domain`] for invalid or non-finite input. The
//! [`raw`] submodule exposes the same kernels without validation for use
//! inside hot loops where the caller has already established validity.
//!
//! ```
//! use smom::specfun::{digamma, ln_gamma, reg_lower_gamma};
//!
//! assert!(ln_gamma(1.0).unwrap().abs() < 1e-15);
//! assert!((digamma(1.0).unwrap() + 0.5772156649015329).abs() < 1e-12);
//! let p = reg_lower_gamma(1.0, 2.0).unwrap();
//! assert!((p - (1.0 - (-2.0f64).exp())).abs() < 1e-14);
//! ```

use crate::error::{Result, SmomError};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

fn check_positive(func: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() || x <= 0.0 {
        return Err(SmomError::domain(
            func,
            format!("expected a finite positive argument, got {x}"),
        ));
    }
    Ok(())
}

fn check_finite(func: &'static str, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(SmomError::domain(
            func,
            format!("expected a finite argument, got {x}"),
        ));
    }
    Ok(())
}

/// Natural logarithm of the gamma function for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    check_positive("ln_gamma", x)?;
    Ok(raw::ln_gamma(x))
}

/// Digamma function ψ(x) = d/dx ln Γ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    check_positive("digamma", x)?;
    Ok(raw::digamma(x))
}

/// Trigamma function ψ′(x) for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    check_positive("trigamma", x)?;
    Ok(raw::trigamma(x))
}

/// Logarithm of the beta function B(a, b).
pub fn ln_beta(a: f64, b: f64) -> Result<f64> {
    check_positive("ln_beta", a)?;
    check_positive("ln_beta", b)?;
    Ok(raw::ln_beta(a, b))
}

/// Regularized lower incomplete gamma function P(a, x) = γ(a, x)/Γ(a).
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    check_positive("reg_lower_gamma", a)?;
    if !x.is_finite() || x < 0.0 {
        return Err(SmomError::domain(
            "reg_lower_gamma",
            format!("x must be finite and nonnegative, got {x}"),
        ));
    }
    Ok(raw::gamma_p(a, x))
}

/// Regularized upper incomplete gamma function Q(a, x) = 1 − P(a, x).
pub fn reg_upper_gamma(a: f64, x: f64) -> Result<f64> {
    check_positive("reg_upper_gamma", a)?;
    if !x.is_finite() || x < 0.0 {
        return Err(SmomError::domain(
            "reg_upper_gamma",
            format!("x must be finite and nonnegative, got {x}"),
        ));
    }
    Ok(raw::gamma_q(a, x))
}

/// Regularized incomplete beta function I_x(a, b).
pub fn reg_incomplete_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    check_positive("reg_incomplete_beta", a)?;
    check_positive("reg_incomplete_beta", b)?;
    if !(0.0..=1.0).contains(&x) {
        return Err(SmomError::domain(
            "reg_incomplete_beta",
            format!("x must lie in [0, 1], got {x}"),
        ));
    }
    Ok(raw::beta_inc(a, b, x))
}

/// Standard normal cumulative distribution function Φ(x).
pub fn std_normal_cdf(x: f64) -> Result<f64> {
    check_finite("std_normal_cdf", x)?;
    Ok(raw::norm_cdf(x))
}

/// Standard normal density φ(x).
pub fn std_normal_pdf(x: f64) -> Result<f64> {
    check_finite("std_normal_pdf", x)?;
    Ok(raw::norm_pdf(x))
}

/// Standard normal quantile Φ⁻¹(u) for `u` in (0, 1).
pub fn std_normal_quantile(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(SmomError::domain(
            "std_normal_quantile",
            format!("u must lie in (0, 1), got {u}"),
        ));
    }
    Ok(raw::norm_quantile(u))
}

/// Unchecked special-function kernels.
///
/// Inputs outside the documented domain produce NaN instead of an error.
pub mod raw {
    use super::{EULER_GAMMA, FRAC_1_SQRT_2PI, LN_SQRT_2PI};

    const LANCZOS_G: f64 = 7.0;
    const LANCZOS: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];

    /// ln Γ(x) for x > 0.
    pub fn ln_gamma(x: f64) -> f64 {
        if !(x > 0.0) || !x.is_finite() {
            return f64::NAN;
        }
        if x == 1.0 || x == 2.0 {
            return 0.0;
        }
        if x >= 10.0 {
            let inv = 1.0 / x;
            let inv2 = inv * inv;
            let series = inv
                * (1.0 / 12.0
                    - inv2
                        * (1.0 / 360.0
                            - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
            return (x - 0.5) * x.ln() - x + LN_SQRT_2PI + series;
        }
        if x < 0.5 {
            return ln_gamma(x + 1.0) - x.ln();
        }
        let z = x - 1.0;
        let mut acc = LANCZOS[0];
        for (i, c) in LANCZOS.iter().enumerate().skip(1) {
            acc += c / (z + i as f64);
        }
        let t = z + LANCZOS_G + 0.5;
        LN_SQRT_2PI + (z + 0.5) * t.ln() - t + acc.ln()
    }

    /// ln B(a, b).
    pub fn ln_beta(a: f64, b: f64) -> f64 {
        ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
    }

    /// ψ(x) for x > 0.
    pub fn digamma(x: f64) -> f64 {
        if !(x > 0.0) || !x.is_finite() {
            return f64::NAN;
        }
        if x == 1.0 {
            return -EULER_GAMMA;
        }
        let mut x = x;
        let mut acc = 0.0;
        while x < 10.0 {
            acc -= 1.0 / x;
            x += 1.0;
        }
        let inv2 = 1.0 / (x * x);
        let tail = inv2
            * (1.0 / 12.0
                - inv2
                    * (1.0 / 120.0
                        - inv2
                            * (1.0 / 252.0
                                - inv2
                                    * (1.0 / 240.0
                                        - inv2
                                            * (1.0 / 132.0
                                                - inv2 * (691.0 / 32_760.0 - inv2 / 12.0))))));
        acc + x.ln() - 0.5 / x - tail
    }

    /// ψ′(x) for x > 0.
    pub fn trigamma(x: f64) -> f64 {
        if !(x > 0.0) || !x.is_finite() {
            return f64::NAN;
        }
        let mut x = x;
        let mut acc = 0.0;
        while x < 10.0 {
            acc += 1.0 / (x * x);
            x += 1.0;
        }
        let inv = 1.0 / x;
        let inv2 = inv * inv;
        let tail = inv
            * (1.0
                + inv
                    * (0.5
                        + inv
                            * (1.0 / 6.0
                                - inv2
                                    * (1.0 / 30.0
                                        - inv2
                                            * (1.0 / 42.0
                                                - inv2
                                                    * (1.0 / 30.0
                                                        - inv2
                                                            * (5.0 / 66.0
                                                                - inv2
                                                                    * (691.0 / 2730.0
                                                                        - inv2 * 7.0 / 6.0))))))));
        acc + tail
    }

    const ITMAX: usize = 100_000;
    const EPS: f64 = 1e-16;
    const FPMIN: f64 = 1e-300;

    fn gamma_series(a: f64, x: f64) -> f64 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..ITMAX {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    }

    fn gamma_cf(a: f64, x: f64) -> f64 {
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..ITMAX {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        (-x + a * x.ln() - ln_gamma(a)).exp() * h
    }

    /// Regularized lower incomplete gamma P(a, x).
    pub fn gamma_p(a: f64, x: f64) -> f64 {
        if !(a > 0.0) || !(x >= 0.0) || x.is_nan() {
            return f64::NAN;
        }
        if x == 0.0 {
            return 0.0;
        }
        if x.is_infinite() {
            return 1.0;
        }
        if x < a + 1.0 {
            gamma_series(a, x).min(1.0)
        } else {
            (1.0 - gamma_cf(a, x)).max(0.0)
        }
    }

    /// Regularized upper incomplete gamma Q(a, x).
    pub fn gamma_q(a: f64, x: f64) -> f64 {
        if !(a > 0.0) || !(x >= 0.0) || x.is_nan() {
            return f64::NAN;
        }
        if x == 0.0 {
            return 1.0;
        }
        if x.is_infinite() {
            return 0.0;
        }
        if x < a + 1.0 {
            (1.0 - gamma_series(a, x)).max(0.0)
        } else {
            gamma_cf(a, x).min(1.0)
        }
    }

    fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
        let qab = a + b;
        let qap = a + 1.0;
        let qam = a - 1.0;
        let mut c = 1.0;
        let mut d = 1.0 - qab * x / qap;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        d = 1.0 / d;
        let mut h = d;
        for m in 1..ITMAX {
            let m = m as f64;
            let m2 = 2.0 * m;
            let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
            d = 1.0 + aa * d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = 1.0 + aa / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            h *= d * c;
            let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
            d = 1.0 + aa * d;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = 1.0 + aa / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
        }
        h
    }

    /// Regularized incomplete beta I_x(a, b).
    pub fn beta_inc(a: f64, b: f64, x: f64) -> f64 {
        if !(a > 0.0) || !(b > 0.0) || !(0.0..=1.0).contains(&x) {
            return f64::NAN;
        }
        if x == 0.0 {
            return 0.0;
        }
        if x == 1.0 {
            return 1.0;
        }
        let ln_front = a * x.ln() + b * (-x).ln_1p() - ln_beta(a, b);
        if x < (a + 1.0) / (a + b + 2.0) {
            (ln_front.exp() * beta_cf(a, b, x) / a).clamp(0.0, 1.0)
        } else {
            (1.0 - ln_front.exp() * beta_cf(b, a, 1.0 - x) / b).clamp(0.0, 1.0)
        }
    }

    /// Upper tail 1 − I_x(a, b), computed without cancellation.
    pub fn beta_inc_upper(a: f64, b: f64, x: f64) -> f64 {
        beta_inc(b, a, 1.0 - x)
    }

    /// Standard normal density.
    pub fn norm_pdf(x: f64) -> f64 {
        FRAC_1_SQRT_2PI * (-0.5 * x * x).exp()
    }

    /// Standard normal CDF via the incomplete gamma identity erfc(z) = Q(1/2, z²).
    pub fn norm_cdf(x: f64) -> f64 {
        if x.is_nan() {
            return f64::NAN;
        }
        let half_tail = 0.5 * gamma_q(0.5, 0.5 * x * x);
        if x < 0.0 {
            half_tail
        } else {
            1.0 - half_tail
        }
    }

    /// Standard normal survival function 1 − Φ(x), accurate in the upper tail.
    pub fn norm_sf(x: f64) -> f64 {
        norm_cdf(-x)
    }

    /// Standard normal quantile (rational approximation polished by Halley steps).
    pub fn norm_quantile(u: f64) -> f64 {
        if !(u > 0.0 && u < 1.0) {
            return f64::NAN;
        }
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
        let p_low = 0.024_25;
        let mut z = if u < p_low {
            let q = (-2.0 * u.ln()).sqrt();
            (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
        } else if u <= 1.0 - p_low {
            let q = u - 0.5;
            let r = q * q;
            (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
                / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
        } else {
            let q = (-2.0 * (-u).ln_1p()).sqrt();
            -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
                / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
        };
        for _ in 0..2 {
            let e = if z < 0.0 {
                norm_cdf(z) - u
            } else {
                (1.0 - u) - norm_sf(z)
            };
            let pdf = norm_pdf(z);
            if pdf <= 0.0 || !e.is_finite() {
                break;
            }
            let step = e / pdf;
            z -= step / (1.0 + 0.5 * z * step);
        }
        z
    }
}

/// Finite-difference configuration.
///
/// The step is `rel_step · max(1, |x|)` and the scheme is second-order
/// central, falling back to second-order one-sided stencils where the
/// central stencil would leave the admissible region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffSpec {
    /// Relative step multiplier, by default the cube root of machine epsilon.
    pub rel_step: f64,
}

impl Default for DiffSpec {
    fn default() -> Self {
        DiffSpec {
            rel_step: f64::EPSILON.cbrt(),
        }
    }
}

/// Stencil actually used by a finite difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiffScheme {
    /// Symmetric two-point stencil.
    Central,
    /// Three-point forward stencil.
    Forward,
    /// Three-point backward stencil.
    Backward,
}

impl DiffSpec {
    /// Step length used at the point `x`.
    pub fn step(&self, x: f64) -> f64 {
        self.rel_step * x.abs().max(1.0)
    }

    /// Central-difference derivative of a scalar function.
    pub fn derivative(&self, f: impl Fn(f64) -> f64, x: f64) -> f64 {
        let h = self.step(x);
        (f(x + h) - f(x - h)) / (2.0 * h)
    }
}

/// Numerical partial derivative of `f` with respect to `theta[i]`.
///
/// `admissible` decides whether a perturbed parameter vector may be
/// evaluated; when one side of the central stencil is inadmissible a
/// one-sided stencil is used and reported in the returned scheme.
pub fn numeric_param_grad_with<F, A>(
    spec: &DiffSpec,
    f: F,
    theta: &[f64],
    i: usize,
    admissible: A,
) -> Result<(f64, DiffScheme)>
where
    F: Fn(&[f64]) -> f64,
    A: Fn(&[f64]) -> bool,
{
    if i >= theta.len() {
        return Err(SmomError::Dimension(format!(
            "index {i} out of range for {} parameters",
            theta.len()
        )));
    }
    if theta.iter().any(|t| !t.is_finite()) {
        return Err(SmomError::domain(
            "numeric_param_grad",
            "non-finite parameter",
        ));
    }
    let h = spec.step(theta[i]);
    let mut work = theta.to_vec();
    let mut eval = |delta: f64| -> Option<f64> {
        work[i] = theta[i] + delta;
        if admissible(&work) {
            Some(f(&work))
        } else {
            None
        }
    };
    let plus = eval(h);
    let minus = eval(-h);
    let (value, scheme) = match (plus, minus) {
        (Some(p), Some(m)) => ((p - m) / (2.0 * h), DiffScheme::Central),
        (Some(p), None) => {
            let p2 = eval(2.0 * h).ok_or_else(|| {
                SmomError::domain(
                    "numeric_param_grad",
                    "forward stencil leaves the parameter space",
                )
            })?;
            let f0 = f(theta);
            ((-3.0 * f0 + 4.0 * p - p2) / (2.0 * h), DiffScheme::Forward)
        }
        (None, Some(m)) => {
            let m2 = eval(-2.0 * h).ok_or_else(|| {
                SmomError::domain(
                    "numeric_param_grad",
                    "backward stencil leaves the parameter space",
                )
            })?;
            let f0 = f(theta);
            ((3.0 * f0 - 4.0 * m + m2) / (2.0 * h), DiffScheme::Backward)
        }
        (None, None) => {
            return Err(SmomError::domain(
                "numeric_param_grad",
                "both stencil sides leave the parameter space",
            ));
        }
    };
    if !value.is_finite() {
        return Err(SmomError::domain(
            "numeric_param_grad",
            "derivative is not finite",
        ));
    }
    Ok((value, scheme))
}

/// Numerical partial derivative with the default [`DiffSpec`].
pub fn numeric_param_grad<F, A>(f: F, theta: &[f64], i: usize, admissible: A) -> Result<f64>
where
    F: Fn(&[f64]) -> f64,
    A: Fn(&[f64]) -> bool,
{
    numeric_param_grad_with(&DiffSpec::default(), f, theta, i, admissible).map(|(v, _)| v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_anchors() {
        assert_eq!(ln_gamma(1.0).unwrap(), 0.0);
        assert_eq!(ln_gamma(2.0).unwrap(), 0.0);
        let half = 0.5 * std::f64::consts::PI.ln();
        assert!((ln_gamma(0.5).unwrap() - half).abs() < 1e-15);
        assert!(ln_gamma(0.0).is_err());
        assert!(ln_gamma(f64::NAN).is_err());
    }

    #[test]
    fn ln_gamma_factorials() {
        let mut fact = 1.0f64;
        for k in 1..30u32 {
            fact *= k as f64;
            let got = ln_gamma(k as f64 + 1.0).unwrap();
            assert!(
                (got - fact.ln()).abs() <= 1e-13 * fact.ln().abs().max(1.0),
                "k={k}"
            );
        }
    }

    #[test]
    fn digamma_anchors() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-15);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-14);
        let want = -EULER_GAMMA - 2.0 * std::f64::consts::LN_2;
        assert!((digamma(0.5).unwrap() - want).abs() < 1e-13);
    }

    #[test]
    fn trigamma_anchors() {
        let pi2 = std::f64::consts::PI.powi(2);
        assert!((trigamma(1.0).unwrap() - pi2 / 6.0).abs() < 1e-13);
        assert!((trigamma(2.0).unwrap() - (pi2 / 6.0 - 1.0)).abs() < 1e-13);
        assert!((trigamma(0.5).unwrap() - pi2 / 2.0).abs() < 1e-12);
    }

    #[test]
    fn incomplete_gamma_anchors() {
        for &x in &[0.1, 1.0, 3.0, 10.0] {
            assert!((reg_lower_gamma(1.0, x).unwrap() - (1.0 - (-x).exp())).abs() < 1e-14);
        }
        assert_eq!(reg_lower_gamma(3.0, 0.0).unwrap(), 0.0);
        assert!(reg_lower_gamma(-1.0, 1.0).is_err());
        assert!(reg_lower_gamma(1.0, -1.0).is_err());
    }

    #[test]
    fn incomplete_beta_anchors() {
        assert!((reg_incomplete_beta(1.0, 1.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
        assert_eq!(reg_incomplete_beta(2.0, 3.0, 0.0).unwrap(), 0.0);
        assert!((reg_incomplete_beta(2.0, 3.0, 0.5).unwrap() - 0.6875).abs() < 1e-14);
        assert!(reg_incomplete_beta(2.0, 3.0, 1.5).is_err());
    }

    #[test]
    fn normal_anchors() {
        assert_eq!(std_normal_cdf(0.0).unwrap(), 0.5);
        assert!((std_normal_pdf(0.0).unwrap() - 0.398_942_280_401_432_7).abs() < 1e-16);
        assert!((std_normal_cdf(1.959_964).unwrap() - 0.975).abs() < 1e-7);
        for &u in &[1e-10, 0.01, 0.3, 0.5, 0.77, 0.999] {
            let z = std_normal_quantile(u).unwrap();
            assert!((std_normal_cdf(z).unwrap() - u).abs() < 1e-14 * u.max(1e-3) * 1e3);
        }
    }

    #[test]
    fn finite_differences() {
        let any = |_: &[f64]| true;
        assert!((numeric_param_grad(|t| t[0], &[5.0, 1.0], 0, any).unwrap() - 1.0).abs() < 1e-9);
        assert!((numeric_param_grad(|t| t[0] * t[0], &[3.0], 0, any).unwrap() - 6.0).abs() < 1e-6);
        let positive = |t: &[f64]| t[0] > 0.0;
        let (v, scheme) =
            numeric_param_grad_with(&DiffSpec::default(), |t| t[0] * t[0], &[1e-9], 0, positive)
                .unwrap();
        assert_eq!(scheme, DiffScheme::Forward);
        assert!((v - 2e-9).abs() < 1e-8);
        let cdf_mu = |t: &[f64]| raw::norm_cdf((0.0 - t[0]) / t[1]);
        let d = numeric_param_grad(cdf_mu, &[0.0, 1.0], 0, any).unwrap();
        assert!((d + 0.398_942_28).abs() < 1e-6);
    }
}
