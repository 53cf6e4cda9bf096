//! Inverse-gamma distribution truncated to `(a, ∞)`, Stein kernel `τ = x²`.

use super::{invalid, open_unit};
use crate::error::Result;
use crate::numeric::safeguarded_newton;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Truncated inverse-gamma family with shape `α` and scale `β`, density
/// `∝ x^{−α−1} e^{−β/x}` on `(a, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncInvGamma {
    a: f64,
}

impl TruncInvGamma {
    /// Model truncated below at `a > 0`.
    pub fn new(a: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(invalid(format!(
                "truncation point must be positive, got {a}"
            )));
        }
        Ok(Self { a })
    }

    /// Truncation point.
    pub fn lower(&self) -> f64 {
        self.a
    }

    fn log_mass(&self, t: &[f64]) -> f64 {
        raw::gamma_p(t[0], t[1] / self.a).ln()
    }

    fn inverse_lower_gamma(alpha: f64, target: f64, hi: f64) -> f64 {
        let f = |y: f64| {
            let v = raw::gamma_p(alpha, y) - target;
            let d = ((alpha - 1.0) * y.ln() - y - raw::ln_gamma(alpha)).exp();
            (v, d)
        };
        safeguarded_newton(f, 0.0, hi, 1e-14, 200).unwrap_or(f64::NAN)
    }
}

impl SteinModel for TruncInvGamma {
    fn name(&self) -> String {
        format!("trunc_inv_gamma({})", self.a)
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["alpha", "beta"]
    }
    fn support(&self) -> (f64, f64) {
        (self.a, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        let (al, be) = (t[0], t[1]);
        al * be.ln() - raw::ln_gamma(al) - self.log_mass(t) - (al + 1.0) * x.ln() - be / x
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        -(t[0] + 1.0) / x + t[1] / (x * x)
    }
    fn tau(&self, _t: &[f64], x: f64) -> f64 {
        x * x
    }
    fn tau_dx(&self, _t: &[f64], x: f64) -> f64 {
        2.0 * x
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        x - t[0] * x + t[1]
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        1.0 - self.sf(t, x)
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        if x <= self.a {
            return 1.0;
        }
        (raw::gamma_p(t[0], t[1] / x) / raw::gamma_p(t[0], t[1] / self.a)).clamp(0.0, 1.0)
    }
    fn cdf_sf_batch(&self, t: &[f64], xs: &[f64]) -> Vec<(f64, f64)> {
        let total = raw::gamma_p(t[0], t[1] / self.a);
        let upper = raw::gamma_q(t[0], t[1] / self.a);
        xs.iter()
            .map(|&x| {
                if x <= self.a {
                    return (0.0, 1.0);
                }
                let y = t[1] / x;
                let sf = raw::gamma_p(t[0], y) / total;
                let cdf = if sf > 0.5 {
                    (raw::gamma_q(t[0], y) - upper) / total
                } else {
                    1.0 - sf
                };
                (cdf.clamp(0.0, 1.0), sf.clamp(0.0, 1.0))
            })
            .collect()
    }
    fn quantile(&self, t: &[f64], u: f64) -> Option<f64> {
        let ymax = t[1] / self.a;
        let target = (1.0 - u) * raw::gamma_p(t[0], ymax);
        let y = Self::inverse_lower_gamma(t[0], target, ymax);
        (y > 0.0).then(|| (t[1] / y).max(self.a))
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            if let Some(x) = self.quantile(t, open_unit(rng)) {
                if x > self.a && x.is_finite() {
                    out.push(x);
                }
            }
        }
        Ok(out)
    }
    fn to_g(&self, t: &[f64]) -> Vec<f64> {
        t.to_vec()
    }
    fn from_g(&self, phi: &[f64]) -> Option<Vec<f64>> {
        Some(phi.to_vec())
    }
    fn terms(&self, x: f64, out: &mut [(f64, f64)]) {
        out[0] = (-x, 0.0);
        out[1] = (1.0, 0.0);
        out[2] = (x, x * x);
    }
}
