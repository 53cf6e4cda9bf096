//! Normal distribution truncated to a bounded interval `(a, b)`.

use super::{invalid, open_unit};
use crate::error::Result;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Truncated normal family parameterised by `(μ, σ)` of the parent normal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncNormal {
    a: f64,
    b: f64,
}

impl TruncNormal {
    /// Model truncated to `(a, b)`; bounds must be finite and ordered.
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(invalid(format!(
                "truncation bounds ({a}, {b}) must be finite and ordered"
            )));
        }
        Ok(Self { a, b })
    }

    /// Truncation bounds.
    pub fn bounds(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn standardised(&self, t: &[f64]) -> (f64, f64) {
        ((self.a - t[0]) / t[1], (self.b - t[0]) / t[1])
    }

    /// Probability mass `Φ(β) − Φ(α)` of the truncation window.
    pub fn mass(&self, t: &[f64]) -> f64 {
        let (al, be) = self.standardised(t);
        window_mass(al, be)
    }
}

pub(crate) fn window_mass(al: f64, be: f64) -> f64 {
    if al > 0.0 {
        raw::norm_sf(al) - raw::norm_sf(be)
    } else if be < 0.0 {
        raw::norm_cdf(be) - raw::norm_cdf(al)
    } else {
        1.0 - raw::norm_cdf(al) - raw::norm_sf(be)
    }
}

impl SteinModel for TruncNormal {
    fn name(&self) -> String {
        format!("trunc_normal({},{})", self.a, self.b)
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["mu", "sigma"]
    }
    fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t[0].is_finite() && t[1] > 0.0 && t[1].is_finite()
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        let z = (x - t[0]) / t[1];
        -0.5 * z * z - 0.5 * (2.0 * std::f64::consts::PI).ln() - t[1].ln() - self.mass(t).ln()
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        -(x - t[0]) / (t[1] * t[1])
    }
    fn tau(&self, t: &[f64], _x: f64) -> f64 {
        t[1] * t[1]
    }
    fn tau_dx(&self, _t: &[f64], _x: f64) -> f64 {
        0.0
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        t[0] - x
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        if x <= self.a {
            return 0.0;
        }
        if x >= self.b {
            return 1.0;
        }
        let (al, _) = self.standardised(t);
        let z = (x - t[0]) / t[1];
        (window_mass(al, z) / self.mass(t)).clamp(0.0, 1.0)
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        if x <= self.a {
            return 1.0;
        }
        if x >= self.b {
            return 0.0;
        }
        let (_, be) = self.standardised(t);
        let z = (x - t[0]) / t[1];
        (window_mass(z, be) / self.mass(t)).clamp(0.0, 1.0)
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        Some(
            super::facts::trunc_normal_moments(t, self.a, self.b)
                .ok()?
                .0,
        )
    }
    fn quantile(&self, t: &[f64], u: f64) -> Option<f64> {
        let (al, be) = self.standardised(t);
        let z_mass = window_mass(al, be);
        let z = if al > 0.0 {
            -raw::norm_quantile(raw::norm_sf(al) - u * z_mass)
        } else {
            raw::norm_quantile(raw::norm_cdf(al) + u * z_mass)
        };
        let x = t[0] + t[1] * z;
        Some(x.clamp(self.a, self.b))
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u = open_unit(rng);
            let x = self.quantile(t, u).unwrap_or(f64::NAN);
            if x > self.a && x < self.b {
                out.push(x);
            }
        }
        Ok(out)
    }
    fn to_g(&self, t: &[f64]) -> Vec<f64> {
        vec![t[0], t[1] * t[1]]
    }
    fn from_g(&self, phi: &[f64]) -> Option<Vec<f64>> {
        (phi[1] > 0.0).then(|| vec![phi[0], phi[1].sqrt()])
    }
    fn terms(&self, x: f64, out: &mut [(f64, f64)]) {
        out[0] = (1.0, 0.0);
        out[1] = (0.0, 1.0);
        out[2] = (-x, 0.0);
    }
}
