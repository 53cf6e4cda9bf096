//! Gamma distribution with shape `α` and rate `β`, Stein kernel `τ = x`.

use rand_distr::{Distribution, Gamma};

use super::invalid;
use crate::error::Result;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Gamma family parameterised by `(α, β)` with density `∝ x^{α−1} e^{−βx}`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GammaModel;

impl SteinModel for GammaModel {
    fn name(&self) -> String {
        "gamma".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["alpha", "beta"]
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        t[0] * t[1].ln() - raw::ln_gamma(t[0]) + (t[0] - 1.0) * x.ln() - t[1] * x
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        (t[0] - 1.0) / x - t[1]
    }
    fn tau(&self, _t: &[f64], x: f64) -> f64 {
        x
    }
    fn tau_dx(&self, _t: &[f64], _x: f64) -> f64 {
        1.0
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        t[0] - t[1] * x
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            raw::gamma_p(t[0], t[1] * x)
        }
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            raw::gamma_q(t[0], t[1] * x)
        }
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        Some(t[0] / t[1])
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let d = Gamma::new(t[0], 1.0 / t[1]).map_err(|e| invalid(e.to_string()))?;
        Ok((0..n).map(|_| d.sample(rng)).collect())
    }
    fn to_g(&self, t: &[f64]) -> Vec<f64> {
        t.to_vec()
    }
    fn from_g(&self, phi: &[f64]) -> Option<Vec<f64>> {
        Some(phi.to_vec())
    }
    fn terms(&self, x: f64, out: &mut [(f64, f64)]) {
        out[0] = (1.0, 0.0);
        out[1] = (-x, 0.0);
        out[2] = (0.0, x);
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        vec![t[1].ln() - raw::digamma(t[0]) + x.ln(), t[0] / t[1] - x]
    }
    fn optimal_closed_form(&self, t: &[f64], i: usize, _x: f64) -> Option<f64> {
        (i == 1).then(|| 1.0 / t[1])
    }
}
