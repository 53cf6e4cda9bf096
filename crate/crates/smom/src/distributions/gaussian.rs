//! Normal distribution `N(μ, σ²)` with Stein kernel `τ = σ²`.

use rand_distr::{Distribution, Normal};

use super::invalid;
use crate::error::Result;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Normal family parameterised by `(μ, σ²)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Gaussian;

impl SteinModel for Gaussian {
    fn name(&self) -> String {
        "gaussian".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["mu", "sigma2"]
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t[0].is_finite() && t[1] > 0.0 && t[1].is_finite()
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        let z = x - t[0];
        -0.5 * (2.0 * std::f64::consts::PI * t[1]).ln() - z * z / (2.0 * t[1])
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        -(x - t[0]) / t[1]
    }
    fn tau(&self, t: &[f64], _x: f64) -> f64 {
        t[1]
    }
    fn tau_dx(&self, _t: &[f64], _x: f64) -> f64 {
        0.0
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        t[0] - x
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        raw::norm_cdf((x - t[0]) / t[1].sqrt())
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        raw::norm_sf((x - t[0]) / t[1].sqrt())
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        Some(t[0])
    }
    fn quantile(&self, t: &[f64], u: f64) -> Option<f64> {
        Some(t[0] + t[1].sqrt() * raw::norm_quantile(u))
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let d = Normal::new(t[0], t[1].sqrt()).map_err(|e| invalid(e.to_string()))?;
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
        out[1] = (0.0, 1.0);
        out[2] = (-x, 0.0);
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let z = x - t[0];
        vec![z / t[1], -0.5 / t[1] + z * z / (2.0 * t[1] * t[1])]
    }
}
