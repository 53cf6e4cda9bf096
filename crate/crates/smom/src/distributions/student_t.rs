//! Student's t distribution with `μ` degrees of freedom and Stein kernel
//! `τ = x² + μ`.

use rand_distr::{Distribution, Gamma, StandardNormal};

use super::invalid;
use crate::error::Result;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Central Student's t family with degrees of freedom `μ > 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct StudentT;

fn lower_tail(nu: f64, x: f64) -> f64 {
    let w = nu / (nu + x * x);
    let tail = 0.5 * raw::beta_inc(0.5 * nu, 0.5, w);
    if x <= 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

impl SteinModel for StudentT {
    fn name(&self) -> String {
        "student_t".into()
    }
    fn dim(&self) -> usize {
        1
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["mu"]
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 1 && t[0] > 0.0 && t[0].is_finite()
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        let nu = t[0];
        -0.5 * nu.ln() - raw::ln_beta(0.5 * nu, 0.5) - 0.5 * (nu + 1.0) * (x * x / nu).ln_1p()
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        -(t[0] + 1.0) * x / (t[0] + x * x)
    }
    fn tau(&self, t: &[f64], x: f64) -> f64 {
        x * x + t[0]
    }
    fn tau_dx(&self, _t: &[f64], x: f64) -> f64 {
        2.0 * x
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        -(t[0] - 1.0) * x
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        lower_tail(t[0], x)
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        lower_tail(t[0], -x)
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        (t[0] > 1.0).then_some(0.0)
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let chi = Gamma::new(0.5 * t[0], 2.0).map_err(|e| invalid(e.to_string()))?;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let z: f64 = StandardNormal.sample(rng);
            let c: f64 = chi.sample(rng);
            let x = z / (c / t[0]).sqrt();
            if x.is_finite() {
                out.push(x);
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
        out[0] = (-x, 1.0);
        out[1] = (x, x * x);
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let nu = t[0];
        let s = nu + x * x;
        vec![
            -0.5 / nu
                - 0.5 * (raw::digamma(0.5 * nu) - raw::digamma(0.5 * nu + 0.5))
                - 0.5 * (x * x / nu).ln_1p()
                + 0.5 * (nu + 1.0) * (1.0 / nu - 1.0 / s),
        ]
    }
}
