//! Generalised logistic (type IV) distribution with Stein kernel
//! `τ = 1 + eˣ`.

use rand_distr::{Distribution, Gamma};

use super::invalid;
use crate::error::Result;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Generalised logistic family with density
/// `e^{−βx} / (B(α, β)(1 + e^{−x})^{α+β})`; the logit of a `Beta(α, β)`
/// variable.
#[derive(Debug, Clone, Copy, Default)]
pub struct GenLogistic;

/// `ln(1 + eˣ)` without overflow.
pub(crate) fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function `1/(1 + e^{−x})`.
pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

impl SteinModel for GenLogistic {
    fn name(&self) -> String {
        "gen_logistic".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["alpha", "beta"]
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        -raw::ln_beta(t[0], t[1]) - t[1] * x - (t[0] + t[1]) * softplus(-x)
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        -t[1] + (t[0] + t[1]) * sigmoid(-x)
    }
    fn tau(&self, _t: &[f64], x: f64) -> f64 {
        1.0 + x.exp()
    }
    fn tau_dx(&self, _t: &[f64], x: f64) -> f64 {
        x.exp()
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        t[0] - x.exp() * (t[1] - 1.0)
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        raw::beta_inc(t[0], t[1], sigmoid(x))
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        raw::beta_inc(t[1], t[0], sigmoid(-x))
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        Some(raw::digamma(t[0]) - raw::digamma(t[1]))
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let ga = Gamma::new(t[0], 1.0).map_err(|e| invalid(e.to_string()))?;
        let gb = Gamma::new(t[1], 1.0).map_err(|e| invalid(e.to_string()))?;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u: f64 = ga.sample(rng);
            let v: f64 = gb.sample(rng);
            let x = u.ln() - v.ln();
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
        let e = x.exp();
        out[0] = (1.0, 0.0);
        out[1] = (-e, 0.0);
        out[2] = (e, 1.0 + e);
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let s = raw::digamma(t[0] + t[1]);
        let sp = softplus(-x);
        vec![s - raw::digamma(t[0]) - sp, s - raw::digamma(t[1]) - x - sp]
    }
}
