//! Beta distribution on `(0, 1)` with Stein kernel `τ = x(1 − x)`.

use rand_distr::{Distribution, Gamma};

use super::invalid;
use crate::error::Result;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Beta family parameterised by `(α, β)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct BetaModel;

impl SteinModel for BetaModel {
    fn name(&self) -> String {
        "beta".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["alpha", "beta"]
    }
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        (t[0] - 1.0) * x.ln() + (t[1] - 1.0) * (-x).ln_1p() - raw::ln_beta(t[0], t[1])
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        (t[0] - 1.0) / x - (t[1] - 1.0) / (1.0 - x)
    }
    fn tau(&self, _t: &[f64], x: f64) -> f64 {
        x * (1.0 - x)
    }
    fn tau_dx(&self, _t: &[f64], x: f64) -> f64 {
        1.0 - 2.0 * x
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        t[0] - (t[0] + t[1]) * x
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= 1.0 {
            1.0
        } else {
            raw::beta_inc(t[0], t[1], x)
        }
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else if x >= 1.0 {
            0.0
        } else {
            raw::beta_inc(t[1], t[0], 1.0 - x)
        }
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        Some(t[0] / (t[0] + t[1]))
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let ga = Gamma::new(t[0], 1.0).map_err(|e| invalid(e.to_string()))?;
        let gb = Gamma::new(t[1], 1.0).map_err(|e| invalid(e.to_string()))?;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let u: f64 = ga.sample(rng);
            let v: f64 = gb.sample(rng);
            let x = u / (u + v);
            if x > 0.0 && x < 1.0 {
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
        out[0] = (1.0 - x, 0.0);
        out[1] = (-x, 0.0);
        out[2] = (0.0, x * (1.0 - x));
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let s = raw::digamma(t[0] + t[1]);
        vec![
            x.ln() + s - raw::digamma(t[0]),
            (-x).ln_1p() + s - raw::digamma(t[1]),
        ]
    }
}
