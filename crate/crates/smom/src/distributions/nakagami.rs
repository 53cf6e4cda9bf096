//! Nakagami distribution with shape `m` and spread `Ω`, Stein kernel
//! `τ = Ωx`.

use rand_distr::{Distribution, Gamma};

use super::invalid;
use crate::error::Result;
use crate::rng::SmomRng;
use crate::specfun::raw;
use crate::steincore::SteinModel;

/// Nakagami family with density
/// `2m^m/(Γ(m)Ω^m) x^{2m−1} e^{−m x²/Ω}` on `(0, ∞)`.
///
/// The linear structure is that of `A f / Ω` in `φ = (m, m/Ω)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Nakagami;

impl SteinModel for Nakagami {
    fn name(&self) -> String {
        "nakagami".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["m", "omega"]
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        let (m, o) = (t[0], t[1]);
        std::f64::consts::LN_2 + m * m.ln() - raw::ln_gamma(m) - m * o.ln()
            + (2.0 * m - 1.0) * x.ln()
            - m * x * x / o
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        (2.0 * t[0] - 1.0) / x - 2.0 * t[0] * x / t[1]
    }
    fn tau(&self, t: &[f64], x: f64) -> f64 {
        t[1] * x
    }
    fn tau_dx(&self, t: &[f64], _x: f64) -> f64 {
        t[1]
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        2.0 * t[0] * (t[1] - x * x)
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            raw::gamma_p(t[0], t[0] * x * x / t[1])
        }
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            raw::gamma_q(t[0], t[0] * x * x / t[1])
        }
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        let (m, o) = (t[0], t[1]);
        Some((raw::ln_gamma(m + 0.5) - raw::ln_gamma(m)).exp() * (o / m).sqrt())
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let d = Gamma::new(t[0], t[1] / t[0]).map_err(|e| invalid(e.to_string()))?;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let g: f64 = d.sample(rng);
            if g > 0.0 {
                out.push(g.sqrt());
            }
        }
        Ok(out)
    }
    fn to_g(&self, t: &[f64]) -> Vec<f64> {
        vec![t[0], t[0] / t[1]]
    }
    fn from_g(&self, phi: &[f64]) -> Option<Vec<f64>> {
        (phi[1] != 0.0).then(|| vec![phi[0], phi[0] / phi[1]])
    }
    fn terms(&self, x: f64, out: &mut [(f64, f64)]) {
        out[0] = (2.0, 0.0);
        out[1] = (-2.0 * x * x, 0.0);
        out[2] = (0.0, x);
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let (m, o) = (t[0], t[1]);
        vec![
            m.ln() + 1.0 - raw::digamma(m) - o.ln() + 2.0 * x.ln() - x * x / o,
            -m / o + m * x * x / (o * o),
        ]
    }
    fn optimal_closed_form(&self, t: &[f64], i: usize, _x: f64) -> Option<f64> {
        (i == 1).then(|| -0.5 / (t[1] * t[1]))
    }
}
