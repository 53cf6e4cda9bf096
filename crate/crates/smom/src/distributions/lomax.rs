//! Lomax (Pareto type II) distribution with Stein kernel `τ = x + λ`.

use super::open_unit;
use crate::error::Result;
use crate::rng::SmomRng;
use crate::steincore::SteinModel;

/// Lomax family with shape `α` and scale `λ`, density
/// `(α/λ)(1 + x/λ)^{−(α+1)}` on `(0, ∞)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Lomax;

impl SteinModel for Lomax {
    fn name(&self) -> String {
        "lomax".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["alpha", "lambda"]
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t.iter().all(|v| *v > 0.0 && v.is_finite())
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        t[0].ln() - t[1].ln() - (t[0] + 1.0) * (x / t[1]).ln_1p()
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        -(t[0] + 1.0) / (t[1] + x)
    }
    fn tau(&self, t: &[f64], x: f64) -> f64 {
        x + t[1]
    }
    fn tau_dx(&self, _t: &[f64], _x: f64) -> f64 {
        1.0
    }
    fn drift(&self, t: &[f64], _x: f64) -> f64 {
        -t[0]
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            -(-t[0] * (x / t[1]).ln_1p()).exp_m1()
        }
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            (-t[0] * (x / t[1]).ln_1p()).exp()
        }
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        (t[0] > 1.0).then(|| t[1] / (t[0] - 1.0))
    }
    fn quantile(&self, t: &[f64], u: f64) -> Option<f64> {
        Some(t[1] * (-(-u).ln_1p() / t[0]).exp_m1())
    }
    fn quantile_upper(&self, t: &[f64], s: f64) -> Option<f64> {
        Some(t[1] * (-s.ln() / t[0]).exp_m1())
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let x = t[1] * (-(-open_unit(rng)).ln_1p() / t[0]).exp_m1();
            if x > 0.0 && x.is_finite() {
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
        out[0] = (-1.0, 0.0);
        out[1] = (0.0, 1.0);
        out[2] = (0.0, x);
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let (a, l) = (t[0], t[1]);
        vec![
            1.0 / a - (x / l).ln_1p(),
            -1.0 / l + (a + 1.0) * x / (l * (l + x)),
        ]
    }
    fn optimal_closed_form(&self, t: &[f64], i: usize, x: f64) -> Option<f64> {
        let (a, l) = (t[0], t[1]);
        match i {
            0 => Some((x / l).ln_1p() / a),
            1 => Some(-x / (l * (l + x))),
            _ => None,
        }
    }
}
