//! Cauchy distribution with Stein kernel `τ = (x − μ)² + γ²`.

use std::f64::consts::PI;
use std::sync::Arc;

use super::{invalid, open_unit};
use crate::error::Result;
use crate::rng::SmomRng;
use crate::steincore::SteinModel;

/// Cauchy family parameterised by location `μ` and scale `γ`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cauchy;

pub(crate) fn std_cdf(z: f64) -> f64 {
    if z < -1.0 {
        (1.0 / -z).atan() / PI
    } else if z > 1.0 {
        1.0 - (1.0 / z).atan() / PI
    } else {
        0.5 + z.atan() / PI
    }
}

fn log_pdf(mu: f64, gamma: f64, x: f64) -> f64 {
    let z = x - mu;
    gamma.ln() - PI.ln() - (gamma * gamma + z * z).ln()
}

fn quantile(mu: f64, gamma: f64, u: f64) -> f64 {
    mu + gamma * (PI * (u - 0.5)).tan()
}

fn sample(mu: f64, gamma: f64, n: usize, rng: &mut SmomRng) -> Vec<f64> {
    (0..n)
        .map(|_| quantile(mu, gamma, open_unit(rng)))
        .collect()
}

/// Cauchy structure: `A f = φ₁(−2x f′) + φ₂ f′ + x² f′` with
/// `φ = (μ, μ² + γ²)`.
fn cauchy_terms(x: f64, out: &mut [(f64, f64)]) {
    out[0] = (0.0, -2.0 * x);
    out[1] = (0.0, 1.0);
    out[2] = (0.0, x * x);
}

impl SteinModel for Cauchy {
    fn name(&self) -> String {
        "cauchy".into()
    }
    fn dim(&self) -> usize {
        2
    }
    fn param_names(&self) -> Vec<&'static str> {
        vec!["mu", "gamma"]
    }
    fn support(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == 2 && t[0].is_finite() && t[1] > 0.0 && t[1].is_finite()
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        log_pdf(t[0], t[1], x)
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        let z = x - t[0];
        -2.0 * z / (t[1] * t[1] + z * z)
    }
    fn tau(&self, t: &[f64], x: f64) -> f64 {
        let z = x - t[0];
        z * z + t[1] * t[1]
    }
    fn tau_dx(&self, t: &[f64], x: f64) -> f64 {
        2.0 * (x - t[0])
    }
    fn drift(&self, _t: &[f64], _x: f64) -> f64 {
        0.0
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        std_cdf((x - t[0]) / t[1])
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        std_cdf((t[0] - x) / t[1])
    }
    fn quantile(&self, t: &[f64], u: f64) -> Option<f64> {
        Some(quantile(t[0], t[1], u))
    }
    fn quantile_upper(&self, t: &[f64], s: f64) -> Option<f64> {
        Some(t[0] + t[1] / (PI * s).tan())
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        Ok(sample(t[0], t[1], n, rng))
    }
    fn to_g(&self, t: &[f64]) -> Vec<f64> {
        vec![t[0], t[0] * t[0] + t[1] * t[1]]
    }
    fn from_g(&self, phi: &[f64]) -> Option<Vec<f64>> {
        let g2 = phi[1] - phi[0] * phi[0];
        (g2 > 0.0).then(|| vec![phi[0], g2.sqrt()])
    }
    fn terms(&self, x: f64, out: &mut [(f64, f64)]) {
        cauchy_terms(x, out)
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let z = x - t[0];
        let d = t[1] * t[1] + z * z;
        vec![2.0 * z / d, 1.0 / t[1] - 2.0 * t[1] / d]
    }
    fn optimal_closed_form(&self, t: &[f64], i: usize, x: f64) -> Option<f64> {
        let z = x - t[0];
        let d = t[1] * t[1] + z * z;
        match i {
            0 => Some(-1.0 / d),
            1 => Some(-z / (t[1] * d)),
            _ => None,
        }
    }
}

/// Cauchy location family with known scale `γ`.
///
/// The operator is quadratic in `μ`, so the structure keeps the pair
/// `(μ, μ² + γ²)` as two free components and reports `μ` only.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CauchyKnownGamma {
    gamma: f64,
}

impl CauchyKnownGamma {
    /// Model with fixed scale `γ > 0`.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(invalid(format!(
                "known scale must be positive, got {gamma}"
            )));
        }
        Ok(Self { gamma })
    }

    /// The known scale.
    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

impl SteinModel for CauchyKnownGamma {
    fn name(&self) -> String {
        format!("cauchy_known_gamma({})", self.gamma)
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
        t.len() == 1 && t[0].is_finite()
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        log_pdf(t[0], self.gamma, x)
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        let z = x - t[0];
        -2.0 * z / (self.gamma * self.gamma + z * z)
    }
    fn tau(&self, t: &[f64], x: f64) -> f64 {
        let z = x - t[0];
        z * z + self.gamma * self.gamma
    }
    fn tau_dx(&self, t: &[f64], x: f64) -> f64 {
        2.0 * (x - t[0])
    }
    fn drift(&self, _t: &[f64], _x: f64) -> f64 {
        0.0
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        std_cdf((x - t[0]) / self.gamma)
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        std_cdf((t[0] - x) / self.gamma)
    }
    fn quantile(&self, t: &[f64], u: f64) -> Option<f64> {
        Some(quantile(t[0], self.gamma, u))
    }
    fn quantile_upper(&self, t: &[f64], s: f64) -> Option<f64> {
        Some(t[0] + self.gamma / (PI * s).tan())
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        Ok(sample(t[0], self.gamma, n, rng))
    }
    fn g_dim(&self) -> usize {
        2
    }
    fn to_g(&self, t: &[f64]) -> Vec<f64> {
        vec![t[0], t[0] * t[0] + self.gamma * self.gamma]
    }
    fn from_g(&self, phi: &[f64]) -> Option<Vec<f64>> {
        phi[0].is_finite().then(|| vec![phi[0]])
    }
    fn terms(&self, x: f64, out: &mut [(f64, f64)]) {
        cauchy_terms(x, out)
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let z = x - t[0];
        vec![2.0 * z / (self.gamma * self.gamma + z * z)]
    }
    fn optimal_parent(&self, t: &[f64]) -> Option<(Arc<dyn SteinModel>, Vec<f64>)> {
        Some((Arc::new(Cauchy), vec![t[0], self.gamma]))
    }
}
