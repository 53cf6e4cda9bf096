//! Exponential polynomial models `p(x) ∝ exp(θ₁x + … + θ_p x^p)` on
//! `(0, ∞)` with an intractable normalising constant and `τ = 1`.

use rand::Rng;

use super::invalid;
use crate::error::Result;
use crate::numeric::KahanSum;
use crate::quadrature::{gk15, integrate, QuadConfig};
use crate::rng::SmomRng;
use crate::steincore::SteinModel;

/// Exponential polynomial family of degree `p`; the leading coefficient
/// must be negative.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExpPoly {
    p: usize,
}

const QUAD: QuadConfig = QuadConfig {
    abs_tol: 1e-15,
    rel_tol: 1e-13,
    max_subdivisions: 4000,
};

impl ExpPoly {
    /// Model of degree `p ≥ 1`.
    pub fn new(p: usize) -> Result<Self> {
        if p == 0 || p > 8 {
            return Err(invalid(format!(
                "exponential polynomial degree must be in 1..=8, got {p}"
            )));
        }
        Ok(Self { p })
    }

    /// Polynomial degree.
    pub fn degree(&self) -> usize {
        self.p
    }

    /// Exponent `h(x) = Σ θ_j x^j`.
    pub fn exponent(theta: &[f64], x: f64) -> f64 {
        theta.iter().rev().fold(0.0, |acc, c| acc * x + c) * x
    }

    /// Derivative `h′(x) = Σ j θ_j x^{j−1}`.
    pub fn exponent_dx(theta: &[f64], x: f64) -> f64 {
        theta
            .iter()
            .enumerate()
            .rev()
            .fold(0.0, |acc, (j, c)| acc * x + (j as f64 + 1.0) * c)
    }

    /// Bound beyond which `h′` and `h″` share the sign of the leading term.
    fn tail_start(theta: &[f64]) -> f64 {
        let p = theta.len();
        let lead = p as f64 * theta[p - 1];
        let b1 = 1.0
            + (0..p - 1)
                .map(|j| ((j + 1) as f64 * theta[j] / lead).abs())
                .fold(0.0, f64::max);
        let b2 = if p >= 2 {
            let lead2 = (p * (p - 1)) as f64 * theta[p - 1];
            1.0 + (1..p - 1)
                .map(|j| (((j + 1) * j) as f64 * theta[j] / lead2).abs())
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        b1.max(b2)
    }

    /// Location and value of the maximum of `h` on `[0, ∞)`.
    pub fn mode(theta: &[f64]) -> (f64, f64) {
        let t = Self::tail_start(theta);
        let grid = 2000;
        let mut best = (0.0, Self::exponent(theta, 0.0));
        for k in 1..=grid {
            let x = t * k as f64 / grid as f64;
            let h = Self::exponent(theta, x);
            if h > best.1 {
                best = (x, h);
            }
        }
        let step = t / grid as f64;
        let (mut lo, mut hi) = ((best.0 - step).max(0.0), best.0 + step);
        let g = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..80 {
            let x1 = hi - g * (hi - lo);
            let x2 = lo + g * (hi - lo);
            if Self::exponent(theta, x1) < Self::exponent(theta, x2) {
                lo = x1;
            } else {
                hi = x2;
            }
        }
        let x = 0.5 * (lo + hi);
        let h = Self::exponent(theta, x);
        if h > best.1 {
            (x, h)
        } else {
            best
        }
    }

    /// Log normalising constant `log ∫₀^∞ exp(h(x)) dx`.
    pub fn log_normaliser(theta: &[f64]) -> f64 {
        let (xm, hm) = Self::mode(theta);
        let f = |x: f64| (Self::exponent(theta, x) - hm).exp();
        let left = integrate(f, 0.0, xm, QUAD).unwrap_or(f64::NAN);
        let right = integrate(f, xm, f64::INFINITY, QUAD).unwrap_or(f64::NAN);
        hm + (left + right).ln()
    }

    /// Raw moments `E[X^j]` for `j = 1..=k`.
    pub fn moments(theta: &[f64], k: usize) -> Vec<f64> {
        let (xm, hm) = Self::mode(theta);
        let dens = |x: f64| (Self::exponent(theta, x) - hm).exp();
        let int = |g: &dyn Fn(f64) -> f64| {
            integrate(g, 0.0, xm, QUAD).unwrap_or(f64::NAN)
                + integrate(g, xm, f64::INFINITY, QUAD).unwrap_or(f64::NAN)
        };
        let c = int(&dens);
        (1..=k)
            .map(|j| int(&|x: f64| x.powi(j as i32) * dens(x)) / c)
            .collect()
    }

    fn cumulative(theta: &[f64], xs: &[f64]) -> Vec<(f64, f64)> {
        let (xm, hm) = Self::mode(theta);
        let f = |x: f64| (Self::exponent(theta, x) - hm).exp();
        let mut order: Vec<usize> = (0..xs.len()).collect();
        order.sort_by(|&i, &j| xs[i].total_cmp(&xs[j]));
        let width = (Self::tail_start(theta) / 64.0).max(1e-3);
        let mut upper = Self::tail_start(theta).max(xm);
        while Self::exponent(theta, upper) - hm > -745.0 {
            upper *= 2.0;
        }
        let mut segments = Vec::with_capacity(xs.len());
        let mut prev = 0.0;
        for &i in &order {
            let x = xs[i].clamp(0.0, upper);
            segments.push(segment_integral(&f, prev, x, width));
            prev = x;
        }
        let last = prev;
        let tail = integrate(f, last.max(xm), f64::INFINITY, QUAD).unwrap_or(f64::NAN)
            + if last < xm {
                segment_integral(&f, last, xm, width)
            } else {
                0.0
            };
        let mut left = vec![0.0; xs.len()];
        let mut acc = KahanSum::new();
        for (k, &i) in order.iter().enumerate() {
            acc.add(segments[k]);
            left[i] = acc.total();
        }
        let mut right = vec![0.0; xs.len()];
        let mut acc = KahanSum::new();
        acc.add(tail);
        for k in (0..order.len()).rev() {
            right[order[k]] = acc.total();
            acc.add(segments[k]);
        }
        let total = acc.total();
        left.iter()
            .zip(&right)
            .map(|(l, r)| ((l / total).clamp(0.0, 1.0), (r / total).clamp(0.0, 1.0)))
            .collect()
    }
}

fn segment_integral(f: &dyn Fn(f64) -> f64, a: f64, b: f64, width: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let pieces = ((b - a) / width).ceil().max(1.0) as usize;
    let h = (b - a) / pieces as f64;
    let mut acc = KahanSum::new();
    for k in 0..pieces {
        let lo = a + h * k as f64;
        let hi = if k + 1 == pieces { b } else { lo + h };
        acc.add(gk15(f, lo, hi).0);
    }
    acc.total()
}

impl SteinModel for ExpPoly {
    fn name(&self) -> String {
        format!("exp_poly({})", self.p)
    }
    fn dim(&self) -> usize {
        self.p
    }
    fn param_names(&self) -> Vec<&'static str> {
        const NAMES: [&str; 8] = [
            "theta1", "theta2", "theta3", "theta4", "theta5", "theta6", "theta7", "theta8",
        ];
        NAMES[..self.p].to_vec()
    }
    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }
    fn in_param_space(&self, t: &[f64]) -> bool {
        t.len() == self.p && t.iter().all(|v| v.is_finite()) && t[self.p - 1] < 0.0
    }
    fn log_pdf(&self, t: &[f64], x: f64) -> f64 {
        Self::exponent(t, x) - Self::log_normaliser(t)
    }
    fn log_likelihood(&self, t: &[f64], xs: &[f64]) -> f64 {
        let s: f64 = xs.iter().map(|&x| Self::exponent(t, x)).sum();
        s - xs.len() as f64 * Self::log_normaliser(t)
    }
    fn dlog_pdf(&self, t: &[f64], x: f64) -> f64 {
        Self::exponent_dx(t, x)
    }
    fn tau(&self, _t: &[f64], _x: f64) -> f64 {
        1.0
    }
    fn tau_dx(&self, _t: &[f64], _x: f64) -> f64 {
        0.0
    }
    fn drift(&self, t: &[f64], x: f64) -> f64 {
        Self::exponent_dx(t, x)
    }
    fn cdf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            Self::cumulative(t, &[x])[0].0
        }
    }
    fn sf(&self, t: &[f64], x: f64) -> f64 {
        if x <= 0.0 {
            1.0
        } else {
            Self::cumulative(t, &[x])[0].1
        }
    }
    fn cdf_sf_batch(&self, t: &[f64], xs: &[f64]) -> Vec<(f64, f64)> {
        Self::cumulative(t, xs)
    }
    fn mean(&self, t: &[f64]) -> Option<f64> {
        Some(Self::moments(t, 1)[0])
    }
    fn sample(&self, t: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>> {
        self.check_theta(t)?;
        let (_, hm) = Self::mode(t);
        let hm = hm + 1e-9;
        let mut cut = Self::tail_start(t);
        while Self::exponent_dx(t, cut) > -1e-3 {
            cut *= 1.5;
        }
        let slope = Self::exponent_dx(t, cut);
        let hc = Self::exponent(t, cut);
        let box_mass = cut;
        let tail_mass = (hc - hm).exp() / -slope;
        let p_box = box_mass / (box_mass + tail_mass);
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let pick: f64 = rng.random();
            let v: f64 = rng.random();
            if pick < p_box {
                let x = cut * rng.random::<f64>();
                if x > 0.0 && v.ln() <= Self::exponent(t, x) - hm {
                    out.push(x);
                }
            } else {
                let e = -(1.0 - rng.random::<f64>()).ln();
                let x = cut + e / -slope;
                let env = hc + slope * (x - cut);
                if v.ln() <= Self::exponent(t, x) - env {
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
        let mut pw = 1.0;
        for (j, slot) in out.iter_mut().take(self.p).enumerate() {
            *slot = ((j + 1) as f64 * pw, 0.0);
            pw *= x;
        }
        out[self.p] = (0.0, 1.0);
    }
    fn score(&self, t: &[f64], x: f64) -> Vec<f64> {
        let m = Self::moments(t, self.p);
        (0..self.p).map(|j| x.powi(j as i32 + 1) - m[j]).collect()
    }
    fn score_batch(&self, t: &[f64], xs: &[f64]) -> Vec<Vec<f64>> {
        let m = Self::moments(t, self.p);
        xs.iter()
            .map(|&x| (0..self.p).map(|j| x.powi(j as i32 + 1) - m[j]).collect())
            .collect()
    }
}
