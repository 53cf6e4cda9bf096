//! Optimal test functions and the estimators built from them.
//!
//! The optimal test function for component `i` solves `A_θ f = ∂θᵢ log p_θ`
//! and is `f_i = ∂θᵢ P_θ / (τ_θ p_θ)` with the integration constant fixed
//! at zero. Plugging a consistent first-step estimate into these functions
//! and solving the empirical Stein identity gives an asymptotically
//! efficient two-step estimator; repeating the step converges to the
//! maximum likelihood estimator.

use serde::{Deserialize, Serialize};

use crate::distributions::Cauchy;
use crate::error::{Result, SmomError};
use crate::linalg;
use crate::numeric::sorted;
use crate::specfun::DiffSpec;
use crate::steincore::{
    build_system_from_values, solve_stein, EstimateResult, Status, SteinModel, TestFunctionSet,
};

/// How optimal functions are evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimalMode {
    /// Numerical parameter derivative of the distribution function.
    #[default]
    NumericCdfGrad,
    /// Catalogued closed forms, falling back to the numerical mode for
    /// components without one.
    ClosedForm,
}

/// The optimal test functions of a model, frozen at a parameter value.
#[derive(Debug, Clone)]
pub struct OptimalFunctionSet<'a> {
    model: &'a dyn SteinModel,
    theta: Vec<f64>,
    mode: OptimalMode,
}

impl<'a> OptimalFunctionSet<'a> {
    /// Optimal functions of `model` at `theta`.
    pub fn new(model: &'a dyn SteinModel, theta: &[f64], mode: OptimalMode) -> Result<Self> {
        model.check_theta(theta)?;
        Ok(Self {
            model,
            theta: theta.to_vec(),
            mode,
        })
    }

    /// The frozen parameter.
    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    /// Evaluation mode.
    pub fn mode(&self) -> OptimalMode {
        self.mode
    }

    /// Values of component `i` at all points, `0` where `τ` vanishes.
    fn values(&self, i: usize, xs: &[f64], base: &[(f64, f64)]) -> Result<Vec<f64>> {
        let m = self.model;
        let t = &self.theta;
        if self.mode == OptimalMode::ClosedForm {
            if let Some(x0) = xs.iter().copied().find(|&x| m.in_support(x)) {
                if m.optimal_closed_form(t, i, x0).is_some() {
                    return Ok(xs
                        .iter()
                        .map(|&x| {
                            if interior(m, t, x) {
                                m.optimal_closed_form(t, i, x).unwrap_or(0.0)
                            } else {
                                0.0
                            }
                        })
                        .collect());
                }
            }
        }
        let dp = cdf_param_derivative(m, t, i, xs, base)?;
        Ok(xs
            .iter()
            .zip(dp)
            .map(|(&x, d)| {
                if !interior(m, t, x) {
                    return 0.0;
                }
                let v = d / (m.tau(t, x) * m.pdf(t, x));
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            })
            .collect())
    }
}

fn interior(m: &dyn SteinModel, t: &[f64], x: f64) -> bool {
    m.in_support(x) && m.tau(t, x) != 0.0
}

/// Derivative of `P_θ(x)` in `θᵢ` at every point, differencing whichever
/// of the distribution or survival function is smaller at that point.
fn cdf_param_derivative(
    m: &dyn SteinModel,
    t: &[f64],
    i: usize,
    xs: &[f64],
    base: &[(f64, f64)],
) -> Result<Vec<f64>> {
    let h = DiffSpec::default().step(t[i]);
    let shifted = |delta: f64| -> Option<Vec<(f64, f64)>> {
        let mut w = t.to_vec();
        w[i] += delta;
        m.in_param_space(&w).then(|| m.cdf_sf_batch(&w, xs))
    };
    let pick = |b: (f64, f64), v: (f64, f64)| if b.0 <= b.1 { v.0 } else { -v.1 };
    let (plus, minus) = (shifted(h), shifted(-h));
    let out = match (plus, minus) {
        (Some(p), Some(q)) => base
            .iter()
            .zip(p.iter().zip(&q))
            .map(|(&b, (&u, &l))| (pick(b, u) - pick(b, l)) / (2.0 * h))
            .collect(),
        (Some(p), None) => {
            let p2 = shifted(2.0 * h).ok_or_else(|| {
                SmomError::domain("optimal_fn", "forward stencil leaves the parameter space")
            })?;
            base.iter()
                .zip(p.iter().zip(&p2))
                .map(|(&b, (&u, &u2))| {
                    (-3.0 * pick(b, b) + 4.0 * pick(b, u) - pick(b, u2)) / (2.0 * h)
                })
                .collect()
        }
        (None, Some(q)) => {
            let q2 = shifted(-2.0 * h).ok_or_else(|| {
                SmomError::domain("optimal_fn", "backward stencil leaves the parameter space")
            })?;
            base.iter()
                .zip(q.iter().zip(&q2))
                .map(|(&b, (&l, &l2))| {
                    (3.0 * pick(b, b) - 4.0 * pick(b, l) + pick(b, l2)) / (2.0 * h)
                })
                .collect()
        }
        (None, None) => {
            return Err(SmomError::domain(
                "optimal_fn",
                "both stencil sides leave the parameter space",
            ))
        }
    };
    Ok(out)
}

impl TestFunctionSet for OptimalFunctionSet<'_> {
    fn count(&self) -> usize {
        self.model.dim()
    }

    fn eval(&self, j: usize, x: f64) -> f64 {
        let (v, _) = self.eval_batch(&[x]);
        v[j][0]
    }

    fn deriv(&self, j: usize, x: f64) -> f64 {
        let (_, d) = self.eval_batch(&[x]);
        d[j][0]
    }

    fn parameter_dependent(&self) -> bool {
        true
    }

    fn eval_batch(&self, xs: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let m = self.model;
        let t = &self.theta;
        let p = m.dim();
        let base = m.cdf_sf_batch(t, xs);
        let scores = m.score_batch(t, xs);
        let mut vals = Vec::with_capacity(p);
        let mut ders = Vec::with_capacity(p);
        for i in 0..p {
            let v = self
                .values(i, xs, &base)
                .unwrap_or_else(|_| vec![f64::NAN; xs.len()]);
            let d = xs
                .iter()
                .zip(&v)
                .zip(&scores)
                .map(|((&x, &f), s)| {
                    if !interior(m, t, x) {
                        return 0.0;
                    }
                    let tau = m.tau(t, x);
                    let d = (s[i] - m.drift(t, x) * f) / tau;
                    if d.is_finite() {
                        d
                    } else {
                        0.0
                    }
                })
                .collect();
            vals.push(v);
            ders.push(d);
        }
        (vals, ders)
    }
}

/// Optimal function component `i` of `model` at `(θ, x)`.
pub fn optimal_fn(
    model: &dyn SteinModel,
    theta: &[f64],
    i: usize,
    x: f64,
    mode: OptimalMode,
) -> Result<f64> {
    check_point(model, theta, i, x)?;
    let set = OptimalFunctionSet::new(model, theta, mode)?;
    let v = set.eval(i, x);
    finite_or_domain(v, "optimal_fn", x)
}

/// Derivative in `x` of optimal function component `i`, computed from the
/// identity `τ f′ = ∂θᵢ log p − (τ′ + τ (log p)′) f`.
pub fn optimal_fn_deriv(
    model: &dyn SteinModel,
    theta: &[f64],
    i: usize,
    x: f64,
    mode: OptimalMode,
) -> Result<f64> {
    check_point(model, theta, i, x)?;
    let set = OptimalFunctionSet::new(model, theta, mode)?;
    let d = set.deriv(i, x);
    finite_or_domain(d, "optimal_fn_deriv", x)
}

fn check_point(model: &dyn SteinModel, theta: &[f64], i: usize, x: f64) -> Result<()> {
    model.check_theta(theta)?;
    if i >= model.dim() {
        return Err(SmomError::Dimension(format!(
            "component {i} requested from a {}-parameter model",
            model.dim()
        )));
    }
    if !model.admits(x) {
        return Err(SmomError::domain(
            "optimal_fn",
            format!("x = {x} outside the support of {}", model.name()),
        ));
    }
    Ok(())
}

fn finite_or_domain(v: f64, func: &'static str, x: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SmomError::domain(
            func,
            format!("non-finite value at x = {x}"),
        ))
    }
}

/// Two-step estimator: optimal functions frozen at the first-step estimate,
/// then a single linear solve of the empirical Stein identity.
///
/// Models that delegate their optimal functions to a parent model (the
/// Cauchy location family with known scale) use the parent's functions.
pub fn two_step(
    model: &dyn SteinModel,
    first_step: &EstimateResult,
    sample: &[f64],
    mode: OptimalMode,
    tag: &str,
) -> Result<EstimateResult> {
    let theta = match first_step.ok_theta() {
        Some(t) => t.to_vec(),
        None => return Err(SmomError::FirstStepFailed(first_step.status)),
    };
    two_step_at(model, &theta, sample, mode, tag)
}

/// Two-step estimator from an explicit first-step parameter value.
pub fn two_step_at(
    model: &dyn SteinModel,
    theta: &[f64],
    sample: &[f64],
    mode: OptimalMode,
    tag: &str,
) -> Result<EstimateResult> {
    model.check_theta(theta)?;
    let parent = model.optimal_parent(theta);
    let (fmodel, ftheta): (&dyn SteinModel, Vec<f64>) = match &parent {
        Some((pm, pt)) => (pm.as_ref(), pt.clone()),
        None => (model, theta.to_vec()),
    };
    let set = OptimalFunctionSet::new(fmodel, &ftheta, mode)?;
    if set.count() != model.g_dim() {
        return Err(SmomError::Dimension(format!(
            "{} optimal functions for {} unknowns",
            set.count(),
            model.g_dim()
        )));
    }
    let (vals, ders) = set.eval_batch(sample);
    let system = build_system_from_values(model, sample, &vals, &ders)?;
    solve_stein(&system, model, tag)
}

/// Result of [`iterate_to_mle`] with the sequence of iterates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationOutcome {
    /// Final estimate; `iterations` is set.
    pub result: EstimateResult,
    /// Starting value followed by every iterate.
    pub trace: Vec<Vec<f64>>,
}

impl IterationOutcome {
    /// Euclidean norms of successive steps.
    pub fn step_norms(&self) -> Vec<f64> {
        self.trace
            .windows(2)
            .map(|w| {
                let d: Vec<f64> = w[1].iter().zip(&w[0]).map(|(a, b)| a - b).collect();
                linalg::norm2(&d)
            })
            .collect()
    }
}

/// Repeats the two-step construction with the previous iterate as first
/// step until `‖θ⁽ᵐ⁺¹⁾ − θ⁽ᵐ⁾‖ ≤ tol (1 + ‖θ⁽ᵐ⁾‖)`.
pub fn iterate_to_mle(
    model: &dyn SteinModel,
    theta_start: &[f64],
    sample: &[f64],
    tol: f64,
    max_iter: usize,
    mode: OptimalMode,
) -> Result<IterationOutcome> {
    model.check_theta(theta_start)?;
    let tag = format!("{}:IterMLE", model.name());
    let mut trace = vec![theta_start.to_vec()];
    let mut current = theta_start.to_vec();
    for it in 1..=max_iter {
        let mut step = two_step_at(model, &current, sample, mode, &tag)?;
        step.iterations = Some(it);
        let next = match step.ok_theta() {
            Some(t) => t.to_vec(),
            None => {
                if let Some(t) = &step.theta_hat {
                    trace.push(t.clone());
                }
                return Ok(IterationOutcome {
                    result: step,
                    trace,
                });
            }
        };
        let diff: Vec<f64> = next.iter().zip(&current).map(|(a, b)| a - b).collect();
        let done = linalg::norm2(&diff) <= tol * (1.0 + linalg::norm2(&current));
        trace.push(next.clone());
        if done {
            return Ok(IterationOutcome {
                result: step,
                trace,
            });
        }
        current = next;
    }
    let mut result = EstimateResult::failed(Status::DidNotConverge, Some(current), tag);
    result.iterations = Some(max_iter);
    Ok(IterationOutcome { result, trace })
}

/// Default trimming fraction of [`cauchy_st2`].
pub const CAUCHY_TRIM: f64 = 0.38;

/// Trimmed two-step estimator of a Cauchy location with known scale.
///
/// The first step is the sample median of the full sample. The bottom and
/// top `⌊n·trim_p⌋` order statistics are then dropped and the two-step
/// equations are averaged over the remaining observations only.
pub fn cauchy_st2(sample: &[f64], gamma: f64, trim_p: f64) -> Result<EstimateResult> {
    let model = crate::distributions::CauchyKnownGamma::new(gamma)?;
    let tag = format!(
        "{}:ST2",
        crate::distributions::DistributionId::CauchyKnownGamma { gamma }
    );
    let n = sample.len();
    if n < 3 {
        return Err(SmomError::Config(format!(
            "trimmed estimator needs at least 3 observations, got {n}"
        )));
    }
    if !(trim_p > 0.0 && trim_p < 0.5) {
        return Err(SmomError::Config(format!(
            "trimming fraction must lie in (0, 0.5), got {trim_p}"
        )));
    }
    let r = (n as f64 * trim_p).floor() as usize;
    if n < 2 * r + 2 {
        return Err(SmomError::Config(format!(
            "trimming {r} points from each end of {n} leaves fewer than 2"
        )));
    }
    let mu0 = crate::numeric::median(sample);
    let s = sorted(sample);
    let kept = &s[r..n - r];
    let set = OptimalFunctionSet::new(&Cauchy, &[mu0, gamma], OptimalMode::ClosedForm)?;
    let (vals, ders) = set.eval_batch(kept);
    let system = build_system_from_values(&model, kept, &vals, &ders)?;
    solve_stein(&system, &model, &tag)
}

/// Number of observations dropped from each end by [`cauchy_st2`].
pub fn trimmed_count(n: usize, trim_p: f64) -> usize {
    (n as f64 * trim_p).floor() as usize
}
