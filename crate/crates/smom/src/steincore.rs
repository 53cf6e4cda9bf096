//! Stein pairs and the generic method-of-moments solver.
//!
//! A [`SteinModel`] describes a parametric family through its log-density
//! and a Stein kernel `τ`, giving the density-approach operator
//! `A_θ f = τ f′ + (τ′ + τ (log p)′) f`. Every model also declares a linear
//! structure `A_θ f(x) = Σ_k φ_k(θ) (a_k(x) f + b_k(x) f′) + (a_c f + b_c f′)`
//! in a reparametrisation `φ = g(θ)`, which turns the empirical Stein
//! identity into a square linear system.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SmomError};
use crate::linalg::{self, Matrix};
use crate::numeric::KahanSum;
use crate::rng::SmomRng;
use crate::specfun::{numeric_param_grad, DiffSpec};

/// Outcome of an estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    /// A valid estimate inside the parameter space.
    #[serde(rename = "OK")]
    Ok,
    /// The linear system was singular to working precision.
    Singular,
    /// The algebraic solution lies outside the parameter space.
    OutOfSpace,
    /// The time or evaluation budget was exhausted.
    TimedOut,
    /// An iterative method failed to converge.
    DidNotConverge,
    /// An existence criterion for the estimator failed.
    DoesNotExist,
    /// The estimating equations evaluated to non-finite values.
    NonFinite,
}

impl Status {
    /// Stable upper-case label used in reports.
    pub fn label(&self) -> &'static str {
        match self {
            Status::Ok => "OK",
            Status::Singular => "Singular",
            Status::OutOfSpace => "OutOfSpace",
            Status::TimedOut => "TimedOut",
            Status::DidNotConverge => "DidNotConverge",
            Status::DoesNotExist => "DoesNotExist",
            Status::NonFinite => "NonFinite",
        }
    }
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Estimate together with its status and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// Estimated parameter vector, absent when no solution was found.
    pub theta_hat: Option<Vec<f64>>,
    /// Outcome of the estimator.
    pub status: Status,
    /// Norm of the estimating equations at the returned solution.
    pub residual: f64,
    /// Identifier of the method that produced the estimate.
    pub method_tag: String,
    /// Optional asymptotic covariance of `√n (θ̂ − θ₀)`.
    pub covariance: Option<Matrix>,
    /// Number of iterations used by iterative methods.
    pub iterations: Option<usize>,
}

impl EstimateResult {
    /// Successful estimate.
    pub fn ok(theta: Vec<f64>, residual: f64, tag: impl Into<String>) -> Self {
        Self {
            theta_hat: Some(theta),
            status: Status::Ok,
            residual,
            method_tag: tag.into(),
            covariance: None,
            iterations: None,
        }
    }

    /// Failed estimate carrying an optional raw solution for diagnostics.
    pub fn failed(status: Status, theta: Option<Vec<f64>>, tag: impl Into<String>) -> Self {
        Self {
            theta_hat: theta,
            status,
            residual: f64::NAN,
            method_tag: tag.into(),
            covariance: None,
            iterations: None,
        }
    }

    /// True when the status is [`Status::Ok`].
    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    /// The estimate if the status is OK.
    pub fn ok_theta(&self) -> Option<&[f64]> {
        if self.is_ok() {
            self.theta_hat.as_deref()
        } else {
            None
        }
    }

    /// Replaces the method tag.
    pub fn with_tag(mut self, tag: impl Into<String>) -> Self {
        self.method_tag = tag.into();
        self
    }
}

/// A parametric family equipped with a Stein kernel and a linear
/// parameter structure.
pub trait SteinModel: Send + Sync + fmt::Debug {
    /// Stable identifier, for example `gamma` or `trunc_normal(0,1)`.
    fn name(&self) -> String;
    /// Parameter dimension `p`.
    fn dim(&self) -> usize;
    /// Parameter names in order.
    fn param_names(&self) -> Vec<&'static str>;
    /// Support interval `(a, b)`; either end may be infinite.
    fn support(&self) -> (f64, f64);
    /// Parameter-space predicate.
    fn in_param_space(&self, theta: &[f64]) -> bool;
    /// Log-density at `x`.
    fn log_pdf(&self, theta: &[f64], x: f64) -> f64;
    /// Derivative of the log-density in `x`.
    fn dlog_pdf(&self, theta: &[f64], x: f64) -> f64;
    /// Stein kernel `τ_θ(x)`.
    fn tau(&self, theta: &[f64], x: f64) -> f64;
    /// Derivative of `τ_θ` in `x`.
    fn tau_dx(&self, theta: &[f64], x: f64) -> f64;
    /// Cumulative distribution function.
    fn cdf(&self, theta: &[f64], x: f64) -> f64;

    /// Survival function `1 − F`, overridden where a direct tail formula
    /// is more accurate.
    fn sf(&self, theta: &[f64], x: f64) -> f64 {
        1.0 - self.cdf(theta, x)
    }

    /// `(F(x), 1 − F(x))` for a batch of points.
    fn cdf_sf_batch(&self, theta: &[f64], xs: &[f64]) -> Vec<(f64, f64)> {
        xs.iter()
            .map(|&x| (self.cdf(theta, x), self.sf(theta, x)))
            .collect()
    }

    /// Coefficient of `f` in the operator: `τ′ + τ (log p)′`.
    fn drift(&self, theta: &[f64], x: f64) -> f64 {
        self.tau_dx(theta, x) + self.tau(theta, x) * self.dlog_pdf(theta, x)
    }

    /// Mean, when it exists in closed form.
    fn mean(&self, _theta: &[f64]) -> Option<f64> {
        None
    }

    /// Closed-form quantile function, when available.
    fn quantile(&self, _theta: &[f64], _u: f64) -> Option<f64> {
        None
    }

    /// Upper-tail quantile `F⁻¹(1 − s)`, overridden where `1 − s` would
    /// round to one.
    fn quantile_upper(&self, theta: &[f64], s: f64) -> Option<f64> {
        self.quantile(theta, 1.0 - s)
    }

    /// Draws `n` i.i.d. observations.
    fn sample(&self, theta: &[f64], n: usize, rng: &mut SmomRng) -> Result<Vec<f64>>;

    /// Number of free components of `g(θ)` excluding the constant.
    fn g_dim(&self) -> usize {
        self.dim()
    }

    /// The reparametrisation `φ = g(θ)` without the trailing constant.
    fn to_g(&self, theta: &[f64]) -> Vec<f64>;

    /// Inverse reparametrisation; `None` when `φ` has no preimage.
    #[allow(clippy::wrong_self_convention)]
    fn from_g(&self, phi: &[f64]) -> Option<Vec<f64>>;

    /// Writes the structure coefficients `(a_k, b_k)` for `k = 0..g_dim`
    /// followed by the constant column.
    fn terms(&self, x: f64, out: &mut [(f64, f64)]);

    /// Score vector `∂θ log p_θ(x)`.
    fn score(&self, theta: &[f64], x: f64) -> Vec<f64> {
        let admissible = |t: &[f64]| self.in_param_space(t);
        (0..self.dim())
            .map(|i| {
                numeric_param_grad(|t| self.log_pdf(t, x), theta, i, admissible).unwrap_or(f64::NAN)
            })
            .collect()
    }

    /// Scores for a batch of points.
    fn score_batch(&self, theta: &[f64], xs: &[f64]) -> Vec<Vec<f64>> {
        xs.iter().map(|&x| self.score(theta, x)).collect()
    }

    /// Model and parameter that supply optimal functions for a two-step
    /// estimator when they differ from `self`.
    fn optimal_parent(&self, _theta: &[f64]) -> Option<(Arc<dyn SteinModel>, Vec<f64>)> {
        None
    }

    /// Closed-form optimal test function `∂θᵢP_θ(x) / (τ_θ(x) p_θ(x))` for
    /// component `i`, when one is catalogued.
    fn optimal_closed_form(&self, _theta: &[f64], _i: usize, _x: f64) -> Option<f64> {
        None
    }

    /// Log-likelihood of a sample.
    fn log_likelihood(&self, theta: &[f64], xs: &[f64]) -> f64 {
        let mut acc = KahanSum::new();
        for &x in xs {
            acc.add(self.log_pdf(theta, x));
        }
        acc.total()
    }

    /// Density at `x`.
    fn pdf(&self, theta: &[f64], x: f64) -> f64 {
        self.log_pdf(theta, x).exp()
    }

    /// True for finite points in the closed support.
    fn admits(&self, x: f64) -> bool {
        let (a, b) = self.support();
        x.is_finite() && x >= a && x <= b
    }

    /// True for points in the open support.
    fn in_support(&self, x: f64) -> bool {
        let (a, b) = self.support();
        x.is_finite() && x > a && x < b
    }

    /// Validates the dimension and parameter space of `theta`.
    fn check_theta(&self, theta: &[f64]) -> Result<()> {
        if theta.len() != self.dim() {
            return Err(SmomError::Dimension(format!(
                "{} expects {} parameters, got {}",
                self.name(),
                self.dim(),
                theta.len()
            )));
        }
        if !theta.iter().all(|t| t.is_finite()) || !self.in_param_space(theta) {
            return Err(SmomError::InvalidParameter(format!(
                "{theta:?} is outside the parameter space of {}",
                self.name()
            )));
        }
        Ok(())
    }
}

/// A finite collection of differentiable test functions.
pub trait TestFunctionSet: Send + Sync {
    /// Number of functions.
    fn count(&self) -> usize;
    /// Value of function `j` at `x`.
    fn eval(&self, j: usize, x: f64) -> f64;
    /// Derivative of function `j` at `x`.
    fn deriv(&self, j: usize, x: f64) -> f64;
    /// True when the functions were built from a frozen parameter value.
    fn parameter_dependent(&self) -> bool {
        false
    }
    /// Values and derivatives for a batch of points, indexed `[j][i]`.
    fn eval_batch(&self, xs: &[f64]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let q = self.count();
        let vals = (0..q)
            .map(|j| xs.iter().map(|&x| self.eval(j, x)).collect())
            .collect();
        let ders = (0..q)
            .map(|j| xs.iter().map(|&x| self.deriv(j, x)).collect())
            .collect();
        (vals, ders)
    }
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Test functions given by explicit closures and their derivatives.
pub struct FunctionSet {
    names: Vec<String>,
    funcs: Vec<(ScalarFn, ScalarFn)>,
}

impl fmt::Debug for FunctionSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FunctionSet")
            .field("names", &self.names)
            .finish()
    }
}

impl Default for FunctionSet {
    fn default() -> Self {
        Self::new()
    }
}

impl FunctionSet {
    /// Empty set.
    pub fn new() -> Self {
        Self {
            names: Vec::new(),
            funcs: Vec::new(),
        }
    }

    /// Appends a function with its derivative.
    pub fn with(
        mut self,
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.names.push(name.into());
        self.funcs.push((Box::new(f), Box::new(df)));
        self
    }

    /// Appends the polynomial `Σ c_k x^k`.
    pub fn with_polynomial(self, name: impl Into<String>, coeffs: Vec<f64>) -> Self {
        let dcoeffs: Vec<f64> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, c)| k as f64 * c)
            .collect();
        self.with(
            name,
            move |x| horner(&coeffs, x),
            move |x| horner(&dcoeffs, x),
        )
    }

    /// The monomials `x^1, …, x^p`.
    pub fn powers(p: usize) -> Self {
        (1..=p).fold(Self::new(), |set, k| {
            let mut c = vec![0.0; k + 1];
            c[k] = 1.0;
            set.with_polynomial(format!("x^{k}"), c)
        })
    }

    /// Names of the functions.
    pub fn names(&self) -> &[String] {
        &self.names
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

impl TestFunctionSet for FunctionSet {
    fn count(&self) -> usize {
        self.funcs.len()
    }

    fn eval(&self, j: usize, x: f64) -> f64 {
        (self.funcs[j].0)(x)
    }

    fn deriv(&self, j: usize, x: f64) -> f64 {
        (self.funcs[j].1)(x)
    }
}

/// Averaged coefficient matrix of the empirical Stein identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalSteinSystem {
    /// `q × (g_dim + 1)` matrix `M̄`; the last column multiplies the
    /// constant component of `g`.
    pub m_bar: Matrix,
    /// Number of free components of `g`.
    pub g_dim: usize,
    /// Sample size.
    pub n: usize,
    /// Always true for catalogued structures.
    pub linear_in_theta: bool,
}

impl EmpiricalSteinSystem {
    /// Evaluates `M̄ (φ, 1)`.
    pub fn apply(&self, phi: &[f64]) -> Vec<f64> {
        let mut g = phi.to_vec();
        g.push(1.0);
        self.m_bar.matvec(&g).unwrap_or_default()
    }
}

/// Applies the density-approach Stein operator to each test function.
pub fn stein_apply(
    model: &dyn SteinModel,
    theta: &[f64],
    fset: &dyn TestFunctionSet,
    x: f64,
) -> Result<Vec<f64>> {
    model.check_theta(theta)?;
    if !model.in_support(x) {
        return Err(SmomError::domain(
            "stein_apply",
            format!("x = {x} outside support"),
        ));
    }
    let tau = model.tau(theta, x);
    let drift = model.drift(theta, x);
    Ok((0..fset.count())
        .map(|j| tau * fset.deriv(j, x) + drift * fset.eval(j, x))
        .collect())
}

/// Builds `M̄ = (1/n) Σ M(X_i)` for a test function set.
pub fn build_empirical_system(
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    sample: &[f64],
) -> Result<EmpiricalSteinSystem> {
    check_sample(model, sample)?;
    let (vals, ders) = fset.eval_batch(sample);
    build_system_from_values(model, sample, &vals, &ders)
}

/// Builds `M̄` from precomputed test-function values `vals[j][i]` and
/// derivatives `ders[j][i]`.
pub fn build_system_from_values(
    model: &dyn SteinModel,
    sample: &[f64],
    vals: &[Vec<f64>],
    ders: &[Vec<f64>],
) -> Result<EmpiricalSteinSystem> {
    check_sample(model, sample)?;
    let q = vals.len();
    if ders.len() != q || vals.iter().chain(ders).any(|v| v.len() != sample.len()) {
        return Err(SmomError::Dimension(
            "test function values do not match the sample".into(),
        ));
    }
    let cols = model.g_dim() + 1;
    let mut acc = vec![KahanSum::new(); q * cols];
    let mut terms = vec![(0.0, 0.0); cols];
    for (i, &x) in sample.iter().enumerate() {
        model.terms(x, &mut terms);
        for j in 0..q {
            let f = vals[j][i];
            let df = ders[j][i];
            for (k, &(a, b)) in terms.iter().enumerate() {
                let mut v = 0.0;
                if a != 0.0 {
                    v += a * f;
                }
                if b != 0.0 {
                    v += b * df;
                }
                acc[j * cols + k].add(v);
            }
        }
    }
    let n = sample.len() as f64;
    let mut m_bar = Matrix::zeros(q, cols);
    for (idx, s) in acc.iter().enumerate() {
        m_bar[(idx / cols, idx % cols)] = s.total() / n;
    }
    Ok(EmpiricalSteinSystem {
        m_bar,
        g_dim: cols - 1,
        n: sample.len(),
        linear_in_theta: true,
    })
}

fn check_sample(model: &dyn SteinModel, sample: &[f64]) -> Result<()> {
    if sample.is_empty() {
        return Err(SmomError::Config("empty sample".into()));
    }
    if let Some(x) = sample.iter().find(|&&x| !model.admits(x)) {
        return Err(SmomError::domain(
            "build_empirical_system",
            format!("observation {x} outside the support of {}", model.name()),
        ));
    }
    Ok(())
}

/// Solves `M̄ g(θ) = 0` for `θ`.
pub fn solve_stein(
    system: &EmpiricalSteinSystem,
    model: &dyn SteinModel,
    tag: &str,
) -> Result<EstimateResult> {
    let d = system.g_dim;
    if d != model.g_dim() {
        return Err(SmomError::Dimension(format!(
            "system has {d} structure columns, model {} expects {}",
            model.name(),
            model.g_dim()
        )));
    }
    if system.m_bar.rows() != d {
        return Err(SmomError::Dimension(format!(
            "{} test functions for {d} unknowns",
            system.m_bar.rows()
        )));
    }
    if !system.m_bar.is_finite() {
        return Ok(EstimateResult::failed(Status::NonFinite, None, tag));
    }
    let b = system.m_bar.columns(0, d);
    let rhs: Vec<f64> = (0..d).map(|j| -system.m_bar[(j, d)]).collect();
    let phi = match linalg::solve(&b, &rhs) {
        Ok(phi) => phi,
        Err(SmomError::Singular) => return Ok(EstimateResult::failed(Status::Singular, None, tag)),
        Err(e) => return Err(e),
    };
    let residual = linalg::norm2(&system.apply(&phi));
    if !phi.iter().all(|v| v.is_finite()) {
        return Ok(EstimateResult::failed(Status::Singular, None, tag));
    }
    let scale = 1.0 + linalg::spectral_norm(&system.m_bar);
    if residual > 1e-8 * scale {
        return Ok(EstimateResult::failed(Status::Singular, None, tag));
    }
    match model.from_g(&phi) {
        Some(theta) if theta.iter().all(|t| t.is_finite()) && model.in_param_space(&theta) => {
            Ok(EstimateResult::ok(theta, residual, tag))
        }
        Some(theta) => Ok(EstimateResult::failed(Status::OutOfSpace, Some(theta), tag)),
        None => Ok(EstimateResult::failed(Status::OutOfSpace, None, tag)),
    }
}

/// Builds and solves the empirical Stein system in one call.
pub fn explicit_estimate(
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    sample: &[f64],
    tag: &str,
) -> Result<EstimateResult> {
    let system = build_empirical_system(model, fset, sample)?;
    solve_stein(&system, model, tag)
}

/// Norm of the averaged density-approach operator at `θ`.
pub fn stein_residual(
    model: &dyn SteinModel,
    theta: &[f64],
    fset: &dyn TestFunctionSet,
    sample: &[f64],
) -> Result<f64> {
    model.check_theta(theta)?;
    check_sample(model, sample)?;
    let q = fset.count();
    let mut acc = vec![KahanSum::new(); q];
    for &x in sample {
        let tau = model.tau(theta, x);
        let drift = if tau == 0.0 && !model.in_support(x) {
            0.0
        } else {
            model.drift(theta, x)
        };
        for (j, s) in acc.iter_mut().enumerate() {
            let mut v = tau * fset.deriv(j, x);
            let f = fset.eval(j, x);
            if f != 0.0 {
                v += drift * f;
            }
            s.add(v);
        }
    }
    let n = sample.len() as f64;
    let means: Vec<f64> = acc.iter().map(|s| s.total() / n).collect();
    Ok(linalg::norm2(&means))
}

/// Structured operator `Σ φ_k (a_k f + b_k f′) + (a_c f + b_c f′)` at `x`.
pub fn structured_apply(model: &dyn SteinModel, phi: &[f64], f: f64, df: f64, x: f64) -> f64 {
    let mut terms = vec![(0.0, 0.0); model.g_dim() + 1];
    model.terms(x, &mut terms);
    let (ac, bc) = terms[model.g_dim()];
    let mut v = ac * f + bc * df;
    for (k, &(a, b)) in terms.iter().take(model.g_dim()).enumerate() {
        v += phi[k] * (a * f + b * df);
    }
    v
}

/// Jacobian `∂θ/∂φ` of the inverse reparametrisation at `φ`, by central
/// differences.
pub fn from_g_jacobian(model: &dyn SteinModel, phi: &[f64]) -> Result<Matrix> {
    let p = model.dim();
    let d = model.g_dim();
    let spec = DiffSpec::default();
    let mut jac = Matrix::zeros(p, d);
    for k in 0..d {
        let h = spec.step(phi[k]);
        let mut up = phi.to_vec();
        let mut dn = phi.to_vec();
        up[k] += h;
        dn[k] -= h;
        let (tu, td) = match (model.from_g(&up), model.from_g(&dn)) {
            (Some(u), Some(l)) => (u, l),
            _ => {
                return Err(SmomError::InvalidParameter(format!(
                    "reparametrisation not invertible near {phi:?}"
                )))
            }
        };
        for i in 0..p {
            jac[(i, k)] = (tu[i] - td[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
