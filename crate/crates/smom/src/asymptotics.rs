//! Asymptotic covariances of Stein estimators.
//!
//! For test functions `f` the estimator solves `M̄ (φ, 1) = 0` in the
//! reparametrisation `φ = g(θ)`. With `B = E[M(X)]` restricted to the `φ`
//! columns and `Ψ = E[Y Yᵀ]` for `Y = A_θ₀ f(X)`, the covariance of
//! `√n (φ̂ − φ₀)` is `B⁻¹ Ψ B⁻ᵀ`. The delta method with `D = ∂θ/∂φ` maps
//! it to `D B⁻¹ Ψ B⁻ᵀ Dᵀ` for `θ`.
//!
//! Expectations are estimated by Monte Carlo at `θ₀`. Models with a
//! quantile function are integrated on the probability scale with a
//! stratified design whose points crowd into both tails, which keeps the
//! estimate stable for heavy-tailed integrands.

use std::sync::Arc;

use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{make_model, recipe_functions, DistributionId, ExpPoly, RecipeId};
use crate::efficient::{OptimalFunctionSet, OptimalMode};
use crate::error::{Result, SmomError};
use crate::linalg::{self, Matrix};
use crate::numeric::KahanSum;
use crate::quadrature::{integrate, simpson, QuadConfig};
use crate::recipes::{recipe_class, RecipeClass};
use crate::rng::stream;
use crate::specfun::raw;
use crate::steincore::{from_g_jacobian, SteinModel, TestFunctionSet};

/// Default number of Monte Carlo draws.
pub const DEFAULT_MC_DRAWS: usize = 1_000_000;

const CHUNK: usize = 1 << 15;
const TAIL_POWER: i32 = 8;

/// How a covariance matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CovMode {
    /// Catalogued closed-form expression.
    ClosedForm,
    /// Monte Carlo plug-in with independent draws.
    McPlugin,
    /// Monte Carlo with a Bartlett long-run variance from one series.
    LongrunMc,
}

/// Asymptotic covariance of `√n (θ̂ − θ₀)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovarianceEstimate {
    /// `p × p` covariance matrix.
    pub matrix: Matrix,
    /// Method that produced the matrix.
    pub mode: CovMode,
    /// Monte Carlo draws used; zero for closed forms.
    pub mc_draws: usize,
    /// Bartlett lag window of the long-run mode.
    pub lag_window: Option<usize>,
}

impl CovarianceEstimate {
    fn new(matrix: Matrix, mode: CovMode, mc_draws: usize, lag_window: Option<usize>) -> Self {
        Self {
            matrix: matrix.symmetrize(),
            mode,
            mc_draws,
            lag_window,
        }
    }

    /// Asymptotic standard errors `sqrt(diag(V)/n)`.
    pub fn std_errors(&self, n: usize) -> Vec<f64> {
        self.matrix
            .diagonal()
            .iter()
            .map(|v| (v / n as f64).sqrt())
            .collect()
    }

    /// True when the matrix is symmetric to `1e−8` and positive
    /// semidefinite.
    pub fn is_valid(&self) -> bool {
        is_symmetric_psd(&self.matrix)
    }
}

/// Symmetry within `1e−8` relative and positive semidefiniteness.
pub fn is_symmetric_psd(m: &Matrix) -> bool {
    let scale = m.max_abs().max(1.0);
    if !m.is_finite() || !m.is_symmetric(1e-8 * scale) {
        return false;
    }
    let tol = 1e-10 * scale;
    match m.rows() {
        1 => m[(0, 0)] >= -tol,
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            tr >= -tol && det >= -tol * scale
        }
        _ => {
            let s = m.symmetrize();
            (0..s.rows()).all(|i| s[(i, i)] >= -tol)
                && linalg::determinant(&s).is_ok_and(|d| d >= -tol)
        }
    }
}

/// Weighted draws representing `P_θ₀`.
struct Design {
    xs: Vec<f64>,
    weights: Vec<f64>,
}

fn tail_map(t: f64) -> (f64, bool, f64) {
    let k = f64::from(TAIL_POWER);
    let (lo, hi) = (t, 1.0 - t);
    let weight =
        k * (lo * hi).powi(TAIL_POWER - 1) / (lo.powi(TAIL_POWER) + hi.powi(TAIL_POWER)).powi(2);
    if t < 0.5 {
        let r = (lo / hi).powi(TAIL_POWER);
        (r / (1.0 + r), false, weight)
    } else {
        let r = (hi / lo).powi(TAIL_POWER);
        (r / (1.0 + r), true, weight)
    }
}

fn design_chunk(
    model: &dyn SteinModel,
    theta: &[f64],
    draws: usize,
    seed: u64,
    chunk: usize,
) -> Result<Design> {
    let start = chunk * CHUNK;
    let len = CHUNK.min(draws - start);
    let mut rng = stream(seed, chunk as u64, 0);
    let stratified = model.quantile(theta, 0.5).is_some();
    if !stratified {
        let xs = model.sample(theta, len, &mut rng)?;
        return Ok(Design {
            weights: vec![1.0; xs.len()],
            xs,
        });
    }
    let mut xs = Vec::with_capacity(len);
    let mut weights = Vec::with_capacity(len);
    for i in 0..len {
        let t = ((start + i) as f64 + rng.random::<f64>()) / draws as f64;
        if !(t > 0.0 && t < 1.0) {
            continue;
        }
        let (u, upper, w) = tail_map(t);
        let x = if upper {
            model.quantile_upper(theta, u)
        } else {
            model.quantile(theta, u)
        };
        if let Some(x) = x.filter(|x| model.admits(*x)) {
            if w.is_finite() && w > 0.0 {
                xs.push(x);
                weights.push(w);
            }
        }
    }
    Ok(Design { xs, weights })
}

/// Running sums of `w·M[:, :g]`, `w·Y Yᵀ` and `w`.
struct Moments {
    b: Vec<f64>,
    psi: Vec<f64>,
    weight: f64,
}

fn chunk_moments(
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    phi: &[f64],
    design: &Design,
) -> Moments {
    let q = fset.count();
    let g = model.g_dim();
    let (vals, ders) = fset.eval_batch(&design.xs);
    let mut b = vec![0.0; q * g];
    let mut psi = vec![0.0; q * q];
    let mut weight = 0.0;
    let mut terms = vec![(0.0, 0.0); g + 1];
    let mut y = vec![0.0; q];
    let mut rows = vec![0.0; q * g];
    for (i, (&x, &w)) in design.xs.iter().zip(&design.weights).enumerate() {
        model.terms(x, &mut terms);
        for j in 0..q {
            let (f, df) = (vals[j][i], ders[j][i]);
            let mut acc = 0.0;
            for (k, &(a, bk)) in terms.iter().enumerate() {
                let m = a * f + bk * df;
                if k < g {
                    rows[j * g + k] = m;
                    acc += phi[k] * m;
                } else {
                    acc += m;
                }
            }
            y[j] = acc;
        }
        if !(y.iter().all(|v| v.is_finite()) && rows.iter().all(|v| v.is_finite())) {
            continue;
        }
        for (acc, r) in b.iter_mut().zip(&rows) {
            *acc += w * r;
        }
        for j in 0..q {
            for l in 0..q {
                psi[j * q + l] += w * y[j] * y[l];
            }
        }
        weight += w;
    }
    Moments { b, psi, weight }
}

/// Sandwich covariance `D B⁻¹ Ψ B⁻ᵀ Dᵀ` for a test function set, with
/// expectations estimated from `mc_draws` draws at `θ₀`.
pub fn sandwich_mc(
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    theta0: &[f64],
    mc_draws: usize,
    seed: u64,
) -> Result<CovarianceEstimate> {
    model.check_theta(theta0)?;
    if mc_draws < 2 {
        return Err(SmomError::Config(
            "sandwich covariance needs at least 2 draws".into(),
        ));
    }
    check_square(model, fset)?;
    let phi = model.to_g(theta0);
    let chunks = mc_draws.div_ceil(CHUNK);
    let work = |c: usize| -> Result<Moments> {
        let design = design_chunk(model, theta0, mc_draws, seed, c)?;
        Ok(chunk_moments(model, fset, &phi, &design))
    };
    #[cfg(feature = "parallel")]
    let parts: Vec<Result<Moments>> = (0..chunks).into_par_iter().map(work).collect();
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<Result<Moments>> = (0..chunks).map(work).collect();
    let q = fset.count();
    let g = model.g_dim();
    let mut b = vec![KahanSum::new(); q * g];
    let mut psi = vec![KahanSum::new(); q * q];
    let mut weight = KahanSum::new();
    for part in parts {
        let m = part?;
        for (acc, v) in b.iter_mut().zip(&m.b) {
            acc.add(*v);
        }
        for (acc, v) in psi.iter_mut().zip(&m.psi) {
            acc.add(*v);
        }
        weight.add(m.weight);
    }
    let total = weight.total();
    let b = Matrix::from_row_major(q, g, b.iter().map(|s| s.total() / total).collect())?;
    let psi = Matrix::from_row_major(q, q, psi.iter().map(|s| s.total() / total).collect())?;
    let v = sandwich_from_parts(model, &phi, &b, &psi)?;
    Ok(CovarianceEstimate::new(
        v,
        CovMode::McPlugin,
        mc_draws,
        None,
    ))
}

fn check_square(model: &dyn SteinModel, fset: &dyn TestFunctionSet) -> Result<()> {
    if fset.count() != model.g_dim() {
        return Err(SmomError::Dimension(format!(
            "{} test functions for {} unknowns",
            fset.count(),
            model.g_dim()
        )));
    }
    Ok(())
}

/// Combines `B` and `Ψ` into the covariance of `θ̂`.
pub fn sandwich_from_parts(
    model: &dyn SteinModel,
    phi: &[f64],
    b: &Matrix,
    psi: &Matrix,
) -> Result<Matrix> {
    if !b.is_finite() || !psi.is_finite() {
        return Err(SmomError::Singular);
    }
    let b_inv = linalg::inverse(b)?;
    let v_phi = b_inv.matmul(psi)?.matmul(&b_inv.transpose())?;
    let d = from_g_jacobian(model, phi)?;
    Ok(d.matmul(&v_phi)?.matmul(&d.transpose())?.symmetrize())
}

/// Sandwich covariance with expectations computed by adaptive quadrature.
pub fn sandwich_quadrature(
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    theta0: &[f64],
    cfg: QuadConfig,
) -> Result<Matrix> {
    model.check_theta(theta0)?;
    check_square(model, fset)?;
    let phi = model.to_g(theta0);
    let q = fset.count();
    let g = model.g_dim();
    let (lo, hi) = model.support();
    let entry = |x: f64| -> (Vec<f64>, Vec<f64>) {
        let mut terms = vec![(0.0, 0.0); g + 1];
        model.terms(x, &mut terms);
        let mut m = vec![0.0; q * g];
        let mut y = vec![0.0; q];
        for j in 0..q {
            let (f, df) = (fset.eval(j, x), fset.deriv(j, x));
            for (k, &(a, b)) in terms.iter().enumerate() {
                let v = a * f + b * df;
                if k < g {
                    m[j * g + k] = v;
                    y[j] += phi[k] * v;
                } else {
                    y[j] += v;
                }
            }
        }
        (m, y)
    };
    let expect = |h: &dyn Fn(f64) -> f64| -> Result<f64> {
        integrate(
            |x| {
                if model.in_support(x) {
                    h(x) * model.pdf(theta0, x)
                } else {
                    0.0
                }
            },
            lo,
            hi,
            cfg,
        )
    };
    let mut b = Matrix::zeros(q, g);
    for j in 0..q {
        for k in 0..g {
            b[(j, k)] = expect(&|x| entry(x).0[j * g + k])?;
        }
    }
    let mut psi = Matrix::zeros(q, q);
    for j in 0..q {
        for l in j..q {
            let v = expect(&|x| {
                let y = entry(x).1;
                y[j] * y[l]
            })?;
            psi[(j, l)] = v;
            psi[(l, j)] = v;
        }
    }
    sandwich_from_parts(model, &phi, &b, &psi)
}

/// Bartlett-weighted long-run covariance of `A_θ₀ f(X_t)` over a
/// stationary series, with lag window `L`.
pub fn longrun_psi_series(
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    theta0: &[f64],
    series: &[f64],
    lag_window: usize,
) -> Result<Matrix> {
    model.check_theta(theta0)?;
    let n = series.len();
    if n < 2 {
        return Err(SmomError::Config(
            "long-run covariance needs at least 2 observations".into(),
        ));
    }
    if let Some(x) = series.iter().find(|&&x| !model.admits(x)) {
        return Err(SmomError::domain(
            "longrun_psi",
            format!("observation {x} outside the support"),
        ));
    }
    let q = fset.count();
    let ys: Vec<Vec<f64>> = series
        .iter()
        .map(|&x| {
            let tau = model.tau(theta0, x);
            let drift = model.drift(theta0, x);
            (0..q)
                .map(|j| tau * fset.deriv(j, x) + drift * fset.eval(j, x))
                .collect()
        })
        .collect();
    let lag_cov = |l: usize| -> Matrix {
        let mut m = Matrix::zeros(q, q);
        for j in 0..q {
            for k in 0..q {
                let mut acc = KahanSum::new();
                for t in 0..n - l {
                    acc.add(ys[t][j] * ys[t + l][k]);
                }
                m[(j, k)] = acc.total() / n as f64;
            }
        }
        m
    };
    let mut psi = lag_cov(0);
    for l in 1..=lag_window.min(n - 1) {
        let w = 1.0 - l as f64 / (lag_window as f64 + 1.0);
        let c = lag_cov(l);
        psi = psi.add(&c.add(&c.transpose())?.scale(w))?;
    }
    Ok(psi)
}

/// Long-run `Ψ` from a series drawn by `generator(n, seed)`.
pub fn longrun_psi(
    generator: &dyn Fn(usize, u64) -> Result<Vec<f64>>,
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    theta0: &[f64],
    lag_window: usize,
    n: usize,
    seed: u64,
) -> Result<Matrix> {
    let series = generator(n, seed)?;
    longrun_psi_series(model, fset, theta0, &series, lag_window)
}

/// Sandwich covariance for dependent data: `B` from independent draws and
/// the long-run `Ψ` from one series of length `n`.
#[allow(clippy::too_many_arguments)]
pub fn longrun_sandwich(
    generator: &dyn Fn(usize, u64) -> Result<Vec<f64>>,
    model: &dyn SteinModel,
    fset: &dyn TestFunctionSet,
    theta0: &[f64],
    lag_window: usize,
    n: usize,
    mc_draws: usize,
    seed: u64,
) -> Result<CovarianceEstimate> {
    check_square(model, fset)?;
    let psi = longrun_psi(generator, model, fset, theta0, lag_window, n, seed)?;
    let phi = model.to_g(theta0);
    let design = design_chunk(
        model,
        theta0,
        mc_draws.min(CHUNK),
        crate::rng::split_seed(seed, 1, 0),
        0,
    )?;
    let m = chunk_moments(model, fset, &phi, &design);
    let g = model.g_dim();
    let q = fset.count();
    let b = Matrix::from_row_major(q, g, m.b.iter().map(|v| v / m.weight).collect())?;
    let v = sandwich_from_parts(model, &phi, &b, &psi)?;
    Ok(CovarianceEstimate::new(
        v,
        CovMode::LongrunMc,
        n,
        Some(lag_window),
    ))
}

/// Closed-form covariance catalogued for a recipe, if any.
pub fn closed_form_cov(recipe: &RecipeId, theta: &[f64]) -> Option<Matrix> {
    let tag = recipe.base_tag();
    match (&recipe.dist, tag.as_str()) {
        (DistributionId::Nakagami, "ST") => {
            let (m, o) = (theta[0], theta[1]);
            let ratio = (raw::ln_gamma(1.0 + m) - raw::ln_gamma(0.5 + m)).exp();
            let v11 = m * (5.0 + 4.0 * m) * ratio * ratio - m * (1.0 + 2.0 * m).powi(2);
            Some(Matrix::diag(&[v11, o * o / m]))
        }
        (DistributionId::Lomax, "MO") if theta[0] > 4.0 => {
            let (a, l) = (theta[0], theta[1]);
            let c = a * (a - 1.0).powi(2) / ((a - 3.0) * (a - 4.0));
            let off = c * l * (4.0 + (a - 2.0) * a);
            Matrix::from_rows(&[
                vec![c * (a - 2.0) * (6.0 + (a - 1.0) * a), off],
                vec![off, c * l * l * (4.0 + (a - 3.0) * a) / (a - 2.0)],
            ])
            .ok()
        }
        (DistributionId::Cauchy, "TWOSTEP") => Some(Matrix::diag(&[2.0 * theta[1].powi(2); 2])),
        (DistributionId::CauchyKnownGamma { gamma }, "TWOSTEP" | "ST1") => {
            Some(Matrix::diag(&[2.0 * gamma * gamma]))
        }
        _ => None,
    }
}

/// Sandwich covariance of a recipe at `θ₀`.
///
/// Explicit recipes use their fixed test functions and efficient recipes
/// use the optimal functions at `θ₀`. Likelihood recipes return the
/// inverse Fisher information.
pub fn sandwich_cov(
    recipe: &RecipeId,
    theta0: &[f64],
    mode: CovMode,
    mc_draws: usize,
    seed: u64,
) -> Result<CovarianceEstimate> {
    let id = &recipe.dist;
    let model = make_model(id)?;
    model.check_theta(theta0)?;
    let class = recipe_class(recipe)?;
    match mode {
        CovMode::ClosedForm => {
            if class == RecipeClass::Likelihood {
                return Ok(CovarianceEstimate::new(
                    fisher_inverse(id, theta0)?,
                    CovMode::ClosedForm,
                    0,
                    None,
                ));
            }
            closed_form_cov(recipe, theta0)
                .map(|m| CovarianceEstimate::new(m, CovMode::ClosedForm, 0, None))
                .ok_or_else(|| {
                    SmomError::Config(format!("no closed-form covariance catalogued for {recipe}"))
                })
        }
        CovMode::LongrunMc => Err(SmomError::Config(
            "long-run covariances need a series; use longrun_sandwich".into(),
        )),
        CovMode::McPlugin => match class {
            RecipeClass::Explicit => {
                let set = recipe_functions(id, &recipe.base_tag(), recipe.tag_arg())?;
                sandwich_mc(model.as_ref(), &set, theta0, mc_draws, seed)
            }
            RecipeClass::Efficient => {
                efficient_sandwich(&model, theta0, mc_draws, seed, OptimalMode::default())
            }
            RecipeClass::Likelihood => Ok(CovarianceEstimate::new(
                fisher_inverse(id, theta0)?,
                CovMode::ClosedForm,
                0,
                None,
            )),
            RecipeClass::Other => Err(SmomError::Config(format!(
                "no sandwich covariance available for {recipe}"
            ))),
        },
    }
}

/// Sandwich covariance of the two-step estimator at `θ₀`.
pub fn efficient_sandwich(
    model: &Arc<dyn SteinModel>,
    theta0: &[f64],
    mc_draws: usize,
    seed: u64,
    mode: OptimalMode,
) -> Result<CovarianceEstimate> {
    let parent = model.optimal_parent(theta0);
    let (fmodel, ftheta): (&dyn SteinModel, Vec<f64>) = match &parent {
        Some((pm, pt)) => (pm.as_ref(), pt.clone()),
        None => (model.as_ref(), theta0.to_vec()),
    };
    let set = OptimalFunctionSet::new(fmodel, &ftheta, mode)?;
    sandwich_mc(model.as_ref(), &set, theta0, mc_draws, seed)
}

fn inverse_checked(info: &Matrix) -> Result<Matrix> {
    let inv = linalg::inverse(info)?.symmetrize();
    if inv.is_finite() && is_symmetric_psd(&inv) {
        Ok(inv)
    } else {
        Err(SmomError::Singular)
    }
}

fn beta_type_info(a: f64, b: f64) -> Matrix {
    let tab = raw::trigamma(a + b);
    Matrix::from_rows(&[
        vec![raw::trigamma(a) - tab, -tab],
        vec![-tab, raw::trigamma(b) - tab],
    ])
    .expect("2x2")
}

/// Inverse Fisher information `I(θ)⁻¹`.
///
/// Closed forms are used where catalogued. Other families integrate the
/// outer product of the score numerically.
pub fn fisher_inverse(id: &DistributionId, theta: &[f64]) -> Result<Matrix> {
    let model = make_model(id)?;
    model.check_theta(theta)?;
    match id {
        DistributionId::Gaussian => Ok(Matrix::diag(&[theta[1], 2.0 * theta[1] * theta[1]])),
        DistributionId::Gamma => {
            let (a, b) = (theta[0], theta[1]);
            let info = Matrix::from_rows(&[
                vec![raw::trigamma(a), -1.0 / b],
                vec![-1.0 / b, a / (b * b)],
            ])?;
            inverse_checked(&info)
        }
        DistributionId::Beta | DistributionId::GenLogistic => {
            inverse_checked(&beta_type_info(theta[0], theta[1]))
        }
        DistributionId::Cauchy => Ok(Matrix::diag(&[2.0 * theta[1].powi(2); 2])),
        DistributionId::CauchyKnownGamma { gamma } => Ok(Matrix::diag(&[2.0 * gamma * gamma])),
        DistributionId::Lomax => {
            let (a, l) = (theta[0], theta[1]);
            let s = a + 1.0;
            Matrix::from_rows(&[
                vec![s * s * a * a, s * l * (a + 2.0) * a],
                vec![s * l * (a + 2.0) * a, s * l * l * s * (a + 2.0) / a],
            ])
        }
        DistributionId::Nakagami => {
            let (m, o) = (theta[0], theta[1]);
            let d = m * raw::trigamma(m) - 1.0;
            if !(d > 0.0) {
                return Err(SmomError::Singular);
            }
            Ok(Matrix::diag(&[m / d, o * o / m]))
        }
        DistributionId::ExpPoly { p } => {
            let mom = ExpPoly::moments(theta, 2 * p);
            let mut info = Matrix::zeros(*p, *p);
            for j in 0..*p {
                for k in 0..*p {
                    info[(j, k)] = mom[j + k + 1] - mom[j] * mom[k];
                }
            }
            inverse_checked(&info)
        }
        _ => inverse_checked(&fisher_info_numeric(
            model.as_ref(),
            theta,
            QuadConfig::default(),
        )?),
    }
}

/// Fisher information `E[s sᵀ]` by adaptive quadrature of the score outer
/// product.
pub fn fisher_info_numeric(
    model: &dyn SteinModel,
    theta: &[f64],
    cfg: QuadConfig,
) -> Result<Matrix> {
    model.check_theta(theta)?;
    let p = model.dim();
    let (lo, hi) = model.support();
    let mut info = Matrix::zeros(p, p);
    for j in 0..p {
        for k in j..p {
            let v = integrate(
                |x| {
                    if !model.in_support(x) {
                        return 0.0;
                    }
                    let dens = model.pdf(theta, x);
                    if dens == 0.0 {
                        return 0.0;
                    }
                    let s = model.score(theta, x);
                    s[j] * s[k] * dens
                },
                lo,
                hi,
                cfg,
            )?;
            info[(j, k)] = v;
            info[(k, j)] = v;
        }
    }
    Ok(info)
}

/// Quantile of the chi-square distribution with two degrees of freedom.
pub fn chi2_2_quantile(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(SmomError::Config(format!(
            "confidence level must lie in (0, 1), got {q}"
        )));
    }
    Ok(-2.0 * (-q).ln_1p())
}

/// Confidence ellipse of a bivariate normal approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipse {
    /// Semi-axis lengths, largest first.
    pub semi_axes: [f64; 2],
    /// Unit axis directions matching `semi_axes`.
    pub directions: [[f64; 2]; 2],
    /// Chi-square quantile used for the radius.
    pub chi2: f64,
    /// Covariance of the estimate, `V / n`.
    pub scaled_cov: Matrix,
}

impl Ellipse {
    /// `count` boundary points around `center`, starting on the major axis.
    pub fn boundary(&self, center: [f64; 2], count: usize) -> Vec<[f64; 2]> {
        (0..count)
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count as f64;
                let (c, s) = (t.cos(), t.sin());
                let a = self.semi_axes[0] * c;
                let b = self.semi_axes[1] * s;
                [
                    center[0] + a * self.directions[0][0] + b * self.directions[1][0],
                    center[1] + a * self.directions[0][1] + b * self.directions[1][1],
                ]
            })
            .collect()
    }

    /// Area `π a b`.
    pub fn area(&self) -> f64 {
        std::f64::consts::PI * self.semi_axes[0] * self.semi_axes[1]
    }

    /// Quadratic form `dᵀ (V/n)⁻¹ d` of an offset from the centre.
    pub fn quadratic_form(&self, d: [f64; 2]) -> f64 {
        let mut acc = 0.0;
        for i in 0..2 {
            let proj = d[0] * self.directions[i][0] + d[1] * self.directions[i][1];
            let lambda = self.semi_axes[i] * self.semi_axes[i] / self.chi2;
            acc += proj * proj / lambda;
        }
        acc
    }
}

/// Number of boundary points emitted for plotting.
pub const ELLIPSE_POINTS: usize = 64;

/// `q`-confidence ellipse for an estimate with asymptotic covariance `cov`
/// from a sample of size `n`.
pub fn confidence_ellipse(cov: &Matrix, q: f64, n: usize) -> Result<Ellipse> {
    if n == 0 {
        return Err(SmomError::Config("sample size must be positive".into()));
    }
    let chi2 = chi2_2_quantile(q)?;
    let eig = linalg::sym_eig2(cov)?;
    let top = eig.values[0];
    if !(eig.values[1] > 1e-14 * top.abs()) || !top.is_finite() {
        return Err(SmomError::Singular);
    }
    let nf = n as f64;
    Ok(Ellipse {
        semi_axes: [(top * chi2 / nf).sqrt(), (eig.values[1] * chi2 / nf).sqrt()],
        directions: eig.vectors,
        chi2,
        scaled_cov: cov.scale(1.0 / nf),
    })
}

/// Asymptotic variances of Student t degrees-of-freedom estimators at one
/// grid point. `None` marks a variance that does not exist or whose
/// quadrature failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VarianceRow {
    /// Degrees of freedom.
    pub mu: f64,
    /// Stein estimator with tuning constant `κ`.
    pub st: Option<f64>,
    /// Moment estimator, defined for `μ > 4`.
    pub mo: Option<f64>,
    /// Maximum likelihood, `1/I(μ)`.
    pub mle: Option<f64>,
    /// True when a quadrature failed at this grid point.
    pub quadrature_failed: bool,
}

const CURVE_QUAD: QuadConfig = QuadConfig {
    abs_tol: 1e-12,
    rel_tol: 1e-9,
    max_subdivisions: 4000,
};

/// Student t asymptotic variance curves of the Stein, moment and maximum
/// likelihood estimators of the degrees of freedom.
pub fn student_t_variance_curve(kappa: f64, mu_grid: &[f64]) -> Result<Vec<VarianceRow>> {
    if !(kappa > 0.0) {
        return Err(SmomError::Config(format!(
            "tuning constant must be positive, got {kappa}"
        )));
    }
    if let Some(m) = mu_grid.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
        return Err(SmomError::Config(format!(
            "degrees of freedom must be positive, got {m}"
        )));
    }
    let id = DistributionId::StudentT;
    let model = make_model(&id)?;
    let st = recipe_functions(&id, "ST", Some(kappa))?;
    let mo = recipe_functions(&id, "MO", None)?;
    Ok(mu_grid
        .iter()
        .map(|&mu| {
            let mut failed = false;
            let mut run = |r: Result<Matrix>| match r {
                Ok(m) if m[(0, 0)].is_finite() && m[(0, 0)] > 0.0 => Some(m[(0, 0)]),
                _ => {
                    failed = true;
                    None
                }
            };
            let st_v = if mu > 1.0 {
                run(sandwich_quadrature(model.as_ref(), &st, &[mu], CURVE_QUAD))
            } else {
                None
            };
            let mo_v = if mu > 4.0 {
                run(sandwich_quadrature(model.as_ref(), &mo, &[mu], CURVE_QUAD))
            } else {
                None
            };
            let mle_v = run(
                fisher_info_numeric(model.as_ref(), &[mu], CURVE_QUAD).and_then(|i| {
                    if i[(0, 0)] > 0.0 {
                        Ok(Matrix::diag(&[1.0 / i[(0, 0)]]))
                    } else {
                        Err(SmomError::Singular)
                    }
                }),
            );
            VarianceRow {
                mu,
                st: st_v,
                mo: mo_v,
                mle: mle_v,
                quadrature_failed: failed,
            }
        })
        .collect())
}

/// Student t Fisher information by composite Simpson integration on the
/// compactified line, an independent cross-check of the adaptive rule for
/// `μ ≥ 2`.
pub fn student_t_fisher_simpson(mu: f64) -> Result<f64> {
    let model = make_model(&DistributionId::StudentT)?;
    model.check_theta(&[mu])?;
    let theta = [mu];
    let tmap = |t: f64| -> f64 {
        let x = t / (1.0 - t * t);
        let dx = (1.0 + t * t) / (1.0 - t * t).powi(2);
        let s = model.score(&theta, x)[0];
        s * s * model.pdf(&theta, x) * dx
    };
    let half = simpson(tmap, 0.0, 1.0 - 1e-12, 1e-12);
    Ok(2.0 * half)
}
