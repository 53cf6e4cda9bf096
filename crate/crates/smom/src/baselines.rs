//! Competitor estimators and the optimisers they rely on.
//!
//! Maximum likelihood estimators are solved from their score equations
//! where a one- or two-dimensional root solve suffices and by a
//! Nelder–Mead simplex on the negative log-likelihood otherwise. The module
//! also provides L-estimators and the Pitman estimator of a Cauchy location,
//! the noise-contrastive and score-matching estimators of exponential
//! polynomial models, the generalised logistic moment estimator and the
//! Cauchy median estimator.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{
    estimate, facts, make_model, softplus, DistributionId, ExpPoly, RecipeId,
};
use crate::error::{Result, SmomError};
use crate::linalg::{self, Matrix};
use crate::numeric::{expand_bracket, mean, mean_of, median, safeguarded_newton, sorted, KahanSum};
use crate::rng::rng_from_seed;
use crate::specfun::raw;
use crate::steincore::{EstimateResult, Status, SteinModel};

/// Optimisation algorithm family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Downhill simplex.
    #[default]
    NelderMead,
    /// Newton iteration on a scalar equation.
    Newton1d,
    /// Bracketing bisection polished with Newton steps.
    BisectionNewtonSafeguarded,
}

/// Tolerances and budgets of an optimiser.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Algorithm family.
    pub algorithm: Algorithm,
    /// Maximum number of objective evaluations.
    pub max_evals: usize,
    /// Relative tolerance on the simplex diameter.
    pub x_tol: f64,
    /// Absolute tolerance on the spread of simplex values.
    pub f_tol: f64,
    /// Wall-clock budget per estimate.
    pub time_budget_seconds: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            algorithm: Algorithm::NelderMead,
            max_evals: 20_000,
            x_tol: 1e-10,
            f_tol: 1e-12,
            time_budget_seconds: 20.0,
        }
    }
}

impl OptimizerConfig {
    /// Rejects non-positive tolerances and negative budgets.
    pub fn validate(&self) -> Result<()> {
        if !(self.x_tol > 0.0 && self.f_tol > 0.0) {
            return Err(SmomError::Config(
                "optimizer tolerances must be positive".into(),
            ));
        }
        if !(self.time_budget_seconds >= 0.0) {
            return Err(SmomError::Config("time budget must be non-negative".into()));
        }
        Ok(())
    }

    fn exhausted(&self) -> bool {
        self.max_evals == 0 || self.time_budget_seconds <= 0.0
    }
}

/// Outcome of [`nelder_mead`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimOutcome {
    /// Best point found.
    pub argmin: Vec<f64>,
    /// Objective value at `argmin`.
    pub min: f64,
    /// `Ok`, `TimedOut` or `DidNotConverge`.
    pub status: Status,
    /// Number of objective evaluations.
    pub evals: usize,
    /// Spread of objective values over the final simplex.
    pub f_spread: f64,
}

struct Clock {
    #[cfg(not(target_arch = "wasm32"))]
    start: std::time::Instant,
    budget: f64,
}

impl Clock {
    fn new(budget: f64) -> Self {
        Self {
            #[cfg(not(target_arch = "wasm32"))]
            start: std::time::Instant::now(),
            budget,
        }
    }

    #[cfg(not(target_arch = "wasm32"))]
    fn expired(&self) -> bool {
        self.start.elapsed().as_secs_f64() > self.budget
    }

    #[cfg(target_arch = "wasm32")]
    fn expired(&self) -> bool {
        self.budget <= 0.0
    }
}

/// Minimises `objective` with the Nelder–Mead simplex method.
///
/// Non-finite objective values are treated as `+∞`, which keeps the simplex
/// inside the feasible region. After convergence the simplex is rebuilt
/// once around the best point to guard against premature collapse.
pub fn nelder_mead(
    objective: impl Fn(&[f64]) -> f64,
    init: &[f64],
    cfg: &OptimizerConfig,
) -> OptimOutcome {
    let f = |x: &[f64]| {
        let v = objective(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if cfg.exhausted() {
        return OptimOutcome {
            argmin: init.to_vec(),
            min: f64::NAN,
            status: Status::TimedOut,
            evals: 0,
            f_spread: f64::NAN,
        };
    }
    let clock = Clock::new(cfg.time_budget_seconds);
    let mut evals = 0usize;
    let mut best = init.to_vec();
    let mut restarted = false;
    loop {
        let (x, fx, spread, status) = simplex_run(&f, &best, cfg, &clock, &mut evals);
        let improved = fx < f(&best) - cfg.f_tol;
        evals += 1;
        best = x;
        if status != Status::Ok || restarted || !improved {
            return OptimOutcome {
                argmin: best,
                min: fx,
                status,
                evals,
                f_spread: spread,
            };
        }
        restarted = true;
    }
}

fn simplex_run(
    f: &dyn Fn(&[f64]) -> f64,
    start: &[f64],
    cfg: &OptimizerConfig,
    clock: &Clock,
    evals: &mut usize,
) -> (Vec<f64>, f64, f64, Status) {
    let d = start.len();
    let mut pts: Vec<Vec<f64>> = vec![start.to_vec()];
    for i in 0..d {
        let mut p = start.to_vec();
        p[i] += if p[i] != 0.0 { 0.05 * p[i] } else { 0.00025 };
        pts.push(p);
    }
    let mut vals: Vec<f64> = pts.iter().map(|p| f(p)).collect();
    *evals += d + 1;
    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    loop {
        let mut order: Vec<usize> = (0..=d).collect();
        order.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
        pts = order.iter().map(|&i| pts[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();
        let spread = vals[d] - vals[0];
        let scale = 1.0 + pts[0].iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let diam = pts[1..]
            .iter()
            .flat_map(|p| p.iter().zip(&pts[0]).map(|(a, b)| (a - b).abs()))
            .fold(0.0f64, f64::max);
        if vals[0].is_finite() && spread <= cfg.f_tol && diam <= cfg.x_tol * scale {
            return (pts[0].clone(), vals[0], spread, Status::Ok);
        }
        if *evals >= cfg.max_evals || clock.expired() {
            return (pts[0].clone(), vals[0], spread, Status::TimedOut);
        }
        let centroid: Vec<f64> = (0..d)
            .map(|j| pts[..d].iter().map(|p| p[j]).sum::<f64>() / d as f64)
            .collect();
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&pts[d])
                .map(|(c, w)| c + t * (w - c))
                .collect()
        };
        let xr = along(-alpha);
        let fr = f(&xr);
        *evals += 1;
        if fr < vals[0] {
            let xe = along(-gamma);
            let fe = f(&xe);
            *evals += 1;
            if fe < fr {
                pts[d] = xe;
                vals[d] = fe;
            } else {
                pts[d] = xr;
                vals[d] = fr;
            }
            continue;
        }
        if fr < vals[d - 1] {
            pts[d] = xr;
            vals[d] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[d] {
            let xc = along(-rho);
            let fc = f(&xc);
            (xc, fc)
        } else {
            let xc = along(rho);
            let fc = f(&xc);
            (xc, fc)
        };
        *evals += 1;
        if fc < vals[d].min(fr) {
            pts[d] = xc;
            vals[d] = fc;
            continue;
        }
        for i in 1..=d {
            let shrunk: Vec<f64> = pts[i]
                .iter()
                .zip(&pts[0])
                .map(|(p, b)| b + sigma * (p - b))
                .collect();
            vals[i] = f(&shrunk);
            pts[i] = shrunk;
        }
        *evals += d;
    }
}

/// Solves `log a − ψ(a) = s` for `a > 0`, given `s > 0`.
pub fn solve_log_minus_digamma(s: f64) -> Result<f64> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(SmomError::domain(
            "solve_log_minus_digamma",
            format!("right-hand side {s} must be positive"),
        ));
    }
    let g = |a: f64| a.ln() - raw::digamma(a) - s;
    let guess = (3.0 - s + ((s - 3.0) * (s - 3.0) + 24.0 * s).sqrt()) / (12.0 * s);
    let (lo, hi) = expand_bracket(g, 0.5 * guess, 2.0 * guess, 0.0, 400)
        .ok_or_else(|| SmomError::domain("solve_log_minus_digamma", "no sign change found"))?;
    let root = safeguarded_newton(|a| (g(a), 1.0 / a - raw::trigamma(a)), lo, hi, 1e-15, 200)?;
    Ok(root)
}

fn ml_tag(id: &DistributionId) -> String {
    format!("{id}:ML")
}

fn explicit_init(id: &DistributionId, tag: &str, sample: &[f64]) -> Option<Vec<f64>> {
    let r = estimate(&RecipeId::new(id.clone(), tag), sample).ok()?;
    r.ok_theta().map(<[f64]>::to_vec)
}

/// Maximum likelihood estimator.
///
/// `init` overrides the default starting value of iterative solvers.
pub fn mle(
    id: &DistributionId,
    sample: &[f64],
    init: Option<&[f64]>,
    cfg: &OptimizerConfig,
) -> Result<EstimateResult> {
    cfg.validate()?;
    let model = make_model(id)?;
    let tag = ml_tag(id);
    if sample.len() < model.dim() {
        return Err(SmomError::Config(format!(
            "{tag} needs at least {} observations",
            model.dim()
        )));
    }
    if let Some(x) = sample.iter().find(|&&x| !model.admits(x)) {
        return Err(SmomError::domain(
            "mle",
            format!("observation {x} outside the support of {id}"),
        ));
    }
    let fail = |s: Status| Ok(EstimateResult::failed(s, None, tag.clone()));
    match id {
        DistributionId::Gaussian => {
            let m = mean(sample);
            let v = mean_of(sample, |x| (x - m) * (x - m));
            if v > 0.0 {
                Ok(EstimateResult::ok(vec![m, v], 0.0, tag))
            } else {
                fail(Status::OutOfSpace)
            }
        }
        DistributionId::Gamma => {
            if sample.iter().any(|&x| x <= 0.0) {
                return fail(Status::DoesNotExist);
            }
            let m = mean(sample);
            let s = m.ln() - mean_of(sample, f64::ln);
            if !(s > 0.0) {
                return fail(Status::DoesNotExist);
            }
            let a = solve_log_minus_digamma(s)?;
            let theta = vec![a, a / m];
            let residual = (a.ln() - raw::digamma(a) - s).abs();
            Ok(EstimateResult::ok(theta, residual, tag))
        }
        DistributionId::Nakagami => {
            if sample.iter().any(|&x| x <= 0.0) {
                return fail(Status::DoesNotExist);
            }
            let o = mean_of(sample, |x| x * x);
            let s = o.ln() - mean_of(sample, |x| 2.0 * x.ln());
            if !(s > 0.0) {
                return fail(Status::DoesNotExist);
            }
            let m = solve_log_minus_digamma(s)?;
            let residual = (m.ln() - raw::digamma(m) - s).abs();
            Ok(EstimateResult::ok(vec![m, o], residual, tag))
        }
        DistributionId::Beta => {
            if sample.iter().any(|&x| x <= 0.0 || x >= 1.0) {
                return fail(Status::DoesNotExist);
            }
            let l1 = mean_of(sample, f64::ln);
            let l2 = mean_of(sample, |x| (-x).ln_1p());
            let start = init
                .map(<[f64]>::to_vec)
                .or_else(|| explicit_init(id, "LOG", sample))
                .unwrap_or_else(|| vec![1.0, 1.0]);
            Ok(digamma_system(l1, l2, &start, cfg.max_evals.max(1), &tag))
        }
        DistributionId::Lomax => lomax_mle(sample, &tag),
        DistributionId::TruncNormal { a, b } => {
            if !facts::trunc_normal_mle_exists(sample, *a, *b) {
                return fail(Status::DoesNotExist);
            }
            let start = init
                .map(<[f64]>::to_vec)
                .or_else(|| explicit_init(id, "ST-poly", sample))
                .unwrap_or_else(|| {
                    let m = mean(sample);
                    vec![m, mean_of(sample, |x| (x - m) * (x - m)).sqrt()]
                });
            simplex_mle(model.as_ref(), sample, &start, cfg, tag)
        }
        DistributionId::Cauchy => {
            let start = init.map(<[f64]>::to_vec).unwrap_or_else(|| {
                let (m, g) = cauchy_median(sample);
                vec![m, if g > 0.0 { g } else { 1.0 }]
            });
            simplex_mle(model.as_ref(), sample, &start, cfg, tag)
        }
        DistributionId::CauchyKnownGamma { .. } => {
            let start = init
                .map(<[f64]>::to_vec)
                .unwrap_or_else(|| vec![median(sample)]);
            simplex_mle(model.as_ref(), sample, &start, cfg, tag)
        }
        DistributionId::StudentT => {
            let start = init
                .map(<[f64]>::to_vec)
                .or_else(|| explicit_init(id, "ST", sample))
                .unwrap_or_else(|| vec![5.0]);
            simplex_mle(model.as_ref(), sample, &start, cfg, tag)
        }
        DistributionId::TruncInvGamma { .. } => {
            let start = init
                .map(<[f64]>::to_vec)
                .or_else(|| explicit_init(id, "ST", sample))
                .unwrap_or_else(|| id.default_theta());
            simplex_mle(model.as_ref(), sample, &start, cfg, tag)
        }
        DistributionId::GenLogistic => {
            let start = init.map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0, 1.0]);
            simplex_mle(model.as_ref(), sample, &start, cfg, tag)
        }
        DistributionId::ExpPoly { p } => {
            let start = init
                .map(<[f64]>::to_vec)
                .or_else(|| explicit_init(id, "ST2", sample))
                .unwrap_or_else(|| vec![-1.0; *p]);
            simplex_mle(model.as_ref(), sample, &start, cfg, tag)
        }
    }
}

fn simplex_mle(
    model: &dyn SteinModel,
    sample: &[f64],
    start: &[f64],
    cfg: &OptimizerConfig,
    tag: String,
) -> Result<EstimateResult> {
    if !model.in_param_space(start) {
        return Ok(EstimateResult::failed(
            Status::OutOfSpace,
            Some(start.to_vec()),
            tag,
        ));
    }
    let n = sample.len() as f64;
    let objective = |t: &[f64]| {
        if model.in_param_space(t) {
            -model.log_likelihood(t, sample) / n
        } else {
            f64::INFINITY
        }
    };
    let out = nelder_mead(objective, start, cfg);
    let mut r = match out.status {
        Status::Ok if model.in_param_space(&out.argmin) && out.min.is_finite() => {
            EstimateResult::ok(out.argmin, out.f_spread, tag)
        }
        Status::Ok => EstimateResult::failed(Status::DidNotConverge, Some(out.argmin), tag),
        s => EstimateResult::failed(s, Some(out.argmin), tag),
    };
    r.iterations = Some(out.evals);
    Ok(r)
}

/// Damped Newton solve of `ψ(α) − ψ(α+β) = l1`, `ψ(β) − ψ(α+β) = l2`.
fn digamma_system(l1: f64, l2: f64, start: &[f64], max_iter: usize, tag: &str) -> EstimateResult {
    let eq = |a: f64, b: f64| {
        let s = raw::digamma(a + b);
        [raw::digamma(a) - s - l1, raw::digamma(b) - s - l2]
    };
    let (mut a, mut b) = (start[0], start[1]);
    if !(a > 0.0 && b > 0.0) {
        a = 1.0;
        b = 1.0;
    }
    let mut g = eq(a, b);
    for it in 0..max_iter.min(500) {
        let norm = g[0].hypot(g[1]);
        if norm <= 1e-12 {
            let mut r = EstimateResult::ok(vec![a, b], norm, tag);
            r.iterations = Some(it);
            return r;
        }
        let ts = raw::trigamma(a + b);
        let j = [[raw::trigamma(a) - ts, -ts], [-ts, raw::trigamma(b) - ts]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 0.0) {
            break;
        }
        let da = (g[0] * j[1][1] - g[1] * j[0][1]) / det;
        let db = (j[0][0] * g[1] - j[1][0] * g[0]) / det;
        let mut step = 1.0;
        loop {
            let (na, nb) = (a - step * da, b - step * db);
            if na > 0.0 && nb > 0.0 {
                let ng = eq(na, nb);
                if ng[0].hypot(ng[1]) < norm || step < 1e-12 {
                    a = na;
                    b = nb;
                    g = ng;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-300 {
                return EstimateResult::failed(Status::DidNotConverge, Some(vec![a, b]), tag);
            }
        }
    }
    let norm = g[0].hypot(g[1]);
    if norm <= 1e-8 {
        EstimateResult::ok(vec![a, b], norm, tag)
    } else {
        EstimateResult::failed(Status::DidNotConverge, Some(vec![a, b]), tag)
    }
}

/// Lomax maximum likelihood by profiling out the shape.
fn lomax_mle(sample: &[f64], tag: &str) -> Result<EstimateResult> {
    if !facts::lomax_mle_exists(sample) {
        return Ok(EstimateResult::failed(Status::DoesNotExist, None, tag));
    }
    let n = sample.len() as f64;
    let alpha_of = |l: f64| {
        let mut t = KahanSum::new();
        for &x in sample {
            t.add((x / l).ln_1p());
        }
        n / t.total()
    };
    let h = |u: f64| {
        let l = u.exp();
        let a = alpha_of(l);
        let mut s = KahanSum::new();
        for &x in sample {
            s.add(x / (l + x));
        }
        ((a + 1.0) * s.total() - n) / n
    };
    let m = mean(sample);
    let centre = m.ln();
    let mut lo = None;
    let mut prev = (centre - 30.0, h(centre - 30.0));
    let mut u = centre - 30.0;
    while u < centre + 60.0 {
        u += 0.25;
        let v = h(u);
        if prev.1 > 0.0 && v <= 0.0 {
            lo = Some((prev.0, u));
            break;
        }
        prev = (u, v);
    }
    let Some((a, b)) = lo else {
        return Ok(EstimateResult::failed(Status::DidNotConverge, None, tag));
    };
    let root = safeguarded_newton(
        |u| {
            let e = 1e-6 * (1.0 + u.abs());
            (h(u), (h(u + e) - h(u - e)) / (2.0 * e))
        },
        a,
        b,
        1e-15,
        300,
    )?;
    let l = root.exp();
    let alpha = alpha_of(l);
    let model = crate::distributions::Lomax;
    let score = mean_score(&model, &[alpha, l], sample);
    Ok(EstimateResult::ok(
        vec![alpha, l],
        linalg::norm2(&score),
        tag,
    ))
}

/// Sample mean of the score vector.
pub fn mean_score(model: &dyn SteinModel, theta: &[f64], sample: &[f64]) -> Vec<f64> {
    let scores = model.score_batch(theta, sample);
    (0..model.dim())
        .map(|i| {
            let mut acc = KahanSum::new();
            for s in &scores {
                acc.add(s[i]);
            }
            acc.total() / sample.len() as f64
        })
        .collect()
}

/// Cauchy location L-estimators based on order statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LVariant {
    /// Trimmed mean dropping `⌊n·trim⌋` points from each end.
    L1 {
        /// Trimming fraction in `(0, 0.5)`.
        trim: f64,
    },
    /// Five order statistics with fixed weights.
    L2,
    /// Smooth weights `J(i/(n+1))`, normalised to sum one.
    L3,
    /// Cosine-power weights with exponent `2 + eps`, normalised to sum one.
    L4 {
        /// Finite-sample correction of the exponent.
        eps: f64,
    },
}

/// Default trimming fraction of the L1 estimator.
pub const L1_TRIM: f64 = 0.38;

const L2_PROBS: [f64; 5] = [0.13, 0.4, 0.5, 0.6, 0.87];
const L2_WEIGHTS: [f64; 5] = [-0.052, 0.3485, 0.407, 0.3485, -0.052];

/// Location estimate of a Cauchy sample from its order statistics.
pub fn cauchy_l_estimator(variant: LVariant, sample: &[f64]) -> Result<f64> {
    let n = sample.len();
    let min_n = if variant == LVariant::L2 { 8 } else { 3 };
    if n < min_n {
        return Err(SmomError::Config(format!(
            "L-estimator needs at least {min_n} observations, got {n}"
        )));
    }
    let s = sorted(sample);
    let nf = n as f64;
    let weights: Vec<f64> = match variant {
        LVariant::L1 { trim } => {
            if !(trim > 0.0 && trim < 0.5) {
                return Err(SmomError::Config(format!(
                    "trimming fraction must lie in (0, 0.5), got {trim}"
                )));
            }
            let r = (nf * trim).floor() as usize;
            let kept = (n - 2 * r) as f64;
            (0..n)
                .map(|i| if i >= r && i < n - r { 1.0 / kept } else { 0.0 })
                .collect()
        }
        LVariant::L2 => {
            let mut w = vec![0.0; n];
            for (p, wt) in L2_PROBS.iter().zip(L2_WEIGHTS) {
                let idx = (nf * p).floor() as usize;
                w[idx - 1] += wt;
            }
            w
        }
        LVariant::L3 => {
            let raw: Vec<f64> = (1..=n).map(|i| l3_weight(i as f64 / (nf + 1.0))).collect();
            let c: f64 = raw.iter().sum();
            raw.iter().map(|w| w / c).collect()
        }
        LVariant::L4 { eps } => {
            let raw: Vec<f64> = (1..=n)
                .map(|i| {
                    let v = (i as f64 - 0.5) / nf - 0.5;
                    (std::f64::consts::PI * v).cos().powf(2.0 + eps)
                        * (2.0 * std::f64::consts::PI * v).cos()
                })
                .collect();
            let c: f64 = raw.iter().sum();
            raw.iter().map(|w| w / c).collect()
        }
    };
    let mut acc = KahanSum::new();
    for (w, x) in weights.iter().zip(&s) {
        acc.add(w * x);
    }
    Ok(acc.total())
}

fn l3_weight(u: f64) -> f64 {
    let v = u - 0.5;
    if v.abs() < 1e-12 {
        4.0
    } else {
        let pi = std::f64::consts::PI;
        (4.0 * pi * v).sin() / (pi * v).tan()
    }
}

/// Pitman location estimator of a Cauchy sample with known scale.
///
/// Observations are centred at the sample median and complex weights are
/// accumulated as log-modulus and argument. Tied
/// observations are merged into one point whose factors enter with their
/// multiplicity. Returns `None` when the real parts of the weights cancel.
pub fn pitman(sample: &[f64], gamma: f64) -> Result<Option<f64>> {
    Ok(pitman_with_condition(sample, gamma)?.map(|(mu, _)| mu))
}

/// Pitman estimate together with the cancellation ratio
/// `Σ|Re ω| / |Σ Re ω|` of its weights, which bounds the amplification of
/// rounding errors in the weighted mean.
pub fn pitman_with_condition(sample: &[f64], gamma: f64) -> Result<Option<(f64, f64)>> {
    if sample.len() < 2 {
        return Err(SmomError::Config(
            "Pitman estimator needs at least 2 observations".into(),
        ));
    }
    if !(gamma > 0.0) {
        return Err(SmomError::InvalidParameter(format!(
            "scale must be positive, got {gamma}"
        )));
    }
    let s = sorted(sample);
    let anchor = median(&s);
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for x in s.iter().map(|x| x - anchor) {
        match groups.last_mut() {
            Some((v, c)) if *v == x => *c += 1.0,
            _ => groups.push((x, 1.0)),
        }
    }
    let g4 = 4.0 * gamma * gamma;
    let polar: Vec<(f64, f64)> = groups
        .iter()
        .enumerate()
        .map(|(k, &(xk, _))| {
            let mut log_mod = KahanSum::new();
            let mut arg = KahanSum::new();
            for (j, &(xj, cj)) in groups.iter().enumerate() {
                if j == k {
                    continue;
                }
                let d = xk - xj;
                let a = 2.0 * gamma / d;
                log_mod.add(cj * (0.5 * a.mul_add(a, 1.0).ln() - d.mul_add(d, g4).ln()));
                arg.add(-cj * a.atan());
            }
            (log_mod.total(), arg.total())
        })
        .collect();
    let top = polar.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let mut num = KahanSum::new();
    let mut den = KahanSum::new();
    for ((lm, th), &(x, c)) in polar.iter().zip(&groups) {
        let re = c * (lm - top).exp() * th.cos();
        num.add(re * x);
        den.add(re);
    }
    let total_scale: f64 = polar
        .iter()
        .zip(&groups)
        .map(|((lm, _), (_, c))| c * (lm - top).exp())
        .sum();
    if den.total().abs() <= 1e-12 * total_scale {
        return Ok(None);
    }
    let abs_re: f64 = polar
        .iter()
        .zip(&groups)
        .map(|((lm, th), (_, c))| c * (lm - top).exp() * th.cos().abs())
        .sum();
    Ok(Some((
        anchor + num.total() / den.total(),
        abs_re / den.total().abs(),
    )))
}

/// Cauchy median estimator: the sample median and the median absolute
/// deviation from it.
pub fn cauchy_median(sample: &[f64]) -> (f64, f64) {
    let m = median(sample);
    let dev: Vec<f64> = sample.iter().map(|x| (x - m).abs()).collect();
    (m, median(&dev))
}

/// Logistic noise-contrastive weight `r_ν(u) = 1/(1 + ν e^{−u})`.
pub fn nc_weight(nu: f64, u: f64) -> f64 {
    1.0 / (1.0 + nu * (-u).exp())
}

/// Noise-contrastive objective `J(θ)` against exponential noise with rate
/// `lambda`.
pub fn nc_objective(theta: &[f64], sample: &[f64], noise: &[f64], lambda: f64, nu: f64) -> f64 {
    let log_c = ExpPoly::log_normaliser(theta);
    let ln_nu = nu.ln();
    let g = |x: f64| ExpPoly::exponent(theta, x) - log_c - (lambda.ln() - lambda * x);
    let mut acc = KahanSum::new();
    for &x in sample {
        acc.add(-softplus(ln_nu - g(x)));
    }
    for &y in noise {
        acc.add(-softplus(g(y) - ln_nu));
    }
    acc.total() / sample.len() as f64
}

/// Noise-contrastive estimator of an exponential polynomial model with
/// `⌊ν n⌋` exponential noise draws of mean `X̄`.
pub fn noise_contrastive_exp_poly(
    sample: &[f64],
    p: usize,
    nu: f64,
    seed: u64,
    cfg: &OptimizerConfig,
) -> Result<EstimateResult> {
    cfg.validate()?;
    let id = DistributionId::ExpPoly { p };
    let model = ExpPoly::new(p)?;
    let tag = format!("{id}:NC");
    if sample.len() < p || sample.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(SmomError::Config(
            "noise-contrastive estimation needs a positive sample of size at least p".into(),
        ));
    }
    if !(nu > 0.0) {
        return Err(SmomError::Config(format!(
            "noise ratio must be positive, got {nu}"
        )));
    }
    let lambda = 1.0 / mean(sample);
    let d = (nu * sample.len() as f64).round() as usize;
    let mut rng = rng_from_seed(seed);
    let noise: Vec<f64> = (0..d)
        .map(|_| -(1.0 - rng.random::<f64>()).ln() / lambda)
        .collect();
    let start = explicit_init(&id, "ST2", sample).unwrap_or_else(|| vec![-1.0; p]);
    let objective = |t: &[f64]| {
        if model.in_param_space(t) {
            -nc_objective(t, sample, &noise, lambda, nu)
        } else {
            f64::INFINITY
        }
    };
    let out = nelder_mead(objective, &start, cfg);
    let mut r = match out.status {
        Status::Ok if model.in_param_space(&out.argmin) => {
            EstimateResult::ok(out.argmin, out.f_spread, tag)
        }
        Status::Ok => EstimateResult::failed(Status::OutOfSpace, Some(out.argmin), tag),
        s => EstimateResult::failed(s, Some(out.argmin), tag),
    };
    r.iterations = Some(out.evals);
    Ok(r)
}

/// Score-matching objective for the exponential polynomial model.
pub fn score_matching_objective(theta: &[f64], sample: &[f64]) -> f64 {
    let mut acc = KahanSum::new();
    for &x in sample {
        let mut lin = 0.0;
        let mut quad = 0.0;
        let mut xp = 1.0;
        for (j0, t) in theta.iter().enumerate() {
            let j = (j0 + 1) as f64;
            xp *= x;
            lin += j * (j + 1.0) * t * xp;
            quad += j * t * xp;
        }
        acc.add(lin + 0.5 * quad * quad);
    }
    acc.total() / sample.len() as f64
}

/// Score-matching estimator in closed form from the normal equations.
pub fn score_matching_exp_poly(sample: &[f64], p: usize) -> Result<EstimateResult> {
    let id = DistributionId::ExpPoly { p };
    let model = ExpPoly::new(p)?;
    let tag = format!("{id}:SM");
    if sample.len() < p || sample.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(SmomError::Config(
            "score matching needs a positive sample of size at least p".into(),
        ));
    }
    let mut a = Matrix::zeros(p, p);
    let mut b = vec![0.0; p];
    for i in 1..=p {
        let fi = i as f64;
        b[i - 1] = -mean_of(sample, |x| fi * (fi + 1.0) * x.powi(i as i32));
        for j in 1..=p {
            let fj = j as f64;
            a[(i - 1, j - 1)] = mean_of(sample, |x| fi * fj * x.powi((i + j) as i32));
        }
    }
    let theta = match linalg::solve(&a, &b) {
        Ok(t) => t,
        Err(SmomError::Singular) => return Ok(EstimateResult::failed(Status::Singular, None, tag)),
        Err(e) => return Err(e),
    };
    let r = a.matvec(&theta)?;
    let residual = linalg::norm2(&r.iter().zip(&b).map(|(u, v)| u - v).collect::<Vec<_>>());
    if model.in_param_space(&theta) {
        Ok(EstimateResult::ok(theta, residual, tag))
    } else {
        Ok(EstimateResult::failed(Status::OutOfSpace, Some(theta), tag))
    }
}

/// Generalised logistic moment estimator solving
/// `ψ(α) − ψ(β) = X̄` and `ψ′(α) + ψ′(β) = S²` by damped Newton from
/// `(1, 1)`.
pub fn gen_logistic_moment(sample: &[f64], cfg: &OptimizerConfig) -> Result<EstimateResult> {
    cfg.validate()?;
    let tag = format!("{}:MO", DistributionId::GenLogistic);
    if sample.len() < 2 {
        return Err(SmomError::Config(
            "moment estimator needs at least 2 observations".into(),
        ));
    }
    let m1 = mean(sample);
    let v = mean_of(sample, |x| (x - m1) * (x - m1));
    let eq = |a: f64, b: f64| {
        [
            raw::digamma(a) - raw::digamma(b) - m1,
            raw::trigamma(a) + raw::trigamma(b) - v,
        ]
    };
    let tetragamma = |x: f64| {
        let h = 1e-5 * x.max(1e-3);
        (raw::trigamma(x + h) - raw::trigamma(x - h)) / (2.0 * h)
    };
    let (mut a, mut b) = (1.0, 1.0);
    let mut g = eq(a, b);
    let max_iter = cfg.max_evals.clamp(1, 500);
    for it in 0..max_iter {
        let norm = g[0].hypot(g[1]);
        if norm <= 1e-12 {
            let mut r = EstimateResult::ok(vec![a, b], norm, tag);
            r.iterations = Some(it);
            return Ok(r);
        }
        let j = [
            [raw::trigamma(a), -raw::trigamma(b)],
            [tetragamma(a), tetragamma(b)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.abs() > 0.0) || !det.is_finite() {
            break;
        }
        let da = (g[0] * j[1][1] - g[1] * j[0][1]) / det;
        let db = (j[0][0] * g[1] - j[1][0] * g[0]) / det;
        let mut step = 1.0;
        let mut moved = false;
        while step > 1e-12 {
            let (na, nb) = (a - step * da, b - step * db);
            if na > 0.0 && nb > 0.0 {
                let ng = eq(na, nb);
                if ng[0].hypot(ng[1]) < norm {
                    a = na;
                    b = nb;
                    g = ng;
                    moved = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !moved {
            break;
        }
    }
    let norm = g[0].hypot(g[1]);
    if norm <= 1e-8 {
        Ok(EstimateResult::ok(vec![a, b], norm, tag))
    } else {
        Ok(EstimateResult::failed(
            Status::DidNotConverge,
            Some(vec![a, b]),
            tag,
        ))
    }
}
