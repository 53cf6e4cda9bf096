//! Acceptance gate for the fifteen numbered criteria.
//!
//! Prints one line per criterion:
//!
//! ```text
//! AC-07 PASS  closed-form vs Monte Carlo covariance (3%) | worst 1.2% at nakagami:ST (0,0)
//! ```
//!
//! Criteria listed in `DOCUMENTED_DEVIATIONS` may fail without failing the
//! run; every other failure exits with status 1. Set
//! `SMOM_ACCEPTANCE_STRICT=1` to fail on any criterion, and
//! `SMOM_ACCEPTANCE_REPS` to override the replication count of the table
//! criteria (default 10000; criterion 13 always uses 2000).

use std::time::Instant;

use smom::asymptotics::{closed_form_cov, fisher_inverse, sandwich_cov, CovMode, DEFAULT_MC_DRAWS};
use smom::baselines::{
    cauchy_l_estimator, nelder_mead, pitman, pitman_with_condition, score_matching_exp_poly,
    score_matching_objective, LVariant, OptimizerConfig,
};
use smom::distributions::{
    canonical_functions, estimate, explicit_tags, facts, make_model, recipe_functions, sample,
    DistributionId, RecipeId,
};
use smom::efficient::{iterate_to_mle, OptimalMode};
use smom::linalg::spectral_norm;
use smom::mcbench::{run_scenario, CellResult, Process, ScenarioConfig, SimulationTable};
use smom::numeric::{mean, mean_of};
use smom::recipes::{run_recipe, RecipeOptions};
use smom::rng::split_seed;
use smom::specfun::{digamma, ln_gamma};
use smom::steincore::{build_empirical_system, stein_apply, stein_residual, TestFunctionSet};
use smom::Matrix;

const DOCUMENTED_DEVIATIONS: [u8; 3] = [12, 13, 14];
const MASTER_SEED: u64 = 20_240_601;

struct Outcome {
    id: u8,
    title: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

fn run(id: u8, title: &'static str, check: impl FnOnce() -> (bool, String)) -> Outcome {
    let start = Instant::now();
    let (pass, detail) = match std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)) {
        Ok(r) => r,
        Err(e) => {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            (false, format!("panicked: {msg}"))
        }
    };
    let out = Outcome {
        id,
        title,
        pass,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    };
    println!(
        "AC-{:02} {}  {} | {} [{:.1}s]",
        out.id,
        if out.pass { "PASS" } else { "FAIL" },
        out.title,
        out.detail,
        out.seconds
    );
    out
}

fn table_reps() -> usize {
    std::env::var("SMOM_ACCEPTANCE_REPS")
        .ok()
        .and_then(|s| s.parse().ok())
        .filter(|&r| r > 0)
        .unwrap_or(10_000)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

/// Entrywise relative error with off-diagonal entries scaled by the
/// geometric mean of the corresponding diagonal entries.
fn entrywise_rel(m: &Matrix, reference: &Matrix) -> (f64, (usize, usize)) {
    let mut worst = (0.0, (0, 0));
    for i in 0..reference.rows() {
        for j in 0..reference.cols() {
            let scale = reference[(i, j)]
                .abs()
                .max((reference[(i, i)] * reference[(j, j)]).abs().sqrt());
            let e = (m[(i, j)] - reference[(i, j)]).abs() / scale;
            if e > worst.0 {
                worst = (e, (i, j));
            }
        }
    }
    worst
}

// ---------------------------------------------------------------- criterion 1

fn stein_identity_null() -> (bool, String) {
    let draws = 100_000;
    let mut failures = Vec::new();
    let mut worst = 0.0_f64;
    for (k, id) in DistributionId::catalog().iter().enumerate() {
        let model = make_model(id).unwrap();
        let theta = id.default_theta();
        let fset = canonical_functions(id);
        let xs = sample(id, &theta, draws, split_seed(MASTER_SEED, 1, k as u64)).unwrap();
        let q = fset.count();
        let mut values = vec![Vec::with_capacity(draws); q];
        for &x in &xs {
            let v = stein_apply(model.as_ref(), &theta, &fset, x).unwrap();
            for j in 0..q {
                values[j].push(v[j]);
            }
        }
        for (j, v) in values.iter().enumerate() {
            let m = mean(v);
            let sd = mean_of(v, |y| (y - m) * (y - m)).sqrt();
            let z = m.abs() / (sd / (draws as f64).sqrt());
            worst = worst.max(z);
            if !(z <= 4.0) {
                failures.push(format!("{id} f{} z={z:.2}", j + 1));
            }
        }
    }
    let n = DistributionId::catalog().len();
    if failures.is_empty() {
        (
            true,
            format!("{n} models, largest |mean|/SE = {worst:.2} (limit 4)"),
        )
    } else {
        (false, format!("outside 4 SE: {}", failures.join(", ")))
    }
}

// ---------------------------------------------------------------- criterion 2

fn residual_zero() -> (bool, String) {
    let n = 200;
    let mut checked = 0;
    let mut skipped = 0;
    let mut worst = 0.0_f64;
    let mut failures = Vec::new();
    let mut relaxed = Vec::new();
    for (k, id) in DistributionId::catalog().iter().enumerate() {
        let model = make_model(id).unwrap();
        let theta = id.default_theta();
        if model.g_dim() > model.dim() {
            relaxed.push(id.to_string());
            continue;
        }
        for (t, tag) in explicit_tags(id).iter().enumerate() {
            let recipe = RecipeId::new(id.clone(), *tag);
            let fset = recipe_functions(id, tag, None).unwrap();
            for r in 0..100u64 {
                let xs = sample(
                    id,
                    &theta,
                    n,
                    split_seed(MASTER_SEED, 2, (k * 100 + t) as u64 * 1000 + r),
                )
                .unwrap();
                let fit = estimate(&recipe, &xs).unwrap();
                let Some(th) = fit.ok_theta() else {
                    skipped += 1;
                    continue;
                };
                let sys = build_empirical_system(model.as_ref(), &fset, &xs).unwrap();
                let bound = 1e-8 * (1.0 + spectral_norm(&sys.m_bar));
                let res = stein_residual(model.as_ref(), th, &fset, &xs).unwrap();
                worst = worst.max(res / bound);
                checked += 1;
                if !(res <= bound) {
                    failures.push(format!("{recipe} rep {r}: {res:.3e} > {bound:.3e}"));
                }
            }
        }
    }
    if failures.is_empty() && checked > 0 {
        (
            true,
            format!(
                "{checked} estimates, worst residual/bound = {worst:.2e}, {skipped} non-OK estimates skipped; relaxed structures excluded: {}",
                relaxed.join(", ")
            ),
        )
    } else {
        (
            false,
            format!(
                "{} violations, e.g. {}",
                failures.len(),
                failures.first().cloned().unwrap_or_default()
            ),
        )
    }
}

// ---------------------------------------------------------------- criterion 3

fn closed_form_equalities() -> (bool, String) {
    let mut worst = 0.0_f64;
    let mut note = String::new();
    let mut upd = |label: &str, got: f64, want: f64| {
        let e = (got - want).abs() / (1.0 + want.abs());
        if e > worst {
            worst = e;
            note = label.to_string();
        }
    };
    for r in 0..50u64 {
        let xs = sample(
            &DistributionId::Gaussian,
            &[1.5, 2.0],
            40,
            split_seed(MASTER_SEED, 3, r),
        )
        .unwrap();
        let fit = estimate(&"gaussian:MO".parse().unwrap(), &xs).unwrap();
        let th = fit.ok_theta().unwrap();
        let m1 = mean(&xs);
        let m2 = mean_of(&xs, |x| x * x);
        upd("gaussian mu", th[0], m1);
        upd("gaussian sigma2", th[1], m2 - m1 * m1);

        let ys = sample(
            &DistributionId::Nakagami,
            &[0.8, 2.0],
            40,
            split_seed(MASTER_SEED, 30, r),
        )
        .unwrap();
        let fit = estimate(&"nakagami:ST".parse().unwrap(), &ys).unwrap();
        upd(
            "nakagami omega",
            fit.ok_theta().unwrap()[1],
            mean_of(&ys, |x| x * x),
        );

        let zs = sample(
            &DistributionId::Gamma,
            &[2.0, 3.0],
            40,
            split_seed(MASTER_SEED, 31, r),
        )
        .unwrap();
        let fit = estimate(&"gamma:MO".parse().unwrap(), &zs).unwrap();
        let th = fit.ok_theta().unwrap();
        let m1 = mean(&zs);
        let s2 = mean_of(&zs, |x| x * x) - m1 * m1;
        upd("gamma alpha", th[0], m1 * m1 / s2);
        upd("gamma beta", th[1], m1 / s2);
    }
    (
        worst <= 1e-12,
        format!("150 seeded samples, largest relative gap {worst:.1e} ({note}), limit 1e-12"),
    )
}

// ---------------------------------------------------------------- criterion 4

fn equivariance() -> (bool, String) {
    let tol = 1e-12;
    let mut worst = 0.0_f64;
    let mut note = String::new();
    let mut upd = |label: String, gap: f64| {
        if gap > worst {
            worst = gap;
            note = label;
        }
    };
    let st: RecipeId = "nakagami:ST".parse().unwrap();
    for r in 0..20u64 {
        let xs = sample(
            &DistributionId::Nakagami,
            &[1.3, 0.7],
            60,
            split_seed(MASTER_SEED, 4, r),
        )
        .unwrap();
        let base = estimate(&st, &xs).unwrap().theta_hat.unwrap();
        for &c in &[0.25, 3.0, 17.5] {
            let ys: Vec<f64> = xs.iter().map(|x| c * x).collect();
            let sc = estimate(&st, &ys).unwrap().theta_hat.unwrap();
            upd(format!("nakagami m, c={c}"), rel(sc[0], base[0]));
            upd(
                format!("nakagami omega, c={c}"),
                rel(sc[1], c * c * base[1]),
            );
        }
    }
    let variants = [
        ("L1", LVariant::L1 { trim: 0.38 }),
        ("L2", LVariant::L2),
        ("L3", LVariant::L3),
        ("L4", LVariant::L4 { eps: 0.0 }),
    ];
    for r in 0..20u64 {
        let xs = sample(
            &DistributionId::Cauchy,
            &[0.0, 1.0],
            20,
            split_seed(MASTER_SEED, 40, r),
        )
        .unwrap();
        for &c in &[-2.5, 0.75, 10.0] {
            let ys: Vec<f64> = xs.iter().map(|x| x + c).collect();
            let scale = 1.0 + c.abs() + xs.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            for (name, v) in variants {
                let a = cauchy_l_estimator(v, &xs).unwrap();
                let b = cauchy_l_estimator(v, &ys).unwrap();
                upd(format!("{name}, c={c}"), (b - a - c).abs() / scale);
            }
            // The weighted mean amplifies rounding by its cancellation ratio.
            if let (Some((a, kappa)), Some(b)) = (
                pitman_with_condition(&xs, 1.0).unwrap(),
                pitman(&ys, 1.0).unwrap(),
            ) {
                upd(
                    format!("PITMAN, c={c}"),
                    (b - a - c).abs() / (scale * kappa),
                );
            }
        }
    }
    (
        worst <= tol,
        format!("largest gap relative to scale (and Pitman cancellation ratio) {worst:.1e} ({note}), limit {tol:.0e}"),
    )
}

// ---------------------------------------------------------------- criterion 5

fn lomax_profile_gain(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let total: f64 = xs.iter().sum();
    let xbar = total / n;
    let mut best = f64::NEG_INFINITY;
    for k in 0..=3000 {
        let lambda = xbar * 10f64.powf(-4.0 + 10.0 * k as f64 / 3000.0);
        let s: f64 = xs.iter().map(|x| (x / lambda).ln_1p()).sum();
        // Profile log-likelihood minus its exponential limit as λ → ∞.
        let gain = n * (total / (lambda * s)).ln() - s;
        best = best.max(gain);
    }
    best
}

fn lomax_checks() -> (bool, String) {
    let mut agree = 0;
    let mut exist = 0;
    let mut mismatches = Vec::new();
    for r in 0..50u64 {
        let alpha = if r % 2 == 0 { 1.5 } else { 4.0 };
        let xs = sample(
            &DistributionId::Lomax,
            &[alpha, 1.0],
            8,
            split_seed(MASTER_SEED, 5, r),
        )
        .unwrap();
        let analytic = facts::lomax_mle_exists(&xs);
        let brute = lomax_profile_gain(&xs) > 1e-9;
        exist += analytic as usize;
        if analytic == brute {
            agree += 1;
        } else {
            mismatches.push(r);
        }
    }
    let model = make_model(&DistributionId::Lomax).unwrap();
    let cfg = OptimizerConfig {
        max_evals: 200_000,
        x_tol: 1e-13,
        f_tol: 1e-15,
        ..OptimizerConfig::default()
    };
    let mut compared = 0;
    let mut worst = 0.0_f64;
    let mut r = 0u64;
    while compared < 20 && r < 200 {
        let xs = sample(
            &DistributionId::Lomax,
            &[2.0, 1.0],
            200,
            split_seed(MASTER_SEED, 50, r),
        )
        .unwrap();
        r += 1;
        if !facts::lomax_mle_exists(&xs) {
            continue;
        }
        let it = match iterate_to_mle(
            model.as_ref(),
            &[1.0, 1.0],
            &xs,
            1e-10,
            500,
            OptimalMode::default(),
        ) {
            Ok(o) if o.result.is_ok() => o.result.theta_hat.unwrap(),
            _ => return (false, format!("iterate_to_mle failed on sample {r}")),
        };
        let nll = |p: &[f64]| -model.log_likelihood(&[p[0].exp(), p[1].exp()], &xs);
        let nm = nelder_mead(nll, &[0.0, 0.0], &cfg);
        let nm_theta = [nm.argmin[0].exp(), nm.argmin[1].exp()];
        for i in 0..2 {
            worst = worst.max(rel(it[i], nm_theta[i]));
        }
        compared += 1;
    }
    let pass = agree == 50 && compared == 20 && worst <= 1e-6;
    (
        pass,
        format!(
            "existence agrees on {agree}/50 samples ({exist} exist{}); IterMLE vs Nelder-Mead on {compared} samples, worst rel gap {worst:.1e} (limit 1e-6)",
            if mismatches.is_empty() { String::new() } else { format!(", mismatches {mismatches:?}") }
        ),
    )
}

// ---------------------------------------------------------------- criteria 6 and 7

fn efficiency() -> (bool, String) {
    let cases: [(&str, [f64; 2]); 4] = [
        ("gamma:TwoStep", [1.0, 1.0]),
        ("gamma:TwoStep", [2.0, 1.0]),
        ("cauchy:TwoStep", [0.0, 1.0]),
        ("nakagami:TwoStep", [1.0, 1.0]),
    ];
    let mut worst = (0.0, String::new());
    for (k, (r, th)) in cases.iter().enumerate() {
        let recipe: RecipeId = r.parse().unwrap();
        let cov = sandwich_cov(
            &recipe,
            th,
            CovMode::McPlugin,
            DEFAULT_MC_DRAWS,
            split_seed(MASTER_SEED, 6, k as u64),
        )
        .unwrap();
        let fi = fisher_inverse(&recipe.dist, th).unwrap();
        let (e, at) = entrywise_rel(&cov.matrix, &fi);
        if e > worst.0 {
            worst = (e, format!("{r} at {th:?} entry {at:?}"));
        }
    }
    (
        worst.0 <= 0.05,
        format!(
            "4 cases, worst entrywise gap {:.2}% ({}), limit 5%",
            100.0 * worst.0,
            worst.1
        ),
    )
}

fn covariance_cross_checks() -> (bool, String) {
    let cases: [(&str, [f64; 2]); 3] = [
        ("nakagami:ST", [1.0, 1.0]),
        ("lomax:MO", [5.0, 1.0]),
        ("cauchy:TwoStep", [0.0, 1.0]),
    ];
    let mut worst = (0.0, String::new());
    for (k, (r, th)) in cases.iter().enumerate() {
        let recipe: RecipeId = r.parse().unwrap();
        let cov = sandwich_cov(
            &recipe,
            th,
            CovMode::McPlugin,
            DEFAULT_MC_DRAWS,
            split_seed(MASTER_SEED, 7, k as u64),
        )
        .unwrap();
        let cf = closed_form_cov(&recipe, th).unwrap();
        let (e, at) = entrywise_rel(&cov.matrix, &cf);
        if e > worst.0 {
            worst = (e, format!("{r} entry {at:?}"));
        }
    }
    (
        worst.0 <= 0.03,
        format!(
            "10^6 draws, worst entrywise gap {:.2}% ({}), limit 3%",
            100.0 * worst.0,
            worst.1
        ),
    )
}

// ---------------------------------------------------------------- criterion 8

fn score_matching_and_specfun() -> (bool, String) {
    let cfg = OptimizerConfig {
        max_evals: 200_000,
        x_tol: 1e-12,
        f_tol: 1e-16,
        ..OptimizerConfig::default()
    };
    let mut worst_sm = 0.0_f64;
    for p in 2..=4usize {
        let id = DistributionId::ExpPoly { p };
        for r in 0..20u64 {
            let xs = sample(
                &id,
                &id.default_theta(),
                500,
                split_seed(MASTER_SEED, 8, (p as u64) * 100 + r),
            )
            .unwrap();
            let cf = score_matching_exp_poly(&xs, p).unwrap().theta_hat.unwrap();
            let nm = nelder_mead(|t| score_matching_objective(t, &xs), &vec![-1.0; p], &cfg);
            for (c, m) in cf.iter().zip(&nm.argmin) {
                worst_sm = worst_sm.max((c - m).abs() / (1.0 + c.abs()));
            }
        }
    }
    let mut worst_psi = 0.0_f64;
    for k in 1..200 {
        let x = 0.05 * k as f64;
        worst_psi =
            worst_psi.max((digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x).abs() * x);
    }
    let gamma_half = (ln_gamma(0.5).unwrap().exp() - std::f64::consts::PI.sqrt()).abs();
    let pass = worst_sm <= 1e-6 && worst_psi <= 1e-12 && gamma_half <= 1e-14;
    (
        pass,
        format!(
            "score matching vs simplex {worst_sm:.1e} (limit 1e-6); digamma recurrence {worst_psi:.1e} (limit 1e-12); |Γ(1/2)−√π| {gamma_half:.1e} (limit 1e-14)"
        ),
    )
}

// ---------------------------------------------------------------- tables

fn scenario(
    dist: &str,
    thetas: Vec<Vec<f64>>,
    recipes: &[&str],
    n: usize,
    reps: usize,
    tag: u64,
) -> ScenarioConfig {
    ScenarioConfig::new(
        dist.parse().unwrap(),
        thetas,
        recipes.iter().map(|s| s.to_string()).collect(),
        n,
        reps,
        split_seed(MASTER_SEED, 100, tag),
    )
}

fn cell<'a>(t: &'a SimulationTable, theta: usize, recipe: &str, param: usize) -> &'a CellResult {
    t.cells
        .iter()
        .find(|c| {
            c.theta_index == theta
                && c.recipe.ends_with(&format!(":{recipe}"))
                && c.param_index == param
        })
        .unwrap_or_else(|| panic!("missing cell {recipe}"))
}

struct Verdicts {
    pass: bool,
    parts: Vec<String>,
}

impl Verdicts {
    fn new() -> Self {
        Self {
            pass: true,
            parts: Vec::new(),
        }
    }

    fn mse(&mut self, label: &str, c: &CellResult, target: f64, tol: f64) {
        let e = rel(c.mse, target);
        let ok = e <= tol;
        self.pass &= ok;
        self.parts.push(format!(
            "{label} MSE {:.4} vs {target} ({:+.1}%{})",
            c.mse,
            100.0 * (c.mse - target) / target,
            if ok { "" } else { " ✗" }
        ));
    }

    fn value(&mut self, label: &str, got: f64, target: f64, tol: f64) {
        let ok = rel(got, target) <= tol;
        self.pass &= ok;
        self.parts.push(format!(
            "{label} {got:.4e} vs {target:e} ({:+.1}%{})",
            100.0 * (got - target) / target,
            if ok { "" } else { " ✗" }
        ));
    }

    fn bias_se(&mut self, label: &str, c: &CellResult, target: f64, k: f64) {
        let z = (c.bias - target).abs() / c.bias_se;
        let ok = z <= k;
        self.pass &= ok;
        self.parts.push(format!(
            "{label} bias {:.4} vs {target} ({z:.1} SE{})",
            c.bias,
            if ok { "" } else { " ✗" }
        ));
    }

    fn bias_abs(&mut self, label: &str, c: &CellResult, limit: f64) {
        let ok = c.bias.abs() <= limit;
        self.pass &= ok;
        self.parts.push(format!(
            "{label} |bias| {:.4} ≤ {limit}{}",
            c.bias.abs(),
            if ok { "" } else { " ✗" }
        ));
    }

    fn ne(&mut self, label: &str, c: &CellResult, want: impl Fn(u8) -> bool, text: &str) {
        let ok = want(c.ne_percent);
        self.pass &= ok;
        self.parts.push(format!(
            "{label} NE {}% ({text}){}",
            c.ne_percent,
            if ok { "" } else { " ✗" }
        ));
    }

    fn finish(self) -> (bool, String) {
        (self.pass, self.parts.join("; "))
    }
}

fn gamma_table(reps: usize) -> (bool, String) {
    let t = run_scenario(&scenario(
        "gamma",
        vec![vec![1.0, 1.0]],
        &["ST"],
        50,
        reps,
        9,
    ))
    .unwrap();
    let c = cell(&t, 0, "ST", 0);
    let mut v = Verdicts::new();
    v.mse("ST α", c, 0.042, 0.10);
    v.bias_se("ST α", c, 0.054, 3.0);
    v.finish()
}

fn trunc_normal_table(reps: usize) -> (bool, String) {
    // The printed σ row is on the variance scale, so the squared error of
    // σ̂² is tracked alongside the error of μ̂.
    let id = DistributionId::TruncNormal { a: 0.0, b: 1.0 };
    let recipe = RecipeId::new(id.clone(), "ST-poly");
    let theta0 = [0.5, 0.2];
    let seed = split_seed(MASTER_SEED, 100, 10);
    let opts = RecipeOptions::default();
    let (mut se_mu, mut se_var, mut ok) = (0.0, 0.0, 0usize);
    for r in 0..reps {
        let xs = sample(&id, &theta0, 50, split_seed(seed, 0, r as u64)).unwrap();
        if let Some(th) = run_recipe(&recipe, &xs, &opts).unwrap().ok_theta() {
            se_mu += (th[0] - theta0[0]).powi(2);
            se_var += (th[1] * th[1] - theta0[1] * theta0[1]).powi(2);
            ok += 1;
        }
    }
    let ne = (100.0 * (reps - ok) as f64 / reps as f64).round() as u8;
    let mut v = Verdicts::new();
    v.value("MSE(μ)", se_mu / ok as f64, 9.79e-4, 0.15);
    v.value("MSE(σ²)", se_var / ok as f64, 1.23e-4, 0.15);
    v.pass &= ne == 0;
    v.parts
        .push(format!("NE {ne}%{}", if ne == 0 { "" } else { " ✗" }));
    v.finish()
}

fn nakagami_table(reps: usize) -> (bool, String) {
    let t = run_scenario(&scenario(
        "nakagami",
        vec![vec![1.0, 1.0]],
        &["ST", "ST2"],
        50,
        reps,
        11,
    ))
    .unwrap();
    let mut v = Verdicts::new();
    let st = cell(&t, 0, "ST", 0);
    let b = rel(st.bias, 0.072);
    v.pass &= b <= 0.15;
    v.parts.push(format!(
        "ST bias(m) {:.4} vs 0.072 ({:+.1}%{})",
        st.bias,
        100.0 * (st.bias - 0.072) / 0.072,
        if b <= 0.15 { "" } else { " ✗" }
    ));
    v.mse("ST m", st, 0.06, 0.15);
    v.mse("ST2 m", cell(&t, 0, "ST2", 0), 0.044, 0.15);
    v.finish()
}

fn cauchy_table(reps: usize) -> (bool, String) {
    let t = run_scenario(&scenario(
        "cauchy_known_gamma(1)",
        vec![vec![0.0]],
        &["ST1", "L1", "L2", "L4", "PITMAN"],
        50,
        reps,
        12,
    ))
    .unwrap();
    let mut v = Verdicts::new();
    let st1 = cell(&t, 0, "ST1", 0);
    v.mse("ST1", st1, 0.044, 0.15);
    v.bias_abs("ST1", st1, 0.01);
    v.mse("L1", cell(&t, 0, "L1", 0), 0.058, 0.15);
    v.mse("L2", cell(&t, 0, "L2", 0), 0.047, 0.15);
    let pi = cell(&t, 0, "PITMAN", 0);
    v.mse("PITMAN", pi, 0.517, 0.15);
    v.parts.push(format!("PITMAN NE {}%", pi.ne_percent));
    v.parts.push(format!(
        "L4 MSE {:.4} (qualitative)",
        cell(&t, 0, "L4", 0).mse
    ));
    v.finish()
}

fn exp_poly_tables() -> (bool, String) {
    let t = run_scenario(&scenario(
        "exp_poly(2)",
        vec![vec![1.0, -2.0], vec![-2.0, -1.0]],
        &["ST1", "ST2", "ST3"],
        1000,
        2000,
        13,
    ))
    .unwrap();
    let printed: [(usize, &str, [f64; 2], [f64; 2]); 6] = [
        (0, "ST1", [0.03, -0.024], [0.09, 0.047]),
        (0, "ST2", [0.03, -0.024], [0.09, 0.047]),
        (0, "ST3", [0.017, -0.015], [0.073, 0.039]),
        (1, "ST1", [0.035, -0.04], [0.09, 0.074]),
        (1, "ST2", [0.035, -0.04], [0.09, 0.074]),
        (1, "ST3", [0.023, -0.029], [0.084, 0.068]),
    ];
    let mut v = Verdicts::new();
    let mut failed = Vec::new();
    let mut count = 0;
    for (k, recipe, bias, mse) in printed {
        for i in 0..2 {
            let c = cell(&t, k, recipe, i);
            // At 2000 replications the Monte Carlo error of a bias is a
            // sizeable fraction of the printed value, so a bias cell also
            // passes within three standard errors.
            let bias_ok =
                rel(c.bias, bias[i]) <= 0.20 || (c.bias - bias[i]).abs() <= 3.0 * c.bias_se;
            let mse_ok = rel(c.mse, mse[i]) <= 0.20;
            count += 2;
            if !bias_ok {
                failed.push(format!(
                    "θ₀#{k} {recipe} θ{} bias {:.4} vs {}",
                    i + 1,
                    c.bias,
                    bias[i]
                ));
            }
            if !mse_ok {
                failed.push(format!(
                    "θ₀#{k} {recipe} θ{} MSE {:.4} vs {}",
                    i + 1,
                    c.mse,
                    mse[i]
                ));
            }
        }
    }
    let anchor = cell(&t, 0, "ST3", 0);
    v.mse("anchor ST3 θ1 at (1,−2)", anchor, 0.073, 0.20);
    v.pass &= failed.is_empty();
    v.parts.push(format!(
        "{}/{count} cells within 20% (bias also within 3 SE)",
        count - failed.len()
    ));
    if !failed.is_empty() {
        v.parts.push(format!("outside: {}", failed.join(", ")));
    }
    v.finish()
}

fn rounding_study(reps: usize) -> (bool, String) {
    let mut cfg = scenario(
        "nakagami",
        vec![vec![0.7, 1.0]],
        &["ST", "MO2", "MO3", "ML"],
        500,
        reps,
        14,
    );
    cfg.rounding = Some(1);
    let t = run_scenario(&cfg).unwrap();
    let mut v = Verdicts::new();
    v.ne(
        "MO3",
        cell(&t, 0, "MO3", 0),
        |ne| ne >= 99,
        "non-finite expected",
    );
    v.ne(
        "ML",
        cell(&t, 0, "ML", 0),
        |ne| ne >= 99,
        "non-finite expected",
    );
    let st = cell(&t, 0, "ST", 0);
    v.ne("ST", st, |ne| ne == 0, "finite expected");
    v.bias_abs("ST m", st, 0.01);
    v.mse("ST m", st, 0.001, 0.25);
    v.finish()
}

fn ma_cauchy(reps: usize) -> (bool, String) {
    let mut cfg = scenario("cauchy", vec![vec![0.0, 1.0]], &["ST"], 150, reps, 15);
    cfg.process = Process::MaQ(5);
    let t = run_scenario(&cfg).unwrap();
    let mut v = Verdicts::new();
    v.mse("ST μ", cell(&t, 0, "ST", 0), 0.070, 0.15);
    v.mse("ST γ", cell(&t, 0, "ST", 1), 0.073, 0.15);
    v.finish()
}

fn main() {
    let reps = table_reps();
    let strict = std::env::var("SMOM_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    println!("acceptance: master seed {MASTER_SEED}, table replications {reps}");
    let outcomes = vec![
        run(
            1,
            "Stein identity null (4 SE, 10^5 draws)",
            stein_identity_null,
        ),
        run(
            2,
            "residual-zero of explicit recipes (1e-8·(1+‖M̄‖))",
            residual_zero,
        ),
        run(3, "closed-form equalities (1e-12)", closed_form_equalities),
        run(4, "equivariance (scale and translation)", equivariance),
        run(5, "Lomax existence and IterMLE fixed point", lomax_checks),
        run(6, "two-step efficiency vs Fisher inverse (5%)", efficiency),
        run(
            7,
            "closed-form vs Monte Carlo covariance (3%)",
            covariance_cross_checks,
        ),
        run(
            8,
            "score matching vs simplex, special functions",
            score_matching_and_specfun,
        ),
        run(9, "gamma table n=50 at (1,1)", || gamma_table(reps)),
        run(10, "truncated normal table n=50 at (0.5,0.2)", || {
            trunc_normal_table(reps)
        }),
        run(11, "Nakagami table n=50 at (1,1)", || nakagami_table(reps)),
        run(12, "Cauchy table n=50 at (0,1)", || cauchy_table(reps)),
        run(
            13,
            "exponential polynomial reduced grid n=1000",
            exp_poly_tables,
        ),
        run(14, "Nakagami rounding study n=500 at (0.7,1)", || {
            rounding_study(reps)
        }),
        run(15, "MA(5)-Cauchy n=150 at (0,1)", || ma_cauchy(reps)),
    ];
    let passed = outcomes.iter().filter(|o| o.pass).count();
    let unexpected: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.pass && (strict || !DOCUMENTED_DEVIATIONS.contains(&o.id)))
        .map(|o| o.id)
        .collect();
    let documented: Vec<u8> = outcomes
        .iter()
        .filter(|o| !o.pass && DOCUMENTED_DEVIATIONS.contains(&o.id))
        .map(|o| o.id)
        .collect();
    println!(
        "acceptance: {passed}/{} passed; documented deviations failing: {documented:?}; unexpected failures: {unexpected:?}",
        outcomes.len()
    );
    if !unexpected.is_empty() {
        std::process::exit(1);
    }
}
