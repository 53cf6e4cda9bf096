//! Seeded Monte Carlo studies of estimator bias, mean squared error and
//! non-existence rates.
//!
//! Replication `r` at true value `θ₀[k]` draws its sample from the seed
//! `split_seed(master, k, r)`, so results do not depend on the number of
//! workers or the order in which they run. Bias and MSE are averaged over
//! the replications in which the estimator returned a valid estimate;
//! every other outcome counts towards the non-existence rate.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::OptimizerConfig;
use crate::distributions::{facts, make_model, Cauchy, DistributionId, RecipeId};
use crate::error::{Result, SmomError};
use crate::numeric::KahanSum;
use crate::recipes::{run_recipe, validate_recipe, RecipeOptions};
use crate::rng::{split_seed, stream};
use crate::steincore::{Status, SteinModel};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SMOM_THREADS";

/// Data-generating process of a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    /// Independent draws.
    #[default]
    Iid,
    /// Moving average of order `q` of i.i.d. Cauchy innovations.
    MaQ(usize),
}

fn default_budget() -> f64 {
    20.0
}

fn default_mode() -> crate::efficient::OptimalMode {
    crate::efficient::OptimalMode::default()
}

/// Description of a Monte Carlo study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Optional label copied into the output metadata.
    #[serde(default)]
    pub name: Option<String>,
    /// Distribution family.
    pub distribution: DistributionId,
    /// True parameter values.
    pub thetas: Vec<Vec<f64>>,
    /// Recipe tags, either bare (`LOG`) or qualified (`gamma:LOG`).
    pub recipes: Vec<String>,
    /// Sample size.
    pub n: usize,
    /// Replications per true value.
    pub reps: usize,
    /// Master seed.
    pub seed: u64,
    /// Decimal places to round samples to before estimation.
    #[serde(default)]
    pub rounding: Option<u32>,
    /// Data-generating process.
    #[serde(default)]
    pub process: Process,
    /// Per-estimate budget of iterative estimators.
    #[serde(default = "default_budget")]
    pub time_budget_seconds: f64,
    /// Evaluation mode of optimal functions.
    #[serde(default = "default_mode")]
    pub optimal_mode: crate::efficient::OptimalMode,
}

impl ScenarioConfig {
    /// Scenario with default options.
    pub fn new(
        distribution: DistributionId,
        thetas: Vec<Vec<f64>>,
        recipes: Vec<String>,
        n: usize,
        reps: usize,
        seed: u64,
    ) -> Self {
        Self {
            name: None,
            distribution,
            thetas,
            recipes,
            n,
            reps,
            seed,
            rounding: None,
            process: Process::Iid,
            time_budget_seconds: default_budget(),
            optimal_mode: default_mode(),
        }
    }

    /// Parses a JSON scenario file.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| SmomError::Config(format!("invalid scenario: {e}")))
    }

    /// Fully qualified recipe identifiers.
    pub fn recipe_ids(&self) -> Result<Vec<RecipeId>> {
        self.recipes
            .iter()
            .map(|r| {
                if r.contains(':') {
                    let id: RecipeId = r.parse()?;
                    if id.dist != self.distribution {
                        return Err(SmomError::Config(format!(
                            "recipe {r} does not belong to {}",
                            self.distribution
                        )));
                    }
                    Ok(id)
                } else {
                    Ok(RecipeId::new(self.distribution.clone(), r.as_str()))
                }
            })
            .collect()
    }

    /// Checks replication counts, parameter values, recipes and process.
    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(SmomError::Config("reps must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(SmomError::Config("n must be at least 1".into()));
        }
        if self.thetas.is_empty() || self.recipes.is_empty() {
            return Err(SmomError::Config(
                "scenario needs at least one θ₀ and one recipe".into(),
            ));
        }
        if !(self.time_budget_seconds >= 0.0) {
            return Err(SmomError::Config("time budget must be non-negative".into()));
        }
        let model = make_model(&self.distribution)?;
        for t in &self.thetas {
            model
                .check_theta(t)
                .map_err(|e| SmomError::Config(e.to_string()))?;
        }
        for r in self.recipe_ids()? {
            validate_recipe(&r)?;
        }
        if let Process::MaQ(_) = self.process {
            if !matches!(
                self.distribution,
                DistributionId::Cauchy | DistributionId::CauchyKnownGamma { .. }
            ) {
                return Err(SmomError::Config(
                    "the moving-average process is defined for Cauchy families only".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Summary of one `(θ₀, recipe, parameter)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    /// Index into the scenario's `thetas`.
    pub theta_index: usize,
    /// True parameter vector.
    pub theta0: Vec<f64>,
    /// Recipe identifier.
    pub recipe: String,
    /// Parameter name.
    pub param: String,
    /// Parameter index.
    pub param_index: usize,
    /// Mean of `θ̂ − θ₀` over valid replications.
    pub bias: f64,
    /// Mean of `(θ̂ − θ₀)²` over valid replications.
    pub mse: f64,
    /// Monte Carlo standard error of `bias`.
    pub bias_se: f64,
    /// Monte Carlo standard error of `mse`.
    pub mse_se: f64,
    /// Percentage of failed replications, rounded to an integer.
    pub ne_percent: u8,
    /// Number of valid replications.
    pub ok_count: usize,
    /// Replications by outcome label.
    pub status_counts: BTreeMap<String, usize>,
}

/// Provenance of a simulation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableMeta {
    /// Scenario label.
    pub name: Option<String>,
    /// Distribution family.
    pub distribution: String,
    /// Master seed.
    pub seed: u64,
    /// Sample size.
    pub n: usize,
    /// Replications per true value.
    pub reps: usize,
    /// Rounding applied to samples.
    pub rounding: Option<u32>,
    /// Data-generating process.
    pub process: Process,
    /// Library version.
    pub version: String,
    /// Bias and MSE are conditional on a valid estimate.
    pub conditional_on_existence: bool,
}

/// Grid of cell results with metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTable {
    /// Provenance.
    pub meta: TableMeta,
    /// Cells ordered by `θ₀`, recipe and parameter.
    pub cells: Vec<CellResult>,
}

/// CSV header of [`SimulationTable::to_csv`].
pub const CSV_HEADER: &str = "theta_index,theta0,recipe,param,bias,mse,bias_se,mse_se,ne,ok_count";

impl SimulationTable {
    /// One row per `θ₀ × recipe × parameter`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for c in &self.cells {
            let theta: Vec<String> = c.theta0.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                c.theta_index,
                theta.join(";"),
                c.recipe,
                c.param,
                c.bias,
                c.mse,
                c.bias_se,
                c.mse_se,
                c.ne_percent,
                c.ok_count
            );
        }
        out
    }

    /// Pretty-printed JSON including metadata.
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| SmomError::Config(e.to_string()))
    }

    /// Looks up a cell.
    pub fn cell(
        &self,
        theta_index: usize,
        recipe: &str,
        param_index: usize,
    ) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.theta_index == theta_index
                && c.recipe.eq_ignore_ascii_case(recipe)
                && c.param_index == param_index
        })
    }
}

/// Draws a moving average of `q + 1` consecutive i.i.d. Cauchy
/// innovations; every marginal is exactly `C(μ, γ)`.
pub fn ma_q_cauchy(n: usize, q: usize, mu: f64, gamma: f64, seed: u64) -> Result<Vec<f64>> {
    let model = Cauchy;
    let theta = [mu, gamma];
    model.check_theta(&theta)?;
    let mut rng = stream(seed, 0, 0);
    let eps = model.sample(&theta, n + q, &mut rng)?;
    let w = 1.0 / (q as f64 + 1.0);
    Ok((0..n)
        .map(|t| eps[t..=t + q].iter().sum::<f64>() * w)
        .collect())
}

fn draw(
    config: &ScenarioConfig,
    model: &dyn SteinModel,
    theta: &[f64],
    seed: u64,
) -> Result<Vec<f64>> {
    let raw = match config.process {
        Process::Iid => {
            let mut rng = crate::rng::rng_from_seed(seed);
            model.sample(theta, config.n, &mut rng)?
        }
        Process::MaQ(q) => {
            let gamma = match config.distribution {
                DistributionId::CauchyKnownGamma { gamma } => gamma,
                _ => theta[1],
            };
            ma_q_cauchy(config.n, q, theta[0], gamma, seed)?
        }
    };
    Ok(match config.rounding {
        Some(d) => facts::round_sample(&raw, d),
        None => raw,
    })
}

type RepOutcome = Vec<std::result::Result<Vec<f64>, String>>;

fn replicate(
    config: &ScenarioConfig,
    model: &dyn SteinModel,
    recipes: &[RecipeId],
    opts: &RecipeOptions,
    k: usize,
    r: usize,
) -> RepOutcome {
    let seed = split_seed(config.seed, k as u64, r as u64);
    let theta = &config.thetas[k];
    let sample = match draw(config, model, theta, seed) {
        Ok(s) => s,
        Err(e) => return vec![Err(format!("sampling failed: {e}")); recipes.len()],
    };
    let mut o = *opts;
    o.seed = split_seed(seed, u64::MAX, 0);
    recipes
        .iter()
        .map(|recipe| match run_recipe(recipe, &sample, &o) {
            Ok(res) => match res.ok_theta() {
                Some(t) if t.iter().all(|v| v.is_finite()) => Ok(t.to_vec()),
                Some(_) => Err(Status::NonFinite.label().to_string()),
                None => Err(res.status.label().to_string()),
            },
            Err(_) => Err("Error".to_string()),
        })
        .collect()
}

/// Worker count from `SMOM_THREADS`, if set to a positive integer.
pub fn threads_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()?
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
}

/// Runs a scenario with the worker cap taken from `SMOM_THREADS`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<SimulationTable> {
    run_scenario_with_threads(config, threads_from_env())
}

/// Runs a scenario on at most `threads` workers.
pub fn run_scenario_with_threads(
    config: &ScenarioConfig,
    threads: Option<usize>,
) -> Result<SimulationTable> {
    config.validate()?;
    let recipes = config.recipe_ids()?;
    let model = make_model(&config.distribution)?;
    let opts = RecipeOptions {
        mode: config.optimal_mode,
        optimizer: OptimizerConfig {
            time_budget_seconds: config.time_budget_seconds,
            ..OptimizerConfig::default()
        },
        ..RecipeOptions::default()
    };
    let tasks: Vec<(usize, usize)> = (0..config.thetas.len())
        .flat_map(|k| (0..config.reps).map(move |r| (k, r)))
        .collect();
    let run = |&(k, r): &(usize, usize)| replicate(config, model.as_ref(), &recipes, &opts, k, r);
    #[cfg(feature = "parallel")]
    let outcomes: Vec<RepOutcome> = {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(t) = threads {
            builder = builder.num_threads(t);
        }
        let pool = builder
            .build()
            .map_err(|e| SmomError::Config(format!("cannot start worker pool: {e}")))?;
        pool.install(|| tasks.par_iter().map(run).collect())
    };
    #[cfg(not(feature = "parallel"))]
    let outcomes: Vec<RepOutcome> = {
        let _ = threads;
        tasks.iter().map(run).collect()
    };
    let names = model.param_names();
    let mut cells = Vec::new();
    for (k, theta0) in config.thetas.iter().enumerate() {
        let reps = &outcomes[k * config.reps..(k + 1) * config.reps];
        for (j, recipe) in recipes.iter().enumerate() {
            let mut counts: BTreeMap<String, usize> = BTreeMap::new();
            for rep in reps {
                let label = match &rep[j] {
                    Ok(_) => Status::Ok.label().to_string(),
                    Err(s) => s.clone(),
                };
                *counts.entry(label).or_default() += 1;
            }
            let ok: Vec<&Vec<f64>> = reps.iter().filter_map(|rep| rep[j].as_ref().ok()).collect();
            for (i, name) in names.iter().enumerate() {
                let errors: Vec<f64> = ok
                    .iter()
                    .filter_map(|t| t.get(i))
                    .map(|v| v - theta0[i])
                    .collect();
                cells.push(summarise(
                    k,
                    theta0,
                    recipe,
                    name,
                    i,
                    &errors,
                    config.reps,
                    counts.clone(),
                ));
            }
        }
    }
    Ok(SimulationTable {
        meta: TableMeta {
            name: config.name.clone(),
            distribution: config.distribution.to_string(),
            seed: config.seed,
            n: config.n,
            reps: config.reps,
            rounding: config.rounding,
            process: config.process,
            version: env!("CARGO_PKG_VERSION").to_string(),
            conditional_on_existence: true,
        },
        cells,
    })
}

#[allow(clippy::too_many_arguments)]
fn summarise(
    k: usize,
    theta0: &[f64],
    recipe: &RecipeId,
    name: &str,
    i: usize,
    errors: &[f64],
    reps: usize,
    status_counts: BTreeMap<String, usize>,
) -> CellResult {
    let m = errors.len();
    let mut s1 = KahanSum::new();
    let mut s2 = KahanSum::new();
    for e in errors {
        s1.add(*e);
        s2.add(e * e);
    }
    let (bias, mse) = if m > 0 {
        (s1.total() / m as f64, s2.total() / m as f64)
    } else {
        (f64::NAN, f64::NAN)
    };
    let (bias_se, mse_se) = if m > 1 {
        let mut v1 = KahanSum::new();
        let mut v2 = KahanSum::new();
        for e in errors {
            v1.add((e - bias).powi(2));
            v2.add((e * e - mse).powi(2));
        }
        let d = (m - 1) as f64;
        (
            (v1.total() / d / m as f64).sqrt(),
            (v2.total() / d / m as f64).sqrt(),
        )
    } else {
        (f64::NAN, f64::NAN)
    };
    let ne = (100.0 * (reps - m) as f64 / reps as f64).round() as u8;
    CellResult {
        theta_index: k,
        theta0: theta0.to_vec(),
        recipe: recipe.to_string(),
        param: name.to_string(),
        param_index: i,
        bias,
        mse,
        bias_se,
        mse_se,
        ne_percent: ne,
        ok_count: m,
        status_counts,
    }
}

/// Runs the rounded-data study for each sample size with the estimators
/// `ST`, `MO2`, `MO3` and `ML` of the Nakagami family.
pub fn nakagami_rounding_study(
    thetas: &[Vec<f64>],
    ns: &[usize],
    decimals: Option<u32>,
    reps: usize,
    seed: u64,
) -> Result<Vec<SimulationTable>> {
    ns.iter()
        .map(|&n| {
            let mut cfg = ScenarioConfig::new(
                DistributionId::Nakagami,
                thetas.to_vec(),
                ["ST", "MO2", "MO3", "ML"].map(String::from).to_vec(),
                n,
                reps,
                seed,
            );
            cfg.name = Some(format!("nakagami-rounding-n{n}"));
            cfg.rounding = decimals;
            run_scenario(&cfg)
        })
        .collect()
}

/// A printed reference value with the number of decimals it was printed
/// with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrintedValue {
    /// Numeric value.
    pub value: f64,
    /// Half a unit in the last printed digit.
    pub half_ulp: f64,
}

impl PrintedValue {
    /// Parses `0.042`, `9.79e-4` or `NaN`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let value: f64 = t
            .parse()
            .map_err(|_| SmomError::Config(format!("cannot parse reference value `{t}`")))?;
        let (mantissa, exp) = match t.find(['e', 'E']) {
            Some(i) => (&t[..i], t[i + 1..].parse::<i32>().unwrap_or(0)),
            None => (t, 0),
        };
        let decimals = mantissa.find('.').map_or(0, |d| mantissa.len() - d - 1) as i32;
        Ok(Self {
            value,
            half_ulp: 0.5 * 10f64.powi(exp - decimals),
        })
    }
}

/// One reference cell of a golden table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceCell {
    /// Index into the scenario's `thetas`.
    pub theta_index: usize,
    /// Recipe identifier.
    pub recipe: String,
    /// Parameter index.
    pub param_index: usize,
    /// Printed bias.
    pub bias: Option<PrintedValue>,
    /// Printed MSE.
    pub mse: Option<PrintedValue>,
    /// Printed non-existence percentage.
    pub ne: Option<u8>,
}

/// Parses a golden CSV with columns
/// `theta_index,recipe,param_index,bias,mse,ne`; `#` starts a comment and
/// empty fields are absent values.
pub fn parse_reference_csv(text: &str) -> Result<Vec<ReferenceCell>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut cells = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec =
            rec.map_err(|e| SmomError::Config(format!("golden table row {}: {e}", line + 1)))?;
        let field = |i: usize| rec.get(i).unwrap_or("").trim();
        let opt = |i: usize| -> Result<Option<PrintedValue>> {
            let f = field(i);
            if f.is_empty() {
                Ok(None)
            } else {
                PrintedValue::parse(f).map(Some)
            }
        };
        let parse_usize = |i: usize| -> Result<usize> {
            field(i).parse().map_err(|_| {
                SmomError::Config(format!(
                    "golden table row {}: bad integer `{}`",
                    line + 1,
                    field(i)
                ))
            })
        };
        cells.push(ReferenceCell {
            theta_index: parse_usize(0)?,
            recipe: field(1).to_string(),
            param_index: parse_usize(2)?,
            bias: opt(3)?,
            mse: opt(4)?,
            ne: if field(5).is_empty() {
                None
            } else {
                Some(parse_usize(5)? as u8)
            },
        });
    }
    Ok(cells)
}

/// Tolerances of [`compare_table`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolSpec {
    /// Smallest accepted bias difference.
    pub bias_abs_floor: f64,
    /// Accepted bias difference in combined Monte Carlo standard errors.
    pub bias_k_se: f64,
    /// Relative MSE tolerance.
    pub mse_rel: f64,
    /// Accepted difference in non-existence percentage points.
    pub ne_abs: u8,
}

impl Default for TolSpec {
    fn default() -> Self {
        Self {
            bias_abs_floor: 0.0,
            bias_k_se: 3.0,
            mse_rel: 0.10,
            ne_abs: 2,
        }
    }
}

/// Outcome for one reference cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellCheck {
    /// The reference cell.
    pub reference: ReferenceCell,
    /// Simulated bias.
    pub bias: f64,
    /// Simulated MSE.
    pub mse: f64,
    /// Simulated non-existence percentage.
    pub ne: u8,
    /// Bias criterion, when a bias was printed.
    pub bias_pass: Option<bool>,
    /// MSE criterion, when an MSE was printed.
    pub mse_pass: Option<bool>,
    /// Non-existence criterion, when a rate was printed.
    pub ne_pass: Option<bool>,
}

impl CellCheck {
    /// True when every printed quantity is matched.
    pub fn pass(&self) -> bool {
        [self.bias_pass, self.mse_pass, self.ne_pass]
            .iter()
            .all(|p| p.unwrap_or(true))
    }
}

/// Per-cell comparison report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    /// Checks in reference order.
    pub checks: Vec<CellCheck>,
}

impl CompareReport {
    /// Fraction of passing cells.
    pub fn pass_fraction(&self) -> f64 {
        if self.checks.is_empty() {
            return 1.0;
        }
        self.checks.iter().filter(|c| c.pass()).count() as f64 / self.checks.len() as f64
    }
}

/// Compares simulated cells against printed reference cells.
///
/// Bias passes when `|Δ| ≤ max(abs_floor, k·SE) + half_ulp`. MSE passes
/// when `|Δ| ≤ mse_rel·ref + half_ulp`. Missing simulated cells are a grid
/// mismatch error.
pub fn compare_table(
    result: &SimulationTable,
    reference: &[ReferenceCell],
    tol: &TolSpec,
) -> Result<CompareReport> {
    let mut checks = Vec::new();
    for r in reference {
        let cell = result
            .cells
            .iter()
            .find(|c| {
                c.theta_index == r.theta_index
                    && c.param_index == r.param_index
                    && (c.recipe.eq_ignore_ascii_case(&r.recipe)
                        || c.recipe
                            .split_once(':')
                            .is_some_and(|(_, t)| t.eq_ignore_ascii_case(&r.recipe)))
            })
            .ok_or_else(|| {
                SmomError::Config(format!(
                    "grid mismatch: no simulated cell for θ₀ #{} {} parameter {}",
                    r.theta_index, r.recipe, r.param_index
                ))
            })?;
        let bias_pass = r.bias.as_ref().map(|b| {
            if b.value.is_nan() {
                return cell.bias.is_nan();
            }
            let se = if cell.bias_se.is_finite() {
                cell.bias_se
            } else {
                0.0
            };
            (cell.bias - b.value).abs() <= tol.bias_abs_floor.max(tol.bias_k_se * se) + b.half_ulp
        });
        let mse_pass = r.mse.as_ref().map(|m| {
            if m.value.is_nan() {
                return cell.mse.is_nan() || cell.ne_percent == 100;
            }
            (cell.mse - m.value).abs() <= tol.mse_rel * m.value.abs() + m.half_ulp
        });
        let ne_pass = r.ne.map(|ne| cell.ne_percent.abs_diff(ne) <= tol.ne_abs);
        checks.push(CellCheck {
            reference: r.clone(),
            bias: cell.bias,
            mse: cell.mse,
            ne: cell.ne_percent,
            bias_pass,
            mse_pass,
            ne_pass,
        });
    }
    Ok(CompareReport { checks })
}

/// Uniform draw helper for seeded meta-tests.
pub fn seeded_uniform(seed: u64, a: u64, b: u64) -> f64 {
    stream(seed, a, b).random()
}
