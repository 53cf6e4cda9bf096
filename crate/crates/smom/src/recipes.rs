//! Dispatch from recipe identifiers to estimators.
//!
//! A recipe is written `dist:TAG`. Explicit tags are solved by
//! [`distributions::estimate`]. `TwoStep` runs the efficient two-step
//! estimator with the family's default first step, or the first step named
//! after `@` (`gamma:TwoStep@MO`). Baseline tags select the competitor
//! estimators of [`crate::baselines`].

use serde::{Deserialize, Serialize};

use crate::baselines::{
    cauchy_l_estimator, cauchy_median, gen_logistic_moment, mle, noise_contrastive_exp_poly,
    pitman, score_matching_exp_poly, LVariant, OptimizerConfig, L1_TRIM,
};
use crate::distributions::{self, explicit_tags, make_model, DistributionId, RecipeId};
use crate::efficient::{cauchy_st2, iterate_to_mle, two_step_at, OptimalMode, CAUCHY_TRIM};
use crate::error::{Result, SmomError};
use crate::steincore::{EstimateResult, Status};

/// Default noise ratio of the noise-contrastive estimator.
pub const NC_NU: f64 = 10.0;

/// Tuning shared by all recipes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecipeOptions {
    /// Evaluation mode of optimal functions.
    pub mode: OptimalMode,
    /// Optimiser used by simplex-based baselines.
    pub optimizer: OptimizerConfig,
    /// Seed for estimators that draw random numbers.
    pub seed: u64,
    /// Tolerance of the iteration towards the maximum likelihood estimator.
    pub iter_tol: f64,
    /// Iteration cap of the iteration towards the maximum likelihood
    /// estimator.
    pub iter_max: usize,
}

impl Default for RecipeOptions {
    fn default() -> Self {
        Self {
            mode: OptimalMode::default(),
            optimizer: OptimizerConfig::default(),
            seed: 0,
            iter_tol: 1e-10,
            iter_max: 200,
        }
    }
}

/// Default first-step recipe of the two-step estimator.
pub fn default_first_step(id: &DistributionId) -> &'static str {
    match id {
        DistributionId::Gaussian => "MO",
        DistributionId::TruncNormal { .. } => "ST-poly",
        DistributionId::Gamma | DistributionId::Beta => "LOG",
        DistributionId::Cauchy => "ST",
        DistributionId::CauchyKnownGamma { .. } => "MED",
        DistributionId::StudentT => "ST",
        DistributionId::Lomax => "MO",
        DistributionId::Nakagami => "ST",
        DistributionId::TruncInvGamma { .. } => "ST",
        DistributionId::GenLogistic => "ST",
        DistributionId::ExpPoly { .. } => "ST2",
    }
}

/// Fixed starting value used when the default first step fails, for the
/// families that have one.
pub fn first_step_fallback(id: &DistributionId) -> Option<Vec<f64>> {
    match id {
        DistributionId::Lomax => Some(vec![1.0, 1.0]),
        DistributionId::ExpPoly { p } => Some(vec![-1.0; *p]),
        _ => None,
    }
}

/// Every recipe tag accepted for a family, in display order.
pub fn recipe_tags(id: &DistributionId) -> Vec<String> {
    let mut tags: Vec<String> = explicit_tags(id).iter().map(|t| t.to_string()).collect();
    tags.push("TwoStep".into());
    match id {
        DistributionId::Gamma | DistributionId::Beta => tags.push("ST".into()),
        DistributionId::Nakagami => tags.push("ST2".into()),
        DistributionId::ExpPoly { .. } => tags.extend(["ST3", "NC", "SM"].map(String::from)),
        DistributionId::Cauchy => {
            tags.extend(["L1", "L2", "L3", "L4", "PITMAN", "MED"].map(String::from))
        }
        DistributionId::CauchyKnownGamma { .. } => {
            tags.extend(["ST1", "ST2", "L1", "L2", "L3", "L4", "PITMAN", "MED"].map(String::from))
        }
        DistributionId::GenLogistic => tags.push("MO".into()),
        _ => {}
    }
    tags.push("IterMLE".into());
    tags.push("ML".into());
    tags
}

/// Every recipe identifier of the catalogue.
pub fn all_recipes() -> Vec<String> {
    DistributionId::catalog()
        .iter()
        .flat_map(|id| {
            recipe_tags(id)
                .into_iter()
                .map(move |t| format!("{}:{t}", id.family()))
        })
        .collect()
}

enum Kind {
    Explicit,
    TwoStep { first: String, fallback: bool },
    IterMle,
    Ml,
    L(LVariant),
    Pitman,
    Median,
    CauchySt2(f64),
    Nc,
    Sm,
    GlMoment,
}

fn classify(recipe: &RecipeId) -> Result<Kind> {
    let id = &recipe.dist;
    let base = recipe.base_tag();
    let arg = recipe.tag_arg();
    let override_first = recipe.first_step().map(str::to_string);
    let two_step = |default: &str| {
        let fallback = override_first.is_none() && first_step_fallback(id).is_some();
        Kind::TwoStep {
            first: override_first
                .clone()
                .unwrap_or_else(|| default.to_string()),
            fallback,
        }
    };
    let is_cauchy = matches!(
        id,
        DistributionId::Cauchy | DistributionId::CauchyKnownGamma { .. }
    );
    let kind = match (id, base.as_str()) {
        (_, "TWOSTEP") => two_step(default_first_step(id)),
        (DistributionId::Gamma | DistributionId::Beta, "ST") => two_step("LOG"),
        (DistributionId::Nakagami, "ST2") => two_step("ST"),
        (DistributionId::ExpPoly { .. }, "ST3") => two_step("ST2"),
        (DistributionId::CauchyKnownGamma { .. }, "ST1") => two_step("MED"),
        (DistributionId::CauchyKnownGamma { .. }, "ST2") => {
            Kind::CauchySt2(arg.unwrap_or(CAUCHY_TRIM))
        }
        (_, "ITERMLE") => Kind::IterMle,
        (_, "ML" | "MLE") => Kind::Ml,
        (_, "L1") if is_cauchy => Kind::L(LVariant::L1 {
            trim: arg.unwrap_or(L1_TRIM),
        }),
        (_, "L2") if is_cauchy => Kind::L(LVariant::L2),
        (_, "L3") if is_cauchy => Kind::L(LVariant::L3),
        (_, "L4") if is_cauchy => Kind::L(LVariant::L4 {
            eps: arg.unwrap_or(0.0),
        }),
        (_, "PITMAN" | "PI") if is_cauchy => Kind::Pitman,
        (_, "MED") if is_cauchy => Kind::Median,
        (DistributionId::ExpPoly { .. }, "NC") => Kind::Nc,
        (DistributionId::ExpPoly { .. }, "SM") => Kind::Sm,
        (DistributionId::GenLogistic, "MO") => Kind::GlMoment,
        _ if explicit_tags(id)
            .iter()
            .any(|t| t.eq_ignore_ascii_case(&base))
            || (matches!(id, DistributionId::TruncNormal { .. }) && base == "ST") =>
        {
            Kind::Explicit
        }
        _ => {
            return Err(SmomError::UnknownId {
                id: recipe.to_string(),
                valid: recipe_tags(id)
                    .iter()
                    .map(|t| format!("{}:{t}", id.family()))
                    .collect::<Vec<_>>()
                    .join(", "),
            })
        }
    };
    Ok(kind)
}

/// Asymptotic structure of a recipe, used to pick a covariance formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RecipeClass {
    /// Fixed test functions.
    Explicit,
    /// Optimal test functions frozen at a first-step estimate.
    Efficient,
    /// Maximum likelihood or its iterative Stein approximation.
    Likelihood,
    /// Any other baseline.
    Other,
}

/// Classifies a recipe for covariance computations.
pub fn recipe_class(recipe: &RecipeId) -> Result<RecipeClass> {
    Ok(match classify(recipe)? {
        Kind::Explicit => RecipeClass::Explicit,
        Kind::TwoStep { .. } => RecipeClass::Efficient,
        Kind::IterMle | Kind::Ml => RecipeClass::Likelihood,
        _ => RecipeClass::Other,
    })
}

/// Checks that a recipe identifier names a known estimator.
pub fn validate_recipe(recipe: &RecipeId) -> Result<()> {
    classify(recipe).map(|_| ())
}

/// Runs a recipe on a sample.
///
/// Estimator failures are reported through the returned status. Errors are
/// reserved for unknown recipes, invalid options and observations outside
/// the support.
pub fn run_recipe(
    recipe: &RecipeId,
    sample: &[f64],
    opts: &RecipeOptions,
) -> Result<EstimateResult> {
    let id = &recipe.dist;
    let tag = recipe.to_string();
    let kind = classify(recipe)?;
    let model = make_model(id)?;
    if let Some(x) = sample.iter().find(|&&x| !model.admits(x)) {
        return Err(SmomError::domain(
            "run_recipe",
            format!("observation {x} outside the support of {id}"),
        ));
    }
    let known_gamma = match id {
        DistributionId::CauchyKnownGamma { gamma } => Some(*gamma),
        _ => None,
    };
    let result = match kind {
        Kind::Explicit => distributions::estimate(recipe, sample)?,
        Kind::TwoStep { first, fallback } => {
            let start = first_step_value(id, &first, fallback, sample, opts)?;
            match start {
                Ok(theta) => two_step_at(model.as_ref(), &theta, sample, opts.mode, &tag)?,
                Err(status) => EstimateResult::failed(status, None, tag.clone()),
            }
        }
        Kind::IterMle => {
            let start = first_step_value(
                id,
                default_first_step(id),
                first_step_fallback(id).is_some(),
                sample,
                opts,
            )?;
            match start {
                Ok(theta) => {
                    let out = iterate_to_mle(
                        model.as_ref(),
                        &theta,
                        sample,
                        opts.iter_tol,
                        opts.iter_max,
                        opts.mode,
                    )?;
                    out.result
                }
                Err(status) => EstimateResult::failed(status, None, tag.clone()),
            }
        }
        Kind::Ml => mle(id, sample, None, &opts.optimizer)?,
        Kind::L(variant) => {
            let mu = cauchy_l_estimator(variant, sample)?;
            with_cauchy_scale(mu, known_gamma, sample, &tag)
        }
        Kind::Pitman => {
            let gamma = known_gamma.unwrap_or_else(|| cauchy_median(sample).1);
            if !(gamma > 0.0) {
                EstimateResult::failed(Status::OutOfSpace, None, tag.clone())
            } else {
                match pitman(sample, gamma)? {
                    Some(mu) => with_cauchy_scale(mu, known_gamma, sample, &tag),
                    None => EstimateResult::failed(Status::OutOfSpace, None, tag.clone()),
                }
            }
        }
        Kind::Median => {
            let (mu, _) = cauchy_median(sample);
            with_cauchy_scale(mu, known_gamma, sample, &tag)
        }
        Kind::CauchySt2(trim) => {
            let gamma = known_gamma
                .ok_or_else(|| SmomError::Config("ST2 needs a known Cauchy scale".into()))?;
            cauchy_st2(sample, gamma, trim)?
        }
        Kind::Nc => {
            let p = exp_poly_degree(id);
            noise_contrastive_exp_poly(sample, p, NC_NU, opts.seed, &opts.optimizer)?
        }
        Kind::Sm => score_matching_exp_poly(sample, exp_poly_degree(id))?,
        Kind::GlMoment => gen_logistic_moment(sample, &opts.optimizer)?,
    };
    Ok(result.with_tag(tag))
}

fn exp_poly_degree(id: &DistributionId) -> usize {
    match id {
        DistributionId::ExpPoly { p } => *p,
        _ => 0,
    }
}

fn with_cauchy_scale(
    mu: f64,
    known_gamma: Option<f64>,
    sample: &[f64],
    tag: &str,
) -> EstimateResult {
    if !mu.is_finite() {
        return EstimateResult::failed(Status::NonFinite, None, tag);
    }
    match known_gamma {
        Some(_) => EstimateResult::ok(vec![mu], 0.0, tag),
        None => {
            let (_, gamma) = cauchy_median(sample);
            if gamma > 0.0 {
                EstimateResult::ok(vec![mu, gamma], 0.0, tag)
            } else {
                EstimateResult::failed(Status::OutOfSpace, Some(vec![mu, gamma]), tag)
            }
        }
    }
}

/// Resolves a first-step recipe to a parameter value, or the status that
/// prevented it.
fn first_step_value(
    id: &DistributionId,
    first: &str,
    fallback: bool,
    sample: &[f64],
    opts: &RecipeOptions,
) -> Result<std::result::Result<Vec<f64>, Status>> {
    let first_recipe = RecipeId::new(id.clone(), first);
    let result = run_recipe(&first_recipe, sample, opts)?;
    let model = make_model(id)?;
    match result.ok_theta() {
        Some(theta) if model.in_param_space(theta) => Ok(Ok(theta.to_vec())),
        _ if fallback => Ok(first_step_fallback(id).ok_or(result.status)),
        _ => Ok(Err(match result.status {
            Status::Ok => Status::OutOfSpace,
            s => s,
        })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_listed_tag_classifies() {
        for id in DistributionId::catalog() {
            for tag in recipe_tags(&id) {
                let r = RecipeId::new(id.clone(), tag.as_str());
                assert!(validate_recipe(&r).is_ok(), "{r}");
            }
        }
    }

    #[test]
    fn unknown_tag_lists_valid_ids() {
        let r: RecipeId = "gamma:FOO".parse().unwrap();
        let err = validate_recipe(&r).unwrap_err().to_string();
        assert!(err.contains("gamma:LOG"), "{err}");
    }
}
