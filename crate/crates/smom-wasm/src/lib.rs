//! Browser bindings for the `smom` estimators.
//!
//! Every export returns a JSON string. The `*_json` functions hold the
//! logic and are plain Rust so that they can be tested natively.

use serde::Serialize;
use smom::asymptotics::{
    closed_form_cov, confidence_ellipse, sandwich_cov, student_t_variance_curve, CovMode,
    VarianceRow, ELLIPSE_POINTS,
};
use smom::distributions::{make_model, DistributionId, RecipeId};
use smom::recipes::{
    recipe_class, recipe_tags, run_recipe, validate_recipe, RecipeClass, RecipeOptions,
};
use smom::Status;
use wasm_bindgen::prelude::*;

/// Monte Carlo draws for covariances without a closed form.
pub const DEMO_DRAWS: usize = 50_000;

#[derive(Debug, Serialize)]
struct FitRow {
    recipe: String,
    status: String,
    theta_hat: Option<Vec<f64>>,
    std_errors: Option<Vec<f64>>,
    message: Option<String>,
}

#[derive(Debug, Serialize)]
struct FitOutput {
    distribution: String,
    params: Vec<String>,
    n: usize,
    results: Vec<FitRow>,
}

#[derive(Debug, Serialize)]
struct EllipseOutput {
    center: [f64; 2],
    covariance: Vec<Vec<f64>>,
    semi_axes: [f64; 2],
    area: f64,
    points: Vec<[f64; 2]>,
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(err)
}

/// Parses numbers separated by commas, semicolons or whitespace.
pub fn parse_values(text: &str) -> Result<Vec<f64>, String> {
    text.split(|c: char| c == ',' || c == ';' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(i, s)| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| format!("value {} (`{s}`) is not a finite number", i + 1))
        })
        .collect()
}

fn recipe_id(dist: &DistributionId, tag: &str) -> Result<RecipeId, String> {
    let id = RecipeId::new(dist.clone(), tag.trim());
    validate_recipe(&id).map_err(err)?;
    Ok(id)
}

fn covariance(recipe: &RecipeId, theta: &[f64]) -> Result<smom::Matrix, String> {
    let mode = if recipe_class(recipe).map_err(err)? == RecipeClass::Likelihood
        || closed_form_cov(recipe, theta).is_some()
    {
        CovMode::ClosedForm
    } else {
        CovMode::McPlugin
    };
    sandwich_cov(recipe, theta, mode, DEMO_DRAWS, 0)
        .map(|c| c.matrix)
        .map_err(err)
}

/// Fits the comma separated `recipes` of `dist` to the values in `data`.
/// An empty recipe list runs every catalogued recipe except maximum
/// likelihood.
pub fn fit_json(data: &str, dist: &str, recipes: &str) -> Result<String, String> {
    let id: DistributionId = dist.trim().parse().map_err(err)?;
    let model = make_model(&id).map_err(err)?;
    let values = parse_values(data)?;
    if values.is_empty() {
        return Err("no observations".into());
    }
    let tags: Vec<String> = if recipes.trim().is_empty() {
        recipe_tags(&id).into_iter().filter(|t| t != "ML").collect()
    } else {
        recipes.split(',').map(|s| s.trim().to_string()).collect()
    };
    let ids = tags
        .iter()
        .map(|t| recipe_id(&id, t))
        .collect::<Result<Vec<_>, _>>()?;
    let n = values.len();
    let mut results = Vec::new();
    for recipe in &ids {
        let row = match run_recipe(recipe, &values, &RecipeOptions::default()) {
            Ok(est) if est.status == Status::Ok => {
                let theta = est.theta_hat.clone();
                let (std_errors, message) = match theta.as_deref().map(|t| covariance(recipe, t)) {
                    Some(Ok(m)) => (
                        Some(m.diagonal().iter().map(|v| (v / n as f64).sqrt()).collect()),
                        None,
                    ),
                    Some(Err(e)) => (None, Some(e)),
                    None => (None, None),
                };
                FitRow {
                    recipe: recipe.to_string(),
                    status: est.status.label().into(),
                    theta_hat: theta,
                    std_errors,
                    message,
                }
            }
            Ok(est) => FitRow {
                recipe: recipe.to_string(),
                status: est.status.label().into(),
                theta_hat: None,
                std_errors: None,
                message: None,
            },
            Err(e) => FitRow {
                recipe: recipe.to_string(),
                status: "Error".into(),
                theta_hat: None,
                std_errors: None,
                message: Some(e.to_string()),
            },
        };
        results.push(row);
    }
    to_json(&FitOutput {
        distribution: id.to_string(),
        params: model.param_names().iter().map(|s| s.to_string()).collect(),
        n,
        results,
    })
}

/// Confidence ellipse of `recipe` for a two-parameter `dist` centred at
/// `(a, b)`.
pub fn ellipse_json(
    dist: &str,
    recipe: &str,
    a: f64,
    b: f64,
    q: f64,
    n: usize,
) -> Result<String, String> {
    let id: DistributionId = dist.trim().parse().map_err(err)?;
    let rid = recipe_id(&id, recipe)?;
    let center = [a, b];
    let cov = covariance(&rid, &center)?;
    if cov.rows() != 2 {
        return Err(format!("{id} does not have two parameters"));
    }
    let e = confidence_ellipse(&cov, q, n).map_err(err)?;
    to_json(&EllipseOutput {
        center,
        covariance: cov.to_rows(),
        semi_axes: e.semi_axes,
        area: e.area(),
        points: e.boundary(center, ELLIPSE_POINTS),
    })
}

/// Student t variance curves on `start, start + step, ..., stop`.
pub fn varcurve_json(kappa: f64, start: f64, stop: f64, step: f64) -> Result<String, String> {
    if !(step > 0.0) || !(stop >= start) {
        return Err("grid needs start <= stop and a positive step".into());
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
    if count > 500 {
        return Err("grid has more than 500 points".into());
    }
    let grid: Vec<f64> = (0..count).map(|i| start + i as f64 * step).collect();
    let rows: Vec<VarianceRow> = student_t_variance_curve(kappa, &grid).map_err(err)?;
    to_json(&rows)
}

/// Browser export of [`fit_json`].
#[wasm_bindgen]
pub fn fit(data: &str, dist: &str, recipes: &str) -> Result<String, JsError> {
    fit_json(data, dist, recipes).map_err(|e| JsError::new(&e))
}

/// Browser export of [`ellipse_json`].
#[wasm_bindgen]
pub fn ellipse(
    dist: &str,
    recipe: &str,
    a: f64,
    b: f64,
    q: f64,
    n: usize,
) -> Result<String, JsError> {
    ellipse_json(dist, recipe, a, b, q, n).map_err(|e| JsError::new(&e))
}

/// Browser export of [`varcurve_json`].
#[wasm_bindgen]
pub fn varcurve(kappa: f64, start: f64, stop: f64, step: f64) -> Result<String, JsError> {
    varcurve_json(kappa, start, stop, step).map_err(|e| JsError::new(&e))
}
