//! Command-line front end of the `smom` estimators.
//!
//! The binary is a thin wrapper over [`run`]; every subcommand is exposed
//! here so that it can be exercised from tests.

pub mod format;
pub mod input;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use smom::asymptotics::{
    closed_form_cov, confidence_ellipse, sandwich_cov, student_t_variance_curve, CovMode,
    ELLIPSE_POINTS,
};
use smom::distributions::{explicit_tags, make_model, DistributionId, RecipeId, FAMILY_NAMES};
use smom::mcbench::{compare_table, parse_reference_csv, run_scenario, ScenarioConfig, TolSpec};
use smom::recipes::{
    recipe_class, recipe_tags, run_recipe, validate_recipe, RecipeClass, RecipeOptions,
};
use smom::{Matrix, SmomError, Status};
use thiserror::Error;

use crate::format::{emit, sig, sig_opt, Format};
use crate::input::{aggregate, parse_grid, parse_list, parse_series, Aggregate, InputError};

/// Successful run.
pub const EXIT_OK: i32 = 0;
/// Invalid usage, configuration or input.
pub const EXIT_USAGE: i32 = 2;
/// Estimation or covariance failure.
pub const EXIT_ESTIMATION: i32 = 3;

/// Scenario presets bundled with the binary.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "gamma-n50",
        include_str!("../../../scenarios/gamma-n50.json"),
    ),
    (
        "cauchy-n50",
        include_str!("../../../scenarios/cauchy-n50.json"),
    ),
    (
        "nakagami-rounding",
        include_str!("../../../scenarios/nakagami-rounding.json"),
    ),
    ("smoke", include_str!("../../../scenarios/smoke.json")),
];

/// Errors reported by the command-line interface.
#[derive(Debug, Error)]
pub enum CliError {
    /// Malformed input data.
    #[error(transparent)]
    Input(#[from] InputError),
    /// Error raised by the estimation library.
    #[error(transparent)]
    Smom(#[from] SmomError),
    /// A file could not be read or written.
    #[error("cannot access {path}: {source}")]
    Io {
        /// Offending path.
        path: String,
        /// Underlying error.
        source: std::io::Error,
    },
    /// Inconsistent command-line arguments.
    #[error("{0}")]
    Usage(String),
    /// No estimate or covariance could be produced.
    #[error("{0}")]
    Estimation(String),
}

impl CliError {
    /// Process exit code for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) | CliError::Io { .. } | CliError::Usage(_) => EXIT_USAGE,
            CliError::Estimation(_) => EXIT_ESTIMATION,
            CliError::Smom(e) => match e {
                SmomError::Singular
                | SmomError::FirstStepFailed(_)
                | SmomError::Quadrature { .. } => EXIT_ESTIMATION,
                _ => EXIT_USAGE,
            },
        }
    }
}

/// Stein's method of moments estimators.
#[derive(Debug, Parser)]
#[command(name = "smom", version, about)]
pub struct Cli {
    /// Subcommand to run.
    #[command(subcommand)]
    pub command: Command,
}

/// Available subcommands.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate parameters from a data file.
    Fit(FitArgs),
    /// Run a Monte Carlo scenario.
    Simulate(SimulateArgs),
    /// Confidence ellipse of a two-parameter estimate.
    Ellipse(EllipseArgs),
    /// Student t asymptotic variance curves.
    Varcurve(VarcurveArgs),
    /// List distributions, recipes and presets.
    List(ListArgs),
}

/// Output destination and format.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output format; each subcommand has its own default.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Arguments of `smom fit`.
#[derive(Debug, Args)]
pub struct FitArgs {
    /// Data file with one value or one `date,value` pair per line; `-` reads
    /// standard input.
    pub input: PathBuf,
    /// Distribution family, for example `gamma` or `trunc_normal(0,1)`.
    #[arg(long)]
    pub dist: String,
    /// Recipe tags such as `ST` or `nakagami:MO2`; repeatable or comma
    /// separated. Defaults to the explicit recipes of the family.
    #[arg(long, value_delimiter = ',')]
    pub recipe: Vec<String>,
    /// Temporal aggregation applied before estimation.
    #[arg(long, value_enum, default_value_t = Aggregate::None)]
    pub aggregate: Aggregate,
    /// Also report the asymptotic covariance and standard errors.
    #[arg(long)]
    pub cov: bool,
    /// Monte Carlo draws for covariances without a closed form.
    #[arg(long, default_value_t = 200_000)]
    pub draws: usize,
    /// Seed of randomised estimators and Monte Carlo covariances.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output options.
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Arguments of `smom simulate`.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file or the name of a bundled preset.
    pub scenario: String,
    /// Override the number of replications.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Override the master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file prefix; writes `<prefix>.csv` and `<prefix>.json`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Format printed to standard output when `--out` is absent.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Golden CSV to compare the simulated table against.
    #[arg(long)]
    pub compare: Option<PathBuf>,
}

/// Arguments of `smom ellipse`.
#[derive(Debug, Args)]
pub struct EllipseArgs {
    /// Distribution family with two parameters.
    #[arg(long)]
    pub dist: String,
    /// Recipe whose asymptotic covariance is used.
    #[arg(long, default_value = "ST")]
    pub recipe: String,
    /// Centre of the ellipse, `a,b`.
    #[arg(long, allow_hyphen_values = true)]
    pub theta: String,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    pub q: f64,
    /// Sample size.
    #[arg(long)]
    pub n: usize,
    /// Explicit covariance `v11,v12,v21,v22` replacing the recipe's.
    #[arg(long, allow_hyphen_values = true)]
    pub cov: Option<String>,
    /// Monte Carlo draws for covariances without a closed form.
    #[arg(long, default_value_t = 200_000)]
    pub draws: usize,
    /// Monte Carlo seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output options.
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Arguments of `smom varcurve`.
#[derive(Debug, Args)]
pub struct VarcurveArgs {
    /// Tuning constant of the Stein estimator.
    #[arg(long, default_value_t = 10.0)]
    pub kappa: f64,
    /// Degrees-of-freedom grid as a list or `start:stop:step`.
    #[arg(long, default_value = "2:20:0.5")]
    pub grid: String,
    /// Output options.
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Arguments of `smom list`.
#[derive(Debug, Args)]
pub struct ListArgs {
    /// Output options.
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Runs a parsed command and returns the exit code.
pub fn run(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Fit(a) => fit(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Ellipse(a) => ellipse(&a),
        Command::Varcurve(a) => varcurve(&a),
        Command::List(a) => list(&a),
    }
}

fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        return std::io::read_to_string(std::io::stdin()).map_err(|source| CliError::Io {
            path: "<stdin>".into(),
            source,
        });
    }
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Usage(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn qualify(dist: &DistributionId, tag: &str) -> Result<RecipeId, CliError> {
    let id: RecipeId = if tag.contains(':') {
        tag.parse()?
    } else {
        RecipeId::new(dist.clone(), tag.trim())
    };
    if &id.dist != dist {
        return Err(CliError::Usage(format!(
            "recipe {id} does not belong to {dist}"
        )));
    }
    validate_recipe(&id)?;
    Ok(id)
}

/// Estimate and diagnostics of one recipe in `smom fit`.
#[derive(Debug, Clone, Serialize)]
pub struct FitRow {
    /// Recipe identifier.
    pub recipe: String,
    /// Estimator outcome, or `Error` when the recipe raised an error.
    pub status: String,
    /// Parameter estimate when one was found.
    pub theta_hat: Option<Vec<f64>>,
    /// Norm of the estimating equations at the estimate.
    pub residual: Option<f64>,
    /// Asymptotic covariance of `√n (θ̂ − θ)` evaluated at the estimate.
    pub covariance: Option<Vec<Vec<f64>>>,
    /// How the covariance was obtained.
    pub covariance_mode: Option<CovMode>,
    /// Standard errors `sqrt(diag(V)/n)`.
    pub std_errors: Option<Vec<f64>>,
    /// Explanation of a failure.
    pub message: Option<String>,
}

/// Output of `smom fit`.
#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    /// Distribution family.
    pub distribution: String,
    /// Parameter names.
    pub params: Vec<String>,
    /// Number of values used after aggregation.
    pub n: usize,
    /// Aggregation applied to the input.
    pub aggregate: Aggregate,
    /// One entry per recipe.
    pub results: Vec<FitRow>,
}

fn is_input_error(e: &SmomError) -> bool {
    matches!(
        e,
        SmomError::Domain { .. }
            | SmomError::UnknownId { .. }
            | SmomError::Config(_)
            | SmomError::Dimension(_)
    )
}

fn fit_covariance(recipe: &RecipeId, theta: &[f64], args: &FitArgs, n: usize, row: &mut FitRow) {
    let class = match recipe_class(recipe) {
        Ok(c) => c,
        Err(e) => {
            row.message = Some(e.to_string());
            return;
        }
    };
    let mode = if class == RecipeClass::Likelihood || closed_form_cov(recipe, theta).is_some() {
        CovMode::ClosedForm
    } else {
        CovMode::McPlugin
    };
    match sandwich_cov(recipe, theta, mode, args.draws, args.seed) {
        Ok(c) if c.matrix.is_finite() => {
            row.std_errors = Some(c.std_errors(n));
            row.covariance = Some(c.matrix.to_rows());
            row.covariance_mode = Some(c.mode);
        }
        Ok(_) => row.message = Some("covariance is not finite at the estimate".into()),
        Err(e) => row.message = Some(format!("covariance unavailable: {e}")),
    }
}

/// Estimates parameters from a file and builds the report.
pub fn fit_report(args: &FitArgs) -> Result<FitReport, CliError> {
    let dist: DistributionId = args.dist.parse()?;
    let model = make_model(&dist)?;
    let tags: Vec<String> = if args.recipe.is_empty() {
        explicit_tags(&dist).iter().map(|t| t.to_string()).collect()
    } else {
        args.recipe.clone()
    };
    let recipes = tags
        .iter()
        .map(|t| qualify(&dist, t))
        .collect::<Result<Vec<_>, _>>()?;
    let obs = parse_series(&read_text(&args.input)?)?;
    let values = aggregate(&obs, args.aggregate)?;
    let n = values.len();
    let opts = RecipeOptions {
        seed: args.seed,
        ..RecipeOptions::default()
    };
    let mut results = Vec::with_capacity(recipes.len());
    for recipe in &recipes {
        let mut row = FitRow {
            recipe: recipe.to_string(),
            status: String::new(),
            theta_hat: None,
            residual: None,
            covariance: None,
            covariance_mode: None,
            std_errors: None,
            message: None,
        };
        match run_recipe(recipe, &values, &opts) {
            Ok(est) => {
                row.status = est.status.label().to_string();
                row.residual = Some(est.residual).filter(|r| r.is_finite());
                if est.status == Status::Ok {
                    row.theta_hat = est.theta_hat.clone();
                    if args.cov {
                        if let Some(theta) = &est.theta_hat {
                            fit_covariance(recipe, theta, args, n, &mut row);
                        }
                    }
                }
            }
            Err(e) if is_input_error(&e) => return Err(e.into()),
            Err(e) => {
                row.status = "Error".into();
                row.message = Some(e.to_string());
            }
        }
        results.push(row);
    }
    Ok(FitReport {
        distribution: dist.to_string(),
        params: model.param_names().iter().map(|s| s.to_string()).collect(),
        n,
        aggregate: args.aggregate,
        results,
    })
}

fn render_fit(report: &FitReport, format: Format) -> Result<String, CliError> {
    let mut out = String::new();
    match format {
        Format::Json => return to_json(report),
        Format::Csv => {
            out.push_str("recipe,status,param,estimate,std_error,residual\n");
            for r in &report.results {
                for (i, name) in report.params.iter().enumerate() {
                    let est = r.theta_hat.as_ref().map(|t| t[i]);
                    let se = r.std_errors.as_ref().map(|s| s[i]);
                    let _ = writeln!(
                        out,
                        "{},{},{},{},{},{}",
                        r.recipe,
                        r.status,
                        name,
                        sig_opt(est),
                        sig_opt(se),
                        sig_opt(r.residual)
                    );
                }
            }
        }
        Format::Text => {
            let _ = writeln!(
                out,
                "distribution {} ({}), n = {}, aggregate {}",
                report.distribution,
                report.params.join(", "),
                report.n,
                report.aggregate
            );
            let _ = write!(out, "{:<28} {:<14}", "recipe", "status");
            for p in &report.params {
                let _ = write!(out, " {p:>12}");
            }
            let _ = writeln!(out, " {:>12}", "residual");
            for r in &report.results {
                let _ = write!(out, "{:<28} {:<14}", r.recipe, r.status);
                for i in 0..report.params.len() {
                    let _ = write!(out, " {:>12}", sig_opt(r.theta_hat.as_ref().map(|t| t[i])));
                }
                let _ = writeln!(out, " {:>12}", sig_opt(r.residual));
                if let Some(se) = &r.std_errors {
                    let _ = write!(out, "{:<28} {:<14}", "", "std. error");
                    for s in se {
                        let _ = write!(out, " {:>12}", sig(*s));
                    }
                    out.push('\n');
                }
                if let Some(m) = &r.message {
                    let _ = writeln!(out, "{:<28} {m}", "");
                }
            }
        }
    }
    Ok(out)
}

fn fit(args: &FitArgs) -> Result<i32, CliError> {
    let report = fit_report(args)?;
    let text = render_fit(&report, args.output.format.unwrap_or(Format::Text))?;
    emit(&text, args.output.out.as_deref())?;
    if report.results.iter().all(|r| r.theta_hat.is_none()) {
        eprintln!("no recipe produced an estimate");
        return Ok(EXIT_ESTIMATION);
    }
    if args.cov
        && report
            .results
            .iter()
            .any(|r| r.theta_hat.is_some() && r.covariance.is_none())
    {
        eprintln!("some covariances could not be computed");
        return Ok(EXIT_ESTIMATION);
    }
    Ok(EXIT_OK)
}

/// Loads a scenario from a preset name or a JSON file.
pub fn load_scenario(name: &str) -> Result<ScenarioConfig, CliError> {
    let text = match PRESETS.iter().find(|(p, _)| *p == name) {
        Some((_, json)) => json.to_string(),
        None => {
            let path = Path::new(name);
            if !path.exists() {
                let names: Vec<&str> = PRESETS.iter().map(|(p, _)| *p).collect();
                return Err(CliError::Usage(format!(
                    "`{name}` is neither a scenario file nor a preset; presets: {}",
                    names.join(", ")
                )));
            }
            read_text(path)?
        }
    };
    Ok(ScenarioConfig::from_json(&text)?)
}

fn with_extension(prefix: &Path, ext: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn simulate(args: &SimulateArgs) -> Result<i32, CliError> {
    let mut config = load_scenario(&args.scenario)?;
    if let Some(r) = args.reps {
        config.reps = r;
    }
    if let Some(s) = args.seed {
        config.seed = s;
    }
    let reference = match &args.compare {
        Some(p) => Some(parse_reference_csv(&read_text(p)?)?),
        None => None,
    };
    eprintln!(
        "scenario {}: {} x {} replications, n = {}, master seed {}",
        config.name.as_deref().unwrap_or(&args.scenario),
        config.thetas.len(),
        config.reps,
        config.n,
        config.seed
    );
    let table = run_scenario(&config)?;
    match &args.out {
        Some(prefix) => {
            emit(&table.to_csv(), Some(&with_extension(prefix, "csv")))?;
            emit(&table.to_json()?, Some(&with_extension(prefix, "json")))?;
        }
        None => {
            let text = match args.format.unwrap_or(Format::Csv) {
                Format::Json => table.to_json()? + "\n",
                Format::Csv => table.to_csv(),
                Format::Text => render_table_text(&table),
            };
            emit(&text, None)?;
        }
    }
    if let Some(reference) = reference {
        let report = compare_table(&table, &reference, &TolSpec::default())?;
        for c in report.checks.iter().filter(|c| !c.pass()) {
            eprintln!(
                "mismatch: theta #{} {} parameter {}: bias {} mse {} ne {}",
                c.reference.theta_index,
                c.reference.recipe,
                c.reference.param_index,
                sig(c.bias),
                sig(c.mse),
                c.ne
            );
        }
        eprintln!(
            "{} of {} reference cells within tolerance ({:.1}%)",
            report.checks.iter().filter(|c| c.pass()).count(),
            report.checks.len(),
            100.0 * report.pass_fraction()
        );
    }
    Ok(EXIT_OK)
}

fn render_table_text(table: &smom::mcbench::SimulationTable) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>5} {:<24} {:<24} {:<8} {:>12} {:>12} {:>5}",
        "theta", "true value", "recipe", "param", "bias", "mse", "NE%"
    );
    for c in &table.cells {
        let theta: Vec<String> = c.theta0.iter().map(|v| sig(*v)).collect();
        let _ = writeln!(
            out,
            "{:>5} {:<24} {:<24} {:<8} {:>12} {:>12} {:>5}",
            c.theta_index,
            format!("({})", theta.join(", ")),
            c.recipe,
            c.param,
            sig(c.bias),
            sig(c.mse),
            c.ne_percent
        );
    }
    out
}

/// Confidence ellipse with its boundary points.
#[derive(Debug, Clone, Serialize)]
pub struct EllipseReport {
    /// Centre of the ellipse.
    pub center: [f64; 2],
    /// Asymptotic covariance of `√n (θ̂ − θ)`.
    pub covariance: Vec<Vec<f64>>,
    /// Covariance source.
    pub covariance_mode: Option<CovMode>,
    /// Confidence level.
    pub q: f64,
    /// Sample size.
    pub n: usize,
    /// Chi-square quantile with two degrees of freedom.
    pub chi2: f64,
    /// Semi-axis lengths, largest first.
    pub semi_axes: [f64; 2],
    /// Unit axis directions.
    pub directions: [[f64; 2]; 2],
    /// Enclosed area.
    pub area: f64,
    /// Boundary points.
    pub points: Vec<[f64; 2]>,
}

fn parse_pair(text: &str, what: &str) -> Result<[f64; 2], CliError> {
    match parse_list(text)
        .map_err(|e| CliError::Usage(format!("{what}: {e}")))?
        .as_slice()
    {
        [a, b] => Ok([*a, *b]),
        v => Err(CliError::Usage(format!(
            "{what} needs two values, got {}",
            v.len()
        ))),
    }
}

/// Computes the ellipse requested by `smom ellipse`.
pub fn ellipse_report(args: &EllipseArgs) -> Result<EllipseReport, CliError> {
    let center = parse_pair(&args.theta, "--theta")?;
    let (cov, mode) = match &args.cov {
        Some(text) => {
            let v = parse_list(text).map_err(|e| CliError::Usage(format!("--cov: {e}")))?;
            if v.len() != 4 {
                return Err(CliError::Usage(format!(
                    "--cov needs four values, got {}",
                    v.len()
                )));
            }
            (Matrix::from_row_major(2, 2, v)?, None)
        }
        None => {
            let dist: DistributionId = args.dist.parse()?;
            let recipe = qualify(&dist, &args.recipe)?;
            let mode = if recipe_class(&recipe)? == RecipeClass::Likelihood
                || closed_form_cov(&recipe, &center).is_some()
            {
                CovMode::ClosedForm
            } else {
                CovMode::McPlugin
            };
            let c = sandwich_cov(&recipe, &center, mode, args.draws, args.seed)?;
            if c.matrix.rows() != 2 {
                return Err(CliError::Usage(format!(
                    "{dist} does not have two parameters"
                )));
            }
            (c.matrix, Some(c.mode))
        }
    };
    if !cov.is_symmetric(1e-8) {
        return Err(CliError::Usage("covariance must be symmetric".into()));
    }
    let e = confidence_ellipse(&cov, args.q, args.n)?;
    Ok(EllipseReport {
        center,
        covariance: cov.to_rows(),
        covariance_mode: mode,
        q: args.q,
        n: args.n,
        chi2: e.chi2,
        semi_axes: e.semi_axes,
        directions: e.directions,
        area: e.area(),
        points: e.boundary(center, ELLIPSE_POINTS),
    })
}

fn ellipse(args: &EllipseArgs) -> Result<i32, CliError> {
    let report = ellipse_report(args)?;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&report)?,
        Format::Csv | Format::Text => {
            let mut out = String::from("x,y\n");
            for p in &report.points {
                let _ = writeln!(out, "{},{}", sig(p[0]), sig(p[1]));
            }
            out
        }
    };
    emit(&text, args.output.out.as_deref())?;
    Ok(EXIT_OK)
}

fn varcurve(args: &VarcurveArgs) -> Result<i32, CliError> {
    let grid = parse_grid(&args.grid).map_err(CliError::Usage)?;
    let rows = student_t_variance_curve(args.kappa, &grid)?;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => to_json(&rows)?,
        Format::Csv | Format::Text => {
            let mut out = String::from("mu,st,mo,mle,quadrature_failed\n");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    sig(r.mu),
                    sig_opt(r.st),
                    sig_opt(r.mo),
                    sig_opt(r.mle),
                    r.quadrature_failed
                );
            }
            out
        }
    };
    emit(&text, args.output.out.as_deref())?;
    if rows.iter().all(|r| r.quadrature_failed) {
        return Ok(EXIT_ESTIMATION);
    }
    Ok(EXIT_OK)
}

/// One catalogued family in `smom list`.
#[derive(Debug, Clone, Serialize)]
pub struct FamilyEntry {
    /// Family name as accepted by `--dist`.
    pub name: String,
    /// Parameter names.
    pub params: Vec<String>,
    /// Recipe tags.
    pub recipes: Vec<String>,
}

/// Output of `smom list`.
#[derive(Debug, Clone, Serialize)]
pub struct Listing {
    /// Catalogued families.
    pub distributions: Vec<FamilyEntry>,
    /// Bundled scenario presets.
    pub presets: Vec<String>,
}

/// Builds the catalogue listing.
pub fn listing() -> Result<Listing, CliError> {
    let mut distributions = Vec::new();
    for name in FAMILY_NAMES {
        let id: DistributionId = name.parse()?;
        let model = make_model(&id)?;
        distributions.push(FamilyEntry {
            name: id.to_string(),
            params: model.param_names().iter().map(|s| s.to_string()).collect(),
            recipes: recipe_tags(&id),
        });
    }
    Ok(Listing {
        distributions,
        presets: PRESETS.iter().map(|(p, _)| p.to_string()).collect(),
    })
}

fn list(args: &ListArgs) -> Result<i32, CliError> {
    let listing = listing()?;
    let text = match args.output.format.unwrap_or(Format::Text) {
        Format::Json => to_json(&listing)?,
        Format::Csv => {
            let mut out = String::from("distribution,params,recipe\n");
            for d in &listing.distributions {
                for r in &d.recipes {
                    let _ = writeln!(out, "{},{},{}", d.name, d.params.join(";"), r);
                }
            }
            out
        }
        Format::Text => {
            let mut out = String::from("distributions:\n");
            for d in &listing.distributions {
                let _ = writeln!(out, "  {} ({})", d.name, d.params.join(", "));
                let _ = writeln!(out, "    recipes: {}", d.recipes.join(" "));
            }
            let _ = writeln!(out, "presets: {}", listing.presets.join(" "));
            out
        }
    };
    emit(&text, args.output.out.as_deref())?;
    Ok(EXIT_OK)
}
