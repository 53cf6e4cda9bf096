//! Catalogue of Stein models, their samplers and explicit recipes.

mod beta;
mod cauchy;
mod exp_poly;
pub mod facts;
mod gamma;
mod gaussian;
mod gen_logistic;
mod lomax;
mod nakagami;
mod student_t;
mod trunc_inv_gamma;
mod trunc_normal;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use beta::BetaModel;
pub use cauchy::{Cauchy, CauchyKnownGamma};
pub use exp_poly::ExpPoly;
pub use facts::{lomax_mle_exists, round_sample, trunc_normal_mle_exists, trunc_normal_moments};
pub use gamma::GammaModel;
pub use gaussian::Gaussian;
pub use gen_logistic::GenLogistic;
pub use lomax::Lomax;
pub use nakagami::Nakagami;
pub use student_t::StudentT;
pub use trunc_inv_gamma::TruncInvGamma;
pub use trunc_normal::TruncNormal;

pub(crate) use gen_logistic::{sigmoid, softplus};

use crate::error::{Result, SmomError};
use crate::numeric::mean_of;
use crate::rng::{rng_from_seed, SmomRng};
use crate::steincore::{explicit_estimate, EstimateResult, FunctionSet, Status, SteinModel};

pub(crate) fn invalid(msg: impl Into<String>) -> SmomError {
    SmomError::InvalidParameter(msg.into())
}

/// Uniform draw on the open interval `(0, 1)`.
pub(crate) fn open_unit(rng: &mut SmomRng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// Identifier of a catalogued distribution family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistributionId {
    /// Normal `(μ, σ²)`.
    Gaussian,
    /// Normal `(μ, σ)` truncated to `(a, b)`.
    TruncNormal {
        /// Lower bound.
        a: f64,
        /// Upper bound.
        b: f64,
    },
    /// Gamma `(α, β)` with rate `β`.
    Gamma,
    /// Beta `(α, β)`.
    Beta,
    /// Cauchy `(μ, γ)`.
    Cauchy,
    /// Cauchy location `μ` with known scale.
    CauchyKnownGamma {
        /// Known scale.
        gamma: f64,
    },
    /// Student's t with `μ` degrees of freedom.
    StudentT,
    /// Lomax `(α, λ)`.
    Lomax,
    /// Nakagami `(m, Ω)`.
    Nakagami,
    /// Inverse-gamma `(α, β)` truncated to `(a, ∞)`.
    TruncInvGamma {
        /// Truncation point.
        a: f64,
    },
    /// Generalised logistic `(α, β)`.
    GenLogistic,
    /// Exponential polynomial of degree `p`.
    ExpPoly {
        /// Degree.
        p: usize,
    },
}

/// Family names accepted by [`DistributionId::from_str`].
pub const FAMILY_NAMES: [&str; 12] = [
    "gaussian",
    "trunc_normal",
    "gamma",
    "beta",
    "cauchy",
    "cauchy_known_gamma",
    "student_t",
    "lomax",
    "nakagami",
    "trunc_inv_gamma",
    "gen_logistic",
    "exp_poly",
];

impl DistributionId {
    /// Representative instance of every family, using default arguments.
    pub fn catalog() -> Vec<DistributionId> {
        FAMILY_NAMES
            .iter()
            .map(|n| n.parse().expect("catalogue names parse"))
            .collect()
    }

    /// Family name without arguments.
    pub fn family(&self) -> &'static str {
        match self {
            DistributionId::Gaussian => "gaussian",
            DistributionId::TruncNormal { .. } => "trunc_normal",
            DistributionId::Gamma => "gamma",
            DistributionId::Beta => "beta",
            DistributionId::Cauchy => "cauchy",
            DistributionId::CauchyKnownGamma { .. } => "cauchy_known_gamma",
            DistributionId::StudentT => "student_t",
            DistributionId::Lomax => "lomax",
            DistributionId::Nakagami => "nakagami",
            DistributionId::TruncInvGamma { .. } => "trunc_inv_gamma",
            DistributionId::GenLogistic => "gen_logistic",
            DistributionId::ExpPoly { .. } => "exp_poly",
        }
    }

    /// Reference parameter used by smoke tests and examples.
    pub fn default_theta(&self) -> Vec<f64> {
        match self {
            DistributionId::Gaussian => vec![0.0, 1.0],
            DistributionId::TruncNormal { a, b } => vec![0.5 * (a + b), 0.2 * (b - a)],
            DistributionId::Gamma | DistributionId::Beta | DistributionId::Nakagami => {
                vec![1.0, 1.0]
            }
            DistributionId::Cauchy => vec![0.0, 1.0],
            DistributionId::CauchyKnownGamma { .. } => vec![0.0],
            DistributionId::StudentT => vec![5.0],
            DistributionId::Lomax => vec![5.0, 1.0],
            DistributionId::TruncInvGamma { .. } => vec![2.0, 1.0],
            DistributionId::GenLogistic => vec![1.0, 1.0],
            DistributionId::ExpPoly { p } => {
                let mut t = vec![0.0; *p];
                t[0] = 1.0;
                t[*p - 1] = -2.0;
                if *p == 1 {
                    t[0] = -2.0;
                }
                t
            }
        }
    }
}

impl fmt::Display for DistributionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionId::TruncNormal { a, b } => write!(f, "trunc_normal({a},{b})"),
            DistributionId::CauchyKnownGamma { gamma } => write!(f, "cauchy_known_gamma({gamma})"),
            DistributionId::TruncInvGamma { a } => write!(f, "trunc_inv_gamma({a})"),
            DistributionId::ExpPoly { p } => write!(f, "exp_poly({p})"),
            other => f.write_str(other.family()),
        }
    }
}

fn parse_args(s: &str) -> Result<(String, Vec<f64>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s.to_ascii_lowercase(), Vec::new())),
        Some(i) => {
            let name = s[..i].trim().to_ascii_lowercase();
            let rest = s[i + 1..]
                .strip_suffix(')')
                .ok_or_else(|| SmomError::Config(format!("unbalanced parentheses in `{s}`")))?;
            let args = rest
                .split(',')
                .filter(|a| !a.trim().is_empty())
                .map(|a| {
                    a.trim().parse::<f64>().map_err(|_| {
                        SmomError::Config(format!("cannot parse argument `{a}` in `{s}`"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((name, args))
        }
    }
}

impl FromStr for DistributionId {
    type Err = SmomError;

    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = parse_args(s)?;
        let arity = |n: usize| -> Result<()> {
            if args.len() > n {
                Err(SmomError::Config(format!(
                    "`{name}` takes at most {n} arguments"
                )))
            } else {
                Ok(())
            }
        };
        let id = match name.as_str() {
            "gaussian" | "normal" => {
                arity(0)?;
                DistributionId::Gaussian
            }
            "trunc_normal" => {
                arity(2)?;
                let (a, b) = match args.as_slice() {
                    [] => (0.0, 1.0),
                    [a, b] => (*a, *b),
                    _ => return Err(SmomError::Config("trunc_normal needs bounds (a,b)".into())),
                };
                TruncNormal::new(a, b)?;
                DistributionId::TruncNormal { a, b }
            }
            "gamma" => {
                arity(0)?;
                DistributionId::Gamma
            }
            "beta" => {
                arity(0)?;
                DistributionId::Beta
            }
            "cauchy" => {
                arity(0)?;
                DistributionId::Cauchy
            }
            "cauchy_known_gamma" => {
                arity(1)?;
                let gamma = args.first().copied().unwrap_or(1.0);
                CauchyKnownGamma::new(gamma)?;
                DistributionId::CauchyKnownGamma { gamma }
            }
            "student_t" => {
                arity(0)?;
                DistributionId::StudentT
            }
            "lomax" => {
                arity(0)?;
                DistributionId::Lomax
            }
            "nakagami" => {
                arity(0)?;
                DistributionId::Nakagami
            }
            "trunc_inv_gamma" => {
                arity(1)?;
                let a = args.first().copied().unwrap_or(1.0);
                TruncInvGamma::new(a)?;
                DistributionId::TruncInvGamma { a }
            }
            "gen_logistic" => {
                arity(0)?;
                DistributionId::GenLogistic
            }
            "exp_poly" => {
                arity(1)?;
                let p = args.first().copied().unwrap_or(2.0);
                if p.fract() != 0.0 || !(1.0..=8.0).contains(&p) {
                    return Err(SmomError::Config(format!(
                        "exp_poly degree must be an integer in 1..=8, got {p}"
                    )));
                }
                DistributionId::ExpPoly { p: p as usize }
            }
            _ => {
                return Err(SmomError::UnknownId {
                    id: s.to_string(),
                    valid: FAMILY_NAMES.join(", "),
                })
            }
        };
        Ok(id)
    }
}

impl TryFrom<String> for DistributionId {
    type Error = SmomError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistributionId> for String {
    fn from(id: DistributionId) -> String {
        id.to_string()
    }
}

/// Builds the Stein model for a distribution identifier.
pub fn make_model(id: &DistributionId) -> Result<Arc<dyn SteinModel>> {
    Ok(match id {
        DistributionId::Gaussian => Arc::new(Gaussian),
        DistributionId::TruncNormal { a, b } => Arc::new(TruncNormal::new(*a, *b)?),
        DistributionId::Gamma => Arc::new(GammaModel),
        DistributionId::Beta => Arc::new(BetaModel),
        DistributionId::Cauchy => Arc::new(Cauchy),
        DistributionId::CauchyKnownGamma { gamma } => Arc::new(CauchyKnownGamma::new(*gamma)?),
        DistributionId::StudentT => Arc::new(StudentT),
        DistributionId::Lomax => Arc::new(Lomax),
        DistributionId::Nakagami => Arc::new(Nakagami),
        DistributionId::TruncInvGamma { a } => Arc::new(TruncInvGamma::new(*a)?),
        DistributionId::GenLogistic => Arc::new(GenLogistic),
        DistributionId::ExpPoly { p } => Arc::new(ExpPoly::new(*p)?),
    })
}

/// Distribution plus estimator tag, written `dist:TAG`.
///
/// Tags may carry a parenthesised argument (`ST(5)`) and a first-step
/// override after `@` (`TwoStep@MO`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RecipeId {
    /// Distribution family.
    pub dist: DistributionId,
    /// Estimator tag including any argument or override.
    pub tag: String,
}

impl RecipeId {
    /// Recipe from parts.
    pub fn new(dist: DistributionId, tag: impl Into<String>) -> Self {
        Self {
            dist,
            tag: tag.into(),
        }
    }

    /// Tag without argument or first-step override, upper-cased.
    pub fn base_tag(&self) -> String {
        let t = self.tag.split('@').next().unwrap_or("");
        t.split('(')
            .next()
            .unwrap_or("")
            .trim()
            .to_ascii_uppercase()
    }

    /// Numeric argument of the tag, if any.
    pub fn tag_arg(&self) -> Option<f64> {
        let t = self.tag.split('@').next()?;
        let open = t.find('(')?;
        t[open + 1..].trim_end_matches(')').trim().parse().ok()
    }

    /// First-step override after `@`, if any.
    pub fn first_step(&self) -> Option<&str> {
        self.tag.split_once('@').map(|(_, f)| f.trim())
    }
}

impl fmt::Display for RecipeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.dist, self.tag)
    }
}

impl FromStr for RecipeId {
    type Err = SmomError;

    fn from_str(s: &str) -> Result<Self> {
        let (d, t) = s.split_once(':').ok_or_else(|| {
            SmomError::Config(format!("recipe `{s}` must have the form dist:TAG"))
        })?;
        let tag = t.trim();
        if tag.is_empty() {
            return Err(SmomError::Config(format!("recipe `{s}` has an empty tag")));
        }
        Ok(Self {
            dist: d.parse()?,
            tag: tag.to_string(),
        })
    }
}

impl TryFrom<String> for RecipeId {
    type Error = SmomError;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<RecipeId> for String {
    fn from(r: RecipeId) -> String {
        r.to_string()
    }
}

/// Default tuning constant of the Student t Stein estimator.
pub const STUDENT_T_KAPPA: f64 = 10.0;

/// Tags of the explicit (closed-form) recipes of a family.
pub fn explicit_tags(id: &DistributionId) -> &'static [&'static str] {
    match id {
        DistributionId::Gaussian => &["MO"],
        DistributionId::TruncNormal { .. } => &["ST-poly"],
        DistributionId::Gamma => &["MO", "LOG"],
        DistributionId::Beta => &["MO", "LOG"],
        DistributionId::Cauchy => &["ST"],
        DistributionId::CauchyKnownGamma { .. } => &["ST"],
        DistributionId::StudentT => &["MO", "ST"],
        DistributionId::Lomax => &["MO"],
        DistributionId::Nakagami => &["MO2", "MO3", "ST"],
        DistributionId::TruncInvGamma { .. } => &["ST"],
        DistributionId::GenLogistic => &["ST"],
        DistributionId::ExpPoly { .. } => &["ST1", "ST2"],
    }
}

/// Canonical test functions of a family, used for identity checks.
pub fn canonical_functions(id: &DistributionId) -> FunctionSet {
    let tag = explicit_tags(id).last().copied().unwrap_or("ST");
    recipe_functions(id, tag, None).expect("canonical recipe exists")
}

fn cauchy_rational() -> FunctionSet {
    FunctionSet::new()
        .with(
            "1/(1+x^2)",
            |x| 1.0 / (1.0 + x * x),
            |x| -2.0 * x / ((1.0 + x * x) * (1.0 + x * x)),
        )
        .with(
            "x/(1+x^2)",
            |x| x / (1.0 + x * x),
            |x| (1.0 - x * x) / ((1.0 + x * x) * (1.0 + x * x)),
        )
}

/// Test functions for an explicit recipe tag. `arg` is the optional tag
/// argument (the Student t tuning constant).
pub fn recipe_functions(id: &DistributionId, tag: &str, arg: Option<f64>) -> Result<FunctionSet> {
    let tag_up = tag.to_ascii_uppercase();
    let unknown = || SmomError::UnknownId {
        id: format!("{id}:{tag}"),
        valid: explicit_tags(id)
            .iter()
            .map(|t| format!("{id}:{t}"))
            .collect::<Vec<_>>()
            .join(", "),
    };
    let set = match (id, tag_up.as_str()) {
        (DistributionId::Gaussian, "MO")
        | (DistributionId::Gamma, "MO")
        | (DistributionId::Beta, "MO")
        | (DistributionId::Nakagami, "ST") => FunctionSet::new()
            .with_polynomial("1", vec![1.0])
            .with_polynomial("x", vec![0.0, 1.0]),
        (DistributionId::TruncNormal { a, b }, "ST-POLY" | "ST") => {
            let (a, b) = (*a, *b);
            FunctionSet::new()
                .with_polynomial("(x-a)(b-x)", vec![-a * b, a + b, -1.0])
                .with_polynomial(
                    "cubic",
                    vec![
                        -0.5 * (a * a * b + a * b * b),
                        0.5 * (a * a + 4.0 * a * b + b * b),
                        -1.5 * (a + b),
                        1.0,
                    ],
                )
        }
        (DistributionId::Gamma, "LOG") => {
            FunctionSet::new()
                .with_polynomial("1", vec![1.0])
                .with("log x", f64::ln, |x| 1.0 / x)
        }
        (DistributionId::Beta, "LOG") => FunctionSet::new().with_polynomial("1", vec![1.0]).with(
            "log(x/(1-x))",
            |x| (x / (1.0 - x)).ln(),
            |x| 1.0 / (x * (1.0 - x)),
        ),
        (DistributionId::Cauchy, "ST") | (DistributionId::CauchyKnownGamma { .. }, "ST") => {
            cauchy_rational()
        }
        (DistributionId::StudentT, "MO") => FunctionSet::new().with_polynomial("x", vec![0.0, 1.0]),
        (DistributionId::StudentT, "ST") => {
            let k = arg.unwrap_or(STUDENT_T_KAPPA);
            if !(k > 0.0) {
                return Err(invalid(format!(
                    "tuning constant must be positive, got {k}"
                )));
            }
            FunctionSet::new().with(
                format!("x/({k}+x^2)"),
                move |x| x / (k + x * x),
                move |x| (k - x * x) / ((k + x * x) * (k + x * x)),
            )
        }
        (DistributionId::Lomax, "MO") => FunctionSet::new()
            .with_polynomial("x", vec![0.0, 1.0])
            .with_polynomial("x^2", vec![0.0, 0.0, 1.0]),
        (DistributionId::Nakagami, "MO2") => FunctionSet::new()
            .with_polynomial("1", vec![1.0])
            .with_polynomial("x^2", vec![0.0, 0.0, 1.0]),
        (DistributionId::Nakagami, "MO3") => FunctionSet::new()
            .with_polynomial("1", vec![1.0])
            .with("log x", f64::ln, |x| 1.0 / x),
        (DistributionId::TruncInvGamma { a }, "ST") => {
            let a = *a;
            FunctionSet::new()
                .with(
                    "(x-a)/(1+(x-a)^2)",
                    move |x| (x - a) / (1.0 + (x - a) * (x - a)),
                    move |x| {
                        let d = 1.0 + (x - a) * (x - a);
                        (2.0 - d) / (d * d)
                    },
                )
                .with(
                    "atan(x-a)/(1+x)^2",
                    move |x| (x - a).atan() / ((1.0 + x) * (1.0 + x)),
                    move |x| {
                        let d = 1.0 + (x - a) * (x - a);
                        1.0 / (d * (1.0 + x) * (1.0 + x)) - 2.0 * (x - a).atan() / (1.0 + x).powi(3)
                    },
                )
        }
        (DistributionId::GenLogistic, "ST") => FunctionSet::new()
            .with("1/(1+e^x)", |x| sigmoid(-x), |x| -sigmoid(x) * sigmoid(-x))
            .with(
                "1/(1+e^x)^2",
                |x| sigmoid(-x).powi(2),
                |x| -2.0 * sigmoid(-x).powi(2) * sigmoid(x),
            ),
        (DistributionId::ExpPoly { p }, "ST1") => FunctionSet::powers(*p),
        (DistributionId::ExpPoly { p }, "ST2") => (1..=*p).fold(FunctionSet::new(), |set, i| {
            let fi = i as f64;
            set.with(
                format!("x^{i} e^(-{i}x)"),
                move |x| x.powi(i as i32) * (-fi * x).exp(),
                move |x| x.powi(i as i32 - 1) * (fi - fi * x) * (-fi * x).exp(),
            )
        }),
        _ => return Err(unknown()),
    };
    Ok(set)
}

/// Runs an explicit recipe on a sample.
pub fn estimate(recipe: &RecipeId, sample: &[f64]) -> Result<EstimateResult> {
    let tag = recipe.base_tag();
    let set = recipe_functions(&recipe.dist, &tag, recipe.tag_arg())?;
    let canonical = explicit_tags(&recipe.dist)
        .iter()
        .find(|t| t.eq_ignore_ascii_case(&tag))
        .copied()
        .unwrap_or(explicit_tags(&recipe.dist)[0]);
    let model = make_model(&recipe.dist)?;
    let tag_name = format!("{}:{}", recipe.dist, canonical);
    if sample.len() < model.dim() {
        return Err(SmomError::Config(format!(
            "{tag_name} needs at least {} observations",
            model.dim()
        )));
    }
    if matches!(recipe.dist, DistributionId::StudentT) && tag == "MO" {
        let m2 = mean_of(sample, |x| x * x);
        if m2 <= 1.0 + 1e-9 {
            return Ok(EstimateResult::failed(Status::OutOfSpace, None, tag_name));
        }
    }
    explicit_estimate(model.as_ref(), &set, sample, &tag_name)
}

/// Draws `n` observations from `id` at `theta` using a seeded generator.
pub fn sample(id: &DistributionId, theta: &[f64], n: usize, seed: u64) -> Result<Vec<f64>> {
    let model = make_model(id)?;
    let mut rng = rng_from_seed(seed);
    model.sample(theta, n, &mut rng)
}
