//! Stein's method of moments for univariate continuous distributions.
//!
//! The crate builds parameter estimators from the empirical Stein identity
//! `(1/n) Σ A_θ f(X_i) = 0`. For every catalogued family the Stein operator
//! is linear in a reparametrisation `g(θ)`, so each estimator reduces to a
//! small linear solve.
//!
//! * [`steincore`] holds the model abstraction and the generic solver.
//! * [`distributions`] catalogues twelve families with samplers and
//!   closed-form recipes.
//! * [`efficient`] builds optimal test functions and two-step estimators.
//! * [`baselines`] implements competitor estimators and optimisers.
//! * [`asymptotics`] computes sandwich covariances and Fisher inverses.
//! * [`mcbench`] runs seeded Monte Carlo studies.
//!
//! ```
//! use smom::distributions::{estimate, RecipeId};
//!
//! let recipe: RecipeId = "gaussian:MO".parse().unwrap();
//! let fit = estimate(&recipe, &[0.0, 2.0]).unwrap();
//! let theta = fit.theta_hat.unwrap();
//! assert!((theta[0] - 1.0).abs() < 1e-12);
//! assert!((theta[1] - 1.0).abs() < 1e-12);
//! ```

pub mod asymptotics;
pub mod baselines;
pub mod distributions;
pub mod efficient;
pub mod error;
pub mod linalg;
pub mod mcbench;
pub mod numeric;
pub mod quadrature;
pub mod recipes;
pub mod rng;
pub mod specfun;
pub mod steincore;

pub use error::{Result, SmomError};
pub use linalg::Matrix;
pub use steincore::{EstimateResult, Status, SteinModel, TestFunctionSet};
