//! Simulation laboratory for sums of causal processes.
//!
//! The crate simulates stationary causal sequences `X_n = g(..., e_{n-1}, e_n)`
//! driven by iid innovations, computes the dependence functionals that control
//! their partial sums (Beveridge-Nelson decompositions, projection norms,
//! long-run parameters), extracts the discrete predictable characteristics of
//! the associated partial-sum semimartingales, and certifies by Monte Carlo
//! that normalized functionals of the partial sums
//!
//! ```text
//! (1/sqrt(n)) * sum_{t=2..[nr]} f(S_{t-1}/sqrt(n)) X_t
//! ```
//!
//! converge in distribution to the stochastic integral
//!
//! ```text
//! lambda * int_0^r f'(V(v)) dv  +  int_0^r f(V(v)) dV(v),
//! ```
//!
//! where `V` is a Brownian motion with variance `sigma^2 t`, `lambda` is the
//! one-sided covariance sum and `sigma` the long-run standard deviation of the
//! process. The same machinery reproduces the classical unit-root limit laws
//! for the OLS autoregression coefficient and its t-statistic.
//!
//! Modules:
//! - [`rng`]: counter-based, replication-indexed random streams.
//! - [`processes`]: innovation distributions, process models, path bundles.
//! - [`dependence`]: projection norms, martingale approximation, long-run
//!   parameters, summability checks.
//! - [`characteristics`]: discrete predictable characteristics, composed
//!   characteristics and gap diagnostics.
//! - [`limit_law`]: Brownian grids, Ito/Riemann integrals, the limit SDE and
//!   unit-root limit samplers.
//! - [`stats`]: finite-sample statistics, ensembles, two-sample KS tests and
//!   full convergence experiments.
//! - [`config`]: experiment configuration files.
//! - [`export`]: CSV/JSON artifact writers.

pub mod characteristics;
pub mod config;
pub mod dependence;
pub mod error;
pub mod export;
pub mod limit_law;
pub mod processes;
pub mod rng;
pub mod stats;
pub(crate) mod util;

pub use error::{Error, Result};
pub use limit_law::FunctionalSpec;
pub use processes::{InnovationDistribution, PathBundle, ProcessModel};
pub use rng::SeedLineage;
