//! Limiting objects: Brownian grids, Ito and Riemann integrals, the limit
//! SDE and the unit-root limit laws.
//!
//! The limit of the normalized partial-sum functional is
//!
//! ```text
//! L(r) = lambda * int_0^r f'(V(v)) dv + int_0^r f(V(v)) dV(v),
//! ```
//!
//! where `V = sigma * B` is the Brownian motion the partial-sum process
//! converges to (variance `sigma^2 t`). Writing `dV = sigma dB` this is the
//! familiar `lambda int f'(sigma B) dv + sigma int f(sigma B) dB`; for
//! `sigma = 1` it reduces to `lambda int f'(B) dv + sigma int f(B) dB`. The
//! same pair `(V, L)` solves
//!
//! ```text
//! dX1 = lambda f'(X2) dt + sigma f(X2) dB,   dX2 = sigma dB,
//! ```
//!
//! which is simulated here by Euler-Maruyama on a shared Brownian grid. All
//! stochastic integrals are left-point (Ito) sums; there is no Stratonovich
//! option.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::{streams, SeedLineage};
use crate::util::floor_ns;

/// Values beyond this guard flag the sample instead of propagating NaN/inf.
pub const OVERFLOW_GUARD: f64 = 1e100;

/// Tolerance scale of the finite-difference derivative checks.
const FD_TOLERANCE: f64 = 1e-4;
const FD_STEP: f64 = 1e-5;

// ---------------------------------------------------------------------------
// Functional families
// ---------------------------------------------------------------------------

/// Built-in functional families.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FunctionalFamily {
    Constant(f64),
    Identity,
    /// `c_0 + c_1 x + ... + c_d x^d`.
    Polynomial(Vec<f64>),
    /// `amp * sin(freq * x)`.
    ScaledSine {
        amp: f64,
        freq: f64,
    },
    /// `1 / (1 + exp(-x / scale))`.
    Logistic {
        scale: f64,
    },
    /// `exp(rate * x)`. Grows faster than any polynomial, so it sits outside
    /// the polynomial-growth hypothesis of the convergence theory; admitted
    /// only with an explicit override and labeled as such in reports.
    ExpGrowth {
        rate: f64,
    },
}

/// A twice continuously differentiable functional with certified growth
/// constants `(K, alpha)` such that `|f'(x)| <= K (1 + |x|^alpha)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalSpec {
    pub family: FunctionalFamily,
    pub growth_k: f64,
    pub growth_alpha: f64,
    /// False for the exponential family admitted under the override.
    pub polynomial_growth: bool,
}

impl FunctionalSpec {
    /// Validate and certify a functional. Exponential growth is rejected
    /// here; use [`FunctionalSpec::with_growth_override`].
    pub fn new(family: FunctionalFamily) -> Result<Self> {
        let spec = Self::build(family)?;
        if !spec.polynomial_growth {
            return Err(Error::config(
                "exponential-growth functional rejected: outside the polynomial-growth \
                 hypothesis (pass the growth override to admit it)",
            ));
        }
        Ok(spec)
    }

    /// Like [`FunctionalSpec::new`] but admits exponential growth. Runs with
    /// such a functional are labeled "outside polynomial-growth hypotheses".
    pub fn with_growth_override(family: FunctionalFamily) -> Result<Self> {
        Self::build(family)
    }

    fn build(family: FunctionalFamily) -> Result<Self> {
        let (growth_k, growth_alpha, polynomial_growth) = match &family {
            FunctionalFamily::Constant(c) => {
                if !c.is_finite() {
                    return Err(Error::config("constant functional must be finite"));
                }
                (1.0, 1.0, true)
            }
            FunctionalFamily::Identity => (1.0, 1.0, true),
            FunctionalFamily::Polynomial(coeffs) => {
                if coeffs.is_empty() {
                    return Err(Error::config("polynomial needs at least one coefficient"));
                }
                if coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(Error::config("polynomial coefficients must be finite"));
                }
                let d = coeffs.len() - 1;
                // |f'(x)| <= sum_k k |c_k| |x|^{k-1} <= K (1 + |x|^{max(d-1,1)}).
                let k: f64 = coeffs
                    .iter()
                    .enumerate()
                    .map(|(i, c)| i as f64 * c.abs())
                    .sum();
                (k.max(1.0), (d.saturating_sub(1) as f64).max(1.0), true)
            }
            FunctionalFamily::ScaledSine { amp, freq } => {
                if !(amp.is_finite() && freq.is_finite()) {
                    return Err(Error::config("sine parameters must be finite"));
                }
                ((amp * freq).abs().max(1.0), 1.0, true)
            }
            FunctionalFamily::Logistic { scale } => {
                if !(scale.is_finite() && *scale > 0.0) {
                    return Err(Error::config("logistic scale must be positive"));
                }
                ((0.25 / scale).max(1.0), 1.0, true)
            }
            FunctionalFamily::ExpGrowth { rate } => {
                if !(rate.is_finite() && *rate != 0.0) {
                    return Err(Error::config("exponential rate must be finite and nonzero"));
                }
                (rate.abs().exp(), 1.0, false)
            }
        };
        let spec = FunctionalSpec {
            family,
            growth_k,
            growth_alpha,
            polynomial_growth,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Finite-difference check of `f'` against `f` and `f''` against `f'` on
    /// a standard grid, plus the declared growth bound on that grid.
    fn validate(&self) -> Result<()> {
        let grid: Vec<f64> = (0..=100).map(|i| -5.0 + 0.1 * i as f64).collect();
        // Tolerance FD_TOLERANCE * (1 + |f''|) * h, floored at 1e-7 where
        // central-difference cancellation noise dominates.
        for &x in &grid {
            let fd1 = (self.f(x + FD_STEP) - self.f(x - FD_STEP)) / (2.0 * FD_STEP);
            let tol1 = (FD_TOLERANCE * (1.0 + self.ddf(x).abs()) * FD_STEP).max(1e-7);
            if (fd1 - self.df(x)).abs() > tol1 {
                return Err(Error::config(format!(
                    "derivative check failed at x={x}: fd {fd1} vs f' {}",
                    self.df(x)
                )));
            }
            let fd2 = (self.df(x + FD_STEP) - self.df(x - FD_STEP)) / (2.0 * FD_STEP);
            let tol2 = (FD_TOLERANCE * (1.0 + self.ddf(x).abs()) * FD_STEP).max(1e-7);
            if (fd2 - self.ddf(x)).abs() > tol2 {
                return Err(Error::config(format!(
                    "second-derivative check failed at x={x}: fd {fd2} vs f'' {}",
                    self.ddf(x)
                )));
            }
            if self.polynomial_growth {
                let bound = self.growth_k * (1.0 + x.abs().powf(self.growth_alpha));
                if self.df(x).abs() > bound * (1.0 + 1e-12) {
                    return Err(Error::config(format!(
                        "declared growth bound violated at x={x}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn f(&self, x: f64) -> f64 {
        match &self.family {
            FunctionalFamily::Constant(c) => *c,
            FunctionalFamily::Identity => x,
            FunctionalFamily::Polynomial(c) => horner(c, x),
            FunctionalFamily::ScaledSine { amp, freq } => amp * (freq * x).sin(),
            FunctionalFamily::Logistic { scale } => 1.0 / (1.0 + (-x / scale).exp()),
            FunctionalFamily::ExpGrowth { rate } => (rate * x).exp(),
        }
    }

    pub fn df(&self, x: f64) -> f64 {
        match &self.family {
            FunctionalFamily::Constant(_) => 0.0,
            FunctionalFamily::Identity => 1.0,
            FunctionalFamily::Polynomial(c) => {
                let d: Vec<f64> = c
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, ci)| i as f64 * ci)
                    .collect();
                if d.is_empty() {
                    0.0
                } else {
                    horner(&d, x)
                }
            }
            FunctionalFamily::ScaledSine { amp, freq } => amp * freq * (freq * x).cos(),
            FunctionalFamily::Logistic { scale } => {
                let s = self.f(x);
                s * (1.0 - s) / scale
            }
            FunctionalFamily::ExpGrowth { rate } => rate * (rate * x).exp(),
        }
    }

    pub fn ddf(&self, x: f64) -> f64 {
        match &self.family {
            FunctionalFamily::Constant(_) | FunctionalFamily::Identity => 0.0,
            FunctionalFamily::Polynomial(c) => {
                let dd: Vec<f64> = c
                    .iter()
                    .enumerate()
                    .skip(2)
                    .map(|(i, ci)| (i * (i - 1)) as f64 * ci)
                    .collect();
                if dd.is_empty() {
                    0.0
                } else {
                    horner(&dd, x)
                }
            }
            FunctionalFamily::ScaledSine { amp, freq } => -amp * freq * freq * (freq * x).sin(),
            FunctionalFamily::Logistic { scale } => {
                let s = self.f(x);
                s * (1.0 - s) * (1.0 - 2.0 * s) / (scale * scale)
            }
            FunctionalFamily::ExpGrowth { rate } => rate * rate * (rate * x).exp(),
        }
    }

    /// Guarded evaluation: errors when the value leaves the overflow guard.
    pub fn f_checked(&self, x: f64) -> Result<f64> {
        let v = self.f(x);
        if !v.is_finite() || v.abs() > OVERFLOW_GUARD {
            return Err(Error::Flagged(format!("f({x}) overflowed")));
        }
        Ok(v)
    }

    pub fn constant() -> Self {
        Self::new(FunctionalFamily::Constant(1.0)).unwrap()
    }

    pub fn identity() -> Self {
        Self::new(FunctionalFamily::Identity).unwrap()
    }

    pub fn square() -> Self {
        Self::new(FunctionalFamily::Polynomial(vec![0.0, 0.0, 1.0])).unwrap()
    }

    pub fn label(&self) -> String {
        match &self.family {
            FunctionalFamily::Constant(c) => format!("constant({c})"),
            FunctionalFamily::Identity => "identity".into(),
            FunctionalFamily::Polynomial(c) => format!("polynomial{c:?}"),
            FunctionalFamily::ScaledSine { amp, freq } => format!("sine(amp={amp},freq={freq})"),
            FunctionalFamily::Logistic { scale } => format!("logistic(scale={scale})"),
            FunctionalFamily::ExpGrowth { rate } => format!("exp(rate={rate})"),
        }
    }
}

fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

// ---------------------------------------------------------------------------
// Brownian grids and integrals
// ---------------------------------------------------------------------------

/// A Brownian path sampled on a uniform grid: `steps` increments over
/// `[0, horizon]`, levels exact in distribution at the grid points.
#[derive(Debug, Clone)]
pub struct BrownianGrid {
    pub horizon: f64,
    pub increments: Vec<f64>,
    /// `levels[j] = B(t_j)`, `t_j = j * horizon / steps`, `levels[0] = 0`.
    pub levels: Vec<f64>,
}

impl BrownianGrid {
    pub fn steps(&self) -> usize {
        self.increments.len()
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps() as f64
    }

    /// A deterministic grid with `B(t_j) = t_j`; test stub for exact
    /// quadrature checks.
    pub fn deterministic_ramp(steps: usize, horizon: f64) -> Self {
        let dt = horizon / steps as f64;
        let increments = vec![dt; steps];
        let levels = (0..=steps).map(|j| j as f64 * dt).collect();
        BrownianGrid {
            horizon,
            increments,
            levels,
        }
    }
}

/// Sample a Brownian grid with `steps` increments over `[0, horizon]`.
pub fn brownian_path(steps: usize, horizon: f64, rng: &mut impl Rng) -> BrownianGrid {
    assert!(steps >= 1, "need at least one increment");
    let sd = (horizon / steps as f64).sqrt();
    let mut increments = Vec::with_capacity(steps);
    let mut levels = Vec::with_capacity(steps + 1);
    levels.push(0.0);
    let mut b = 0.0;
    for _ in 0..steps {
        let z: f64 = rng.sample(StandardNormal);
        let db = sd * z;
        increments.push(db);
        b += db;
        levels.push(b);
    }
    BrownianGrid {
        horizon,
        increments,
        levels,
    }
}

/// Convenience: a Brownian grid from a seed lineage.
pub fn brownian_path_from(steps: usize, horizon: f64, lineage: SeedLineage) -> BrownianGrid {
    let mut rng = lineage.stream(streams::BROWNIAN);
    brownian_path(steps, horizon, &mut rng)
}

/// Left-point Ito sum `sum_{t_j < r} g(B(t_j)) dB_{j+1}`, with `r` floored to
/// the grid.
pub fn ito_integral(g: impl Fn(f64) -> f64, grid: &BrownianGrid, r: f64) -> Result<f64> {
    if r < 0.0 || r > grid.horizon + 1e-12 {
        return Err(Error::domain(format!(
            "integration endpoint {r} outside [0, {}]",
            grid.horizon
        )));
    }
    let k = floor_ns(grid.steps(), r / grid.horizon).min(grid.steps());
    let mut acc = 0.0;
    for j in 0..k {
        let v = g(grid.levels[j]);
        if !v.is_finite() || v.abs() > OVERFLOW_GUARD {
            return Err(Error::Flagged(format!("integrand overflowed at t_{j}")));
        }
        acc += v * grid.increments[j];
    }
    Ok(acc)
}

/// Left-point Riemann sum `sum_{t_j < r} g(B(t_j)) dt`.
pub fn riemann_integral(g: impl Fn(f64) -> f64, grid: &BrownianGrid, r: f64) -> Result<f64> {
    if r < 0.0 || r > grid.horizon + 1e-12 {
        return Err(Error::domain(format!(
            "integration endpoint {r} outside [0, {}]",
            grid.horizon
        )));
    }
    let k = floor_ns(grid.steps(), r / grid.horizon).min(grid.steps());
    let dt = grid.dt();
    let mut acc = 0.0;
    for j in 0..k {
        let v = g(grid.levels[j]);
        if !v.is_finite() || v.abs() > OVERFLOW_GUARD {
            return Err(Error::Flagged(format!("integrand overflowed at t_{j}")));
        }
        acc += v * dt;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Limit functional and SDE
// ---------------------------------------------------------------------------

/// One sample of the limit law, split into its drift and Ito parts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LimitSample {
    pub value: f64,
    pub drift_part: f64,
    pub ito_part: f64,
    pub steps: usize,
}

/// Evaluate the limit functional
/// `lambda int_0^r f'(V) dv + int_0^r f(V) dV` with `V = sigma B` on the
/// given grid of the driving standard Brownian motion.
pub fn limit_functional_on_grid(
    f: &FunctionalSpec,
    lambda: f64,
    sigma: f64,
    r: f64,
    grid: &BrownianGrid,
) -> Result<LimitSample> {
    let drift_part = lambda * riemann_integral(|b| f.df(sigma * b), grid, r)?;
    let ito_part = sigma * ito_integral(|b| f.f(sigma * b), grid, r)?;
    let value = drift_part + ito_part;
    if !value.is_finite() || value.abs() > OVERFLOW_GUARD {
        return Err(Error::Flagged("limit sample overflowed".into()));
    }
    Ok(LimitSample {
        value,
        drift_part,
        ito_part,
        steps: grid.steps(),
    })
}

/// Draw a fresh Brownian path and evaluate the limit functional on it.
pub fn limit_functional(
    f: &FunctionalSpec,
    lambda: f64,
    sigma: f64,
    r: f64,
    steps: usize,
    lineage: SeedLineage,
) -> Result<LimitSample> {
    let horizon = r.max(1.0);
    let grid = brownian_path_from(steps, horizon, lineage);
    limit_functional_on_grid(f, lambda, sigma, r, &grid)
}

/// Euler-Maruyama paths of the pair SDE
/// `dX1 = lambda f'(sigma X2) dt + sigma f(sigma X2) dB`, `dX2 = dB`. The
/// second coordinate equals the driving grid exactly; the first matches
/// [`limit_functional_on_grid`] on the same grid up to summation order.
#[derive(Debug, Clone)]
pub struct SdePaths {
    pub x1: Vec<f64>,
    pub grid: BrownianGrid,
}

pub fn simulate_sde_on_grid(
    f: &FunctionalSpec,
    lambda: f64,
    sigma: f64,
    grid: BrownianGrid,
) -> Result<SdePaths> {
    let dt = grid.dt();
    let mut x1 = Vec::with_capacity(grid.steps() + 1);
    x1.push(0.0);
    let mut x = 0.0_f64;
    for j in 0..grid.steps() {
        let v = sigma * grid.levels[j];
        x += lambda * f.df(v) * dt + sigma * f.f(v) * grid.increments[j];
        if !x.is_finite() || x.abs() > OVERFLOW_GUARD {
            return Err(Error::Flagged(format!("SDE path diverged at step {j}")));
        }
        x1.push(x);
    }
    Ok(SdePaths { x1, grid })
}

pub fn simulate_sde(
    f: &FunctionalSpec,
    lambda: f64,
    sigma: f64,
    steps: usize,
    lineage: SeedLineage,
) -> Result<SdePaths> {
    let grid = brownian_path_from(steps, 1.0, lineage);
    simulate_sde_on_grid(f, lambda, sigma, grid)
}

impl SdePaths {
    /// `X1` at time `r` (floored to the grid).
    pub fn x1_at(&self, r: f64) -> f64 {
        let k = floor_ns(self.grid.steps(), r / self.grid.horizon).min(self.grid.steps());
        self.x1[k]
    }
}

// ---------------------------------------------------------------------------
// Unit-root limit laws
// ---------------------------------------------------------------------------

/// One joint sample of the unit-root limit laws: the coefficient-statistic
/// law `(lambda + sigma^2 I) / (sigma^2 Q)` and the t-statistic law
/// `(lambda + sigma^2 I) / sqrt(Q)`, where `I = int_0^1 B dB` and
/// `Q = int_0^1 B^2 dv` on a shared standard Brownian path.
///
/// The t-statistic form matches the finite-sample regression t-statistic
/// when `sigma^2` equals the innovation variance `gamma(0)` (in particular
/// for iid errors with unit variance); under serial correlation the
/// finite-sample t-statistic concentrates on this law rescaled by
/// `sigma sqrt(gamma(0))`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct UnitRootLimitSample {
    pub ratio: f64,
    pub t_form: f64,
    pub ito: f64,
    pub quad: f64,
}

pub fn unit_root_limits_on_grid(
    lambda: f64,
    sigma: f64,
    grid: &BrownianGrid,
) -> Result<UnitRootLimitSample> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::domain("unit-root limits need sigma > 0"));
    }
    let ito = ito_integral(|b| b, grid, 1.0)?;
    let quad = riemann_integral(|b| b * b, grid, 1.0)?;
    if quad < 1e-12 {
        return Err(Error::Flagged("near-zero quadratic functional".into()));
    }
    let numerator = lambda + sigma * sigma * ito;
    Ok(UnitRootLimitSample {
        ratio: numerator / (sigma * sigma * quad),
        t_form: numerator / quad.sqrt(),
        ito,
        quad,
    })
}

pub fn unit_root_limits(
    lambda: f64,
    sigma: f64,
    steps: usize,
    lineage: SeedLineage,
) -> Result<UnitRootLimitSample> {
    let grid = brownian_path_from(steps, 1.0, lineage);
    unit_root_limits_on_grid(lambda, sigma, &grid)
}
