//! Discrete predictable characteristics of partial-sum semimartingales.
//!
//! For a discrete semimartingale with increments `eta_i`, the first two
//! predictable characteristics are the cumulative conditional means and the
//! cumulative conditional variances of the martingale part,
//!
//! ```text
//! B_s = sum_{i<=[s]} E(eta_i | F_{i-1}),
//! C_s = sum_{i<=[s]} E(m_i^2 | F_{i-1}),   m_i = eta_i - E(eta_i|F_{i-1}),
//! ```
//!
//! and the compensator of the jump measure acts on a test function `g` as
//! `sum_{i<=[s]} E(g(eta_i)|F_{i-1})`.
//!
//! For the normalized pair process
//!
//! ```text
//! X_n(s) = ( (1/sqrt(n)) sum_{t=2..[ns]} f(S_{t-1}/sqrt(n)) X_t,
//!            (1/sqrt(n)) sum_{t=1..[ns]} X_t )
//! ```
//!
//! the drift is carried by `X_t - D_t` (with `D_t` the martingale-approximant
//! increments) and the second characteristic by `E(D_t^2|F_{t-1})`. The module
//! computes those empirical characteristics, the characteristics of the limit
//! process composed with the pre-limit path (interpolated exactly as the
//! fractional-part displays prescribe), and the gap diagnostics whose decay
//! certifies the convergence: the maximal jump, the drift and covariance
//! gaps, and the big-jump fourth-moment bound.

use serde::Serialize;

use crate::dependence::martingale_increments;
use crate::error::{Error, Result};
use crate::limit_law::FunctionalSpec;
use crate::processes::{InnovationDistribution, ModelVariant, PathBundle, ProcessModel};
use crate::rng::SeedLineage;
use crate::util::floor_ns;
use rand::Rng;

// ---------------------------------------------------------------------------
// Step and interpolated paths
// ---------------------------------------------------------------------------

/// A cadlag step path on the uniform grid `k/n`: constant on
/// `[k/n, (k+1)/n)` with value `values[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepPath {
    pub n: usize,
    pub values: Vec<f64>,
}

impl StepPath {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = floor_ns(self.n, s).min(self.steps());
        self.values[k]
    }

    /// Jump at grid index `k >= 1`.
    pub fn jump(&self, k: usize) -> f64 {
        self.values[k] - self.values[k - 1]
    }

    pub fn from_cumsum(n: usize, increments: impl IntoIterator<Item = f64>) -> Self {
        let mut values = vec![0.0];
        let mut acc = 0.0;
        for inc in increments {
            acc += inc;
            values.push(acc);
        }
        StepPath { n, values }
    }
}

/// A path that is linear on each grid cell: value
/// `values[k] + increments[k] * (ns - k)` on `[k/n, (k+1)/n)`. This is the
/// exact shape of the composed characteristics, whose displays carry a
/// fractional-part correction `(ns - [ns])` times the next increment.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpolatedPath {
    pub n: usize,
    pub values: Vec<f64>,
    pub increments: Vec<f64>,
}

impl InterpolatedPath {
    pub fn steps(&self) -> usize {
        self.values.len() - 1
    }

    pub fn eval(&self, s: f64) -> f64 {
        let k = floor_ns(self.n, s);
        if k >= self.steps() {
            return self.values[self.steps()];
        }
        let frac = self.n as f64 * s - k as f64;
        self.values[k] + self.increments[k] * frac
    }
}

/// Exact supremum of `|step - composed|` over `[0, k_max/n]`. On each cell
/// the step path is constant and the composed path linear, so the cell
/// supremum is attained at the cell endpoints.
pub fn sup_gap(step: &StepPath, composed: &InterpolatedPath, k_max: usize) -> f64 {
    assert_eq!(step.n, composed.n);
    let k_max = k_max.min(step.steps()).min(composed.steps());
    let mut sup = 0.0_f64;
    for k in 0..k_max {
        let e = step.values[k];
        let c0 = composed.values[k];
        let c1 = composed.values[k] + composed.increments[k];
        sup = sup.max((e - c0).abs()).max((e - c1).abs());
    }
    sup.max((step.values[k_max] - composed.values[k_max]).abs())
}

// ---------------------------------------------------------------------------
// Conditional-moment oracles
// ---------------------------------------------------------------------------

/// Closed-form oracle for `E(D_t^2 | F_{t-1})`, the conditional variance of
/// the martingale-approximant increments.
#[derive(Debug, Clone, Copy, Serialize)]
pub enum ConditionalMomentOracle {
    /// Linear models: `E(D_t^2|F_{t-1}) = A^2 var(e)` identically.
    Constant(f64),
    /// ARCH(1): `E(D_t^2|F_{t-1}) = E[e^2] (omega + beta X_{t-1}^2)`.
    Arch1State {
        omega: f64,
        beta: f64,
        eps_variance: f64,
    },
}

impl ConditionalMomentOracle {
    /// The oracle for a model, or an unsupported-model error when no closed
    /// form ships (threshold-AR).
    pub fn for_model(model: &ProcessModel) -> Result<Self> {
        match &model.variant {
            ModelVariant::Linear(cs) => {
                let a_sum = cs.sum();
                Ok(ConditionalMomentOracle::Constant(
                    a_sum * a_sum * model.innovation.variance,
                ))
            }
            ModelVariant::Arch1 { omega, beta } => Ok(ConditionalMomentOracle::Arch1State {
                omega: *omega,
                beta: *beta,
                eps_variance: model.innovation.variance,
            }),
            ModelVariant::ThresholdAr { .. } => Err(Error::UnsupportedModel(
                "no conditional-moment oracle for threshold-ar".into(),
            )),
        }
    }

    /// `E(D_t^2 | F_{t-1})` for `t = 1..=len` along a bundle.
    pub fn martingale_cond_vars(&self, bundle: &PathBundle) -> Vec<f64> {
        match *self {
            ConditionalMomentOracle::Constant(v) => vec![v; bundle.len()],
            ConditionalMomentOracle::Arch1State {
                omega,
                beta,
                eps_variance,
            } => (1..=bundle.len())
                .map(|t| {
                    let prev = if t == 1 {
                        bundle.prev_value
                    } else {
                        bundle.values[t - 2]
                    };
                    eps_variance * (omega + beta * prev * prev)
                })
                .collect(),
        }
    }
}

/// Per-step conditional mean and martingale-part conditional variance of the
/// raw increments `X_t` (the canonical decomposition of the partial sums).
/// Linear: `E(X_t|F_{t-1}) = sum_{i>=1} a_i e_{t-i}`, variance `a_0^2 var(e)`.
/// ARCH(1): mean zero, variance from the state formula.
pub fn increment_condition_arrays(
    model: &ProcessModel,
    bundle: &PathBundle,
) -> Result<(Vec<f64>, Vec<f64>)> {
    match &model.variant {
        ModelVariant::Linear(cs) => {
            let a = &cs.coeffs;
            let means: Vec<f64> = (1..=bundle.len() as isize)
                .map(|t| {
                    a.iter()
                        .enumerate()
                        .skip(1)
                        .filter(|(_, ai)| **ai != 0.0)
                        .map(|(i, &ai)| ai * bundle.innovation(t - i as isize))
                        .sum()
                })
                .collect();
            let v = a[0] * a[0] * model.innovation.variance;
            Ok((means, vec![v; bundle.len()]))
        }
        ModelVariant::Arch1 { .. } => {
            let oracle = ConditionalMomentOracle::for_model(model)?;
            Ok((vec![0.0; bundle.len()], oracle.martingale_cond_vars(bundle)))
        }
        ModelVariant::ThresholdAr { .. } => Err(Error::UnsupportedModel(
            "no conditional-moment oracle for threshold-ar".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Generic discrete characteristics
// ---------------------------------------------------------------------------

/// First and second predictable characteristics of a discrete semimartingale
/// from its increments' conditional means and martingale-part conditional
/// variances: `B_s = sum b_i`, `C_s = sum E(m_i^2|F_{i-1})` as step paths on
/// the integer grid (`n = 1`).
pub fn discrete_characteristics(cond_means: &[f64], cond_vars: &[f64]) -> (StepPath, StepPath) {
    assert_eq!(cond_means.len(), cond_vars.len());
    (
        StepPath::from_cumsum(1, cond_means.iter().copied()),
        StepPath::from_cumsum(1, cond_vars.iter().copied()),
    )
}

/// Third-characteristic integral `sum_{i<=[s]} E(g(eta_i)|F_{i-1})` from
/// per-step conditional means of `g`.
pub fn third_characteristic_integral(cond_g_means: &[f64]) -> StepPath {
    StepPath::from_cumsum(1, cond_g_means.iter().copied())
}

/// Monte Carlo conditional mean `E g(eta)` for iid increments.
pub fn iid_g_mean_mc(
    dist: &InnovationDistribution,
    g: impl Fn(f64) -> f64,
    draws: usize,
    rng: &mut impl Rng,
) -> f64 {
    let mut acc = 0.0;
    for _ in 0..draws {
        acc += g(dist.sample(rng));
    }
    acc / draws as f64
}

/// Per-step `E(g(X_t)|F_{t-1})` for a linear model by inner simulation over
/// the innovation at t: `X_t = b_t + a_0 e_t` with `b_t` known from the
/// bundle.
pub fn linear_conditional_g_means(
    model: &ProcessModel,
    bundle: &PathBundle,
    g: impl Fn(f64) -> f64,
    draws: usize,
    lineage: SeedLineage,
) -> Result<Vec<f64>> {
    let cs = model.coefficients().ok_or_else(|| {
        Error::UnsupportedModel("inner-simulation oracle needs a linear model".into())
    })?;
    let (means, _) = increment_condition_arrays(model, bundle)?;
    let a0 = cs.coeffs[0];
    let mut rng = lineage.stream(crate::rng::streams::AUXILIARY);
    let eps: Vec<f64> = (0..draws)
        .map(|_| model.innovation.sample(&mut rng))
        .collect();
    Ok(means
        .iter()
        .map(|b| eps.iter().map(|e| g(b + a0 * e)).sum::<f64>() / draws as f64)
        .collect())
}

// ---------------------------------------------------------------------------
// Pair process and its characteristics
// ---------------------------------------------------------------------------

/// The normalized pair process as step paths on the grid `t/n`.
#[derive(Debug, Clone)]
pub struct PairPaths {
    pub x1: StepPath,
    pub x2: StepPath,
}

/// Build the pair process over `[0, horizon]` at scale `n`. Errors with a
/// flagged sample when `f` overflows along the path.
pub fn pair_process(
    bundle: &PathBundle,
    f: &FunctionalSpec,
    n: usize,
    horizon: f64,
) -> Result<PairPaths> {
    let steps = floor_ns(n, horizon);
    if steps > bundle.len() {
        return Err(Error::config(format!(
            "pair process needs bundle length >= {steps}, got {}",
            bundle.len()
        )));
    }
    let root_n = (n as f64).sqrt();
    let mut x1 = Vec::with_capacity(steps + 1);
    let mut x2 = Vec::with_capacity(steps + 1);
    x1.push(0.0);
    x2.push(0.0);
    let mut acc1 = 0.0;
    for t in 1..=steps {
        if t >= 2 {
            acc1 +=
                f.f_checked(bundle.partial_sums[t - 1] / root_n)? * bundle.values[t - 1] / root_n;
        }
        x1.push(acc1);
        x2.push(bundle.partial_sums[t] / root_n);
    }
    Ok(PairPaths {
        x1: StepPath { n, values: x1 },
        x2: StepPath { n, values: x2 },
    })
}

/// Empirical characteristics of the pair process.
#[derive(Debug, Clone)]
pub struct CharacteristicPaths {
    pub n: usize,
    pub b1: StepPath,
    pub b2: StepPath,
    pub c11: StepPath,
    pub c12: StepPath,
    pub c22: StepPath,
}

/// Compute the empirical characteristics: the drift components from
/// `X_t - D_t`, the covariance components from `E(D_t^2|F_{t-1})`, with the
/// first component's sums starting at t = 2 and the second's at t = 1.
pub fn empirical_characteristics(
    bundle: &PathBundle,
    model: &ProcessModel,
    f: &FunctionalSpec,
    n: usize,
    horizon: f64,
) -> Result<CharacteristicPaths> {
    let steps = floor_ns(n, horizon);
    if steps > bundle.len() {
        return Err(Error::config(format!(
            "characteristics need bundle length >= {steps}, got {}",
            bundle.len()
        )));
    }
    let d = martingale_increments(model, bundle)?;
    let oracle = ConditionalMomentOracle::for_model(model)?;
    let cond_vars = oracle.martingale_cond_vars(bundle);
    let root_n = (n as f64).sqrt();
    let nf = n as f64;

    let mut b1 = vec![0.0];
    let mut b2 = vec![0.0];
    let mut c11 = vec![0.0];
    let mut c12 = vec![0.0];
    let mut c22 = vec![0.0];
    let (mut ab1, mut ab2, mut ac11, mut ac12, mut ac22) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for t in 1..=steps {
        let drift_inc = bundle.values[t - 1] - d[t - 1];
        let v = cond_vars[t - 1];
        ab2 += drift_inc / root_n;
        ac22 += v / nf;
        if t >= 2 {
            let fx = f.f_checked(bundle.partial_sums[t - 1] / root_n)?;
            ab1 += fx * drift_inc / root_n;
            ac11 += fx * fx * v / nf;
            ac12 += fx * v / nf;
        }
        b1.push(ab1);
        b2.push(ab2);
        c11.push(ac11);
        c12.push(ac12);
        c22.push(ac22);
    }
    Ok(CharacteristicPaths {
        n,
        b1: StepPath { n, values: b1 },
        b2: StepPath { n, values: b2 },
        c11: StepPath { n, values: c11 },
        c12: StepPath { n, values: c12 },
        c22: StepPath { n, values: c22 },
    })
}

/// Characteristics of the limit process composed with the pre-limit path,
/// including the fractional-part interpolation:
///
/// ```text
/// B1(s) o X_n   = (lambda/n)  sum_{t=2..[ns]} f'(X2((t-1)/n)) + frac term,
/// C11(s) o X_n  = (sigma^2/n) sum_{t=2..[ns]} f^2(X2((t-1)/n)) + frac term,
/// C12(s) o X_n  = (sigma^2/n) sum_{t=2..[ns]} f(X2((t-1)/n)) + frac term,
/// C22(s) o X_n  = sigma^2 s,        B2(s) o X_n = 0.
/// ```
#[derive(Debug, Clone)]
pub struct ComposedPaths {
    pub n: usize,
    pub b1: InterpolatedPath,
    pub b2: InterpolatedPath,
    pub c11: InterpolatedPath,
    pub c12: InterpolatedPath,
    pub c22: InterpolatedPath,
}

pub fn composed_characteristics(
    pair: &PairPaths,
    f: &FunctionalSpec,
    lambda: f64,
    sigma: f64,
) -> ComposedPaths {
    let n = pair.x2.n;
    let steps = pair.x2.steps();
    let nf = n as f64;
    let sig2 = sigma * sigma;

    // Per-cell increments carry the fractional-part term: on
    // [k/n, (k+1)/n) the display adds (coef/n) g(X2(k/n)) (ns - k).
    let mut inc_b1 = Vec::with_capacity(steps);
    let mut inc_c11 = Vec::with_capacity(steps);
    let mut inc_c12 = Vec::with_capacity(steps);
    for k in 0..steps {
        let x = pair.x2.values[k];
        inc_b1.push(lambda / nf * f.df(x));
        inc_c11.push(sig2 / nf * f.f(x) * f.f(x));
        inc_c12.push(sig2 / nf * f.f(x));
    }
    // Main sums at grid points: the t = k+1 term of each display equals the
    // cell increment at k, except that the sums start at t = 2 (cell 0
    // contributes nothing to the grid value at k = 1).
    let accumulate = |inc: &[f64]| -> Vec<f64> {
        let mut vals = vec![0.0; steps + 1];
        let mut acc = 0.0;
        for k in 1..=steps {
            if k >= 2 {
                acc += inc[k - 1];
            }
            vals[k] = acc;
        }
        vals
    };
    let b1 = InterpolatedPath {
        n,
        values: accumulate(&inc_b1),
        increments: inc_b1,
    };
    let c11 = InterpolatedPath {
        n,
        values: accumulate(&inc_c11),
        increments: inc_c11,
    };
    let c12 = InterpolatedPath {
        n,
        values: accumulate(&inc_c12),
        increments: inc_c12,
    };
    let b2 = InterpolatedPath {
        n,
        values: vec![0.0; steps + 1],
        increments: vec![0.0; steps],
    };
    let c22 = InterpolatedPath {
        n,
        values: (0..=steps).map(|k| sig2 * k as f64 / nf).collect(),
        increments: vec![sig2 / nf; steps],
    };
    ComposedPaths {
        n,
        b1,
        b2,
        c11,
        c12,
        c22,
    }
}

// ---------------------------------------------------------------------------
// Gap diagnostics
// ---------------------------------------------------------------------------

/// Suprema of the characteristic gaps along one replication, plus the
/// big-jump fourth-moment bound.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub n: usize,
    /// `sup_{0<s<=N} |dX_n(s)|` (Euclidean norm of the pair jump).
    pub sup_jump: f64,
    /// Drift gaps per component.
    pub sup_b_gap: [f64; 2],
    /// Covariance gaps per entry.
    pub sup_c11_gap: f64,
    pub sup_c12_gap: f64,
    pub sup_c22_gap: f64,
    /// `(b, (2/(b^2 n^2)) sum_{t=2..[nN]} (f^4(S_{t-1}/sqrt(n)) X_t^4 + X_t^4))`.
    pub big_jump_mass: Vec<(f64, f64)>,
    /// Index where the stopping threshold was hit, when one was supplied.
    pub stopped_at: Option<usize>,
}

impl GapReport {
    pub fn max_b_gap(&self) -> f64 {
        self.sup_b_gap[0].max(self.sup_b_gap[1])
    }

    pub fn max_c_gap(&self) -> f64 {
        self.sup_c11_gap.max(self.sup_c12_gap).max(self.sup_c22_gap)
    }
}

/// Compute the gap diagnostics for one bundle. When `threshold` is supplied,
/// all suprema are taken over `s <= S_n^a`, the first time the pair process
/// norm reaches the threshold.
#[allow(clippy::too_many_arguments)]
pub fn gap_diagnostics(
    bundle: &PathBundle,
    model: &ProcessModel,
    f: &FunctionalSpec,
    lambda: f64,
    sigma: f64,
    n: usize,
    horizon: f64,
    b_grid: &[f64],
    threshold: Option<f64>,
) -> Result<GapReport> {
    let pair = pair_process(bundle, f, n, horizon)?;
    let emp = empirical_characteristics(bundle, model, f, n, horizon)?;
    let comp = composed_characteristics(&pair, f, lambda, sigma);
    let steps = pair.x2.steps();

    let k_stop = match threshold {
        Some(a) => {
            let mut k_stop = steps;
            for k in 1..=steps {
                if pair.x1.values[k].hypot(pair.x2.values[k]) >= a {
                    k_stop = k;
                    break;
                }
            }
            k_stop
        }
        None => steps,
    };

    let mut sup_jump = 0.0_f64;
    for k in 1..=k_stop {
        sup_jump = sup_jump.max(pair.x1.jump(k).hypot(pair.x2.jump(k)));
    }

    let root_n = (n as f64).sqrt();
    let n2 = (n as f64) * (n as f64);
    let mut fourth = 0.0_f64;
    for t in 2..=k_stop {
        let fx = f.f(bundle.partial_sums[t - 1] / root_n);
        let x4 = bundle.values[t - 1].powi(4);
        fourth += fx.powi(4) * x4 + x4;
    }
    let big_jump_mass = b_grid
        .iter()
        .map(|&b| (b, 2.0 * fourth / (b * b * n2)))
        .collect();

    Ok(GapReport {
        n,
        sup_jump,
        sup_b_gap: [
            sup_gap(&emp.b1, &comp.b1, k_stop),
            sup_gap(&emp.b2, &comp.b2, k_stop),
        ],
        sup_c11_gap: sup_gap(&emp.c11, &comp.c11, k_stop),
        sup_c12_gap: sup_gap(&emp.c12, &comp.c12, k_stop),
        sup_c22_gap: sup_gap(&emp.c22, &comp.c22, k_stop),
        big_jump_mass,
        stopped_at: if threshold.is_some() && k_stop < steps {
            Some(k_stop)
        } else {
            None
        },
    })
}
