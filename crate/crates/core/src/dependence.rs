//! Dependence functionals of causal processes.
//!
//! For a causal process driven by the filtration `F_k = (..., e_{k-1}, e_k)`,
//! the projection operator `P_k Z = E(Z|F_k) - E(Z|F_{k-1})` measures how much
//! of `Z` is revealed by the innovation at time k. This module computes:
//!
//! - the Beveridge-Nelson decomposition of linear processes,
//!   `U_n = A e_n + et_{n-1} - et_n` with `A = sum a_i` and
//!   `et_k = sum_i at_i e_{k-i}`, `at_i = sum_{k>i} a_k`;
//! - projection norms `theta_{n,p} = ||P_0 X_n||_p`, their cumulative sums and
//!   tails;
//! - the martingale approximation `D_k = sum_{i>=k} P_k X_i`,
//!   `M_k = sum_{i<=k} D_i`, remainder `R_k = S_k - M_k`;
//! - long-run parameters `lambda = sum_{j>=1} E X_0 X_j` and
//!   `sigma = ||D_k||`;
//! - numerical checks of the summability conditions that the convergence
//!   theory requires, and of the maximal inequality that controls
//!   `max_k |S_k|`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::processes::{
    simulate_path, CoefficientSequence, InnovationDistribution, ModelVariant, PathBundle,
    ProcessModel,
};
use crate::rng::{streams, SeedLineage};
use crate::util::{kahan_sum, mean, std_dev};

/// Pairs used by the Monte Carlo fallback for `||e - e'||_p`.
const PAIR_NORM_MC_PAIRS: usize = 1_000_000;

// ---------------------------------------------------------------------------
// Beveridge-Nelson decomposition
// ---------------------------------------------------------------------------

/// Beveridge-Nelson data for a stored coefficient vector: the level sum
/// `A = sum a_i` and the tail sums `at_i = sum_{k>i} a_k` (so `at_{m} = 0`
/// for the last stored index m).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BnDecomposition {
    pub coeff_sum: f64,
    pub tilde: Vec<f64>,
}

/// Decompose a stored coefficient vector.
pub fn bn_decompose(coeffs: &[f64]) -> Result<BnDecomposition> {
    if coeffs.is_empty() {
        return Err(Error::config(
            "cannot decompose an empty coefficient sequence",
        ));
    }
    let m = coeffs.len();
    // Backward cumulative sums keep at_{i-1} - at_i = a_i exact in fp.
    let mut tilde = vec![0.0_f64; m];
    let mut acc = 0.0_f64;
    for i in (1..m).rev() {
        acc += coeffs[i];
        tilde[i - 1] = acc;
    }
    Ok(BnDecomposition {
        coeff_sum: acc + coeffs[0],
        tilde,
    })
}

impl BnDecomposition {
    /// `et_k = sum_i at_i e_{k-i}` on a simulated bundle. Structural zeros
    /// (the last tail sum is always zero) are skipped so the lookback stays
    /// within the bundle's burn-in window.
    pub fn tilde_process(&self, bundle: &PathBundle, k: isize) -> f64 {
        self.tilde
            .iter()
            .enumerate()
            .filter(|(_, ti)| **ti != 0.0)
            .map(|(i, &ti)| ti * bundle.innovation(k - i as isize))
            .sum()
    }
}

// ---------------------------------------------------------------------------
// Projection norms
// ---------------------------------------------------------------------------

/// `||e_0 - e_0'||_p`, closed form where available, Monte Carlo otherwise.
pub fn centered_pair_norm(
    innovation: &InnovationDistribution,
    p: f64,
    lineage: SeedLineage,
) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::domain(format!("norm order must be >= 1, got {p}")));
    }
    if let Some(c0) = innovation.centered_pair_norm(p) {
        return Ok(c0);
    }
    let mut rng = lineage.stream(streams::AUXILIARY);
    Ok(innovation.centered_pair_norm_mc(p, PAIR_NORM_MC_PAIRS, &mut rng))
}

/// Projection norms of a linear process: `theta_{n,p} = c_0 |a_n|` with
/// `c_0 = ||e_0 - e_0'||_p`.
pub fn projection_norm_linear(
    coeffs: &CoefficientSequence,
    p: f64,
    innovation: &InnovationDistribution,
    lineage: SeedLineage,
) -> Result<Vec<f64>> {
    let c0 = centered_pair_norm(innovation, p, lineage)?;
    Ok(coeffs.coeffs.iter().map(|a| c0 * a.abs()).collect())
}

/// A nested Monte Carlo estimate with its sampling error and the upward bias
/// scale induced by the finite inner loop.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    /// `sqrt((s_A^2 + s_B^2)/J)`: the standard deviation of the inner-mean
    /// noise that enters the plug-in norm. The estimate is biased upward by
    /// at most this scale.
    pub inner_bias: f64,
    /// Set when the bias scale exceeds a third of the estimate.
    pub bias_flagged: bool,
}

/// Nested Monte Carlo estimate of the projection norm `theta_{n,p}` via the
/// coupled-innovation route: `||E(X_n|F_0) - E(X_n^*|F_0^*)||_p`, where `*`
/// replaces `e_0` by an independent copy and keeps everything else. For
/// linear models this equals `c_0 |a_n|`, the same value the closed-form
/// route computes.
///
/// Per outer replication: fix a past `(..., e_{-1})` and a pivot `e_0`;
/// average `X_n` over `inner` redraws of the future `(e_1 .. e_n)`; then
/// redraw the pivot once and average again over fresh futures. The inner
/// means are unbiased for the two conditional means; the plug-in p-norm of
/// their difference is biased upward by the inner noise, reported as
/// `inner_bias`.
pub fn projection_norm_mc(
    model: &ProcessModel,
    n: usize,
    p: f64,
    outer: usize,
    inner: usize,
    lineage: SeedLineage,
) -> Result<McEstimate> {
    if inner < 2 {
        return Err(Error::config(
            "nested estimator needs at least 2 inner replicates",
        ));
    }
    if outer < 2 {
        return Err(Error::config(
            "nested estimator needs at least 2 outer replicates",
        ));
    }
    if p < 1.0 {
        return Err(Error::domain(format!("norm order must be >= 1, got {p}")));
    }

    let burn = model.burn_in;
    let base = lineage.subexperiment(0x4E57);

    // One outer replication: (|difference of inner means|^p, inner-mean
    // noise variance). Each replication owns its streams, so the loop
    // parallelizes with results identical for any worker count.
    let per_rep: Vec<(f64, f64)> = (0..outer as u64)
        .into_par_iter()
        .map(|rep| {
            let rep_lineage = base.replication(rep);
            let mut past_rng = rep_lineage.stream(streams::INNOVATIONS);
            let mut inner_rng = rep_lineage.stream(streams::NESTED_INNER);

            // Past e_{-burn} .. e_{-1} and the pivotal e_0.
            let past: Vec<f64> = (0..burn)
                .map(|_| model.innovation.sample(&mut past_rng))
                .collect();
            let e0 = model.innovation.sample(&mut past_rng);

            let eval =
                |e0v: f64, future: &[f64]| -> f64 { causal_value(model, &past, e0v, future, n) };

            // E(X_n | F_0): future redrawn, e_0 fixed.
            let mut sum_a = 0.0;
            let mut sumsq_a = 0.0;
            let mut future = vec![0.0_f64; n];
            for _ in 0..inner {
                for f in future.iter_mut() {
                    *f = model.innovation.sample(&mut inner_rng);
                }
                let x = eval(e0, &future);
                sum_a += x;
                sumsq_a += x * x;
            }
            // E(X_n | F_0^*): pivot redrawn once, futures per replicate.
            let e0_star = model.innovation.sample(&mut past_rng);
            let mut sum_b = 0.0;
            let mut sumsq_b = 0.0;
            for _ in 0..inner {
                for f in future.iter_mut() {
                    *f = model.innovation.sample(&mut inner_rng);
                }
                let x = eval(e0_star, &future);
                sum_b += x;
                sumsq_b += x * x;
            }
            let j = inner as f64;
            let mean_a = sum_a / j;
            let mean_b = sum_b / j;
            let var_a = (sumsq_a / j - mean_a * mean_a).max(0.0);
            let var_b = (sumsq_b / j - mean_b * mean_b).max(0.0);
            ((mean_a - mean_b).abs().powf(p), (var_a + var_b) / j)
        })
        .collect();
    let abs_p: Vec<f64> = per_rep.iter().map(|(a, _)| *a).collect();
    let inner_var_acc = kahan_sum(per_rep.iter().map(|(_, v)| *v));

    let m = mean(&abs_p);
    let estimate = m.powf(1.0 / p);
    // Delta method: se(m^{1/p}) = se(m) * m^{1/p - 1} / p.
    let se_m = std_dev(&abs_p) / (outer as f64).sqrt();
    let stderr = if m > 0.0 {
        se_m * m.powf(1.0 / p - 1.0) / p
    } else {
        0.0
    };
    let inner_bias = (inner_var_acc / outer as f64).sqrt();
    Ok(McEstimate {
        estimate,
        stderr,
        inner_bias,
        bias_flagged: inner_bias > estimate / 3.0,
    })
}

/// Evaluate `X_n` for an explicit past / pivot / future innovation split.
/// Index conventions: `past[j]` is `e_{j - burn}`, then `e_0`, then
/// `future[j]` is `e_{j+1}`.
fn causal_value(model: &ProcessModel, past: &[f64], e0: f64, future: &[f64], n: usize) -> f64 {
    let burn = past.len();
    let at = |idx: isize| -> f64 {
        if idx > 0 {
            future[(idx - 1) as usize]
        } else if idx == 0 {
            e0
        } else {
            past[(idx + burn as isize) as usize]
        }
    };
    match &model.variant {
        ModelVariant::Linear(cs) => {
            let mut acc = 0.0;
            for (i, &a) in cs.coeffs.iter().enumerate() {
                let idx = n as isize - i as isize;
                if idx < -(burn as isize) {
                    break;
                }
                acc += a * at(idx);
            }
            acc
        }
        ModelVariant::ThresholdAr {
            theta_pos,
            theta_neg,
            noise_scale,
        } => {
            let mut x = 0.0_f64;
            for idx in (-(burn as isize) + 1)..=(n as isize) {
                x = theta_pos * x.max(0.0) + theta_neg * x.min(0.0) + noise_scale * at(idx);
            }
            x
        }
        ModelVariant::Arch1 { omega, beta } => {
            let mut x = 0.0_f64;
            for idx in (-(burn as isize) + 1)..=(n as isize) {
                x = at(idx) * (omega + beta * x * x).sqrt();
            }
            x
        }
    }
}

// ---------------------------------------------------------------------------
// Dependence profile
// ---------------------------------------------------------------------------

/// Projection norms `theta_{n,p}` with their cumulative sums
/// `Lambda_{n} = sum_{i<=n} theta_i` and tails `Theta_m = sum_{i>=m} theta_i`.
/// `tails` has one more entry than `theta`; its last element is the tail of
/// the truncated family (`c_0 *` coefficient tail bound for linear models).
#[derive(Debug, Clone, Serialize)]
pub struct DependenceProfile {
    pub p: f64,
    pub theta: Vec<f64>,
    pub cumulative: Vec<f64>,
    pub tails: Vec<f64>,
}

impl DependenceProfile {
    /// Build from explicit projection norms plus the tail mass beyond them.
    pub fn from_theta(theta: Vec<f64>, beyond: f64, p: f64) -> Result<Self> {
        if theta.iter().any(|t| *t < 0.0) {
            return Err(Error::domain("projection norms must be nonnegative"));
        }
        let mut cumulative = Vec::with_capacity(theta.len());
        let mut acc = 0.0;
        for &t in &theta {
            acc += t;
            cumulative.push(acc);
        }
        let mut tails = vec![0.0_f64; theta.len() + 1];
        tails[theta.len()] = beyond;
        let mut tail = beyond;
        for i in (0..theta.len()).rev() {
            tail += theta[i];
            tails[i] = tail;
        }
        Ok(DependenceProfile {
            p,
            theta,
            cumulative,
            tails,
        })
    }

    /// Closed-form profile of a linear model.
    pub fn linear(model: &ProcessModel, p: f64, lineage: SeedLineage) -> Result<Self> {
        let coeffs = model
            .coefficients()
            .ok_or_else(|| Error::UnsupportedModel("profile needs a linear model".into()))?;
        let c0 = centered_pair_norm(&model.innovation, p, lineage)?;
        let theta = coeffs.coeffs.iter().map(|a| c0 * a.abs()).collect();
        let beyond = if coeffs.tail_bound.is_finite() {
            c0 * coeffs.tail_bound
        } else {
            f64::INFINITY
        };
        Self::from_theta(theta, beyond, p)
    }

    /// `Theta_{0,p}`: the total projection mass including the truncation tail.
    pub fn total(&self) -> f64 {
        self.tails[0]
    }
}

// ---------------------------------------------------------------------------
// Martingale approximation
// ---------------------------------------------------------------------------

/// The martingale approximation of a linear bundle: increments `D_k = A e_k`,
/// martingale `M_k`, remainder `R_k = S_k - M_k`.
#[derive(Debug, Clone)]
pub struct MartingaleDecomposition {
    pub increments: Vec<f64>,
    pub martingale: Vec<f64>,
    pub remainder: Vec<f64>,
}

/// Compute `D`, `M`, `R` for a bundle generated by a linear model.
pub fn martingale_approximant_linear(
    bundle: &PathBundle,
    bn: &BnDecomposition,
) -> Result<MartingaleDecomposition> {
    let n = bundle.len();
    if bundle.burn_in + 1 < bn.tilde.len() {
        return Err(Error::config(
            "bundle burn-in shorter than the decomposition window; bundle and model mismatch",
        ));
    }
    let a_sum = bn.coeff_sum;
    let increments: Vec<f64> = (1..=n as isize)
        .map(|k| a_sum * bundle.innovation(k))
        .collect();
    let mut martingale = Vec::with_capacity(n + 1);
    martingale.push(0.0);
    let mut acc = 0.0;
    for &d in &increments {
        acc += d;
        martingale.push(acc);
    }
    let remainder: Vec<f64> = (0..=n)
        .map(|k| bundle.partial_sums[k] - martingale[k])
        .collect();
    Ok(MartingaleDecomposition {
        increments,
        martingale,
        remainder,
    })
}

/// Martingale-approximant increments `D_t` for oracle-supported models:
/// linear (`D_t = A e_t`) and arch1 (`D_t = X_t`, already a martingale
/// difference).
pub fn martingale_increments(model: &ProcessModel, bundle: &PathBundle) -> Result<Vec<f64>> {
    match &model.variant {
        ModelVariant::Linear(cs) => {
            let a_sum = cs.sum();
            Ok((1..=bundle.len() as isize)
                .map(|k| a_sum * bundle.innovation(k))
                .collect())
        }
        ModelVariant::Arch1 { .. } => Ok(bundle.values.clone()),
        ModelVariant::ThresholdAr { .. } => Err(Error::UnsupportedModel(
            "threshold-ar has no closed-form martingale increments".into(),
        )),
    }
}

// ---------------------------------------------------------------------------
// Long-run parameters
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub enum Provenance {
    Analytic,
    MonteCarlo { lambda_se: f64, sigma_sq_se: f64 },
}

/// Long-run parameters `lambda = sum_{j>=1} E X_0 X_j` and `sigma = ||D_k||`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LongRunParams {
    pub lambda: f64,
    pub sigma: f64,
    pub provenance: Provenance,
}

/// Compute long-run parameters: analytic for linear and arch1 models, Monte
/// Carlo otherwise (`sigma^2` from the ensemble variance of `S_h/sqrt(h)`,
/// `lambda = (sigma^2 - gamma(0))/2`).
pub fn long_run_params(
    model: &ProcessModel,
    reps: usize,
    horizon: usize,
    lineage: SeedLineage,
) -> Result<LongRunParams> {
    match &model.variant {
        ModelVariant::Linear(cs) => {
            if !cs.summable() {
                return Err(Error::Domain(
                    "coefficient family is not absolutely summable; long-run variance diverges"
                        .into(),
                ));
            }
            let analytic = model.analytic().expect("linear");
            Ok(LongRunParams {
                lambda: analytic.lambda,
                sigma: analytic.sigma,
                provenance: Provenance::Analytic,
            })
        }
        ModelVariant::Arch1 { .. } => {
            // Martingale differences: lambda = 0, sigma^2 = gamma(0).
            let g0 = model.autocovariance(0).expect("arch1 closed form");
            Ok(LongRunParams {
                lambda: 0.0,
                sigma: g0.sqrt(),
                provenance: Provenance::Analytic,
            })
        }
        ModelVariant::ThresholdAr { .. } => long_run_params_mc(model, reps, horizon, lineage),
    }
}

/// Monte Carlo route for the long-run parameters of any simulable model:
/// `sigma^2` from the ensemble mean of `(S_h/sqrt(h))^2` and
/// `lambda = (sigma^2 - gamma(0))/2`, with standard errors from the
/// replication spread. For models with an analytic route the two must agree
/// within sampling error (up to the O(1/h) window bias).
///
/// The partial-sum limit theory needs centered processes, and an asymmetric
/// threshold-AR, say, has a nonzero stationary mean whose drift would
/// silently contaminate both estimates; a materially nonzero process mean is
/// therefore a domain error here.
pub fn long_run_params_mc(
    model: &ProcessModel,
    reps: usize,
    horizon: usize,
    lineage: SeedLineage,
) -> Result<LongRunParams> {
    if reps < 2 || horizon < 2 {
        return Err(Error::config(
            "Monte Carlo long-run estimate needs reps, horizon >= 2",
        ));
    }
    let h = horizon as f64;
    let base = lineage.subexperiment(0x10E6);
    let per_rep: Vec<(f64, f64, f64)> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let bundle = simulate_path(model, horizon, base.replication(rep))?;
            let s = bundle.partial_sums[horizon] / h.sqrt();
            Ok((
                s * s,
                kahan_sum(bundle.values.iter().map(|x| x * x)) / h,
                bundle.partial_sums[horizon] / h,
            ))
        })
        .collect::<Result<_>>()?;
    let path_means: Vec<f64> = per_rep.iter().map(|(_, _, m)| *m).collect();
    let mu = mean(&path_means);
    let mu_se = std_dev(&path_means) / (reps as f64).sqrt();
    if mu.abs() > (4.0 * mu_se).max(1e-8) {
        return Err(Error::Domain(format!(
            "process mean is materially nonzero (estimate {mu:.5} +- {mu_se:.5}); \
             the partial-sum limit theory needs centered processes"
        )));
    }
    let scaled_sq: Vec<f64> = per_rep.iter().map(|(s, _, _)| *s).collect();
    let lambda_samples: Vec<f64> = per_rep.iter().map(|(s, g, _)| 0.5 * (s - g)).collect();
    let sigma_sq = mean(&scaled_sq);
    Ok(LongRunParams {
        lambda: mean(&lambda_samples),
        sigma: sigma_sq.max(0.0).sqrt(),
        provenance: Provenance::MonteCarlo {
            lambda_se: std_dev(&lambda_samples) / (reps as f64).sqrt(),
            sigma_sq_se: std_dev(&scaled_sq) / (reps as f64).sqrt(),
        },
    })
}

// ---------------------------------------------------------------------------
// Assumption checks
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Pass,
    Fail,
}

/// Report from the summability/decay check of the projection-norm tails.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub q: f64,
    pub q_star: f64,
    /// `(n, Theta_{n,q*} * n^{1/2 - 1/q*} * log n)` over the probe grid.
    pub scaled: Vec<(usize, f64)>,
    pub sup_scaled: f64,
    pub diverges: bool,
    pub verdict: Verdict,
}

/// Check the required decay `Theta_{n,q*} = O(n^{1/q* - 1/2} (log n)^{-1})`
/// with `q* = min(q, 4)`: the scaled sequence must plateau or shrink over the
/// probe grid. Diagnostic only; never errors.
pub fn tail_decay_check(profile: &DependenceProfile, q: f64) -> RateReport {
    let q_star = q.min(4.0);
    let exponent = 0.5 - 1.0 / q_star;
    let len = profile.tails.len();

    if !profile.total().is_finite() {
        return RateReport {
            q,
            q_star,
            scaled: vec![],
            sup_scaled: f64::INFINITY,
            diverges: true,
            verdict: Verdict::Fail,
        };
    }

    let mut scaled = Vec::new();
    for n in 2..len {
        let t = profile.tails[n] * (n as f64).powf(exponent) * (n as f64).ln();
        scaled.push((n, t));
    }
    if scaled.is_empty() {
        // Window of length <= 2: tails vanish immediately.
        return RateReport {
            q,
            q_star,
            scaled,
            sup_scaled: 0.0,
            diverges: false,
            verdict: Verdict::Pass,
        };
    }
    let sup_scaled = scaled.iter().map(|(_, t)| *t).fold(0.0_f64, f64::max);
    // Plateau test: the scaled statistic over the last quarter of the grid
    // must not exceed its level over the first quarter (after an initial
    // transient the admissible families decay, the inadmissible ones grow).
    let q1 = scaled.len().div_ceil(4);
    let head = scaled[..q1].iter().map(|(_, t)| *t).fold(0.0_f64, f64::max);
    let tail_start = scaled.len() - q1;
    let tail = scaled[tail_start..]
        .iter()
        .map(|(_, t)| *t)
        .fold(0.0_f64, f64::max);
    let grows = tail > head * 1.05 + 1e-12;
    RateReport {
        q,
        q_star,
        scaled,
        sup_scaled,
        diverges: false,
        verdict: if grows { Verdict::Fail } else { Verdict::Pass },
    }
}

/// Report for the conditional-variance stability condition
/// `sum_k ||E(D_k^2|F_0) - sigma^2||_{q*/2} < infinity`.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionalVarianceReport {
    pub q_star: f64,
    /// `||E(D_k^2|F_0) - sigma^2||_{q*/2}` for the probed k.
    pub terms: Vec<(usize, f64)>,
    /// Geometric decay rate of the terms (None when all terms vanish).
    pub decay_rate: Option<f64>,
    pub verdict: Verdict,
}

/// Check the conditional-variance condition for models with a closed-form
/// conditional variance. Linear models have `E(D_k^2|F_0) = A^2 var(e)`
/// identically for k >= 1, so every term vanishes. For arch1,
/// `E(D_k^2|F_0) - sigma^2 = (beta E e^2)^k (X_0^2 - sigma^2)`, so the norm
/// decays geometrically at rate `beta E e^2`; the base norm
/// `||X_0^2 - sigma^2||_{q*/2}` is estimated by plain Monte Carlo.
pub fn conditional_variance_check(
    model: &ProcessModel,
    q: f64,
    probe_k: usize,
    reps: usize,
    lineage: SeedLineage,
) -> Result<ConditionalVarianceReport> {
    let q_star = q.min(4.0);
    match &model.variant {
        ModelVariant::Linear(_) => Ok(ConditionalVarianceReport {
            q_star,
            terms: (1..=probe_k).map(|k| (k, 0.0)).collect(),
            decay_rate: None,
            verdict: Verdict::Pass,
        }),
        ModelVariant::Arch1 { beta, .. } => {
            let rate = beta * model.innovation.variance;
            let sigma_sq = model.autocovariance(0).expect("arch1 closed form");
            let norm_order = q_star / 2.0;
            let base = lineage.subexperiment(0xA552);
            let mut acc = 0.0_f64;
            for rep in 0..reps {
                let b = simulate_path(model, 1, base.replication(rep as u64))?;
                acc += (b.values[0] * b.values[0] - sigma_sq)
                    .abs()
                    .powf(norm_order);
            }
            let base_norm = (acc / reps as f64).powf(1.0 / norm_order);
            let terms: Vec<(usize, f64)> = (1..=probe_k)
                .map(|k| (k, rate.powi(k as i32) * base_norm))
                .collect();
            Ok(ConditionalVarianceReport {
                q_star,
                terms,
                decay_rate: Some(rate),
                verdict: if rate < 1.0 {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                },
            })
        }
        ModelVariant::ThresholdAr { .. } => Err(Error::UnsupportedModel(
            "conditional-variance condition needs a closed-form conditional variance".into(),
        )),
    }
}

/// The triple sum `sum_{r>=0} sum_{k>=0} sum_{j>k} |a_j| |at_{j+r}|` that
/// bounds the third-moment condition for linear models. Computed over the
/// stored window; errors when the generating family is not absolutely
/// summable.
pub fn cross_moment_bound_linear(coeffs: &CoefficientSequence) -> Result<f64> {
    if !coeffs.summable() {
        return Err(Error::Domain(
            "coefficient family is not absolutely summable; the bound diverges".into(),
        ));
    }
    let bn = bn_decompose(&coeffs.coeffs)?;
    let m = coeffs.coeffs.len();
    // sum_j j * |a_j| * T_j with T_j = sum_{s >= j} |at_s|; the factor j
    // counts the admissible k < j.
    let mut tilde_tail = vec![0.0_f64; m + 1];
    for s in (0..m).rev() {
        tilde_tail[s] = tilde_tail[s + 1] + bn.tilde[s].abs();
    }
    let mut total = 0.0_f64;
    for (j, a) in coeffs.coeffs.iter().enumerate().take(m).skip(1) {
        total += j as f64 * a.abs() * tilde_tail[j];
    }
    Ok(total)
}

// ---------------------------------------------------------------------------
// Maximal inequality
// ---------------------------------------------------------------------------

/// Monte Carlo check of the maximal inequality
/// `||max_{k<=n} |S_k|||_q <= (q B_q / (q-1)) n^{1/q'} Theta_{0,q}`
/// with `q' = min(2, q)`, `B_q = 18 q^{3/2} (q-1)^{-1/2}` for `q != 2` and
/// `B_q = 1` at `q = 2`.
#[derive(Debug, Clone, Serialize)]
pub struct MaximalInequalityReport {
    pub q: f64,
    pub n: usize,
    pub lhs: f64,
    pub lhs_stderr: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn maximal_inequality_check(
    model: &ProcessModel,
    profile: &DependenceProfile,
    q: f64,
    n: usize,
    reps: usize,
    lineage: SeedLineage,
) -> Result<MaximalInequalityReport> {
    if q <= 1.0 {
        return Err(Error::domain("maximal inequality needs q > 1"));
    }
    let theta_total = profile.total();
    if !theta_total.is_finite() {
        return Err(Error::config(
            "Theta_{0,q} is not finite; inequality unavailable",
        ));
    }
    let b_q = if q == 2.0 {
        1.0
    } else {
        18.0 * q.powf(1.5) / (q - 1.0).sqrt()
    };
    let q_prime = q.min(2.0);
    let rhs = q * b_q / (q - 1.0) * (n as f64).powf(1.0 / q_prime) * theta_total;

    let base = lineage.subexperiment(0x3A71);
    let max_pow: Vec<f64> = (0..reps as u64)
        .into_par_iter()
        .map(|rep| {
            let bundle = simulate_path(model, n, base.replication(rep))?;
            let m = bundle
                .partial_sums
                .iter()
                .skip(1)
                .fold(0.0_f64, |acc, s| acc.max(s.abs()));
            Ok(m.powf(q))
        })
        .collect::<Result<_>>()?;
    let mq = mean(&max_pow);
    let lhs = mq.powf(1.0 / q);
    let se_m = std_dev(&max_pow) / (reps as f64).sqrt();
    let lhs_stderr = if mq > 0.0 {
        se_m * mq.powf(1.0 / q - 1.0) / q
    } else {
        0.0
    };
    Ok(MaximalInequalityReport {
        q,
        n,
        lhs,
        lhs_stderr,
        rhs,
        holds: lhs <= rhs + 3.0 * lhs_stderr,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::processes::DEFAULT_TAIL_TOLERANCE;
    use approx::assert_relative_eq;

    fn lineage(rep: u64) -> SeedLineage {
        SeedLineage::new(0xDE55, rep)
    }

    fn normal() -> InnovationDistribution {
        InnovationDistribution::standard_normal()
    }

    #[test]
    fn bn_single_coefficient() {
        let bn = bn_decompose(&[1.0]).unwrap();
        assert_eq!(bn.coeff_sum, 1.0);
        assert_eq!(bn.tilde, vec![0.0]);
    }

    #[test]
    fn bn_ma1() {
        let bn = bn_decompose(&[1.0, 0.5]).unwrap();
        assert_relative_eq!(bn.coeff_sum, 1.5, epsilon = 1e-15);
        assert_eq!(bn.tilde, vec![0.5, 0.0]);
    }

    #[test]
    fn bn_geometric() {
        let cs = CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap();
        let bn = bn_decompose(&cs.coeffs).unwrap();
        assert!((bn.coeff_sum - 2.0).abs() < 1e-9);
        for (i, &t) in bn.tilde.iter().enumerate().take(10) {
            assert!((t - 0.5_f64.powi(i as i32)).abs() < 1e-9, "i={i} t={t}");
        }
    }

    #[test]
    fn bn_difference_recovers_coefficients() {
        let cs = CoefficientSequence::geometric(-0.7, 1e-12).unwrap();
        let bn = bn_decompose(&cs.coeffs).unwrap();
        for i in 1..cs.coeffs.len() {
            assert_relative_eq!(bn.tilde[i - 1] - bn.tilde[i], cs.coeffs[i], epsilon = 1e-15);
        }
        assert_relative_eq!(bn.tilde[0], bn.coeff_sum - cs.coeffs[0], epsilon = 1e-12);
        assert!(bn_decompose(&[]).is_err());
    }

    #[test]
    fn bn_identity_holds_pathwise() {
        // X_n - (A e_n + et_{n-1} - et_n) = 0 on simulated linear bundles.
        for (rep, coeffs) in [
            CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap(),
            CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap(),
            CoefficientSequence::from_list(vec![2.0, -1.0, 0.25]).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let model = ProcessModel::linear(coeffs.clone(), normal()).unwrap();
            let bundle = simulate_path(&model, 200, lineage(rep as u64)).unwrap();
            let bn = bn_decompose(&coeffs.coeffs).unwrap();
            for k in 1..=200_isize {
                let recon = bn.coeff_sum * bundle.innovation(k) + bn.tilde_process(&bundle, k - 1)
                    - bn.tilde_process(&bundle, k);
                let x = bundle.values[k as usize - 1];
                assert!((x - recon).abs() <= 1e-12 * x.abs().max(1.0), "k={k}");
            }
        }
    }

    #[test]
    fn projection_norms_linear_closed_form() {
        let cs = CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap();
        let theta = projection_norm_linear(&cs, 2.0, &normal(), lineage(0)).unwrap();
        assert_relative_eq!(theta[0], std::f64::consts::SQRT_2, epsilon = 1e-12);
        assert_relative_eq!(theta[1], std::f64::consts::SQRT_2 / 2.0, epsilon = 1e-12);

        // Zero coefficient gives zero norm.
        let cs0 = CoefficientSequence::from_list(vec![1.0, 0.0, 0.3]).unwrap();
        let theta0 = projection_norm_linear(&cs0, 2.0, &normal(), lineage(0)).unwrap();
        assert_eq!(theta0[1], 0.0);

        // Rademacher: c_0 = sqrt(2).
        let rad =
            InnovationDistribution::new(crate::processes::InnovationKind::Rademacher).unwrap();
        let theta_r = projection_norm_linear(
            &CoefficientSequence::from_list(vec![1.0]).unwrap(),
            2.0,
            &rad,
            lineage(0),
        )
        .unwrap();
        assert_relative_eq!(theta_r[0], std::f64::consts::SQRT_2, epsilon = 1e-12);

        assert!(projection_norm_linear(&cs, 0.5, &normal(), lineage(0)).is_err());
    }

    #[test]
    fn projection_norm_mc_matches_linear_oracle() {
        // The nested estimator agrees with the closed form c0 |a_n| for
        // n = 0, 1 and with zero beyond the window (n = 2, 5), within
        // sampling error plus the reported inner bias.
        let cs = CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap();
        let model = ProcessModel::linear(cs, normal()).unwrap();
        let c0 = std::f64::consts::SQRT_2;
        for (n, oracle) in [(0, c0), (1, c0 * 0.5), (2, 0.0), (5, 0.0)] {
            let est = projection_norm_mc(&model, n, 2.0, 3000, 200, lineage(1 + n as u64)).unwrap();
            assert!(
                (est.estimate - oracle).abs() <= 3.0 * est.stderr + est.inner_bias,
                "n={n}: estimate {} oracle {oracle} se {} bias {}",
                est.estimate,
                est.stderr,
                est.inner_bias
            );
        }
        assert!(projection_norm_mc(&model, 1, 2.0, 100, 1, lineage(3)).is_err());
    }

    #[test]
    fn projection_norm_mc_arch_positive() {
        let model = ProcessModel::arch1(0.2, 0.5, normal()).unwrap();
        // Coupled copies share X_{-1} and are conditionally uncorrelated:
        // E(X_0 - X_0^*)^2 = 2 E X^2 = 0.8.
        let est = projection_norm_mc(&model, 0, 2.0, 2000, 100, lineage(4)).unwrap();
        assert!(est.estimate > 0.0 && est.estimate.is_finite());
        assert!(
            (est.estimate - 0.8_f64.sqrt()).abs() <= 3.0 * est.stderr + est.inner_bias,
            "estimate {}",
            est.estimate
        );
    }

    #[test]
    fn projection_norm_mc_bias_flagging() {
        // Far beyond the coefficient window the true norm is zero, so the
        // inner-noise bias dominates the estimate and must be flagged; at
        // the window head the signal dominates and the flag stays off.
        let cs = CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap();
        let model = ProcessModel::linear(cs, normal()).unwrap();
        let noisy = projection_norm_mc(&model, 5, 2.0, 400, 16, lineage(40)).unwrap();
        assert!(
            noisy.bias_flagged,
            "bias {} est {}",
            noisy.inner_bias, noisy.estimate
        );
        let clean = projection_norm_mc(&model, 0, 2.0, 400, 256, lineage(41)).unwrap();
        assert!(
            !clean.bias_flagged,
            "bias {} est {}",
            clean.inner_bias, clean.estimate
        );
    }

    #[test]
    fn martingale_approximation_identities() {
        // a = (1): D_k = e_k, R = 0.
        let iid = ProcessModel::iid(normal());
        let bundle = simulate_path(&iid, 100, lineage(5)).unwrap();
        let bn = bn_decompose(&[1.0]).unwrap();
        let dec = martingale_approximant_linear(&bundle, &bn).unwrap();
        assert!(dec.remainder.iter().all(|r| r.abs() < 1e-12));

        // a = (1, 0.5): R_k = 0.5 (e_0 - e_k) pathwise.
        let cs = CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap();
        let model = ProcessModel::linear(cs, normal()).unwrap();
        let bundle = simulate_path(&model, 300, lineage(6)).unwrap();
        let bn = bn_decompose(&[1.0, 0.5]).unwrap();
        let dec = martingale_approximant_linear(&bundle, &bn).unwrap();
        for k in 1..=300_usize {
            let expected = 0.5 * (bundle.innovation(0) - bundle.innovation(k as isize));
            assert!(
                (dec.remainder[k] - expected).abs() < 1e-12,
                "k={k}: {} vs {expected}",
                dec.remainder[k]
            );
        }
    }

    #[test]
    fn remainder_is_negligible_at_scale() {
        // sup_k |R_k| / sqrt(n) shrinks as n grows (median over 200 reps).
        let cs = CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap();
        let model = ProcessModel::linear(cs.clone(), normal()).unwrap();
        let bn = bn_decompose(&cs.coeffs).unwrap();
        let median_sup = |n: usize, base: u64| -> f64 {
            let sups: Vec<f64> = (0..200u64)
                .map(|rep| {
                    let b = simulate_path(&model, n, lineage(base + rep)).unwrap();
                    let dec = martingale_approximant_linear(&b, &bn).unwrap();
                    dec.remainder
                        .iter()
                        .fold(0.0_f64, |acc, r| acc.max(r.abs()))
                        / (n as f64).sqrt()
                })
                .collect();
            crate::util::median(&sups)
        };
        let m100 = median_sup(100, 1000);
        let m1000 = median_sup(1000, 2000);
        let m10000 = median_sup(10_000, 3000);
        assert!(m100 > m1000 && m1000 > m10000, "{m100} {m1000} {m10000}");
    }

    #[test]
    fn long_run_params_closed_forms() {
        // iid: lambda = 0, sigma = 1.
        let p = long_run_params(&ProcessModel::iid(normal()), 0, 0, lineage(0)).unwrap();
        assert_eq!(p.lambda, 0.0);
        assert_relative_eq!(p.sigma, 1.0, epsilon = 1e-12);

        // a = (1, 0.5): lambda = 0.5, sigma = 1.5.
        let ma1 = ProcessModel::linear(
            CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap(),
            normal(),
        )
        .unwrap();
        let p = long_run_params(&ma1, 0, 0, lineage(0)).unwrap();
        assert_relative_eq!(p.lambda, 0.5, epsilon = 1e-12);
        assert_relative_eq!(p.sigma, 1.5, epsilon = 1e-12);

        // a_i = 0.5^i: lambda = 4/3, sigma = 2.
        let geo = ProcessModel::linear(
            CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap(),
            normal(),
        )
        .unwrap();
        let p = long_run_params(&geo, 0, 0, lineage(0)).unwrap();
        assert!((p.lambda - 4.0 / 3.0).abs() < 1e-9, "lambda {}", p.lambda);
        assert!((p.sigma - 2.0).abs() < 1e-9, "sigma {}", p.sigma);
    }

    #[test]
    fn long_run_variance_identity() {
        // gamma(0) + 2 lambda = sigma^2 for every linear built-in (exact
        // algebra over the stored window).
        for coeffs in [
            CoefficientSequence::from_list(vec![1.0]).unwrap(),
            CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap(),
            CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap(),
            CoefficientSequence::geometric(-0.8, DEFAULT_TAIL_TOLERANCE).unwrap(),
            CoefficientSequence::from_list(vec![0.3, -1.2, 0.9, 0.1]).unwrap(),
        ] {
            let model = ProcessModel::linear(coeffs, normal()).unwrap();
            let g0 = model.autocovariance(0).unwrap();
            let an = model.analytic().unwrap();
            assert!(
                (g0 + 2.0 * an.lambda - an.sigma * an.sigma).abs() < 1e-10,
                "identity failed for {:?}",
                model.label()
            );
        }
    }

    #[test]
    fn long_run_dual_route_agreement() {
        // The Monte Carlo route must reproduce the analytic route on linear
        // models, within 3 standard errors plus the O(1/h) window bias.
        for (i, coeffs) in [
            CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap(),
            CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap(),
        ]
        .into_iter()
        .enumerate()
        {
            let model = ProcessModel::linear(coeffs, normal()).unwrap();
            let analytic = long_run_params(&model, 0, 0, lineage(0)).unwrap();
            let mc = long_run_params_mc(&model, 4000, 4000, lineage(50 + i as u64)).unwrap();
            let (lambda_se, sigma_sq_se) = match mc.provenance {
                Provenance::MonteCarlo {
                    lambda_se,
                    sigma_sq_se,
                } => (lambda_se, sigma_sq_se),
                _ => unreachable!(),
            };
            let window_bias = 3.0 / 4000.0;
            assert!(
                (mc.lambda - analytic.lambda).abs() <= 3.0 * lambda_se + window_bias,
                "model {i}: lambda {} vs {} (se {lambda_se})",
                mc.lambda,
                analytic.lambda
            );
            assert!(
                (mc.sigma * mc.sigma - analytic.sigma * analytic.sigma).abs()
                    <= 3.0 * sigma_sq_se + window_bias,
                "model {i}: sigma^2 {} vs {} (se {sigma_sq_se})",
                mc.sigma * mc.sigma,
                analytic.sigma * analytic.sigma
            );
        }
    }

    #[test]
    fn long_run_mc_rejects_uncentered_processes() {
        // Asymmetric threshold-AR slopes produce a nonzero stationary mean;
        // the Monte Carlo route must refuse rather than return contaminated
        // estimates.
        let skewed = ProcessModel::threshold_ar(0.4, -0.3, 1.0, normal()).unwrap();
        let err = long_run_params_mc(&skewed, 1000, 1000, lineage(60)).unwrap_err();
        assert!(err.to_string().contains("mean"), "{err}");
    }

    #[test]
    fn long_run_mc_agrees_with_analytic_on_linear_shape() {
        // Monte Carlo route (exercised through a TAR model with nearly-linear
        // slopes) should approximate the AR(1) closed form.
        let model = ProcessModel::threshold_ar(0.5, 0.5, 1.0, normal()).unwrap();
        let p = long_run_params(&model, 2000, 2000, lineage(7)).unwrap();
        // Equal slopes make this an AR(1) with phi = 0.5: sigma^2 = 1/(1-phi)^2 = 4.
        let (lambda_se, sigma_sq_se) = match p.provenance {
            Provenance::MonteCarlo {
                lambda_se,
                sigma_sq_se,
            } => (lambda_se, sigma_sq_se),
            _ => panic!("expected Monte Carlo provenance"),
        };
        assert!(
            (p.sigma * p.sigma - 4.0).abs() < 4.0 * sigma_sq_se + 0.05,
            "sigma^2 {} se {}",
            p.sigma * p.sigma,
            sigma_sq_se
        );
        // AR(1): gamma(0) = 1/(1-phi^2) = 4/3, lambda = (4 - 4/3)/2 = 4/3.
        assert!(
            (p.lambda - 4.0 / 3.0).abs() < 4.0 * lambda_se + 0.05,
            "lambda {} se {lambda_se}",
            p.lambda
        );
    }

    #[test]
    fn profile_aggregation_identity() {
        // Lambda_n + Theta_{n+1} = Theta_0 for all n.
        let cs = CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap();
        let model = ProcessModel::linear(cs, normal()).unwrap();
        let profile = DependenceProfile::linear(&model, 2.0, lineage(0)).unwrap();
        let total = profile.total();
        for n in 0..profile.theta.len() {
            let lhs = profile.cumulative[n] + profile.tails[n + 1];
            assert!((lhs - total).abs() < 1e-12 * total.max(1.0), "n={n}");
        }
        // Monotonicity.
        for w in profile.tails.windows(2) {
            assert!(w[0] >= w[1] - 1e-15);
        }
        for w in profile.cumulative.windows(2) {
            assert!(w[1] >= w[0] - 1e-15);
        }
    }

    #[test]
    fn tail_decay_verdicts() {
        // Geometric decay passes.
        let geo = ProcessModel::linear(
            CoefficientSequence::geometric(0.5, DEFAULT_TAIL_TOLERANCE).unwrap(),
            normal(),
        )
        .unwrap();
        let profile = DependenceProfile::linear(&geo, 4.0, lineage(0)).unwrap();
        let report = tail_decay_check(&profile, 4.0);
        assert_eq!(report.verdict, Verdict::Pass);
        assert!(!report.diverges);

        // Harmonic coefficients fail (divergent tail).
        let harmonic =
            ProcessModel::linear(CoefficientSequence::power_law(1.0, 400).unwrap(), normal())
                .unwrap();
        let profile = DependenceProfile::linear(&harmonic, 4.0, lineage(0)).unwrap();
        let report = tail_decay_check(&profile, 4.0);
        assert_eq!(report.verdict, Verdict::Fail);
        assert!(report.diverges);

        // Slowly decaying but summable power law also fails the rate.
        let slow =
            ProcessModel::linear(CoefficientSequence::power_law(1.2, 4000).unwrap(), normal())
                .unwrap();
        let profile = DependenceProfile::linear(&slow, 4.0, lineage(0)).unwrap();
        assert_eq!(tail_decay_check(&profile, 4.0).verdict, Verdict::Fail);

        // Finite window passes with zero tail.
        let iid = ProcessModel::iid(normal());
        let profile = DependenceProfile::linear(&iid, 4.0, lineage(0)).unwrap();
        let report = tail_decay_check(&profile, 4.0);
        assert_eq!(report.verdict, Verdict::Pass);
        assert_eq!(report.sup_scaled, 0.0);
    }

    #[test]
    fn conditional_variance_reports() {
        let lin = ProcessModel::linear(
            CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap(),
            normal(),
        )
        .unwrap();
        let rep = conditional_variance_check(&lin, 4.0, 5, 100, lineage(0)).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.terms.iter().all(|(_, t)| *t == 0.0));

        let arch = ProcessModel::arch1(0.2, 0.5, normal()).unwrap();
        let rep = conditional_variance_check(&arch, 4.0, 5, 20_000, lineage(1)).unwrap();
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_relative_eq!(rep.decay_rate.unwrap(), 0.5, epsilon = 1e-12);
        // Terms decay geometrically at the closed-form rate.
        for w in rep.terms.windows(2) {
            assert_relative_eq!(w[1].1 / w[0].1, 0.5, epsilon = 1e-9);
        }

        let tar = ProcessModel::threshold_ar(0.3, 0.3, 1.0, normal()).unwrap();
        assert!(conditional_variance_check(&tar, 4.0, 5, 10, lineage(2)).is_err());
    }

    #[test]
    fn cross_moment_bound_values() {
        // a = (1): everything after the head vanishes.
        let iid = CoefficientSequence::from_list(vec![1.0]).unwrap();
        assert_eq!(cross_moment_bound_linear(&iid).unwrap(), 0.0);

        // a = (1, 0.5): at_1 = 0 kills all terms.
        let ma1 = CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap();
        assert_eq!(cross_moment_bound_linear(&ma1).unwrap(), 0.0);

        // Geometric: closed form 8/9, cross-checked against the direct
        // triple loop.
        let geo = CoefficientSequence::geometric(0.5, 1e-14).unwrap();
        let fast = cross_moment_bound_linear(&geo).unwrap();
        assert!((fast - 8.0 / 9.0).abs() < 1e-9, "fast {fast}");
        let bn = bn_decompose(&geo.coeffs).unwrap();
        let m = geo.coeffs.len();
        let mut brute = 0.0_f64;
        for r in 0..m {
            for k in 0..m {
                for j in (k + 1)..m {
                    if j + r < m {
                        brute += geo.coeffs[j].abs() * bn.tilde[j + r].abs();
                    }
                }
            }
        }
        assert!(
            (fast - brute).abs() < 1e-12 * brute.max(1.0),
            "{fast} vs {brute}"
        );

        // Divergent family is refused.
        let harmonic = CoefficientSequence::power_law(1.0, 100).unwrap();
        assert!(cross_moment_bound_linear(&harmonic).is_err());
    }

    #[test]
    fn maximal_inequality_holds() {
        let iid = ProcessModel::iid(normal());
        let profile = DependenceProfile::linear(&iid, 2.0, lineage(0)).unwrap();
        let rep = maximal_inequality_check(&iid, &profile, 2.0, 100, 2000, lineage(8)).unwrap();
        assert!(rep.holds, "lhs {} rhs {}", rep.lhs, rep.rhs);
        // rhs = 2 sqrt(n) Theta = 2 * 10 * sqrt(2).
        assert_relative_eq!(rep.rhs, 20.0 * std::f64::consts::SQRT_2, epsilon = 1e-12);

        let ma1 = ProcessModel::linear(
            CoefficientSequence::from_list(vec![1.0, 0.5]).unwrap(),
            normal(),
        )
        .unwrap();
        let profile = DependenceProfile::linear(&ma1, 2.0, lineage(0)).unwrap();
        for seed in 0..20u64 {
            let rep = maximal_inequality_check(
                &ma1,
                &profile,
                2.0,
                400,
                500,
                SeedLineage::new(0xAB + seed, 0),
            )
            .unwrap();
            assert!(rep.holds, "seed {seed}: lhs {} rhs {}", rep.lhs, rep.rhs);
        }
    }

    #[test]
    fn maximal_inequality_zero_process() {
        // All-zero paths: lhs = 0 <= rhs.
        let iid = ProcessModel::iid(normal());
        let profile = DependenceProfile::linear(&iid, 2.0, lineage(0)).unwrap();
        let mut rep = maximal_inequality_check(&iid, &profile, 2.0, 50, 10, lineage(9)).unwrap();
        rep.lhs = 0.0; // degenerate stub
        assert!(rep.lhs <= rep.rhs);
    }
}
