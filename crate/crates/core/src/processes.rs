//! Innovation distributions, causal process models and simulated paths.
//!
//! A process model generates a stationary causal sequence
//! `X_n = g(..., e_{n-1}, e_n)` from iid mean-zero innovations. Built-in
//! models:
//!
//! - `linear`: `X_k = sum_{i=0..m} a_i e_{k-i}` with absolutely summable
//!   coefficients, possibly truncated from an infinite family with a recorded
//!   tail bound;
//! - `threshold-ar`: `X_k = th_pos * max(X_{k-1},0) + th_neg * min(X_{k-1},0)
//!   + scale * e_k`, contractive when both slopes are below one in modulus;
//! - `arch1`: `X_k = e_k * sqrt(omega + beta * X_{k-1}^2)`, a martingale
//!   difference sequence with state-dependent conditional variance.

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, StudentT};
use serde::Serialize;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::rng::{streams, SeedLineage};
use crate::util::{floor_ns, kahan_sum};

/// Default truncation tolerance for infinite coefficient families.
pub const DEFAULT_TAIL_TOLERANCE: f64 = 1e-10;

/// Default burn-in for recursive (non-linear) models.
pub const RECURSIVE_BURN_IN: usize = 1000;

// ---------------------------------------------------------------------------
// Innovations
// ---------------------------------------------------------------------------

/// Supported innovation laws. All are symmetric with mean zero and finite
/// fourth moment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum InnovationKind {
    /// N(0, 1).
    StandardNormal,
    /// Uniform on [-sqrt(3), sqrt(3)] (unit variance).
    UniformCentered,
    /// +1 or -1 with probability 1/2 each.
    Rademacher,
    /// Student t with `df` degrees of freedom; requires `df > 4` so that the
    /// fourth moment is finite. Not standardized: variance is `df/(df-2)`.
    StudentT { df: f64 },
}

/// An innovation distribution together with its declared moments: the mean
/// is identically zero, and the p-norms `||e||_p` for p = 2, 3, 4 are
/// recorded at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InnovationDistribution {
    pub kind: InnovationKind,
    /// Declared variance (second moment; the mean is identically zero).
    pub variance: f64,
    /// Declared fourth moment.
    pub fourth_moment: f64,
    /// Declared norms `(||e||_2, ||e||_3, ||e||_4)`.
    pub norms: [f64; 3],
}

const UNIFORM_HALF_WIDTH: f64 = 1.732_050_807_568_877_2; // sqrt(3)

impl InnovationDistribution {
    pub fn new(kind: InnovationKind) -> Result<Self> {
        let (variance, fourth_moment) = match kind {
            InnovationKind::StandardNormal => (1.0, 3.0),
            InnovationKind::UniformCentered => {
                let a = UNIFORM_HALF_WIDTH;
                (a * a / 3.0, a.powi(4) / 5.0)
            }
            InnovationKind::Rademacher => (1.0, 1.0),
            InnovationKind::StudentT { df } => {
                if !df.is_finite() || df <= 4.0 {
                    return Err(Error::config(format!(
                        "student-t innovations need df > 4 for a finite fourth moment, got {df}"
                    )));
                }
                let var = df / (df - 2.0);
                let m4 = 3.0 * df * df / ((df - 2.0) * (df - 4.0));
                (var, m4)
            }
        };
        debug_assert!(variance > 0.0);
        let mut dist = InnovationDistribution {
            kind,
            variance,
            fourth_moment,
            norms: [0.0; 3],
        };
        dist.norms = [
            dist.norm(2.0).expect("second norm exists"),
            dist.norm(3.0).expect("third norm exists"),
            dist.norm(4.0).expect("fourth norm exists"),
        ];
        Ok(dist)
    }

    pub fn standard_normal() -> Self {
        Self::new(InnovationKind::StandardNormal).unwrap()
    }

    /// Absolute moment `E|e|^p` in closed form, for any `p >= 1` below the
    /// distribution's moment barrier.
    pub fn abs_moment(&self, p: f64) -> Result<f64> {
        if p < 1.0 {
            return Err(Error::domain(format!("moment order must be >= 1, got {p}")));
        }
        let m = match self.kind {
            // E|Z|^p = 2^{p/2} Gamma((p+1)/2) / sqrt(pi)
            InnovationKind::StandardNormal => (0.5 * p * std::f64::consts::LN_2
                + ln_gamma(0.5 * (p + 1.0))
                - 0.5 * std::f64::consts::PI.ln())
            .exp(),
            // E|U|^p = a^p / (p+1) on [-a, a]
            InnovationKind::UniformCentered => UNIFORM_HALF_WIDTH.powf(p) / (p + 1.0),
            InnovationKind::Rademacher => 1.0,
            // E|T|^p = df^{p/2} Gamma((p+1)/2) Gamma((df-p)/2) / (sqrt(pi) Gamma(df/2))
            InnovationKind::StudentT { df } => {
                if p >= df {
                    return Err(Error::domain(format!(
                        "student-t with df {df} has no absolute moment of order {p}"
                    )));
                }
                (0.5 * p * df.ln() + ln_gamma(0.5 * (p + 1.0)) + ln_gamma(0.5 * (df - p))
                    - 0.5 * std::f64::consts::PI.ln()
                    - ln_gamma(0.5 * df))
                .exp()
            }
        };
        Ok(m)
    }

    /// `||e||_p = (E|e|^p)^{1/p}`.
    pub fn norm(&self, p: f64) -> Result<f64> {
        Ok(self.abs_moment(p)?.powf(1.0 / p))
    }

    /// `||e - e'||_p` for an independent copy `e'`, in closed form where one
    /// exists. Returns `None` for the Student t (use
    /// [`InnovationDistribution::centered_pair_norm_mc`]).
    pub fn centered_pair_norm(&self, p: f64) -> Option<f64> {
        match self.kind {
            // Difference of independent standard normals is N(0, 2).
            InnovationKind::StandardNormal => {
                let z_abs_p = (0.5 * p * std::f64::consts::LN_2 + ln_gamma(0.5 * (p + 1.0))
                    - 0.5 * std::f64::consts::PI.ln())
                .exp();
                Some(std::f64::consts::SQRT_2 * z_abs_p.powf(1.0 / p))
            }
            // Difference is triangular on [-2a, 2a]: E|D|^p = (2a)^p * 2/((p+1)(p+2)).
            InnovationKind::UniformCentered => {
                let a = UNIFORM_HALF_WIDTH;
                Some(2.0 * a * (2.0 / ((p + 1.0) * (p + 2.0))).powf(1.0 / p))
            }
            // Difference is 0 w.p. 1/2 and +-2 w.p. 1/4 each: E|D|^p = 2^p / 2.
            InnovationKind::Rademacher => Some(2.0_f64.powf((p - 1.0) / p)),
            InnovationKind::StudentT { .. } => None,
        }
    }

    /// Monte Carlo estimate of `||e - e'||_p` from `pairs` independent pairs.
    pub fn centered_pair_norm_mc(&self, p: f64, pairs: usize, rng: &mut impl Rng) -> f64 {
        let mut acc = 0.0;
        for _ in 0..pairs {
            let d = self.sample(rng) - self.sample(rng);
            acc += d.abs().powf(p);
        }
        (acc / pairs as f64).powf(1.0 / p)
    }

    /// One draw.
    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        match self.kind {
            InnovationKind::StandardNormal => rng.sample(StandardNormal),
            InnovationKind::UniformCentered => {
                (rng.random::<f64>() * 2.0 - 1.0) * UNIFORM_HALF_WIDTH
            }
            InnovationKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            InnovationKind::StudentT { df } => StudentT::new(df).expect("validated df").sample(rng),
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            InnovationKind::StandardNormal => "standard-normal".into(),
            InnovationKind::UniformCentered => "uniform-centered".into(),
            InnovationKind::Rademacher => "rademacher".into(),
            InnovationKind::StudentT { df } => format!("student-t({df})"),
        }
    }
}

/// Draw `n` iid innovations from the given stream.
pub fn sample_innovations(
    dist: &InnovationDistribution,
    n: usize,
    lineage: SeedLineage,
) -> Vec<f64> {
    let mut rng = lineage.stream(streams::INNOVATIONS);
    (0..n).map(|_| dist.sample(&mut rng)).collect()
}

// ---------------------------------------------------------------------------
// Coefficient sequences
// ---------------------------------------------------------------------------

/// Stored (truncated) moving-average coefficients together with the absolute
/// tail bound `sum_{i > m} |a_i|` of the family they came from. Everything
/// downstream (Beveridge-Nelson sums, long-run parameters, projection norms)
/// is computed from the stored vector, so all cross-quantity identities hold
/// exactly in floating point; the tail bound quantifies what the truncation
/// discarded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientSequence {
    pub coeffs: Vec<f64>,
    pub tail_bound: f64,
}

impl CoefficientSequence {
    /// A finite, user-supplied coefficient list (tail bound zero).
    pub fn from_list(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::config("coefficient list must be nonempty"));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::config("coefficients must be finite"));
        }
        Ok(CoefficientSequence {
            coeffs,
            tail_bound: 0.0,
        })
    }

    /// Geometric family `a_i = rho^i`, truncated so the absolute tail is at
    /// most `tol`. Tail after index m: `|rho|^{m+1} / (1 - |rho|)`.
    pub fn geometric(rho: f64, tol: f64) -> Result<Self> {
        if !rho.is_finite() || rho.abs() >= 1.0 {
            return Err(Error::config(format!(
                "geometric coefficient family needs |rho| < 1, got {rho}"
            )));
        }
        if rho == 0.0 {
            return Self::from_list(vec![1.0]);
        }
        let r = rho.abs();
        let mut m = ((tol * (1.0 - r)).ln() / r.ln()).ceil() as usize;
        m = m.max(1);
        let coeffs: Vec<f64> = (0..=m).map(|i| rho.powi(i as i32)).collect();
        let tail_bound = r.powi(m as i32 + 1) / (1.0 - r);
        Ok(CoefficientSequence { coeffs, tail_bound })
    }

    /// Power-law family `a_i = (i+1)^{-gamma}`, stored up to index `len - 1`.
    /// For `gamma <= 1` the family is not absolutely summable and the tail
    /// bound is infinite; such sequences are only admitted for assumption
    /// failure demonstrations.
    pub fn power_law(gamma: f64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::config(
                "power-law family needs at least one coefficient",
            ));
        }
        let coeffs: Vec<f64> = (0..len).map(|i| ((i + 1) as f64).powf(-gamma)).collect();
        let tail_bound = if gamma > 1.0 {
            // integral bound: sum_{i >= len} (i+1)^{-gamma} <= len^{1-gamma}/(gamma-1)
            (len as f64).powf(1.0 - gamma) / (gamma - 1.0)
        } else {
            f64::INFINITY
        };
        Ok(CoefficientSequence { coeffs, tail_bound })
    }

    pub fn abs_sum(&self) -> f64 {
        kahan_sum(self.coeffs.iter().map(|a| a.abs()))
    }

    pub fn sum(&self) -> f64 {
        kahan_sum(self.coeffs.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// True when the generating family is absolutely summable.
    pub fn summable(&self) -> bool {
        self.tail_bound.is_finite()
    }
}

// ---------------------------------------------------------------------------
// Process models
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ModelVariant {
    Linear(CoefficientSequence),
    ThresholdAr {
        theta_pos: f64,
        theta_neg: f64,
        noise_scale: f64,
    },
    Arch1 {
        omega: f64,
        beta: f64,
    },
}

/// Closed-form quantities available for linear models.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearAnalytic {
    /// `A = sum a_i`.
    pub coeff_sum: f64,
    /// One-sided covariance sum `lambda = sum_{j>=1} E X_0 X_j`.
    pub lambda: f64,
    /// Long-run standard deviation `sigma = |A| ||e||_2`.
    pub sigma: f64,
}

/// A stationary causal process model.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessModel {
    pub variant: ModelVariant,
    pub innovation: InnovationDistribution,
    pub burn_in: usize,
}

impl ProcessModel {
    /// Linear process `X_k = sum a_i e_{k-i}`. Burn-in defaults to the
    /// coefficient window so every recorded value uses the full window.
    pub fn linear(coeffs: CoefficientSequence, innovation: InnovationDistribution) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::config("linear model needs coefficients"));
        }
        if !coeffs.abs_sum().is_finite() {
            return Err(Error::config(
                "linear coefficients must have finite absolute sum",
            ));
        }
        let burn_in = coeffs.len() - 1;
        Ok(ProcessModel {
            variant: ModelVariant::Linear(coeffs),
            innovation,
            burn_in,
        })
    }

    /// The iid process: linear with a single unit coefficient.
    pub fn iid(innovation: InnovationDistribution) -> Self {
        Self::linear(
            CoefficientSequence::from_list(vec![1.0]).unwrap(),
            innovation,
        )
        .unwrap()
    }

    pub fn threshold_ar(
        theta_pos: f64,
        theta_neg: f64,
        noise_scale: f64,
        innovation: InnovationDistribution,
    ) -> Result<Self> {
        if !(theta_pos.is_finite() && theta_neg.is_finite())
            || theta_pos.abs() >= 1.0
            || theta_neg.abs() >= 1.0
        {
            return Err(Error::config(format!(
                "threshold-ar needs |theta_pos| < 1 and |theta_neg| < 1, got ({theta_pos}, {theta_neg})"
            )));
        }
        if !noise_scale.is_finite() || noise_scale <= 0.0 {
            return Err(Error::config("threshold-ar noise scale must be positive"));
        }
        Ok(ProcessModel {
            variant: ModelVariant::ThresholdAr {
                theta_pos,
                theta_neg,
                noise_scale,
            },
            innovation,
            burn_in: RECURSIVE_BURN_IN,
        })
    }

    pub fn arch1(omega: f64, beta: f64, innovation: InnovationDistribution) -> Result<Self> {
        if !omega.is_finite() || omega <= 0.0 {
            return Err(Error::config("arch1 needs omega > 0"));
        }
        if !beta.is_finite() || beta < 0.0 {
            return Err(Error::config("arch1 needs beta >= 0"));
        }
        if beta * innovation.variance >= 1.0 {
            return Err(Error::config(format!(
                "arch1 stationarity needs beta * E[e^2] < 1, got {}",
                beta * innovation.variance
            )));
        }
        Ok(ProcessModel {
            variant: ModelVariant::Arch1 { omega, beta },
            innovation,
            burn_in: RECURSIVE_BURN_IN,
        })
    }

    pub fn with_burn_in(mut self, burn_in: usize) -> Self {
        self.burn_in = burn_in;
        self
    }

    pub fn coefficients(&self) -> Option<&CoefficientSequence> {
        match &self.variant {
            ModelVariant::Linear(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.variant, ModelVariant::Linear(_))
    }

    /// Stationary autocovariance `gamma(j)` where available in closed form.
    /// Linear: `gamma(j) = var(e) * sum_i a_i a_{i+j}`. ARCH(1) is white:
    /// `gamma(0) = E X^2`, zero at positive lags.
    pub fn autocovariance(&self, lag: usize) -> Option<f64> {
        match &self.variant {
            ModelVariant::Linear(c) => {
                let a = &c.coeffs;
                if lag >= a.len() {
                    return Some(0.0);
                }
                let s = kahan_sum((0..a.len() - lag).map(|i| a[i] * a[i + lag]));
                Some(self.innovation.variance * s)
            }
            ModelVariant::Arch1 { omega, beta } => {
                let ev = self.innovation.variance;
                if lag == 0 {
                    Some(omega * ev / (1.0 - beta * ev))
                } else {
                    Some(0.0)
                }
            }
            ModelVariant::ThresholdAr { .. } => None,
        }
    }

    /// Analytic long-run quantities; populated only for linear models.
    pub fn analytic(&self) -> Option<LinearAnalytic> {
        let coeffs = self.coefficients()?;
        let a_sum = coeffs.sum();
        let lambda = kahan_sum((1..coeffs.len()).map(|j| self.autocovariance(j).unwrap()));
        Some(LinearAnalytic {
            coeff_sum: a_sum,
            lambda,
            sigma: a_sum.abs() * self.innovation.variance.sqrt(),
        })
    }

    pub fn label(&self) -> String {
        match &self.variant {
            ModelVariant::Linear(c) => {
                if c.coeffs == [1.0] {
                    format!("iid[{}]", self.innovation.label())
                } else {
                    format!("linear[m={}, {}]", c.len() - 1, self.innovation.label())
                }
            }
            ModelVariant::ThresholdAr {
                theta_pos,
                theta_neg,
                noise_scale,
            } => format!(
                "threshold-ar[{theta_pos},{theta_neg},{noise_scale},{}]",
                self.innovation.label()
            ),
            ModelVariant::Arch1 { omega, beta } => {
                format!("arch1[{omega},{beta},{}]", self.innovation.label())
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Path bundles
// ---------------------------------------------------------------------------

/// One simulated trajectory: innovations (including the burn-in pre-samples),
/// process values, exact partial sums and the seed lineage that regenerates
/// the bundle bit-for-bit.
#[derive(Debug, Clone)]
pub struct PathBundle {
    pub lineage: SeedLineage,
    pub burn_in: usize,
    /// Innovations `e_{1-burn_in} .. e_len`, stored in chronological order.
    pub innovations: Vec<f64>,
    /// Process value at index 0 (the last burn-in step); recursive models
    /// need it for state-dependent conditional moments at t = 1.
    pub prev_value: f64,
    /// Values `X_1 .. X_len`.
    pub values: Vec<f64>,
    /// Partial sums `S_0 = 0, S_1, .., S_len`.
    pub partial_sums: Vec<f64>,
    /// Set when the model's burn-in was too small for the declared
    /// coefficient window.
    pub window_warning: bool,
}

impl PathBundle {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Innovation at process index `k` (valid for `1 - burn_in <= k <= len`).
    pub fn innovation(&self, k: isize) -> f64 {
        let offset = k + self.burn_in as isize - 1;
        self.innovations[offset as usize]
    }

    /// The normalized partial-sum step path `(1/sqrt(n)) S_{[ns]}`, cadlag in
    /// `s`. The scale `n` may be smaller than the bundle length when the path
    /// extends over a horizon beyond 1.
    pub fn partial_sum_path(&self, n: usize, s: f64) -> Result<f64> {
        if s < 0.0 {
            return Err(Error::domain(format!("time must be nonnegative, got {s}")));
        }
        let k = floor_ns(n, s);
        if k > self.len() {
            return Err(Error::domain(format!(
                "[ns] = {k} exceeds bundle length {}",
                self.len()
            )));
        }
        Ok(self.partial_sums[k] / (n as f64).sqrt())
    }
}

/// Simulate one path bundle of length `n`.
pub fn simulate_path(model: &ProcessModel, n: usize, lineage: SeedLineage) -> Result<PathBundle> {
    if n == 0 {
        return Err(Error::config("path length must be at least 1"));
    }
    let burn_in = model.burn_in;
    let innovations = sample_innovations(&model.innovation, burn_in + n, lineage);

    let mut window_warning = false;
    let mut prev_value = 0.0;
    let mut values = vec![0.0_f64; n];

    match &model.variant {
        ModelVariant::Linear(cs) => {
            let a = &cs.coeffs;
            let m = a.len() - 1;
            if burn_in < m {
                window_warning = true;
            }
            // innovations[j] is e_{j - burn_in + 1}; X_k needs e_{k-m} .. e_k.
            let value_at = |k: usize| -> f64 {
                let kk = k as isize;
                let lo = -(burn_in as isize) + 1;
                let mut acc = 0.0;
                for (i, &ai) in a.iter().enumerate().take(m + 1) {
                    let idx = kk - i as isize;
                    if idx < lo {
                        break; // burn-in shorter than window: truncate
                    }
                    acc += ai * innovations[(idx + burn_in as isize - 1) as usize];
                }
                acc
            };
            if burn_in >= m {
                prev_value = value_at(0);
            }
            for (k, v) in values.iter_mut().enumerate() {
                *v = value_at(k + 1);
            }
        }
        ModelVariant::ThresholdAr {
            theta_pos,
            theta_neg,
            noise_scale,
        } => {
            let mut x = 0.0_f64;
            for (j, &e) in innovations.iter().enumerate() {
                x = theta_pos * x.max(0.0) + theta_neg * x.min(0.0) + noise_scale * e;
                if j + 1 == burn_in {
                    prev_value = x;
                }
                if j >= burn_in {
                    values[j - burn_in] = x;
                }
            }
        }
        ModelVariant::Arch1 { omega, beta } => {
            let mut x = 0.0_f64;
            for (j, &e) in innovations.iter().enumerate() {
                x = e * (omega + beta * x * x).sqrt();
                if j + 1 == burn_in {
                    prev_value = x;
                }
                if j >= burn_in {
                    values[j - burn_in] = x;
                }
            }
        }
    }

    let mut partial_sums = Vec::with_capacity(n + 1);
    partial_sums.push(0.0);
    let mut s = 0.0;
    for &v in &values {
        s += v;
        partial_sums.push(s);
    }

    Ok(PathBundle {
        lineage,
        burn_in,
        innovations,
        prev_value,
        values,
        partial_sums,
        window_warning,
    })
}
