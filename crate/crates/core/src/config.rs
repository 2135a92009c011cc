//! Experiment configuration files.
//!
//! Configs are flat TOML key/value files with a mandatory `schema_version`.
//! Unknown keys are errors (no silent typo tolerance); parse errors carry
//! line references. The master seed has no wall-clock default: it must come
//! from the file or the command line.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::limit_law::{FunctionalFamily, FunctionalSpec};
use crate::processes::{
    CoefficientSequence, InnovationDistribution, InnovationKind, ProcessModel,
    DEFAULT_TAIL_TOLERANCE,
};
use crate::stats::{ExperimentKind, ExperimentPlan};

pub const SCHEMA_VERSION: u32 = 1;

/// Flat experiment configuration. Field applicability depends on the model
/// and functional selected; irrelevant keys are rejected only when they
/// contradict the selection.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,

    /// Model id: `iid`, `linear`, `threshold-ar`, `arch1`.
    pub model: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    /// Coefficient family for `linear`: `geometric` or `power-law`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeff_family: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rho: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_length: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tail_tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_pos: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_neg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,

    /// Innovation id: `standard-normal` (default), `uniform-centered`,
    /// `rademacher`, `student-t`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub innovation: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_df: Option<f64>,

    /// Functional id: `identity` (default), `constant`, `polynomial`,
    /// `sine`, `logistic`, `exp`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub functional: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub constant_value: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub poly_coeffs: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sine_amp: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sine_freq: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub logistic_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exp_rate: Option<f64>,

    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_grid: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub override_assumptions: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub allow_exp_growth: Option<bool>,

    /// Norm order for dependence diagnostics.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gap_reps: Option<usize>,

    /// Nested Monte Carlo knobs for the dependence subcommand.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proj_n_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proj_outer: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub proj_inner: Option<usize>,

    /// Number of path bundles written by the simulate subcommand.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path_count: Option<usize>,
}

impl ExperimentConfig {
    /// Parse and validate a config file's contents.
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::ConfigParse(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn innovation(&self) -> Result<InnovationDistribution> {
        let kind = match self.innovation.as_deref().unwrap_or("standard-normal") {
            "standard-normal" => InnovationKind::StandardNormal,
            "uniform-centered" => InnovationKind::UniformCentered,
            "rademacher" => InnovationKind::Rademacher,
            "student-t" => InnovationKind::StudentT {
                df: self
                    .t_df
                    .ok_or_else(|| Error::config("student-t innovations need t_df"))?,
            },
            other => {
                return Err(Error::config(format!("unknown innovation '{other}'")));
            }
        };
        InnovationDistribution::new(kind)
    }

    pub fn model(&self) -> Result<ProcessModel> {
        let innovation = self.innovation()?;
        let model = match self.model.as_str() {
            "iid" => ProcessModel::iid(innovation),
            "linear" => {
                let coeffs = match (&self.coeffs, self.coeff_family.as_deref()) {
                    (Some(c), None) => CoefficientSequence::from_list(c.clone())?,
                    (None, Some("geometric")) => CoefficientSequence::geometric(
                        self.rho
                            .ok_or_else(|| Error::config("geometric family needs rho"))?,
                        self.tail_tolerance.unwrap_or(DEFAULT_TAIL_TOLERANCE),
                    )?,
                    (None, Some("power-law")) => CoefficientSequence::power_law(
                        self.gamma
                            .ok_or_else(|| Error::config("power-law family needs gamma"))?,
                        self.family_length.unwrap_or(400),
                    )?,
                    (None, Some(other)) => {
                        return Err(Error::config(format!(
                            "unknown coefficient family '{other}'"
                        )));
                    }
                    (Some(_), Some(_)) => {
                        return Err(Error::config(
                            "give either coeffs or coeff_family, not both",
                        ));
                    }
                    (None, None) => {
                        return Err(Error::config("linear model needs coeffs or coeff_family"));
                    }
                };
                ProcessModel::linear(coeffs, innovation)?
            }
            "threshold-ar" => ProcessModel::threshold_ar(
                self.theta_pos
                    .ok_or_else(|| Error::config("threshold-ar needs theta_pos"))?,
                self.theta_neg
                    .ok_or_else(|| Error::config("threshold-ar needs theta_neg"))?,
                self.noise_scale.unwrap_or(1.0),
                innovation,
            )?,
            "arch1" => ProcessModel::arch1(
                self.omega
                    .ok_or_else(|| Error::config("arch1 needs omega"))?,
                self.beta.ok_or_else(|| Error::config("arch1 needs beta"))?,
                innovation,
            )?,
            other => return Err(Error::config(format!("unknown model '{other}'"))),
        };
        Ok(match self.burn_in {
            Some(b) => model.with_burn_in(b),
            None => model,
        })
    }

    pub fn functional(&self, allow_exp_growth: bool) -> Result<FunctionalSpec> {
        let family = match self.functional.as_deref().unwrap_or("identity") {
            "identity" => FunctionalFamily::Identity,
            "constant" => FunctionalFamily::Constant(self.constant_value.unwrap_or(1.0)),
            "polynomial" => FunctionalFamily::Polynomial(
                self.poly_coeffs
                    .clone()
                    .ok_or_else(|| Error::config("polynomial functional needs poly_coeffs"))?,
            ),
            "sine" => FunctionalFamily::ScaledSine {
                amp: self.sine_amp.unwrap_or(1.0),
                freq: self.sine_freq.unwrap_or(1.0),
            },
            "logistic" => FunctionalFamily::Logistic {
                scale: self.logistic_scale.unwrap_or(1.0),
            },
            "exp" => FunctionalFamily::ExpGrowth {
                rate: self.exp_rate.unwrap_or(1.0),
            },
            other => return Err(Error::config(format!("unknown functional '{other}'"))),
        };
        if allow_exp_growth || self.allow_exp_growth.unwrap_or(false) {
            FunctionalSpec::with_growth_override(family)
        } else {
            FunctionalSpec::new(family)
        }
    }

    /// Resolve the master seed from the file or a command-line override.
    pub fn master_seed(&self, flag: Option<u64>) -> Result<u64> {
        flag.or(self.master_seed).ok_or_else(|| {
            Error::config("master_seed is mandatory: set it in the config or pass --seed")
        })
    }

    /// Assemble an experiment plan.
    pub fn plan(
        &self,
        kind: ExperimentKind,
        seed_flag: Option<u64>,
        override_assumptions: bool,
        allow_exp_growth: bool,
    ) -> Result<ExperimentPlan> {
        let plan = ExperimentPlan {
            kind,
            model: self.model()?,
            functional: self.functional(allow_exp_growth)?,
            n_grid: self.n_grid.clone().unwrap_or_else(|| vec![250, 1000]),
            reps: self.reps.unwrap_or(4000),
            r: self.r.unwrap_or(1.0),
            horizon: self.horizon.unwrap_or(1.0),
            master_seed: self.master_seed(seed_flag)?,
            q: self.q.unwrap_or(4.0),
            b_grid: self.b_grid.clone().unwrap_or_else(|| vec![1.0, 2.0, 4.0]),
            threshold: self.threshold_a,
            gap_reps: self.gap_reps.unwrap_or(200),
            override_assumptions: override_assumptions
                || self.override_assumptions.unwrap_or(false),
        };
        plan.validate()?;
        Ok(plan)
    }
}
