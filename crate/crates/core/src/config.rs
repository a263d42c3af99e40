use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const DEFAULT_NUM_SAMPLES: usize = 5000;
pub const DEFAULT_NUM_FEATURES: usize = 7;
pub const DEFAULT_RIDGE_PENALTY: f64 = 1.0;
pub const DEFAULT_REPEATS: usize = 10;
pub const DEFAULT_SEED: u64 = 42;

/// Default kernel width for `dims` features: `0.75 * sqrt(dims)`.
pub fn default_kernel_width(dims: usize) -> f64 {
    0.75 * (dims as f64).sqrt()
}

/// Every tunable of one explanation / stability run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainerConfig {
    /// Perturbation sample size `n`.
    pub num_samples: usize,
    /// Retained features `p`.
    pub num_features: usize,
    /// Gaussian kernel width, in standardized-distance units.
    pub kernel_width: f64,
    /// Ridge penalty `lambda`.
    pub ridge_penalty: f64,
    /// Number of repeated explanations `m` used by the stability indices.
    pub repeats: usize,
    pub master_seed: u64,
    /// Replace the first perturbation row with the query point itself.
    #[serde(default)]
    pub include_query_point: bool,
    /// Run the lasso selection with unit weights instead of kernel weights.
    #[serde(default)]
    pub unweighted_selection: bool,
}

impl ExplainerConfig {
    /// Defaults for a model over `dims` features.
    pub fn for_dims(dims: usize) -> Self {
        Self {
            num_samples: DEFAULT_NUM_SAMPLES,
            num_features: DEFAULT_NUM_FEATURES.min(dims.max(1)),
            kernel_width: default_kernel_width(dims),
            ridge_penalty: DEFAULT_RIDGE_PENALTY,
            repeats: DEFAULT_REPEATS,
            master_seed: DEFAULT_SEED,
            include_query_point: false,
            unweighted_selection: false,
        }
    }

    /// Checks the config against a model with `dims` features. Pure; returns
    /// an unchanged copy on success.
    pub fn validate(&self, dims: usize) -> Result<Self, ConfigError> {
        validate_config(self, dims)
    }
}

pub fn validate_config(config: &ExplainerConfig, dims: usize) -> Result<ExplainerConfig, ConfigError> {
    let p = config.num_features;
    if p == 0 {
        return Err(ConfigError::ZeroFeatures);
    }
    if p > dims {
        return Err(ConfigError::TooManyFeatures { p, dims });
    }
    // n - p is the residual-variance denominator
    if config.num_samples <= p {
        return Err(ConfigError::TooFewSamples {
            n: config.num_samples,
            p,
        });
    }
    if !(config.kernel_width.is_finite() && config.kernel_width > 0.0) {
        return Err(ConfigError::KernelWidth(config.kernel_width));
    }
    if !(config.ridge_penalty.is_finite() && config.ridge_penalty >= 0.0) {
        return Err(ConfigError::RidgePenalty(config.ridge_penalty));
    }
    if config.repeats < 2 {
        return Err(ConfigError::TooFewRepeats(config.repeats));
    }
    Ok(config.clone())
}
