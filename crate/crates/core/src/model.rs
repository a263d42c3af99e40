use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::NumericError;
use crate::wridge::{conf_int, ConfidenceInterval, NumericWarning};

/// One surrogate `g`: a sparse linear model over the selected features, on
/// the standardized scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalModel {
    /// Feature index → coefficient. The key set is the model's support.
    pub coefficients: BTreeMap<usize, f64>,
    pub intercept: f64,
    /// Feature index → variance of the coefficient; same keys as
    /// `coefficients`.
    pub coef_variances: BTreeMap<usize, f64>,
    pub sigma2_hat: f64,
    pub n_used: usize,
    pub p_used: usize,
    pub lambda_used: f64,
    /// Seed of the perturbation batch this model was fitted on.
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<NumericWarning>,
}

impl LocalModel {
    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.coefficients.keys().copied()
    }

    pub fn coefficient(&self, feature: usize) -> Option<f64> {
        self.coefficients.get(&feature).copied()
    }

    /// 95% interval of the coefficient of `feature`, if it is in the support.
    pub fn conf_int(&self, feature: usize) -> Option<Result<ConfidenceInterval, NumericError>> {
        let coef = self.coefficients.get(&feature)?;
        let var = self.coef_variances.get(&feature)?;
        Some(conf_int(*coef, *var))
    }
}

/// Result of `m` repeated explanations at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub models: Vec<LocalModel>,
    /// Variables Stability Index, percent.
    pub vsi: f64,
    /// Coefficients Stability Index, percent.
    pub csi: f64,
    /// Partial index per scored feature, in `[0, 1]`.
    pub par: BTreeMap<usize, f64>,
    /// Features selected by fewer than two models (not scored by CSI).
    pub excluded_features: Vec<usize>,
    pub wall_time_seconds: f64,
}
