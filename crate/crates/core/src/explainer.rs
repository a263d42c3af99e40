//! One LIME explanation, and `m` of them scored for stability.
//!
//! ```text
//! sample → predict → standardize + kernel-weight → lasso select p → weighted ridge
//! ```

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blackbox::{predict, Predictor};
use crate::config::ExplainerConfig;
use crate::data::FeatureStats;
use crate::error::{ConfigError, Error, Result, Stage};
use crate::locality::{standardize_point, weigh};
use crate::model::{LocalModel, StabilityReport};
use crate::sampling::{derive_seed, sample_perturbations};
use crate::selection::{select_features, FeatureSubset};
use crate::stability::{csi, vsi, ModelEnsemble};
use crate::wridge::{self, ConfidenceInterval};

/// One selected feature's share of the surrogate prediction at `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub index: usize,
    pub name: String,
    /// Coefficient on the standardized scale.
    pub coefficient: f64,
    /// The same coefficient per raw feature unit (`coefficient / std`);
    /// zero for constant features.
    pub raw_coefficient: f64,
    pub variance: f64,
    pub interval: ConfidenceInterval,
    /// Standardized value of the query point on this feature.
    pub standardized_value: f64,
    /// `coefficient * standardized_value`.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub local_model: LocalModel,
    /// Sorted by decreasing `|contribution|`, then feature index.
    pub feature_contributions: Vec<Contribution>,
    /// `intercept + Σ contributions`.
    pub lime_prediction: f64,
    pub query_point: Vec<f64>,
    pub selection: FeatureSubset,
}

impl Explanation {
    pub fn contributions_by_name(&self) -> BTreeMap<&str, f64> {
        self.feature_contributions
            .iter()
            .map(|c| (c.name.as_str(), c.contribution))
            .collect()
    }
}

/// How repeat seeds are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedMode {
    /// `derive_seed(master_seed, i)` for repeat `i`.
    Derived,
    /// Every repeat reuses this seed. Only meaningful as a diagnostic: the
    /// repeats are then identical by construction.
    Fixed(u64),
}

/// Bundles what an explanation needs besides the query point.
pub struct Explainer<'a> {
    predictor: &'a dyn Predictor,
    stats: FeatureStats,
    feature_names: Vec<String>,
    config: ExplainerConfig,
}

impl<'a> Explainer<'a> {
    /// Validates `config` against the feature count and the predictor.
    pub fn new(
        predictor: &'a dyn Predictor,
        stats: FeatureStats,
        feature_names: Vec<String>,
        config: ExplainerConfig,
    ) -> Result<Self> {
        let dims = stats.dims();
        if feature_names.len() != dims {
            return Err(ConfigError::DimensionMismatch {
                expected: dims,
                found: feature_names.len(),
            }
            .into());
        }
        let config = config.validate(dims)?;
        predictor.accepts(dims)?;
        Ok(Self {
            predictor,
            stats,
            feature_names,
            config,
        })
    }

    /// Same as [`Explainer::new`] with `x0, x1, ...` feature names.
    pub fn unnamed(predictor: &'a dyn Predictor, stats: FeatureStats, config: ExplainerConfig) -> Result<Self> {
        let names = (0..stats.dims()).map(|j| format!("x{j}")).collect();
        Self::new(predictor, stats, names, config)
    }

    pub fn config(&self) -> &ExplainerConfig {
        &self.config
    }

    pub fn stats(&self) -> &FeatureStats {
        &self.stats
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    fn check_point(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.stats.dims() {
            return Err(ConfigError::DimensionMismatch {
                expected: self.stats.dims(),
                found: x.len(),
            }
            .into());
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::Invalid("query point has non-finite values".into()).into());
        }
        Ok(())
    }

    /// One full LIME call on the batch drawn from `seed`.
    pub fn explain_once(&self, x: &[f64], seed: u64) -> Result<Explanation> {
        self.check_point(x)?;
        let cfg = &self.config;

        let mut batch = sample_perturbations(&self.stats, cfg.num_samples, seed);
        if cfg.include_query_point {
            for (j, &v) in x.iter().enumerate() {
                batch.points[(0, j)] = v;
            }
        }

        let y = predict(self.predictor, &batch.points)
            .map_err(Error::from)
            .map_err(Error::at(Stage::Prediction))?;

        let weighted = weigh(&batch.points, x, &self.stats, cfg.kernel_width);

        let selection_weights = if cfg.unweighted_selection {
            vec![1.0; cfg.num_samples]
        } else {
            weighted.weights.clone()
        };
        let selection = select_features(&weighted.z_points, &y, &selection_weights, cfg.num_features)
            .map_err(Error::from)
            .map_err(Error::at(Stage::Selection))?;

        let zp = select_columns(&weighted.z_points, &selection.indices);
        let fit = wridge::fit(&zp, &y, &weighted.weights, cfg.ridge_penalty)
            .map_err(Error::from)
            .map_err(Error::at(Stage::Ridge))?;

        let variances = fit.variances();
        let x_std = standardize_point(x, &self.stats);
        let local_model = LocalModel {
            coefficients: selection.indices.iter().zip(fit.beta_hat.iter()).map(|(&j, &b)| (j, b)).collect(),
            intercept: fit.intercept,
            coef_variances: selection.indices.iter().zip(&variances).map(|(&j, &v)| (j, v)).collect(),
            sigma2_hat: fit.sigma2_hat,
            n_used: cfg.num_samples,
            p_used: cfg.num_features,
            lambda_used: cfg.ridge_penalty,
            seed,
            warnings: fit.warnings.clone(),
        };

        let mut feature_contributions: Vec<Contribution> = selection
            .indices
            .iter()
            .enumerate()
            .map(|(k, &j)| {
                let coefficient = fit.beta_hat[k];
                let std = self.stats.stds[j];
                Contribution {
                    index: j,
                    name: self.feature_names[j].clone(),
                    coefficient,
                    raw_coefficient: if std > 0.0 { coefficient / std } else { 0.0 },
                    variance: variances[k],
                    interval: wridge::conf_int(coefficient, variances[k]).expect("clamped variance"),
                    standardized_value: x_std[j],
                    contribution: coefficient * x_std[j],
                }
            })
            .collect();
        feature_contributions.sort_by(|a, b| {
            b.contribution
                .abs()
                .total_cmp(&a.contribution.abs())
                .then(a.index.cmp(&b.index))
        });
        let lime_prediction = fit.intercept + feature_contributions.iter().map(|c| c.contribution).sum::<f64>();

        Ok(Explanation {
            local_model,
            feature_contributions,
            lime_prediction,
            query_point: x.to_vec(),
            selection,
        })
    }

    /// `m` explanations on independent batches, scored with VSI and CSI.
    pub fn stability_run(&self, x: &[f64]) -> Result<StabilityReport> {
        self.stability_run_with(x, SeedMode::Derived)
    }

    pub fn stability_run_with(&self, x: &[f64], mode: SeedMode) -> Result<StabilityReport> {
        self.check_point(x)?;
        let start = Instant::now();
        let m = self.config.repeats;
        let seeds: Vec<u64> = (0..m)
            .map(|i| match mode {
                SeedMode::Derived => derive_seed(self.config.master_seed, i as u64),
                SeedMode::Fixed(s) => s,
            })
            .collect();
        let outcomes: Vec<Result<Explanation>> = seeds.par_iter().map(|&s| self.explain_once(x, s)).collect();
        let mut models = Vec::with_capacity(m);
        for (index, outcome) in outcomes.into_iter().enumerate() {
            match outcome {
                Ok(e) => models.push(e.local_model),
                Err(e) => {
                    return Err(Error::Repeat {
                        index,
                        source: Box::new(e),
                    })
                }
            }
        }
        let ensemble = ModelEnsemble::new(&models)?;
        let vsi = vsi(&ensemble);
        let scored = csi(&ensemble)?;
        Ok(StabilityReport {
            vsi,
            csi: scored.csi,
            par: scored.par,
            excluded_features: scored.excluded_features,
            models,
            wall_time_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

fn select_columns(z: &DMatrix<f64>, indices: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(z.nrows(), indices.len(), |i, k| z[(i, indices[k])])
}

/// Free-function form of [`Explainer::explain_once`].
pub fn explain_once(
    predictor: &dyn Predictor,
    stats: &FeatureStats,
    x: &[f64],
    config: &ExplainerConfig,
    seed: u64,
) -> Result<Explanation> {
    Explainer::unnamed(predictor, stats.clone(), config.clone())?.explain_once(x, seed)
}

/// Free-function form of [`Explainer::stability_run`].
pub fn stability_run(
    predictor: &dyn Predictor,
    stats: &FeatureStats,
    x: &[f64],
    config: &ExplainerConfig,
) -> Result<StabilityReport> {
    Explainer::unnamed(predictor, stats.clone(), config.clone())?.stability_run(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blackbox::Builtin;

    fn stats(dims: usize) -> FeatureStats {
        FeatureStats::new(
            (0..dims).map(|j| j as f64).collect(),
            (0..dims).map(|j| 0.5 + 0.25 * j as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_predictor_gives_flat_surrogate() {
        let f = Builtin::Linear(vec![0.0; 4]);
        let cfg = ExplainerConfig {
            num_samples: 300,
            num_features: 2,
            ..ExplainerConfig::for_dims(4)
        };
        let e = explain_once(&f, &stats(4), &[0.0, 1.0, 2.0, 3.0], &cfg, 1).unwrap();
        assert!(e.local_model.coefficients.values().all(|&b| b == 0.0));
        assert_eq!(e.local_model.intercept, 0.0);
        assert_eq!(e.local_model.sigma2_hat, 0.0);
    }

    #[test]
    fn lime_prediction_is_intercept_plus_contributions() {
        let f = Builtin::Friedman1;
        let cfg = ExplainerConfig {
            num_samples: 500,
            num_features: 3,
            ..ExplainerConfig::for_dims(6)
        };
        let s = FeatureStats::new(vec![0.5; 6], vec![0.3; 6]).unwrap();
        let e = explain_once(&f, &s, &[0.4, 0.6, 0.5, 0.2, 0.7, 0.5], &cfg, 3).unwrap();
        let sum: f64 = e.feature_contributions.iter().map(|c| c.contribution).sum();
        assert!((e.lime_prediction - (e.local_model.intercept + sum)).abs() < 1e-12);
        assert_eq!(e.feature_contributions.len(), 3);
        assert_eq!(e.local_model.coefficients.len(), 3);
    }

    #[test]
    fn stage_labels_on_errors() {
        let f = Builtin::Step { feature: 0, cut: 0.0 };
        let cfg = ExplainerConfig {
            num_samples: 50,
            num_features: 2,
            ridge_penalty: 0.0,
            ..ExplainerConfig::for_dims(3)
        };
        // third column constant → λ = 0 fit over a zero column is singular
        let s = FeatureStats::new(vec![0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0]).unwrap();
        let err = Explainer::unnamed(&f, s, ExplainerConfig { num_features: 3, ..cfg })
            .unwrap()
            .explain_once(&[0.0, 0.0, 1.0], 1)
            .unwrap_err();
        assert!(matches!(err, Error::Stage { stage: Stage::Ridge, .. }), "{err}");
    }

    #[test]
    fn wrong_point_length() {
        let f = Builtin::Friedman1;
        let cfg = ExplainerConfig::for_dims(6);
        let ex = Explainer::unnamed(&f, stats(6), cfg).unwrap();
        assert!(ex.explain_once(&[0.0; 5], 1).is_err());
    }
}
