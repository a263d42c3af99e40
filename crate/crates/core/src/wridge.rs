//! Closed-form weighted ridge regression and its coefficient law.
//!
//! With `W = diag(w)` and `A = (ZᵀWZ + λI)⁻¹` the estimator is
//! `β̂ = A ZᵀW y`, distributed as
//!
//! ```text
//! β̂ ~ N( A ZᵀWZ β,  σ² · A ZᵀWZ Aᵀ )
//! ```
//!
//! which reduces to the GLS law `σ²(ZᵀWZ)⁻¹` at `λ = 0` and to the plain
//! ridge law at `w = 1`. The intercept is handled by weighted centering of
//! `Z` and `y`, so every `Z` in the formulas above is the weighted-centered
//! design and the intercept is never penalized.
//!
//! `σ²` is estimated from the residuals of the *unpenalized* weighted fit,
//! `σ̂² = (EᵀWE)/(n − p)`. Ridge residuals are deliberately not used: the
//! penalty shrinks them and would bias the estimate toward zero.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::NumericError;

/// Condition number above which an unpenalized fit is reported as
/// ill-conditioned.
pub const CONDITION_WARN: f64 = 1e10;
/// Condition number above which an unpenalized fit is refused.
pub const CONDITION_MAX: f64 = 1e14;
/// Two-sided 95% normal quantile used for confidence intervals.
pub const Z_95: f64 = 1.96;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NumericWarning {
    /// `ZᵀWZ` condition number above [`CONDITION_WARN`].
    IllConditioned { condition: f64 },
    /// Residual variance computed through a pseudo-inverse.
    PseudoInverse { condition: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
}

impl ConfidenceInterval {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// `[coef − 1.96·√var, coef + 1.96·√var]`.
pub fn conf_int(coef: f64, variance: f64) -> Result<ConfidenceInterval, NumericError> {
    if variance < 0.0 || variance.is_nan() {
        return Err(NumericError::NegativeVariance(variance));
    }
    let half = Z_95 * variance.sqrt();
    Ok(ConfidenceInterval {
        lower: coef - half,
        upper: coef + half,
    })
}

/// Weighted-centered design and the sufficient statistics every estimator
/// below needs.
#[derive(Debug, Clone)]
pub struct WeightedDesign {
    centered: DMatrix<f64>,
    y_centered: DVector<f64>,
    weights: DVector<f64>,
    z_means: DVector<f64>,
    y_mean: f64,
    /// `Z_cᵀ W Z_c`
    gram: DMatrix<f64>,
    /// `Z_cᵀ W y_c`
    moment: DVector<f64>,
}

impl WeightedDesign {
    pub fn new(zp: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Result<Self, NumericError> {
        let (n, p) = zp.shape();
        assert_eq!(y.len(), n, "response length must match design rows");
        assert_eq!(w.len(), n, "weight length must match design rows");
        if w.iter().any(|&v| v.is_nan() || v <= 0.0 || v.is_infinite()) {
            return Err(NumericError::NonFinite("weights (must be finite and positive)"));
        }
        if y.iter().any(|v| !v.is_finite()) || zp.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFinite("regression inputs"));
        }
        let wsum: f64 = w.iter().sum();
        let y_mean = w.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() / wsum;
        let z_means = DVector::from_fn(p, |j, _| {
            zp.column(j).iter().zip(w).map(|(z, a)| z * a).sum::<f64>() / wsum
        });
        let centered = DMatrix::from_fn(n, p, |i, j| zp[(i, j)] - z_means[j]);
        let y_centered = DVector::from_fn(n, |i, _| y[i] - y_mean);
        let weights = DVector::from_column_slice(w);
        let sqrt_w = weights.map(f64::sqrt);
        let mut scaled = centered.clone();
        for mut col in scaled.column_iter_mut() {
            col.component_mul_assign(&sqrt_w);
        }
        let gram = scaled.tr_mul(&scaled);
        let gram = (&gram + gram.transpose()) * 0.5;
        let moment = centered.tr_mul(&y_centered.component_mul(&weights));
        Ok(Self {
            centered,
            y_centered,
            weights,
            z_means,
            y_mean,
            gram,
            moment,
        })
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn moment(&self) -> &DVector<f64> {
        &self.moment
    }

    pub fn n(&self) -> usize {
        self.centered.nrows()
    }

    pub fn p(&self) -> usize {
        self.centered.ncols()
    }

    /// Spectral condition number of `ZᵀWZ` (infinite when singular).
    pub fn condition_number(&self) -> f64 {
        condition_number(&self.gram)
    }

    fn penalized(&self, lambda: f64) -> DMatrix<f64> {
        let mut m = self.gram.clone();
        for j in 0..m.nrows() {
            m[(j, j)] += lambda;
        }
        m
    }

    fn intercept_for(&self, beta: &DVector<f64>) -> f64 {
        self.y_mean - self.z_means.dot(beta)
    }
}

pub fn condition_number(sym: &DMatrix<f64>) -> f64 {
    if sym.nrows() == 0 {
        return 1.0;
    }
    let eig = sym.clone().symmetric_eigen();
    let max = eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let min = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if min <= 0.0 || max <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn check_unpenalized(design: &WeightedDesign, warnings: &mut Vec<NumericWarning>) -> Result<(), NumericError> {
    let condition = design.condition_number();
    if condition.is_nan() || condition > CONDITION_MAX {
        return Err(NumericError::Singular { condition });
    }
    if condition > CONDITION_WARN {
        warnings.push(NumericWarning::IllConditioned { condition });
    }
    Ok(())
}

/// `(ZᵀWZ + λI)⁻¹` through a Cholesky factorization.
fn penalized_inverse(design: &WeightedDesign, lambda: f64) -> Result<DMatrix<f64>, NumericError> {
    let m = design.penalized(lambda);
    m.clone()
        .cholesky()
        .map(|c| c.inverse())
        .ok_or_else(|| NumericError::Singular {
            condition: condition_number(&m),
        })
}

/// Ridge coefficients on the standardized scale plus the unpenalized intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeCoefficients {
    pub beta_hat: DVector<f64>,
    pub intercept: f64,
    pub warnings: Vec<NumericWarning>,
}

fn solve_coefficients(design: &WeightedDesign, lambda: f64) -> Result<RidgeCoefficients, NumericError> {
    let mut warnings = Vec::new();
    if lambda == 0.0 {
        check_unpenalized(design, &mut warnings)?;
    }
    let m = design.penalized(lambda);
    let chol = m.clone().cholesky().ok_or_else(|| NumericError::Singular {
        condition: condition_number(&m),
    })?;
    let beta_hat = chol.solve(&design.moment);
    let intercept = design.intercept_for(&beta_hat);
    Ok(RidgeCoefficients {
        beta_hat,
        intercept,
        warnings,
    })
}

/// `β̂ = (ZᵀWZ + λI)⁻¹ ZᵀW y_c`; intercept = weighted mean of `y` minus the
/// weighted column means of `Z` times `β̂`.
pub fn fit_weighted_ridge(zp: &DMatrix<f64>, y: &[f64], w: &[f64], lambda: f64) -> Result<RidgeCoefficients, NumericError> {
    solve_coefficients(&WeightedDesign::new(zp, y, w)?, lambda)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualVariance {
    pub sigma2_hat: f64,
    /// Residuals of the unpenalized weighted fit.
    pub residuals: DVector<f64>,
    pub warnings: Vec<NumericWarning>,
}

fn residual_variance_of(design: &WeightedDesign) -> ResidualVariance {
    let mut warnings = Vec::new();
    let condition = design.condition_number();
    let beta = if condition <= CONDITION_MAX {
        if condition > CONDITION_WARN {
            warnings.push(NumericWarning::IllConditioned { condition });
        }
        design.gram.clone().cholesky().map(|c| c.solve(&design.moment))
    } else {
        None
    };
    let beta = beta.unwrap_or_else(|| {
        warnings.push(NumericWarning::PseudoInverse { condition });
        let pinv = design
            .gram
            .clone()
            .pseudo_inverse(f64::EPSILON * design.p() as f64 * design.gram.amax())
            .expect("non-negative epsilon");
        pinv * &design.moment
    });
    let residuals = &design.y_centered - &design.centered * beta;
    let sse: f64 = residuals
        .iter()
        .zip(design.weights.iter())
        .map(|(e, w)| w * e * e)
        .sum();
    ResidualVariance {
        sigma2_hat: sse / (design.n() - design.p()) as f64,
        residuals,
        warnings,
    }
}

/// `σ̂² = (EᵀWE)/(n − p)` with `E` the residuals of the `λ = 0` weighted
/// fit. Falls back to a pseudo-inverse (and says so) when `ZᵀWZ` is
/// numerically singular.
pub fn residual_variance(zp: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Result<ResidualVariance, NumericError> {
    assert!(zp.nrows() > zp.ncols(), "residual variance needs n > p");
    Ok(residual_variance_of(&WeightedDesign::new(zp, y, w)?))
}

fn covariance_of(design: &WeightedDesign, lambda: f64, sigma2_hat: f64) -> Result<DMatrix<f64>, NumericError> {
    if lambda == 0.0 {
        check_unpenalized(design, &mut Vec::new())?;
    }
    let a = penalized_inverse(design, lambda)?;
    let cov = (&a * &design.gram * &a) * sigma2_hat;
    Ok((&cov + cov.transpose()) * 0.5)
}

/// `σ̂² · A ZᵀWZ Aᵀ` with `A = (ZᵀWZ + λI)⁻¹`, on the weighted-centered
/// design.
pub fn coefficient_covariance(zp: &DMatrix<f64>, w: &[f64], lambda: f64, sigma2_hat: f64) -> Result<DMatrix<f64>, NumericError> {
    let zeros = vec![0.0; zp.nrows()];
    covariance_of(&WeightedDesign::new(zp, &zeros, w)?, lambda, sigma2_hat)
}

/// A complete surrogate fit: coefficients, residual variance and the
/// coefficient covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeFit {
    pub beta_hat: DVector<f64>,
    pub intercept: f64,
    pub covariance: DMatrix<f64>,
    pub sigma2_hat: f64,
    pub residuals_linear: DVector<f64>,
    pub warnings: Vec<NumericWarning>,
}

impl RidgeFit {
    pub fn variances(&self) -> Vec<f64> {
        // clamp round-off negatives on the diagonal of a PSD matrix
        self.covariance.diagonal().iter().map(|v| v.max(0.0)).collect()
    }

    pub fn conf_ints(&self) -> Vec<ConfidenceInterval> {
        self.beta_hat
            .iter()
            .zip(self.variances())
            .map(|(&b, v)| conf_int(b, v).expect("clamped variance"))
            .collect()
    }
}

pub fn fit(zp: &DMatrix<f64>, y: &[f64], w: &[f64], lambda: f64) -> Result<RidgeFit, NumericError> {
    assert!(zp.nrows() > zp.ncols(), "weighted ridge needs n > p");
    let design = WeightedDesign::new(zp, y, w)?;
    let coefs = solve_coefficients(&design, lambda)?;
    let rv = residual_variance_of(&design);
    let covariance = covariance_of(&design, lambda, rv.sigma2_hat)?;
    let mut warnings = coefs.warnings;
    for wn in rv.warnings {
        if !warnings.contains(&wn) {
            warnings.push(wn);
        }
    }
    Ok(RidgeFit {
        beta_hat: coefs.beta_hat,
        intercept: coefs.intercept,
        covariance,
        sigma2_hat: rv.sigma2_hat,
        residuals_linear: rv.residuals,
        warnings,
    })
}
