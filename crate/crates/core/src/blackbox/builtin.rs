use std::f64::consts::PI;

use nalgebra::DMatrix;

use super::Predictor;
use crate::error::PredictorError;
use crate::synth;

/// Analytic predictors evaluated in-process.
#[derive(Debug, Clone, PartialEq)]
pub enum Builtin {
    /// `c · x`
    Linear(Vec<f64>),
    /// `1 / (1 + exp(-c · x))`
    LogisticLinear(Vec<f64>),
    /// Friedman #1 benchmark on the first five features:
    /// `10 sin(π x₁x₂) + 20 (x₃ − 0.5)² + 10 x₄ + 5 x₅`.
    Friedman1,
    /// `1` when `x[feature] > cut`, else `0`.
    Step { feature: usize, cut: f64 },
    /// Default-probability score of the bundled synthetic credit data.
    SyntheticCredit,
}

pub struct CatalogEntry {
    pub syntax: &'static str,
    pub description: &'static str,
}

pub fn builtin_catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            syntax: "linear:<c1,c2,...>",
            description: "dot product with the given coefficients",
        },
        CatalogEntry {
            syntax: "logistic-linear:<c1,c2,...>",
            description: "sigmoid of the dot product",
        },
        CatalogEntry {
            syntax: "friedman1",
            description: "10 sin(pi x1 x2) + 20 (x3 - 0.5)^2 + 10 x4 + 5 x5; needs at least 5 features",
        },
        CatalogEntry {
            syntax: "step:<feature>:<cut>",
            description: "1 if x[feature] > cut else 0",
        },
        CatalogEntry {
            syntax: "synthetic-credit",
            description: "default probability of the bundled 20-feature synthetic credit data",
        },
    ]
}

fn parse_coefs(spec: &str, body: &str) -> Result<Vec<f64>, PredictorError> {
    body.split(',')
        .map(|c| {
            c.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| PredictorError::BadSpec {
                spec: spec.to_string(),
                reason: format!("bad coefficient {c:?}"),
            })
        })
        .collect()
}

impl Builtin {
    pub fn parse(spec: &str) -> Result<Self, PredictorError> {
        let (name, body) = match spec.split_once(':') {
            Some((n, b)) => (n, Some(b)),
            None => (spec, None),
        };
        let bad = |reason: &str| PredictorError::BadSpec {
            spec: spec.to_string(),
            reason: reason.to_string(),
        };
        match (name, body) {
            ("linear", Some(b)) => Ok(Builtin::Linear(parse_coefs(spec, b)?)),
            ("logistic-linear", Some(b)) => Ok(Builtin::LogisticLinear(parse_coefs(spec, b)?)),
            ("linear" | "logistic-linear", None) => Err(bad("missing coefficients")),
            ("friedman1", None) => Ok(Builtin::Friedman1),
            ("synthetic-credit", None) => Ok(Builtin::SyntheticCredit),
            ("step", Some(b)) => {
                let (f, c) = b.split_once(':').ok_or_else(|| bad("expected step:<feature>:<cut>"))?;
                let feature = f.trim().parse().map_err(|_| bad("bad feature index"))?;
                let cut: f64 = c.trim().parse().map_err(|_| bad("bad cut value"))?;
                if !cut.is_finite() {
                    return Err(bad("cut must be finite"));
                }
                Ok(Builtin::Step { feature, cut })
            }
            ("friedman1" | "synthetic-credit" | "step", _) => Err(bad("wrong number of arguments")),
            _ => Err(PredictorError::UnknownBuiltin(spec.to_string())),
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Builtin::Linear(c) => dot(c, x),
            Builtin::LogisticLinear(c) => sigmoid(dot(c, x)),
            Builtin::Friedman1 => {
                10.0 * (PI * x[0] * x[1]).sin() + 20.0 * (x[2] - 0.5).powi(2) + 10.0 * x[3] + 5.0 * x[4]
            }
            Builtin::Step { feature, cut } => {
                if x[*feature] > *cut {
                    1.0
                } else {
                    0.0
                }
            }
            Builtin::SyntheticCredit => synth::credit_default_probability(x),
        }
    }

    pub fn spec(&self) -> String {
        let join = |c: &[f64]| c.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Builtin::Linear(c) => format!("linear:{}", join(c)),
            Builtin::LogisticLinear(c) => format!("logistic-linear:{}", join(c)),
            Builtin::Friedman1 => "friedman1".into(),
            Builtin::Step { feature, cut } => format!("step:{feature}:{cut}"),
            Builtin::SyntheticCredit => "synthetic-credit".into(),
        }
    }
}

fn dot(c: &[f64], x: &[f64]) -> f64 {
    c.iter().zip(x).map(|(a, b)| a * b).sum()
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl Predictor for Builtin {
    fn dims(&self) -> Option<usize> {
        match self {
            Builtin::Linear(c) | Builtin::LogisticLinear(c) => Some(c.len()),
            Builtin::SyntheticCredit => Some(synth::CREDIT_FEATURES.len()),
            Builtin::Friedman1 | Builtin::Step { .. } => None,
        }
    }

    fn min_dims(&self) -> usize {
        match self {
            Builtin::Friedman1 => 5,
            Builtin::Step { feature, .. } => feature + 1,
            _ => 1,
        }
    }

    fn predict_rows(&self, points: &DMatrix<f64>) -> Result<Vec<f64>, PredictorError> {
        let mut row = vec![0.0; points.ncols()];
        Ok((0..points.nrows())
            .map(|i| {
                for (j, v) in row.iter_mut().enumerate() {
                    *v = points[(i, j)];
                }
                self.eval(&row)
            })
            .collect())
    }

    fn descriptor(&self) -> String {
        format!("builtin:{}", self.spec())
    }
}
