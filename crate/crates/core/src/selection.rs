//! Weighted lasso feature selection.
//!
//! Minimizes `Σ wᵢ (yᵢ − β₀ − zᵢ·β)² + α‖β‖₁` by cyclic coordinate descent
//! on the Gram form of the weighted-centered problem, walking a geometric
//! penalty grid `α_max · 0.95ᵏ` downward with warm starts until the active
//! set reaches the requested size.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::NumericError;
use crate::wridge::WeightedDesign;

pub const PATH_RATIO: f64 = 0.95;
pub const TOLERANCE: f64 = 1e-7;
pub const MAX_SWEEPS: usize = 10_000;
/// The grid stops once `α` falls below `α_max` times this ratio.
pub const PATH_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSubset {
    /// Selected feature indices, ascending.
    pub indices: Vec<usize>,
    /// `(penalty, active-set size)` for every visited grid point.
    pub selection_path: Vec<(f64, usize)>,
}

struct CoordinateDescent<'a> {
    gram: &'a DMatrix<f64>,
    moment: &'a DVector<f64>,
    beta: Vec<f64>,
}

impl CoordinateDescent<'_> {
    /// Runs sweeps at penalty `alpha` until the largest coefficient update
    /// is at most `TOLERANCE` relative to the largest coefficient.
    fn solve(&mut self, alpha: f64) {
        let dims = self.beta.len();
        let half = 0.5 * alpha;
        for _ in 0..MAX_SWEEPS {
            let mut max_delta = 0.0f64;
            for j in 0..dims {
                let gjj = self.gram[(j, j)];
                if gjj <= 0.0 {
                    continue;
                }
                let mut rho = self.moment[j];
                for k in 0..dims {
                    if k != j {
                        rho -= self.gram[(j, k)] * self.beta[k];
                    }
                }
                let new = soft_threshold(rho, half) / gjj;
                max_delta = max_delta.max((new - self.beta[j]).abs());
                self.beta[j] = new;
            }
            let scale = self.beta.iter().fold(0.0f64, |a, b| a.max(b.abs()));
            if max_delta <= TOLERANCE * scale {
                break;
            }
        }
    }
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

/// The `p` indices with the largest `|coef|`, ties to the smaller index,
/// returned ascending.
fn top_by_magnitude(beta: &[f64], candidates: impl Iterator<Item = usize>, p: usize) -> Vec<usize> {
    let mut ranked: Vec<usize> = candidates.collect();
    ranked.sort_by(|&a, &b| beta[b].abs().total_cmp(&beta[a].abs()).then(a.cmp(&b)));
    ranked.truncate(p);
    ranked.sort_unstable();
    ranked
}

/// Selects exactly `p` of the columns of `z_points`.
pub fn select_features(
    z_points: &DMatrix<f64>,
    y: &[f64],
    weights: &[f64],
    p: usize,
) -> Result<FeatureSubset, NumericError> {
    let dims = z_points.ncols();
    assert!(p >= 1 && p <= dims, "select_features: need 1 <= p <= P");
    if p == dims {
        return Ok(FeatureSubset {
            indices: (0..dims).collect(),
            selection_path: Vec::new(),
        });
    }
    let design = WeightedDesign::new(z_points, y, weights)?;
    let moment = design.moment();
    let alpha_max = 2.0 * moment.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    if alpha_max == 0.0 {
        // no signal: every coefficient is zero along the whole path
        return Ok(FeatureSubset {
            indices: (0..p).collect(),
            selection_path: vec![(0.0, 0)],
        });
    }

    let mut cd = CoordinateDescent {
        gram: design.gram(),
        moment,
        beta: vec![0.0; dims],
    };
    let mut path = Vec::new();
    let mut alpha = alpha_max;
    loop {
        alpha *= PATH_RATIO;
        if alpha < alpha_max * PATH_FLOOR {
            let active = (0..dims).filter(|&j| cd.beta[j] != 0.0).collect();
            return Err(NumericError::SelectionFailed { active, wanted: p });
        }
        cd.solve(alpha);
        let active = cd.beta.iter().filter(|b| **b != 0.0).count();
        path.push((alpha, active));
        if active >= p {
            let indices = top_by_magnitude(&cd.beta, (0..dims).filter(|&j| cd.beta[j] != 0.0), p);
            return Ok(FeatureSubset {
                indices,
                selection_path: path,
            });
        }
    }
}
