//! Standardization, distances to the query point and Gaussian kernel weights.

use nalgebra::DMatrix;

use crate::data::FeatureStats;

/// Standardized perturbations with their distances and kernel weights.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedBatch {
    pub z_points: DMatrix<f64>,
    pub weights: Vec<f64>,
    pub distances: Vec<f64>,
}

#[inline]
fn standardize_value(v: f64, mean: f64, std: f64) -> f64 {
    if std > 0.0 {
        (v - mean) / std
    } else {
        0.0
    }
}

/// Column-wise z-scoring; zero-variance columns map to all zeros.
pub fn standardize(points: &DMatrix<f64>, stats: &FeatureStats) -> DMatrix<f64> {
    assert_eq!(points.ncols(), stats.dims(), "standardize: dimension mismatch");
    DMatrix::from_fn(points.nrows(), points.ncols(), |i, j| {
        standardize_value(points[(i, j)], stats.means[j], stats.stds[j])
    })
}

pub fn standardize_point(x: &[f64], stats: &FeatureStats) -> Vec<f64> {
    assert_eq!(x.len(), stats.dims(), "standardize_point: dimension mismatch");
    x.iter()
        .enumerate()
        .map(|(j, &v)| standardize_value(v, stats.means[j], stats.stds[j]))
        .collect()
}

/// Euclidean distance from `x_std` to each row of `z_points`.
pub fn distances(x_std: &[f64], z_points: &DMatrix<f64>) -> Vec<f64> {
    assert_eq!(x_std.len(), z_points.ncols(), "distances: dimension mismatch");
    let mut sq = vec![0.0; z_points.nrows()];
    // column-major storage: accumulate one feature at a time
    for (j, col) in z_points.column_iter().enumerate() {
        let xj = x_std[j];
        for (acc, &z) in sq.iter_mut().zip(col.iter()) {
            let d = z - xj;
            *acc += d * d;
        }
    }
    sq.into_iter().map(f64::sqrt).collect()
}

/// `exp(-d^2 / width^2)`, floored at the smallest positive normal `f64` so
/// that every weight stays strictly positive.
pub fn kernel_weight(distance: f64, kernel_width: f64) -> f64 {
    (-(distance * distance) / (kernel_width * kernel_width))
        .exp()
        .max(f64::MIN_POSITIVE)
}

pub fn kernel_weights(distances: &[f64], kernel_width: f64) -> Vec<f64> {
    assert!(kernel_width > 0.0, "kernel width must be positive");
    distances.iter().map(|&d| kernel_weight(d, kernel_width)).collect()
}

/// Standardizes `points`, measures distances to the standardized `x` and
/// weights every row.
pub fn weigh(points: &DMatrix<f64>, x: &[f64], stats: &FeatureStats, kernel_width: f64) -> WeightedBatch {
    let z_points = standardize(points, stats);
    let x_std = standardize_point(x, stats);
    let distances = distances(&x_std, &z_points);
    let weights = kernel_weights(&distances, kernel_width);
    WeightedBatch {
        z_points,
        weights,
        distances,
    }
}
