//! Independent reference implementations used as test oracles. These favour
//! the most literal formula (explicit inverses, explicit loops) over speed.

#![allow(dead_code)]

use std::collections::BTreeMap;

use lime_stability::model::LocalModel;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, p);
    for i in 0..n {
        for j in 0..p {
            m[(i, j)] = normal(rng);
        }
    }
    m
}

/// Rows drawn from a zero-mean Gaussian with unit variances and common
/// correlation `rho`.
pub fn equicorrelated(rng: &mut ChaCha8Rng, n: usize, p: usize, rho: f64) -> DMatrix<f64> {
    let sigma = DMatrix::from_fn(p, p, |i, j| if i == j { 1.0 } else { rho });
    let l = sigma.cholesky().expect("positive definite").l();
    gaussian_matrix(rng, n, p) * l.transpose()
}

/// Kernel-style weights in `(0, 1]` from the rows' distance to the origin.
pub fn kernel_like_weights(z: &DMatrix<f64>, width: f64) -> Vec<f64> {
    (0..z.nrows())
        .map(|i| {
            let d2: f64 = (0..z.ncols()).map(|j| z[(i, j)] * z[(i, j)]).sum();
            (-d2 / (width * width)).exp()
        })
        .collect()
}

/// `Z` with its weighted column means removed.
pub fn weighted_center(z: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let sw: f64 = w.iter().sum();
    let mut c = z.clone();
    for j in 0..z.ncols() {
        let mean: f64 = (0..z.nrows()).map(|i| w[i] * z[(i, j)]).sum::<f64>() / sw;
        for i in 0..z.nrows() {
            c[(i, j)] -= mean;
        }
    }
    c
}

/// `ZᵀWZ` by explicit summation.
pub fn weighted_gram(zc: &DMatrix<f64>, w: &[f64]) -> DMatrix<f64> {
    let p = zc.ncols();
    DMatrix::from_fn(p, p, |a, b| (0..zc.nrows()).map(|i| w[i] * zc[(i, a)] * zc[(i, b)]).sum())
}

/// `σ² A G A` with `A = (G + λI)⁻¹` via an explicit LU inverse.
pub fn ridge_law_covariance(z: &DMatrix<f64>, w: &[f64], lambda: f64, sigma2: f64) -> DMatrix<f64> {
    let g = weighted_gram(&weighted_center(z, w), w);
    let p = g.nrows();
    let a = (&g + DMatrix::identity(p, p) * lambda).try_inverse().expect("invertible");
    &a * &g * &a * sigma2
}

/// Weighted least squares with an explicit intercept column, by normal
/// equations on `[1 | Z]`. Returns `(intercept, slopes, residuals)`.
pub fn wls_with_intercept(z: &DMatrix<f64>, y: &[f64], w: &[f64]) -> (f64, DVector<f64>, Vec<f64>) {
    let n = z.nrows();
    let p = z.ncols();
    let x = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { z[(i, j - 1)] });
    let wx = DMatrix::from_fn(n, p + 1, |i, j| w[i] * x[(i, j)]);
    let xtwx = x.transpose() * &wx;
    let xtwy = wx.transpose() * DVector::from_column_slice(y);
    let b = xtwx.try_inverse().expect("full rank") * xtwy;
    let fitted = &x * &b;
    let resid = (0..n).map(|i| y[i] - fitted[i]).collect();
    (b[0], b.rows(1, p).into_owned(), resid)
}

/// `Σ wᵢ eᵢ² / (n − p)`.
pub fn weighted_rss_over_dof(resid: &[f64], w: &[f64], p: usize) -> f64 {
    resid.iter().zip(w).map(|(e, w)| w * e * e).sum::<f64>() / (resid.len() - p) as f64
}

/// Textbook OLS: slope block of `σ̂² (XᵀX)⁻¹` for `X = [1 | Z]`.
pub fn ols_slope_covariance(z: &DMatrix<f64>, sigma2: f64) -> DMatrix<f64> {
    let n = z.nrows();
    let p = z.ncols();
    let x = DMatrix::from_fn(n, p + 1, |i, j| if j == 0 { 1.0 } else { z[(i, j - 1)] });
    let inv = (x.transpose() * &x).try_inverse().expect("full rank");
    inv.view((1, 1), (p, p)).into_owned() * sigma2
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().map(|v| v.abs()).fold(0.0, f64::max)
}

/// A surrogate with the given coefficient → variance entries.
pub fn model(entries: &[(usize, f64, f64)]) -> LocalModel {
    LocalModel {
        coefficients: entries.iter().map(|&(j, b, _)| (j, b)).collect(),
        intercept: 0.0,
        coef_variances: entries.iter().map(|&(j, _, v)| (j, v)).collect(),
        sigma2_hat: 1.0,
        n_used: 100,
        p_used: entries.len(),
        lambda_used: 1.0,
        seed: 0,
        warnings: Vec::new(),
    }
}

/// VSI by visiting every ordered pair `(a, b)`, `a ≠ b`, and counting shared
/// features one by one.
pub fn brute_vsi(models: &[LocalModel]) -> f64 {
    let p = models[0].coefficients.len();
    let mut shared = 0usize;
    let mut slots = 0usize;
    for a in 0..models.len() {
        for b in 0..models.len() {
            if a == b {
                continue;
            }
            for j in models[a].coefficients.keys() {
                if models[b].coefficients.contains_key(j) {
                    shared += 1;
                }
            }
            slots += p;
        }
    }
    100.0 * shared as f64 / slots as f64
}

/// CSI by brute force: for each feature seen at least twice, the fraction of
/// ordered pairs of its intervals that intersect. Returns `(csi, par)`.
pub fn brute_csi(models: &[LocalModel]) -> Option<(f64, BTreeMap<usize, f64>)> {
    let mut intervals: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for m in models {
        for (&j, &b) in &m.coefficients {
            let half = 1.96 * m.coef_variances[&j].sqrt();
            intervals.entry(j).or_default().push((b - half, b + half));
        }
    }
    let mut par = BTreeMap::new();
    for (j, iv) in intervals {
        if iv.len() < 2 {
            continue;
        }
        let mut hit = 0usize;
        let mut total = 0usize;
        for a in 0..iv.len() {
            for b in 0..iv.len() {
                if a == b {
                    continue;
                }
                let disjoint = iv[a].1 < iv[b].0 || iv[b].1 < iv[a].0;
                if !disjoint {
                    hit += 1;
                }
                total += 1;
            }
        }
        par.insert(j, hit as f64 / total as f64);
    }
    if par.is_empty() {
        return None;
    }
    let csi = 100.0 * par.values().sum::<f64>() / par.len() as f64;
    Some((csi, par))
}
