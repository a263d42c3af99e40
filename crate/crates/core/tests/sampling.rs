mod common;

use lime_stability::locality::{distances, weigh};
use lime_stability::sampling::sample_perturbations;
use lime_stability::FeatureStats;
use statrs::distribution::{ContinuousCDF, Normal};

fn ks_statistic(mut xs: Vec<f64>, dist: &Normal) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = dist.cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn marginals_pass_kolmogorov_smirnov() {
    let stats = FeatureStats::new(vec![-3.0, 0.0, 250.0], vec![0.5, 1.0, 40.0]).unwrap();
    let n = 20_000;
    let batch = sample_perturbations(&stats, n, 2024);
    // 0.1% critical value of the one-sample KS statistic
    let critical = 1.949 / (n as f64).sqrt();
    for j in 0..3 {
        let column: Vec<f64> = batch.points.column(j).iter().copied().collect();
        let d = ks_statistic(column, &Normal::new(stats.means[j], stats.stds[j]).unwrap());
        assert!(d < critical, "feature {j}: D = {d}");
    }
}

#[test]
fn features_are_uncorrelated() {
    let stats = FeatureStats::new(vec![0.0; 4], vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let n = 50_000;
    let pts = sample_perturbations(&stats, n, 77).points;
    let mean = |j: usize| pts.column(j).sum() / n as f64;
    for a in 0..4 {
        for b in a + 1..4 {
            let (ma, mb) = (mean(a), mean(b));
            let cov: f64 = (0..n).map(|i| (pts[(i, a)] - ma) * (pts[(i, b)] - mb)).sum::<f64>() / (n - 1) as f64;
            let corr = cov / (stats.stds[a] * stats.stds[b]);
            // 5 standard errors of a sample correlation at n = 50 000
            assert!(corr.abs() < 5.0 / (n as f64).sqrt(), "({a},{b}) corr {corr}");
        }
    }
}

#[test]
fn relative_distance_contrast_shrinks_with_dimension() {
    let mut last = f64::INFINITY;
    for dims in [5usize, 10, 20, 50, 100, 200, 500] {
        let stats = FeatureStats::new(vec![0.0; dims], vec![1.0; dims]).unwrap();
        let z = sample_perturbations(&stats, 2000, 31).points;
        let d = distances(&vec![0.0; dims], &z);
        let max = d.iter().copied().fold(0.0, f64::max);
        let min = d.iter().copied().fold(f64::INFINITY, f64::min);
        let contrast = (max - min) / min;
        assert!(contrast < last, "P = {dims}: {contrast} not below {last}");
        last = contrast;
    }
}

#[test]
fn kernel_weights_flatten_relative_to_width_in_high_dimension() {
    // with the width fixed, every point gets a negligible weight
    let dims = 200;
    let stats = FeatureStats::new(vec![0.0; dims], vec![1.0; dims]).unwrap();
    let pts = sample_perturbations(&stats, 1000, 5).points;
    let wb = weigh(&pts, &vec![0.0; dims], &stats, 1.0);
    assert!(wb.weights.iter().all(|&w| w < 1e-30));
    assert!(wb.weights.iter().all(|&w| w > 0.0));
}
