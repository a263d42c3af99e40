//! Gaussian perturbation sampling.
//!
//! Every feature is drawn independently from `Normal(mean_j, std_j^2)` with
//! parameters inferred from the training data. Variates come from a
//! ChaCha8 stream through the ziggurat sampler in `rand_distr`, both of
//! which are value-stable across platforms for a given seed.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::{Dataset, FeatureStats};

/// Perturbation points in original feature units, `n × P`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleBatch {
    pub points: DMatrix<f64>,
    pub seed_used: u64,
}

/// Column means and sample (`n - 1`) standard deviations.
pub fn infer_feature_stats(dataset: &Dataset) -> FeatureStats {
    let rows = dataset.rows();
    let n = rows.nrows() as f64;
    let mut means = Vec::with_capacity(rows.ncols());
    let mut stds = Vec::with_capacity(rows.ncols());
    for col in rows.column_iter() {
        let mean = col.iter().sum::<f64>() / n;
        let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
        means.push(mean);
        stds.push((ss / (n - 1.0)).sqrt());
    }
    FeatureStats { means, stds }
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of repeat `index`: the splitmix64 output at position `index + 1` of
/// the stream started at `master`, i.e.
/// `mix(master + (index + 1) * 0x9E3779B97F4A7C15)`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Draws `n` independent points. The same `(stats, n, seed)` always yields
/// a bit-identical batch.
pub fn sample_perturbations(stats: &FeatureStats, n: usize, seed: u64) -> SampleBatch {
    let dims = stats.dims();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = DMatrix::zeros(n, dims);
    // row-major draw order so a batch's prefix does not depend on n
    for i in 0..n {
        for j in 0..dims {
            let z: f64 = rng.sample(StandardNormal);
            points[(i, j)] = stats.means[j] + stats.stds[j] * z;
        }
    }
    SampleBatch {
        points,
        seed_used: seed,
    }
}
