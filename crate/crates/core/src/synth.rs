//! Synthetic credit-application data.
//!
//! Twenty independent Gaussian features with credit-flavoured names and
//! scales, plus a binary `bad_payer` target drawn from a smooth logistic
//! default-probability function. The same function is exposed as the
//! `synthetic-credit` builtin predictor, standing in for a trained scorer.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::data::Dataset;

pub const DEFAULT_ROWS: usize = 2000;
pub const DEFAULT_SEED: u64 = 2020;
pub const TARGET_COLUMN: &str = "bad_payer";

/// Generator parameters of one feature.
#[derive(Debug, Clone, Copy)]
pub struct CreditFeature {
    pub name: &'static str,
    pub mean: f64,
    pub std: f64,
    /// Weight of the standardized feature in the default log-odds.
    pub weight: f64,
}

const fn feat(name: &'static str, mean: f64, std: f64, weight: f64) -> CreditFeature {
    CreditFeature { name, mean, std, weight }
}

pub const CREDIT_FEATURES: [CreditFeature; 20] = [
    feat("bureau_score", 600.0, 80.0, -1.1),
    feat("months_unpaid_12m", 1.0, 1.2, 0.9),
    feat("debt_to_income", 0.35, 0.12, 0.6),
    feat("credit_utilization", 0.45, 0.2, 0.5),
    feat("inquiries_6m", 2.0, 1.5, 0.35),
    feat("annual_income", 32000.0, 9000.0, -0.3),
    feat("age", 42.0, 11.0, -0.25),
    feat("employment_years", 9.0, 6.0, -0.2),
    feat("loan_amount", 15000.0, 7000.0, 0.15),
    feat("loan_term_months", 60.0, 18.0, 0.1),
    feat("open_accounts", 5.0, 2.5, 0.05),
    feat("savings_balance", 8000.0, 5000.0, -0.05),
    feat("residence_years", 7.0, 5.0, 0.0),
    feat("dependents", 1.2, 1.1, 0.0),
    feat("revolving_balance", 4000.0, 2500.0, 0.0),
    feat("installment_ratio", 0.18, 0.07, 0.0),
    feat("months_since_delinquency", 30.0, 18.0, 0.0),
    feat("bank_relationship_years", 8.0, 6.0, 0.0),
    feat("mortgage_balance", 90000.0, 60000.0, 0.0),
    feat("region_index", 0.5, 0.29, 0.0),
];

const BASE_LOG_ODDS: f64 = -3.6;

/// Default probability for one applicant (raw feature units, the
/// [`CREDIT_FEATURES`] order).
pub fn credit_default_probability(x: &[f64]) -> f64 {
    let z = |j: usize| (x[j] - CREDIT_FEATURES[j].mean) / CREDIT_FEATURES[j].std;
    let mut t = BASE_LOG_ODDS;
    for (j, f) in CREDIT_FEATURES.iter().enumerate() {
        t += f.weight * z(j);
    }
    // bureau score and arrears interact; arrears hurt more than linearly
    t += 0.3 * z(0) * z(1) + 0.25 * z(1) * z(1);
    1.0 / (1.0 + (-t).exp())
}

fn round4(v: f64) -> f64 {
    (v * 1e4).round() / 1e4
}

/// Generates `rows` applicants. Feature values are rounded to four decimals
/// so the CSV form is exact.
pub fn credit_dataset(rows: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = CREDIT_FEATURES.len();
    let mut values = DMatrix::zeros(rows, dims);
    let mut target = Vec::with_capacity(rows);
    let mut row = vec![0.0; dims];
    for i in 0..rows {
        for (j, f) in CREDIT_FEATURES.iter().enumerate() {
            let z: f64 = rng.sample(StandardNormal);
            row[j] = round4(f.mean + f.std * z);
            values[(i, j)] = row[j];
        }
        let p = credit_default_probability(&row);
        let u: f64 = rng.random();
        target.push(if u < p { 1.0 } else { 0.0 });
    }
    let names = CREDIT_FEATURES.iter().map(|f| f.name.to_string()).collect();
    Dataset::new(names, values, Some((TARGET_COLUMN.to_string(), target))).expect("generated data is valid")
}
