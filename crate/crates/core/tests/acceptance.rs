//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

mod common;

use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use common::*;
use lime_stability::config::ExplainerConfig;
use lime_stability::stability::{csi, vsi, ModelEnsemble};
use lime_stability::sweep::{run_sweep, SweepGrid, SweepSource};
use lime_stability::synth::TARGET_COLUMN;
use lime_stability::wridge::{coefficient_covariance, fit, fit_weighted_ridge, residual_variance};
use lime_stability::{infer_feature_stats, load_dataset, Builtin, Explainer, LocalModel, SeedMode};
use nalgebra::DMatrix;
use rand::Rng;

type Outcome = Result<String, String>;

/// Name, check, and wall-clock budget in seconds.
type Criterion = (&'static str, fn() -> Outcome, Option<u64>);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn formula_reductions() -> Outcome {
    let mut r = rng(1);
    let (n, p) = (400, 4);
    let z = equicorrelated(&mut r, n, p, 0.3);
    let w = kernel_like_weights(&z, 2.5);

    let got = coefficient_covariance(&z, &w, 0.0, 1.7).map_err(|e| e.to_string())?;
    let gls = weighted_gram(&weighted_center(&z, &w), &w).try_inverse().unwrap() * 1.7;
    let e_gls = max_abs_diff(&got, &gls) / max_abs(&gls);

    let ones = vec![1.0; n];
    let got = coefficient_covariance(&z, &ones, 2.0, 0.9).map_err(|e| e.to_string())?;
    let zc = weighted_center(&z, &ones);
    let xtx = zc.transpose() * &zc;
    let a = (&xtx + DMatrix::identity(p, p) * 2.0).try_inverse().unwrap();
    let ridge = &a * &xtx * a.transpose() * 0.9;
    let e_ridge = max_abs_diff(&got, &ridge) / max_abs(&ridge);

    let y: Vec<f64> = (0..n).map(|i| 0.5 + z[(i, 0)] - 2.0 * z[(i, 3)] + normal(&mut r)).collect();
    let f = fit(&z, &y, &ones, 0.0).map_err(|e| e.to_string())?;
    let (b0, b, resid) = wls_with_intercept(&z, &y, &ones);
    let s2 = weighted_rss_over_dof(&resid, &ones, p);
    let ols = ols_slope_covariance(&z, s2);
    let e_ols = (max_abs_diff(&f.covariance, &ols) / max_abs(&ols))
        .max((f.sigma2_hat - s2).abs() / s2)
        .max((f.intercept - b0).abs())
        .max((0..p).map(|j| (f.beta_hat[j] - b[j]).abs()).fold(0.0, f64::max));

    check(
        e_gls <= 1e-10 && e_ridge <= 1e-10 && e_ols <= 1e-8,
        format!("weighted λ=0 {e_gls:.1e}, unit-weight ridge {e_ridge:.1e}, OLS {e_ols:.1e}"),
    )
}

/// Fixed design with strongly correlated coefficient estimates and
/// heteroscedastic noise `εᵢ ~ N(0, σ²/wᵢ)`, for which `σ² A G A` is the
/// exact covariance of the weighted ridge estimator.
fn monte_carlo_covariance() -> Outcome {
    let (n, p, lambda, sigma2, reps) = (2000, 5, 1.0, 2.0, 10_000);
    let mut r = rng(7);
    let z = equicorrelated(&mut r, n, p, -0.24);
    let w = kernel_like_weights(&z, 3.0);
    let beta: Vec<f64> = vec![1.0, -0.5, 0.25, 2.0, 0.0];
    let mean: Vec<f64> = (0..n).map(|i| 0.3 + (0..p).map(|j| beta[j] * z[(i, j)]).sum::<f64>()).collect();
    let sd: Vec<f64> = w.iter().map(|wi| (sigma2 / wi).sqrt()).collect();

    let mut draws = DMatrix::zeros(reps, p);
    let mut y = vec![0.0; n];
    for k in 0..reps {
        for i in 0..n {
            y[i] = mean[i] + sd[i] * normal(&mut r);
        }
        let f = fit_weighted_ridge(&z, &y, &w, lambda).map_err(|e| e.to_string())?;
        draws.row_mut(k).copy_from(&f.beta_hat.transpose());
    }
    let centered = DMatrix::from_fn(reps, p, |k, j| draws[(k, j)] - draws.column(j).mean());
    let empirical = centered.transpose() * &centered / (reps - 1) as f64;
    let analytic = coefficient_covariance(&z, &w, lambda, sigma2).map_err(|e| e.to_string())?;
    let oracle = ridge_law_covariance(&z, &w, lambda, sigma2);
    let worst = empirical
        .iter()
        .zip(analytic.iter())
        .map(|(e, a)| ((e - a) / a).abs())
        .fold(0.0, f64::max);
    let formula = max_abs_diff(&analytic, &oracle) / max_abs(&oracle);
    check(
        worst <= 0.05 && formula <= 1e-10,
        format!("worst entrywise relative error {:.2}% over {reps} redraws", 100.0 * worst),
    )
}

fn interval_coverage() -> Outcome {
    let (n, p, reps) = (500, 5, 2000);
    let mut r = rng(8);
    let z = equicorrelated(&mut r, n, p, 0.2);
    let w = kernel_like_weights(&z, 3.0);
    let beta: Vec<f64> = vec![0.8, -1.2, 0.0, 0.4, 1.5];
    let sigma2 = 0.5;
    let mut hits = [0usize; 5];
    let mut y = vec![0.0; n];
    for _ in 0..reps {
        for i in 0..n {
            let mu = -0.7 + (0..p).map(|j| beta[j] * z[(i, j)]).sum::<f64>();
            y[i] = mu + (sigma2 / w[i]).sqrt() * normal(&mut r);
        }
        let f = fit(&z, &y, &w, 0.0).map_err(|e| e.to_string())?;
        for (j, ci) in f.conf_ints().iter().enumerate() {
            if ci.lower <= beta[j] && beta[j] <= ci.upper {
                hits[j] += 1;
            }
        }
    }
    let cov: Vec<f64> = hits.iter().map(|&h| 100.0 * h as f64 / reps as f64).collect();
    let ok = cov.iter().all(|c| (93.0..=97.0).contains(c));
    let shown: Vec<String> = cov.iter().map(|c| format!("{c:.2}%")).collect();
    check(ok, format!("coverage per coefficient [{}]", shown.join(", ")))
}

fn residual_variance_estimator() -> Outcome {
    let mut out = Vec::new();
    let mut ok = true;

    // plugging ridge (λ = 100) residuals into the same estimator
    let mut r = rng(9);
    let (n, p) = (500, 4);
    let z = gaussian_matrix(&mut r, n, p);
    let w = kernel_like_weights(&z, 2.5);
    let y: Vec<f64> = (0..n)
        .map(|i| 1.0 + 2.0 * z[(i, 0)] - z[(i, 1)] + 0.5 * z[(i, 3)] + 2.0 * normal(&mut r))
        .collect();
    let mandated = residual_variance(&z, &y, &w).map_err(|e| e.to_string())?.sigma2_hat;
    let rf = fit_weighted_ridge(&z, &y, &w, 100.0).map_err(|e| e.to_string())?;
    let resid: Vec<f64> = (0..n)
        .map(|i| y[i] - rf.intercept - (0..p).map(|j| rf.beta_hat[j] * z[(i, j)]).sum::<f64>())
        .collect();
    let plugged = weighted_rss_over_dof(&resid, &w, p);
    if plugged >= mandated {
        ok = false;
        out.push(format!(
            "ridge-residual estimate {plugged:.6} is not below the unpenalized one {mandated:.6} \
             (the unpenalized fit minimizes the weighted residual sum of squares)"
        ));
    } else {
        out.push(format!("ridge-residual estimate {plugged:.6} < {mandated:.6}"));
    }

    let n = 100_000;
    let z = gaussian_matrix(&mut r, n, 3);
    let y: Vec<f64> = (0..n).map(|i| z[(i, 0)] - 0.5 * z[(i, 2)] + 2.0 * normal(&mut r)).collect();
    let s2 = residual_variance(&z, &y, &vec![1.0; n]).map_err(|e| e.to_string())?.sigma2_hat;
    let rel = (s2 - 4.0).abs() / 4.0;
    if rel > 0.02 {
        ok = false;
    }
    out.push(format!("n = 10^5 estimate {s2:.4} vs 4 ({:.2}% off)", 100.0 * rel));
    check(ok, out.join("; "))
}

fn random_ensemble(r: &mut impl Rng) -> Vec<LocalModel> {
    let m = r.random_range(2..=5);
    let p = r.random_range(1..=4);
    let dims = p + r.random_range(0..=4);
    (0..m)
        .map(|_| {
            let mut features: Vec<usize> = (0..dims).collect();
            for i in 0..p {
                let k = r.random_range(i..dims);
                features.swap(i, k);
            }
            let entries: Vec<(usize, f64, f64)> = features[..p]
                .iter()
                .map(|&j| (j, r.random_range(-3.0..3.0), r.random_range(0.0..1.0)))
                .collect();
            model(&entries)
        })
        .collect()
}

fn ci_model(entries: &[(usize, f64, f64)]) -> LocalModel {
    let e: Vec<(usize, f64, f64)> = entries
        .iter()
        .map(|&(j, lo, hi)| (j, 0.5 * (lo + hi), (0.5 * (hi - lo) / 1.96).powi(2)))
        .collect();
    model(&e)
}

fn index_oracles() -> Outcome {
    let mut r = rng(10);
    let trials = 5000;
    for t in 0..trials {
        let ms = random_ensemble(&mut r);
        let e = ModelEnsemble::new(&ms).map_err(|e| e.to_string())?;
        if vsi(&e) != brute_vsi(&ms) {
            return Err(format!("VSI differs from brute force on trial {t}"));
        }
        match (csi(&e), brute_csi(&ms)) {
            (Ok(got), Some((want, par))) if got.csi == want && got.par == par => {}
            (Err(_), None) => {}
            _ => return Err(format!("CSI differs from brute force on trial {t}")),
        }
    }
    let three = [
        ci_model(&[(1, 0.0, 1.0), (2, 0.0, 1.0)]),
        ci_model(&[(1, 0.0, 1.0), (2, 0.0, 1.0)]),
        ci_model(&[(1, 0.0, 1.0), (3, 0.0, 1.0)]),
    ];
    let v = vsi(&ModelEnsemble::new(&three).unwrap());
    let intervals = [ci_model(&[(0, 0.0, 1.0)]), ci_model(&[(0, 0.5, 1.5)]), ci_model(&[(0, 2.0, 3.0)])];
    let par = csi(&ModelEnsemble::new(&intervals).unwrap()).map_err(|e| e.to_string())?.par[&0];
    check(
        (v - 200.0 / 3.0).abs() < 1e-12 && (par - 1.0 / 3.0).abs() < 1e-12,
        format!("{trials} random ensembles exact; VSI {v:.4}, Par {par:.6}"),
    )
}

struct Credit {
    stats: lime_stability::FeatureStats,
    names: Vec<String>,
    point: Vec<f64>,
}

fn credit_data() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/synthetic_credit.csv")
}

fn credit() -> Credit {
    let ds = load_dataset(credit_data(), Some(TARGET_COLUMN)).expect("bundled data");
    Credit {
        stats: infer_feature_stats(&ds),
        names: ds.feature_names().to_vec(),
        point: ds.row(35).unwrap(),
    }
}

fn credit_config(kernel_width: f64, ridge_penalty: f64) -> ExplainerConfig {
    ExplainerConfig {
        num_samples: 5000,
        num_features: 7,
        repeats: 10,
        kernel_width,
        ridge_penalty,
        master_seed: 42,
        ..ExplainerConfig::for_dims(20)
    }
}

fn degenerate_seeds() -> Outcome {
    let c = credit();
    let f = Builtin::SyntheticCredit;
    let e = Explainer::new(&f, c.stats, c.names, credit_config(3.0, 1.0)).map_err(|e| e.to_string())?;
    let r = e.stability_run_with(&c.point, SeedMode::Fixed(5)).map_err(|e| e.to_string())?;
    check(r.vsi == 100.0 && r.csi == 100.0, format!("VSI {}, CSI {}", r.vsi, r.csi))
}

fn stable_versus_unstable() -> Outcome {
    let c = credit();
    let f = Builtin::SyntheticCredit;
    let budget = Duration::from_secs(15);
    let mut runs = Vec::new();
    for (kw, lambda) in [(3.0, 1.0), (1.3, 0.001)] {
        let e = Explainer::new(&f, c.stats.clone(), c.names.clone(), credit_config(kw, lambda))
            .map_err(|e| e.to_string())?;
        let start = Instant::now();
        let r = e.stability_run(&c.point).map_err(|e| e.to_string())?;
        runs.push((r.vsi, r.csi, start.elapsed()));
    }
    let (sv, sc, st) = runs[0];
    let (uv, uc, ut) = runs[1];
    check(
        sv > uv && sc > uc && sv - uv >= 20.0 && st <= budget && ut <= budget,
        format!(
            "stable VSI {sv:.2} CSI {sc:.2} ({:.2} s); unstable VSI {uv:.2} CSI {uc:.2} ({:.2} s)",
            st.as_secs_f64(),
            ut.as_secs_f64()
        ),
    )
}

fn dimensionality() -> Outcome {
    let grid = SweepGrid {
        kernel_widths: vec![None],
        ridge_penalties: vec![1.0],
        num_samples: vec![5000],
        base: ExplainerConfig {
            num_features: 5,
            repeats: 10,
            master_seed: 42,
            ..ExplainerConfig::for_dims(5)
        },
    };
    let source = SweepSource::Synthetic { dims: vec![5, 50, 200] };
    let cells = run_sweep(&Builtin::Friedman1, &source, &grid, 4).map_err(|e| e.to_string())?;
    let v: Vec<f64> = cells.iter().map(|c| c.vsi.unwrap_or(f64::NAN)).collect();
    check(
        v.windows(2).all(|w| w[1] <= w[0]),
        format!("VSI at P = 5, 50, 200: {:.2}, {:.2}, {:.2}", v[0], v[1], v[2]),
    )
}

fn cli_determinism() -> Outcome {
    let data = credit_data();
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_limestab"))
            .args(["stability", "--data"])
            .arg(&data)
            .args(["--target-col", TARGET_COLUMN, "--row", "35", "--predictor", "builtin:synthetic-credit"])
            .args(["--reproducible", "--quiet"])
            .output()
            .map_err(|e| e.to_string())
    };
    let a = run()?;
    let b = run()?;
    if !a.status.success() {
        return Err(String::from_utf8_lossy(&a.stderr).into_owned());
    }
    check(a.stdout == b.stdout, format!("{} bytes, identical: {}", a.stdout.len(), a.stdout == b.stdout))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("formula reductions", formula_reductions, Some(1)),
        ("Monte Carlo covariance", monte_carlo_covariance, Some(60)),
        ("confidence interval coverage", interval_coverage, Some(60)),
        ("residual variance estimator", residual_variance_estimator, None),
        ("index oracles", index_oracles, None),
        ("degenerate stability", degenerate_seeds, None),
        ("stable vs unstable settings", stable_versus_unstable, None),
        ("dimensionality", dimensionality, None),
        ("report determinism", cli_determinism, None),
    ];
    let mut failed = 0;
    for (name, run, budget) in criteria {
        let start = Instant::now();
        let mut outcome = run();
        let secs = start.elapsed().as_secs_f64();
        if let (Ok(detail), Some(limit)) = (&outcome, budget) {
            if secs >= limit as f64 {
                outcome = Err(format!("{detail}; took {secs:.2} s, budget {limit} s"));
            }
        }
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.2} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.2} s]");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

