use lime_stability::config::ExplainerConfig;
use lime_stability::sampling::derive_seed;
use lime_stability::sweep::{SYNTHETIC_MEAN, SYNTHETIC_STD};
use lime_stability::{Builtin, Explainer, FeatureStats, SeedMode};

fn uniform_stats(dims: usize) -> FeatureStats {
    FeatureStats::new(vec![SYNTHETIC_MEAN; dims], vec![SYNTHETIC_STD; dims]).unwrap()
}

const QUERY: [f64; 5] = [0.3, 0.6, 0.4, 0.5, 0.7];

#[test]
fn linear_model_is_recovered_at_zero_penalty() {
    let c = vec![2.0, -1.0, 0.5, 3.0];
    let f = Builtin::Linear(c.clone());
    let stats = FeatureStats::new(vec![1.0, -2.0, 0.0, 5.0], vec![0.5, 2.0, 1.0, 3.0]).unwrap();
    let cfg = ExplainerConfig {
        num_samples: 2000,
        num_features: 4,
        kernel_width: 2.0,
        ridge_penalty: 0.0,
        ..ExplainerConfig::for_dims(4)
    };
    let e = Explainer::unnamed(&f, stats.clone(), cfg).unwrap();
    let x = [1.2, -1.0, 0.3, 4.0];
    let out = e.explain_once(&x, 9).unwrap();
    for (j, &cj) in c.iter().enumerate() {
        let want = cj * stats.stds[j];
        let got = out.local_model.coefficients[&j];
        assert!((got - want).abs() <= 0.02 * want.abs(), "feature {j}: {got} vs {want}");
        let raw = out.feature_contributions.iter().find(|k| k.index == j).unwrap().raw_coefficient;
        assert!((raw - cj).abs() <= 0.02 * cj.abs());
    }
    let fx: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    assert!((out.lime_prediction - fx).abs() < 1e-6 * fx.abs().max(1.0));
}

#[test]
fn constant_model_has_flat_surrogate() {
    let f = Builtin::Linear(vec![0.0; 3]);
    let cfg = ExplainerConfig {
        num_samples: 500,
        num_features: 2,
        ..ExplainerConfig::for_dims(3)
    };
    let e = Explainer::unnamed(&f, uniform_stats(3), cfg).unwrap();
    let out = e.explain_once(&[0.1, 0.2, 0.9], 4).unwrap();
    assert!(out.local_model.coefficients.values().all(|b| *b == 0.0));
    assert_eq!(out.local_model.intercept, 0.0);
    assert_eq!(out.local_model.coefficients.len(), 2);
}

#[test]
fn results_are_bit_identical_across_runs() {
    let f = Builtin::Friedman1;
    let cfg = ExplainerConfig {
        num_samples: 1000,
        num_features: 3,
        repeats: 6,
        ..ExplainerConfig::for_dims(5)
    };
    let e = Explainer::unnamed(&f, uniform_stats(5), cfg).unwrap();
    let a = e.stability_run(&QUERY).unwrap();
    let b = e.stability_run(&QUERY).unwrap();
    assert_eq!(a.models, b.models);
    assert_eq!(a.vsi.to_bits(), b.vsi.to_bits());
    assert_eq!(a.csi.to_bits(), b.csi.to_bits());
}

#[test]
fn single_explanation_is_first_repeat() {
    let f = Builtin::LogisticLinear(vec![3.0, -2.0, 1.5, 0.5, 1.0]);
    let cfg = ExplainerConfig {
        num_samples: 800,
        num_features: 3,
        repeats: 4,
        ..ExplainerConfig::for_dims(5)
    };
    let e = Explainer::unnamed(&f, uniform_stats(5), cfg.clone()).unwrap();
    let run = e.stability_run(&QUERY).unwrap();
    for (i, m) in run.models.iter().enumerate() {
        let once = e.explain_once(&QUERY, derive_seed(cfg.master_seed, i as u64)).unwrap();
        assert_eq!(&once.local_model, m);
    }
}

#[test]
fn fixed_seed_repeats_are_perfectly_stable() {
    let f = Builtin::Friedman1;
    let cfg = ExplainerConfig {
        num_samples: 600,
        num_features: 3,
        repeats: 5,
        ..ExplainerConfig::for_dims(5)
    };
    let e = Explainer::unnamed(&f, uniform_stats(5), cfg).unwrap();
    let r = e.stability_run_with(&QUERY, SeedMode::Fixed(17)).unwrap();
    assert_eq!((r.vsi, r.csi), (100.0, 100.0));
}

#[test]
fn surrogate_tracks_model_as_kernel_narrows() {
    let models = [Builtin::Friedman1, Builtin::LogisticLinear(vec![3.0, -2.0, 1.5, 0.5, 1.0])];
    for f in &models {
        let fx = f.eval(&QUERY);
        for seed in 1..=4 {
            let gap = |kw: f64| {
                let cfg = ExplainerConfig {
                    num_features: 5,
                    kernel_width: kw,
                    ..ExplainerConfig::for_dims(5)
                };
                let e = Explainer::unnamed(f, uniform_stats(5), cfg).unwrap();
                (e.explain_once(&QUERY, seed).unwrap().lime_prediction - fx).abs()
            };
            let (wide, mid, narrow) = (gap(2.0), gap(1.0), gap(0.5));
            assert!(wide > mid && mid > narrow, "{} seed {seed}: {wide} {mid} {narrow}", f.spec());
        }
    }
}

#[test]
fn csi_grows_with_sample_size() {
    let f = Builtin::LogisticLinear(vec![3.0, -2.0, 1.5, 0.5, 1.0]);
    let csi = |n: usize| {
        let cfg = ExplainerConfig {
            num_samples: n,
            num_features: 5,
            ..ExplainerConfig::for_dims(5)
        };
        Explainer::unnamed(&f, uniform_stats(5), cfg).unwrap().stability_run(&QUERY).unwrap().csi
    };
    let (small, mid, large) = (csi(1000), csi(5000), csi(20000));
    assert!(small < mid && mid < large, "{small} {mid} {large}");
}

#[test]
fn stronger_penalty_stabilizes_coefficients_near_a_jump() {
    let f = Builtin::Step { feature: 0, cut: 0.6 };
    let x: Vec<f64> = (0..6).map(|j| 0.3 + 0.05 * (j % 7) as f64).collect();
    for seed in [42, 1, 2, 3, 4, 5] {
        let csi = |lambda: f64| {
            let cfg = ExplainerConfig {
                num_features: 4,
                kernel_width: 0.5,
                ridge_penalty: lambda,
                master_seed: seed,
                ..ExplainerConfig::for_dims(6)
            };
            Explainer::unnamed(&f, uniform_stats(6), cfg).unwrap().stability_run(&x).unwrap().csi
        };
        let (loose, tight) = (csi(1e-3), csi(1.0));
        assert!(tight > loose, "seed {seed}: {loose} -> {tight}");
    }
}

#[test]
fn default_run_on_twenty_features_finishes_within_budget() {
    let f = Builtin::Friedman1;
    let cfg = ExplainerConfig::for_dims(20);
    assert_eq!((cfg.num_samples, cfg.num_features, cfg.repeats), (5000, 7, 10));
    let x = vec![0.5; 20];
    let r = Explainer::unnamed(&f, uniform_stats(20), cfg).unwrap().stability_run(&x).unwrap();
    assert_eq!(r.models.len(), 10);
    assert!(r.wall_time_seconds < 15.0, "{} s", r.wall_time_seconds);
}
