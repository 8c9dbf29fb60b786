//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured statistics (visible with `--nocapture`). Criterion 3 runs the
//! full-size benchmark and takes tens of minutes on a small machine.

mod common;

use common::{brute_profile, random_walk_multi, trapezoid_auc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sketchcord::datagen::{gen_random_walk, plant_discord, PlantShape, PlantSpec, WalkConfig};
use sketchcord::detect::{detect_sketched, detect_with_plan, exact_discord};
use sketchcord::eval::{
    chebyshev_suite, lemma1_suite, lemma2_suite, roc_auc, success_rate_experiment, LabeledScores,
    LemmaSuiteConfig, SuccessRateConfig,
};
use sketchcord::profile::{ab_join, default_exclusion_radius, self_join};
use sketchcord::series::{MultiSeries, Series};
use sketchcord::sketch::{sketch, sketch_pair, SketchPlan};
use sketchcord::{DetectionConfig, JoinMode};

/// Criterion 1: ab_join and self_join match the O(n^2 m) definitional oracle
/// within 1e-6 elementwise, with identical nn_index under smallest-index
/// tie-breaking, on 200 seeded random instances.
#[test]
fn c1_matrix_profile_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC1);
    let ms = [8usize, 16, 32];
    let mut checked = 0usize;
    for inst in 0..200 {
        let m = ms[inst % ms.len()];
        let n_train = rng.gen_range(2 * m + 10..=300);
        let n_test = rng.gen_range(2 * m + 10..=300);
        let train = common::random_walk_series(&mut rng, n_train);
        let test = common::random_walk_series(&mut rng, n_test);

        let got = ab_join(&train, &test, m).unwrap();
        let (want_profile, want_nn) = brute_profile(train.values(), test.values(), m, None);
        for i in 0..want_profile.len() {
            assert!(
                (got.profile[i] - want_profile[i]).abs() < 1e-6,
                "instance {inst} ab i={i}: {} vs {}",
                got.profile[i],
                want_profile[i]
            );
            assert_eq!(got.nn_index[i], want_nn[i], "instance {inst} ab i={i}");
        }

        let radius = default_exclusion_radius(m);
        let got = self_join(&test, m, radius).unwrap();
        let (want_profile, want_nn) = brute_profile(test.values(), test.values(), m, Some(radius));
        for i in 0..want_profile.len() {
            assert!(
                (got.profile[i] - want_profile[i]).abs() < 1e-6,
                "instance {inst} self i={i}"
            );
            assert_eq!(got.nn_index[i], want_nn[i], "instance {inst} self i={i}");
        }
        checked += 1;
    }
    println!("ACCEPTANCE 1 matrix-profile oracle equivalence: PASS ({checked} instances)");
}

/// Criterion 2: with the injective plan hook and refinement, the sketched
/// pipeline equals the exact baseline (same i*/j*, score within 1e-6) on 50
/// random multidimensional instances.
#[test]
fn c2_degenerate_sketch_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC2);
    for inst in 0..50 {
        let d = rng.gen_range(2..=16);
        let n_train = rng.gen_range(80..=200);
        let n_test = rng.gen_range(80..=200);
        let m = [8, 12, 16][inst % 3];
        let train = random_walk_multi(&mut rng, d, n_train);
        let test = random_walk_multi(&mut rng, d, n_test);

        let exact = exact_discord(&train, &test, m).unwrap();
        let names: Vec<&str> = train.names().collect();
        let plan = SketchPlan::identity(&names).unwrap();
        let cfg = DetectionConfig {
            refine: true,
            ..DetectionConfig::new(m, d, 0)
        };
        let fast = detect_with_plan(&train, &test, &cfg, &plan).unwrap();

        assert_eq!(fast.i_star, exact.i_star, "instance {inst}");
        assert_eq!(fast.j_star, exact.j_star, "instance {inst}");
        assert!(
            (fast.score - exact.score).abs() < 1e-6,
            "instance {inst}: {} vs {}",
            fast.score,
            exact.score
        );
    }
    println!("ACCEPTANCE 2 degenerate-sketch equivalence: PASS (50 instances)");
}

/// Criterion 3: desk-scale reproduction of the synthetic scaling experiment.
/// d=250, n=10000, m=100, k=16, 100 random-walk trials: success rate >= 0.90
/// at rank threshold 0.001 and mean total speedup >= 5x.
#[test]
fn c3_success_rate_and_speedup() {
    let cfg = SuccessRateConfig {
        dims: vec![250],
        n: 10_000,
        m: 100,
        trials: 100,
        threshold: 0.001,
        seed: 0xC3,
        k: 16,
        refine: true,
    };
    let results = success_rate_experiment(&cfg).unwrap();
    let r = &results[0];
    println!(
        "ACCEPTANCE 3 success rate {:.2} (>= 0.90), mean speedup {:.1}x (>= 5x): {}",
        r.success_rate,
        r.mean_speedup,
        if r.success_rate >= 0.90 && r.mean_speedup >= 5.0 {
            "PASS"
        } else {
            "FAIL"
        }
    );
    assert!(r.success_rate >= 0.90, "success rate {}", r.success_rate);
    assert!(r.mean_speedup >= 5.0, "mean speedup {}", r.mean_speedup);
}

/// Criterion 4: count-sketch estimator statistics at d=64, k=8 over 10^4 hash
/// seeds and 20 probes: mean within 3 standard errors of truth, variance
/// within +-20% of (1/k) * sum over other dimensions of squared values.
#[test]
fn c4_lemma1_statistics() {
    let report = lemma1_suite(&LemmaSuiteConfig::new(0xC4)).unwrap();
    for probe in &report.probes {
        assert!(
            probe.mean_ok,
            "probe {}@{}: mean {} vs truth {} (3se {})",
            probe.dim, probe.index, probe.est_mean, probe.truth, probe.three_se
        );
        assert!(
            probe.var_ok,
            "probe {}@{}: var {} vs target {}",
            probe.dim, probe.index, probe.emp_var, probe.target_var
        );
    }
    println!(
        "ACCEPTANCE 4 estimator unbiasedness/variance: PASS ({} probes x {} seeds)",
        report.probes.len(),
        report.trials
    );
}

/// Criterion 5: Chebyshev threshold. d=256, k=16, m=64, planted displacement
/// 1.05 * tau(delta); over 400 hash seeds the miss rate stays at or below
/// delta + 3 binomial standard errors for delta in {0.25, 0.5}.
#[test]
fn c5_chebyshev_threshold() {
    let report = chebyshev_suite(&LemmaSuiteConfig::new(0xC5)).unwrap();
    for r in &report.per_delta {
        println!(
            "ACCEPTANCE 5 delta={}: tau={:.1}, planted={:.1}, miss rate {:.4} (bound {:.4}): {}",
            r.delta,
            r.tau,
            r.realized_norm,
            r.miss_rate,
            r.bound,
            if r.pass { "PASS" } else { "FAIL" }
        );
        assert!(r.pass, "delta {}: miss rate {} > {}", r.delta, r.miss_rate, r.bound);
    }
}

/// Criterion 6: noisy-periodic recovery. eta=0.05, P=48, 20 train periods,
/// d=32, planted norm above 8*m*eta: detection (i* within +-m, correct j*)
/// in at least 95% of 50 seeds.
#[test]
fn c6_periodic_recovery() {
    let report = lemma2_suite(&LemmaSuiteConfig::new(0xC6)).unwrap();
    println!(
        "ACCEPTANCE 6 periodic recovery rate {:.2} over {} seeds (>= 0.95): {}",
        report.detection_rate,
        report.trials,
        if report.pass { "PASS" } else { "FAIL" }
    );
    assert!(report.pass, "detection rate {}", report.detection_rate);
}

/// Criterion 7: linearity and dynamic updates. For 100 random splits,
/// sketch(A u B) == sketch(A) + sketch(B) within 1e-12; add-then-delete
/// restores the original within 1e-12; incremental adds equal the one-shot
/// sketch within 1e-12.
#[test]
fn c7_linearity_and_dynamic_updates() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC7);
    for trial in 0..100u64 {
        let d = 16;
        let n = 48;
        let t = random_walk_multi(&mut rng, d, n);
        let names: Vec<String> = t.names().map(String::from).collect();
        let k = rng.gen_range(1..=5);
        let seed = rng.gen();
        let full_plan = SketchPlan::new(&names, k, seed).unwrap();
        let full = sketch(&t, &full_plan).unwrap();

        // Random disjoint split; name-keyed hashing keeps assignments stable
        // across the sub-plans.
        let mut a_names = Vec::new();
        let mut b_names = Vec::new();
        for name in &names {
            if rng.gen::<bool>() {
                a_names.push(name.clone());
            } else {
                b_names.push(name.clone());
            }
        }
        if a_names.is_empty() {
            a_names.push(b_names.pop().unwrap());
        }
        if b_names.is_empty() {
            b_names.push(a_names.pop().unwrap());
        }
        let subset = |subset: &[String]| {
            MultiSeries::new(
                subset
                    .iter()
                    .map(|n| (n.clone(), t.dim(n).unwrap().clone()))
                    .collect(),
            )
            .unwrap()
        };
        let ra = sketch(&subset(&a_names), &SketchPlan::new(&a_names, k, seed).unwrap()).unwrap();
        let rb = sketch(&subset(&b_names), &SketchPlan::new(&b_names, k, seed).unwrap()).unwrap();
        for g in 0..k {
            for ((a, b), want) in ra
                .group(g)
                .values()
                .iter()
                .zip(rb.group(g).values())
                .zip(full.group(g).values())
            {
                assert!((a + b - want).abs() < 1e-12, "trial {trial} group {g}");
            }
        }

        // Add-then-delete inverse on a fresh dimension.
        let extra = common::random_walk_series(&mut rng, n);
        let grown = full.add_dimension("extra", &extra).unwrap();
        let restored = grown.delete_dimension("extra", &extra).unwrap();
        for g in 0..k {
            for (a, b) in restored.group(g).values().iter().zip(full.group(g).values()) {
                assert!((a - b).abs() < 1e-12, "trial {trial} add/delete group {g}");
            }
        }

        // Incremental adds equal the one-shot sketch (spot-checked subset of
        // trials; each check covers every group element).
        if trial % 10 == 0 {
            let first = subset(&names[..1]);
            let mut grown =
                sketch(&first, &SketchPlan::new(&names[..1], k, seed).unwrap()).unwrap();
            for name in &names[1..] {
                grown = grown.add_dimension(name, t.dim(name).unwrap()).unwrap();
            }
            for g in 0..k {
                for (a, b) in grown.group(g).values().iter().zip(full.group(g).values()) {
                    assert!((a - b).abs() < 1e-12, "trial {trial} incremental group {g}");
                }
            }
        }
    }
    println!("ACCEPTANCE 7 linearity/dynamic updates: PASS (100 splits)");
}

/// Criterion 8: rank-statistic AUC matches trapezoidal ROC integration within
/// 1e-9 on 500 random labeled-score sets including ties; perfect separation
/// gives exactly 1.0.
#[test]
fn c8_auc_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC8);
    for trial in 0..500 {
        let n = rng.gen_range(10..=200);
        let mut scores: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        // Quantize some sets so tied scores are exercised.
        if trial % 3 == 0 {
            for s in &mut scores {
                *s = (*s * 4.0).round() / 4.0;
            }
        }
        let mut labels: Vec<bool> = (0..n).map(|_| rng.gen()).collect();
        if labels.iter().all(|&l| l) {
            labels[0] = false;
        }
        if labels.iter().all(|&l| !l) {
            labels[0] = true;
        }
        let ls = LabeledScores::new(scores.clone(), labels.clone()).unwrap();
        let fast = roc_auc(&ls);
        let slow = trapezoid_auc(&scores, &labels);
        assert!(
            (fast - slow).abs() < 1e-9,
            "trial {trial}: rank {fast} vs trapezoid {slow}"
        );
    }

    let separated = LabeledScores::new(
        vec![0.0, 0.1, 0.2, 5.0, 5.1, 5.2],
        vec![false, false, false, true, true, true],
    )
    .unwrap();
    assert_eq!(roc_auc(&separated), 1.0);
    println!("ACCEPTANCE 8 AUC rank statistic vs integration: PASS (500 sets)");
}

/// Criterion 9: robustness to appended noise. Starting from d=20 with one
/// strong planted anomaly, appending 200 random-walk dimensions through the
/// sketch's dynamic-add path leaves the detected dimension unchanged in at
/// least 80% of 25 seeds.
#[test]
fn c9_robustness_to_added_dimensions() {
    let n_train = 2000;
    let n_test = 500;
    let m = 64;
    let mut unchanged = 0usize;
    let mut hit_plant = 0usize;
    let seeds = 25u64;
    for trial in 0..seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(0xC900 + trial);
        let base_seed = rng.gen::<u64>();
        let train = gen_random_walk(&WalkConfig::new(20, n_train, base_seed)).unwrap();
        let test = gen_random_walk(&WalkConfig::new(20, n_test, base_seed ^ 0xAB)).unwrap();
        let plant_dim = format!("dim{:05}", rng.gen_range(0..20));
        let plant_at = rng.gen_range(0..=n_test - m);
        let test = plant_discord(
            &test,
            &PlantSpec {
                dimension: plant_dim.clone(),
                start: plant_at,
                m,
                delta_norm: 120.0,
                shape: PlantShape::Burst,
            },
        )
        .unwrap();

        let names: Vec<&str> = train.names().collect();
        let plan = SketchPlan::new(&names, 0, rng.gen()).unwrap();
        let (r_train, r_test) = sketch_pair(&train, &test, &plan).unwrap();
        let cfg = DetectionConfig {
            mode: JoinMode::Ab,
            ..DetectionConfig::new(m, plan.k(), plan.seed())
        };
        let (before, _) = detect_sketched(&r_train, &r_test, &train, &test, &cfg).unwrap();

        // Append 200 noise dimensions through the dynamic-update path; the
        // test side reuses each new dimension's training statistics.
        let noise_train = gen_random_walk(&WalkConfig {
            d: 200,
            n: n_train,
            step_std: 1.0,
            seed: base_seed ^ 0xCD,
        })
        .unwrap();
        let noise_test = gen_random_walk(&WalkConfig {
            d: 200,
            n: n_test,
            step_std: 1.0,
            seed: base_seed ^ 0xEF,
        })
        .unwrap();
        let mut r_train_big = r_train;
        let mut r_test_big = r_test;
        let mut train_big = train.clone();
        let mut test_big = test.clone();
        for j in 0..200 {
            let name = format!("noise{j:05}");
            let (_, tr) = noise_train.dim_at(j);
            let (_, te) = noise_test.dim_at(j);
            r_train_big = r_train_big.add_dimension(&name, tr).unwrap();
            let stats = r_train_big.norms()[&name];
            r_test_big = r_test_big.add_dimension_with_stats(&name, te, stats).unwrap();
            train_big.push_dim(name.clone(), tr.clone()).unwrap();
            test_big.push_dim(name, te.clone()).unwrap();
        }

        let (after, _) =
            detect_sketched(&r_train_big, &r_test_big, &train_big, &test_big, &cfg).unwrap();
        if after.j_star == before.j_star {
            unchanged += 1;
        }
        if after.j_star == plant_dim {
            hit_plant += 1;
        }
    }
    let rate = unchanged as f64 / seeds as f64;
    println!(
        "ACCEPTANCE 9 robustness: j* unchanged in {unchanged}/{seeds} seeds \
         ({hit_plant} still on the plant) (>= 0.80): {}",
        if rate >= 0.80 { "PASS" } else { "FAIL" }
    );
    assert!(rate >= 0.80, "unchanged rate {rate}");
}
