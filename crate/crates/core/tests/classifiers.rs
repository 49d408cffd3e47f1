use std::collections::BTreeMap;

use newsdesk_core::classifiers::*;
use newsdesk_core::synthetic::section_corpus;
use newsdesk_core::textproc::SparseVector;
use newsdesk_core::{Language, SectionLabel, StanceLabel};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

fn random_problem(rng: &mut ChaCha8Rng, n: usize, d: usize, k: usize) -> Vec<(SparseVector, usize)> {
    (0..n)
        .map(|i| {
            let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            (SparseVector::from_dense(&x), if i < k { i } else { rng.gen_range(0..k) })
        })
        .collect()
}

/// Central differences, h = 1e-5, against the analytic gradient.
fn max_relative_fd_error(samples: &[(SparseVector, usize)], k: usize, d: usize, l2: f64, theta: &[f64]) -> f64 {
    let objective = MaxentObjective::new(samples, k, d, l2);
    let (_, grad) = objective.loss_and_gradient(theta);
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in 0..theta.len() {
        let mut plus = theta.to_vec();
        let mut minus = theta.to_vec();
        plus[i] += h;
        minus[i] -= h;
        let numeric = (objective.loss(&plus) - objective.loss(&minus)) / (2.0 * h);
        let err = (numeric - grad[i]).abs() / numeric.abs().max(grad[i].abs()).max(1e-6);
        worst = worst.max(err);
    }
    worst
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let samples = random_problem(&mut rng, 5, 4, 3);
        let theta: Vec<f64> = (0..3 * 5).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let err = max_relative_fd_error(&samples, 3, 4, 0.1, &theta);
        assert!(err < 1e-4, "relative error {err}");
    }
}

#[test]
fn separable_data_is_fit_exactly_and_loss_never_rises() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = [1.5, -2.0, 0.5];
    let samples: Vec<(SparseVector, usize)> = (0..200)
        .filter_map(|_| {
            let x: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let s: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum();
            (s.abs() > 0.05).then(|| (SparseVector::from_dense(&x), usize::from(s > 0.0)))
        })
        .collect();
    let cfg = TrainConfig {
        l2: 0.0,
        max_iter: 2000,
        ..TrainConfig::default()
    };
    let space = FeatureSpace::Named {
        names: vec!["a".into(), "b".into(), "c".into()],
    };
    let (model, report) = train_maxent(&samples, vec!["neg".into(), "pos".into()], space, &cfg).unwrap();
    for (x, y) in &samples {
        assert_eq!(model.predict(x).unwrap(), *y);
    }
    assert!(report.loss_trace.windows(2).all(|p| p[1] <= p[0]));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rescaling_features_keeps_training_predictions(seed in 0u64..1000, c in 0.2f64..5.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // 40 noisy points in 2-D: overlapping classes, so the unregularized optimum is finite
        let samples: Vec<(SparseVector, usize)> = (0..40)
            .map(|i| {
                let y = i % 2;
                let center = if y == 0 { -0.3 } else { 0.3 };
                let x = [center + rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                (SparseVector::from_dense(&x), y)
            })
            .collect();
        let scaled: Vec<_> = samples.iter().map(|(x, y)| (x.scale(c), *y)).collect();
        let cfg = TrainConfig { l2: 0.0, max_iter: 5000, tol: 1e-10, ..TrainConfig::default() };
        let space = FeatureSpace::Named { names: vec!["a".into(), "b".into()] };
        let classes = vec!["a".to_owned(), "b".to_owned()];
        let (m1, r1) = train_maxent(&samples, classes.clone(), space.clone(), &cfg).unwrap();
        let (m2, r2) = train_maxent(&scaled, classes, space, &cfg).unwrap();
        prop_assume!(r1.converged && r2.converged);
        for ((x, _), (xs, _)) in samples.iter().zip(&scaled) {
            let s1 = m1.scores(x).unwrap();
            let s2 = m2.scores(xs).unwrap();
            // points sitting on the decision boundary are resolved by rounding, skip them
            if (s1[0] - s1[1]).abs() > 1e-6 {
                prop_assert_eq!(argmax(&s1), argmax(&s2));
            }
        }
    }
}

fn section_eval() -> (f64, f64) {
    let docs = section_corpus(500, 42);
    let (train, test): (Vec<_>, Vec<_>) = docs.into_iter().enumerate().partition(|(i, _)| i % 5 != 0);
    let train: Vec<(String, Language, SectionLabel)> =
        train.into_iter().map(|(_, (t, l))| (t, Language::En, l)).collect();
    let (model, _) = train_section_model(&train, 2, Language::En, &TrainConfig::default()).unwrap();
    let mut gold = Vec::new();
    let mut pred = Vec::new();
    for (_, (text, label)) in &test {
        let article = newsdesk_core::Article::new(
            url::Url::parse("https://example.org/x").unwrap(),
            "m".into(),
            "",
            text.clone(),
            Language::En,
            chrono::Utc::now(),
        );
        gold.push(label.ordinal());
        pred.push(categorize_section(&article, &model).unwrap().ordinal());
    }
    let mut counts = [0.0; 6];
    for (_, _, label) in &train {
        counts[label.ordinal()] += 1.0;
    }
    let majority = argmax(&counts);
    let baseline = macro_f1(&gold, &vec![majority; gold.len()], 6);
    (macro_f1(&gold, &pred, 6), baseline)
}

#[test]
fn section_categorizer_on_synthetic_corpus() {
    let (f1, baseline) = section_eval();
    assert!(f1 >= 0.9, "macro-F1 {f1}");
    assert!(f1 - baseline >= 0.4, "baseline {baseline}");
}

#[derive(Deserialize)]
struct StanceCase {
    id: String,
    claim: String,
    body: String,
    expected: StanceLabel,
}

#[test]
fn stance_baseline_matches_golden_file() {
    let cases: Vec<StanceCase> =
        serde_json::from_str(include_str!("fixtures/stance_golden.json")).unwrap();
    assert_eq!(cases.len(), 10);
    let classifier = StanceClassifier::default();
    let got: BTreeMap<&str, StanceLabel> = cases
        .iter()
        .map(|c| (c.id.as_str(), classify_stance(&c.body, &c.claim, &classifier).unwrap()))
        .collect();
    let want: BTreeMap<&str, StanceLabel> = cases.iter().map(|c| (c.id.as_str(), c.expected)).collect();
    assert_eq!(got, want);
}

#[test]
fn saved_model_reloads_identically() {
    let dir = tempfile::tempdir().unwrap();
    let texts = vec![
        ("Enemies! Traitors! Rise up now!".to_owned(), true),
        ("The council approved the annual budget.".to_owned(), false),
        ("Wake up! They lie to you every day!".to_owned(), true),
        ("Rainfall was slightly above average in May.".to_owned(), false),
    ];
    let (model, _) = train_propaganda_model(&texts, &TrainConfig::default()).unwrap();
    let path = dir.path().join("propaganda.json");
    model.save(&path).unwrap();
    let back = LinearModel::load(&path).unwrap();
    assert_eq!(back, model);
    assert!(back.weights().iter().zip(model.weights()).all(|(a, b)| a.to_bits() == b.to_bits()));
}

#[test]
fn propaganda_model_separates_synthetic_styles() {
    let train = newsdesk_core::synthetic::propaganda_corpus(150, 1);
    let test = newsdesk_core::synthetic::propaganda_corpus(100, 2);
    let (model, _) = train_propaganda_model(&train, &TrainConfig::default()).unwrap();
    let k = model.class_index(PROPAGANDISTIC).unwrap();
    let correct = test
        .iter()
        .filter(|(text, is_prop)| {
            let p = predict_proba(&model, &propaganda_features(text)).unwrap()[k];
            (p >= 0.5) == *is_prop
        })
        .count();
    assert!(correct as f64 / test.len() as f64 >= 0.95, "{correct}/{}", test.len());
}

#[test]
fn propaganda_buckets_agree_with_interval_table() {
    let eps = f64::EPSILON;
    let mut points = vec![0.0, 0.2 - eps, 0.2, 0.4, 0.6, 0.8, 1.0];
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    points.extend((0..10_000).map(|_| rng.gen_range(0.0..=1.0)));
    let mismatches: Vec<f64> = points
        .iter()
        .copied()
        .filter(|&p| propaganda_label(p).unwrap().as_str() != newsdesk_testkit::propaganda_bucket_oracle(p))
        .collect();
    assert!(mismatches.is_empty(), "{mismatches:?}");
    assert_eq!(propaganda_label(0.2 - eps).unwrap().as_str(), "very_unlikely");
    assert_eq!(propaganda_label(0.2).unwrap().as_str(), "unlikely");
    assert_eq!(propaganda_label(1.0).unwrap().as_str(), "very_likely");
    for bad in [-eps, 1.0 + 1e-9, f64::NAN] {
        assert!(propaganda_label(bad).is_err(), "{bad}");
    }
}
