use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use chrono::{Duration, TimeZone, Utc};
use newsdesk_core::classifiers::{propaganda_label, read_source_labels};
use newsdesk_core::clustering::Story;
use newsdesk_core::profiles::*;
use newsdesk_core::{Article, ArticleId, FrameLabel, Language, MediaSource, MediumId, PropagandaLabel, PropagandaResult, StanceLabel};
use newsdesk_testkit::valence_oracle;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::Value;
use url::Url;

fn counts(tf_c0: u64, total_c0: u64, tf_c1: u64, total_c1: u64) -> GroupCitationCounts {
    GroupCitationCounts {
        medium_id: MediumId::from("m"),
        topic_id: "t".into(),
        tf_c0,
        total_c0,
        tf_c1,
        total_c1,
    }
}

fn random_valid(rng: &mut impl Rng) -> GroupCitationCounts {
    let total_c0 = rng.gen_range(1..=1_000_000);
    let total_c1 = rng.gen_range(1..=1_000_000);
    loop {
        let tf_c0 = rng.gen_range(0..=total_c0);
        let tf_c1 = rng.gen_range(0..=total_c1);
        if tf_c0 + tf_c1 > 0 {
            return counts(tf_c0, total_c0, tf_c1, total_c1);
        }
    }
}

#[test]
fn valence_matches_exact_rational_evaluation() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let c = random_valid(&mut rng);
        let v = valence(&c).unwrap();
        let exact = valence_oracle(c.tf_c0, c.total_c0, c.tf_c1, c.total_c1);
        worst = worst.max((v - exact).abs());
        assert!((-1.0..=1.0).contains(&v));
    }
    assert!(worst < 1e-12, "max deviation {worst}");
    assert!(started.elapsed().as_secs_f64() < 1.0);
}

#[test]
fn valence_worked_examples() {
    assert_eq!(valence(&counts(3, 9, 0, 4)).unwrap(), 1.0);
    assert_eq!(valence(&counts(7, 70, 3, 30)).unwrap(), 0.0);
    assert!((valence(&counts(30, 100, 10, 100)).unwrap() - 0.5).abs() < 1e-12);
    assert_eq!(valence_label(0.5).unwrap(), ValenceLabel::Right);
}

proptest! {
    #[test]
    fn valence_is_antisymmetric(seed in any::<u64>()) {
        let c = random_valid(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(valence(&c.swapped()).unwrap(), -valence(&c).unwrap());
    }

    #[test]
    fn valence_depends_only_on_ratios(seed in any::<u64>(), k0 in 1u64..1_000_000, k1 in 1u64..1_000_000) {
        let c = random_valid(&mut ChaCha8Rng::seed_from_u64(seed));
        let scaled = counts(c.tf_c0 * k0, c.total_c0 * k0, c.tf_c1 * k1, c.total_c1 * k1);
        prop_assert_eq!(valence(&scaled).unwrap(), valence(&c).unwrap());
    }

    #[test]
    fn label_is_total_on_valid_counts(seed in any::<u64>()) {
        let c = random_valid(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert!(valence_label(valence(&c).unwrap()).is_ok());
    }
}

#[test]
fn all_five_labels_are_reachable() {
    let seen: BTreeSet<ValenceLabel> = [(10, 0), (10, 3), (10, 10), (3, 10), (0, 10)]
        .into_iter()
        .map(|(a, b)| valence_label(valence(&counts(a, 100, b, 100)).unwrap()).unwrap())
        .collect();
    assert_eq!(seen.len(), 5);
}

#[derive(Deserialize)]
struct FixtureArticle {
    n: u32,
    medium: String,
    index: f64,
    frames: Option<BTreeMap<FrameLabel, f64>>,
    stances: BTreeMap<String, StanceLabel>,
}

fn article(n: u32, medium: &str, title: &str) -> Article {
    Article::new(
        Url::parse(&format!("https://{medium}.example/{n}")).unwrap(),
        MediumId::from(medium),
        title,
        format!("Body of article {n}."),
        Language::En,
        Utc.with_ymd_and_hms(2024, 6, 1, 0, 0, 0).unwrap() + Duration::hours(n.into()),
    )
}

fn annotate(a: &mut Article, index: f64) {
    a.propaganda = Some(PropagandaResult { index, label: propaganda_label(index).unwrap() });
}

fn fixture_articles() -> Vec<Article> {
    let raw: Vec<FixtureArticle> = serde_json::from_str(include_str!("fixtures/profile_articles.json")).unwrap();
    raw.into_iter()
        .map(|f| {
            let mut a = article(f.n, &f.medium, &format!("Story {}", f.n));
            annotate(&mut a, f.index);
            a.frame_distribution = f.frames;
            a.stances = f.stances;
            a.validate().unwrap();
            a
        })
        .collect()
}

fn media() -> BTreeMap<MediumId, MediaSource> {
    [("m1", "GB"), ("m2", "QA"), ("m3", "GB")]
        .into_iter()
        .map(|(id, country)| {
            let source = MediaSource {
                id: MediumId::from(id),
                name: format!("Medium {id}"),
                homepage: None,
                logo_url: None,
                country: country.into(),
                description: None,
                audience: None,
            };
            (source.id.clone(), source)
        })
        .collect()
}

/// Structural equality with a relative tolerance on numbers.
fn assert_close(actual: &Value, expected: &Value, path: &str) {
    match (actual, expected) {
        (Value::Number(a), Value::Number(e)) => {
            let (a, e) = (a.as_f64().unwrap(), e.as_f64().unwrap());
            assert!((a - e).abs() <= 1e-12 * e.abs().max(1.0), "{path}: {a} != {e}");
        }
        (Value::Object(a), Value::Object(e)) => {
            let keys: BTreeSet<_> = a.keys().chain(e.keys()).collect();
            for k in keys {
                let sub = format!("{path}.{k}");
                assert_close(a.get(k).unwrap_or(&Value::Null), e.get(k).unwrap_or(&Value::Null), &sub);
            }
        }
        (Value::Array(a), Value::Array(e)) => {
            assert_eq!(a.len(), e.len(), "{path}: length");
            for (i, (x, y)) in a.iter().zip(e).enumerate() {
                assert_close(x, y, &format!("{path}[{i}]"));
            }
        }
        _ => assert_eq!(actual, expected, "{path}"),
    }
}

#[test]
fn fixture_profile_matches_golden_file() {
    let articles = fixture_articles();
    let claims = read_claims(include_str!("fixtures/profile_claims.json").as_bytes()).unwrap();
    let citations = CitationTable::read_csv(include_str!("fixtures/profile_citations.csv").as_bytes()).unwrap();
    let labels = read_source_labels(include_str!("fixtures/profile_labels.csv").as_bytes()).unwrap();
    let media = media();
    let config = ProfileConfig::default();
    let inputs = ProfileInputs {
        media: &media,
        claims: &claims,
        citations: &citations,
        labels: &labels,
        classifier: None,
        config: &config,
    };
    let profile = build_media_profile(&MediumId::from("m1"), &articles, &inputs).unwrap();
    let golden: Value = serde_json::from_str(include_str!("fixtures/profile_m1_golden.json")).unwrap();
    assert_close(&serde_json::to_value(&profile).unwrap(), &golden, "$");

    let all = build_all_profiles(&articles, &inputs).unwrap();
    assert_eq!(all.len(), 3);
    assert_eq!(all[&MediumId::from("m2")].factuality, None);
    let empty = &all[&MediumId::from("m3")];
    assert_eq!(empty.article_count, 0);
    assert!(empty.propaganda_distribution.is_empty() && empty.frame_distribution.is_empty());
    assert!(empty.stance_by_claim.is_empty());

    assert!(matches!(
        build_media_profile(&MediumId::from("nope"), &articles, &inputs),
        Err(ProfileError::NotFound(_))
    ));
}

#[test]
fn single_very_likely_article() {
    let mut a = article(1, "m1", "One");
    annotate(&mut a, 0.93);
    let media = media();
    let config = ProfileConfig::default();
    let inputs = ProfileInputs {
        media: &media,
        claims: &[],
        citations: &CitationTable::default(),
        labels: &BTreeMap::new(),
        classifier: None,
        config: &config,
    };
    let p = build_media_profile(&MediumId::from("m1"), &[a], &inputs).unwrap();
    assert_eq!(p.propaganda_distribution, BTreeMap::from([(PropagandaLabel::VeryLikely, 1.0)]));
    assert!(p.valences.is_empty());
}

fn random_articles(seed: u64, n: usize) -> Vec<Article> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n as u32)
        .map(|i| {
            let mut a = article(i, "m1", "x");
            if rng.gen_bool(0.8) {
                annotate(&mut a, rng.gen_range(0.0..=1.0));
            }
            if rng.gen_bool(0.8) {
                let raw: Vec<f64> = FrameLabel::ALL.iter().map(|_| rng.gen_range(0.0..1.0)).collect();
                let sum: f64 = raw.iter().sum();
                a.frame_distribution = Some(FrameLabel::ALL.iter().copied().zip(raw.iter().map(|x| x / sum)).collect());
            }
            let label = StanceLabel::ALL[rng.gen_range(0..4)];
            a.stances.insert("c".into(), label);
            a
        })
        .collect()
}

proptest! {
    #[test]
    fn profile_distributions_sum_to_one(seed in any::<u64>(), n in 1usize..40) {
        let articles = random_articles(seed, n);
        let media = media();
        let config = ProfileConfig::default();
        let claims = vec![Claim { claim_id: "c".into(), text: "x".into(), topic_id: "t".into() }];
        let inputs = ProfileInputs {
            media: &media,
            claims: &claims,
            citations: &CitationTable::default(),
            labels: &BTreeMap::new(),
            classifier: None,
            config: &config,
        };
        let p = build_media_profile(&MediumId::from("m1"), &articles, &inputs).unwrap();
        let sums = |m: Vec<f64>| m.iter().sum::<f64>();
        if !p.propaganda_distribution.is_empty() {
            prop_assert!((sums(p.propaganda_distribution.values().copied().collect()) - 1.0).abs() < 1e-9);
        }
        if !p.frame_distribution.is_empty() {
            prop_assert!((sums(p.frame_distribution.values().copied().collect()) - 1.0).abs() < 1e-9);
        }
        let s = &p.stance_by_claim["c"];
        prop_assert_eq!(s.related + s.unrelated, n);
        if s.related > 0 {
            prop_assert!((sums(s.distribution.values().copied().collect()) - 1.0).abs() < 1e-9);
            prop_assert!(!s.distribution.contains_key(&StanceLabel::Unrelated));
        }
        prop_assert!(p.propaganda_distribution.values().chain(p.frame_distribution.values()).all(|f| (0.0..=1.0).contains(f)));
    }
}

#[test]
fn topic_stats_count_by_country_and_medium() {
    let mut articles = BTreeMap::new();
    let mut add = |n: u32, medium: &str, title: &str, index: f64| {
        let mut a = article(n, medium, title);
        annotate(&mut a, index);
        articles.insert(a.id.clone(), a);
    };
    add(1, "m1", "Flood waters rise in the valley", 0.9);
    add(2, "m1", "Rescue teams reach stranded villages", 0.1);
    add(3, "m2", "Flood relief appeal launched", 0.65);
    add(4, "m3", "Cup final tickets sold out", 0.1);
    add(5, "m2", "Markets rally on rate cut", 0.3);
    let id = |n: u32, m: &str| article(n, m, "").id;
    let story = |sid: u64, members: &[ArticleId]| Story {
        id: sid,
        topic_ids: BTreeSet::from([sid]),
        article_ids: members.iter().cloned().collect(),
        representative: members[0].clone(),
        title: String::new(),
    };
    let stories = vec![
        story(1, &[id(1, "m1"), id(2, "m1")]),
        story(2, &[id(3, "m2")]),
        story(3, &[id(4, "m3")]),
        story(4, &[id(5, "m2")]),
    ];
    let topics = read_topics(r#"[{"slug":"floods","name":"Floods","keywords":["flood"]}]"#.as_bytes()).unwrap();
    let stats = build_topic_stats("floods", &topics, &stories, &articles, &media()).unwrap();
    assert_eq!(stats.story_ids, vec![2, 1]);
    assert_eq!(stats.totals.articles, 3);
    assert_eq!(stats.totals.propagandistic_articles, 2);
    assert_eq!(stats.countries["GB"].articles, 2);
    assert_eq!(stats.countries["GB"].total_articles, 3);
    assert_eq!(stats.countries["QA"].ratio, 0.5);
    assert_eq!(stats.media[&MediumId::from("m1")].propagandistic_ratio, 0.5);
    assert_eq!(stats.media[&MediumId::from("m2")].propagandistic_ratio, 1.0);
    assert!(matches!(
        build_topic_stats("nope", &topics, &stories, &articles, &media()),
        Err(ProfileError::NotFound(_))
    ));
}
