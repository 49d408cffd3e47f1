use super::maxent::{predict_proba, train_maxent, FeatureSpace, LinearModel, TrainConfig, TrainReport};
use super::ClassifierError;
use crate::hash::fnv1a64;
use crate::model::{Article, PropagandaLabel, PropagandaResult};
use crate::textproc::{style_features, SparseVector, StyleFeatures};

pub const NGRAM_BUCKETS: u32 = 1 << 18;
pub const PROPAGANDISTIC: &str = "propagandistic";
pub const NON_PROPAGANDISTIC: &str = "non_propagandistic";

/// Rough per-scalar scales so every style measure lands near [0, 1].
pub(super) const SCALAR_SCALE: [f64; 6] = [1.0, 1.0, 40.0, 10.0, 100.0, 1.0];

pub fn style_feature_space() -> FeatureSpace {
    FeatureSpace::Style {
        scalars: StyleFeatures::SCALAR_NAMES.iter().map(|s| (*s).to_owned()).collect(),
        ngram_buckets: NGRAM_BUCKETS,
    }
}

/// Scaled style scalars followed by an L2-normalized block of hashed,
/// log-damped character 2/3-gram counts.
pub fn propaganda_features(text: &str) -> SparseVector {
    let style = style_features(text);
    let scalars: Vec<f64> = style
        .scalars()
        .iter()
        .zip(SCALAR_SCALE)
        .map(|(v, s)| v / s)
        .collect();
    let mut buckets: std::collections::BTreeMap<u32, f64> = Default::default();
    for (gram, count) in &style.char_ngram_counts {
        let b = (fnv1a64(gram.as_bytes()) % u64::from(NGRAM_BUCKETS)) as u32;
        *buckets.entry(b).or_default() += f64::from(*count);
    }
    let grams = SparseVector::from_pairs(buckets.into_iter().map(|(i, c)| (i, c.ln_1p())).collect()).normalized();
    SparseVector::from_dense(&scalars).concat(&grams, scalars.len() as u32)
}

/// Five-bucket label of a propaganda index. Intervals are half-open with each
/// boundary belonging to the upper bucket: [0, .2), [.2, .4), [.4, .6), [.6, .8), [.8, 1].
pub fn propaganda_label(p: f64) -> Result<PropagandaLabel, ClassifierError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ClassifierError::Range(p));
    }
    Ok(if p < 0.2 {
        PropagandaLabel::VeryUnlikely
    } else if p < 0.4 {
        PropagandaLabel::Unlikely
    } else if p < 0.6 {
        PropagandaLabel::Somehow
    } else if p < 0.8 {
        PropagandaLabel::Likely
    } else {
        PropagandaLabel::VeryLikely
    })
}

pub fn propaganda_score(article: &Article, model: &LinearModel) -> Result<PropagandaResult, ClassifierError> {
    if !matches!(model.feature_space(), FeatureSpace::Style { .. }) {
        return Err(ClassifierError::WrongFeatureSpace);
    }
    let k = model
        .class_index(PROPAGANDISTIC)
        .ok_or_else(|| ClassifierError::UnknownClass(PROPAGANDISTIC.into()))?;
    let p = predict_proba(model, &propaganda_features(&article.text()))?;
    let index = p[k].clamp(0.0, 1.0);
    Ok(PropagandaResult {
        index,
        label: propaganda_label(index)?,
    })
}

/// Trains the binary propaganda model; `true` marks a propagandistic text.
pub fn train_propaganda_model(
    texts: &[(String, bool)],
    config: &TrainConfig,
) -> Result<(LinearModel, TrainReport), ClassifierError> {
    let samples: Vec<(SparseVector, usize)> = texts
        .iter()
        .map(|(t, is_prop)| (propaganda_features(t), usize::from(*is_prop)))
        .collect();
    train_maxent(
        &samples,
        vec![NON_PROPAGANDISTIC.into(), PROPAGANDISTIC.into()],
        style_feature_space(),
        config,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Language, MediumId};
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;
    use url::Url;

    #[test]
    fn documented_examples() {
        assert_eq!(propaganda_label(0.1).unwrap(), PropagandaLabel::VeryUnlikely);
        assert_eq!(propaganda_label(0.2).unwrap(), PropagandaLabel::Unlikely);
        assert_eq!(propaganda_label(0.8).unwrap(), PropagandaLabel::VeryLikely);
        assert_eq!(propaganda_label(0.59999).unwrap(), PropagandaLabel::Somehow);
        assert_eq!(propaganda_label(0.0).unwrap(), PropagandaLabel::VeryUnlikely);
        assert_eq!(propaganda_label(1.0).unwrap(), PropagandaLabel::VeryLikely);
    }

    #[test]
    fn out_of_range() {
        for p in [-1e-12, 1.0000001, f64::NAN, f64::INFINITY] {
            assert!(matches!(propaganda_label(p), Err(ClassifierError::Range(_))));
        }
    }

    proptest! {
        #[test]
        fn monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(propaganda_label(lo).unwrap() <= propaganda_label(hi).unwrap());
        }
    }

    #[test]
    fn features_fit_the_space() {
        let x = propaganda_features("The enemy is lying! Wake up, people!");
        assert!(x.dim_hint() <= style_feature_space().dim());
        let block: f64 = x.entries().iter().filter(|(i, _)| *i >= 6).map(|(_, v)| v * v).sum();
        assert!((block - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trained_model_scores_in_range() {
        let texts: Vec<(String, bool)> = (0..20)
            .map(|i| {
                if i % 2 == 0 {
                    (format!("Traitors everywhere! Enemies of the nation must fall! Number {i}!"), true)
                } else {
                    (format!("The committee reviewed the quarterly report on item {i}."), false)
                }
            })
            .collect();
        let (model, _) = train_propaganda_model(&texts, &TrainConfig::default()).unwrap();
        let a = Article::new(
            Url::parse("https://e.org/x").unwrap(),
            MediumId::from("m"),
            "Traitors!",
            "Enemies of the nation must fall!",
            Language::En,
            Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
        );
        let r = propaganda_score(&a, &model).unwrap();
        assert!((0.0..=1.0).contains(&r.index));
        assert_eq!(r.label, propaganda_label(r.index).unwrap());
        assert!(r.index > 0.5);
    }
}
