use super::maxent::{argmax, train_maxent, FeatureSpace, LinearModel, TrainConfig, TrainReport};
use super::ClassifierError;
use crate::model::{Article, Language, SectionLabel};
use crate::textproc::{fit_vocabulary, preprocess, SparseVector, TextError};

/// TF-IDF vector of the article's title and body under the model's vocabulary.
pub fn section_features(article: &Article, model: &LinearModel) -> Result<SparseVector, ClassifierError> {
    match model.feature_space() {
        FeatureSpace::Tfidf { vocabulary, .. } => {
            Ok(vocabulary.tfidf(&preprocess(&article.text(), article.language)))
        }
        _ => Err(ClassifierError::WrongFeatureSpace),
    }
}

/// Argmax section; equal scores resolve to the earlier label in [`SectionLabel::ALL`].
///
/// An article with no in-vocabulary tokens is classified from the bias alone.
pub fn categorize_section(article: &Article, model: &LinearModel) -> Result<SectionLabel, ClassifierError> {
    if !model.is_fitted() {
        return Err(ClassifierError::NotFitted);
    }
    let x = section_features(article, model)?;
    let scores = model.scores(&x)?;
    // reorder into fixed label order so ties do not depend on the model's class order
    let mut ordered = Vec::with_capacity(SectionLabel::ALL.len());
    for label in SectionLabel::ALL {
        let k = model
            .class_index(label.as_str())
            .ok_or_else(|| ClassifierError::UnknownClass(label.as_str().into()))?;
        ordered.push(scores[k]);
    }
    Ok(SectionLabel::ALL[argmax(&ordered)])
}

/// Fits a vocabulary on the training texts and trains a six-way maxent model.
pub fn train_section_model(
    docs: &[(String, Language, SectionLabel)],
    min_df: usize,
    language: Language,
    config: &TrainConfig,
) -> Result<(LinearModel, TrainReport), ClassifierError> {
    let tokens: Vec<Vec<String>> = docs.iter().map(|(text, lang, _)| preprocess(text, *lang)).collect();
    let vocabulary = fit_vocabulary(&tokens, min_df).map_err(|e| match e {
        TextError::EmptyCorpus => ClassifierError::DegenerateLabels,
    })?;
    let samples: Vec<(SparseVector, usize)> = tokens
        .iter()
        .zip(docs)
        .map(|(t, (_, _, label))| (vocabulary.tfidf(t), label.ordinal()))
        .collect();
    let classes = SectionLabel::ALL.iter().map(|l| l.as_str().to_owned()).collect();
    train_maxent(&samples, classes, FeatureSpace::Tfidf { vocabulary, language }, config)
}
