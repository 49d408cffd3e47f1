//! Maximum-entropy models and the per-article analyzers built on them.

mod frame;
mod maxent;
mod propaganda;
mod section;
mod source;
mod stance;

pub use frame::{classify_frame, uniform_frames, FramePlugin, KeywordFrameBaseline};
pub use maxent::{
    argmax, predict_proba, softmax, train_maxent, FeatureSpace, LinearModel, MaxentObjective, TrainConfig,
    TrainReport, MODEL_FORMAT, MODEL_VERSION,
};
pub use propaganda::{
    propaganda_features, propaganda_label, propaganda_score, style_feature_space, train_propaganda_model, NGRAM_BUCKETS,
    NON_PROPAGANDISTIC, PROPAGANDISTIC,
};
pub use section::{categorize_section, section_features, train_section_model};
pub use source::{
    medium_feature_names, medium_features, read_source_labels, SourceClassifier, SourceLabels,
};
pub use stance::{classify_stance, LexicalStanceBaseline, StanceClassifier, StanceConfig, StancePlugin};

#[derive(Debug, thiserror::Error)]
pub enum ClassifierError {
    #[error("training data must contain at least two distinct labels")]
    DegenerateLabels,
    #[error("dimension mismatch: expected at most {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("model has not been trained")]
    NotFitted,
    #[error("unknown class `{0}`")]
    UnknownClass(String),
    #[error("model uses the wrong feature space for this analyzer")]
    WrongFeatureSpace,
    #[error("probability {0} is outside [0, 1]")]
    Range(f64),
    #[error("no stance plugin registered and the baseline is disabled")]
    NoStanceBackend,
    #[error("unsupported model container {format} v{version}")]
    UnsupportedModel { format: String, version: u32 },
    #[error("invalid labels file: {0}")]
    Labels(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Unweighted mean of per-class F1 over `n_classes` classes; a class that is
/// absent from both gold and predictions scores 1.
pub fn macro_f1(gold: &[usize], predicted: &[usize], n_classes: usize) -> f64 {
    assert_eq!(gold.len(), predicted.len(), "gold and predicted lengths differ");
    let mut tp = vec![0usize; n_classes];
    let mut fp = vec![0usize; n_classes];
    let mut fnc = vec![0usize; n_classes];
    for (g, p) in gold.iter().zip(predicted) {
        if g == p {
            tp[*g] += 1;
        } else {
            fp[*p] += 1;
            fnc[*g] += 1;
        }
    }
    let total: f64 = (0..n_classes)
        .map(|k| {
            let denom = 2 * tp[k] + fp[k] + fnc[k];
            if denom == 0 {
                1.0
            } else {
                2.0 * tp[k] as f64 / denom as f64
            }
        })
        .sum();
    total / n_classes as f64
}
