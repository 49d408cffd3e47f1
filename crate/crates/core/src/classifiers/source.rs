//! Medium-level factuality and bias from averaged article features.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};

use super::maxent::{train_maxent, FeatureSpace, LinearModel, TrainConfig};
use super::propaganda::SCALAR_SCALE;
use super::ClassifierError;
use crate::model::{Article, Bias, Factuality, FrameLabel, MediumId, SectionLabel};
use crate::textproc::{style_features, SparseVector, StyleFeatures};

/// Names of the per-medium feature dimensions, in index order.
pub fn medium_feature_names() -> Vec<String> {
    let mut names: Vec<String> = StyleFeatures::SCALAR_NAMES.iter().map(|s| format!("style.{s}")).collect();
    names.push("propaganda_index".into());
    names.extend(SectionLabel::ALL.iter().map(|s| format!("section.{s}")));
    names.extend(FrameLabel::ALL.iter().map(|f| format!("frame.{f}")));
    names
}

fn article_features(article: &Article) -> Vec<f64> {
    let mut v: Vec<f64> = style_features(&article.text())
        .scalars()
        .iter()
        .zip(SCALAR_SCALE)
        .map(|(x, s)| x / s)
        .collect();
    v.push(article.propaganda.map_or(0.0, |p| p.index));
    v.extend(SectionLabel::ALL.iter().map(|s| f64::from(u8::from(article.section == Some(*s)))));
    v.extend(FrameLabel::ALL.iter().map(|f| {
        article
            .frame_distribution
            .as_ref()
            .and_then(|d| d.get(f).copied())
            .unwrap_or(0.0)
    }));
    v
}

/// Mean of the per-article feature vectors; all zeros for no articles.
pub fn medium_features<'a>(articles: impl IntoIterator<Item = &'a Article>) -> SparseVector {
    let mut sum = vec![0.0; medium_feature_names().len()];
    let mut n = 0usize;
    for a in articles {
        for (s, x) in sum.iter_mut().zip(article_features(a)) {
            *s += x;
        }
        n += 1;
    }
    if n > 0 {
        for s in sum.iter_mut() {
            *s /= n as f64;
        }
    }
    SparseVector::from_dense(&sum)
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceLabels {
    pub factuality: Option<Factuality>,
    pub bias: Option<Bias>,
}

#[derive(Deserialize)]
struct LabelRow {
    medium_id: String,
    #[serde(default)]
    factuality: String,
    #[serde(default)]
    bias: String,
}

/// Reads the operator labels CSV (`medium_id,factuality,bias`; either label may be blank).
pub fn read_source_labels(reader: impl Read) -> Result<BTreeMap<MediumId, SourceLabels>, ClassifierError> {
    let mut out = BTreeMap::new();
    let mut csv = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    for (line, row) in csv.deserialize::<LabelRow>().enumerate() {
        let row = row.map_err(|e| ClassifierError::Labels(e.to_string()))?;
        let parse_err = |e: crate::model::UnknownLabel| ClassifierError::Labels(format!("row {}: {e}", line + 1));
        let labels = SourceLabels {
            factuality: (!row.factuality.is_empty())
                .then(|| row.factuality.parse())
                .transpose()
                .map_err(parse_err)?,
            bias: (!row.bias.is_empty()).then(|| row.bias.parse()).transpose().map_err(parse_err)?,
        };
        out.insert(MediumId(row.medium_id), labels);
    }
    Ok(out)
}

/// Factuality and bias models over [`medium_features`]; a model is absent
/// when its labels did not cover at least two classes.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SourceClassifier {
    pub factuality: Option<LinearModel>,
    pub bias: Option<LinearModel>,
}

impl SourceClassifier {
    pub fn train(
        features: &BTreeMap<MediumId, SparseVector>,
        labels: &BTreeMap<MediumId, SourceLabels>,
        config: &TrainConfig,
    ) -> Result<Self, ClassifierError> {
        let space = FeatureSpace::Named {
            names: medium_feature_names(),
        };
        let fit = |samples: Vec<(SparseVector, usize)>, classes: Vec<String>| {
            match train_maxent(&samples, classes, space.clone(), config) {
                Ok((m, _)) => Ok(Some(m)),
                Err(ClassifierError::DegenerateLabels) => Ok(None),
                Err(e) => Err(e),
            }
        };
        let mut fact = Vec::new();
        let mut bias = Vec::new();
        for (id, l) in labels {
            let Some(x) = features.get(id) else { continue };
            if let Some(f) = l.factuality {
                fact.push((x.clone(), f.ordinal()));
            }
            if let Some(b) = l.bias {
                bias.push((x.clone(), b.ordinal()));
            }
        }
        Ok(SourceClassifier {
            factuality: fit(fact, Factuality::ALL.iter().map(|f| f.as_str().into()).collect())?,
            bias: fit(bias, Bias::ALL.iter().map(|b| b.as_str().into()).collect())?,
        })
    }

    pub fn predict_factuality(&self, x: &SparseVector) -> Result<Option<Factuality>, ClassifierError> {
        match &self.factuality {
            Some(m) => Ok(Some(Factuality::ALL[m.predict(x)?])),
            None => Ok(None),
        }
    }

    pub fn predict_bias(&self, x: &SparseVector) -> Result<Option<Bias>, ClassifierError> {
        match &self.bias {
            Some(m) => Ok(Some(Bias::ALL[m.predict(x)?])),
            None => Ok(None),
        }
    }
}
