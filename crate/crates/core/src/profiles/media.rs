use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::citations::CitationTable;
use super::registry::Claim;
use super::valence::{valence, Orientation, ValenceRecord};
use super::ProfileError;
use crate::classifiers::{medium_features, SourceClassifier, SourceLabels};
use crate::model::{Article, Bias, ClaimId, Factuality, FrameLabel, MediaSource, MediumId, PropagandaLabel, StanceLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ProfileConfig {
    /// Citations of a medium on a topic (both groups) needed before a valence is reported.
    pub min_citations: u64,
    pub orientation: Orientation,
}

impl Default for ProfileConfig {
    fn default() -> Self {
        ProfileConfig {
            min_citations: 10,
            orientation: Orientation::default(),
        }
    }
}

/// Stance of a medium's coverage towards one claim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimStance {
    /// Agree/disagree/discuss fractions over related articles; empty when none are related.
    pub distribution: BTreeMap<StanceLabel, f64>,
    pub related: usize,
    pub unrelated: usize,
    /// Share of scored articles that are related to the claim.
    pub coverage: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    LabelsFile,
    Classifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MediaProfile {
    pub medium_id: MediumId,
    pub article_count: usize,
    pub propaganda_distribution: BTreeMap<PropagandaLabel, f64>,
    pub frame_distribution: BTreeMap<FrameLabel, f64>,
    pub stance_by_claim: BTreeMap<ClaimId, ClaimStance>,
    pub factuality: Option<Factuality>,
    pub factuality_source: Option<LabelSource>,
    pub bias: Option<Bias>,
    pub bias_source: Option<LabelSource>,
    /// Distance of `bias` from the center, in [0, 1].
    pub hyper_partisanship: Option<f64>,
    pub valences: Vec<ValenceRecord>,
}

/// Everything a profile is built from besides the medium's own articles.
#[derive(Debug, Clone, Copy)]
pub struct ProfileInputs<'a> {
    pub media: &'a BTreeMap<MediumId, MediaSource>,
    pub claims: &'a [Claim],
    pub citations: &'a CitationTable,
    /// Operator labels; take precedence over the classifier field by field.
    pub labels: &'a BTreeMap<MediumId, SourceLabels>,
    pub classifier: Option<&'a SourceClassifier>,
    pub config: &'a ProfileConfig,
}

/// Label histogram over articles carrying a propaganda annotation.
pub fn propaganda_distribution<'a>(articles: impl IntoIterator<Item = &'a Article>) -> BTreeMap<PropagandaLabel, f64> {
    let mut counts: BTreeMap<PropagandaLabel, usize> = BTreeMap::new();
    let mut n = 0usize;
    for p in articles.into_iter().filter_map(|a| a.propaganda.as_ref()) {
        *counts.entry(p.label).or_default() += 1;
        n += 1;
    }
    counts.into_iter().map(|(k, c)| (k, c as f64 / n as f64)).collect()
}

/// Mean of the per-article frame distributions over annotated articles.
pub fn frame_distribution<'a>(articles: impl IntoIterator<Item = &'a Article>) -> BTreeMap<FrameLabel, f64> {
    let mut sum: BTreeMap<FrameLabel, f64> = BTreeMap::new();
    let mut n = 0usize;
    for frames in articles.into_iter().filter_map(|a| a.frame_distribution.as_ref()) {
        for (f, p) in frames {
            *sum.entry(*f).or_default() += p;
        }
        n += 1;
    }
    sum.into_iter()
        .filter(|(_, s)| *s > 0.0)
        .map(|(f, s)| (f, s / n as f64))
        .collect()
}

fn claim_stance(articles: &[&Article], claim: &ClaimId) -> Option<ClaimStance> {
    let mut counts: BTreeMap<StanceLabel, usize> = BTreeMap::new();
    let mut unrelated = 0;
    for label in articles.iter().filter_map(|a| a.stances.get(claim)) {
        if *label == StanceLabel::Unrelated {
            unrelated += 1;
        } else {
            *counts.entry(*label).or_default() += 1;
        }
    }
    let related: usize = counts.values().sum();
    if related + unrelated == 0 {
        return None;
    }
    Some(ClaimStance {
        distribution: counts.into_iter().map(|(k, c)| (k, c as f64 / related as f64)).collect(),
        related,
        unrelated,
        coverage: related as f64 / (related + unrelated) as f64,
    })
}

pub fn build_media_profile(
    medium_id: &MediumId,
    articles: &[Article],
    inputs: &ProfileInputs<'_>,
) -> Result<MediaProfile, ProfileError> {
    if !inputs.media.contains_key(medium_id) {
        return Err(ProfileError::NotFound(format!("medium `{medium_id}`")));
    }
    let own: Vec<&Article> = articles.iter().filter(|a| &a.medium_id == medium_id).collect();

    let stance_by_claim = inputs
        .claims
        .iter()
        .filter_map(|c| claim_stance(&own, &c.claim_id).map(|s| (c.claim_id.clone(), s)))
        .collect();

    let labels = inputs.labels.get(medium_id).cloned().unwrap_or_default();
    let features = match inputs.classifier {
        Some(c) if !own.is_empty() => Some((c, medium_features(own.iter().copied()))),
        _ => None,
    };
    let (factuality, factuality_source) = match (labels.factuality, &features) {
        (Some(f), _) => (Some(f), Some(LabelSource::LabelsFile)),
        (None, Some((c, x))) => {
            let p = c.predict_factuality(x)?;
            (p, p.map(|_| LabelSource::Classifier))
        }
        (None, None) => (None, None),
    };
    let (bias, bias_source) = match (labels.bias, &features) {
        (Some(b), _) => (Some(b), Some(LabelSource::LabelsFile)),
        (None, Some((c, x))) => {
            let p = c.predict_bias(x)?;
            (p, p.map(|_| LabelSource::Classifier))
        }
        (None, None) => (None, None),
    };

    let orientation = inputs.config.orientation;
    let mut valences = Vec::new();
    for counts in inputs.citations.for_medium(medium_id, orientation) {
        let citations = counts.tf_c0 + counts.tf_c1;
        if citations < inputs.config.min_citations {
            continue;
        }
        match valence(&counts) {
            Ok(score) => valences.push(ValenceRecord {
                label: orientation.label(score)?,
                medium_id: medium_id.clone(),
                topic_id: counts.topic_id,
                score,
                citations,
            }),
            Err(ProfileError::UndefinedValence { .. }) => {
                log::debug!("no valence for {medium_id} on {}: a group has no citations on the topic", counts.topic_id);
            }
            Err(e) => return Err(e),
        }
    }

    Ok(MediaProfile {
        medium_id: medium_id.clone(),
        article_count: own.len(),
        propaganda_distribution: propaganda_distribution(own.iter().copied()),
        frame_distribution: frame_distribution(own.iter().copied()),
        stance_by_claim,
        factuality,
        factuality_source,
        bias,
        bias_source,
        hyper_partisanship: bias.map(Bias::hyper_partisanship),
        valences,
    })
}

/// Profiles of every known medium.
pub fn build_all_profiles(
    articles: &[Article],
    inputs: &ProfileInputs<'_>,
) -> Result<BTreeMap<MediumId, MediaProfile>, ProfileError> {
    inputs
        .media
        .keys()
        .map(|id| Ok((id.clone(), build_media_profile(id, articles, inputs)?)))
        .collect()
}
