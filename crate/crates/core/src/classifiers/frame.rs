use std::collections::{BTreeMap, HashMap};

use crate::model::{FrameLabel, Language};
use crate::textproc::{guess_language, preprocess};

/// Pluggable frame detector returning a distribution over frame labels.
pub trait FramePlugin: Send + Sync {
    fn name(&self) -> &str;
    fn classify(&self, article_body: &str) -> BTreeMap<FrameLabel, f64>;
}

const FRAME_KEYWORDS: &[(FrameLabel, &[&str])] = &[
    (
        FrameLabel::Economic,
        &["economy", "economic", "cost", "price", "tax", "budget", "market", "trade", "inflation", "jobs", "wage", "profit", "investment", "spending", "اقتصاد", "اسعار", "ضرائب"],
    ),
    (
        FrameLabel::CapacityAndResources,
        &["capacity", "resource", "shortage", "supply", "infrastructure", "staff", "funding", "equipment", "overcrowded", "housing", "موارد", "نقص"],
    ),
    (
        FrameLabel::Morality,
        &["moral", "immoral", "ethic", "ethical", "sin", "religious", "faith", "god", "conscience", "values", "duty", "اخلاق", "دين"],
    ),
    (
        FrameLabel::FairnessAndEquality,
        &["fair", "unfair", "equality", "inequality", "discrimination", "equal", "justice", "rights", "bias", "privilege", "مساواة", "عدالة"],
    ),
    (
        FrameLabel::Legality,
        &["law", "legal", "illegal", "court", "constitution", "constitutional", "judge", "ruling", "lawsuit", "jurisdiction", "statute", "قانون", "محكمة", "دستور"],
    ),
    (
        FrameLabel::PolicyPrescription,
        &["policy", "reform", "proposal", "plan", "regulation", "measure", "bill", "program", "initiative", "strategy", "سياسة", "اصلاح", "خطة"],
    ),
    (
        FrameLabel::CrimeAndPunishment,
        &["crime", "criminal", "arrest", "police", "prison", "sentence", "murder", "theft", "punishment", "jail", "convicted", "جريمة", "شرطة", "سجن"],
    ),
    (
        FrameLabel::SecurityAndDefense,
        &["security", "defense", "military", "army", "terror", "terrorism", "attack", "war", "troops", "weapon", "border", "threat", "امن", "جيش", "حرب", "ارهاب"],
    ),
    (
        FrameLabel::HealthAndSafety,
        &["health", "disease", "hospital", "doctor", "virus", "vaccine", "safety", "patient", "illness", "medical", "pandemic", "injury", "صحة", "مستشفى", "فيروس", "لقاح"],
    ),
    (
        FrameLabel::QualityOfLife,
        &["family", "community", "living", "lifestyle", "wellbeing", "happiness", "neighborhood", "daily", "comfort", "leisure", "حياة", "اسرة"],
    ),
    (
        FrameLabel::CulturalIdentity,
        &["culture", "cultural", "tradition", "heritage", "identity", "language", "history", "national", "custom", "ثقافة", "تراث", "هوية"],
    ),
    (
        FrameLabel::PublicOpinion,
        &["poll", "survey", "opinion", "protest", "public", "voter", "sentiment", "rally", "petition", "majority", "استطلاع", "احتجاج", "رأي"],
    ),
    (
        FrameLabel::Political,
        &["election", "party", "campaign", "parliament", "congress", "senate", "minister", "president", "vote", "political", "opposition", "democrat", "republican", "انتخابات", "حزب", "برلمان", "وزير"],
    ),
    (
        FrameLabel::ExternalRegulation,
        &["international", "foreign", "treaty", "sanction", "diplomatic", "reputation", "ally", "alliance", "embassy", "united", "nations", "دولي", "عقوبات", "سفارة"],
    ),
];

/// Keyword-lexicon frame baseline: per-frame hit counts over the article's
/// normalized tokens, divided by the total number of hits. With no hits the
/// distribution is uniform over all frame labels.
#[derive(Debug, Clone)]
pub struct KeywordFrameBaseline {
    en: HashMap<String, Vec<FrameLabel>>,
    ar: HashMap<String, Vec<FrameLabel>>,
}

impl Default for KeywordFrameBaseline {
    fn default() -> Self {
        let mut en: HashMap<String, Vec<FrameLabel>> = HashMap::new();
        let mut ar: HashMap<String, Vec<FrameLabel>> = HashMap::new();
        for (frame, words) in FRAME_KEYWORDS {
            for w in *words {
                let language = guess_language(w);
                let table = if language == Language::Ar { &mut ar } else { &mut en };
                // keywords go through the same normalization as article text
                for term in preprocess(w, language) {
                    let frames = table.entry(term).or_default();
                    if !frames.contains(frame) {
                        frames.push(*frame);
                    }
                }
            }
        }
        KeywordFrameBaseline { en, ar }
    }
}

pub fn uniform_frames() -> BTreeMap<FrameLabel, f64> {
    let p = 1.0 / FrameLabel::ALL.len() as f64;
    FrameLabel::ALL.iter().map(|f| (*f, p)).collect()
}

impl KeywordFrameBaseline {
    pub fn classify(&self, article_body: &str) -> BTreeMap<FrameLabel, f64> {
        let language = guess_language(article_body);
        let table = if language == Language::Ar { &self.ar } else { &self.en };
        let mut hits: BTreeMap<FrameLabel, u32> = BTreeMap::new();
        for token in preprocess(article_body, language) {
            for frame in table.get(&token).into_iter().flatten() {
                *hits.entry(*frame).or_default() += 1;
            }
        }
        let total: u32 = hits.values().sum();
        if total == 0 {
            return uniform_frames();
        }
        hits.into_iter()
            .map(|(f, c)| (f, f64::from(c) / f64::from(total)))
            .collect()
    }
}

impl FramePlugin for KeywordFrameBaseline {
    fn name(&self) -> &str {
        "keyword-baseline"
    }

    fn classify(&self, article_body: &str) -> BTreeMap<FrameLabel, f64> {
        KeywordFrameBaseline::classify(self, article_body)
    }
}

/// Delegates to `plugin` and renormalizes its output so it sums to one;
/// empty, negative or non-finite output becomes the uniform distribution.
pub fn classify_frame(article_body: &str, plugin: &dyn FramePlugin) -> BTreeMap<FrameLabel, f64> {
    let raw = plugin.classify(article_body);
    let total: f64 = raw.values().sum();
    if !(total.is_finite() && total > 0.0) || raw.values().any(|p| *p < 0.0 || !p.is_finite()) {
        return uniform_frames();
    }
    let mut out: BTreeMap<FrameLabel, f64> = raw.into_iter().map(|(f, p)| (f, p / total)).collect();
    // fold the rounding residue into the largest entry
    let residue = 1.0 - out.values().sum::<f64>();
    if let Some(max) = out.values_mut().max_by(|a, b| a.total_cmp(b)) {
        *max += residue;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn economic_text() {
        let d = classify_frame("Taxes and prices rose as the market fell.", &KeywordFrameBaseline::default());
        assert_eq!(d.keys().copied().collect::<Vec<_>>(), vec![FrameLabel::Economic]);
        assert_eq!(d[&FrameLabel::Economic], 1.0);
    }

    #[test]
    fn mixed_text_sums_to_one() {
        let d = classify_frame(
            "The court ruling on the tax law angered voters in the poll.",
            &KeywordFrameBaseline::default(),
        );
        assert!(d.len() >= 3);
        assert!((d.values().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn no_hits_is_uniform() {
        let d = classify_frame("Zebras yawn.", &KeywordFrameBaseline::default());
        assert_eq!(d.len(), FrameLabel::ALL.len());
        assert!(d.values().all(|p| (*p - 1.0 / 15.0).abs() < 1e-15));
    }

    struct Broken;
    impl FramePlugin for Broken {
        fn name(&self) -> &str {
            "broken"
        }
        fn classify(&self, _: &str) -> BTreeMap<FrameLabel, f64> {
            [(FrameLabel::Morality, 0.3), (FrameLabel::Political, 0.3)].into_iter().collect()
        }
    }

    #[test]
    fn plugin_output_is_renormalized() {
        let d = classify_frame("x", &Broken);
        assert!((d[&FrameLabel::Morality] - 0.5).abs() < 1e-12);
    }
}
