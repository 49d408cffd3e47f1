use crate::model::Language;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Translation {
    pub text: String,
    /// Language the text is actually in.
    pub language: Language,
}

/// Machine translation slot between ingestion and analysis.
pub trait Translator: Send + Sync {
    fn translate(&self, text: &str, from: Language, to: Language) -> Translation;
}

/// Returns the input unchanged, tagged with its original language.
#[derive(Debug, Default, Clone, Copy)]
pub struct IdentityTranslator;

impl Translator for IdentityTranslator {
    fn translate(&self, text: &str, from: Language, _to: Language) -> Translation {
        Translation {
            text: text.to_owned(),
            language: from,
        }
    }
}
