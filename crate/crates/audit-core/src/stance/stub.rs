//! Deterministic offline classifier used for tests and air-gapped runs.

use super::{StanceClassifier, StanceLabel5};
use crate::data_model::CommentRecord;
use crate::error::Result;

/// Keyword/emoji lexicon classifier. NOT research-grade: it exists so the
/// whole pipeline runs with zero network access. First matching lexicon entry
/// wins; comments with no hits are Neutral.
pub struct StubClassifier;

const LEXICON: &[(&str, StanceLabel5)] = &[
    ("madam president", StanceLabel5::ProDemocrat),
    ("vote blue", StanceLabel5::ProDemocrat),
    ("kamala", StanceLabel5::ProDemocrat),
    ("harris2024", StanceLabel5::ProDemocrat),
    ("walz", StanceLabel5::ProDemocrat),
    ("💙", StanceLabel5::ProDemocrat),
    ("trump2024", StanceLabel5::ProRepublican),
    ("maga", StanceLabel5::ProRepublican),
    ("red wave", StanceLabel5::ProRepublican),
    ("vance", StanceLabel5::ProRepublican),
    ("❤", StanceLabel5::ProRepublican),
    ("sleepy joe", StanceLabel5::AntiDemocrat),
    ("let's go brandon", StanceLabel5::AntiDemocrat),
    ("border crisis", StanceLabel5::AntiDemocrat),
    ("orange man", StanceLabel5::AntiRepublican),
    ("dump trump", StanceLabel5::AntiRepublican),
    ("felon", StanceLabel5::AntiRepublican),
];

impl StubClassifier {
    pub fn classify_text(&self, comment_text: &str) -> StanceLabel5 {
        let lower = comment_text.to_lowercase();
        LEXICON
            .iter()
            .find(|(keyword, _)| lower.contains(keyword))
            .map(|&(_, label)| label)
            .unwrap_or(StanceLabel5::Neutral)
    }
}

impl StanceClassifier for StubClassifier {
    fn classify_comment(&self, comment: &CommentRecord, _video_description: &str) -> Result<StanceLabel5> {
        Ok(self.classify_text(comment.text.as_deref().unwrap_or("")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexicon_rules() {
        assert_eq!(StubClassifier.classify_text("TRUMP2024 all the way"), StanceLabel5::ProRepublican);
        assert_eq!(StubClassifier.classify_text("cant wait for madam president"), StanceLabel5::ProDemocrat);
        assert_eq!(StubClassifier.classify_text("that orange man again"), StanceLabel5::AntiRepublican);
        assert_eq!(StubClassifier.classify_text("sleepy joe strikes again"), StanceLabel5::AntiDemocrat);
    }

    #[test]
    fn no_hits_is_neutral() {
        assert_eq!(StubClassifier.classify_text("nice weather today"), StanceLabel5::Neutral);
        assert_eq!(StubClassifier.classify_text(""), StanceLabel5::Neutral);
    }

    #[test]
    fn deterministic() {
        let text = "maga rally was wild";
        assert_eq!(StubClassifier.classify_text(text), StubClassifier.classify_text(text));
    }
}
