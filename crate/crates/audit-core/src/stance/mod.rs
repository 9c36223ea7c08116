//! Political-stance labeling of comments.
//!
//! The five-way label scheme lives here together with its deterministic
//! three-way collapse, an HTTP chat-completion classifier with disk caching
//! ([`client`]), an offline keyword stub ([`stub`]), sampling estimators
//! ([`sample`]), and classifier agreement evaluation ([`eval`]).

mod client;
mod eval;
mod prompt;
mod sample;
mod stub;

pub use client::{ClassifierConfig, LlmClassifier, LookupClassifier, StanceClassifier};
pub use eval::{evaluate_classifier, AgreementReport};
pub use prompt::{render_prompt, STANCE_PROMPT_TEMPLATE};
pub use sample::{classify_all, sample_and_estimate, StanceSample};
pub use stub::StubClassifier;

use serde::{Deserialize, Serialize};

/// Five-way political stance of a single comment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StanceLabel5 {
    #[serde(rename = "pro_dem")]
    ProDemocrat,
    #[serde(rename = "anti_dem")]
    AntiDemocrat,
    #[serde(rename = "pro_rep")]
    ProRepublican,
    #[serde(rename = "anti_rep")]
    AntiRepublican,
    #[serde(rename = "neutral")]
    Neutral,
}

/// Collapsed three-way leaning.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StanceLabel3 {
    Left,
    Right,
    Neutral,
}

/// Collapse the five-way scheme: pro-Democrat and anti-Republican fold into
/// Left, pro-Republican and anti-Democrat into Right.
pub fn collapse_stance(label: StanceLabel5) -> StanceLabel3 {
    match label {
        StanceLabel5::ProDemocrat | StanceLabel5::AntiRepublican => StanceLabel3::Left,
        StanceLabel5::ProRepublican | StanceLabel5::AntiDemocrat => StanceLabel3::Right,
        StanceLabel5::Neutral => StanceLabel3::Neutral,
    }
}

impl StanceLabel5 {
    /// All labels in codebook order. Also the row/column order of confusion
    /// matrices.
    pub const ALL: [StanceLabel5; 5] = [
        StanceLabel5::ProDemocrat,
        StanceLabel5::AntiDemocrat,
        StanceLabel5::ProRepublican,
        StanceLabel5::AntiRepublican,
        StanceLabel5::Neutral,
    ];

    /// Human-readable surface form, as emitted by classifiers.
    pub fn canonical_name(self) -> &'static str {
        match self {
            StanceLabel5::ProDemocrat => "Pro-Democrat",
            StanceLabel5::AntiDemocrat => "Anti-Democrat",
            StanceLabel5::ProRepublican => "Pro-Republican",
            StanceLabel5::AntiRepublican => "Anti-Republican",
            StanceLabel5::Neutral => "Neutral",
        }
    }

    /// Storage code used in JSONL/CSV files.
    pub fn code(self) -> &'static str {
        match self {
            StanceLabel5::ProDemocrat => "pro_dem",
            StanceLabel5::AntiDemocrat => "anti_dem",
            StanceLabel5::ProRepublican => "pro_rep",
            StanceLabel5::AntiRepublican => "anti_rep",
            StanceLabel5::Neutral => "neutral",
        }
    }

    fn normalized(self) -> &'static str {
        match self {
            StanceLabel5::ProDemocrat => "prodemocrat",
            StanceLabel5::AntiDemocrat => "antidemocrat",
            StanceLabel5::ProRepublican => "prorepublican",
            StanceLabel5::AntiRepublican => "antirepublican",
            StanceLabel5::Neutral => "neutral",
        }
    }

    /// Strict parse: case-insensitive, punctuation-stripped match against the
    /// five surface forms (accepts both "Pro-Democrat" and "pro_dem").
    pub fn parse(text: &str) -> Option<StanceLabel5> {
        let norm = normalize(text);
        Self::ALL.into_iter().find(|&l| {
            norm == l.normalized() || norm == l.code().replace('_', "") || norm == strip_dem_rep(l)
        })
    }

    /// Parse a free-form classifier response: strict match first, then the
    /// earliest label substring, then `None` (caller records "unlabeled").
    pub fn parse_response(text: &str) -> Option<StanceLabel5> {
        if let Some(label) = Self::parse(text) {
            return Some(label);
        }
        let norm = normalize(text);
        Self::ALL
            .iter()
            .copied()
            .filter_map(|l| norm.find(l.normalized()).map(|pos| (pos, l)))
            .min_by_key(|&(pos, _)| pos)
            .map(|(_, l)| l)
    }
}

// Short storage aliases like "pro_dem" normalize to "prodem"; accept those too.
fn strip_dem_rep(label: StanceLabel5) -> &'static str {
    match label {
        StanceLabel5::ProDemocrat => "prodem",
        StanceLabel5::AntiDemocrat => "antidem",
        StanceLabel5::ProRepublican => "prorep",
        StanceLabel5::AntiRepublican => "antirep",
        StanceLabel5::Neutral => "neutral",
    }
}

fn normalize(text: &str) -> String {
    text.chars()
        .filter(|c| c.is_alphanumeric())
        .flat_map(|c| c.to_lowercase())
        .collect()
}

impl std::fmt::Display for StanceLabel3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StanceLabel3::Left => write!(f, "left"),
            StanceLabel3::Right => write!(f, "right"),
            StanceLabel3::Neutral => write!(f, "neutral"),
        }
    }
}
