//! Tense/aspect categories and the verb-morphology slots they select.

use crate::{Error, Result};

/// The five inflection slots of an English verb paradigm.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
pub enum InflectionClass {
    #[serde(rename = "infinitive")]
    Infinitive,
    #[serde(rename = "3sg")]
    ThirdSingular,
    #[serde(rename = "past")]
    Past,
    #[serde(rename = "pastpart")]
    PastParticiple,
    #[serde(rename = "prespart")]
    PresentParticiple,
}

impl InflectionClass {
    pub const ALL: [InflectionClass; 5] = [
        InflectionClass::Infinitive,
        InflectionClass::ThirdSingular,
        InflectionClass::Past,
        InflectionClass::PastParticiple,
        InflectionClass::PresentParticiple,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            InflectionClass::Infinitive => "infinitive",
            InflectionClass::ThirdSingular => "3sg",
            InflectionClass::Past => "past",
            InflectionClass::PastParticiple => "pastpart",
            InflectionClass::PresentParticiple => "prespart",
        }
    }
}

impl std::fmt::Display for InflectionClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for InflectionClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        InflectionClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown inflection class '{s}'")))
    }
}

/// The seven tense/aspect categories covered by the toolkit. Each category
/// selects one inflection slot and, for the non-simple tenses, a canonical
/// auxiliary token that precedes it in the contextualized form.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize,
)]
#[serde(rename_all = "kebab-case")]
pub enum TenseTag {
    PresentSimple,
    PresentProgressive,
    PresentPerfect,
    PastSimple,
    PastProgressive,
    PastPerfect,
    ModalFuture,
}

impl TenseTag {
    pub const ALL: [TenseTag; 7] = [
        TenseTag::PresentSimple,
        TenseTag::PresentProgressive,
        TenseTag::PresentPerfect,
        TenseTag::PastSimple,
        TenseTag::PastProgressive,
        TenseTag::PastPerfect,
        TenseTag::ModalFuture,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TenseTag::PresentSimple => "present-simple",
            TenseTag::PresentProgressive => "present-progressive",
            TenseTag::PresentPerfect => "present-perfect",
            TenseTag::PastSimple => "past-simple",
            TenseTag::PastProgressive => "past-progressive",
            TenseTag::PastPerfect => "past-perfect",
            TenseTag::ModalFuture => "modal-future",
        }
    }

    /// Canonical auxiliary for the contextualized form (third singular where
    /// the paradigm inflects), or `None` for the simple tenses.
    pub fn auxiliary(self) -> Option<&'static str> {
        match self {
            TenseTag::PresentSimple | TenseTag::PastSimple => None,
            TenseTag::PresentProgressive => Some("is"),
            TenseTag::PresentPerfect => Some("has"),
            TenseTag::PastProgressive => Some("was"),
            TenseTag::PastPerfect => Some("had"),
            TenseTag::ModalFuture => Some("will"),
        }
    }

    /// The inflection slot holding the verb surface form for this tense.
    pub fn verb_form(self) -> InflectionClass {
        match self {
            TenseTag::PresentSimple => InflectionClass::ThirdSingular,
            TenseTag::PresentProgressive | TenseTag::PastProgressive => {
                InflectionClass::PresentParticiple
            }
            TenseTag::PresentPerfect | TenseTag::PastPerfect => InflectionClass::PastParticiple,
            TenseTag::PastSimple => InflectionClass::Past,
            TenseTag::ModalFuture => InflectionClass::Infinitive,
        }
    }
}

impl std::fmt::Display for TenseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for TenseTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TenseTag::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown tense '{s}'")))
    }
}
