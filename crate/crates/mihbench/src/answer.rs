use serde::{Deserialize, Serialize};

use crate::instance::Answer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParsedAnswer {
    Yes,
    No,
    Unparseable,
}

impl ParsedAnswer {
    pub fn answer(self) -> Option<Answer> {
        match self {
            ParsedAnswer::Yes => Some(Answer::Yes),
            ParsedAnswer::No => Some(Answer::No),
            ParsedAnswer::Unparseable => None,
        }
    }
}

impl From<Answer> for ParsedAnswer {
    fn from(a: Answer) -> Self {
        match a {
            Answer::Yes => ParsedAnswer::Yes,
            Answer::No => ParsedAnswer::No,
        }
    }
}

/// Reads a yes/no out of free-form model output.
///
/// The leading word decides when it is "yes" or "no" (any case, ignoring
/// surrounding punctuation); otherwise the first standalone "yes" or "no"
/// anywhere in the text does. Anything else is unparseable.
pub fn parse_answer(raw: &str) -> ParsedAnswer {
    // Words are maximal alphanumeric runs, so "no." and "(Yes)" both count
    // and "not"/"nothing"/"eyes" do not.
    let words = raw
        .split(|c: char| !c.is_alphanumeric())
        .filter(|w| !w.is_empty());
    for word in words {
        if word.eq_ignore_ascii_case("yes") {
            return ParsedAnswer::Yes;
        }
        if word.eq_ignore_ascii_case("no") {
            return ParsedAnswer::No;
        }
    }
    ParsedAnswer::Unparseable
}

/// A model's answer to one instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub instance_id: String,
    pub raw_text: String,
    pub parsed: ParsedAnswer,
}

impl PredictionRecord {
    pub fn new(instance_id: impl Into<String>, raw_text: impl Into<String>) -> Self {
        let raw_text = raw_text.into();
        Self {
            instance_id: instance_id.into(),
            parsed: parse_answer(&raw_text),
            raw_text,
        }
    }
}
