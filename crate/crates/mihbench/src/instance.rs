use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Answer::Yes
        } else {
            Answer::No
        }
    }

    pub fn is_yes(self) -> bool {
        self == Answer::Yes
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Existence,
    Count,
    Identity,
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TaskKind::Existence => "existence",
            TaskKind::Count => "count",
            TaskKind::Identity => "identity",
        })
    }
}

/// How the absent object of a negative existence question is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExistenceSubtype {
    /// Uniformly among the objects the image lacks.
    Random,
    /// The most frequent object in the pool that the image lacks.
    Popular,
    /// The absent object that co-occurs most with what the image shows.
    Adversarial,
}

impl ExistenceSubtype {
    pub const ALL: [ExistenceSubtype; 3] = [
        ExistenceSubtype::Random,
        ExistenceSubtype::Popular,
        ExistenceSubtype::Adversarial,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExistenceSubtype::Random => "random",
            ExistenceSubtype::Popular => "popular",
            ExistenceSubtype::Adversarial => "adversarial",
        }
    }
}

impl fmt::Display for ExistenceSubtype {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-task ground truth from which `gold` is derived.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceMeta {
    Existence {
        subtype: ExistenceSubtype,
        /// Whether each image contains the object.
        labels: Vec<bool>,
    },
    Count {
        counts: Vec<u32>,
    },
    Identity {
        group: String,
        /// Whether each image is a view of the target object.
        same_instance: Vec<bool>,
        /// 1-based position of the distractor, if any.
        negative_position: Option<usize>,
    },
}

/// One benchmark question. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QAInstance {
    pub schema_version: u32,
    pub id: String,
    pub task: TaskKind,
    pub image_ids: Vec<String>,
    pub object: String,
    pub question: String,
    pub gold: Answer,
    pub meta: InstanceMeta,
}

impl QAInstance {
    pub fn subtype(&self) -> Option<ExistenceSubtype> {
        match &self.meta {
            InstanceMeta::Existence { subtype, .. } => Some(*subtype),
            _ => None,
        }
    }
}

/// "a" or "an", chosen by whether the label starts with a vowel letter.
/// This is a spelling heuristic ("an hour" and "a unicorn" come out wrong).
pub fn article(label: &str) -> &'static str {
    match label
        .trim_start()
        .chars()
        .next()
        .map(|c| c.to_ascii_lowercase())
    {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

pub(crate) fn existence_question(object: &str, images: usize) -> String {
    format!(
        "Is there {} {object} in all {images} images?",
        article(object)
    )
}

pub(crate) fn count_question(object: &str, images: usize) -> String {
    format!("Are there the same number of {object} in all {images} images?")
}

pub(crate) fn identity_question(object: &str, images: usize) -> String {
    format!("Is there a same {object} in all {images} images?")
}

/// Yes iff the object is in every image.
pub fn label_existence(labels: &[bool]) -> Result<Answer> {
    if labels.is_empty() {
        return Err(KitError::InvalidInput(
            "existence needs at least one label".into(),
        ));
    }
    Ok(Answer::from_bool(labels.iter().all(|l| *l)))
}

/// Yes iff both images hold the same number of the object, including zero.
pub fn label_count(n1: u32, n2: u32) -> Answer {
    Answer::from_bool(n1 == n2)
}

/// Recomputes the gold answer from an instance's meta.
pub fn rederive_gold(instance: &QAInstance) -> Result<Answer> {
    match &instance.meta {
        InstanceMeta::Existence { labels, .. } => label_existence(labels),
        InstanceMeta::Count { counts } => match counts.as_slice() {
            [a, b] => Ok(label_count(*a, *b)),
            other => Err(KitError::InvalidInput(format!(
                "count meta needs two counts, got {}",
                other.len()
            ))),
        },
        InstanceMeta::Identity { same_instance, .. } => label_existence(same_instance),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn existence_labels() {
        assert_eq!(label_existence(&[true, true, true]).unwrap(), Answer::Yes);
        assert_eq!(label_existence(&[true, false, true]).unwrap(), Answer::No);
        assert_eq!(label_existence(&[false, false, false]).unwrap(), Answer::No);
        assert!(label_existence(&[]).is_err());
    }

    #[test]
    fn count_labels() {
        assert_eq!(label_count(2, 2), Answer::Yes);
        assert_eq!(label_count(3, 1), Answer::No);
        assert_eq!(label_count(0, 0), Answer::Yes);
    }

    #[test]
    fn templates() {
        assert_eq!(
            existence_question("dog", 3),
            "Is there a dog in all 3 images?"
        );
        assert_eq!(
            existence_question("elephant", 3),
            "Is there an elephant in all 3 images?"
        );
        assert_eq!(
            existence_question("Umbrella", 5),
            "Is there an Umbrella in all 5 images?"
        );
        assert_eq!(
            count_question("traffic light", 2),
            "Are there the same number of traffic light in all 2 images?"
        );
        assert_eq!(
            identity_question("chair", 4),
            "Is there a same chair in all 4 images?"
        );
    }

    #[test]
    fn meta_serialization_shape() {
        let inst = QAInstance {
            schema_version: SCHEMA_VERSION,
            id: "count-0000".into(),
            task: TaskKind::Count,
            image_ids: vec!["a".into(), "b".into()],
            object: "dog".into(),
            question: count_question("dog", 2),
            gold: Answer::No,
            meta: InstanceMeta::Count { counts: vec![1, 2] },
        };
        let json = serde_json::to_string(&inst).unwrap();
        assert_eq!(
            json,
            r#"{"schema_version":1,"id":"count-0000","task":"count","image_ids":["a","b"],"object":"dog","question":"Are there the same number of dog in all 2 images?","gold":"no","meta":{"count":{"counts":[1,2]}}}"#
        );
        assert_eq!(serde_json::from_str::<QAInstance>(&json).unwrap(), inst);
        assert_eq!(rederive_gold(&inst).unwrap(), Answer::No);
    }
}
