use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};

/// Detections below this confidence are treated as absent.
pub const PRESENCE_THRESHOLD: f64 = 0.5;

/// Objects with more instances than this in an image are not used for
/// count questions in that image.
pub const MAX_COUNTABLE: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectAnnotation {
    /// Highest detection confidence for the label in the image.
    pub confidence: f64,
    /// Number of instances detected at or above [`PRESENCE_THRESHOLD`].
    pub count: u32,
}

/// Detector output for one image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub image_id: String,
    pub objects: BTreeMap<String, ObjectAnnotation>,
}

impl AnnotationRecord {
    pub fn is_present(&self, label: &str) -> bool {
        self.objects
            .get(label)
            .is_some_and(|o| o.confidence >= PRESENCE_THRESHOLD)
    }

    /// Instance count used for count questions; zero when absent.
    pub fn counted(&self, label: &str) -> u32 {
        match self.objects.get(label) {
            Some(o) if o.confidence >= PRESENCE_THRESHOLD => o.count,
            _ => 0,
        }
    }
}

/// Validated annotations with the lookup tables the builders need.
///
/// Vocabulary, frequencies and co-occurrences are computed over the pool
/// itself.
#[derive(Debug, Clone)]
pub struct AnnotationPool {
    records: Vec<AnnotationRecord>,
    vocabulary: Vec<String>,
    present: Vec<BTreeSet<usize>>,
    containing: Vec<Vec<usize>>,
    cooccurrence: Vec<Vec<u32>>,
}

impl AnnotationPool {
    pub fn new(records: Vec<AnnotationRecord>) -> Result<Self> {
        let mut seen = HashSet::new();
        for r in &records {
            if !seen.insert(r.image_id.as_str()) {
                return Err(KitError::InvalidInput(format!(
                    "duplicate image id `{}`",
                    r.image_id
                )));
            }
            for (label, o) in &r.objects {
                if !(0.0..=1.0).contains(&o.confidence) {
                    return Err(KitError::InvalidInput(format!(
                        "image `{}`: confidence {} for `{label}` is outside [0, 1]",
                        r.image_id, o.confidence
                    )));
                }
            }
        }

        let vocabulary: Vec<String> = records
            .iter()
            .flat_map(|r| r.objects.keys().filter(|l| r.is_present(l)).cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let index: BTreeMap<&str, usize> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, l)| (l.as_str(), i))
            .collect();

        let present: Vec<BTreeSet<usize>> = records
            .iter()
            .map(|r| {
                r.objects
                    .keys()
                    .filter(|l| r.is_present(l))
                    .map(|l| index[l.as_str()])
                    .collect()
            })
            .collect();

        let mut containing = vec![Vec::new(); vocabulary.len()];
        let mut cooccurrence = vec![vec![0u32; vocabulary.len()]; vocabulary.len()];
        for (img, objs) in present.iter().enumerate() {
            for &o in objs {
                containing[o].push(img);
                for &p in objs {
                    if p != o {
                        cooccurrence[o][p] += 1;
                    }
                }
            }
        }

        Ok(Self {
            records,
            vocabulary,
            present,
            containing,
            cooccurrence,
        })
    }

    pub fn records(&self) -> &[AnnotationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Labels present (confidence at or above threshold) in at least one image.
    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.vocabulary
            .binary_search_by(|l| l.as_str().cmp(label))
            .ok()
    }

    pub fn record(&self, image: usize) -> &AnnotationRecord {
        &self.records[image]
    }

    pub fn find(&self, image_id: &str) -> Option<&AnnotationRecord> {
        self.records.iter().find(|r| r.image_id == image_id)
    }

    pub(crate) fn present_in(&self, image: usize) -> &BTreeSet<usize> {
        &self.present[image]
    }

    /// Images containing object `label_idx`, in pool order.
    pub(crate) fn containing(&self, label_idx: usize) -> &[usize] {
        &self.containing[label_idx]
    }

    /// Number of images in which the object is present.
    pub fn frequency(&self, label_idx: usize) -> usize {
        self.containing[label_idx].len()
    }

    /// Number of images in which both objects are present.
    pub fn cooccurrence(&self, a: usize, b: usize) -> u32 {
        self.cooccurrence[a][b]
    }
}
