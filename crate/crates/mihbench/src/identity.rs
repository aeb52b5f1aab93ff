use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{KitError, Result};
use crate::instance::{
    identity_question, Answer, InstanceMeta, QAInstance, TaskKind, SCHEMA_VERSION,
};
use crate::seed;
use crate::similarity::SimilarityMatrix;

/// Frames of one physical object captured from several viewpoints, in
/// capture order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewGroup {
    pub object_id: String,
    /// Object category used in the question, e.g. "chair".
    pub category: String,
    pub views: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct IdentityInputs {
    pub groups: Vec<ViewGroup>,
    pub similarity: SimilarityMatrix,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentityOptions {
    pub seq_len: usize,
    /// 1-based distractor position; `None` draws it uniformly per instance.
    pub negative_position: Option<usize>,
    pub id_prefix: String,
}

impl Default for IdentityOptions {
    fn default() -> Self {
        Self {
            seq_len: 4,
            negative_position: None,
            id_prefix: "identity".into(),
        }
    }
}

/// Balanced 4-view identity set with the distractor at a random position.
pub fn build_identity_set(
    groups: &[ViewGroup],
    similarity: &SimilarityMatrix,
    total: usize,
    seed: u64,
) -> Result<Vec<QAInstance>> {
    build_identity(
        groups,
        similarity,
        total.div_ceil(2),
        total / 2,
        &IdentityOptions::default(),
        seed,
    )
}

/// Positives show `seq_len` evenly spread views of one object. Negatives
/// show `seq_len - 1` random views of a target object plus one view from a
/// different category: the candidate whose mean similarity to the target
/// views is lowest (ties go to the smallest id).
pub fn build_identity(
    groups: &[ViewGroup],
    similarity: &SimilarityMatrix,
    positives: usize,
    negatives: usize,
    options: &IdentityOptions,
    seed: u64,
) -> Result<Vec<QAInstance>> {
    let len = options.seq_len;
    if len < 2 {
        return Err(KitError::InvalidInput(format!(
            "identity questions need at least 2 images, got {len}"
        )));
    }
    if let Some(p) = options.negative_position {
        if p == 0 || p > len {
            return Err(KitError::InvalidInput(format!(
                "negative position {p} is outside 1..={len}"
            )));
        }
    }
    if groups.is_empty() {
        return Err(KitError::InsufficientData(
            "identity set: no view groups supplied".into(),
        ));
    }
    if let Some(g) = groups.iter().find(|g| g.views.len() < len) {
        return Err(KitError::InsufficientData(format!(
            "identity set: group `{}` has {} views, {len} required",
            g.object_id,
            g.views.len()
        )));
    }
    let missing: Vec<String> = groups
        .iter()
        .flat_map(|g| g.views.iter())
        .filter(|v| !similarity.contains(v))
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if !missing.is_empty() {
        return Err(KitError::MissingIds(missing));
    }
    let categories: BTreeSet<&str> = groups.iter().map(|g| g.category.as_str()).collect();
    if negatives > 0 && categories.len() < 2 {
        return Err(KitError::InsufficientData(
            "identity set: distractors need at least two object categories".into(),
        ));
    }

    let mut rng = seed::rng(seed);
    // (group, image ids, same-instance flags, 1-based distractor position)
    type Draft = (usize, Vec<String>, Vec<bool>, Option<usize>);
    let mut drafts: Vec<Draft> = Vec::with_capacity(positives + negatives);

    for _ in 0..positives {
        let g = rng.random_range(0..groups.len());
        let views = &groups[g].views;
        let stride = views.len() as f64 / len as f64;
        let offset = rng.random_range(0.0..stride);
        let picked: Vec<String> = (0..len)
            .map(|i| views[((offset + i as f64 * stride) as usize).min(views.len() - 1)].clone())
            .collect();
        drafts.push((g, picked, vec![true; len], None));
    }

    for _ in 0..negatives {
        let g = rng.random_range(0..groups.len());
        let group = &groups[g];
        let mut idx: Vec<usize> = index::sample(&mut rng, group.views.len(), len - 1).into_vec();
        idx.sort_unstable();
        let mut images: Vec<String> = idx.iter().map(|&i| group.views[i].clone()).collect();
        let distractor = most_dissimilar(groups, &group.category, &images, similarity);
        let pos = match options.negative_position {
            Some(p) => p - 1,
            None => rng.random_range(0..len),
        };
        images.insert(pos, distractor);
        let mut same = vec![true; len];
        same[pos] = false;
        drafts.push((g, images, same, Some(pos + 1)));
    }

    drafts.shuffle(&mut rng);
    Ok(drafts
        .into_iter()
        .enumerate()
        .map(|(i, (g, image_ids, same_instance, negative_position))| {
            let category = groups[g].category.clone();
            QAInstance {
                schema_version: SCHEMA_VERSION,
                id: format!("{}-{i:04}", options.id_prefix),
                task: TaskKind::Identity,
                image_ids,
                question: identity_question(&category, len),
                object: category,
                gold: Answer::from_bool(negative_position.is_none()),
                meta: InstanceMeta::Identity {
                    group: groups[g].object_id.clone(),
                    same_instance,
                    negative_position,
                },
            }
        })
        .collect())
}

fn most_dissimilar(
    groups: &[ViewGroup],
    target_category: &str,
    targets: &[String],
    similarity: &SimilarityMatrix,
) -> String {
    let mut best: Option<(f64, &str)> = None;
    for group in groups.iter().filter(|g| g.category != target_category) {
        for view in &group.views {
            let mean = targets
                .iter()
                .map(|t| similarity.score(t, view).expect("coverage checked"))
                .sum::<f64>()
                / targets.len() as f64;
            let better = match best {
                None => true,
                Some((s, id)) => mean < s || (mean == s && view.as_str() < id),
            };
            if better {
                best = Some((mean, view));
            }
        }
    }
    best.expect("another category exists").1.to_string()
}
