use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::annotation::AnnotationPool;
use crate::error::{KitError, Result};
use crate::instance::{
    existence_question, Answer, ExistenceSubtype, InstanceMeta, QAInstance, TaskKind,
    SCHEMA_VERSION,
};
use crate::seed;

/// Where the image lacking the object goes in a negative instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NegativePlacement {
    #[default]
    Random,
    Last,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExistenceOptions {
    pub seq_len: usize,
    pub placement: NegativePlacement,
    /// Prefix for instance ids; defaults to `existence-<subtype>`.
    pub id_prefix: Option<String>,
}

impl Default for ExistenceOptions {
    fn default() -> Self {
        Self {
            seq_len: 3,
            placement: NegativePlacement::Random,
            id_prefix: None,
        }
    }
}

/// Balanced 3-image existence set: `per_subtype` instances, half of them yes
/// (the odd one out, if any, is a yes).
pub fn build_existence_set(
    pool: &AnnotationPool,
    subtype: ExistenceSubtype,
    per_subtype: usize,
    seed: u64,
) -> Result<Vec<QAInstance>> {
    build_existence(
        pool,
        subtype,
        per_subtype.div_ceil(2),
        per_subtype / 2,
        &ExistenceOptions::default(),
        seed,
    )
}

/// Existence instances with an explicit positive/negative split.
///
/// Positives sample `seq_len` distinct images that all contain one object.
/// Negatives pick an anchor image, choose an object it lacks according to
/// `subtype`, and fill the other `seq_len - 1` slots with images containing
/// that object, so exactly one image is missing it. Only objects present in
/// at least `seq_len - 1` other images qualify as negatives.
pub fn build_existence(
    pool: &AnnotationPool,
    subtype: ExistenceSubtype,
    positives: usize,
    negatives: usize,
    options: &ExistenceOptions,
    seed: u64,
) -> Result<Vec<QAInstance>> {
    let len = options.seq_len;
    if len < 2 {
        return Err(KitError::InvalidInput(format!(
            "existence questions need at least 2 images, got {len}"
        )));
    }
    let mut rng = seed::rng(seed);

    let mut drafts: Vec<Draft> = Vec::with_capacity(positives + negatives);

    if positives > 0 {
        let candidates: Vec<usize> = (0..pool.vocabulary().len())
            .filter(|&o| pool.frequency(o) >= len)
            .collect();
        if candidates.is_empty() {
            return Err(KitError::InsufficientData(format!(
                "{subtype} existence: {positives} positives requested but no object is present in {len} images"
            )));
        }
        for _ in 0..positives {
            let object = *candidates.choose(&mut rng).expect("non-empty");
            let mut images = sample_distinct(&mut rng, pool.containing(object), len);
            images.shuffle(&mut rng);
            drafts.push(Draft {
                object,
                labels: vec![true; len],
                images,
            });
        }
    }

    if negatives > 0 {
        let anchors: Vec<(usize, Vec<usize>)> = (0..pool.len())
            .map(|img| (img, absent_candidates(pool, img, len - 1)))
            .filter(|(_, c)| !c.is_empty())
            .collect();
        if anchors.is_empty() {
            return Err(KitError::InsufficientData(format!(
                "{subtype} existence: {negatives} negatives requested but no image lacks an object that {} other images contain",
                len - 1
            )));
        }
        for _ in 0..negatives {
            let (anchor, absent) = anchors.choose(&mut rng).expect("non-empty");
            let object = pick_negative_object(pool, *anchor, absent, subtype, &mut rng);
            let mut images = sample_distinct(&mut rng, pool.containing(object), len - 1);
            images.shuffle(&mut rng);
            let pos = match options.placement {
                NegativePlacement::Random => rng.random_range(0..len),
                NegativePlacement::Last => len - 1,
            };
            images.insert(pos, *anchor);
            let mut labels = vec![true; len];
            labels[pos] = false;
            drafts.push(Draft {
                object,
                labels,
                images,
            });
        }
    }

    drafts.shuffle(&mut rng);
    let prefix = options
        .id_prefix
        .clone()
        .unwrap_or_else(|| format!("existence-{subtype}"));
    Ok(drafts
        .into_iter()
        .enumerate()
        .map(|(i, d)| {
            let object = pool.vocabulary()[d.object].clone();
            QAInstance {
                schema_version: SCHEMA_VERSION,
                id: format!("{prefix}-{i:04}"),
                task: TaskKind::Existence,
                image_ids: d
                    .images
                    .iter()
                    .map(|&img| pool.record(img).image_id.clone())
                    .collect(),
                question: existence_question(&object, len),
                object,
                gold: Answer::from_bool(d.labels.iter().all(|l| *l)),
                meta: InstanceMeta::Existence {
                    subtype,
                    labels: d.labels,
                },
            }
        })
        .collect())
}

struct Draft {
    object: usize,
    images: Vec<usize>,
    labels: Vec<bool>,
}

fn sample_distinct(rng: &mut ChaCha8Rng, from: &[usize], amount: usize) -> Vec<usize> {
    index::sample(rng, from.len(), amount)
        .into_iter()
        .map(|i| from[i])
        .collect()
}

/// Objects absent from `image` but present in at least `support` images.
fn absent_candidates(pool: &AnnotationPool, image: usize, support: usize) -> Vec<usize> {
    let present = pool.present_in(image);
    (0..pool.vocabulary().len())
        .filter(|o| !present.contains(o) && pool.frequency(*o) >= support)
        .collect()
}

/// Ties break toward the lexicographically smallest label, which is the
/// lowest vocabulary index.
pub(crate) fn pick_negative_object(
    pool: &AnnotationPool,
    anchor: usize,
    absent: &[usize],
    subtype: ExistenceSubtype,
    rng: &mut ChaCha8Rng,
) -> usize {
    match subtype {
        ExistenceSubtype::Random => *absent.choose(rng).expect("non-empty"),
        ExistenceSubtype::Popular => argmax_first(absent, |o| pool.frequency(o) as u64),
        ExistenceSubtype::Adversarial => {
            let present = pool.present_in(anchor);
            argmax_first(absent, |o| {
                present
                    .iter()
                    .map(|&p| pool.cooccurrence(o, p) as u64)
                    .sum()
            })
        }
    }
}

fn argmax_first(items: &[usize], score: impl Fn(usize) -> u64) -> usize {
    let mut best = items[0];
    let mut best_score = score(best);
    for &o in &items[1..] {
        let s = score(o);
        if s > best_score {
            best = o;
            best_score = s;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::annotation::{AnnotationRecord, ObjectAnnotation};

    fn rec(id: &str, objs: &[&str]) -> AnnotationRecord {
        AnnotationRecord {
            image_id: id.into(),
            objects: objs
                .iter()
                .map(|l| {
                    (
                        l.to_string(),
                        ObjectAnnotation {
                            confidence: 0.9,
                            count: 1,
                        },
                    )
                })
                .collect(),
        }
    }

    #[test]
    fn forced_positives() {
        let pool = AnnotationPool::new(
            (0..6)
                .map(|i| rec(&format!("img{i}"), &["apple"]))
                .collect(),
        )
        .unwrap();
        let set = build_existence(
            &pool,
            ExistenceSubtype::Random,
            10,
            0,
            &ExistenceOptions::default(),
            1,
        )
        .unwrap();
        assert_eq!(set.len(), 10);
        assert!(set.iter().all(|i| i.gold == Answer::Yes));
        assert_eq!(set[0].question, "Is there an apple in all 3 images?");
        // every image holds the apple, so no negative can be formed
        let err = build_existence_set(&pool, ExistenceSubtype::Random, 10, 1).unwrap_err();
        assert!(matches!(err, KitError::InsufficientData(_)));
    }

    #[test]
    fn popular_picks_most_frequent_absent() {
        // dog in 4 images, cat in 3, cup in 2; image "x" holds only the cup
        let pool = AnnotationPool::new(vec![
            rec("a", &["dog", "cat"]),
            rec("b", &["dog", "cat"]),
            rec("c", &["dog", "cat", "cup"]),
            rec("d", &["dog", "cup"]),
            rec("x", &["cup"]),
        ])
        .unwrap();
        let mut rng = seed::rng(0);
        let x = 4;
        let absent = absent_candidates(&pool, x, 2);
        let chosen = pick_negative_object(&pool, x, &absent, ExistenceSubtype::Popular, &mut rng);
        assert_eq!(pool.vocabulary()[chosen], "dog");
    }

    #[test]
    fn rejects_short_sequences() {
        let pool = AnnotationPool::new(vec![rec("a", &["dog"])]).unwrap();
        let opts = ExistenceOptions {
            seq_len: 1,
            ..Default::default()
        };
        assert!(build_existence(&pool, ExistenceSubtype::Random, 1, 1, &opts, 0).is_err());
    }
}
