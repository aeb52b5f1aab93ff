use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotation::{AnnotationPool, MAX_COUNTABLE};
use crate::error::{KitError, Result};
use crate::instance::{
    count_question, label_count, InstanceMeta, QAInstance, TaskKind, SCHEMA_VERSION,
};
use crate::seed;

/// Quotas of the four kinds of count pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountComposition {
    /// Yes: neither image contains the object.
    pub double_absent: usize,
    /// Yes: both images contain the same non-zero number.
    pub equal_present: usize,
    /// No: exactly one image lacks the object.
    pub single_absent: usize,
    /// No: both images contain it, in different numbers.
    pub unequal_present: usize,
}

impl CountComposition {
    /// Half yes, half no; a quarter of the set double-absent positives and a
    /// quarter single-absent negatives.
    pub fn balanced(total: usize) -> Self {
        let positives = total.div_ceil(2);
        let negatives = total / 2;
        let quarter = total / 4;
        Self {
            double_absent: quarter,
            equal_present: positives - quarter,
            single_absent: quarter,
            unequal_present: negatives - quarter,
        }
    }

    pub fn total(&self) -> usize {
        self.double_absent + self.equal_present + self.single_absent + self.unequal_present
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairKind {
    DoubleAbsent,
    EqualPresent,
    SingleAbsent,
    UnequalPresent,
}

impl PairKind {
    fn name(self) -> &'static str {
        match self {
            PairKind::DoubleAbsent => "double-absent positives",
            PairKind::EqualPresent => "equal-count positives",
            PairKind::SingleAbsent => "single-absent negatives",
            PairKind::UnequalPresent => "unequal-count negatives",
        }
    }
}

/// Images grouped by how many of one object they hold (0..=3). Images
/// holding more than [`MAX_COUNTABLE`] are left out.
struct Buckets {
    object: usize,
    by_count: [Vec<usize>; (MAX_COUNTABLE + 1) as usize],
}

impl Buckets {
    fn nonzero(&self) -> impl Iterator<Item = usize> + '_ {
        (1..self.by_count.len()).filter(|&c| !self.by_count[c].is_empty())
    }

    fn supports(&self, kind: PairKind) -> bool {
        match kind {
            PairKind::DoubleAbsent => self.by_count[0].len() >= 2,
            PairKind::EqualPresent => (1..self.by_count.len()).any(|c| self.by_count[c].len() >= 2),
            PairKind::SingleAbsent => {
                !self.by_count[0].is_empty() && self.nonzero().next().is_some()
            }
            PairKind::UnequalPresent => self.nonzero().count() >= 2,
        }
    }

    fn draw(&self, kind: PairKind, rng: &mut ChaCha8Rng) -> ([usize; 2], [u32; 2]) {
        let two_from = |bucket: &[usize], rng: &mut ChaCha8Rng| {
            let picked: Vec<usize> = bucket.choose_multiple(rng, 2).copied().collect();
            [picked[0], picked[1]]
        };
        let one_from =
            |bucket: &[usize], rng: &mut ChaCha8Rng| *bucket.choose(rng).expect("non-empty");
        let (mut images, mut counts) = match kind {
            PairKind::DoubleAbsent => (two_from(&self.by_count[0], rng), [0, 0]),
            PairKind::EqualPresent => {
                let options: Vec<usize> = (1..self.by_count.len())
                    .filter(|&c| self.by_count[c].len() >= 2)
                    .collect();
                let c = *options.choose(rng).expect("supported");
                (two_from(&self.by_count[c], rng), [c as u32; 2])
            }
            PairKind::SingleAbsent => {
                let options: Vec<usize> = self.nonzero().collect();
                let c = *options.choose(rng).expect("supported");
                (
                    [
                        one_from(&self.by_count[0], rng),
                        one_from(&self.by_count[c], rng),
                    ],
                    [0, c as u32],
                )
            }
            PairKind::UnequalPresent => {
                let options: Vec<usize> = self.nonzero().collect();
                let picked: Vec<usize> = options.choose_multiple(rng, 2).copied().collect();
                (
                    [
                        one_from(&self.by_count[picked[0]], rng),
                        one_from(&self.by_count[picked[1]], rng),
                    ],
                    [picked[0] as u32, picked[1] as u32],
                )
            }
        };
        if rng.random_bool(0.5) {
            images.swap(0, 1);
            counts.swap(0, 1);
        }
        (images, counts)
    }
}

/// Balanced two-image count set of `total` questions.
pub fn build_count_set(pool: &AnnotationPool, total: usize, seed: u64) -> Result<Vec<QAInstance>> {
    build_count_with(pool, CountComposition::balanced(total), seed)
}

pub fn build_count_with(
    pool: &AnnotationPool,
    composition: CountComposition,
    seed: u64,
) -> Result<Vec<QAInstance>> {
    let buckets: Vec<Buckets> = (0..pool.vocabulary().len())
        .map(|object| {
            let label = &pool.vocabulary()[object];
            let mut by_count: [Vec<usize>; (MAX_COUNTABLE + 1) as usize] = Default::default();
            for (img, rec) in pool.records().iter().enumerate() {
                let n = rec.counted(label);
                if n <= MAX_COUNTABLE {
                    by_count[n as usize].push(img);
                }
            }
            Buckets { object, by_count }
        })
        .collect();

    let mut rng = seed::rng(seed);
    let plan = [
        (PairKind::DoubleAbsent, composition.double_absent),
        (PairKind::EqualPresent, composition.equal_present),
        (PairKind::SingleAbsent, composition.single_absent),
        (PairKind::UnequalPresent, composition.unequal_present),
    ];

    let mut drafts = Vec::with_capacity(composition.total());
    for (kind, quota) in plan {
        if quota == 0 {
            continue;
        }
        let feasible: Vec<&Buckets> = buckets.iter().filter(|b| b.supports(kind)).collect();
        if feasible.is_empty() {
            return Err(KitError::InsufficientData(format!(
                "count set: {quota} {} requested but no object in the pool supports one",
                kind.name()
            )));
        }
        for _ in 0..quota {
            let b = *feasible.choose(&mut rng).expect("non-empty");
            let (images, counts) = b.draw(kind, &mut rng);
            drafts.push((b.object, images, counts));
        }
    }

    drafts.shuffle(&mut rng);
    Ok(drafts
        .into_iter()
        .enumerate()
        .map(|(i, (object, images, counts))| {
            let label = pool.vocabulary()[object].clone();
            QAInstance {
                schema_version: SCHEMA_VERSION,
                id: format!("count-{i:04}"),
                task: TaskKind::Count,
                image_ids: images
                    .iter()
                    .map(|&img| pool.record(img).image_id.clone())
                    .collect(),
                question: count_question(&label, 2),
                object: label,
                gold: label_count(counts[0], counts[1]),
                meta: InstanceMeta::Count {
                    counts: counts.to_vec(),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn composition_quarters() {
        let c = CountComposition::balanced(800);
        assert_eq!(
            (
                c.double_absent,
                c.equal_present,
                c.single_absent,
                c.unequal_present
            ),
            (200, 200, 200, 200)
        );
        let c = CountComposition::balanced(2);
        assert_eq!(c.total(), 2);
        assert_eq!(c.double_absent + c.equal_present, 1);
        let c = CountComposition::balanced(7);
        assert_eq!(c.total(), 7);
    }
}
